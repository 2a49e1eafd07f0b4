//! JSON rendering of analyses under the stable `report_v1` schema. Every
//! numeric field goes through one formatter so infinities serialize as the
//! strings "+inf" and "-inf" instead of breaking strict JSON parsers, and
//! all maps are ordered, so a report is byte-identical across runs with the
//! same seed and configuration. Wall time lives only in the provenance
//! block; consumers comparing runs should compare the payload sections.

use crate::blochspace::BlochAnalysis;
use crate::geometry::{Interval, Point};
use crate::operator::{AnalysisReport, Boundedness, Compactness};
use crate::oracle::{Consistency, OracleReport};
use crate::supsearch::{LimitEstimate, LimitVerdict, SupResult, SupStatus};
use crate::weightedspace::MuNormResult;
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "report_v1";

/// Real number as JSON, with non-finite values as strings.
pub fn json_real(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x == f64::INFINITY {
        Value::String("+inf".into())
    } else if x == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        json!(x)
    }
}

pub fn json_complex(c: Complex64) -> Value {
    json!([json_real(c.re), json_real(c.im)])
}

pub fn json_point(p: &Point) -> Value {
    Value::Array(p.coords().iter().map(|c| json_complex(*c)).collect())
}

pub fn json_interval(i: &Interval) -> Value {
    json!({
        "lower": json_real(i.lower),
        "upper": json_real(i.upper),
        "exact": i.exact,
    })
}

fn status_str(s: SupStatus) -> &'static str {
    match s {
        SupStatus::Converged => "converged",
        SupStatus::SupDiverging => "sup_diverging",
        SupStatus::MaxRefinementReached => "max_refinement_reached",
    }
}

fn json_profile(profile: &[(f64, Option<f64>)]) -> Value {
    Value::Array(
        profile
            .iter()
            .map(|(t, v)| json!([json_real(*t), v.map_or(Value::Null, json_real)]))
            .collect(),
    )
}

pub fn json_sup_result(r: &SupResult) -> Value {
    json!({
        "value": json_real(r.value),
        "witness": json_point(&r.witness),
        "status": status_str(r.status),
        "shell_profile": json_profile(&r.shell_profile),
        "evaluations": r.evaluations,
        "skipped": r.skipped,
    })
}

pub fn json_mu_norm(r: &MuNormResult) -> Value {
    json!({
        "value": json_real(r.value),
        "witness": json_point(&r.witness),
        "status": status_str(r.status),
        "evaluations": r.evaluations,
    })
}

fn json_limit(l: &LimitEstimate) -> Value {
    let verdict = match l.verdict {
        LimitVerdict::TendsToZero { eps } => json!({
            "kind": "tends_to_zero",
            "eps": json_real(eps),
        }),
        LimitVerdict::BoundedAway { liminf } => json!({
            "kind": "bounded_away",
            "liminf": json_real(liminf),
        }),
        LimitVerdict::Inconclusive => json!({ "kind": "inconclusive" }),
        LimitVerdict::BoundaryUnreachable => json!({ "kind": "boundary_unreachable" }),
    };
    json!({
        "sequence": json_profile(&l.sequence),
        "verdict": verdict,
        "image_reach": json_real(l.image_reach),
    })
}

fn boundedness_str(b: Boundedness) -> &'static str {
    match b {
        Boundedness::Bounded => "bounded",
        Boundedness::Unbounded => "unbounded",
        Boundedness::Inconclusive => "inconclusive",
    }
}

fn compactness_str(c: Compactness) -> &'static str {
    match c {
        Compactness::Compact => "compact",
        Compactness::NotCompact => "not_compact",
        Compactness::CompactSufficient => "compact_sufficient",
        Compactness::Inconclusive => "inconclusive",
    }
}

pub fn json_analysis(r: &AnalysisReport) -> Value {
    let mut witnesses = Map::new();
    for (name, point) in &r.criterion.witness_points {
        witnesses.insert(name.clone(), json_point(point));
    }
    json!({
        "boundedness": boundedness_str(r.boundedness),
        "norm": json_interval(&r.norm),
        "compactness": r.compactness.map_or(Value::Null, |c| json!(compactness_str(c))),
        "criterion": {
            "psi_mu_norm": json_mu_norm(&r.criterion.psi_mu_norm),
            "upsilon": json_interval(&r.criterion.upsilon),
            "upsilon_zero": json_interval(&r.criterion.upsilon_zero),
            "theta": r.criterion.theta.as_ref().map_or(Value::Null, json_sup_result),
            "witness_points": Value::Object(witnesses),
        },
        "boundary": r.boundary.as_ref().map_or(Value::Null, json_limit),
        "notes": r.notes,
        "basis": r.basis,
    })
}

pub fn json_oracle(r: &OracleReport) -> Value {
    let consistency = match &r.consistency {
        Consistency::Consistent => json!("consistent"),
        Consistency::ViolationWitness(details) => json!({ "violation": details }),
    };
    json!({
        "norm_lower_bound": json_real(r.norm_lower_bound),
        "best_sample": r.best_sample,
        "h_family_bound": json_real(r.h_family_bound),
        "consistency": consistency,
    })
}

pub fn json_bloch(a: &BlochAnalysis) -> Value {
    json!({
        "beta": json_real(a.beta),
        "beta_witness": json_point(&a.beta_witness),
        "bloch_norm": json_real(a.bloch_norm),
        "value_at_origin": json_complex(a.value_at_origin),
        "little_bloch_profile": json_profile(&a.little_bloch_profile),
        "status": status_str(a.status),
    })
}

/// Hex SHA-256 of the canonical configuration string, so two reports can be
/// matched to the exact invocation that produced them.
pub fn config_hash(canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn provenance(canonical_config: &str, seed: u64, wall_time_ms: u128) -> Value {
    json!({
        "tool": "blochop",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": config_hash(canonical_config),
        "seed": seed,
        "wall_time_ms": wall_time_ms as u64,
    })
}

/// Assemble a full document. Sections that do not apply stay null so the
/// shape is identical across subcommands.
pub fn document(provenance: Value, job: Value, sections: &[(&str, Value)]) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("provenance".into(), provenance);
    map.insert("job".into(), job);
    for (name, value) in sections {
        map.insert((*name).to_string(), value.clone());
    }
    Value::Object(map)
}

/// Machine-readable error object for exit code 3.
pub fn error_object(kind: &str, message: &str) -> Value {
    json!({
        "schema": SCHEMA,
        "error": { "kind": kind, "message": message },
    })
}
