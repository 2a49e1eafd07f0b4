//! Command line front end. Subcommands map one-to-one onto the library
//! analyses: `bloch` for a single function, `norm` and `compact` for the
//! operator verdicts, `analyze` for the full pipeline with the oracle
//! cross-check, and `eval` for point evaluation with derivatives.
//!
//! Exit codes: 0 when a verdict was reached, 2 when the analysis ended
//! inconclusive, 3 on invalid input (with a machine-readable error object
//! in JSON mode), 4 when the oracle contradicts the reported enclosure.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::operator::{
    analyze_boundedness, analyze_compactness, AnalysisReport, Boundedness, Compactness,
    SymbolTriple,
};
use crate::oracle::{norm_lower_bound, sample_bloch, Consistency};
use crate::report;
use crate::supsearch::{SearchConfig, SupStatus};
use crate::symbolic::{HoloFunction, SelfMap};
use crate::weightedspace::Weight;
use crate::{blochspace, geometry};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::Instant;

const EXIT_VERDICT: i32 = 0;
const EXIT_INCONCLUSIVE: i32 = 2;
const EXIT_INPUT: i32 = 3;
const EXIT_ORACLE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "blochop",
    version,
    about = "Weighted composition operators from Bloch spaces: norms, boundedness, compactness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch seminorm, norm, and boundary profile of one function
    Bloch(BlochArgs),
    /// Boundedness verdict and operator norm enclosure
    Norm(SymbolArgs),
    /// Compactness verdict on top of the boundedness analysis
    Compact(SymbolArgs),
    /// Full analysis plus randomized oracle cross-check
    Analyze(AnalyzeArgs),
    /// Evaluate an expression and its gradient at a point
    Eval(EvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    Polydisk,
    Ball,
}

#[derive(Args)]
struct SearchArgs {
    /// Domain family
    #[arg(long, value_enum, default_value_t = DomainArg::Polydisk)]
    domain: DomainArg,
    /// Complex dimension
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Initial grid nodes per radial axis
    #[arg(long)]
    grid: Option<usize>,
    /// Refinement rounds
    #[arg(long)]
    rounds: Option<usize>,
    /// Number of boundary shells 1 - 2^-k
    #[arg(long)]
    shells: Option<usize>,
    /// Convergence tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for every randomized ingredient
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores (env: BLOCHOP_WORKERS)
    #[arg(long)]
    workers: Option<usize>,
    /// Emit the full report as JSON on stdout
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SymbolArgs {
    /// Multiplier expression in z1..zn
    #[arg(long)]
    psi: String,
    /// Self-map component; repeat once per coordinate
    #[arg(long = "phi")]
    phi: Vec<String>,
    /// Weight: alpha:<a>, const:<c>, logrec, or custom:<expr in r1..rn>
    #[arg(long, default_value = "alpha:1.0")]
    weight: String,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    symbol: SymbolArgs,
    /// Random Bloch samples for the oracle
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Per-variable degree of the sample polynomials
    #[arg(long, default_value_t = 4)]
    degree: u32,
    /// Interior grid size for the extremal-family bound
    #[arg(long = "lambda-grid", default_value_t = 64)]
    lambda_grid: usize,
}

#[derive(Args)]
struct BlochArgs {
    /// Expression in z1..zn
    expr: String,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Expression in z1..zn
    expr: String,
    /// Point as comma-separated complex components, e.g. "0.5,0.3+0.2i"
    #[arg(long)]
    at: String,
    /// Arity override; defaults to the number of point components
    #[arg(long)]
    dim: Option<usize>,
    /// Emit JSON on stdout
    #[arg(long)]
    json: bool,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    let json_mode = match &cli.command {
        Command::Bloch(a) => a.search.json,
        Command::Norm(a) | Command::Compact(a) => a.search.json,
        Command::Analyze(a) => a.symbol.search.json,
        Command::Eval(a) => a.json,
    };
    match dispatch(&cli.command) {
        Ok((doc, human, code)) => {
            let text = if json_mode {
                let mut s = serde_json::to_string_pretty(&doc).expect("valid json");
                s.push('\n');
                s
            } else {
                human
            };
            emit_stdout(&text).unwrap_or(code)
        }
        Err(err) => {
            if json_mode {
                let obj = report::error_object(error_kind(&err), &err.to_string());
                let mut s = serde_json::to_string_pretty(&obj).expect("valid json");
                s.push('\n');
                emit_stdout(&s).unwrap_or(EXIT_INPUT)
            } else {
                eprintln!("error: {err}");
                EXIT_INPUT
            }
        }
    }
}

/// Writes to stdout, staying quiet when the reading end of a pipe has
/// closed so reports can be piped into `head` or `jq`. Returns an
/// override exit code only when the write failed for another reason.
fn emit_stdout(text: &str) -> Option<i32> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => None,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => None,
        Err(e) => {
            eprintln!("error: failed to write output: {e}");
            Some(1)
        }
    }
}

fn dispatch(command: &Command) -> Result<(Value, String, i32)> {
    match command {
        Command::Bloch(args) => cmd_bloch(args),
        Command::Norm(args) => cmd_norm(args),
        Command::Compact(args) => cmd_compact(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

/// Short machine-readable slug per error family.
fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Syntax { .. } | Error::UnknownIdentifier(_) | Error::Arity(_) => "syntax",
        Error::ZeroDimension | Error::DimensionMismatch { .. } | Error::DomainMismatch { .. } => {
            "dimension"
        }
        Error::PointOutsideDomain { .. } | Error::BoundaryClamp { .. } => "domain",
        Error::RangeViolation { .. } => "range",
        Error::Singularity { .. } => "singularity",
        Error::NonpositiveWeight { .. } | Error::InvalidWeight(_) => "weight",
        Error::InvalidConfig(_) | Error::InvalidInput(_) => "config",
        Error::SearchBudgetExceeded { .. } | Error::AllPointsSkipped { .. } => "search",
    }
}

fn make_domain(args: &SearchArgs) -> Result<Domain> {
    match args.domain {
        DomainArg::Polydisk => Domain::polydisk(args.dim),
        DomainArg::Ball => Domain::ball(args.dim),
    }
}

fn env_workers() -> Option<usize> {
    std::env::var("BLOCHOP_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn make_config(args: &SearchArgs, domain: &Domain) -> Result<SearchConfig> {
    let mut cfg = SearchConfig::default();
    if let Some(g) = args.grid {
        cfg.initial_grid_per_dim = g;
    }
    if let Some(r) = args.rounds {
        cfg.refinement_rounds = r;
    }
    if let Some(s) = args.shells {
        let rmax = domain.max_radius();
        cfg.shell_levels = (1..=s as i32)
            .map(|k| (1.0 - 2f64.powi(-k)).min(rmax))
            .collect();
    }
    if let Some(t) = args.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.parallel_workers = args.workers.or_else(env_workers).unwrap_or(0);
    cfg.validate()?;
    Ok(cfg)
}

fn parse_weight_spec(spec: &str, domain: &Domain) -> Result<Weight> {
    if spec == "logrec" {
        return Ok(Weight::LogReciprocal);
    }
    if let Some(alpha) = spec.strip_prefix("alpha:") {
        let a: f64 = alpha
            .parse()
            .map_err(|_| Error::InvalidWeight(format!("bad exponent in {spec:?}")))?;
        return Weight::standard(a);
    }
    if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::InvalidWeight(format!("bad constant in {spec:?}")))?;
        return Weight::constant(c);
    }
    if let Some(expr) = spec.strip_prefix("custom:") {
        return Weight::parse_custom(expr, domain);
    }
    Err(Error::InvalidWeight(format!(
        "unrecognized weight {spec:?}; expected alpha:<a>, const:<c>, logrec, or custom:<expr>"
    )))
}

fn make_symbol(args: &SymbolArgs, domain: &Domain) -> Result<SymbolTriple> {
    let n = domain.dim();
    if args.phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: args.phi.len(),
        });
    }
    let psi = HoloFunction::parse(&args.psi, n)?;
    let components = args
        .phi
        .iter()
        .map(|s| HoloFunction::parse(s, n))
        .collect::<Result<Vec<_>>>()?;
    let phi = SelfMap::new(components)?;
    let weight = parse_weight_spec(&args.weight, domain)?;
    SymbolTriple::new(psi, phi, weight, *domain)
}

/// One complex number: either a bare real or an expression like 0.3+0.2i.
fn parse_complex(text: &str) -> Result<Complex64> {
    let f = HoloFunction::parse(text.trim(), 0)?;
    f.eval(&[])
}

fn parse_point(text: &str) -> Result<Vec<Complex64>> {
    text.split(',').map(parse_complex).collect()
}

fn canonical_search(args: &SearchArgs, cfg: &SearchConfig) -> String {
    format!(
        "domain={};dim={};grid={};rounds={};shells={};tol={};seed={};workers={}",
        match args.domain {
            DomainArg::Polydisk => "polydisk",
            DomainArg::Ball => "ball",
        },
        args.dim,
        cfg.initial_grid_per_dim,
        cfg.refinement_rounds,
        cfg.shell_levels.len(),
        cfg.tolerance,
        cfg.seed,
        cfg.parallel_workers,
    )
}

fn canonical_symbol(args: &SymbolArgs, cfg: &SearchConfig) -> String {
    format!(
        "{};psi={};phi={};weight={}",
        canonical_search(&args.search, cfg),
        args.psi,
        args.phi.join("|"),
        args.weight,
    )
}

fn job_json(args: &SymbolArgs, domain: &Domain) -> Value {
    json!({
        "domain": match args.search.domain {
            DomainArg::Polydisk => "polydisk",
            DomainArg::Ball => "ball",
        },
        "dim": domain.dim(),
        "psi": args.psi,
        "phi": args.phi,
        "weight": args.weight,
    })
}

fn fmt_real(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.9}")
    }
}

fn fmt_interval(i: &geometry::Interval) -> String {
    if i.exact {
        format!("{} (exact)", fmt_real(i.upper))
    } else {
        format!("[{}, {}]", fmt_real(i.lower), fmt_real(i.upper))
    }
}

fn human_analysis(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "boundedness: {:?}", r.boundedness);
    let _ = writeln!(out, "norm: {}", fmt_interval(&r.norm));
    if let Some(c) = r.compactness {
        let _ = writeln!(out, "compactness: {c:?}");
    }
    let _ = writeln!(
        out,
        "psi mu-norm: {}",
        fmt_real(r.criterion.psi_mu_norm.value)
    );
    let _ = writeln!(out, "upsilon: {}", fmt_interval(&r.criterion.upsilon));
    if let Some(t) = &r.criterion.theta {
        let _ = writeln!(out, "theta: {} at {}", fmt_real(t.value), t.witness);
    }
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    for basis in &r.basis {
        let _ = writeln!(out, "basis: {basis}");
    }
    out
}

fn boundedness_exit(r: &AnalysisReport) -> i32 {
    match r.boundedness {
        Boundedness::Bounded | Boundedness::Unbounded => EXIT_VERDICT,
        Boundedness::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn compactness_exit(r: &AnalysisReport) -> i32 {
    match r.compactness {
        Some(Compactness::Compact)
        | Some(Compactness::NotCompact)
        | Some(Compactness::CompactSufficient) => EXIT_VERDICT,
        _ => EXIT_INCONCLUSIVE,
    }
}

fn cmd_norm(args: &SymbolArgs) -> Result<(Value, String, i32)> {
    let start = Instant::now();
    let domain = make_domain(&args.search)?;
    let cfg = make_config(&args.search, &domain)?;
    let sym = make_symbol(args, &domain)?;
    let analysis = analyze_boundedness(&sym, &cfg)?;
    let doc = report::document(
        report::provenance(
            &canonical_symbol(args, &cfg),
            cfg.seed,
            start.elapsed().as_millis(),
        ),
        job_json(args, &domain),
        &[
            ("analysis", report::json_analysis(&analysis)),
            ("oracle", Value::Null),
        ],
    );
    let code = boundedness_exit(&analysis);
    Ok((doc, human_analysis(&analysis), code))
}

fn cmd_compact(args: &SymbolArgs) -> Result<(Value, String, i32)> {
    let start = Instant::now();
    let domain = make_domain(&args.search)?;
    let cfg = make_config(&args.search, &domain)?;
    let sym = make_symbol(args, &domain)?;
    let analysis = analyze_compactness(&sym, &cfg)?;
    let doc = report::document(
        report::provenance(
            &canonical_symbol(args, &cfg),
            cfg.seed,
            start.elapsed().as_millis(),
        ),
        job_json(args, &domain),
        &[
            ("analysis", report::json_analysis(&analysis)),
            ("oracle", Value::Null),
        ],
    );
    let code = compactness_exit(&analysis);
    Ok((doc, human_analysis(&analysis), code))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(Value, String, i32)> {
    let start = Instant::now();
    let domain = make_domain(&args.symbol.search)?;
    let cfg = make_config(&args.symbol.search, &domain)?;
    let sym = make_symbol(&args.symbol, &domain)?;
    let analysis = analyze_compactness(&sym, &cfg)?;
    let samples = sample_bloch(&domain, args.degree, args.samples, cfg.seed, &cfg)?;
    let oracle = norm_lower_bound(&sym, &samples, args.lambda_grid, &analysis, &cfg)?;

    let canonical = format!(
        "{};samples={};degree={};lambda={}",
        canonical_symbol(&args.symbol, &cfg),
        args.samples,
        args.degree,
        args.lambda_grid,
    );
    let doc = report::document(
        report::provenance(&canonical, cfg.seed, start.elapsed().as_millis()),
        job_json(&args.symbol, &domain),
        &[
            ("analysis", report::json_analysis(&analysis)),
            ("oracle", report::json_oracle(&oracle)),
        ],
    );

    let mut human = human_analysis(&analysis);
    let _ = writeln!(
        human,
        "oracle lower bound: {} ({})",
        fmt_real(oracle.norm_lower_bound),
        oracle.best_sample
    );
    let _ = writeln!(
        human,
        "extremal family bound: {}",
        fmt_real(oracle.h_family_bound)
    );
    let code = match &oracle.consistency {
        Consistency::ViolationWitness(details) => {
            let _ = writeln!(human, "oracle violation: {details}");
            EXIT_ORACLE
        }
        Consistency::Consistent => {
            let _ = writeln!(human, "oracle: consistent");
            boundedness_exit(&analysis).max(compactness_exit(&analysis))
        }
    };
    Ok((doc, human, code))
}

fn cmd_bloch(args: &BlochArgs) -> Result<(Value, String, i32)> {
    let start = Instant::now();
    let domain = make_domain(&args.search)?;
    let cfg = make_config(&args.search, &domain)?;
    let f = HoloFunction::parse(&args.expr, domain.dim())?;
    let analysis = blochspace::beta(&f, &domain, &cfg)?;

    let canonical = format!(
        "{};expr={}",
        canonical_search(&args.search, &cfg),
        args.expr
    );
    let doc = report::document(
        report::provenance(&canonical, cfg.seed, start.elapsed().as_millis()),
        json!({
            "domain": match args.search.domain {
                DomainArg::Polydisk => "polydisk",
                DomainArg::Ball => "ball",
            },
            "dim": domain.dim(),
            "expr": args.expr,
        }),
        &[("bloch", report::json_bloch(&analysis))],
    );

    let mut human = String::new();
    let _ = writeln!(human, "beta: {}", fmt_real(analysis.beta));
    let _ = writeln!(human, "bloch norm: {}", fmt_real(analysis.bloch_norm));
    let _ = writeln!(human, "witness: {}", analysis.beta_witness);
    let code = match analysis.status {
        SupStatus::Converged => EXIT_VERDICT,
        SupStatus::SupDiverging => {
            let _ = writeln!(human, "verdict: not in the Bloch space (seminorm diverges)");
            EXIT_VERDICT
        }
        SupStatus::MaxRefinementReached => {
            let _ = writeln!(human, "verdict: inconclusive (refinement exhausted)");
            EXIT_INCONCLUSIVE
        }
    };
    Ok((doc, human, code))
}

fn cmd_eval(args: &EvalArgs) -> Result<(Value, String, i32)> {
    let start = Instant::now();
    let point = parse_point(&args.at)?;
    let dim = args.dim.unwrap_or(point.len());
    if dim != point.len() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: point.len(),
        });
    }
    let f = HoloFunction::parse(&args.expr, dim)?;
    let result = f.eval_with_gradient(&point)?;

    let canonical = format!("eval;dim={dim};expr={};at={}", args.expr, args.at);
    let doc = report::document(
        report::provenance(&canonical, 0, start.elapsed().as_millis()),
        json!({ "dim": dim, "expr": args.expr, "at": args.at }),
        &[(
            "eval",
            json!({
                "value": report::json_complex(result.value),
                "gradient": Value::Array(
                    result.gradient.iter().map(|c| report::json_complex(*c)).collect()
                ),
            }),
        )],
    );

    let mut human = String::new();
    let _ = writeln!(human, "value: {} + {}i", result.value.re, result.value.im);
    for (j, g) in result.gradient.iter().enumerate() {
        let _ = writeln!(human, "d/dz{}: {} + {}i", j + 1, g.re, g.im);
    }
    let p = Point::new(point);
    let _ = writeln!(human, "at: {p}");
    Ok((doc, human, EXIT_VERDICT))
}
