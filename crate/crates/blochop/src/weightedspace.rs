//! Weights on the domain and the weighted sup-norm they induce on bounded
//! holomorphic functions.
//!
//! A weight is a strictly positive continuous radial function mu on the
//! domain; the associated norm of a holomorphic f is sup_z mu(z) |f(z)|.
//! Four families are supported: the constant weight, the standard power
//! weights (1-|z_j|^2 per coordinate on the polydisk, 1-||z||^2 on the
//! ball, raised to alpha), the reciprocal logarithm weight matched to the
//! growth of Bloch functions, and custom radial expressions in the
//! coordinate moduli r1..rn. Custom weights are screened for positivity on
//! a deterministic sample at construction time and guarded exactly at every
//! evaluation, so a nonpositive value can never silently enter a norm.

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind, Point};
use crate::supsearch::{sup_over_domain, SearchConfig, SupStatus};
use crate::symbolic::{parse_with_prefix, HoloFunction};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Points sampled when screening a custom weight for positivity.
const POSITIVITY_SAMPLES: usize = 512;
/// Imaginary parts above this (relative) are rejected as non-real weights.
const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Weight {
    /// mu = c > 0; with c = 1 the norm is the plain sup-norm.
    Constant(f64),
    /// Polydisk: prod_j (1-|z_j|^2)^alpha. Ball: (1-||z||^2)^alpha.
    StandardAlpha(f64),
    /// 1 / log(4/(1-p(z)^2)) where p is the boundary proximity; decays like
    /// the reciprocal of the Bloch growth rate.
    LogReciprocal,
    /// Radial expression in the coordinate moduli r1..rn.
    Custom(HoloFunction),
}

impl Weight {
    pub fn constant(c: f64) -> Result<Weight> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidWeight(format!(
                "constant weight must be a finite positive number, got {c}"
            )));
        }
        Ok(Weight::Constant(c))
    }

    pub fn standard(alpha: f64) -> Result<Weight> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidWeight(format!(
                "standard weight exponent must be a finite positive number, got {alpha}"
            )));
        }
        Ok(Weight::StandardAlpha(alpha))
    }

    /// Parse a custom radial weight in the variables r1..rn and screen it
    /// for positivity on a deterministic sample of moduli.
    pub fn parse_custom(text: &str, domain: &Domain) -> Result<Weight> {
        let f = parse_with_prefix(text, domain.dim(), 'r')?;
        let w = Weight::Custom(f);
        let mut rng = ChaCha8Rng::seed_from_u64(0x7717_ab1e);
        let n = domain.dim();
        let rmax = domain.max_radius();
        for s in 0..POSITIVITY_SAMPLES {
            let coords: Vec<Complex64> = match s {
                // Deterministic corners first: origin, full radius, axes.
                0 => vec![Complex64::new(0.0, 0.0); n],
                1 => vec![Complex64::new(rmax, 0.0); n],
                s if s < 2 + n => {
                    let mut c = vec![Complex64::new(0.0, 0.0); n];
                    c[s - 2] = Complex64::new(rmax, 0.0);
                    c
                }
                _ => (0..n)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        // Square-root clustering favours the boundary where
                        // sign changes of radial weights typically live.
                        Complex64::new(rmax * u.sqrt(), 0.0)
                    })
                    .collect(),
            };
            let z = Point::new(coords);
            if domain.contains(&z) {
                w.eval(domain, &z).map_err(|e| match e {
                    Error::NonpositiveWeight { value, point } => Error::InvalidWeight(format!(
                        "custom weight is not positive: value {value} at moduli {point}"
                    )),
                    other => {
                        Error::InvalidWeight(format!("custom weight cannot be evaluated: {other}"))
                    }
                })?;
            }
        }
        Ok(w)
    }

    /// Evaluate the weight at a point of the domain. Always positive on
    /// success; nonpositive or non-real custom values are errors.
    pub fn eval(&self, domain: &Domain, z: &Point) -> Result<f64> {
        domain.interior_check(z)?;
        match self {
            Weight::Constant(c) => Ok(*c),
            Weight::StandardAlpha(alpha) => {
                let base = match domain.kind() {
                    DomainKind::Polydisk => z
                        .coords()
                        .iter()
                        .map(|c| 1.0 - c.norm_sqr())
                        .product::<f64>(),
                    DomainKind::Ball => 1.0 - z.coords().iter().map(|c| c.norm_sqr()).sum::<f64>(),
                };
                Ok(base.powf(*alpha))
            }
            Weight::LogReciprocal => {
                let p = domain.proximity(z);
                Ok(1.0 / (4.0 / (1.0 - p * p)).ln())
            }
            Weight::Custom(f) => {
                let moduli: Vec<Complex64> = z
                    .coords()
                    .iter()
                    .map(|c| Complex64::new(c.norm(), 0.0))
                    .collect();
                let v = f.eval(&moduli)?;
                if v.im.abs() > REALNESS_TOL * v.re.abs().max(1.0) {
                    return Err(Error::InvalidWeight(format!(
                        "custom weight is not real-valued: {v} at moduli {}",
                        Point::new(moduli)
                    )));
                }
                if v.re.is_nan() || v.re <= 0.0 {
                    return Err(Error::NonpositiveWeight {
                        value: v.re,
                        point: Point::new(moduli),
                    });
                }
                Ok(v.re)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Weight::Constant(c) => format!("constant({c})"),
            Weight::StandardAlpha(a) => format!("standard(alpha={a})"),
            Weight::LogReciprocal => "log-reciprocal".into(),
            Weight::Custom(f) => format!("custom({f})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MuNormResult {
    /// sup mu |f|; best finite evidence when the status is diverging.
    pub value: f64,
    pub witness: Point,
    pub status: SupStatus,
    pub evaluations: u64,
}

/// Weighted sup-norm of a holomorphic function. A diverging status means f
/// lies outside the weighted space; the value is then a lower bound.
pub fn mu_norm(
    f: &HoloFunction,
    weight: &Weight,
    domain: &Domain,
    cfg: &SearchConfig,
) -> Result<MuNormResult> {
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    let target = |z: &Point| -> Result<f64> {
        let mu = weight.eval(domain, z)?;
        Ok(mu * f.eval(z.coords())?.norm())
    };
    let r = sup_over_domain(&target, domain, cfg)?;
    Ok(MuNormResult {
        value: r.value,
        witness: r.witness,
        status: r.status,
        evaluations: r.evaluations,
    })
}
