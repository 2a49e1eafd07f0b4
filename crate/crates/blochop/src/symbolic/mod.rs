//! Holomorphic expression syntax, evaluation, differentiation, and
//! holomorphic self-maps of a domain.

mod eval;
mod expr;
mod parser;

pub use eval::{EvalResult, SINGULARITY_TOL};
pub use expr::HoloFunction;
pub(crate) use parser::parse_with_prefix;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainKind, Point};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of sampling-based verification that a map sends the domain into
/// itself.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeStatus {
    Verified { samples: usize },
    Unverified,
    ViolationWitness(Point),
}

/// A candidate holomorphic self-map phi = (phi_1, ..., phi_n) of a domain in
/// C^n. Every component is an expression in the same n variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    components: Vec<HoloFunction>,
    range_status: RangeStatus,
}

impl SelfMap {
    pub fn new(components: Vec<HoloFunction>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Arity(
                "a self-map needs at least one component".into(),
            ));
        }
        if components.iter().any(|c| c.arity() != n) {
            return Err(Error::Arity(format!(
                "each of the {n} components of a self-map must have arity {n}"
            )));
        }
        Ok(SelfMap {
            components,
            range_status: RangeStatus::Unverified,
        })
    }

    /// The identity map of C^n.
    pub fn identity(n: usize) -> Result<Self> {
        let components = (1..=n)
            .map(|j| HoloFunction::coordinate(j, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[HoloFunction] {
        &self.components
    }

    pub fn range_status(&self) -> &RangeStatus {
        &self.range_status
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }
}

/// Check by deterministic sampling that the image of the (clamped) domain
/// stays inside the open domain. Half the samples are quasi-uniform interior
/// points, half are pushed toward the boundary where violations live. On
/// success the returned map carries `Verified`; the first violating input is
/// reported as an error.
pub fn range_check(map: &SelfMap, domain: &Domain, samples: usize, seed: u64) -> Result<SelfMap> {
    if map.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: map.dim(),
        });
    }
    let n = domain.dim();
    let rmax = domain.max_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let boundary_biased = s % 2 == 1;
        let z = sample_point(domain, &mut rng, boundary_biased);
        debug_assert!(domain.proximity(&z) <= rmax * (1.0 + 1e-12));
        let w = map.eval(z.coords())?;
        let image = Point::new(w);
        let p = match domain.kind() {
            DomainKind::Polydisk => image
                .coords()
                .iter()
                .map(|c| c.norm())
                .fold(0.0f64, f64::max),
            DomainKind::Ball => image.norm(),
        };
        if p.is_nan() || p >= 1.0 {
            return Err(Error::RangeViolation {
                input: z,
                magnitude: p,
            });
        }
        let _ = n;
    }
    Ok(SelfMap {
        components: map.components.clone(),
        range_status: RangeStatus::Verified { samples },
    })
}

fn sample_point(domain: &Domain, rng: &mut ChaCha8Rng, boundary_biased: bool) -> Point {
    let n = domain.dim();
    let rmax = domain.max_radius();
    match domain.kind() {
        DomainKind::Polydisk => {
            let coords = (0..n)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let r = if boundary_biased {
                        // Geometric push toward the rim: 1 - 2^(-1-19u).
                        (1.0 - 2f64.powf(-1.0 - 19.0 * u)).min(rmax)
                    } else {
                        u.sqrt() * rmax
                    };
                    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                    Complex64::from_polar(r, theta)
                })
                .collect();
            Point::new(coords)
        }
        DomainKind::Ball => {
            // Gaussian direction, then a radius with the same two regimes.
            let dir: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                .collect();
            let norm = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let norm = if norm == 0.0 { 1.0 } else { norm };
            let u: f64 = rng.gen();
            let r = if boundary_biased {
                (1.0 - 2f64.powf(-1.0 - 19.0 * u)).min(rmax)
            } else {
                u.powf(0.5 / n as f64) * rmax
            };
            Point::new(dir.into_iter().map(|c| c * (r / norm)).collect())
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; both uniforms drawn unconditionally to keep the stream
    // layout independent of the values.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
