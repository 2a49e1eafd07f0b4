//! Bloch space quantities: the metric gradient norm Q_f, the seminorm
//! beta_f and Bloch norm, lower bounds for the hyperbolic distance to the
//! origin via extremal candidates, and a Lipschitz-quotient cross-check.
//!
//! Q_f(z) is the largest directional derivative of f at z measured against
//! the Bergman-style metric, computed exactly through the inverse-metric
//! quadratic form rather than by sampling directions. beta_f is its global
//! supremum, found with the deterministic search engine. The distance lower
//! bounds exploit that any f with f(0) = 0 and Bloch norm at most 1
//! satisfies |f(w)| <= omega(w): each candidate is normalized by its
//! numerically computed norm inflated by the solver tolerance, so the
//! returned value is a certified lower bound up to that tolerance.

use crate::error::{Error, Result};
use crate::geometry::{inverse_metric_quadratic, Domain, DomainKind, Point};
use crate::supsearch::{sup_over_domain, SearchConfig, SupStatus};
use crate::symbolic::HoloFunction;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pairs closer than this in hyperbolic distance are skipped in quotients.
const PAIR_DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BlochAnalysis {
    /// Seminorm estimate sup_z Q_f(z).
    pub beta: f64,
    pub beta_witness: Point,
    /// |f(0)| + beta.
    pub bloch_norm: f64,
    pub value_at_origin: Complex64,
    /// Shell sups of Q_f; a tail falling to zero is evidence that f lies in
    /// the little space where Q_f vanishes at the boundary.
    pub little_bloch_profile: Vec<(f64, Option<f64>)>,
    pub status: SupStatus,
}

/// Metric gradient norm: the exact maximum of |grad f(z) . u| over metric
/// unit vectors u, via Q_f(z)^2 = conj(g)^T M^-1 conj(g) with g = grad f.
pub fn qf(f: &HoloFunction, domain: &Domain, z: &Point) -> Result<f64> {
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    let r = f.eval_with_gradient(z.coords())?;
    let q2 = inverse_metric_quadratic(domain, z, &r.gradient)?;
    Ok(q2.sqrt())
}

/// Global Bloch data for one function.
pub fn beta(f: &HoloFunction, domain: &Domain, cfg: &SearchConfig) -> Result<BlochAnalysis> {
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    let target = |z: &Point| qf(f, domain, z);
    let r = sup_over_domain(&target, domain, cfg)?;
    let value_at_origin = f.eval(Point::origin(domain.dim()).coords())?;
    Ok(BlochAnalysis {
        beta: r.value,
        beta_witness: r.witness,
        bloch_norm: value_at_origin.norm() + r.value,
        value_at_origin,
        little_bloch_profile: r.shell_profile,
        status: r.status,
    })
}

/// Lower bound for beta_f from sampled difference quotients
/// |f(z) - f(w)| / rho_upper(z, w). The upper distance makes every quotient
/// a valid lower bound even on the polydisk where the exact distance has no
/// closed form.
pub fn lipschitz_lower(f: &HoloFunction, domain: &Domain, pairs: usize, seed: u64) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::InvalidInput(
            "lipschitz quotient needs at least one pair".into(),
        ));
    }
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11b5_c821);
    let mut best = 0.0f64;
    for k in 0..pairs {
        // Alternate far-apart pairs with tight perturbation pairs; the
        // quotient approaches Q_f only in the collapsing regime, so the
        // perturbation pairs carry most of the sharpness.
        let z = random_interior_point(&mut rng, domain, 0.85);
        let w = if k % 2 == 0 {
            random_interior_point(&mut rng, domain, 0.85)
        } else {
            let eps = 1e-4 * 10f64.powi(-((k / 2 % 3) as i32));
            let mut coords = z.coords().to_vec();
            for c in coords.iter_mut() {
                *c += Complex64::new(
                    eps * (rng.gen::<f64>() - 0.5),
                    eps * (rng.gen::<f64>() - 0.5),
                );
            }
            let w = Point::new(coords);
            if domain.proximity(&w) >= domain.max_radius() {
                continue;
            }
            w
        };
        let rho = crate::geometry::rho_upper_between(domain, &z, &w)?;
        if rho < PAIR_DISTANCE_FLOOR {
            continue;
        }
        let num = (f.eval(z.coords())? - f.eval(w.coords())?).norm();
        let q = num / rho;
        if q.is_finite() && q > best {
            best = q;
        }
    }
    Ok(best)
}

fn random_interior_point(rng: &mut ChaCha8Rng, domain: &Domain, rcap: f64) -> Point {
    let n = domain.dim();
    match domain.kind() {
        DomainKind::Polydisk => Point::new(
            (0..n)
                .map(|_| {
                    let r = rcap * rng.gen::<f64>().sqrt();
                    let th = std::f64::consts::TAU * rng.gen::<f64>();
                    Complex64::from_polar(r, th)
                })
                .collect(),
        ),
        DomainKind::Ball => {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                .collect();
            let norm = v
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt()
                .max(1e-300);
            let r = rcap * rng.gen::<f64>().powf(1.0 / (2.0 * n as f64));
            Point::new(v.into_iter().map(|c| c * (r / norm)).collect())
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Certified lower bound for the hyperbolic distance from w to the origin,
/// as the best value |g(w)| over unit-norm candidates g with g(0) = 0.
///
/// Candidates: the normalized log-kernel sum (1/(n(2+log4))) sum_j
/// log(4/(1 - z_j conj(w_j))), phase-aligned coordinate maps, the
/// half-log-ratio transported to each coordinate and combined with the
/// coefficients that keep the combined seminorm at one, its inner-product
/// version on the ball, and a truncated odd-power polynomial. Each is
/// rescaled by its numerically computed Bloch norm inflated by the solver
/// tolerance before evaluation.
pub fn omega_lower(domain: &Domain, w: &Point, cfg: &SearchConfig) -> Result<f64> {
    domain.interior_check(w)?;
    let n = domain.dim();
    if w.coords().iter().all(|c| c.norm() == 0.0) {
        return Ok(0.0);
    }

    let mut candidates: Vec<HoloFunction> = Vec::new();

    // Log-kernel sum vanishing nowhere in the domain; constants are
    // subtracted below so every candidate vanishes at the origin.
    {
        let scale = 1.0 / (n as f64 * (2.0 + 4.0f64.ln()));
        let mut sum: Option<HoloFunction> = None;
        for j in 0..n {
            let wj = w.coords()[j];
            let zj = HoloFunction::coordinate(j + 1, n)?;
            let inner = HoloFunction::constant_re(4.0, n)
                .div(&HoloFunction::constant_re(1.0, n).sub(&zj.scale(wj.conj()))?)?;
            let term = inner.log();
            sum = Some(match sum {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        candidates.push(sum.expect("n >= 1").scale(Complex64::new(scale, 0.0)));
    }

    // Phase-aligned coordinate maps.
    for j in 0..n {
        let wj = w.coords()[j];
        if wj.norm() > 0.0 {
            let u = wj.conj() / wj.norm();
            candidates.push(HoloFunction::coordinate(j + 1, n)?.scale(u));
        }
    }

    // Half-log-ratio candidates: per-coordinate on the polydisk combined
    // with coefficients proportional to atanh|w_j| (unit l2 norm keeps the
    // combined seminorm at one), inner-product form on the ball.
    match domain.kind() {
        DomainKind::Polydisk => {
            let weights: Vec<f64> = w
                .coords()
                .iter()
                .map(|c| crate::geometry::half_log_ratio(c.norm()))
                .collect();
            let l2 = weights.iter().map(|a| a * a).sum::<f64>().sqrt();
            if l2 > 0.0 {
                let mut sum: Option<HoloFunction> = None;
                for (j, &wt) in weights.iter().enumerate() {
                    if wt == 0.0 {
                        continue;
                    }
                    let wj = w.coords()[j];
                    let u = wj.conj() / wj.norm();
                    let aligned = HoloFunction::coordinate(j + 1, n)?.scale(u);
                    let term = half_log_ratio_ast(&aligned, n)?.scale(Complex64::new(wt / l2, 0.0));
                    sum = Some(match sum {
                        None => term,
                        Some(acc) => acc.add(&term)?,
                    });
                }
                candidates.push(sum.expect("some nonzero coordinate"));
            }
        }
        DomainKind::Ball => {
            let norm = w.norm();
            let mut inner: Option<HoloFunction> = None;
            for j in 0..n {
                let u = w.coords()[j].conj() / norm;
                let term = HoloFunction::coordinate(j + 1, n)?.scale(u);
                inner = Some(match inner {
                    None => term,
                    Some(acc) => acc.add(&term)?,
                });
            }
            candidates.push(half_log_ratio_ast(&inner.expect("n >= 1"), n)?);
        }
    }

    // Truncated odd-power polynomial along the dominant coordinate.
    {
        let (j, wj) = w
            .coords()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).expect("finite"))
            .expect("n >= 1");
        if wj.norm() > 0.0 {
            let u = wj.conj() / wj.norm();
            let x = HoloFunction::coordinate(j + 1, n)?.scale(u);
            let mut poly: Option<HoloFunction> = None;
            for m in (1..=9).step_by(2) {
                let term = x.powu(m as u32).scale(Complex64::new(1.0 / m as f64, 0.0));
                poly = Some(match poly {
                    None => term,
                    Some(acc) => acc.add(&term)?,
                });
            }
            candidates.push(poly.expect("nonempty"));
        }
    }

    let mut best = 0.0f64;
    for cand in &candidates {
        let origin_value = cand.eval(Point::origin(n).coords())?;
        let shifted = cand.sub(&HoloFunction::constant(origin_value, n))?;
        let analysis = beta(&shifted, domain, cfg)?;
        if analysis.beta <= 0.0 || analysis.status == SupStatus::SupDiverging {
            continue;
        }
        let value = shifted.eval(w.coords())?.norm();
        let bound = value / (analysis.beta * (1.0 + cfg.tolerance));
        if bound > best {
            best = bound;
        }
    }
    Ok(best)
}

/// Closed-form certified distance lower bound, cheap enough for use inside
/// search integrands: atanh of the norm on the ball, the l2 combination of
/// per-coordinate atanh values on the polydisk.
pub fn omega_lower_closed(domain: &Domain, w: &Point) -> f64 {
    match domain.kind() {
        DomainKind::Ball => crate::geometry::half_log_ratio(w.norm()),
        DomainKind::Polydisk => w
            .coords()
            .iter()
            .map(|c| {
                let a = crate::geometry::half_log_ratio(c.norm());
                a * a
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// (log(1+x) - log(1-x)) / 2 as an expression, the inverse hyperbolic
/// tangent of x for |x| < 1 on the principal branch.
fn half_log_ratio_ast(x: &HoloFunction, arity: usize) -> Result<HoloFunction> {
    let one = HoloFunction::constant_re(1.0, arity);
    let num = one.add(x)?.log();
    let den = one.sub(x)?.log();
    Ok(num.sub(&den)?.scale(Complex64::new(0.5, 0.0)))
}
