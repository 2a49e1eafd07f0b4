//! Domains, points, the invariant (Bergman-type) metric, and distance bounds.
//!
//! Two domains are supported: the unit polydisk D^n and the unit ball B^n in
//! C^n. The metric normalization is fixed so that on the disk (n = 1) the
//! Hermitian form is 1/(1-|z|^2)^2 and the distance from 0 to z is
//! atanh|z| = (1/2) log((1+|z|)/(1-|z|)). On the polydisk the form is the sum
//! of the coordinate disk forms; on the ball it is
//! H_z(u,u) = ((1-||z||^2)||u||^2 + |<u,z>|^2) / (1-||z||^2)^2,
//! the unique rotation-invariant choice that restricts to the disk form on
//! every slice through the origin and whose radial geodesics have length
//! atanh||z||.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;

/// Points closer to the boundary than this are rejected by interior checks.
/// All grid sampling clamps radii at 1 - DEFAULT_BOUNDARY_CLAMP.
pub const DEFAULT_BOUNDARY_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Polydisk,
    Ball,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Polydisk => write!(f, "polydisk"),
            DomainKind::Ball => write!(f, "ball"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    boundary_clamp: f64,
}

impl Domain {
    pub fn polydisk(dim: usize) -> Result<Self> {
        Self::new(DomainKind::Polydisk, dim)
    }

    pub fn ball(dim: usize) -> Result<Self> {
        Self::new(DomainKind::Ball, dim)
    }

    pub fn new(kind: DomainKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Domain {
            kind,
            dim,
            boundary_clamp: DEFAULT_BOUNDARY_CLAMP,
        })
    }

    pub fn with_boundary_clamp(mut self, clamp: f64) -> Result<Self> {
        if !(clamp > 0.0 && clamp < 1.0) {
            return Err(Error::InvalidInput(format!(
                "boundary clamp must lie in (0,1), got {clamp}"
            )));
        }
        self.boundary_clamp = clamp;
        Ok(self)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary_clamp(&self) -> f64 {
        self.boundary_clamp
    }

    /// Largest sampled radius: 1 - boundary clamp.
    pub fn max_radius(&self) -> f64 {
        1.0 - self.boundary_clamp
    }

    /// Boundary proximity in [0,1): max_j |z_j| on the polydisk, ||z|| on the
    /// ball. The point is interior iff this is < 1.
    pub fn proximity(&self, z: &Point) -> f64 {
        match self.kind {
            DomainKind::Polydisk => z.coords().iter().map(|c| c.norm()).fold(0.0f64, f64::max),
            DomainKind::Ball => z.norm(),
        }
    }

    /// Proximity to the distinguished boundary: min_j |z_j| on the polydisk
    /// (the torus needs every coordinate near modulus one), ||z|| on the ball
    /// (sphere = distinguished boundary).
    pub fn distinguished_proximity(&self, z: &Point) -> f64 {
        match self.kind {
            DomainKind::Polydisk => z
                .coords()
                .iter()
                .map(|c| c.norm())
                .fold(f64::INFINITY, f64::min),
            DomainKind::Ball => z.norm(),
        }
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.dim() == self.dim && self.proximity(z) < 1.0
    }

    fn check_dim(&self, z: &Point) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.dim(),
            });
        }
        Ok(())
    }

    /// Rejects points outside the open domain and points inside the clamp
    /// band near the boundary, where the metric is numerically unusable.
    pub fn interior_check(&self, z: &Point) -> Result<()> {
        self.check_dim(z)?;
        let p = self.proximity(z);
        if p >= 1.0 {
            return Err(Error::PointOutsideDomain { point: z.clone() });
        }
        if p > self.max_radius() {
            return Err(Error::BoundaryClamp {
                point: z.clone(),
                clamp: self.boundary_clamp,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.kind, self.dim)
    }
}

/// A point of C^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point {
            coords: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Convenience constructor from real coordinates.
    pub fn from_re(re: &[f64]) -> Self {
        Point {
            coords: re.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else if c.im < 0.0 {
                write!(f, "{}{}i", c.re, c.im)?;
            } else {
                write!(f, "{}+{}i", c.re, c.im)?;
            }
        }
        write!(f, ")")
    }
}

/// A closed real interval, optionally known to be a single exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Interval {
            lower: v,
            upper: v,
            exact: true,
        }
    }

    pub fn bounds(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            exact: false,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Dense Hermitian positive-definite matrix storing the metric form at a
/// point, row-major. H_z(u, conj(u)) is evaluated as u^H M u.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianForm {
    fn new(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        HermitianForm { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// The quadratic form u^H M u. The imaginary part is a rounding residue
    /// of the Hermitian symmetry and is discarded.
    pub fn quadratic(&self, u: &[Complex64]) -> f64 {
        assert_eq!(u.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += u[i].conj() * self.entry(i, j) * u[j];
            }
        }
        acc.re
    }

    /// Largest deviation |M_ij - conj(M_ji)|, for validity checks in tests.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Metric form M at z, so that H_z(u, conj(u)) = u^H M u.
///
/// Polydisk: diagonal with entries 1/(1-|z_j|^2)^2. Ball:
/// ((1-s) I + z z^H) / (1-s)^2 with s = ||z||^2.
pub fn metric_matrix(domain: &Domain, z: &Point) -> Result<HermitianForm> {
    domain.interior_check(z)?;
    let n = domain.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    match domain.kind() {
        DomainKind::Polydisk => {
            for j in 0..n {
                let d = 1.0 - z.coords()[j].norm_sqr();
                entries[j * n + j] = Complex64::new(1.0 / (d * d), 0.0);
            }
        }
        DomainKind::Ball => {
            let s = z.coords().iter().map(|c| c.norm_sqr()).sum::<f64>();
            let d = 1.0 - s;
            let scale = 1.0 / (d * d);
            for i in 0..n {
                for j in 0..n {
                    let mut v = z.coords()[i] * z.coords()[j].conj();
                    if i == j {
                        v += Complex64::new(d, 0.0);
                    }
                    entries[i * n + j] = v * scale;
                }
            }
        }
    }
    Ok(HermitianForm::new(n, entries))
}

/// Inverse-metric quadratic form b^H M^{-1} b with b = conj(grad f), i.e. the
/// exact maximum of |grad f . u|^2 / H_z(u, conj(u)) over directions u.
///
/// Closed forms: diagonal inverse on the polydisk; Sherman-Morrison
/// M^{-1} = (1-s)(I - z z^H) on the ball.
pub fn inverse_metric_quadratic(domain: &Domain, z: &Point, grad: &[Complex64]) -> Result<f64> {
    domain.interior_check(z)?;
    if grad.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: grad.len(),
        });
    }
    let v = match domain.kind() {
        DomainKind::Polydisk => grad
            .iter()
            .zip(z.coords())
            .map(|(g, c)| {
                let d = 1.0 - c.norm_sqr();
                g.norm_sqr() * d * d
            })
            .sum::<f64>(),
        DomainKind::Ball => {
            let s = z.coords().iter().map(|c| c.norm_sqr()).sum::<f64>();
            let g2 = grad.iter().map(|g| g.norm_sqr()).sum::<f64>();
            // grad . z is the pairing of the gradient row with the point, no
            // conjugation: it comes from the rank-one part of M^{-1}.
            let gz = grad
                .iter()
                .zip(z.coords())
                .map(|(g, c)| g * c)
                .sum::<Complex64>();
            (1.0 - s) * (g2 - gz.norm_sqr())
        }
    };
    // Clamp the rounding residue: the form is nonnegative by construction.
    Ok(v.max(0.0))
}

/// Inverse hyperbolic tangent on [0,1), formatted as the usual half-log.
#[inline]
pub fn half_log_ratio(t: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&t));
    0.5 * ((1.0 + t) / (1.0 - t)).ln()
}

/// Metric distance from z to the origin.
///
/// Ball: exact, atanh||z||. Polydisk with one nonzero coordinate: exact.
/// Polydisk otherwise: enclosure [max_j atanh|z_j|, sum_j atanh|z_j|]. The
/// lower bound holds because each coordinate projection is metric
/// nonincreasing; the upper bound is the length of the path that moves one
/// coordinate at a time along disk geodesics.
pub fn rho_to_origin(domain: &Domain, z: &Point) -> Result<Interval> {
    domain.interior_check(z)?;
    match domain.kind() {
        DomainKind::Ball => Ok(Interval::exact(half_log_ratio(z.norm()))),
        DomainKind::Polydisk => {
            let mut sum = 0.0;
            let mut max = 0.0f64;
            let mut nonzero = 0usize;
            for c in z.coords() {
                let r = c.norm();
                if r > 0.0 {
                    nonzero += 1;
                }
                let d = half_log_ratio(r);
                sum += d;
                max = max.max(d);
            }
            if nonzero <= 1 {
                Ok(Interval::exact(sum))
            } else {
                Ok(Interval::bounds(max, sum))
            }
        }
    }
}

/// Upper bound for the extremal functional omega(z) (exact on the ball and
/// on the polydisk when at most one coordinate is nonzero): the distance
/// upper bound of `rho_to_origin`.
pub fn omega_upper(domain: &Domain, z: &Point) -> Result<f64> {
    Ok(rho_to_origin(domain, z)?.upper)
}

/// Whether `omega_upper` is exact for this domain at any point.
pub fn omega_is_exact(domain: &Domain) -> bool {
    domain.kind() == DomainKind::Ball || domain.dim() == 1
}

/// Upper bound for the metric distance between two interior points.
///
/// Ball: exact, atanh of the Moebius pseudo-distance
/// |phi_z(w)|^2 = 1 - (1-||z||^2)(1-||w||^2)/|1-<w,z>|^2. Polydisk: sum of
/// the per-coordinate disk distances (move one coordinate at a time).
pub fn rho_upper_between(domain: &Domain, z: &Point, w: &Point) -> Result<f64> {
    domain.interior_check(z)?;
    domain.interior_check(w)?;
    match domain.kind() {
        DomainKind::Ball => {
            let inner = w
                .coords()
                .iter()
                .zip(z.coords())
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>();
            let num = (1.0 - z.norm().powi(2)) * (1.0 - w.norm().powi(2));
            let den = (Complex64::new(1.0, 0.0) - inner).norm_sqr();
            let p2 = (1.0 - num / den).max(0.0);
            Ok(half_log_ratio(p2.sqrt().min(1.0 - f64::EPSILON)))
        }
        DomainKind::Polydisk => {
            let mut sum = 0.0;
            for (a, b) in z.coords().iter().zip(w.coords()) {
                let num = (a - b).norm();
                let den = (Complex64::new(1.0, 0.0) - b.conj() * a).norm();
                let p = (num / den).min(1.0 - f64::EPSILON);
                sum += half_log_ratio(p);
            }
            Ok(sum)
        }
    }
}
