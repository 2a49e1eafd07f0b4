//! Evaluation and forward-mode differentiation of expression trees.
//!
//! Gradients are exact complex derivatives computed with dual numbers, one
//! pass per variable. Principal branches are used for log and sqrt; an
//! argument within `SINGULARITY_TOL` of a branch point or pole aborts the
//! evaluation with a singularity error instead of producing junk.

use super::expr::{Expr, HoloFunction};
use crate::error::{Error, Result};
use crate::geometry::Point;
use num_complex::Complex64;

/// Distance to a pole or branch point below which evaluation refuses to
/// continue.
pub const SINGULARITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
}

#[derive(Clone, Copy)]
struct Dual {
    v: Complex64,
    d: Complex64,
}

fn singular(what: &str, z: &[Complex64]) -> Error {
    Error::Singularity {
        what: what.into(),
        point: Point::new(z.to_vec()),
    }
}

fn eval_value(e: &Expr, z: &[Complex64]) -> Result<Complex64> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Var(k) => z[*k],
        Expr::Add(a, b) => eval_value(a, z)? + eval_value(b, z)?,
        Expr::Sub(a, b) => eval_value(a, z)? - eval_value(b, z)?,
        Expr::Mul(a, b) => eval_value(a, z)? * eval_value(b, z)?,
        Expr::Div(a, b) => {
            let den = eval_value(b, z)?;
            if den.norm() <= SINGULARITY_TOL {
                return Err(singular("division by (near-)zero", z));
            }
            eval_value(a, z)? / den
        }
        Expr::Neg(a) => -eval_value(a, z)?,
        Expr::Pow(a, m) => eval_value(a, z)?.powu(*m),
        Expr::Exp(a) => eval_value(a, z)?.exp(),
        Expr::Log(a) => {
            let v = eval_value(a, z)?;
            if v.norm() <= SINGULARITY_TOL {
                return Err(singular("log branch point", z));
            }
            v.ln()
        }
        Expr::Sqrt(a) => {
            let v = eval_value(a, z)?;
            if v.norm() <= SINGULARITY_TOL {
                return Err(singular("sqrt branch point", z));
            }
            v.sqrt()
        }
    })
}

fn eval_dual(e: &Expr, z: &[Complex64], k: usize) -> Result<Dual> {
    let zero = Complex64::new(0.0, 0.0);
    Ok(match e {
        Expr::Const(c) => Dual { v: *c, d: zero },
        Expr::Var(j) => Dual {
            v: z[*j],
            d: if *j == k {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            },
        },
        Expr::Add(a, b) => {
            let (a, b) = (eval_dual(a, z, k)?, eval_dual(b, z, k)?);
            Dual {
                v: a.v + b.v,
                d: a.d + b.d,
            }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (eval_dual(a, z, k)?, eval_dual(b, z, k)?);
            Dual {
                v: a.v - b.v,
                d: a.d - b.d,
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (eval_dual(a, z, k)?, eval_dual(b, z, k)?);
            Dual {
                v: a.v * b.v,
                d: a.v * b.d + a.d * b.v,
            }
        }
        Expr::Div(a, b) => {
            let (a, b) = (eval_dual(a, z, k)?, eval_dual(b, z, k)?);
            if b.v.norm() <= SINGULARITY_TOL {
                return Err(singular("division by (near-)zero", z));
            }
            Dual {
                v: a.v / b.v,
                d: (a.d * b.v - a.v * b.d) / (b.v * b.v),
            }
        }
        Expr::Neg(a) => {
            let a = eval_dual(a, z, k)?;
            Dual { v: -a.v, d: -a.d }
        }
        Expr::Pow(a, m) => {
            let a = eval_dual(a, z, k)?;
            match m {
                0 => Dual {
                    v: Complex64::new(1.0, 0.0),
                    d: zero,
                },
                _ => Dual {
                    v: a.v.powu(*m),
                    d: Complex64::new(*m as f64, 0.0) * a.v.powu(m - 1) * a.d,
                },
            }
        }
        Expr::Exp(a) => {
            let a = eval_dual(a, z, k)?;
            let e = a.v.exp();
            Dual { v: e, d: e * a.d }
        }
        Expr::Log(a) => {
            let a = eval_dual(a, z, k)?;
            if a.v.norm() <= SINGULARITY_TOL {
                return Err(singular("log branch point", z));
            }
            Dual {
                v: a.v.ln(),
                d: a.d / a.v,
            }
        }
        Expr::Sqrt(a) => {
            let a = eval_dual(a, z, k)?;
            if a.v.norm() <= SINGULARITY_TOL {
                return Err(singular("sqrt branch point", z));
            }
            let s = a.v.sqrt();
            Dual {
                v: s,
                d: a.d / (s * 2.0),
            }
        }
    })
}

fn check_finite(c: Complex64, z: &[Complex64]) -> Result<Complex64> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(singular("non-finite result", z))
    }
}

impl HoloFunction {
    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Evaluate at a point.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        check_finite(eval_value(&self.expr, z)?, z)
    }

    /// Evaluate together with the full complex gradient (one dual-number
    /// pass per variable).
    pub fn eval_with_gradient(&self, z: &[Complex64]) -> Result<EvalResult> {
        self.check_point(z)?;
        if self.arity == 0 {
            return Ok(EvalResult {
                value: self.eval(z)?,
                gradient: Vec::new(),
            });
        }
        let mut gradient = Vec::with_capacity(self.arity);
        let mut value = Complex64::new(0.0, 0.0);
        for k in 0..self.arity {
            let d = eval_dual(&self.expr, z, k)?;
            if k == 0 {
                value = check_finite(d.v, z)?;
            }
            gradient.push(check_finite(d.d, z)?);
        }
        Ok(EvalResult { value, gradient })
    }
}
