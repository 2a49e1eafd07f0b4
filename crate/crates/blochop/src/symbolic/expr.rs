//! Expression trees for holomorphic functions of several complex variables.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Expr {
    Const(Complex64),
    /// Zero-based coordinate index.
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    /// Nonnegative integer power.
    Pow(Arc<Expr>, u32),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

/// A holomorphic expression in a fixed number of variables z1..zn.
///
/// Values are exact expression trees; subtrees are reference-counted so that
/// composition and algebraic combinators share structure instead of copying.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFunction {
    pub(crate) expr: Arc<Expr>,
    pub(crate) arity: usize,
    /// Single-letter variable prefix used for display ('z' for holomorphic
    /// expressions, 'r' for radial weight profiles).
    pub(crate) prefix: char,
}

impl HoloFunction {
    pub(crate) fn from_expr(expr: Arc<Expr>, arity: usize, prefix: char) -> Self {
        HoloFunction {
            expr,
            arity,
            prefix,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn constant(c: Complex64, arity: usize) -> Self {
        Self::from_expr(Arc::new(Expr::Const(c)), arity, 'z')
    }

    pub fn constant_re(c: f64, arity: usize) -> Self {
        Self::constant(Complex64::new(c, 0.0), arity)
    }

    /// The coordinate function z_j, with j one-based as in the source syntax.
    pub fn coordinate(j: usize, arity: usize) -> Result<Self> {
        if j == 0 || j > arity {
            return Err(Error::Arity(format!(
                "coordinate index {j} out of range 1..={arity}"
            )));
        }
        Ok(Self::from_expr(Arc::new(Expr::Var(j - 1)), arity, 'z'))
    }

    fn binary(
        a: &HoloFunction,
        b: &HoloFunction,
        f: impl FnOnce(Arc<Expr>, Arc<Expr>) -> Expr,
    ) -> Result<HoloFunction> {
        if a.arity != b.arity {
            return Err(Error::Arity(format!(
                "cannot combine expressions of arity {} and {}",
                a.arity, b.arity
            )));
        }
        Ok(HoloFunction::from_expr(
            Arc::new(f(a.expr.clone(), b.expr.clone())),
            a.arity,
            a.prefix,
        ))
    }

    pub fn add(&self, other: &HoloFunction) -> Result<HoloFunction> {
        Self::binary(self, other, Expr::Add)
    }

    pub fn sub(&self, other: &HoloFunction) -> Result<HoloFunction> {
        Self::binary(self, other, Expr::Sub)
    }

    pub fn mul(&self, other: &HoloFunction) -> Result<HoloFunction> {
        Self::binary(self, other, Expr::Mul)
    }

    pub fn div(&self, other: &HoloFunction) -> Result<HoloFunction> {
        Self::binary(self, other, Expr::Div)
    }

    pub fn neg(&self) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Neg(self.expr.clone())),
            self.arity,
            self.prefix,
        )
    }

    pub fn powu(&self, m: u32) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Pow(self.expr.clone(), m)),
            self.arity,
            self.prefix,
        )
    }

    pub fn exp(&self) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Exp(self.expr.clone())),
            self.arity,
            self.prefix,
        )
    }

    pub fn log(&self) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Log(self.expr.clone())),
            self.arity,
            self.prefix,
        )
    }

    pub fn sqrt(&self) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Sqrt(self.expr.clone())),
            self.arity,
            self.prefix,
        )
    }

    /// Multiply by a scalar.
    pub fn scale(&self, c: Complex64) -> HoloFunction {
        Self::from_expr(
            Arc::new(Expr::Mul(Arc::new(Expr::Const(c)), self.expr.clone())),
            self.arity,
            self.prefix,
        )
    }

    /// Substitution composition: replace z_k by parts[k] throughout. The
    /// result has the common arity of the parts; subtrees of the parts are
    /// shared, not copied.
    pub fn compose(&self, parts: &[HoloFunction]) -> Result<HoloFunction> {
        if parts.len() != self.arity {
            return Err(Error::Arity(format!(
                "composition needs {} inner expressions, got {}",
                self.arity,
                parts.len()
            )));
        }
        let inner_arity = match parts.first() {
            Some(p) => p.arity,
            // Arity-zero outer expression: nothing to substitute.
            None => return Ok(self.clone()),
        };
        if parts.iter().any(|p| p.arity != inner_arity) {
            return Err(Error::Arity(
                "inner expressions of a composition must share one arity".into(),
            ));
        }
        let exprs: Vec<Arc<Expr>> = parts.iter().map(|p| p.expr.clone()).collect();
        Ok(HoloFunction::from_expr(
            substitute(&self.expr, &exprs),
            inner_arity,
            parts[0].prefix,
        ))
    }
}

fn substitute(e: &Arc<Expr>, parts: &[Arc<Expr>]) -> Arc<Expr> {
    match &**e {
        Expr::Const(_) => e.clone(),
        Expr::Var(k) => parts[*k].clone(),
        Expr::Add(a, b) => Arc::new(Expr::Add(substitute(a, parts), substitute(b, parts))),
        Expr::Sub(a, b) => Arc::new(Expr::Sub(substitute(a, parts), substitute(b, parts))),
        Expr::Mul(a, b) => Arc::new(Expr::Mul(substitute(a, parts), substitute(b, parts))),
        Expr::Div(a, b) => Arc::new(Expr::Div(substitute(a, parts), substitute(b, parts))),
        Expr::Neg(a) => Arc::new(Expr::Neg(substitute(a, parts))),
        Expr::Pow(a, m) => Arc::new(Expr::Pow(substitute(a, parts), *m)),
        Expr::Exp(a) => Arc::new(Expr::Exp(substitute(a, parts))),
        Expr::Log(a) => Arc::new(Expr::Log(substitute(a, parts))),
        Expr::Sqrt(a) => Arc::new(Expr::Sqrt(substitute(a, parts))),
    }
}

// Printing follows the published grammar with precedence levels
// sum(1) < product(2) < power(3) < base(4), so print-then-parse returns a
// semantically identical expression.

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Neg(..) | Expr::Exp(..) | Expr::Log(..) | Expr::Sqrt(..) | Expr::Var(_) => 4,
        Expr::Const(c) => {
            // Constants needing a sign or an explicit sum print in parens.
            if (c.re != 0.0 && c.im != 0.0) || c.re < 0.0 || c.im < 0.0 {
                0
            } else {
                4
            }
        }
    }
}

fn fmt_const(c: Complex64, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(out, "{}", c.re)
    } else if c.re == 0.0 {
        write!(out, "{}i", c.im)
    } else if c.im < 0.0 {
        write!(out, "{}-{}i", c.re, -c.im)
    } else {
        write!(out, "{}+{}i", c.re, c.im)
    }
}

fn fmt_expr(e: &Expr, prefix: char, min_prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(e);
    let parens = p < min_prec;
    if parens {
        write!(out, "(")?;
    }
    match e {
        Expr::Const(c) => fmt_const(*c, out)?,
        Expr::Var(k) => write!(out, "{}{}", prefix, k + 1)?,
        Expr::Add(a, b) => {
            fmt_expr(a, prefix, 1, out)?;
            write!(out, " + ")?;
            fmt_expr(b, prefix, 2, out)?;
        }
        Expr::Sub(a, b) => {
            fmt_expr(a, prefix, 1, out)?;
            write!(out, " - ")?;
            fmt_expr(b, prefix, 2, out)?;
        }
        Expr::Mul(a, b) => {
            fmt_expr(a, prefix, 2, out)?;
            write!(out, "*")?;
            fmt_expr(b, prefix, 3, out)?;
        }
        Expr::Div(a, b) => {
            fmt_expr(a, prefix, 2, out)?;
            write!(out, "/")?;
            fmt_expr(b, prefix, 3, out)?;
        }
        Expr::Neg(a) => {
            write!(out, "-")?;
            fmt_expr(a, prefix, 4, out)?;
        }
        Expr::Pow(a, m) => {
            fmt_expr(a, prefix, 4, out)?;
            write!(out, "^{m}")?;
        }
        Expr::Exp(a) => {
            write!(out, "exp(")?;
            fmt_expr(a, prefix, 1, out)?;
            write!(out, ")")?;
        }
        Expr::Log(a) => {
            write!(out, "log(")?;
            fmt_expr(a, prefix, 1, out)?;
            write!(out, ")")?;
        }
        Expr::Sqrt(a) => {
            write!(out, "sqrt(")?;
            fmt_expr(a, prefix, 1, out)?;
            write!(out, ")")?;
        }
    }
    if parens {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for HoloFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(&self.expr, self.prefix, 1, f)
    }
}
