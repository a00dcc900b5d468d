//! Field initialization from expression strings over `(x0, x1)`.
//!
//! The vocabulary is fixed: the variables `x0`, `x1`, the constant `pi`,
//! the functions `sin`, `cos`, `exp`, and the arithmetic operators
//! `+ - * / ^`. Anything else is rejected at parse time.

use meval::{Context, Expr};

use crate::error::{Error, Result};
use crate::geometry::{FieldRole, FieldSet, Lattice2D};
use crate::scalar::Real;

fn vocabulary() -> Context<'static> {
    let mut ctx = Context::empty();
    ctx.var("pi", std::f64::consts::PI)
        .func("sin", f64::sin)
        .func("cos", f64::cos)
        .func("exp", f64::exp);
    ctx
}

/// A parsed scalar expression in `x0`, `x1`.
pub struct FieldExpr {
    source: String,
    eval: Box<dyn Fn(f64, f64) -> f64>,
}

impl std::fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("FieldExpr").field(&self.source).finish()
    }
}

impl FieldExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let fail = |message: String| Error::Expression {
            expr: source.to_string(),
            message,
        };
        let expr: Expr = source.parse().map_err(|e: meval::Error| fail(e.to_string()))?;
        let eval = expr
            .bind2_with_context(vocabulary(), "x0", "x1")
            .map_err(|e| fail(e.to_string()))?;
        Ok(Self {
            source: source.to_string(),
            eval: Box::new(eval),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x0: f64, x1: f64) -> f64 {
        (self.eval)(x0, x1)
    }
}

/// Samples one expression per component at every lattice site.
pub fn sample_field<R: Real>(lattice: Lattice2D<R>, exprs: &[String], role: FieldRole) -> Result<FieldSet<R>> {
    let parsed = exprs.iter().map(|s| FieldExpr::parse(s)).collect::<Result<Vec<_>>>()?;
    let field = FieldSet::from_fn(lattice, parsed.len(), role, |x0, x1| {
        let (x0, x1) = (x0.as_f64(), x1.as_f64());
        parsed.iter().map(|e| R::lit(e.eval(x0, x1))).collect()
    });
    match field {
        Err(Error::NonFinite(_)) => Err(Error::Expression {
            expr: exprs.join(", "),
            message: "evaluates to a non-finite value on the lattice".into(),
        }),
        other => other,
    }
}
