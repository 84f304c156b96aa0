//! Self-contained symbolic expression engine.
//!
//! Parsing ([`parse`]), exact differentiation ([`differentiate`]),
//! canonical-form simplification ([`simplify`]), floating evaluation
//! ([`evaluate`], [`Compiled`]) and a two-tier zero test
//! ([`is_identically_zero`]). Expressions are immutable and every operation
//! is a pure function.

pub mod ast;
mod diff;
mod display;
pub mod eval;
pub mod parse;
mod simplify;
pub mod zero;

pub use ast::{BinaryOp, Expr, Rational, UnaryOp};
pub use diff::{derive, differentiate};
pub use eval::{evaluate, Binding, Compiled, EvalError};
pub use parse::{parse, ParseError};
pub use simplify::simplify;
pub use zero::{is_identically_zero, Verdict, ZeroTest};

/// Exact rational from a finite `f64`, going through its shortest decimal
/// representation so that e.g. `0.1` becomes `1/10`.
pub fn rational_from_f64(value: f64) -> Option<Rational> {
    if !value.is_finite() {
        return None;
    }
    let text = format!("{}", value.abs());
    let r = if text.contains('e') {
        Rational::from_float(value.abs())?
    } else {
        parse::parse_decimal(&text)?
    };
    Some(if value < 0.0 { -r } else { r })
}
