//! Floating-point evaluation.

use std::collections::BTreeMap;

use num::ToPrimitive;
use thiserror::Error;

use crate::ast::{BinaryOp, Expr, Rational, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite result")]
    NonFinite,
}

/// Values for symbols.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding(BTreeMap<String, f64>);

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(name.into(), value)
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

impl<K: Into<String>, const N: usize> From<[(K, f64); N]> for Binding {
    fn from(entries: [(K, f64); N]) -> Self {
        entries.into_iter().collect()
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for Binding {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        Binding(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn apply_unary(op: UnaryOp, x: f64) -> Result<f64, EvalError> {
    match op {
        UnaryOp::Neg => Ok(-x),
        UnaryOp::Sin => Ok(x.sin()),
        UnaryOp::Cos => Ok(x.cos()),
        UnaryOp::Exp => Ok(x.exp()),
        UnaryOp::Ln => {
            if x > 0.0 {
                Ok(x.ln())
            } else {
                Err(EvalError::Domain(format!("ln of non-positive value {x}")))
            }
        }
    }
}

fn apply_pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::Domain(format!(
            "negative base {base} raised to non-integer power {exponent}"
        )));
    }
    Ok(base.powf(exponent))
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinaryOp::Add => Ok(a + b),
        BinaryOp::Mul => Ok(a * b),
        BinaryOp::Div => {
            if b == 0.0 {
                Err(EvalError::DivisionByZero)
            } else {
                Ok(a / b)
            }
        }
        BinaryOp::Pow => apply_pow(a, b),
    }
}

fn finite(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Evaluate with every symbol looked up in `binding`.
pub fn evaluate(e: &Expr, binding: &Binding) -> Result<f64, EvalError> {
    let mut trace = Trace::default();
    eval_traced(e, binding, &mut trace)
}

/// Smallest denominator magnitude met during an evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Trace {
    pub min_denominator: f64,
}

impl Default for Trace {
    fn default() -> Self {
        Trace {
            min_denominator: f64::INFINITY,
        }
    }
}

pub(crate) fn eval_traced(e: &Expr, binding: &Binding, trace: &mut Trace) -> Result<f64, EvalError> {
    let value = match e {
        Expr::Num(r) => rational_to_f64(r),
        Expr::Sym(s) => binding.get(s).ok_or_else(|| EvalError::UnboundSymbol(s.to_string()))?,
        Expr::Unary(op, a) => apply_unary(*op, eval_traced(a, binding, trace)?)?,
        Expr::Binary(op, a, b) => {
            let x = eval_traced(a, binding, trace)?;
            let y = eval_traced(b, binding, trace)?;
            match op {
                BinaryOp::Div => trace.min_denominator = trace.min_denominator.min(y.abs()),
                BinaryOp::Pow if y < 0.0 => trace.min_denominator = trace.min_denominator.min(x.abs()),
                _ => {}
            }
            apply_binary(*op, x, y)?
        }
    };
    finite(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
    PowI(i32),
}

/// An expression flattened into a postfix program over numbered slots.
///
/// Built once per expression and evaluated many times, e.g. inside an
/// integrator's right-hand side.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

impl Compiled {
    /// Compile against a slot layout; every free symbol must appear in `slots`.
    pub fn new(e: &Expr, slots: &[String]) -> Result<Self, EvalError> {
        let index: BTreeMap<&str, usize> = slots.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut ops = Vec::new();
        let mut depth = 0;
        emit(e, &index, &mut ops, 0, &mut depth)?;
        Ok(Compiled { ops, depth })
    }

    pub fn eval(&self, slots: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Load(i) => stack.push(slots[*i]),
                Op::Unary(u) => {
                    let x = stack.pop().expect("stack underflow");
                    stack.push(apply_unary(*u, x)?);
                }
                Op::PowI(k) => {
                    let x = stack.pop().expect("stack underflow");
                    if x == 0.0 && *k < 0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    stack.push(x.powi(*k));
                }
                Op::Binary(b) => {
                    let y = stack.pop().expect("stack underflow");
                    let x = stack.pop().expect("stack underflow");
                    stack.push(apply_binary(*b, x, y)?);
                }
            }
        }
        finite(stack.pop().expect("empty program"))
    }

    /// Whether the program is the constant zero.
    pub fn is_const_zero(&self) -> bool {
        self.ops == [Op::Const(0.0)]
    }
}

fn emit(
    e: &Expr,
    index: &BTreeMap<&str, usize>,
    ops: &mut Vec<Op>,
    height: usize,
    depth: &mut usize,
) -> Result<(), EvalError> {
    *depth = (*depth).max(height + 1);
    match e {
        Expr::Num(r) => ops.push(Op::Const(rational_to_f64(r))),
        Expr::Sym(s) => {
            let i = index.get(&**s).ok_or_else(|| EvalError::UnboundSymbol(s.to_string()))?;
            ops.push(Op::Load(*i));
        }
        Expr::Unary(op, a) => {
            emit(a, index, ops, height, depth)?;
            ops.push(Op::Unary(*op));
        }
        Expr::Binary(BinaryOp::Pow, a, b) if is_small_integer(b).is_some() => {
            emit(a, index, ops, height, depth)?;
            ops.push(Op::PowI(is_small_integer(b).unwrap_or(1)));
        }
        Expr::Binary(op, a, b) => {
            emit(a, index, ops, height, depth)?;
            emit(b, index, ops, height + 1, depth)?;
            ops.push(Op::Binary(*op));
        }
    }
    Ok(())
}

fn is_small_integer(e: &Expr) -> Option<i32> {
    match e {
        Expr::Num(r) if r.is_integer() => r.numer().to_i32(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn basic_values() {
        let e = parse("2*q").unwrap();
        assert_eq!(evaluate(&e, &Binding::from([("q", 3.0)])), Ok(6.0));
        let e = parse("v_q^2/(2*v_t)").unwrap();
        let b = Binding::from([("v_q", 2.0), ("v_t", 1.0)]);
        assert_eq!(evaluate(&e, &b), Ok(2.0));
    }

    #[test]
    fn errors() {
        let e = parse("q/p").unwrap();
        let b = Binding::from([("q", 1.0), ("p", 0.0)]);
        assert_eq!(evaluate(&e, &b), Err(EvalError::DivisionByZero));
        assert_eq!(
            evaluate(&e, &Binding::from([("q", 1.0)])),
            Err(EvalError::UnboundSymbol("p".into()))
        );
        let e = parse("ln(q)").unwrap();
        assert!(matches!(
            evaluate(&e, &Binding::from([("q", -1.0)])),
            Err(EvalError::Domain(_))
        ));
        let e = parse("q^0.5").unwrap();
        assert!(matches!(
            evaluate(&e, &Binding::from([("q", -4.0)])),
            Err(EvalError::Domain(_))
        ));
        assert_eq!(evaluate(&e, &Binding::from([("q", 4.0)])), Ok(2.0));
        let e = parse("q^-2").unwrap();
        assert_eq!(
            evaluate(&e, &Binding::from([("q", 0.0)])),
            Err(EvalError::DivisionByZero)
        );
        let e = parse("exp(q)").unwrap();
        assert_eq!(evaluate(&e, &Binding::from([("q", 1000.0)])), Err(EvalError::NonFinite));
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let slots: Vec<String> = ["q", "p", "t"].iter().map(|s| s.to_string()).collect();
        for text in [
            "q^2/2 + p^3 - sin(t)*q",
            "exp(-q)*cos(p) / (1 + t^2)",
            "ln(1 + q^2)^0.5 - p^-2",
            "-(q - p)*(-t)",
        ] {
            let e = parse(text).unwrap();
            let c = Compiled::new(&e, &slots).unwrap();
            let vals = [0.7, -1.3, 2.1];
            let b = Binding::from([("q", vals[0]), ("p", vals[1]), ("t", vals[2])]);
            let tree = evaluate(&e, &b).unwrap();
            let flat = c.eval(&vals).unwrap();
            assert!((tree - flat).abs() <= 1e-14 * (1.0 + tree.abs()), "{text}");
        }
        let missing = Compiled::new(&parse("q + w").unwrap(), &slots);
        assert!(matches!(missing, Err(EvalError::UnboundSymbol(s)) if s == "w"));
    }
}
