use crate::ast::{BinaryOp, Expr, UnaryOp};
use crate::simplify::simplify;

/// Partial derivative with respect to `symbol`, all other symbols held
/// independent. The result is simplified.
pub fn differentiate(e: &Expr, symbol: &str) -> Expr {
    simplify(&derive(e, symbol))
}

/// Unsimplified derivative tree.
pub fn derive(e: &Expr, s: &str) -> Expr {
    if !e.contains_symbol(s) {
        return Expr::zero();
    }
    match e {
        Expr::Num(_) => Expr::zero(),
        Expr::Sym(_) => Expr::one(),
        Expr::Unary(op, a) => {
            let a = &**a;
            let da = derive(a, s);
            match op {
                UnaryOp::Neg => -da,
                UnaryOp::Sin => Expr::cos(a.clone()) * da,
                UnaryOp::Cos => -(Expr::sin(a.clone()) * da),
                UnaryOp::Exp => Expr::exp(a.clone()) * da,
                UnaryOp::Ln => da / a.clone(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add => derive(a, s) + derive(b, s),
                BinaryOp::Mul => derive(a, s) * b + a * derive(b, s),
                BinaryOp::Div => derive(a, s) / b - a * derive(b, s) / b.clone().powi(2),
                BinaryOp::Pow => {
                    if !b.contains_symbol(s) {
                        let lowered = match b.as_num() {
                            Some(k) => Expr::Num(k - <crate::ast::Rational as num::One>::one()),
                            None => b - Expr::one(),
                        };
                        b * a.clone().pow(lowered) * derive(a, s)
                    } else if !a.contains_symbol(s) {
                        e.clone() * Expr::ln(a.clone()) * derive(b, s)
                    } else {
                        e.clone() * (derive(b, s) * Expr::ln(a.clone()) + b * derive(a, s) / a)
                    }
                }
            }
        }
    }
}
