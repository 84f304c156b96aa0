//! Source-text serialization.
//!
//! Output re-parses to the identical tree for every tree produced by the
//! parser. Rationals without a terminating decimal expansion and negative
//! constants are printed as parenthesized quotients / negations, which parse
//! back to a tree that simplifies to the same constant.

use std::fmt;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use crate::ast::{BinaryOp, Expr, Rational, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        // negative and non-decimal constants carry their own parentheses
        Expr::Num(_) | Expr::Sym(_) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(_, _) => PREC_ATOM,
        Expr::Binary(BinaryOp::Add, _, _) => PREC_ADD,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => PREC_MUL,
        Expr::Binary(BinaryOp::Pow, _, _) => PREC_POW,
    }
}

/// Number of fractional decimal digits needed to print `r` exactly, if finite.
fn decimal_digits(r: &Rational) -> Option<usize> {
    let mut d = r.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        Some(twos.max(fives))
    } else {
        None
    }
}

fn write_unsigned_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        return write!(f, "{}", r.numer());
    }
    match decimal_digits(r) {
        Some(digits) => {
            let scale = num::pow(BigInt::from(10), digits);
            let scaled = (r.numer() * &scale) / r.denom();
            let s = scaled.to_string();
            let s = format!("{s:0>width$}", width = digits + 1);
            let (int_part, frac_part) = s.split_at(s.len() - digits);
            write!(f, "{int_part}.{frac_part}")
        }
        None => write!(f, "({}/{})", r.numer(), r.denom()),
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_negative() {
        f.write_str("(-")?;
        write_unsigned_rational(f, &-r)?;
        f.write_str(")")
    } else {
        write_unsigned_rational(f, r)
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(r) => write_num(f, r),
        Expr::Sym(s) => f.write_str(s),
        Expr::Unary(UnaryOp::Neg, a) => {
            f.write_str("-")?;
            write_at(f, a, PREC_NEG)
        }
        Expr::Unary(op, a) => {
            f.write_str(op.function_name().unwrap_or("?"))?;
            f.write_str("(")?;
            write_expr(f, a)?;
            f.write_str(")")
        }
        Expr::Binary(BinaryOp::Add, a, b) => {
            write_at(f, a, PREC_ADD)?;
            match &**b {
                Expr::Unary(UnaryOp::Neg, inner) => {
                    f.write_str(" - ")?;
                    write_at(f, inner, PREC_MUL)
                }
                _ => {
                    f.write_str(" + ")?;
                    write_at(f, b, PREC_MUL)
                }
            }
        }
        Expr::Binary(op @ (BinaryOp::Mul | BinaryOp::Div), a, b) => {
            write_at(f, a, PREC_MUL)?;
            f.write_str(if *op == BinaryOp::Mul { "*" } else { "/" })?;
            write_at(f, b, PREC_NEG)
        }
        Expr::Binary(BinaryOp::Pow, a, b) => {
            write_at(f, a, PREC_ATOM)?;
            f.write_str("^")?;
            if matches!(&**b, Expr::Unary(UnaryOp::Neg, _)) {
                f.write_str("(")?;
                write_expr(f, b)?;
                f.write_str(")")
            } else {
                write_at(f, b, PREC_POW)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
