//! Expression tree.
//!
//! An [`Expr`] is an immutable tree whose children are reference counted, so
//! cloning is cheap and trees can be shared freely across threads. Node kinds
//! are deliberately minimal: subtraction is `a + (-b)` and there is no
//! separate reciprocal node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num::bigint::BigInt;
use num::{BigRational, One, Zero};

/// Exact rational constant.
pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
}

impl UnaryOp {
    /// Function name as written in source text. `Neg` has none.
    pub fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Ln => Some("ln"),
        }
    }

    pub fn from_function_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "ln" => Some(UnaryOp::Ln),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryOp {
    Add,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(Rational),
    Sym(Arc<str>),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn int(value: i64) -> Expr {
        Expr::Num(Rational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Expr {
        Expr::Num(Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn num(value: Rational) -> Expr {
        Expr::Num(value)
    }

    pub fn zero() -> Expr {
        Expr::Num(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(Rational::one())
    }

    pub fn sym(name: impl AsRef<str>) -> Expr {
        Expr::Sym(Arc::from(name.as_ref()))
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Arc::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Ln, arg)
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn powi(self, exponent: i64) -> Expr {
        self.pow(Expr::int(exponent))
    }

    /// Sum of an iterator of expressions, `0` when empty.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().reduce(|acc, t| acc + t).unwrap_or_else(Expr::zero)
    }

    /// Product of an iterator of expressions, `1` when empty.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors.into_iter().reduce(|acc, f| acc * f).unwrap_or_else(Expr::one)
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Expr::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Sym(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Free symbols, sorted.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                if !out.contains(&**s) {
                    out.insert(s.to_string());
                }
            }
            Expr::Unary(_, a) => a.collect_symbols(out),
            Expr::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(s) => &**s == name,
            Expr::Unary(_, a) => a.contains_symbol(name),
            Expr::Binary(_, a, b) => a.contains_symbol(name) || b.contains_symbol(name),
        }
    }

    pub fn contains_any<'a, I>(&self, names: I) -> bool
    where
        I: IntoIterator<Item = &'a str>,
    {
        names.into_iter().any(|n| self.contains_symbol(n))
    }

    /// Simultaneous substitution of symbols by expressions. Replacement
    /// subtrees are not substituted again.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.subst_inner(map)
    }

    fn subst_inner(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => map.get(&**s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Unary(op, a) => Expr::unary(*op, a.subst_inner(map)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.subst_inner(map), b.subst_inner(map)),
        }
    }

    /// Substitute a single symbol.
    pub fn substitute_one(&self, name: &str, with: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(name.to_string(), with.clone());
        self.substitute(&map)
    }

    /// Top-level summands, looking through `Add` and distributing `Neg`.
    pub fn summands(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        self.collect_summands(false, &mut out);
        out
    }

    fn collect_summands(&self, negate: bool, out: &mut Vec<Expr>) {
        match self {
            Expr::Binary(BinaryOp::Add, a, b) => {
                a.collect_summands(negate, out);
                b.collect_summands(negate, out);
            }
            Expr::Unary(UnaryOp::Neg, a) => a.collect_summands(!negate, out),
            _ if negate => out.push(-self.clone()),
            _ => out.push(self.clone()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(value: i64) -> Self {
        Expr::int(value)
    }
}

impl From<&str> for Expr {
    fn from(name: &str) -> Self {
        Expr::sym(name)
    }
}

macro_rules! binop_impl {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self, rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self.clone(), rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self.clone(), rhs.clone())
            }
        }
    };
}

binop_impl!(Add, add, |a, b| Expr::binary(BinaryOp::Add, a, b));
binop_impl!(Sub, sub, |a, b: Expr| Expr::binary(BinaryOp::Add, a, -b));
binop_impl!(Mul, mul, |a, b| Expr::binary(BinaryOp::Mul, a, b));
binop_impl!(Div, div, |a, b| Expr::binary(BinaryOp::Div, a, b));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}
