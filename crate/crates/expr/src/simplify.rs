//! Canonical-form simplifier.
//!
//! Every expression is rewritten into a sum of terms, each term a rational
//! coefficient times a product of atoms raised to rational powers. The rewrite
//! set is fixed:
//!
//! * constant folding over exact rationals, including `sin(0)`, `cos(0)`,
//!   `exp(0)` and `ln(1)`;
//! * `0`/`1` identities (`x + 0`, `1 * x`, `x^0`, `x^1`, `0 * x`);
//! * like-term collection, with terms and factors kept in a canonical order
//!   (symbols lexicographically by name, then by degree);
//! * rational-power combination: `x^a * x^b = x^(a+b)` and
//!   `(x^a)^b = x^(a*b)`;
//! * expansion of products of sums and of sums raised to small positive
//!   integer powers.
//!
//! Power combination assumes bases are positive where fractional powers are
//! involved and cancels `x / x` to `1`. There are no trigonometric,
//! exponential or logarithmic identities; the numeric tier of the zero test
//! covers those.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};

use crate::ast::{BinaryOp, Expr, Rational, UnaryOp};

/// Largest positive integer power of a multi-term sum that is expanded.
const EXPAND_MAX: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Sym(Arc<str>),
    Func(UnaryOp, Expr),
    /// Multi-term sum kept as a power base. Integer powers are normalized to
    /// a leading coefficient of `1`, fractional powers to `±1`.
    Sum(Expr),
    /// Power with a non-constant exponent.
    Power(Expr, Expr),
    /// Constant base with a fractional exponent (or `0` with a negative one).
    Num(Rational),
}

type Mono = BTreeMap<Atom, Rational>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Poly {
    constant: Rational,
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    fn constant(c: Rational) -> Poly {
        Poly {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    fn atom(a: Atom) -> Poly {
        let mut mono = Mono::new();
        mono.insert(a, Rational::one());
        Poly::term(mono, Rational::one())
    }

    fn term(mono: Mono, coeff: Rational) -> Poly {
        if coeff.is_zero() {
            return Poly::default();
        }
        if mono.is_empty() {
            return Poly::constant(coeff);
        }
        let mut terms = BTreeMap::new();
        terms.insert(mono, coeff);
        Poly {
            constant: Rational::zero(),
            terms,
        }
    }

    fn as_constant(&self) -> Option<&Rational> {
        if self.terms.is_empty() {
            Some(&self.constant)
        } else {
            None
        }
    }

    fn single_term(&self) -> Option<(&Mono, &Rational)> {
        if self.constant.is_zero() && self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn scale(mut self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::default();
        }
        self.constant *= k;
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self
    }

    fn add_assign(&mut self, other: Poly) {
        self.constant += other.constant;
        for (mono, coeff) in other.terms {
            add_term(&mut self.terms, mono, coeff);
        }
    }

    fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }
}

fn add_term(terms: &mut BTreeMap<Mono, Rational>, mono: Mono, coeff: Rational) {
    use std::collections::btree_map::Entry;
    match terms.entry(mono) {
        Entry::Vacant(v) => {
            if !coeff.is_zero() {
                v.insert(coeff);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += coeff;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn add(mut a: Poly, b: Poly) -> Poly {
    a.add_assign(b);
    a
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::constant(&a.constant * &b.constant);
    if !a.constant.is_zero() {
        for (mono, c) in &b.terms {
            add_term(&mut out.terms, mono.clone(), c * &a.constant);
        }
    }
    if !b.constant.is_zero() {
        for (mono, c) in &a.terms {
            add_term(&mut out.terms, mono.clone(), c * &b.constant);
        }
    }
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let mut merged = ma.clone();
            for (atom, e) in mb {
                let slot = merged.entry(atom.clone()).or_insert_with(Rational::zero);
                *slot += e;
            }
            out.add_assign(normalize_term(merged, ca * cb));
        }
    }
    out
}

/// Turn a raw product into canonical form: drop zero exponents, fold
/// constant atoms whose exponent became an integer and expand sum atoms
/// whose exponent became a small positive integer.
fn normalize_term(mono: Mono, mut coeff: Rational) -> Poly {
    let mut rest = Mono::new();
    let mut expand: Vec<(Poly, u32)> = Vec::new();
    for (atom, e) in mono {
        if e.is_zero() {
            continue;
        }
        match atom {
            Atom::Num(c) if e.is_integer() && !(c.is_zero() && e.is_negative()) => {
                coeff *= rational_powi(&c, &e);
            }
            Atom::Sum(s) if e.is_integer() && e.is_positive() && e <= rat(EXPAND_MAX as i64) => {
                let k = e.to_integer().to_u32().unwrap_or(1);
                expand.push((to_poly(&s), k));
            }
            other => {
                rest.insert(other, e);
            }
        }
    }
    let mut result = Poly::term(rest, coeff);
    for (p, k) in expand {
        for _ in 0..k {
            result = mul(&result, &p);
        }
    }
    result
}

fn rational_powi(c: &Rational, e: &Rational) -> Rational {
    let k = e.to_integer().to_i32().expect("exponent out of range");
    num::traits::Pow::pow(c, k)
}

fn exact_root(n: &BigInt, d: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(d);
    if num::pow(r.clone(), d as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn const_pow(c: &Rational, k: &Rational) -> Poly {
    if k.is_zero() {
        return Poly::constant(Rational::one());
    }
    if k.is_integer() {
        if c.is_zero() && k.is_negative() {
            return Poly::term(single(Atom::Num(c.clone()), k.clone()), Rational::one());
        }
        return Poly::constant(rational_powi(c, k));
    }
    if c.is_zero() && k.is_positive() {
        return Poly::default();
    }
    if c.is_one() {
        return Poly::constant(Rational::one());
    }
    if c.is_positive() {
        if let Some(d) = k.denom().to_u32() {
            if let (Some(rn), Some(rd)) = (exact_root(c.numer(), d), exact_root(c.denom(), d)) {
                let root = Rational::new(rn, rd);
                return Poly::constant(rational_powi(&root, &Rational::from_integer(k.numer().clone())));
            }
        }
    }
    Poly::term(single(Atom::Num(c.clone()), k.clone()), Rational::one())
}

fn single(atom: Atom, e: Rational) -> Mono {
    let mut m = Mono::new();
    m.insert(atom, e);
    m
}

fn pow_rational(base: Poly, k: Rational) -> Poly {
    if k.is_zero() {
        return Poly::constant(Rational::one());
    }
    if k.is_one() {
        return base;
    }
    if let Some(c) = base.as_constant() {
        return const_pow(c, &k);
    }
    if let Some((mono, c)) = base.single_term() {
        let raised: Mono = mono.iter().map(|(a, e)| (a.clone(), e * &k)).collect();
        if k.is_integer() {
            return normalize_term(raised, rational_powi(c, &k));
        }
        let coeff_part = const_pow(c, &k);
        return mul(&coeff_part, &normalize_term(raised, Rational::one()));
    }
    if k.is_integer() && k.is_positive() && k <= rat(EXPAND_MAX as i64) {
        let n = k.to_integer().to_u32().unwrap_or(1);
        let mut out = base.clone();
        for _ in 1..n {
            out = mul(&out, &base);
        }
        return out;
    }
    let lead = base.leading_coefficient().cloned().unwrap_or_else(Rational::one);
    let lead = if k.is_integer() { lead } else { lead.abs() };
    let monic = base.scale(&lead.recip());
    let atom = Atom::Sum(from_poly(&monic));
    let factor = Poly::term(single(atom, k.clone()), Rational::one());
    mul(&const_pow(&lead, &k), &factor)
}

fn pow(base: Poly, exponent: Poly) -> Poly {
    if let Some(k) = exponent.as_constant() {
        return pow_rational(base, k.clone());
    }
    if let Some(c) = base.as_constant() {
        if c.is_one() {
            return Poly::constant(Rational::one());
        }
    }
    Poly::atom(Atom::Power(from_poly(&base), from_poly(&exponent)))
}

fn func(op: UnaryOp, arg: Poly) -> Poly {
    if let Some(c) = arg.as_constant() {
        let folded = match op {
            UnaryOp::Sin if c.is_zero() => Some(Rational::zero()),
            UnaryOp::Cos | UnaryOp::Exp if c.is_zero() => Some(Rational::one()),
            UnaryOp::Ln if c.is_one() => Some(Rational::zero()),
            _ => None,
        };
        if let Some(v) = folded {
            return Poly::constant(v);
        }
    }
    Poly::atom(Atom::Func(op, from_poly(&arg)))
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Num(r) => Poly::constant(r.clone()),
        Expr::Sym(s) => Poly::atom(Atom::Sym(s.clone())),
        Expr::Unary(UnaryOp::Neg, a) => to_poly(a).scale(&rat(-1)),
        Expr::Unary(op, a) => func(*op, to_poly(a)),
        Expr::Binary(BinaryOp::Add, a, b) => add(to_poly(a), to_poly(b)),
        Expr::Binary(BinaryOp::Mul, a, b) => mul(&to_poly(a), &to_poly(b)),
        Expr::Binary(BinaryOp::Div, a, b) => mul(&to_poly(a), &reciprocal(b)),
        Expr::Binary(BinaryOp::Pow, a, b) => pow(to_poly(a), to_poly(b)),
    }
}

/// `1/b`. A constant power in the denominator is inverted before the base
/// is raised, so `1/(x + 1)^2` stays a power of a sum rather than the
/// reciprocal of its expansion.
fn reciprocal(b: &Expr) -> Poly {
    if let Expr::Binary(BinaryOp::Pow, base, k) = b {
        if let Expr::Num(k) = &**k {
            return pow_rational(to_poly(base), -k);
        }
    }
    pow_rational(to_poly(b), rat(-1))
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Sym(s) => Expr::Sym(s.clone()),
        Atom::Func(op, arg) => Expr::unary(*op, arg.clone()),
        Atom::Sum(s) => s.clone(),
        Atom::Power(b, e) => b.clone().pow(e.clone()),
        Atom::Num(c) => Expr::Num(c.clone()),
    }
}

fn factor_expr(a: &Atom, e: &Rational) -> Expr {
    if e.is_one() {
        atom_expr(a)
    } else {
        atom_expr(a).pow(Expr::Num(e.clone()))
    }
}

/// Expression for `|coeff| * mono`.
fn term_expr(mono: &Mono, coeff: &Rational) -> Expr {
    let coeff = coeff.abs();
    let mut numer: Vec<Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    // sums are divided out one at a time: a product of sums would re-expand
    let mut sum_denom: Vec<Expr> = Vec::new();
    if !coeff.numer().is_one() {
        numer.push(Expr::Num(Rational::from_integer(coeff.numer().clone())));
    }
    if !coeff.denom().is_one() {
        denom.push(Expr::Num(Rational::from_integer(coeff.denom().clone())));
    }
    for (atom, e) in mono {
        if e.is_positive() || matches!(atom, Atom::Num(c) if c.is_zero()) {
            numer.push(factor_expr(atom, e));
        } else if matches!(atom, Atom::Sum(_)) {
            sum_denom.push(factor_expr(atom, &-e));
        } else {
            denom.push(factor_expr(atom, &-e));
        }
    }
    let mut out = Expr::product(numer);
    if !denom.is_empty() {
        out = out / Expr::product(denom);
    }
    for d in sum_denom {
        out = out / d;
    }
    out
}

fn from_poly(p: &Poly) -> Expr {
    let mut parts: Vec<(bool, Expr)> = p
        .terms
        .iter()
        .map(|(mono, c)| (c.is_negative(), term_expr(mono, c)))
        .collect();
    if !p.constant.is_zero() || parts.is_empty() {
        parts.push((p.constant.is_negative(), Expr::Num(p.constant.abs())));
    }
    let mut iter = parts.into_iter();
    let (neg, first) = iter.next().expect("at least one part");
    let mut acc = if neg { negate_leading(first) } else { first };
    for (neg, t) in iter {
        acc = if neg { acc - t } else { acc + t };
    }
    acc
}

/// Negate by attaching the sign to the leading factor, so that `-x/y` prints
/// without parentheses.
fn negate_leading(e: Expr) -> Expr {
    match e {
        Expr::Binary(op @ (BinaryOp::Mul | BinaryOp::Div), a, b) => {
            Expr::Binary(op, std::sync::Arc::new(negate_leading((*a).clone())), b)
        }
        other => -other,
    }
}

/// Rewrite into canonical form. Idempotent, and value preserving wherever
/// both sides are defined (with the positivity caveats above).
pub fn simplify(e: &Expr) -> Expr {
    from_poly(&to_poly(e))
}
