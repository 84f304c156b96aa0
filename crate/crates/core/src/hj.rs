//! Canonical Hamilton-Jacobi structure of a singular Lagrangian.
//!
//! The coordinates split into regular `q_a`, whose momenta can be inverted
//! for the velocities, and degenerate `q_mu`, which join the evolution
//! parameter as independent parameters `t_alpha = [t_0, q_mu...]`. Each
//! parameter carries a constraint Hamiltonian `H'_alpha = p_alpha + H_alpha`
//! and the motion follows the total differential equations
//!
//! ```text
//! dq_a    =  dH'_alpha/dp_a     dt_alpha
//! dp_a    = -dH'_alpha/dq_a     dt_alpha
//! dp_beta = -dH'_alpha/dt_beta  dt_alpha
//! dz      = (-H_alpha + p_a dH'_alpha/dp_a) dt_alpha
//! ```
//!
//! where `z` is the action.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hjfield_expr::{differentiate, evaluate, simplify, Binding, Compiled, Expr, Rational, Verdict, ZeroTest};
use num::{One, Zero};
use serde_json::json;

use crate::model::{self, HessianAnalysis, LagrangianModel};
use crate::ode::{self, Integrator, Rk4};
use crate::{binding_json, Error, Result, Settings};

#[derive(Debug, Clone, PartialEq)]
pub struct HJSystem {
    pub model: String,
    /// `t_alpha`: the evolution parameter, then the degenerate coordinates.
    pub parameters: Vec<String>,
    pub parameter_momenta: Vec<String>,
    pub coordinates: Vec<String>,
    pub momenta: Vec<String>,
    /// Regular velocities `w_a` in terms of momenta. They may still depend
    /// on degenerate velocities; the Hamiltonians do not.
    pub velocities: Vec<Expr>,
    pub hamiltonians: Vec<Expr>,
    pub primed: Vec<Expr>,
}

/// Solve the affine momentum relations `p_a = dL/dv_a` for the regular
/// velocities.
pub fn legendre_invert(m: &LagrangianModel, split: &HessianAnalysis, zt: &ZeroTest) -> Result<Vec<Expr>> {
    let regular: Vec<&String> = split.regular.iter().map(|&i| &m.velocities[i]).collect();
    let momenta: Vec<Expr> = regular.iter().map(|v| differentiate(&m.lagrangian, v)).collect();
    let mut matrix = Vec::with_capacity(regular.len());
    for p in &momenta {
        let row: Vec<Expr> = regular.iter().map(|v| differentiate(p, v)).collect();
        for entry in &row {
            if entry.as_num().is_some() {
                continue;
            }
            for v in &regular {
                if entry.contains_symbol(v) && !zt.check(&differentiate(entry, v)).is_zero() {
                    return Err(Error::NonAffine {
                        expression: p.to_string(),
                    });
                }
            }
        }
        matrix.push(row);
    }
    let at_rest: BTreeMap<String, Expr> = regular.iter().map(|v| (v.to_string(), Expr::zero())).collect();
    let rhs: Vec<Expr> = split
        .regular
        .iter()
        .zip(&momenta)
        .map(|(&i, p)| simplify(&(Expr::sym(model::momentum(&m.coordinates[i])) - p.substitute(&at_rest))))
        .collect();
    let w = crate::linalg::solve(&matrix, &rhs, zt)
        .map_err(|k| Error::SingularSector(format!("no pivot for `{}`", regular[k])))?;
    let back: BTreeMap<String, Expr> = regular
        .iter()
        .zip(&w)
        .map(|(v, e)| (v.to_string(), e.clone()))
        .collect();
    for (&i, p) in split.regular.iter().zip(&momenta) {
        let residual = p.substitute(&back) - Expr::sym(model::momentum(&m.coordinates[i]));
        if !zt.check(&residual).is_zero() {
            return Err(Error::NonAffine {
                expression: p.to_string(),
            });
        }
    }
    Ok(w)
}

/// Remove degenerate velocities that `e` provably does not depend on.
fn drop_velocities(name: &str, e: Expr, velocities: &[String], zt: &ZeroTest) -> Result<Expr> {
    let mut e = simplify(&e);
    for v in velocities {
        if !e.contains_symbol(v) {
            continue;
        }
        if !zt.check(&differentiate(&e, v)).is_zero() {
            return Err(Error::InconsistentDegeneracy {
                name: name.to_string(),
                expression: e.to_string(),
            });
        }
        e = simplify(&e.substitute_one(v, &Expr::one()));
    }
    Ok(e)
}

pub fn build_hamiltonians(m: &LagrangianModel, split: &HessianAnalysis, w: &[Expr], zt: &ZeroTest) -> Result<HJSystem> {
    let coord = |i: usize| m.coordinates[i].clone();
    let subst: BTreeMap<String, Expr> = split
        .regular
        .iter()
        .zip(w)
        .map(|(&i, e)| (m.velocities[i].clone(), e.clone()))
        .collect();
    let degenerate_v: Vec<String> = split.degenerate.iter().map(|&i| m.velocities[i].clone()).collect();
    let mut parameters = vec![m.evolution().to_string()];
    parameters.extend(split.degenerate.iter().map(|&i| coord(i)));
    let parameter_momenta: Vec<String> = parameters.iter().map(|t| model::momentum(t)).collect();

    let mut h_mu = Vec::with_capacity(split.degenerate.len());
    for (&i, pm) in split.degenerate.iter().zip(&parameter_momenta[1..]) {
        let h = -differentiate(&m.lagrangian, &m.velocities[i]).substitute(&subst);
        h_mu.push(drop_velocities(pm, h, &degenerate_v, zt)?);
    }
    let mut terms: Vec<Expr> = split
        .regular
        .iter()
        .zip(w)
        .map(|(&i, wa)| Expr::sym(model::momentum(&m.coordinates[i])) * wa)
        .collect();
    // p_mu v_mu with p_mu = -H_mu
    terms.extend(
        split
            .degenerate
            .iter()
            .zip(&h_mu)
            .map(|(&i, h)| -(h * Expr::sym(&m.velocities[i]))),
    );
    terms.push(-m.lagrangian.substitute(&subst));
    let h0 = drop_velocities(&parameter_momenta[0], Expr::sum(terms), &degenerate_v, zt)?;

    let mut hamiltonians = vec![h0];
    hamiltonians.extend(h_mu);
    let primed = hamiltonians
        .iter()
        .zip(&parameter_momenta)
        .map(|(h, p)| simplify(&(Expr::sym(p) + h)))
        .collect();
    Ok(HJSystem {
        model: m.name.clone(),
        parameters,
        parameter_momenta,
        coordinates: split.regular.iter().map(|&i| coord(i)).collect(),
        momenta: split
            .regular
            .iter()
            .map(|&i| model::momentum(&m.coordinates[i]))
            .collect(),
        velocities: w.to_vec(),
        hamiltonians,
        primed,
    })
}

/// Rank analysis, Legendre inversion and Hamiltonians in one go.
pub fn build_system(m: &LagrangianModel, settings: &Settings) -> Result<(HessianAnalysis, HJSystem)> {
    let split = model::analyze(m, settings)?;
    let zt = settings.zero_test();
    let w = legendre_invert(m, &split, &zt)?;
    let sys = build_hamiltonians(m, &split, &w, &zt)?;
    Ok((split, sys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalDifferentialSystem {
    pub parameters: Vec<String>,
    /// `q_a..., p_a..., p_alpha..., z`.
    pub variables: Vec<String>,
    /// `coefficients[x][alpha]`.
    pub coefficients: Vec<Vec<Expr>>,
    pub hamiltonians: Vec<Expr>,
    pub coordinates: Vec<String>,
    pub momenta: Vec<String>,
    pub parameter_momenta: Vec<String>,
}

pub const ACTION: &str = "z";

pub fn total_differential_system(sys: &HJSystem) -> TotalDifferentialSystem {
    let mut variables: Vec<String> = sys.coordinates.clone();
    variables.extend(sys.momenta.iter().cloned());
    variables.extend(sys.parameter_momenta.iter().cloned());
    variables.push(ACTION.to_string());
    let mut coefficients = vec![Vec::with_capacity(sys.parameters.len()); variables.len()];
    for (h, hp) in sys.hamiltonians.iter().zip(&sys.primed) {
        let mut row = 0;
        let dq: Vec<Expr> = sys.momenta.iter().map(|p| differentiate(hp, p)).collect();
        for d in &dq {
            coefficients[row].push(d.clone());
            row += 1;
        }
        for q in &sys.coordinates {
            coefficients[row].push(simplify(&-differentiate(hp, q)));
            row += 1;
        }
        for t in &sys.parameters {
            coefficients[row].push(simplify(&-differentiate(hp, t)));
            row += 1;
        }
        let flux = sys.momenta.iter().zip(&dq).map(|(p, d)| Expr::sym(p) * d);
        coefficients[row].push(simplify(&(Expr::sum(flux) - h)));
    }
    TotalDifferentialSystem {
        parameters: sys.parameters.clone(),
        variables,
        coefficients,
        hamiltonians: sys.hamiltonians.clone(),
        coordinates: sys.coordinates.clone(),
        momenta: sys.momenta.clone(),
        parameter_momenta: sys.parameter_momenta.clone(),
    }
}

impl TotalDifferentialSystem {
    pub fn coefficient(&self, variable: &str, parameter: &str) -> Option<&Expr> {
        let x = self.variables.iter().position(|v| v == variable)?;
        let a = self.parameters.iter().position(|p| p == parameter)?;
        Some(&self.coefficients[x][a])
    }

    /// Total variation of `g` along `dt_beta`, with the differentials of the
    /// dependent variables eliminated through the system.
    pub fn variation(&self, g: &Expr, beta: usize) -> Expr {
        let mut terms = vec![differentiate(g, &self.parameters[beta])];
        for (x, row) in self.variables.iter().zip(&self.coefficients) {
            if x == ACTION || row[beta].is_zero() || !g.contains_symbol(x) {
                continue;
            }
            terms.push(differentiate(g, x) * &row[beta]);
        }
        simplify(&Expr::sum(terms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// No non-vanishing variation in the given round.
    Closed,
    /// A constraint free of momenta appeared; the configuration space must
    /// be reduced by hand.
    ReducedConfiguration,
    /// A non-zero constant appeared.
    Inconsistent,
    /// The round cap was reached with constraints still being generated.
    NotClosed,
}

impl Closure {
    pub fn label(self) -> &'static str {
        match self {
            Closure::Closed => "closed",
            Closure::ReducedConfiguration => "reduced-configuration",
            Closure::Inconsistent => "inconsistent",
            Closure::NotClosed => "not-closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationCheck {
    pub round: usize,
    pub generator: String,
    pub parameter: String,
    pub coefficient: Expr,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub id: String,
    /// Round in which the constraint enters the system.
    pub round: usize,
    pub expression: Expr,
    pub generator: String,
    pub parameter: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub closure: Closure,
    /// Last round examined.
    pub round: usize,
    pub checks: Vec<VariationCheck>,
    pub constraints: Vec<Constraint>,
}

impl IntegrabilityReport {
    pub fn is_closed(&self) -> bool {
        self.closure == Closure::Closed
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "status": self.closure.label(),
            "round": self.round,
            "checks": self.checks.iter().map(|c| json!({
                "round": c.round,
                "generator": c.generator,
                "parameter": c.parameter,
                "coefficient": c.coefficient.to_string(),
                "verdict": c.verdict.label(),
                "witness": c.verdict.witness().map(binding_json),
            })).collect::<Vec<_>>(),
            "constraints": self.constraints.iter().map(|c| json!({
                "id": c.id,
                "round": c.round,
                "expression": c.expression.to_string(),
                "from": format!("d{}/d{}", c.generator, c.parameter),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Leading rational coefficient of a simplified expression.
fn leading_coefficient(e: &Expr) -> Rational {
    fn numer(e: &Expr) -> Rational {
        match e {
            Expr::Num(r) => r.clone(),
            Expr::Unary(hjfield_expr::UnaryOp::Neg, a) => -numer(a),
            Expr::Binary(hjfield_expr::BinaryOp::Mul, a, _) => numer(a),
            Expr::Binary(hjfield_expr::BinaryOp::Div, a, b) => numer(a) / denom(b),
            _ => Rational::one(),
        }
    }
    fn denom(e: &Expr) -> Rational {
        match e {
            Expr::Num(r) if !r.is_zero() => r.clone(),
            Expr::Binary(hjfield_expr::BinaryOp::Mul, a, _) => denom(a),
            _ => Rational::one(),
        }
    }
    let first = e.summands().into_iter().next().unwrap_or_else(Expr::one);
    let c = numer(&first);
    if c.is_zero() {
        Rational::one()
    } else {
        c
    }
}

/// Scale to leading coefficient one, so that constraints differing by a
/// constant factor compare equal.
pub fn normalize_constraint(e: &Expr) -> Expr {
    let s = simplify(e);
    simplify(&(s.clone() / Expr::Num(leading_coefficient(&s))))
}

/// Integrability loop: require `dH'_alpha = 0` along the system, adjoin any
/// surviving coefficients that contain momenta as new generators, and repeat.
pub fn integrability_report(sys: &HJSystem, settings: &Settings) -> IntegrabilityReport {
    let tds = total_differential_system(sys);
    let zt = settings.zero_test();
    let momenta: Vec<&str> = sys
        .momenta
        .iter()
        .chain(&sys.parameter_momenta)
        .map(String::as_str)
        .collect();
    let mut pending: Vec<(String, Expr)> = sys
        .parameter_momenta
        .iter()
        .zip(&sys.primed)
        .map(|(p, h)| (format!("H'_{}", p.trim_start_matches("p_")), h.clone()))
        .collect();
    let mut checks = Vec::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut known: Vec<Expr> = Vec::new();
    for round in 0..settings.max_iter.max(1) {
        let mut fresh = Vec::new();
        for (name, g) in &pending {
            for (beta, t) in tds.parameters.iter().enumerate() {
                let c = tds.variation(g, beta);
                let verdict = zt.check(&c);
                if !verdict.is_zero() {
                    let n = normalize_constraint(&c);
                    if !known.contains(&n) {
                        known.push(n.clone());
                        fresh.push(Constraint {
                            id: format!("C{}", known.len()),
                            round: round + 1,
                            expression: n,
                            generator: name.clone(),
                            parameter: t.clone(),
                        });
                    }
                }
                checks.push(VariationCheck {
                    round,
                    generator: name.clone(),
                    parameter: t.clone(),
                    coefficient: c,
                    verdict,
                });
            }
        }
        if fresh.is_empty() {
            return IntegrabilityReport {
                closure: Closure::Closed,
                round,
                checks,
                constraints,
            };
        }
        let inconsistent = fresh.iter().any(|c| c.expression.as_num().is_some());
        let configurational = fresh
            .iter()
            .any(|c| !c.expression.contains_any(momenta.iter().copied()));
        pending = fresh.iter().map(|c| (c.id.clone(), c.expression.clone())).collect();
        constraints.extend(fresh);
        let closure = if inconsistent {
            Closure::Inconsistent
        } else if configurational {
            Closure::ReducedConfiguration
        } else {
            continue;
        };
        return IntegrabilityReport {
            closure,
            round: round + 1,
            checks,
            constraints,
        };
    }
    IntegrabilityReport {
        closure: Closure::NotClosed,
        round: settings.max_iter.max(1),
        checks,
        constraints,
    }
}

/// Piecewise-linear map `s -> t_alpha(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    knots: Vec<(f64, Vec<f64>)>,
}

impl ParameterPath {
    pub fn new(knots: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let Some((_, first)) = knots.first() else {
            return Err(Error::Invalid("parameter path needs a knot".into()));
        };
        let dim = first.len();
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invalid("path knots must increase strictly in s".into()));
            }
        }
        if knots
            .iter()
            .any(|(s, t)| t.len() != dim || !s.is_finite() || t.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Invalid(
                "path knots must be finite and of equal dimension".into(),
            ));
        }
        Ok(ParameterPath { knots })
    }

    /// `t(s) = start + rates * s` for `s` in `[0, length]`.
    pub fn straight(start: Vec<f64>, rates: &[f64], length: f64) -> Result<Self> {
        if !(length >= 0.0) {
            return Err(Error::Invalid(format!(
                "path length must be non-negative, got {length}"
            )));
        }
        if length == 0.0 {
            return ParameterPath::new(vec![(0.0, start)]);
        }
        let end = start.iter().zip(rates).map(|(a, r)| a + r * length).collect();
        ParameterPath::new(vec![(0.0, start), (length, end)])
    }

    /// Evolution parameter advancing with `s`, degenerate coordinates frozen.
    pub fn evolution(start: Vec<f64>, length: f64) -> Result<Self> {
        let mut rates = vec![0.0; start.len()];
        if let Some(r) = rates.first_mut() {
            *r = 1.0;
        }
        ParameterPath::straight(start, &rates, length)
    }

    pub fn start(&self) -> &[f64] {
        &self.knots[0].1
    }

    pub fn length(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.0) - self.knots[0].0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `s, t_alpha..., q_a..., p_a..., p_alpha..., z`.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub step: f64,
    pub integrator: String,
    /// Set when integration stopped at a non-finite state; `rows` then ends
    /// at the last finite sample.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let i = self.index(name)?;
        self.rows.last().map(|r| r[i])
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Integrate with the default integrator.
pub fn integrate(
    tds: &TotalDifferentialSystem,
    initial: &Binding,
    path: &ParameterPath,
    step: f64,
) -> Result<Trajectory> {
    integrate_with(tds, initial, path, step, &Rk4)
}

/// Integrate along `path`. `initial` must bind every `q_a` and `p_a`;
/// parameter momenta default to `-H_alpha` at the start point and `z` to 0.
pub fn integrate_with(
    tds: &TotalDifferentialSystem,
    initial: &Binding,
    path: &ParameterPath,
    step: f64,
    integrator: &dyn Integrator,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let np = tds.parameters.len();
    if path.start().len() != np {
        return Err(Error::Invalid(format!(
            "path has {} parameters, system has {np}",
            path.start().len()
        )));
    }
    let mut slots: Vec<String> = tds.parameters.clone();
    slots.extend(tds.variables.iter().filter(|v| *v != ACTION).cloned());
    let compile =
        |e: &Expr| Compiled::new(e, &slots).map_err(|err| Error::Check(format!("cannot compile `{e}`: {err}")));
    let program: Vec<Vec<Option<Compiled>>> = tds
        .coefficients
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| if e.is_zero() { Ok(None) } else { compile(e).map(Some) })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut start = Binding::new();
    for (t, v) in tds.parameters.iter().zip(path.start()) {
        start.insert(t.clone(), *v);
    }
    for name in tds.coordinates.iter().chain(&tds.momenta) {
        let v = initial
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("missing initial value for `{name}`")))?;
        start.insert(name.clone(), v);
    }
    let mut x: Vec<f64> = Vec::with_capacity(tds.variables.len());
    for name in tds.coordinates.iter().chain(&tds.momenta) {
        x.push(start.get(name).unwrap_or(0.0));
    }
    for (p, h) in tds.parameter_momenta.iter().zip(&tds.hamiltonians) {
        let v = match initial.get(p) {
            Some(v) => v,
            None => {
                -evaluate(h, &start).map_err(|e| Error::Numerical(format!("H for {p} at the initial point: {e}")))?
            }
        };
        x.push(v);
    }
    x.push(initial.get(ACTION).unwrap_or(0.0));

    let mut columns = vec!["s".to_string()];
    columns.extend(tds.parameters.iter().cloned());
    columns.extend(tds.variables.iter().cloned());
    let row_of = |s: f64, t: &[f64], x: &[f64]| {
        let mut r = Vec::with_capacity(1 + t.len() + x.len());
        r.push(s);
        r.extend_from_slice(t);
        r.extend_from_slice(x);
        r
    };
    let mut rows = vec![row_of(path.knots[0].0, path.start(), &x)];
    let mut failure = None;
    if x.iter().any(|v| !v.is_finite()) {
        failure = Some("non-finite initial state".to_string());
    }

    let nx = x.len();
    'segments: for seg in path.knots.windows(2) {
        if failure.is_some() {
            break;
        }
        let (s0, t0) = (&seg[0].0, &seg[0].1);
        let len = seg[1].0 - s0;
        let rates: Vec<f64> = seg[1].1.iter().zip(t0).map(|(b, a)| (b - a) / len).collect();
        let active: Vec<usize> = (0..np).filter(|&a| rates[a] != 0.0).collect();
        let rhs = |s: f64, state: &[f64], out: &mut [f64]| {
            let mut buf = Vec::with_capacity(slots.len());
            buf.extend(t0.iter().zip(&rates).map(|(a, r)| a + r * (s - s0)));
            buf.extend_from_slice(&state[..nx - 1]);
            for (i, row) in program.iter().enumerate() {
                let mut acc = 0.0;
                for &a in &active {
                    if let Some(c) = &row[a] {
                        acc += c.eval(&buf).unwrap_or(f64::NAN) * rates[a];
                    }
                }
                out[i] = acc;
            }
        };
        let n = ode::step_count(len, step);
        let h = len / n as f64;
        for k in 1..=n {
            let s_prev = s0 + (k - 1) as f64 * h;
            integrator.step(&rhs, s_prev, &mut x, h);
            if x.iter().any(|v| !v.is_finite()) {
                failure = Some(format!("non-finite state at s = {:.6e}", s0 + k as f64 * h));
                break 'segments;
            }
            let s = s0 + k as f64 * h;
            let t: Vec<f64> = t0.iter().zip(&rates).map(|(a, r)| a + r * (k as f64 * h)).collect();
            rows.push(row_of(s, &t, &x));
        }
    }
    Ok(Trajectory {
        columns,
        rows,
        step,
        integrator: integrator.name().to_string(),
        failure,
    })
}

impl HJSystem {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "model": self.model,
            "parameters": self.parameters,
            "coordinates": self.coordinates,
            "momenta": self.momenta,
            "parameter_momenta": self.parameter_momenta,
            "velocities": self.velocities.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "hamiltonians": self.hamiltonians.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "primed": self.primed.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl TotalDifferentialSystem {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: serde_json::Map<String, serde_json::Value> = self
            .variables
            .iter()
            .zip(&self.coefficients)
            .map(|(x, row)| {
                let per: serde_json::Map<String, serde_json::Value> = self
                    .parameters
                    .iter()
                    .zip(row)
                    .map(|(t, e)| (t.clone(), json!(e.to_string())))
                    .collect();
                (x.clone(), serde_json::Value::Object(per))
            })
            .collect();
        serde_json::Value::Object(rows)
    }
}

/// Largest `|f(row)|` over a trajectory for an expression in its columns.
pub fn max_along(tr: &Trajectory, e: &Expr) -> Result<f64> {
    let program = Compiled::new(e, &tr.columns).map_err(|err| Error::Check(format!("cannot compile `{e}`: {err}")))?;
    let mut worst = 0.0f64;
    for row in &tr.rows {
        let v = program.eval(row).map_err(|err| Error::Numerical(err.to_string()))?;
        worst = worst.max(v.abs());
    }
    Ok(worst)
}
