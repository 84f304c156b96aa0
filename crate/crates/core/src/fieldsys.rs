//! Singular Lagrangians treated as field systems.
//!
//! The regular coordinates become functions `q_a(t_alpha)` of all the
//! Hamilton-Jacobi parameters. Their velocities are replaced by the chain
//! rule `v_a = d<t0>_a + sum_mu d<mu>_a v_mu`, which turns `L` into the
//! modified Lagrangian `L'` of a multi-time field theory.

use std::collections::BTreeMap;

use hjfield_expr::{differentiate, evaluate, simplify, Binding, Expr, Verdict, ZeroTest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::hj::{self, HJSystem};
use crate::model::{self, HessianAnalysis, LagrangianModel};
use crate::{binding_json, json_number, Error, Result, Settings};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSystemModel {
    pub base: LagrangianModel,
    /// `t_alpha`: the evolution parameter, then the degenerate coordinates.
    pub parameters: Vec<String>,
    /// Promoted (regular) coordinates.
    pub coordinates: Vec<String>,
    /// `partials[a][alpha]` names `dq_a/dt_alpha`.
    pub partials: Vec<Vec<String>>,
    /// Regular velocity to chain-rule expansion.
    pub promoted: BTreeMap<String, Expr>,
    pub lagrangian: Expr,
    /// `G_alpha`, one per parameter.
    pub constraints: Vec<Expr>,
}

pub fn partial(parameter: &str, coord: &str) -> String {
    format!("d{parameter}_{coord}")
}

impl FieldSystemModel {
    /// Velocities of the degenerate coordinates, `dt_mu/dt_0`.
    pub fn parameter_rates(&self) -> Vec<Expr> {
        let mut rates = vec![Expr::one()];
        rates.extend(self.parameters[1..].iter().map(|t| Expr::sym(model::velocity(t))));
        rates
    }

    /// Symmetric second partial `d^2 q_a / dt_alpha dt_beta`.
    pub fn second_partial(&self, a: usize, alpha: usize, beta: usize) -> String {
        let (i, j) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        format!("d{}{}_{}", self.parameters[i], self.parameters[j], self.coordinates[a])
    }

    /// Total derivative along `t_alpha` of an expression in the field
    /// variables; degenerate velocities count as constants.
    pub fn total_derivative(&self, f: &Expr, alpha: usize) -> Expr {
        let mut terms = vec![differentiate(f, &self.parameters[alpha])];
        for (b, q) in self.coordinates.iter().enumerate() {
            if f.contains_symbol(q) {
                terms.push(differentiate(f, q) * Expr::sym(&self.partials[b][alpha]));
            }
            for (beta, d) in self.partials[b].iter().enumerate() {
                if f.contains_symbol(d) {
                    terms.push(differentiate(f, d) * Expr::sym(self.second_partial(b, alpha, beta)));
                }
            }
        }
        simplify(&Expr::sum(terms))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "model": self.base.name,
            "parameters": self.parameters,
            "coordinates": self.coordinates,
            "partials": self.partials,
            "promoted": self.promoted.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect::<serde_json::Map<_, _>>(),
            "lagrangian": self.lagrangian.to_string(),
            "constraints": self.parameters.iter().zip(&self.constraints)
                .map(|(t, g)| (format!("G_{t}"), json!(g.to_string())))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}

pub fn promote_to_field(m: &LagrangianModel, split: &HessianAnalysis) -> Result<FieldSystemModel> {
    if split.deficiency == 0 {
        return Err(Error::NothingToPromote);
    }
    let mut parameters = vec![m.evolution().to_string()];
    parameters.extend(split.degenerate.iter().map(|&i| m.coordinates[i].clone()));
    let coordinates: Vec<String> = split.regular.iter().map(|&i| m.coordinates[i].clone()).collect();
    let partials: Vec<Vec<String>> = coordinates
        .iter()
        .map(|q| parameters.iter().map(|t| partial(t, q)).collect())
        .collect();

    let mut taken: Vec<String> = m.coordinates.clone();
    taken.extend(m.velocities.iter().cloned());
    taken.extend(m.accelerations());
    taken.extend(m.momenta());
    taken.push(m.time.clone());
    taken.extend(m.parameter.iter().cloned());
    for d in partials.iter().flatten() {
        if taken.contains(d) {
            return Err(Error::Duplicate(d.clone()));
        }
    }

    let rates: Vec<Expr> = split.degenerate.iter().map(|&i| Expr::sym(&m.velocities[i])).collect();
    let promoted: BTreeMap<String, Expr> = split
        .regular
        .iter()
        .zip(&partials)
        .map(|(&i, ds)| {
            let chain = ds[1..].iter().zip(&rates).map(|(d, v)| Expr::sym(d) * v);
            let v = Expr::sum(std::iter::once(Expr::sym(&ds[0])).chain(chain));
            (m.velocities[i].clone(), v)
        })
        .collect();
    let lagrangian = simplify(&m.lagrangian.substitute(&promoted));

    // p_a = dL'/d(d<t0>_a)
    let p: Vec<Expr> = partials.iter().map(|ds| differentiate(&lagrangian, &ds[0])).collect();
    let mut constraints = Vec::with_capacity(parameters.len());
    let mut g0: Vec<Expr> = partials.iter().zip(&p).map(|(ds, p)| Expr::sym(&ds[0]) * p).collect();
    for &i in &split.degenerate {
        let v = &m.velocities[i];
        g0.push(Expr::sym(v) * differentiate(&lagrangian, v));
    }
    g0.push(-lagrangian.clone());
    constraints.push(simplify(&Expr::sum(g0)));
    for (k, &i) in split.degenerate.iter().enumerate() {
        let mut terms = vec![-differentiate(&lagrangian, &m.velocities[i])];
        terms.extend(partials.iter().zip(&p).map(|(ds, p)| Expr::sym(&ds[k + 1]) * p));
        constraints.push(simplify(&Expr::sum(terms)));
    }

    Ok(FieldSystemModel {
        base: m.clone(),
        parameters,
        coordinates,
        partials,
        promoted,
        lagrangian,
        constraints,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldEquations {
    /// Multi-time Euler-Lagrange residual per promoted coordinate.
    pub residuals: Vec<Expr>,
    /// Residuals with `q_a = q_a(time)` imposed, in terms of `v_a`, `a_a`.
    pub reduced: Vec<Expr>,
}

pub fn field_euler_lagrange(f: &FieldSystemModel) -> FieldEquations {
    let time = f.parameters.iter().position(|t| *t == f.base.time);
    let mut reduce = BTreeMap::new();
    for (a, q) in f.coordinates.iter().enumerate() {
        for alpha in 0..f.parameters.len() {
            let first = if Some(alpha) == time {
                Expr::sym(model::velocity(q))
            } else {
                Expr::zero()
            };
            reduce.insert(f.partials[a][alpha].clone(), first);
            for beta in alpha..f.parameters.len() {
                let second = if Some(alpha) == time && Some(beta) == time {
                    Expr::sym(model::acceleration(q))
                } else {
                    Expr::zero()
                };
                reduce.insert(f.second_partial(a, alpha, beta), second);
            }
        }
    }
    let mut residuals = Vec::with_capacity(f.coordinates.len());
    let mut reduced = Vec::with_capacity(f.coordinates.len());
    for (a, q) in f.coordinates.iter().enumerate() {
        let mut terms: Vec<Expr> = f.partials[a]
            .iter()
            .enumerate()
            .map(|(alpha, d)| f.total_derivative(&differentiate(&f.lagrangian, d), alpha))
            .collect();
        terms.push(-differentiate(&f.lagrangian, q));
        let r = simplify(&Expr::sum(terms));
        reduced.push(simplify(&r.substitute(&reduce)));
        residuals.push(r);
    }
    FieldEquations { residuals, reduced }
}

/// Zero test restricted to positive samples, so that rates such as `v_t`
/// keep the sign the parametrization assumes.
pub fn positive_zero_test(settings: &Settings) -> ZeroTest {
    settings.zero_test().with_range(0.5, 2.0)
}

/// Compare reduced field residuals with the Euler-Lagrange residuals of
/// `base` after dividing out the rate of `time`.
pub fn reduction_check(
    f: &FieldSystemModel,
    eqs: &FieldEquations,
    base: &LagrangianModel,
    settings: &Settings,
) -> Result<Vec<Verdict>> {
    let zt = positive_zero_test(settings);
    let el = model::euler_lagrange(base);
    let factor = if f.base.coordinates.contains(&f.base.time) {
        Expr::sym(model::velocity(&f.base.time))
    } else {
        Expr::one()
    };
    f.coordinates
        .iter()
        .zip(&eqs.reduced)
        .map(|(q, r)| {
            let i = base
                .coordinates
                .iter()
                .position(|c| c == q)
                .ok_or_else(|| Error::Invalid(format!("`{q}` is not a coordinate of `{}`", base.name)))?;
            Ok(zt.check(&(r - &factor * &el[i])))
        })
        .collect()
}

/// `H_alpha` with `p_a = dL/dv_a` at the promoted velocities, against `G_alpha`.
pub fn constraint_check(f: &FieldSystemModel, sys: &HJSystem, settings: &Settings) -> Vec<Verdict> {
    let zt = positive_zero_test(settings);
    let momenta = momentum_substitution(f, sys);
    sys.hamiltonians
        .iter()
        .zip(&f.constraints)
        .map(|(h, g)| zt.check(&(h.substitute(&momenta) - g)))
        .collect()
}

fn momentum_substitution(f: &FieldSystemModel, sys: &HJSystem) -> BTreeMap<String, Expr> {
    let m = &f.base;
    sys.momenta
        .iter()
        .zip(&sys.coordinates)
        .map(|(p, q)| {
            let v = model::velocity(q);
            (
                p.clone(),
                simplify(&differentiate(&m.lagrangian, &v).substitute(&f.promoted)),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationEntry {
    pub id: String,
    pub expression: Expr,
    pub verdict: Verdict,
    /// Largest `|value|` over the sample points.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub parameters: Vec<String>,
    /// `dG_alpha` and, per parameter differential, the residual against
    /// `-dL'/dt_alpha`.
    pub entries: Vec<VariationEntry>,
    /// Per `G_alpha`, the differentials for which the identity balances.
    pub balanced: BTreeMap<String, Vec<String>>,
    /// Ids of `dG_alpha` that vanish under no convention.
    pub flagged: Vec<String>,
}

impl VariationReport {
    pub fn entry(&self, id: &str) -> Option<&VariationEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "parameters": self.parameters,
            "entries": self.entries.iter().map(|e| json!({
                "id": e.id,
                "expression": e.expression.to_string(),
                "verdict": e.verdict.label(),
                "witness": e.verdict.witness().map(binding_json),
                "max_gap": json_number(e.max_gap),
            })).collect::<Vec<_>>(),
            "balanced": self.balanced,
            "flagged": self.flagged,
        })
    }
}

/// Largest `|e|` over `samples` points drawn from `[0.5, 2]`, skipping
/// points where `e` cannot be evaluated.
fn max_gap(e: &Expr, samples: usize, seed: u64) -> f64 {
    let symbols: Vec<String> = e.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples.max(1) {
        let b: Binding = symbols.iter().map(|s| (s.clone(), rng.gen_range(0.5..=2.0))).collect();
        if let Ok(v) = evaluate(e, &b) {
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Variations `dG_alpha` along the total differential system, written per
/// unit `dt_0` with `dt_mu = v_mu dt_0`, and compared with `-dL'/dt_alpha`
/// under the `dt_0` reading and under each `dt_mu` reading.
pub fn constraint_variations(f: &FieldSystemModel, sys: &HJSystem, settings: &Settings) -> Result<VariationReport> {
    if sys.parameters != f.parameters {
        return Err(Error::Invalid(format!(
            "system parameters {:?} do not match field parameters {:?}",
            sys.parameters, f.parameters
        )));
    }
    let zt = positive_zero_test(settings);
    let tds = hj::total_differential_system(sys);
    let momenta = momentum_substitution(f, sys);
    let rates = f.parameter_rates();
    let mut entries = Vec::new();
    let mut balanced = BTreeMap::new();
    let mut flagged = Vec::new();
    let mut push = |id: String, e: Expr| {
        let verdict = zt.check(&e);
        let gap = max_gap(&e, settings.samples, settings.seed);
        let ok = verdict.is_zero();
        entries.push(VariationEntry {
            id,
            expression: e,
            verdict,
            max_gap: gap,
        });
        ok
    };
    for (alpha, (t, h)) in f.parameters.iter().zip(&sys.hamiltonians).enumerate() {
        let along: Vec<Expr> = rates
            .iter()
            .enumerate()
            .map(|(beta, rate)| tds.variation(h, beta) * rate)
            .collect();
        let lhs = simplify(&Expr::sum(along).substitute(&momenta));
        let rhs = simplify(&-differentiate(&f.lagrangian, &f.parameters[alpha]));
        let id = format!("dG_{t}");
        push(id.clone(), lhs.clone());
        let mut ok = Vec::new();
        for (beta, (s, rate)) in f.parameters.iter().zip(&rates).enumerate() {
            let per = if beta == 0 { lhs.clone() } else { &lhs / rate };
            if push(format!("{id}:d{s}"), simplify(&(per - &rhs))) {
                ok.push(format!("d{s}"));
            }
        }
        if ok.is_empty() {
            flagged.push(id.clone());
        }
        balanced.insert(id, ok);
    }
    Ok(VariationReport {
        parameters: f.parameters.clone(),
        entries,
        balanced,
        flagged,
    })
}
