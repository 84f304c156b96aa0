//! Parametrization-invariant extension of a regular Lagrangian and the
//! end-to-end comparison of its Hamilton-Jacobi motion with the ordinary
//! Euler-Lagrange motion of the base model.
//!
//! Time becomes a coordinate `t(tau)`, base velocities become `v_q / v_t`
//! and the Lagrangian is multiplied by `v_t`. The result is homogeneous of
//! first degree in the velocities, so its Hessian loses one rank and the
//! direction of `t` turns into a constraint `H'_t = p_t + H_t`.

use std::collections::BTreeMap;

use hjfield_expr::{differentiate, evaluate, simplify, Binding, Compiled, Expr, Verdict, ZeroTest};
use serde_json::json;

use crate::hj::{self, HJSystem, ParameterPath, Trajectory};
use crate::model::{self, HessianAnalysis, LagrangianModel};
use crate::ode::{self, Integrator, Rk4};
use crate::{json_number, Error, Result, Settings};

#[derive(Debug, Clone, PartialEq)]
pub struct ReparamPair {
    pub base: LagrangianModel,
    pub extended: LagrangianModel,
    /// Base symbols in terms of extended ones.
    pub provenance: BTreeMap<String, Expr>,
}

impl ReparamPair {
    pub fn parameter(&self) -> &str {
        self.extended.evolution()
    }

    pub fn time(&self) -> &str {
        &self.base.time
    }
}

fn fresh_parameter(base: &LagrangianModel) -> String {
    let taken = |s: &str| {
        s == base.time
            || base
                .coordinates
                .iter()
                .any(|c| c == s || model::velocity(c) == s || model::momentum(c) == s || model::acceleration(c) == s)
    };
    let mut name = "tau".to_string();
    while taken(&name) {
        name.push('_');
    }
    name
}

pub fn parametrize(base: &LagrangianModel, settings: &Settings) -> Result<ReparamPair> {
    if base.parameter.is_some() {
        return Err(Error::Invalid(format!(
            "`{}` already evolves in a separate parameter",
            base.name
        )));
    }
    let split = model::analyze(base, settings)?;
    if split.deficiency != 0 {
        return Err(Error::SingularBase {
            rank: split.rank,
            n: base.n(),
        });
    }
    let vt = Expr::sym(model::velocity(&base.time));
    let provenance: BTreeMap<String, Expr> = base
        .velocities
        .iter()
        .map(|v| (v.clone(), Expr::sym(v) / &vt))
        .collect();
    let lagrangian = simplify(&(&vt * base.lagrangian.substitute(&provenance)));
    let mut coordinates = base.coordinates.clone();
    coordinates.push(base.time.clone());
    let extended = LagrangianModel::new(
        format!("{}-reparametrized", base.name),
        coordinates,
        base.time.clone(),
        Some(fresh_parameter(base)),
        lagrangian,
    )?;
    Ok(ReparamPair {
        base: base.clone(),
        extended,
        provenance,
    })
}

/// Euler-identity residual `sum v dL/dv - L`, zero exactly for first-degree
/// homogeneous Lagrangians.
pub fn homogeneity_check(m: &LagrangianModel, zt: &ZeroTest) -> Verdict {
    zt.check(&model::energy(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedHj {
    pub split: HessianAnalysis,
    pub system: HJSystem,
    /// Position of `t` among the parameters.
    pub time_index: usize,
    /// `H_t` from the base Legendre transform `p w - L(q, w, t)`.
    pub direct: Expr,
}

impl ExtendedHj {
    pub fn h_t(&self) -> &Expr {
        &self.system.hamiltonians[self.time_index]
    }
}

pub fn build_extended_hj(pair: &ReparamPair, settings: &Settings) -> Result<ExtendedHj> {
    let zt = settings.zero_test();
    let base_split = model::analyze(&pair.base, settings)?;
    let w = hj::legendre_invert(&pair.base, &base_split, &zt)?;
    let subst: BTreeMap<String, Expr> = pair.base.velocities.iter().cloned().zip(w.iter().cloned()).collect();
    let flux = pair.base.momenta().into_iter().zip(&w).map(|(p, wa)| Expr::sym(p) * wa);
    let direct = simplify(&(Expr::sum(flux) - pair.base.lagrangian.substitute(&subst)));

    let (split, system) = hj::build_system(&pair.extended, settings)?;
    let expected = [pair.parameter().to_string(), pair.time().to_string()];
    if system.parameters != expected {
        return Err(Error::Check(format!(
            "extended parameters are {:?}, expected {:?}",
            system.parameters, expected
        )));
    }
    if !zt.check(&system.hamiltonians[0]).is_zero() {
        return Err(Error::Check(format!(
            "H_{} does not vanish: {}",
            pair.parameter(),
            system.hamiltonians[0]
        )));
    }
    if !zt.check(&(&system.hamiltonians[1] - &direct)).is_zero() {
        return Err(Error::Check(format!(
            "H_t routes disagree: {} vs {}",
            system.hamiltonians[1], direct
        )));
    }
    Ok(ExtendedHj {
        split,
        system,
        time_index: 1,
        direct,
    })
}

/// Deviations allowed between the two routes for an "equivalent" verdict.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub model: String,
    pub horizon: f64,
    pub step: f64,
    pub max_dev_q: f64,
    pub max_dev_p: f64,
    /// Largest `|p_t(s) - p_t(0)|` along the Hamilton-Jacobi route.
    pub pt_drift: f64,
    /// Largest `|H'_t|` along the Hamilton-Jacobi route.
    pub hpt_max: f64,
    /// `|z(T) - integral of L dt|`, the integral by Simpson's rule along the
    /// Euler-Lagrange route.
    pub action_dev: f64,
    pub trajectory: Trajectory,
}

impl EquivalenceReport {
    pub fn max_dev(&self) -> f64 {
        self.max_dev_q.max(self.max_dev_p)
    }

    pub fn equivalent(&self) -> bool {
        self.max_dev() <= EQUIVALENCE_TOLERANCE
    }

    pub fn verdict(&self) -> &'static str {
        if self.equivalent() {
            "equivalent"
        } else {
            "divergent"
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "model": self.model,
            "horizon": json_number(self.horizon),
            "step": json_number(self.step),
            "max_dev_q": json_number(self.max_dev_q),
            "max_dev_p": json_number(self.max_dev_p),
            "pt_drift": json_number(self.pt_drift),
            "Hpt_max": json_number(self.hpt_max),
            "action_dev": json_number(self.action_dev),
            "verdict": self.verdict(),
        })
    }
}

/// Composite Simpson's rule on equally spaced samples; an odd interval count
/// closes with the three-eighths rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let even = if n % 2 == 0 { n } else { n - 3 };
            let mut acc = 0.0;
            for k in (0..even).step_by(2) {
                acc += h / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
            }
            if even < n {
                let v = &values[even..];
                acc += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            acc
        }
    }
}

/// Integrate the base Euler-Lagrange equations in explicit form from
/// `initial` (coordinates and velocities) at time 0.
pub(crate) struct LagrangeRoute {
    /// Per sample: time, coordinates, velocities.
    pub rows: Vec<Vec<f64>>,
}

pub(crate) fn lagrange_route(
    base: &LagrangianModel,
    initial: &[f64],
    horizon: f64,
    step: f64,
    zt: &ZeroTest,
    integrator: &dyn Integrator,
) -> Result<LagrangeRoute> {
    let accel = model::explicit_accelerations(base, zt)?;
    let mut slots = vec![base.time.clone()];
    slots.extend(base.coordinates.iter().cloned());
    slots.extend(base.velocities.iter().cloned());
    let programs: Vec<Compiled> = accel
        .iter()
        .map(|a| Compiled::new(a, &slots).map_err(|e| Error::Check(format!("cannot compile `{a}`: {e}"))))
        .collect::<Result<_>>()?;
    let n = base.n();
    let rhs = |t: f64, x: &[f64], out: &mut [f64]| {
        let mut buf = Vec::with_capacity(1 + x.len());
        buf.push(t);
        buf.extend_from_slice(x);
        out[..n].copy_from_slice(&x[n..]);
        for (o, p) in out[n..].iter_mut().zip(&programs) {
            *o = p.eval(&buf).unwrap_or(f64::NAN);
        }
    };
    let mut x = initial.to_vec();
    let steps = ode::step_count(horizon, step);
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let mut rows = Vec::with_capacity(steps + 1);
    let row = |t: f64, x: &[f64]| {
        let mut r = vec![t];
        r.extend_from_slice(x);
        r
    };
    rows.push(row(0.0, &x));
    for k in 1..=steps {
        integrator.step(&rhs, (k - 1) as f64 * h, &mut x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "Euler-Lagrange route of `{}` left the finite range at t = {:.6e}",
                base.name,
                k as f64 * h
            )));
        }
        rows.push(row(k as f64 * h, &x));
    }
    Ok(LagrangeRoute { rows })
}

/// Compare the extended Hamilton-Jacobi motion along `tau = s, t = s` with
/// the base Euler-Lagrange motion. `initial` binds the base coordinates and
/// velocities at `t = 0`; momenta follow from the base Legendre map.
pub fn verify_equivalence(
    pair: &ReparamPair,
    initial: &Binding,
    horizon: f64,
    step: f64,
    settings: &Settings,
) -> Result<EquivalenceReport> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be non-negative, got {horizon}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let base = &pair.base;
    let zt = settings.zero_test();
    let ext = build_extended_hj(pair, settings)?;
    let tds = hj::total_differential_system(&ext.system);

    let mut start = Binding::new().with(base.time.clone(), 0.0);
    let mut state = Vec::with_capacity(2 * base.n());
    for name in base.coordinates.iter().chain(&base.velocities) {
        let v = initial
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("missing initial value for `{name}`")))?;
        start.insert(name.clone(), v);
        state.push(v);
    }
    let momenta: Vec<Expr> = base
        .velocities
        .iter()
        .map(|v| differentiate(&base.lagrangian, v))
        .collect();
    let mut hj_initial = Binding::new();
    for (q, p) in base.coordinates.iter().zip(&momenta) {
        hj_initial.insert(q.clone(), start.get(q).unwrap_or_default());
        let value = evaluate(p, &start).map_err(|e| Error::Numerical(format!("initial momentum: {e}")))?;
        hj_initial.insert(model::momentum(q), value);
    }
    let path = ParameterPath::straight(vec![0.0, 0.0], &[1.0, 1.0], horizon)?;
    let traj = hj::integrate_with(&tds, &hj_initial, &path, step, &Rk4)?;
    if let Some(why) = &traj.failure {
        return Err(Error::Numerical(format!("Hamilton-Jacobi route: {why}")));
    }
    let route = lagrange_route(base, &state, horizon, step, &zt, &Rk4)?;
    if route.rows.len() != traj.rows.len() {
        return Err(Error::Check("routes sampled on different grids".into()));
    }

    let mut slots = vec![base.time.clone()];
    slots.extend(base.coordinates.iter().cloned());
    slots.extend(base.velocities.iter().cloned());
    let compile =
        |e: &Expr| Compiled::new(e, &slots).map_err(|err| Error::Check(format!("cannot compile `{e}`: {err}")));
    let p_programs: Vec<Compiled> = momenta.iter().map(compile).collect::<Result<_>>()?;
    let l_program = compile(&base.lagrangian)?;
    let q_cols: Vec<usize> = base
        .coordinates
        .iter()
        .map(|q| traj.index(q).expect("q column"))
        .collect();
    let p_cols: Vec<usize> = base
        .coordinates
        .iter()
        .map(|q| traj.index(&model::momentum(q)).expect("p column"))
        .collect();
    let pt_col = traj.index(&model::momentum(pair.time())).expect("p_t column");

    let n = base.n();
    let (mut dev_q, mut dev_p) = (0.0f64, 0.0f64);
    let mut lagrangian = Vec::with_capacity(route.rows.len());
    for (a, b) in traj.rows.iter().zip(&route.rows) {
        for i in 0..n {
            dev_q = dev_q.max((a[q_cols[i]] - b[1 + i]).abs());
            let pb = p_programs[i].eval(b).map_err(|e| Error::Numerical(e.to_string()))?;
            dev_p = dev_p.max((a[p_cols[i]] - pb).abs());
        }
        lagrangian.push(l_program.eval(b).map_err(|e| Error::Numerical(e.to_string()))?);
    }
    let pt0 = traj.rows[0][pt_col];
    let pt_drift = traj.rows.iter().fold(0.0f64, |m, r| m.max((r[pt_col] - pt0).abs()));
    let hpt_max = hj::max_along(&traj, &ext.system.primed[ext.time_index])?;
    let h = if route.rows.len() > 1 {
        route.rows[1][0] - route.rows[0][0]
    } else {
        0.0
    };
    let action = simpson(&lagrangian, h);
    let z_end = traj.last(hj::ACTION).unwrap_or(0.0);
    Ok(EquivalenceReport {
        model: base.name.clone(),
        horizon,
        step,
        max_dev_q: dev_q,
        max_dev_p: dev_p,
        pt_drift,
        hpt_max,
        action_dev: (z_end - action).abs(),
        trajectory: traj,
    })
}
