//! Scalar field in 1+1 dimensions on a periodic spatial lattice.
//!
//! The density `L(phi, dphi_x, dphi_t)` is summed over sites with central
//! differences, which turns the field into an ordinary finite-dimensional
//! [`LagrangianModel`] with coordinates `phi_0 .. phi_{N-1}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hjfield_expr::{rational_from_f64, simplify, Binding, Expr};

use crate::hj::{self, ParameterPath, Trajectory};
use crate::model::{self, LagrangianModel};
use crate::reparam::{self, EquivalenceReport};
use crate::{Error, Result, Settings};

pub const FIELD: &str = "phi";
pub const GRADIENT: &str = "dphi_x";
pub const RATE: &str = "dphi_t";
pub const TIME: &str = "t";

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFieldModel {
    pub name: String,
    pub sites: usize,
    pub dx: f64,
    pub density: Expr,
}

pub fn site(i: usize) -> String {
    format!("{FIELD}_{i}")
}

impl LatticeFieldModel {
    pub fn new(name: impl Into<String>, sites: usize, dx: f64, density: Expr) -> Result<Self> {
        if sites < 4 {
            return Err(Error::Invalid(format!("a lattice needs at least 4 sites, got {sites}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Invalid(format!("lattice spacing must be positive, got {dx}")));
        }
        for s in density.symbols() {
            if ![FIELD, GRADIENT, RATE].contains(&s.as_str()) {
                return Err(Error::UnknownSymbol(s));
            }
        }
        Ok(LatticeFieldModel {
            name: name.into(),
            sites,
            dx,
            density,
        })
    }

    pub fn coordinates(&self) -> Vec<String> {
        (0..self.sites).map(site).collect()
    }

    /// `L = sum_i dx L(phi_i, (phi_{i+1} - phi_{i-1}) / (2 dx), v_phi_i)`.
    pub fn discretize(&self) -> Result<LagrangianModel> {
        let dx = rational_from_f64(self.dx)
            .map(Expr::num)
            .ok_or_else(|| Error::Invalid(format!("lattice spacing {} is not representable", self.dx)))?;
        let n = self.sites;
        let phi = |i: usize| Expr::sym(site(i));
        let terms = (0..n).map(|i| {
            let gradient = (phi((i + 1) % n) - phi((i + n - 1) % n)) / (Expr::int(2) * &dx);
            let map = BTreeMap::from([
                (FIELD.to_string(), phi(i)),
                (GRADIENT.to_string(), gradient),
                (RATE.to_string(), Expr::sym(model::velocity(&site(i)))),
            ]);
            &dx * self.density.substitute(&map)
        });
        LagrangianModel::new(
            self.name.clone(),
            self.coordinates(),
            TIME,
            None,
            simplify(&Expr::sum(terms)),
        )
    }

    /// Frequency of the plane wave with `mode` wavelengths around the
    /// lattice for the free density: `|sin(k dx)| / dx`.
    pub fn free_dispersion(&self, mode: usize) -> f64 {
        let k = 2.0 * std::f64::consts::PI * mode as f64 / (self.sites as f64 * self.dx);
        (k * self.dx).sin().abs() / self.dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub time: f64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
}

impl LatticeState {
    pub fn new(time: f64, phi: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        if phi.len() != pi.len() {
            return Err(Error::Invalid(format!(
                "field has {} sites but momentum has {}",
                phi.len(),
                pi.len()
            )));
        }
        if !time.is_finite() || phi.iter().chain(&pi).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("lattice state must be finite".into()));
        }
        Ok(LatticeState { time, phi, pi })
    }

    /// `phi_i = amplitude cos(2 pi mode i / N)` at rest.
    pub fn standing_wave(sites: usize, mode: usize, amplitude: f64) -> Self {
        let phi = (0..sites)
            .map(|i| amplitude * (2.0 * std::f64::consts::PI * (mode * i) as f64 / sites as f64).cos())
            .collect();
        LatticeState {
            time: 0.0,
            phi,
            pi: vec![0.0; sites],
        }
    }

    pub fn sites(&self) -> usize {
        self.phi.len()
    }

    /// Lattice translation generator `sum_i pi_i (phi_{i+1} - phi_{i-1}) / 2`.
    pub fn spatial_momentum(&self) -> f64 {
        let n = self.sites();
        (0..n)
            .map(|i| self.pi[i] * (self.phi[(i + 1) % n] - self.phi[(i + n - 1) % n]) / 2.0)
            .sum()
    }

    fn binding(&self) -> Binding {
        let mut b = Binding::new();
        for (i, (phi, pi)) in self.phi.iter().zip(&self.pi).enumerate() {
            b.insert(site(i), *phi);
            b.insert(model::momentum(&site(i)), *pi);
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeRun {
    pub states: Vec<LatticeState>,
    pub trajectory: Trajectory,
    /// Canonical Hamiltonian `H_0(phi, pi)`.
    pub hamiltonian: Expr,
}

impl LatticeRun {
    /// Largest `|H_0(s) - H_0(0)|`.
    pub fn energy_drift(&self) -> Result<f64> {
        let start = self.trajectory.rows.first().map(|r| r.as_slice()).unwrap_or(&[]);
        let program = hjfield_expr::Compiled::new(&self.hamiltonian, &self.trajectory.columns)
            .map_err(|e| Error::Check(e.to_string()))?;
        let e0 = program.eval(start).map_err(|e| Error::Numerical(e.to_string()))?;
        let mut worst = 0.0f64;
        for row in &self.trajectory.rows {
            let e = program.eval(row).map_err(|e| Error::Numerical(e.to_string()))?;
            worst = worst.max((e - e0).abs());
        }
        Ok(worst)
    }

    pub fn momentum_drift(&self) -> f64 {
        let p0 = self.states.first().map_or(0.0, LatticeState::spatial_momentum);
        self.states
            .iter()
            .fold(0.0f64, |m, s| m.max((s.spatial_momentum() - p0).abs()))
    }
}

/// Canonical evolution of a discretized (regular) lattice model.
pub fn canonical_field_evolution(
    m: &LagrangianModel,
    state0: &LatticeState,
    horizon: f64,
    step: f64,
    settings: &Settings,
) -> Result<LatticeRun> {
    if state0.sites() != m.n() {
        return Err(Error::Invalid(format!(
            "state has {} sites, model has {} coordinates",
            state0.sites(),
            m.n()
        )));
    }
    let (split, sys) = hj::build_system(m, settings)?;
    if split.deficiency != 0 {
        return Err(Error::SingularBase {
            rank: split.rank,
            n: m.n(),
        });
    }
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::evolution(vec![state0.time], horizon)?;
    let trajectory = hj::integrate(&tds, &state0.binding(), &path, step)?;
    if let Some(why) = &trajectory.failure {
        return Err(Error::Numerical(format!("lattice evolution: {why}")));
    }
    let t_col = trajectory.index(&sys.parameters[0]).expect("time column");
    let phi_cols: Vec<usize> = m
        .coordinates
        .iter()
        .map(|q| trajectory.index(q).expect("phi column"))
        .collect();
    let pi_cols: Vec<usize> = m
        .coordinates
        .iter()
        .map(|q| trajectory.index(&model::momentum(q)).expect("pi column"))
        .collect();
    let states = trajectory
        .rows
        .iter()
        .map(|r| LatticeState {
            time: r[t_col],
            phi: phi_cols.iter().map(|&i| r[i]).collect(),
            pi: pi_cols.iter().map(|&i| r[i]).collect(),
        })
        .collect();
    Ok(LatticeRun {
        states,
        trajectory,
        hamiltonian: sys.hamiltonians[0].clone(),
    })
}

pub fn snapshot_csv(states: &[LatticeState]) -> String {
    let n = states.first().map_or(0, LatticeState::sites);
    let mut out = String::from("time");
    for i in 0..n {
        let _ = write!(out, ",phi_{i}");
    }
    for i in 0..n {
        let _ = write!(out, ",pi_{i}");
    }
    out.push('\n');
    for s in states {
        let _ = write!(out, "{:.16e}", s.time);
        for v in s.phi.iter().chain(&s.pi) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Reparametrize the discretized model and compare both routes, starting
/// from field values and momenta at `t = 0`.
pub fn reparam_field_equivalence(
    f: &LatticeFieldModel,
    state0: &LatticeState,
    horizon: f64,
    step: f64,
    settings: &Settings,
) -> Result<EquivalenceReport> {
    if state0.sites() != f.sites {
        return Err(Error::Invalid(format!(
            "state has {} sites, lattice has {}",
            state0.sites(),
            f.sites
        )));
    }
    let m = f.discretize()?;
    let pair = reparam::parametrize(&m, settings)?;
    let split = model::analyze(&m, settings)?;
    let w = hj::legendre_invert(&m, &split, &settings.zero_test())?;
    let at = state0.binding().with(TIME, 0.0);
    let mut initial = Binding::new();
    for (i, (q, v)) in m.coordinates.iter().zip(&m.velocities).enumerate() {
        initial.insert(q.clone(), state0.phi[i]);
        let rate =
            hjfield_expr::evaluate(&w[i], &at).map_err(|e| Error::Numerical(format!("initial velocity: {e}")))?;
        initial.insert(v.clone(), rate);
    }
    reparam::verify_equivalence(&pair, &initial, horizon, step, settings)
}
