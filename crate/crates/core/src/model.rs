//! Lagrangian models, the velocity Hessian and Euler-Lagrange equations.

use std::collections::{BTreeMap, BTreeSet};

use hjfield_expr::{differentiate, evaluate, parse, simplify, Binding, Expr, ZeroTest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::LatticeFieldModel;
use crate::linalg;
use crate::{Error, Result, Settings};

pub fn velocity(coord: &str) -> String {
    format!("v_{coord}")
}

pub fn acceleration(coord: &str) -> String {
    format!("a_{coord}")
}

pub fn momentum(coord: &str) -> String {
    format!("p_{coord}")
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default)]
    pub coordinates: Vec<String>,
    pub time: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    /// Initial values by symbol name (coordinates and velocities).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(rename = "N")]
    pub sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    pub density: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianModel {
    pub name: String,
    pub coordinates: Vec<String>,
    pub velocities: Vec<String>,
    pub time: String,
    /// Evolution parameter when it differs from `time`, as for
    /// reparametrized models where `time` is itself a coordinate.
    pub parameter: Option<String>,
    pub lagrangian: Expr,
}

impl LagrangianModel {
    pub fn new(
        name: impl Into<String>,
        coordinates: Vec<String>,
        time: impl Into<String>,
        parameter: Option<String>,
        lagrangian: Expr,
    ) -> Result<Self> {
        let time = time.into();
        let velocities = coordinates.iter().map(|c| velocity(c)).collect();
        let m = LagrangianModel {
            name: name.into(),
            coordinates,
            velocities,
            time,
            parameter,
            lagrangian,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.coordinates {
            if !is_identifier(c) {
                return Err(Error::InvalidName(c.clone()));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::Duplicate(c.clone()));
            }
        }
        let mut derived = BTreeSet::new();
        for c in &self.coordinates {
            for d in [velocity(c), acceleration(c), momentum(c)] {
                if seen.contains(d.as_str()) || !derived.insert(d.clone()) {
                    return Err(Error::Duplicate(d));
                }
            }
        }
        let mut params = vec![&self.time];
        params.extend(self.parameter.iter());
        for p in params {
            if !is_identifier(p) {
                return Err(Error::InvalidName(p.clone()));
            }
            if derived.contains(p) {
                return Err(Error::Duplicate(p.clone()));
            }
        }
        match &self.parameter {
            Some(tau) => {
                if seen.contains(tau.as_str()) || *tau == self.time {
                    return Err(Error::Duplicate(tau.clone()));
                }
            }
            None => {
                if seen.contains(self.time.as_str()) {
                    return Err(Error::Duplicate(self.time.clone()));
                }
            }
        }
        let allowed: BTreeSet<&str> = self
            .coordinates
            .iter()
            .chain(&self.velocities)
            .chain(std::iter::once(&self.time))
            .chain(self.parameter.iter())
            .map(String::as_str)
            .collect();
        for s in self.lagrangian.symbols() {
            if !allowed.contains(s.as_str()) {
                return Err(Error::UnknownSymbol(s));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    /// Symbol the equations of motion evolve in.
    pub fn evolution(&self) -> &str {
        self.parameter.as_deref().unwrap_or(&self.time)
    }

    pub fn accelerations(&self) -> Vec<String> {
        self.coordinates.iter().map(|c| acceleration(c)).collect()
    }

    pub fn momenta(&self) -> Vec<String> {
        self.coordinates.iter().map(|c| momentum(c)).collect()
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            name: self.name.clone(),
            coordinates: self.coordinates.clone(),
            time: self.time.clone(),
            parameter: self.parameter.clone(),
            lagrangian: Some(self.lagrangian.to_string()),
            lattice: None,
            initial: BTreeMap::new(),
        }
    }
}

/// A loaded model file: the finite-dimensional model (discretized when the
/// file describes a lattice field) and any initial data it carries.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub model: LagrangianModel,
    pub lattice: Option<LatticeFieldModel>,
    pub initial: Binding,
}

pub fn load_document(text: &str) -> Result<ModelDocument> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    from_file(&file)
}

pub fn from_file(file: &ModelFile) -> Result<ModelDocument> {
    let initial: Binding = file.initial.iter().map(|(k, v)| (k.clone(), *v)).collect();
    match (&file.lagrangian, &file.lattice) {
        (Some(text), None) => {
            let lagrangian = parse(text).map_err(|source| Error::Parse {
                context: "lagrangian".into(),
                source,
            })?;
            let model = LagrangianModel::new(
                file.name.clone(),
                file.coordinates.clone(),
                file.time.clone(),
                file.parameter.clone(),
                lagrangian,
            )?;
            Ok(ModelDocument {
                model,
                lattice: None,
                initial,
            })
        }
        (None, Some(spec)) => {
            if !file.coordinates.is_empty() || file.parameter.is_some() {
                return Err(Error::Schema("lattice models derive their coordinates".into()));
            }
            let density = parse(&spec.density).map_err(|source| Error::Parse {
                context: "density".into(),
                source,
            })?;
            let dx = spec.dx.unwrap_or(1.0 / spec.sites.max(1) as f64);
            let field = LatticeFieldModel::new(file.name.clone(), spec.sites, dx, density)?;
            let model = field.discretize()?;
            Ok(ModelDocument {
                model,
                lattice: Some(field),
                initial,
            })
        }
        (Some(_), Some(_)) => Err(Error::Schema("give either `lagrangian` or `lattice`, not both".into())),
        (None, None) => Err(Error::Schema("missing field `lagrangian`".into())),
    }
}

pub fn load_model(text: &str) -> Result<LagrangianModel> {
    Ok(load_document(text)?.model)
}

/// Velocity Hessian before rank analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    pub velocities: Vec<String>,
    pub matrix: Vec<Vec<Expr>>,
}

impl Hessian {
    pub fn is_symmetric(&self, zt: &ZeroTest) -> bool {
        let n = self.matrix.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                self.matrix[i][j] == self.matrix[j][i] || zt.check(&(&self.matrix[i][j] - &self.matrix[j][i])).is_zero()
            })
        })
    }
}

pub fn hessian(m: &LagrangianModel) -> Hessian {
    let first: Vec<Expr> = m.velocities.iter().map(|v| differentiate(&m.lagrangian, v)).collect();
    let matrix = first
        .iter()
        .map(|p| m.velocities.iter().map(|v| differentiate(p, v)).collect())
        .collect();
    Hessian {
        velocities: m.velocities.clone(),
        matrix,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianAnalysis {
    pub velocities: Vec<String>,
    pub matrix: Vec<Vec<Expr>>,
    pub rank: usize,
    pub deficiency: usize,
    pub regular: Vec<usize>,
    pub degenerate: Vec<usize>,
    pub sample_ranks: Vec<usize>,
}

const PIVOT_TOL: f64 = 1e-9;
const SAMPLE_RANGE: (f64, f64) = (0.5, 2.0);

/// Numeric rank at `samples` random points and the regular/degenerate split
/// given by the pivot columns at the first point.
pub fn rank_and_split(h: Hessian, samples: usize, seed: u64) -> Result<HessianAnalysis> {
    if samples < 10 {
        return Err(Error::Invalid(format!(
            "rank analysis needs at least 10 samples, got {samples}"
        )));
    }
    let n = h.velocities.len();
    let symbols: BTreeSet<String> = h.matrix.iter().flatten().flat_map(|e| e.symbols()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_ranks = Vec::with_capacity(samples);
    let mut first_pivots = None;
    for _ in 0..samples {
        let numeric = sample_matrix(&h.matrix, &symbols, &mut rng)?;
        let pivots = linalg::pivot_columns(&numeric, PIVOT_TOL);
        sample_ranks.push(pivots.len());
        first_pivots.get_or_insert(pivots);
    }
    let rank = sample_ranks[0];
    if sample_ranks.iter().any(|&r| r != rank) {
        let mut ranks: Vec<usize> = sample_ranks.clone();
        ranks.sort_unstable();
        ranks.dedup();
        return Err(Error::StratifiedHessian { ranks });
    }
    let regular = first_pivots.unwrap_or_default();
    let degenerate = (0..n).filter(|i| !regular.contains(i)).collect();
    Ok(HessianAnalysis {
        velocities: h.velocities,
        matrix: h.matrix,
        rank,
        deficiency: n - rank,
        regular,
        degenerate,
        sample_ranks,
    })
}

fn sample_matrix(matrix: &[Vec<Expr>], symbols: &BTreeSet<String>, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    'attempt: for _ in 0..64 {
        let b: Binding = symbols
            .iter()
            .map(|s| (s.clone(), rng.gen_range(SAMPLE_RANGE.0..=SAMPLE_RANGE.1)))
            .collect();
        let mut out = Vec::with_capacity(matrix.len());
        for row in matrix {
            let mut r = Vec::with_capacity(row.len());
            for e in row {
                match evaluate(e, &b) {
                    Ok(v) => r.push(v),
                    Err(_) => continue 'attempt,
                }
            }
            out.push(r);
        }
        return Ok(out);
    }
    Err(Error::Numerical("no admissible sample point for the Hessian".into()))
}

pub fn analyze(m: &LagrangianModel, settings: &Settings) -> Result<HessianAnalysis> {
    rank_and_split(hessian(m), settings.samples, settings.seed)
}

/// Euler-Lagrange residuals `d/dt(dL/dv_i) - dL/dq_i`, expanded by the chain
/// rule in terms of coordinates, velocities and accelerations `a_<coord>`.
pub fn euler_lagrange(m: &LagrangianModel) -> Vec<Expr> {
    let (hess, rest) = el_parts(m);
    let acc = m.accelerations();
    hess.iter()
        .zip(rest)
        .map(|(row, r)| {
            let terms = row
                .iter()
                .zip(&acc)
                .filter(|(h, _)| !h.is_zero())
                .map(|(h, a)| h * Expr::sym(a));
            simplify(&Expr::sum(terms.chain(std::iter::once(r))))
        })
        .collect()
}

/// Velocity Hessian and the acceleration-free part of each residual.
fn el_parts(m: &LagrangianModel) -> (Vec<Vec<Expr>>, Vec<Expr>) {
    let evo = m.evolution();
    let mut hess = Vec::with_capacity(m.n());
    let mut rest = Vec::with_capacity(m.n());
    for (qi, vi) in m.coordinates.iter().zip(&m.velocities) {
        let p = differentiate(&m.lagrangian, vi);
        hess.push(m.velocities.iter().map(|vj| differentiate(&p, vj)).collect());
        let mut terms: Vec<Expr> = m
            .coordinates
            .iter()
            .zip(&m.velocities)
            .map(|(qj, vj)| differentiate(&p, qj) * Expr::sym(vj))
            .collect();
        terms.push(differentiate(&p, evo));
        terms.push(-differentiate(&m.lagrangian, qi));
        rest.push(simplify(&Expr::sum(terms)));
    }
    (hess, rest)
}

/// Accelerations `a_i = f_i(q, v, t)` solving the Euler-Lagrange equations.
pub fn explicit_accelerations(m: &LagrangianModel, zt: &ZeroTest) -> Result<Vec<Expr>> {
    let (hess, rest) = el_parts(m);
    let rhs: Vec<Expr> = rest.iter().map(|r| simplify(&-r)).collect();
    linalg::solve(&hess, &rhs, zt).map_err(|k| Error::NotInvertible(format!("acceleration of `{}`", m.coordinates[k])))
}

/// `sum_i v_i dL/dv_i - L`.
pub fn energy(m: &LagrangianModel) -> Expr {
    let terms = m
        .velocities
        .iter()
        .map(|v| Expr::sym(v) * differentiate(&m.lagrangian, v));
    simplify(&(Expr::sum(terms) - &m.lagrangian))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(coords: &[&str], l: &str) -> LagrangianModel {
        LagrangianModel::new(
            "m",
            coords.iter().map(|s| s.to_string()).collect(),
            "t",
            None,
            parse(l).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn loads_oscillator_file() {
        let m =
            load_model(r#"{"name":"osc","coordinates":["q"],"time":"t","lagrangian":"0.5*v_q^2 - 0.5*q^2"}"#).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.velocities, vec!["v_q"]);
    }

    #[test]
    fn rejects_bad_files() {
        let undeclared = r#"{"name":"x","coordinates":["q"],"time":"t","lagrangian":"w*q"}"#;
        assert!(matches!(load_model(undeclared), Err(Error::UnknownSymbol(s)) if s == "w"));
        let dup = r#"{"name":"x","coordinates":["q","q"],"time":"t","lagrangian":"q"}"#;
        assert!(matches!(load_model(dup), Err(Error::Duplicate(_))));
        let extra = r#"{"name":"x","coordinates":["q"],"time":"t","lagrangian":"q","mass":1}"#;
        assert!(matches!(load_model(extra), Err(Error::Schema(_))));
        let clash = r#"{"name":"x","coordinates":["q","v_q"],"time":"t","lagrangian":"q"}"#;
        assert!(matches!(load_model(clash), Err(Error::Duplicate(_))));
    }

    #[test]
    fn hessian_of_mixed_velocities() {
        let h = hessian(&model(&["q1", "q2"], "v_q1*v_q2"));
        assert_eq!(
            h.matrix,
            vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]]
        );
        let a = rank_and_split(h, 10, 1).unwrap();
        assert_eq!((a.rank, a.deficiency), (2, 0));
    }

    #[test]
    fn zero_column_is_degenerate() {
        let a = analyze(&model(&["q1", "q2"], "0.5*v_q1^2 + q2*q1"), &Settings::default()).unwrap();
        assert_eq!((a.rank, a.regular.clone(), a.degenerate.clone()), (1, vec![0], vec![1]));
    }

    #[test]
    fn stratified_hessian_is_rejected() {
        // rank 1 where q > 1, rank 0 where q < 1
        let m = model(&["q"], "0.5*v_q^2*(q - 1 + (q^2 - 2*q + 1)^0.5)");
        let err = analyze(&m, &Settings::default()).unwrap_err();
        assert!(matches!(err, Error::StratifiedHessian { .. }), "{err}");
    }

    #[test]
    fn oscillator_equations() {
        let m = model(&["q"], "0.5*v_q^2 - 0.5*q^2");
        assert_eq!(euler_lagrange(&m), vec![simplify(&parse("a_q + q").unwrap())]);
        let a = explicit_accelerations(&m, &ZeroTest::default()).unwrap();
        assert_eq!(a, vec![simplify(&parse("-q").unwrap())]);
        assert_eq!(energy(&m), simplify(&parse("0.5*v_q^2 + 0.5*q^2").unwrap()));
    }

    #[test]
    fn degenerate_sector_has_no_explicit_form() {
        let m = model(&["q1", "q2"], "0.5*v_q1^2 + q2*q1");
        assert!(matches!(
            explicit_accelerations(&m, &ZeroTest::default()),
            Err(Error::NotInvertible(_))
        ));
    }
}
