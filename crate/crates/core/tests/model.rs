mod common;

use hjfield::model::{self, LagrangianModel};
use hjfield::ode::{Integrator, Rk4};
use hjfield::{reparam, Error, Settings};
use hjfield_expr::{evaluate, parse, Binding, Compiled, Expr, ZeroTest};
use proptest::prelude::*;

fn single(l: &str) -> LagrangianModel {
    LagrangianModel::new("m", vec!["q".into()], "t", None, parse(l).unwrap()).unwrap()
}

#[test]
fn loads_corpus_files() {
    let m = common::load("oscillator");
    assert_eq!(m.n(), 1);
    assert_eq!(m.velocities, vec!["v_q"]);
    assert_eq!(common::load("free").n(), 1);
    assert_eq!(common::load("coupled").n(), 2);
}

#[test]
fn undeclared_symbol_is_rejected() {
    let text = r#"{"name": "w", "coordinates": ["q"], "time": "t", "lagrangian": "0.5*v_q^2 + w"}"#;
    assert!(matches!(model::load_model(text), Err(Error::UnknownSymbol(s)) if s == "w"));
}

#[test]
fn duplicate_coordinate_is_rejected() {
    let text = r#"{"name": "d", "coordinates": ["q", "q"], "time": "t", "lagrangian": "v_q^2"}"#;
    assert!(matches!(model::load_model(text), Err(Error::Duplicate(_))));
}

#[test]
fn schema_violation_is_rejected() {
    let text = r#"{"name": "d", "coords": ["q"], "time": "t", "lagrangian": "v_q^2"}"#;
    assert!(matches!(model::load_model(text), Err(Error::Schema(_))));
}

#[test]
fn hessians_are_symmetric() {
    let zt = ZeroTest::default();
    for name in [
        "free",
        "oscillator",
        "affine",
        "ln-potential",
        "coupled",
        "forced",
        "singular",
    ] {
        let m = common::load(name);
        assert!(model::hessian(&m).is_symmetric(&zt), "{name}");
        let pair = reparam::parametrize(&m, &Settings::default());
        if let Ok(pair) = pair {
            assert!(model::hessian(&pair.extended).is_symmetric(&zt), "{name} extended");
        }
    }
}

#[test]
fn off_diagonal_hessian() {
    let m = LagrangianModel::new(
        "x",
        vec!["q1".into(), "q2".into()],
        "t",
        None,
        parse("v_q1*v_q2").unwrap(),
    )
    .unwrap();
    let a = model::analyze(&m, &Settings::default()).unwrap();
    assert_eq!(
        a.matrix,
        vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]]
    );
    assert_eq!((a.rank, a.deficiency), (2, 0));
}

/// Central second differences of `L` in the velocities.
fn numeric_hessian(m: &LagrangianModel, at: &Binding) -> Vec<Vec<f64>> {
    let h = 1e-4;
    let l = |shift: &[(usize, f64)]| {
        let mut b = at.clone();
        for &(i, d) in shift {
            let v = &m.velocities[i];
            b.insert(v.clone(), b.get(v).unwrap() + d);
        }
        evaluate(&m.lagrangian, &b).unwrap()
    };
    let n = m.n();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (l(&[(i, h), (j, h)]) - l(&[(i, h), (j, -h)]) - l(&[(i, -h), (j, h)]) + l(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
        }
    }
    out
}

#[test]
fn reparametrized_free_particle_hessian() {
    let doc = common::document("free-particle-reparametrized");
    let a = model::analyze(&doc.model, &Settings::default()).unwrap();
    assert_eq!(doc.model.velocities, vec!["v_q", "v_t"]);
    assert_eq!((a.rank, a.deficiency), (1, 1));
    // by hand: [[1/v_t, -v_q/v_t^2], [-v_q/v_t^2, v_q^2/v_t^3]]
    let (vq, vt) = (0.7, 1.3);
    let hand = [[1.0 / vt, -vq / (vt * vt)], [-vq / (vt * vt), vq * vq / (vt * vt * vt)]];
    let at = Binding::from([("q", 0.4), ("t", 0.9), ("v_q", vq), ("v_t", vt)]);
    let fd = numeric_hessian(&doc.model, &at);
    for i in 0..2 {
        for j in 0..2 {
            let sym = evaluate(&a.matrix[i][j], &at).unwrap();
            assert!((sym - hand[i][j]).abs() < 1e-12, "{i}{j}");
            assert!((fd[i][j] - hand[i][j]).abs() < 1e-5, "{i}{j}: {}", fd[i][j]);
        }
    }
    assert_eq!(a.degenerate, vec![1]);
}

#[test]
fn reparametrization_adds_exactly_one_null_direction() {
    let settings = Settings::default();
    for name in common::REGULAR_ALL {
        let m = common::load(name);
        let base = model::analyze(&m, &settings).unwrap();
        assert_eq!((base.rank, base.deficiency), (m.n(), 0), "{name}");
        let pair = reparam::parametrize(&m, &settings).unwrap();
        let ext = model::analyze(&pair.extended, &settings).unwrap();
        assert_eq!(pair.extended.velocities.len(), m.n() + 1, "{name}");
        assert_eq!((ext.rank, ext.deficiency), (m.n(), 1), "{name}");
        assert_eq!(ext.sample_ranks.len(), 50);
        assert!(ext.sample_ranks.iter().all(|&r| r == m.n()), "{name}");
    }
}

#[test]
fn explicit_forms() {
    let zt = ZeroTest::default();
    let osc = model::explicit_accelerations(&common::load("oscillator"), &zt).unwrap();
    assert!(zt.check(&(&osc[0] + Expr::sym("q"))).is_zero());
    let free = model::explicit_accelerations(&common::load("free"), &zt).unwrap();
    assert!(zt.check(&free[0]).is_zero());
    let el = model::euler_lagrange(&common::load("oscillator"));
    assert!(zt.check(&(&el[0] - parse("a_q + q").unwrap())).is_zero());
}

#[test]
fn singular_sector_has_no_explicit_form() {
    let m = common::load("singular");
    assert!(matches!(
        model::explicit_accelerations(&m, &ZeroTest::default()),
        Err(Error::NotInvertible(_))
    ));
}

/// Acceleration making the discrete action `h L((x - q0)/h, (x + q0)/2) +
/// h L((q2 - x)/h, (q2 + x)/2)` stationary at the middle point of a stencil
/// through `c` with velocity `v`.
fn stationary_acceleration(l: &dyn Fn(f64, f64) -> f64, c: f64, v: f64, h: f64) -> f64 {
    let slope = |a: f64| {
        let q0 = c - v * h + 0.5 * a * h * h;
        let q2 = c + v * h + 0.5 * a * h * h;
        let s = |x: f64| h * l((x - q0) / h, 0.5 * (x + q0)) + h * l((q2 - x) / h, 0.5 * (q2 + x));
        let d = 1e-6;
        (s(c + d) - s(c - d)) / (2.0 * d)
    };
    let (s0, s1) = (slope(0.0), slope(1.0));
    -s0 / (s1 - s0)
}

#[test]
fn log_potential_acceleration_matches_stationary_action() {
    let zt = ZeroTest::default();
    // minus sign on the potential: a = -1/q
    let m = single("0.5*v_q^2 - ln(q)");
    let a = &model::explicit_accelerations(&m, &zt).unwrap()[0];
    let lag = |v: f64, q: f64| 0.5 * v * v - q.ln();
    for (c, v) in [(0.8, 0.3), (1.5, -0.2), (2.0, 1.0)] {
        let oracle = stationary_acceleration(&lag, c, v, 1e-2);
        let got = evaluate(a, &Binding::from([("q", c), ("v_q", v)])).unwrap();
        assert!((got + 1.0 / c).abs() < 1e-12, "{got}");
        assert!((got - oracle).abs() < 1e-4, "q = {c}: {got} vs {oracle}");
    }
    // corpus model has the opposite sign: a = 1/q
    let corpus = common::load("ln-potential");
    let a = &model::explicit_accelerations(&corpus, &zt).unwrap()[0];
    let lag = |v: f64, q: f64| 0.5 * v * v + q.ln();
    let oracle = stationary_acceleration(&lag, 1.2, 0.4, 1e-2);
    let got = evaluate(a, &Binding::from([("q", 1.2), ("v_q", 0.4)])).unwrap();
    assert!((got - 1.0 / 1.2).abs() < 1e-12);
    assert!((got - oracle).abs() < 1e-4);
}

/// RK4 on the explicit Euler-Lagrange form, returning the largest energy
/// change over `[0, horizon]`.
fn energy_drift(m: &LagrangianModel, q0: &[f64], v0: &[f64], horizon: f64, h: f64) -> f64 {
    let zt = ZeroTest::default();
    let acc = model::explicit_accelerations(m, &zt).unwrap();
    let mut slots = vec![m.time.clone()];
    slots.extend(m.coordinates.iter().cloned());
    slots.extend(m.velocities.iter().cloned());
    let programs: Vec<Compiled> = acc.iter().map(|a| Compiled::new(a, &slots).unwrap()).collect();
    let energy = Compiled::new(&model::energy(m), &slots).unwrap();
    let n = m.n();
    let rhs = |t: f64, x: &[f64], out: &mut [f64]| {
        let mut buf = vec![t];
        buf.extend_from_slice(x);
        out[..n].copy_from_slice(&x[n..]);
        for (o, p) in out[n..].iter_mut().zip(&programs) {
            *o = p.eval(&buf).unwrap();
        }
    };
    let mut x: Vec<f64> = q0.iter().chain(v0).copied().collect();
    let e = |t: f64, x: &[f64]| {
        let mut buf = vec![t];
        buf.extend_from_slice(x);
        energy.eval(&buf).unwrap()
    };
    let e0 = e(0.0, &x);
    let steps = (horizon / h).round() as usize;
    let mut worst = 0.0f64;
    for k in 0..steps {
        Rk4.step(&rhs, k as f64 * h, &mut x, h);
        worst = worst.max((e((k + 1) as f64 * h, &x) - e0).abs());
    }
    worst
}

#[test]
fn energy_is_conserved_for_time_independent_models() {
    for name in common::REGULAR {
        let doc = common::document(name);
        let m = &doc.model;
        let q0: Vec<f64> = m
            .coordinates
            .iter()
            .map(|c| doc.initial.get(c).unwrap_or(1.0))
            .collect();
        let v0: Vec<f64> = m.velocities.iter().map(|v| doc.initial.get(v).unwrap_or(0.0)).collect();
        let drift = energy_drift(m, &q0, &v0, 1.0, 1e-3);
        assert!(drift <= 1e-8, "{name}: {drift:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_conservation_for_random_data(
        q in -1.0f64..1.0,
        v in -1.0f64..1.0,
        k in 0.5f64..2.0,
    ) {
        let m = single(&format!("0.5*v_q^2 - 0.5*{k}*q^2 - 0.25*q^4"));
        let drift = energy_drift(&m, &[q], &[v], 1.0, 1e-3);
        prop_assert!(drift <= 1e-8, "drift {:e}", drift);
    }

    #[test]
    fn deficiency_one_after_reparametrization(
        a in 0.5f64..3.0,
        b in -2.0f64..2.0,
        c in -2.0f64..2.0,
    ) {
        let l = format!("0.5*{a}*v_q^2 + {b}*v_q*q + {c}*q^2");
        let m = single(&l);
        let settings = Settings::default();
        let pair = reparam::parametrize(&m, &settings).unwrap();
        let ext = model::analyze(&pair.extended, &settings).unwrap();
        prop_assert_eq!((ext.rank, ext.deficiency), (1, 1));
        prop_assert!(reparam::homogeneity_check(&pair.extended, &settings.zero_test()).is_zero());
    }
}
