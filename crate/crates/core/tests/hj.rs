mod common;

use std::collections::BTreeMap;

use hjfield::hj::{self, Closure, ParameterPath};
use hjfield::model::{self, LagrangianModel};
use hjfield::{reparam, Error, Settings};
use hjfield_expr::{differentiate, parse, simplify, Binding, Expr, ZeroTest};
use proptest::prelude::*;

fn s(text: &str) -> Expr {
    simplify(&parse(text).unwrap())
}

fn zero(e: &Expr) -> bool {
    ZeroTest::default().check(e).is_zero()
}

#[test]
fn regular_systems_are_hamiltons_equations() {
    let settings = Settings::default();
    for name in common::REGULAR_ALL {
        let m = common::load(name);
        let (_, sys) = hj::build_system(&m, &settings).unwrap();
        let tds = hj::total_differential_system(&sys);
        // q' = w and p' = dL/dq at v = w, straight from the Lagrangian
        let at_w: BTreeMap<String, Expr> = m
            .velocities
            .iter()
            .cloned()
            .zip(sys.velocities.iter().cloned())
            .collect();
        for (i, q) in m.coordinates.iter().enumerate() {
            let dq = tds.coefficient(q, "t").unwrap();
            assert!(zero(&(dq - &sys.velocities[i])), "{name}: d{q}");
            let force = differentiate(&m.lagrangian, q).substitute(&at_w);
            let dp = tds.coefficient(&model::momentum(q), "t").unwrap();
            assert!(zero(&(dp - force)), "{name}: dp_{q}");
        }
        // definition consistency: H_0 at p = dL/dv, v = w ... equals the energy
        let at_p: BTreeMap<String, Expr> = m
            .coordinates
            .iter()
            .zip(&m.velocities)
            .map(|(q, v)| (model::momentum(q), differentiate(&m.lagrangian, v)))
            .collect();
        assert!(
            zero(&(sys.hamiltonians[0].substitute(&at_p) - model::energy(&m))),
            "{name}"
        );
    }
}

#[test]
fn coefficients_are_derivatives_of_the_generators() {
    let settings = Settings::default();
    let pair = reparam::parametrize(&common::load("coupled"), &settings).unwrap();
    let (_, sys) = hj::build_system(&pair.extended, &settings).unwrap();
    let tds = hj::total_differential_system(&sys);
    for (a, t) in sys.parameters.iter().enumerate() {
        for p in &sys.momenta {
            let q = p.trim_start_matches("p_");
            assert_eq!(tds.coefficient(q, t).unwrap(), &differentiate(&sys.primed[a], p));
        }
    }
}

#[test]
fn reparametrized_hamiltonians() {
    let settings = Settings::default();
    for (name, h) in [
        ("free", "p_q^2/2"),
        ("oscillator", "p_q^2/2 + q^2/2"),
        ("affine", "(p_q - 3)^2/2"),
    ] {
        let pair = reparam::parametrize(&common::load(name), &settings).unwrap();
        let (_, sys) = hj::build_system(&pair.extended, &settings).unwrap();
        assert_eq!(sys.parameters, vec!["tau", "t"]);
        assert!(zero(&sys.hamiltonians[0]), "{name}");
        assert!(zero(&(&sys.hamiltonians[1] - s(h))), "{name}");
        assert!(zero(&(&sys.primed[1] - s(&format!("p_t + {h}")))), "{name}");
    }
}

#[test]
fn quartic_is_non_affine() {
    let err = hj::build_system(&common::load("quartic"), &Settings::default()).unwrap_err();
    assert!(matches!(&err, Error::NonAffine { expression } if expression.contains("v_q")));
}

#[test]
fn reparametrized_models_close_at_round_zero() {
    let settings = Settings::default();
    for name in common::REGULAR_ALL {
        let pair = reparam::parametrize(&common::load(name), &settings).unwrap();
        let (_, sys) = hj::build_system(&pair.extended, &settings).unwrap();
        let report = hj::integrability_report(&sys, &settings);
        assert_eq!(report.closure, Closure::Closed, "{name}");
        assert_eq!(report.round, 0, "{name}");
        assert!(report.constraints.is_empty());
    }
}

#[test]
fn singular_model_emits_configuration_constraint() {
    let settings = Settings::default();
    let m = common::load("singular");
    let (split, sys) = hj::build_system(&m, &settings).unwrap();
    assert_eq!(split.degenerate, vec![1]);
    // by hand: H_0 = p_q1^2/2 - q1 q2, H_q2 = 0, so dp_q2 = -dH_0/dq2 dt = q1 dt
    // and the generator p_q2 stays zero only on q1 = 0
    let h0 = s("p_q1^2/2 - q1*q2");
    assert!(zero(&(&sys.hamiltonians[0] - &h0)));
    assert!(zero(&sys.hamiltonians[1]));
    let oracle = simplify(&-differentiate(&h0, "q2"));
    let oracle = hj::normalize_constraint(&oracle);
    let report = hj::integrability_report(&sys, &settings);
    assert_eq!(report.closure, Closure::ReducedConfiguration);
    assert_eq!(report.constraints.len(), 1);
    let c = &report.constraints[0];
    assert_eq!(c.round, 1);
    // the same condition shows up along dq2 for H'_t and along dt for H'_q2
    let failing: Vec<(&str, &str)> = report
        .checks
        .iter()
        .filter(|k| !k.verdict.is_zero())
        .map(|k| (k.generator.as_str(), k.parameter.as_str()))
        .collect();
    assert_eq!(failing, vec![("H'_t", "q2"), ("H'_q2", "t")]);
    assert_eq!(c.expression, oracle);
    assert_eq!(c.expression, Expr::sym("q1"));
}

#[test]
fn iteration_cap_leaves_the_loop_open() {
    // the second generator p_x - y produces a constant, which is inconsistent
    let m = LagrangianModel::new(
        "c",
        vec!["x".into(), "y".into()],
        "t",
        None,
        parse("0.5*v_x^2 + y*v_x + x*y").unwrap(),
    )
    .unwrap();
    let settings = Settings::default();
    let (_, sys) = hj::build_system(&m, &settings).unwrap();
    let capped = Settings {
        max_iter: 1,
        ..settings.clone()
    };
    let report = hj::integrability_report(&sys, &capped);
    assert!(!report.is_closed());
    assert!(!report.constraints.is_empty());
}

fn reparametrized(name: &str) -> (reparam::ReparamPair, hj::HJSystem) {
    let settings = Settings::default();
    let pair = reparam::parametrize(&common::load(name), &settings).unwrap();
    let (_, sys) = hj::build_system(&pair.extended, &settings).unwrap();
    (pair, sys)
}

#[test]
fn oscillator_quarter_period() {
    let (_, sys) = reparametrized("oscillator");
    let tds = hj::total_differential_system(&sys);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let path = ParameterPath::straight(vec![0.0, 0.0], &[1.0, 1.0], half_pi).unwrap();
    let tr = hj::integrate(&tds, &Binding::from([("q", 1.0), ("p_q", 0.0)]), &path, 1e-3).unwrap();
    assert!(tr.last("q").unwrap().abs() <= 1e-6);
    assert!((tr.last("t").unwrap() - half_pi).abs() < 1e-12);
    assert!(hj::max_along(&tr, &sys.primed[1]).unwrap() <= 1e-10);
}

#[test]
fn free_particle_action() {
    let (_, sys) = hj::build_system(&common::load("free"), &Settings::default()).unwrap();
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::evolution(vec![0.0], 1.0).unwrap();
    let tr = hj::integrate(&tds, &Binding::from([("q", 0.0), ("p_q", 1.0)]), &path, 1e-3).unwrap();
    assert!((tr.last("q").unwrap() - 1.0).abs() <= 1e-8);
    assert!((tr.last(hj::ACTION).unwrap() - 0.5).abs() <= 1e-8);
    assert_eq!(tr.rows.len(), 1001);
}

#[test]
fn zero_length_path_returns_initial_data() {
    let (_, sys) = reparametrized("oscillator");
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::straight(vec![0.0, 0.0], &[1.0, 1.0], 0.0).unwrap();
    let tr = hj::integrate(&tds, &Binding::from([("q", 0.3), ("p_q", 0.4)]), &path, 1e-3).unwrap();
    assert_eq!(tr.rows.len(), 1);
    assert_eq!(tr.column("q").unwrap(), vec![0.3]);
    assert_eq!(tr.column("p_q").unwrap(), vec![0.4]);
    assert_eq!(tr.column("p_t").unwrap(), vec![-(0.3f64 * 0.3 + 0.4 * 0.4) / 2.0]);
}

#[test]
fn csv_header_lists_parameters_then_variables() {
    let (_, sys) = reparametrized("coupled");
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::straight(vec![0.0, 0.0], &[1.0, 1.0], 0.01).unwrap();
    let init = Binding::from([("x", 1.0), ("y", 0.0), ("p_x", 0.0), ("p_y", 0.0)]);
    let tr = hj::integrate(&tds, &init, &path, 1e-3).unwrap();
    let csv = tr.to_csv();
    assert_eq!(csv.lines().next().unwrap(), "s,tau,t,x,y,p_x,p_y,p_tau,p_t,z");
    assert_eq!(csv.lines().count(), 12);
}

/// q, p and z sampled along `tau = rate * s, t = s`.
fn along(name: &str, rate: f64, init: &Binding, horizon: f64) -> Vec<Vec<f64>> {
    let (pair, sys) = reparametrized(name);
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::straight(vec![0.0, 0.0], &[rate, 1.0], horizon).unwrap();
    let tr = hj::integrate(&tds, init, &path, 1e-3).unwrap();
    let mut cols: Vec<String> = pair.base.coordinates.clone();
    cols.extend(pair.base.momenta());
    cols.push("t".into());
    cols.push(hj::ACTION.into());
    let idx: Vec<usize> = cols.iter().map(|c| tr.index(c).unwrap()).collect();
    tr.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect()
}

#[test]
fn motion_does_not_depend_on_the_tau_path() {
    for (name, init) in [
        ("oscillator", Binding::from([("q", 1.0), ("p_q", 0.0)])),
        ("forced", Binding::from([("q", 0.2), ("p_q", -0.3)])),
        ("ln-potential", Binding::from([("q", 1.0), ("p_q", 0.5)])),
    ] {
        let a = along(name, 1.0, &init, 1.0);
        let b = along(name, 2.0, &init, 1.0);
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-12, "{name}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn overflow_truncates_the_trajectory() {
    let m = LagrangianModel::new("blow", vec!["q".into()], "t", None, parse("0.5*v_q^2 + q^4").unwrap()).unwrap();
    let (_, sys) = hj::build_system(&m, &Settings::default()).unwrap();
    let tds = hj::total_differential_system(&sys);
    let path = ParameterPath::evolution(vec![0.0], 10.0).unwrap();
    let tr = hj::integrate(&tds, &Binding::from([("q", 10.0), ("p_q", 0.0)]), &path, 1e-2).unwrap();
    assert!(tr.failed());
    assert!(tr.rows.len() < 1000);
    assert!(tr.rows.iter().flatten().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tau_path_invariance_for_random_data(q in -1.0f64..1.0, p in -1.0f64..1.0, rate in 0.25f64..3.0) {
        let init = Binding::from([("q", q), ("p_q", p)]);
        let a = along("oscillator", 1.0, &init, 0.5);
        let b = along("oscillator", rate, &init, 0.5);
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constraint_stays_on_shell(q in -1.0f64..1.0, p in -1.0f64..1.0) {
        let (_, sys) = reparametrized("forced");
        let tds = hj::total_differential_system(&sys);
        let path = ParameterPath::straight(vec![0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        let tr = hj::integrate(&tds, &Binding::from([("q", q), ("p_q", p)]), &path, 1e-3).unwrap();
        prop_assert!(hj::max_along(&tr, &sys.primed[1]).unwrap() <= 1e-10);
        prop_assert!(hj::max_along(&tr, &sys.primed[0]).unwrap() <= 1e-10);
    }
}
