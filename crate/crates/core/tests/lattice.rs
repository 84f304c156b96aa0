mod common;

use std::f64::consts::PI;

use hjfield::lattice::{self, LatticeFieldModel, LatticeState};
use hjfield::{hj, model, reparam, Error, Settings};
use hjfield_expr::{evaluate, parse, Binding, ZeroTest};
use proptest::prelude::*;

fn free(sites: usize) -> LatticeFieldModel {
    LatticeFieldModel::new(
        "free",
        sites,
        1.0 / sites as f64,
        parse("0.5*dphi_t^2 - 0.5*dphi_x^2").unwrap(),
    )
    .unwrap()
}

fn phi4(sites: usize) -> LatticeFieldModel {
    LatticeFieldModel::new(
        "phi4",
        sites,
        1.0 / sites as f64,
        parse("0.5*dphi_t^2 - 0.5*dphi_x^2 - 0.25*phi^4").unwrap(),
    )
    .unwrap()
}

#[test]
fn corpus_lattices_load() {
    let doc = common::document("free-lattice");
    let f = doc.lattice.unwrap();
    assert_eq!((f.sites, f.dx), (32, 1.0 / 32.0));
    assert_eq!(doc.model.n(), 32);
    let doc = common::document("phi4-lattice");
    assert_eq!(doc.model.n(), 8);
}

#[test]
fn three_sites_are_rejected() {
    let text = r#"{"name": "x", "time": "t", "lattice": {"N": 3, "density": "0.5*dphi_t^2"}}"#;
    assert!(matches!(model::load_document(text), Err(Error::Invalid(_))));
}

/// Plane wave `phi_i = cos(k x_i)` plugged into the discrete equations:
/// the accelerations must be `-w^2 phi_i` with `w = |sin(k dx)| / dx`.
#[test]
fn plane_wave_dispersion() {
    let zt = ZeroTest::default();
    for (sites, mode) in [(32, 1), (32, 3), (16, 5)] {
        let f = free(sites);
        let m = f.discretize().unwrap();
        let acc = model::explicit_accelerations(&m, &zt).unwrap();
        let k = 2.0 * PI * mode as f64 / (sites as f64 * f.dx);
        let w = (k * f.dx).sin().abs() / f.dx;
        assert!((f.free_dispersion(mode) - w).abs() < 1e-12);
        let mut b = Binding::new();
        for i in 0..sites {
            b.insert(lattice::site(i), (k * i as f64 * f.dx).cos());
        }
        for (i, a) in acc.iter().enumerate() {
            let phi = b.get(&lattice::site(i)).unwrap();
            assert!((evaluate(a, &b).unwrap() + w * w * phi).abs() < 1e-9, "site {i}");
        }
        // the nearest-neighbour formula differs for this discretization
        let neighbour = 2.0 / f.dx * (k * f.dx / 2.0).sin().abs();
        assert!((neighbour - w).abs() > 1e-3);
    }
}

#[test]
fn standing_wave_over_one_period() {
    let f = free(32);
    let m = f.discretize().unwrap();
    let w = f.free_dispersion(1);
    let period = 2.0 * PI / w;
    let s0 = LatticeState::standing_wave(32, 1, 1.0);
    let run = lattice::canonical_field_evolution(&m, &s0, period, 1e-3, &Settings::default()).unwrap();
    let mut worst = 0.0f64;
    for s in &run.states {
        for (i, phi) in s.phi.iter().enumerate() {
            let exact = (2.0 * PI * i as f64 / 32.0).cos() * (w * s.time).cos();
            worst = worst.max((phi - exact).abs());
        }
    }
    assert!(worst <= 1e-5, "{worst:e}");
    assert!((run.states.last().unwrap().time - period).abs() < 1e-12);
}

/// Travelling wave, so the translation generator is nonzero.
fn travelling(f: &LatticeFieldModel, amplitude: f64) -> LatticeState {
    let n = f.sites;
    let phase = |i: usize| 2.0 * PI * i as f64 / n as f64;
    let phi = (0..n).map(|i| amplitude * phase(i).cos()).collect();
    let pi = (0..n).map(|i| amplitude * f.dx * phase(i).sin()).collect();
    LatticeState::new(0.0, phi, pi).unwrap()
}

#[test]
fn energy_is_conserved() {
    let settings = Settings::default();
    for f in [free(32), phi4(8)] {
        let m = f.discretize().unwrap();
        let run = lattice::canonical_field_evolution(&m, &travelling(&f, 0.5), 1.0, 1e-3, &settings).unwrap();
        let e = run.energy_drift().unwrap();
        assert!(e <= 1e-7, "{}: {e:e}", f.name);
    }
}

#[test]
fn momentum_is_conserved_for_quadratic_densities() {
    let settings = Settings::default();
    let massive = LatticeFieldModel::new(
        "massive",
        16,
        1.0 / 16.0,
        parse("0.5*dphi_t^2 - 0.5*dphi_x^2 - 2*phi^2").unwrap(),
    )
    .unwrap();
    for f in [free(32), massive] {
        let m = f.discretize().unwrap();
        let s0 = travelling(&f, 0.5);
        assert!(s0.spatial_momentum().abs() > 1e-3);
        let run = lattice::canonical_field_evolution(&m, &s0, 1.0, 1e-3, &settings).unwrap();
        let p = run.momentum_drift();
        assert!(p <= 1e-7, "{}: {p:e}", f.name);
    }
}

/// The lattice keeps only discrete shifts, so an on-site quartic term
/// exchanges momentum with the field at a rate independent of the step.
#[test]
fn quartic_potential_exchanges_lattice_momentum() {
    let settings = Settings::default();
    let f = phi4(8);
    let m = f.discretize().unwrap();
    let drift = |h: f64| {
        lattice::canonical_field_evolution(&m, &travelling(&f, 0.5), 1.0, h, &settings)
            .unwrap()
            .momentum_drift()
    };
    let (coarse, fine) = (drift(1e-2), drift(1e-3));
    assert!(fine > 1e-7);
    assert!((coarse - fine).abs() < 1e-2 * fine);
}

#[test]
fn zero_data_gives_zero_deviation() {
    let f = free(8);
    let s0 = LatticeState::new(0.0, vec![0.0; 8], vec![0.0; 8]).unwrap();
    let r = lattice::reparam_field_equivalence(&f, &s0, 0.5, 1e-3, &Settings::default()).unwrap();
    assert_eq!(r.max_dev(), 0.0);
}

#[test]
fn decoupled_sites_evolve_independently() {
    let f = LatticeFieldModel::new("site", 4, 0.25, parse("0.5*dphi_t^2 - 0.5*phi^2").unwrap()).unwrap();
    let m = f.discretize().unwrap();
    let phi = vec![1.0, -0.5, 0.25, 0.0];
    let s0 = LatticeState::new(0.0, phi.clone(), vec![0.0; 4]).unwrap();
    let run = lattice::canonical_field_evolution(&m, &s0, 1.0, 1e-3, &Settings::default()).unwrap();
    for s in &run.states {
        for (got, start) in s.phi.iter().zip(&phi) {
            assert!((got - start * s.time.cos()).abs() <= 1e-9);
        }
    }
}

#[test]
fn free_field_equivalence() {
    let settings = Settings::default();
    let started = std::time::Instant::now();
    let f = free(32);
    let r =
        lattice::reparam_field_equivalence(&f, &LatticeState::standing_wave(32, 1, 1.0), 1.0, 1e-3, &settings).unwrap();
    assert!(r.max_dev() <= 1e-6, "{:e}", r.max_dev());
    assert!(r.pt_drift <= 1e-9, "{:e}", r.pt_drift);
    assert!(r.hpt_max <= 1e-9, "{:e}", r.hpt_max);
    let g = phi4(8);
    let s0 = LatticeState::new(
        0.0,
        (0..8).map(|i| (2.0 * PI * i as f64 / 8.0).cos()).collect(),
        (0..8).map(|i| 0.1 * (2.0 * PI * i as f64 / 8.0).sin()).collect(),
    )
    .unwrap();
    let r = lattice::reparam_field_equivalence(&g, &s0, 0.5, 1e-3, &settings).unwrap();
    assert!(r.max_dev() <= 1e-6, "{:e}", r.max_dev());
    assert!(r.pt_drift <= 1e-9, "{:e}", r.pt_drift);
    assert!(started.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn reparametrized_lattice_closes() {
    let settings = Settings::default();
    let m = phi4(8).discretize().unwrap();
    let pair = reparam::parametrize(&m, &settings).unwrap();
    let ext = reparam::build_extended_hj(&pair, &settings).unwrap();
    assert_eq!(ext.split.deficiency, 1);
    assert!(hj::integrability_report(&ext.system, &settings).is_closed());
}

#[test]
fn snapshot_rows() {
    let m = free(4).discretize().unwrap();
    let run = lattice::canonical_field_evolution(
        &m,
        &LatticeState::standing_wave(4, 1, 1.0),
        0.01,
        1e-3,
        &Settings::default(),
    )
    .unwrap();
    let csv = lattice::snapshot_csv(&run.states);
    assert_eq!(csv.lines().count(), 12);
    assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_lattice_data_conserves_energy(seed in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let f = phi4(8);
        let m = f.discretize().unwrap();
        let s0 = LatticeState::new(0.0, seed[..8].to_vec(), seed[8..].to_vec()).unwrap();
        let run = lattice::canonical_field_evolution(&m, &s0, 0.5, 1e-3, &Settings::default()).unwrap();
        prop_assert!(run.energy_drift().unwrap() <= 1e-7);
    }

    #[test]
    fn random_quadratic_lattices_conserve_momentum(
        seed in proptest::collection::vec(-1.0f64..1.0, 16),
        mass in 0.0f64..4.0,
    ) {
        let density = parse(&format!("0.5*dphi_t^2 - 0.5*dphi_x^2 - 0.5*{mass}*phi^2")).unwrap();
        let f = LatticeFieldModel::new("q", 8, 0.125, density).unwrap();
        let m = f.discretize().unwrap();
        let s0 = LatticeState::new(0.0, seed[..8].to_vec(), seed[8..].iter().map(|p| p * 0.125).collect()).unwrap();
        let run = lattice::canonical_field_evolution(&m, &s0, 0.5, 1e-3, &Settings::default()).unwrap();
        prop_assert!(run.energy_drift().unwrap() <= 1e-7);
        prop_assert!(run.momentum_drift() <= 1e-7);
    }
}
