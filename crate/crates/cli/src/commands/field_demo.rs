use std::f64::consts::PI;

use hjfield::lattice::{self, LatticeState};
use hjfield::{json_number, Error};
use hjfield_expr::parse;
use serde_json::json;

use super::{Context, Subcommand};
use crate::error::CliError;
use crate::output::{Artifacts, REPORT, TRAJECTORY};

const MODE: usize = 1;
const AMPLITUDE: f64 = 1.0;
const FREE_DENSITY: &str = "0.5*dphi_t^2 - 0.5*dphi_x^2";

pub struct FieldDemo;

impl Subcommand for FieldDemo {
    fn name(&self) -> &'static str {
        "field-demo"
    }

    fn about(&self) -> &'static str {
        "Standing wave on a lattice field: canonical run and reparametrized comparison"
    }

    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError> {
        let f = ctx
            .document
            .lattice
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("`{}` is not a lattice model", ctx.document.model.name)))?;
        let (horizon, step) = (ctx.config.horizon, ctx.config.step);
        let settings = &ctx.settings;
        let state0 = LatticeState::standing_wave(f.sites, MODE, AMPLITUDE);
        let run = lattice::canonical_field_evolution(&ctx.document.model, &state0, horizon, step, settings)?;
        let equivalence = lattice::reparam_field_equivalence(f, &state0, horizon, step, settings)?;

        let mut report = json!({
            "model": f.name,
            "sites": f.sites,
            "dx": f.dx,
            "density": f.density.to_string(),
            "mode": MODE,
            "amplitude": AMPLITUDE,
            "horizon": horizon,
            "step": step,
            "snapshots": run.states.len(),
            "energy_drift": json_number(run.energy_drift()?),
            "momentum_drift": json_number(run.momentum_drift()),
            "equivalence": equivalence.to_json(),
        });
        let free = parse(FREE_DENSITY).expect("literal density");
        if settings.zero_test().check(&(&f.density - &free)).is_zero() {
            let w = f.free_dispersion(MODE);
            let k = 2.0 * PI * MODE as f64 / f.sites as f64;
            let mut worst = 0.0f64;
            for s in &run.states {
                for (i, phi) in s.phi.iter().enumerate() {
                    let exact = AMPLITUDE * (k * i as f64).cos() * (w * s.time).cos();
                    worst = worst.max((phi - exact).abs());
                }
            }
            report["dispersion"] = json!({
                "omega": json_number(w),
                "period": json_number(2.0 * PI / w),
                "amplitude_error": json_number(worst),
            });
        }

        let mut out = Artifacts::default();
        out.json(REPORT, &report)?;
        out.text(TRAJECTORY, lattice::snapshot_csv(&run.states));
        Ok(out)
    }
}
