use hjfield::{model, reparam};
use serde_json::json;

use super::{split_json, strings, verdict_json, Context, Subcommand};
use crate::error::CliError;
use crate::output::{Artifacts, REPORT};

pub struct Analyze;

impl Subcommand for Analyze {
    fn name(&self) -> &'static str {
        "analyze"
    }

    fn about(&self) -> &'static str {
        "Velocity Hessian, rank, regular/degenerate split and Euler-Lagrange equations"
    }

    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError> {
        let m = &ctx.document.model;
        let zt = ctx.settings.zero_test();
        let split = model::analyze(m, &ctx.settings)?;
        let residuals = model::euler_lagrange(m);
        let mut report = json!({
            "model": m.name,
            "coordinates": m.coordinates,
            "time": m.time,
            "parameter": m.parameter,
            "lagrangian": m.lagrangian.to_string(),
            "hessian": split.matrix.iter().map(strings).collect::<Vec<_>>(),
            "split": split_json(m, &split),
            "euler_lagrange": strings(&residuals),
        });
        if split.deficiency == 0 {
            let acc = model::explicit_accelerations(m, &zt)?;
            report["explicit"] = m
                .accelerations()
                .into_iter()
                .zip(acc.iter().map(ToString::to_string))
                .collect();
            report["energy"] = json!(model::energy(m).to_string());
        }
        if m.parameter.is_some() {
            report["homogeneity"] = verdict_json(&reparam::homogeneity_check(m, &zt));
        }
        let mut out = Artifacts::default();
        out.json(REPORT, &report)?;
        Ok(out)
    }
}
