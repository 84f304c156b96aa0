use hjfield::{hj, model, reparam};
use serde_json::{json, Map};

use super::{split_json, verdict_json, Context, Subcommand};
use crate::error::CliError;
use crate::output::{Artifacts, REPORT};

pub const MODEL: &str = "model.json";

pub struct Reparametrize;

impl Subcommand for Reparametrize {
    fn name(&self) -> &'static str {
        "reparametrize"
    }

    fn about(&self) -> &'static str {
        "Promote time to a coordinate and emit the extended model file"
    }

    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError> {
        let settings = &ctx.settings;
        let zt = settings.zero_test();
        let pair = reparam::parametrize(&ctx.document.model, settings)?;
        let ext = reparam::build_extended_hj(&pair, settings)?;
        let m = &pair.extended;
        let integrability = hj::integrability_report(&ext.system, settings);
        let report = json!({
            "base": pair.base.name,
            "model": m.name,
            "parameter": pair.parameter(),
            "coordinates": m.coordinates,
            "lagrangian": m.lagrangian.to_string(),
            "provenance": pair.provenance.iter().map(|(k, e)| (k.clone(), json!(e.to_string()))).collect::<Map<_, _>>(),
            "split": split_json(m, &ext.split),
            "homogeneity": verdict_json(&reparam::homogeneity_check(m, &zt)),
            "H_t": ext.h_t().to_string(),
            "H_t_direct": ext.direct.to_string(),
            "routes": verdict_json(&zt.check(&(ext.h_t() - &ext.direct))),
            "integrability": integrability.to_json(),
        });

        let mut file = m.to_file();
        for (k, v) in ctx.document.initial.iter() {
            file.initial.insert(k.to_string(), v);
        }
        file.initial.entry(m.time.clone()).or_insert(0.0);
        file.initial.entry(model::velocity(&m.time)).or_insert(1.0);

        let mut out = Artifacts::default();
        out.json(REPORT, &report)?;
        out.json(MODEL, &serde_json::to_value(&file)?)?;
        Ok(out)
    }
}
