use hjfield::{fieldsys, hj, reparam};
use hjfield_expr::{Binding, Verdict};
use serde_json::{json, Value};

use super::{initial_values, split_json, strings, verdict_json, Context, Subcommand};
use crate::error::CliError;
use crate::output::{Artifacts, REPORT, TRAJECTORY};

pub struct Verify;

fn verdicts(vs: &[Verdict]) -> Value {
    Value::Array(vs.iter().map(verdict_json).collect())
}

impl Subcommand for Verify {
    fn name(&self) -> &'static str {
        "verify"
    }

    fn about(&self) -> &'static str {
        "Compare the extended Hamilton-Jacobi motion with the Euler-Lagrange motion"
    }

    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError> {
        let settings = &ctx.settings;
        let base = &ctx.document.model;
        let pair = reparam::parametrize(base, settings)?;
        let at = initial_values(base, &ctx.document.initial);
        let initial: Binding = base
            .coordinates
            .iter()
            .chain(&base.velocities)
            .map(|x| (x.clone(), at.get(x).unwrap_or(0.0)))
            .collect();
        let r = reparam::verify_equivalence(&pair, &initial, ctx.config.horizon, ctx.config.step, settings)?;

        let (split, sys) = hj::build_system(&pair.extended, settings)?;
        let field = fieldsys::promote_to_field(&pair.extended, &split)?;
        let eqs = fieldsys::field_euler_lagrange(&field);
        let reduction = fieldsys::reduction_check(&field, &eqs, &pair.base, settings)?;
        let g_check = fieldsys::constraint_check(&field, &sys, settings);
        let variations = fieldsys::constraint_variations(&field, &sys, settings)?;

        let mut report = r.to_json();
        report["initial"] = super::binding_json(&initial);
        report["split"] = split_json(&pair.extended, &split);
        report["homogeneity"] = verdict_json(&reparam::homogeneity_check(&pair.extended, &settings.zero_test()));
        report["integrability"] = hj::integrability_report(&sys, settings).to_json();
        report["field_system"] = json!({
            "lagrangian": field.lagrangian.to_string(),
            "parameters": field.parameters,
            "reduced": strings(&eqs.reduced),
            "reduction": verdicts(&reduction),
            "constraints": strings(&field.constraints),
            "constraint_check": verdicts(&g_check),
            "variations": variations.to_json(),
        });

        let mut out = Artifacts::default();
        out.json(REPORT, &report)?;
        out.text(TRAJECTORY, r.trajectory.to_csv());
        Ok(out)
    }
}
