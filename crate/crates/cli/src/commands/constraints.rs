use hjfield::hj::{self, ParameterPath};
use hjfield::model;
use hjfield_expr::{differentiate, evaluate, Binding};
use serde_json::{json, Map, Value};

use super::{initial_values, split_json, Context, Subcommand};
use crate::error::CliError;
use crate::output::{Artifacts, REPORT, TRAJECTORY};

pub struct Constraints;

impl Subcommand for Constraints {
    fn name(&self) -> &'static str {
        "constraints"
    }

    fn about(&self) -> &'static str {
        "Hamilton-Jacobi system, total differential equations and integrability report"
    }

    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError> {
        let m = &ctx.document.model;
        let (split, sys) = hj::build_system(m, &ctx.settings)?;
        let tds = hj::total_differential_system(&sys);
        let integrability = hj::integrability_report(&sys, &ctx.settings);

        // Evolution parameter at unit rate, degenerate coordinates at their
        // own velocities.
        let at = initial_values(m, &ctx.document.initial);
        let start: Vec<f64> = sys.parameters.iter().map(|t| at.get(t).unwrap_or(0.0)).collect();
        let rates: Vec<f64> = sys
            .parameters
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if i == 0 {
                    1.0
                } else {
                    at.get(&model::velocity(t)).unwrap_or(0.0)
                }
            })
            .collect();
        let mut initial = Binding::new();
        for (q, v) in m.coordinates.iter().zip(&m.velocities) {
            if !sys.coordinates.contains(q) {
                continue;
            }
            let p = evaluate(&differentiate(&m.lagrangian, v), &at)
                .map_err(|e| hjfield::Error::Numerical(format!("initial momentum of `{q}`: {e}")))?;
            initial.insert(q.clone(), at.get(q).unwrap_or(0.0));
            initial.insert(model::momentum(q), p);
        }
        let path = ParameterPath::straight(start, &rates, ctx.config.horizon)?;
        let trajectory = hj::integrate(&tds, &initial, &path, ctx.config.step)?;
        if let Some(why) = &trajectory.failure {
            return Err(hjfield::Error::Numerical(format!("constraint flow: {why}")).into());
        }
        let mut primed = Map::new();
        for (t, h) in sys.parameters.iter().zip(&sys.primed) {
            primed.insert(format!("H'_{t}"), hjfield::json_number(hj::max_along(&trajectory, h)?));
        }

        let report = json!({
            "model": m.name,
            "split": split_json(m, &split),
            "system": sys.to_json(),
            "total_differential": tds.to_json(),
            "integrability": integrability.to_json(),
            "trajectory": {
                "rows": trajectory.rows.len(),
                "step": ctx.config.step,
                "horizon": ctx.config.horizon,
                "integrator": trajectory.integrator,
                "rates": sys.parameters.iter().zip(&rates).map(|(t, r)| (t.clone(), json!(r))).collect::<Map<_, _>>(),
                "max_abs_primed": Value::Object(primed),
            },
        });
        let mut out = Artifacts::default();
        out.json(REPORT, &report)?;
        out.text(TRAJECTORY, trajectory.to_csv());
        Ok(out)
    }
}
