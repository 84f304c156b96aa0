//! Subcommand registry. The clap command is generated from it.

mod analyze;
mod constraints;
mod field_demo;
mod reparametrize;
mod verify;

use std::path::PathBuf;

use clap::{value_parser, Arg, Command};
use hjfield::model::{self, LagrangianModel, ModelDocument};
use hjfield::{json_number, Settings};
use hjfield_expr::{Binding, Verdict};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Artifacts;

/// Everything a subcommand sees: the validated config and the loaded model.
pub struct Context {
    pub config: RunConfig,
    pub settings: Settings,
    pub document: ModelDocument,
}

pub trait Subcommand: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Result<Artifacts, CliError>;
}

static REGISTRY: &[&dyn Subcommand] = &[
    &analyze::Analyze,
    &constraints::Constraints,
    &reparametrize::Reparametrize,
    &verify::Verify,
    &field_demo::FieldDemo,
];

pub fn lookup(name: &str) -> Option<&'static dyn Subcommand> {
    REGISTRY.iter().copied().find(|c| c.name() == name)
}

fn common_args() -> Vec<Arg> {
    vec![
        Arg::new("model")
            .long("model")
            .required(true)
            .value_parser(value_parser!(PathBuf))
            .help("Model file (JSON)"),
        Arg::new("out")
            .long("out")
            .required(true)
            .value_parser(value_parser!(PathBuf))
            .help("Output directory"),
        Arg::new("step")
            .long("step")
            .default_value("0.001")
            .value_parser(value_parser!(f64))
            .help("Integrator step"),
        Arg::new("horizon")
            .long("horizon")
            .default_value("6.283185307179586")
            .value_parser(value_parser!(f64))
            .help("Integration horizon"),
        Arg::new("samples")
            .long("samples")
            .default_value("50")
            .value_parser(value_parser!(usize))
            .help("Sample points for rank and zero tests"),
        Arg::new("seed")
            .long("seed")
            .default_value("24301")
            .value_parser(value_parser!(u64))
            .help("Sampling seed"),
        Arg::new("max-iter")
            .long("max-iter")
            .default_value("5")
            .value_parser(value_parser!(usize))
            .help("Integrability iteration cap"),
    ]
}

pub fn command() -> Command {
    let mut cmd = Command::new("hjfield")
        .about("Hamilton-Jacobi analysis of singular and reparametrized Lagrangians")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in REGISTRY {
        cmd = cmd.subcommand(Command::new(sub.name()).about(sub.about()).args(common_args()));
    }
    cmd
}

pub(crate) fn binding_json(b: &Binding) -> Value {
    Value::Object(b.iter().map(|(k, v)| (k.to_string(), json_number(v))).collect())
}

pub(crate) fn verdict_json(v: &Verdict) -> Value {
    json!({
        "verdict": v.label(),
        "witness": v.witness().map(binding_json),
    })
}

pub(crate) fn strings<'a, T: ToString + 'a>(items: impl IntoIterator<Item = &'a T>) -> Vec<String> {
    items.into_iter().map(ToString::to_string).collect()
}

/// Starting values for every coordinate, velocity and parameter of `m`.
/// Coordinates default to 1 and velocities to 0, except that a time
/// coordinate starts at 0 with unit rate.
pub(crate) fn initial_values(m: &LagrangianModel, given: &Binding) -> Binding {
    let mut b = Binding::new();
    b.insert(m.evolution().to_string(), given.get(m.evolution()).unwrap_or(0.0));
    if m.parameter.is_some() {
        b.insert(m.time.clone(), given.get(&m.time).unwrap_or(0.0));
    }
    for (q, v) in m.coordinates.iter().zip(&m.velocities) {
        let is_time = *q == m.time;
        b.insert(q.clone(), given.get(q).unwrap_or(if is_time { 0.0 } else { 1.0 }));
        b.insert(v.clone(), given.get(v).unwrap_or(if is_time { 1.0 } else { 0.0 }));
    }
    b
}

pub(crate) fn split_json(m: &LagrangianModel, split: &model::HessianAnalysis) -> Value {
    json!({
        "velocities": split.velocities,
        "rank": split.rank,
        "deficiency": split.deficiency,
        "regular": split.regular.iter().map(|&i| &m.coordinates[i]).collect::<Vec<_>>(),
        "degenerate": split.degenerate.iter().map(|&i| &m.coordinates[i]).collect::<Vec<_>>(),
        "sample_ranks": split.sample_ranks,
    })
}
