mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::process::ExitCode;

use serde_json::json;

use commands::Context;
use config::RunConfig;
use error::CliError;

fn run() -> Result<(), CliError> {
    let matches = match commands::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return Err(CliError::Usage("invalid arguments".into()));
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = commands::lookup(name).ok_or_else(|| CliError::Usage(format!("unknown subcommand `{name}`")))?;
    let config = RunConfig::from_matches(name, sub)?;
    let bytes = fs::read(&config.model).map_err(|e| CliError::io(&config.model, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Usage(format!("{} is not UTF-8", config.model.display())))?;
    let document = hjfield::model::load_document(&text)?;
    let ctx = Context {
        settings: config.settings(),
        config,
        document,
    };
    let artifacts = command.run(&ctx)?;
    let c = &ctx.config;
    let header = json!({
        "command": c.subcommand,
        "model": c.model.file_name().map(|n| n.to_string_lossy().into_owned()),
        "model_sha256": output::sha256(&bytes),
        "config": {
            "step": c.step,
            "horizon": c.horizon,
            "samples": c.samples,
            "seed": c.seed,
            "max_iter": c.max_iter,
        },
    });
    artifacts.write(&c.out, header)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
