use std::path::PathBuf;

use clap::ArgMatches;
use hjfield::Settings;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    pub model: PathBuf,
    pub out: PathBuf,
    pub step: f64,
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl RunConfig {
    pub fn from_matches(subcommand: &str, m: &ArgMatches) -> Result<Self, CliError> {
        let config = RunConfig {
            subcommand: subcommand.to_string(),
            model: m.get_one::<PathBuf>("model").cloned().expect("required"),
            out: m.get_one::<PathBuf>("out").cloned().expect("required"),
            step: *m.get_one("step").expect("defaulted"),
            horizon: *m.get_one("horizon").expect("defaulted"),
            samples: *m.get_one("samples").expect("defaulted"),
            seed: *m.get_one("seed").expect("defaulted"),
            max_iter: *m.get_one("max-iter").expect("defaulted"),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Usage(format!("--step must be positive, got {}", self.step)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(CliError::Usage(format!(
                "--horizon must be non-negative, got {}",
                self.horizon
            )));
        }
        if self.samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        Settings {
            samples: self.samples,
            seed: self.seed,
            max_iter: self.max_iter,
        }
    }
}
