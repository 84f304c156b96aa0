#![allow(dead_code)]

use std::path::PathBuf;

use hjfield::model::{self, LagrangianModel, ModelDocument};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn document(name: &str) -> ModelDocument {
    let path = models_dir().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    model::load_document(&text).unwrap()
}

pub fn load(name: &str) -> LagrangianModel {
    document(name).model
}

/// Regular models the equivalence claims are checked on.
pub const REGULAR: &[&str] = &["free", "oscillator", "affine", "ln-potential", "coupled"];

/// Regular models including the explicitly time-dependent control.
pub const REGULAR_ALL: &[&str] = &["free", "oscillator", "affine", "ln-potential", "coupled", "forced"];
