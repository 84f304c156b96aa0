//! Hamilton-Jacobi treatment of singular Lagrangians.
//!
//! A [`model::LagrangianModel`] is analysed for the rank of its velocity
//! Hessian, turned into a set of constraint Hamiltonians and total
//! differential equations ([`hj`]), treated as a multi-parameter field system
//! ([`fieldsys`]), extended to a parametrization-invariant theory
//! ([`reparam`]) and realized on a spatial lattice ([`lattice`]).

mod error;
pub mod fieldsys;
pub mod hj;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod reparam;

pub use error::{Error, ErrorClass, Result};

use hjfield_expr::ZeroTest;

/// Sampling configuration shared by the rank analysis, the zero test and the
/// integrability loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub samples: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            samples: 50,
            seed: 0x5eed,
            max_iter: 5,
        }
    }
}

impl Settings {
    pub fn zero_test(&self) -> ZeroTest {
        ZeroTest::default().with_samples(self.samples).with_seed(self.seed)
    }
}

pub(crate) fn binding_json(b: &hjfield_expr::Binding) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> =
        b.iter().map(|(k, v)| (k.to_string(), json_number(v))).collect();
    serde_json::Value::Object(map)
}

/// Finite numbers as JSON numbers, anything else as `null`.
pub fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}
