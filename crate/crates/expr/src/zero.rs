//! Two-tier zero test.
//!
//! The symbolic tier asks whether [`simplify`] reduces the expression to the
//! constant `0`. Failing that, the numeric tier evaluates the original
//! expression at pseudo-random points. A `NumericZero` verdict is therefore
//! probabilistic: an expression that vanishes at every sampled point but not
//! identically is misclassified, which for analytic expressions requires the
//! samples to land on a measure-zero set. A `NonZero` verdict always carries
//! the binding at which the expression was seen to be non-zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::Expr;
use crate::eval::{eval_traced, Binding, Trace};
use crate::simplify::simplify;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    SymbolicZero,
    NumericZero,
    /// `value` is NaN when no admissible sample point could be found.
    NonZero {
        witness: Binding,
        value: f64,
    },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, Verdict::NonZero { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SymbolicZero => "symbolic-zero",
            Verdict::NumericZero => "numeric-zero",
            Verdict::NonZero { .. } => "nonzero",
        }
    }

    pub fn witness(&self) -> Option<&Binding> {
        match self {
            Verdict::NonZero { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Configuration of the numeric tier.
#[derive(Debug, Clone)]
pub struct ZeroTest {
    pub samples: usize,
    pub seed: u64,
    /// Values within `tolerance * max(1, largest top-level summand)` of zero
    /// count as zero.
    pub tolerance: f64,
    pub low: f64,
    pub high: f64,
    /// Points where any denominator is smaller than this are resampled.
    pub min_denominator: f64,
    /// Resampling attempts per point before falling back to `[0.5, 2]`.
    pub attempts: usize,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            samples: 50,
            seed: 0x5eed,
            tolerance: 1e-9,
            low: -2.0,
            high: 2.0,
            min_denominator: 1e-6,
            attempts: 64,
        }
    }
}

const FALLBACK_RANGE: (f64, f64) = (0.5, 2.0);

impl ZeroTest {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_range(mut self, low: f64, high: f64) -> Self {
        self.low = low;
        self.high = high;
        self
    }

    pub fn check(&self, e: &Expr) -> Verdict {
        let simplified = simplify(e);
        if simplified.is_zero() {
            return Verdict::SymbolicZero;
        }
        self.check_numeric(e)
    }

    /// Numeric tier only.
    pub fn check_numeric(&self, e: &Expr) -> Verdict {
        let symbols: Vec<String> = e.symbols().into_iter().collect();
        let summands = e.summands();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut last = Binding::new();
        let mut admissible = 0usize;
        for _ in 0..self.samples.max(1) {
            let Some((binding, value, scale)) = self.sample_point(&symbols, e, &summands, &mut rng, &mut last) else {
                continue;
            };
            admissible += 1;
            if value.abs() > self.tolerance * scale.max(1.0) {
                return Verdict::NonZero {
                    witness: binding,
                    value,
                };
            }
            if symbols.is_empty() {
                break;
            }
        }
        if admissible == 0 {
            return Verdict::NonZero {
                witness: last,
                value: f64::NAN,
            };
        }
        Verdict::NumericZero
    }

    fn sample_point(
        &self,
        symbols: &[String],
        e: &Expr,
        summands: &[Expr],
        rng: &mut ChaCha8Rng,
        last: &mut Binding,
    ) -> Option<(Binding, f64, f64)> {
        for attempt in 0..2 * self.attempts {
            let (lo, hi) = if attempt < self.attempts {
                (self.low, self.high)
            } else {
                FALLBACK_RANGE
            };
            let binding: Binding = symbols.iter().map(|s| (s.clone(), rng.gen_range(lo..=hi))).collect();
            *last = binding.clone();
            let mut trace = Trace::default();
            let Ok(value) = eval_traced(e, &binding, &mut trace) else {
                continue;
            };
            if trace.min_denominator < self.min_denominator {
                continue;
            }
            let mut scale = 0.0f64;
            for t in summands {
                let mut tr = Trace::default();
                if let Ok(v) = eval_traced(t, &binding, &mut tr) {
                    scale = scale.max(v.abs());
                }
            }
            return Some((binding, value, scale));
        }
        None
    }
}

/// Zero test with the default configuration.
pub fn is_identically_zero(e: &Expr) -> Verdict {
    ZeroTest::default().check(e)
}
