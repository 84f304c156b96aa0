//! Fixed-step ODE integrators, looked up by name.

/// Right-hand side `dx/ds = f(s, x)`, written into the output slice.
pub type Rhs<'a> = dyn Fn(f64, &[f64], &mut [f64]) + 'a;

pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;
    /// Advance `x` from `s` to `s + h` in place.
    fn step(&self, f: &Rhs<'_>, s: f64, x: &mut [f64], h: f64);
}

/// Classic fourth-order Runge-Kutta.
#[derive(Debug, Default, Clone, Copy)]
pub struct Rk4;

impl Integrator for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn step(&self, f: &Rhs<'_>, s: f64, x: &mut [f64], h: f64) {
        let n = x.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        f(s, x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        f(s + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        f(s + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        f(s + h, &tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

static REGISTRY: &[&dyn Integrator] = &[&Rk4];

pub fn integrator(name: &str) -> Option<&'static dyn Integrator> {
    REGISTRY.iter().copied().find(|i| i.name() == name)
}

pub fn integrator_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|i| i.name()).collect()
}

/// Number of equal steps covering `length` with steps no longer than `step`.
pub fn step_count(length: f64, step: f64) -> usize {
    if length <= 0.0 {
        0
    } else {
        // ratios a rounding error above an integer do not add a step
        (length / step - 1e-9).ceil().max(1.0) as usize
    }
}
