//! f_i(x) = u(x) + b_i x with u(x) = x⁴/4 on |x| ≤ 1 and |x| − 3/4 outside.

use serde::{Deserialize, Serialize};

/// The C¹ quartic–linear profile u.
pub fn profile(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        0.25 * x.powi(4)
    } else {
        x.abs() - 0.75
    }
}

pub fn profile_derivative(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        x * x * x
    } else {
        x.signum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticLinear {
    offsets: Vec<f64>,
}

impl QuarticLinear {
    pub fn new(offsets: Vec<f64>) -> Self {
        QuarticLinear { offsets }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn value(&self, i: usize, x: &[f64]) -> f64 {
        profile(x[0]) + self.offsets[i] * x[0]
    }

    pub fn gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        out[0] = profile_derivative(x[0]) + self.offsets[i];
    }
}
