//! f_i(x) = Σ_m [ln(1 + exp⟨u_im, x⟩) − v_im ⟨u_im, x⟩].

use nalgebra::{DMatrix, DVector};

use super::data::RegressionData;
use crate::error::{Error, Result};
use crate::matrix::{dot, norm};

const NEWTON_MAX_ITERATIONS: usize = 200;
/// Iterates beyond this norm mean the data are (nearly) separable.
const NEWTON_MAX_NORM: f64 = 1e8;

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn loss(z: f64, v: f64) -> f64 {
    // softplus(z) − z = softplus(−z) keeps binary labels free of cancellation
    if v == 0.0 {
        softplus(z)
    } else if v == 1.0 {
        softplus(-z)
    } else {
        softplus(z) - v * z
    }
}

#[derive(Clone, Debug)]
pub struct Logistic {
    data: RegressionData,
}

#[derive(Clone, Debug)]
pub(crate) struct Minimizer {
    pub x: Vec<f64>,
    pub value: f64,
    /// λ_min of ∇²f at the minimizer.
    pub curvature: f64,
}

impl Logistic {
    pub fn new(data: RegressionData) -> Self {
        Logistic { data }
    }

    pub fn data(&self) -> &RegressionData {
        &self.data
    }

    pub fn value(&self, i: usize, x: &[f64]) -> f64 {
        let agent = self.data.agent(i);
        agent
            .features
            .iter()
            .zip(&agent.targets)
            .map(|(u, &v)| loss(dot(u, x), v))
            .sum()
    }

    pub fn gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let agent = self.data.agent(i);
        for (u, v) in agent.features.iter().zip(&agent.targets) {
            let r = sigmoid(dot(u, x)) - v;
            for (o, ua) in out.iter_mut().zip(u) {
                *o += r * ua;
            }
        }
    }

    /// max_i ¼ λ_max(Uᵢᵀ Uᵢ), a bound on every local Hessian.
    pub fn smoothness(&self) -> f64 {
        let dim = self.data.dim();
        self.data
            .agents()
            .iter()
            .map(|a| {
                let mut gram = DMatrix::zeros(dim, dim);
                for u in &a.features {
                    let u = DVector::from_column_slice(u);
                    gram += &u * u.transpose();
                }
                0.25 * gram.symmetric_eigenvalues().max()
            })
            .fold(0.0, f64::max)
    }

    fn pooled_value(&self, x: &[f64]) -> f64 {
        (0..self.data.n()).map(|i| self.value(i, x)).sum::<f64>() / self.data.n() as f64
    }

    fn pooled_derivatives(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.data.dim();
        let n = self.data.n() as f64;
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for agent in self.data.agents() {
            for (u, v) in agent.features.iter().zip(&agent.targets) {
                let p = sigmoid(dot(u, x));
                let uv = DVector::from_column_slice(u);
                grad.axpy((p - v) / n, &uv, 1.0);
                hess.ger(p * (1.0 - p) / n, &uv, &uv, 1.0);
            }
        }
        (grad, hess)
    }

    /// Damped Newton on the pooled objective until ‖∇f‖ ≤ `tol`.
    pub(crate) fn solve_minimizer(&self, tol: f64) -> Result<Minimizer> {
        let dim = self.data.dim();
        let mut x = vec![0.0; dim];
        let mut value = self.pooled_value(&x);
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let (grad, hess) = self.pooled_derivatives(&x);
            if grad.norm() <= tol {
                let curvature = hess.symmetric_eigenvalues().min();
                return Ok(Minimizer { x, value, curvature });
            }
            if norm(&x) > NEWTON_MAX_NORM {
                break;
            }
            let step = hess
                .cholesky()
                .map(|c| -c.solve(&grad))
                .ok_or_else(|| Error::DegenerateData("logistic Hessian is singular".into()))?;
            let slope = grad.dot(&step);
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
                let trial_value = self.pooled_value(&trial);
                if trial_value <= value + 1e-4 * t * slope || t < 1e-12 {
                    x = trial;
                    value = trial_value;
                    break;
                }
                t *= 0.5;
            }
        }
        if norm(&x) > NEWTON_MAX_NORM {
            return Err(Error::DegenerateData(
                "logistic minimizer diverges (separable data)".into(),
            ));
        }
        Err(Error::OracleFailure(format!(
            "Newton did not reach gradient norm {tol:e} in {NEWTON_MAX_ITERATIONS} iterations"
        )))
    }
}
