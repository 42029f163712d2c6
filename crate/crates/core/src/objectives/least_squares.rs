//! f_i(x) = Σ_m (⟨u_im, x⟩ − v_im)².

use nalgebra::{DMatrix, DVector};

use super::data::RegressionData;
use crate::error::{Error, Result};
use crate::matrix::dot;

#[derive(Clone, Debug)]
pub struct LeastSquares {
    data: RegressionData,
    /// 2 Uᵢᵀ Uᵢ, row-major.
    hessians: Vec<Vec<f64>>,
    /// 2 Uᵢᵀ vᵢ.
    linear: Vec<Vec<f64>>,
    /// (1/n) Σ Uᵢᵀ Uᵢ = ½ ∇²f, row-major.
    pooled: Vec<f64>,
}

impl LeastSquares {
    pub fn new(data: RegressionData) -> Self {
        let dim = data.dim();
        let mut hessians = Vec::with_capacity(data.n());
        let mut linear = Vec::with_capacity(data.n());
        let mut pooled = vec![0.0; dim * dim];
        for agent in data.agents() {
            let mut h = vec![0.0; dim * dim];
            let mut c = vec![0.0; dim];
            for (u, v) in agent.features.iter().zip(&agent.targets) {
                for a in 0..dim {
                    c[a] += 2.0 * u[a] * v;
                    for b in 0..dim {
                        h[a * dim + b] += 2.0 * u[a] * u[b];
                    }
                }
            }
            for (p, hv) in pooled.iter_mut().zip(&h) {
                *p += 0.5 * hv;
            }
            hessians.push(h);
            linear.push(c);
        }
        let n = data.n() as f64;
        pooled.iter_mut().for_each(|p| *p /= n);
        LeastSquares {
            data,
            hessians,
            linear,
            pooled,
        }
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
            .map(|(u, v)| {
                let r = dot(u, x) - v;
                r * r
            })
            .sum()
    }

    pub fn gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let dim = x.len();
        let h = &self.hessians[i];
        let c = &self.linear[i];
        for a in 0..dim {
            out[a] = dot(&h[a * dim..(a + 1) * dim], x) - c[a];
        }
    }

    /// f(x) − f(x*) as the exact quadratic form (x − x*)ᵀ (½∇²f) (x − x*).
    pub fn gap(&self, x: &[f64], x_star: &[f64]) -> f64 {
        let dim = x.len();
        let d: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
        (0..dim)
            .map(|a| d[a] * dot(&self.pooled[a * dim..(a + 1) * dim], &d))
            .sum()
    }

    pub fn hessian(&self, i: usize) -> DMatrix<f64> {
        let dim = self.data.dim();
        DMatrix::from_row_slice(dim, dim, &self.hessians[i])
    }

    /// Smallest and largest eigenvalue over all per-agent Hessians.
    pub fn curvature_extremes(&self) -> (f64, f64) {
        (0..self.data.n()).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let eig = self.hessian(i).symmetric_eigenvalues();
            (lo.min(eig.min()), hi.max(eig.max()))
        })
    }

    /// Minimizer of the pooled objective from the normal equations.
    pub fn solve_minimizer(&self) -> Result<Vec<f64>> {
        let dim = self.data.dim();
        let n = self.data.n() as f64;
        let gram = DMatrix::from_row_slice(dim, dim, &self.pooled);
        let mut rhs = DVector::zeros(dim);
        for c in &self.linear {
            for a in 0..dim {
                rhs[a] += 0.5 * c[a] / n;
            }
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::DegenerateData("pooled Gram matrix is singular".into()))?;
        let x = chol.solve(&rhs);
        // one step of iterative refinement
        let residual = &rhs - DMatrix::from_row_slice(dim, dim, &self.pooled) * &x;
        let x = x + chol.solve(&residual);
        Ok(x.iter().copied().collect())
    }
}
