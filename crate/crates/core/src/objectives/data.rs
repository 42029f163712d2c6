use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Standard deviation of the random feature coordinates (variance 25).
pub const FEATURE_STD: f64 = 5.0;

/// One agent's samples: rows of `features` are the u_im, `targets` the v_im.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentData {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    dim: usize,
    agents: Vec<AgentData>,
}

impl RegressionData {
    pub fn new(agents: Vec<AgentData>) -> Result<Self> {
        let dim = agents
            .first()
            .and_then(|a| a.features.first())
            .map_or(0, Vec::len);
        if agents.is_empty() || dim == 0 {
            return Err(Error::param("regression data needs at least one agent and one feature"));
        }
        for (i, a) in agents.iter().enumerate() {
            if a.features.is_empty() || a.features.len() != a.targets.len() {
                return Err(Error::param(format!(
                    "agent {i}: {} feature rows but {} targets",
                    a.features.len(),
                    a.targets.len()
                )));
            }
            if a.features.iter().any(|r| r.len() != dim) {
                return Err(Error::param(format!("agent {i}: feature rows must have length {dim}")));
            }
            let finite = a.features.iter().flatten().chain(&a.targets).all(|v| v.is_finite());
            if !finite {
                return Err(Error::param(format!("agent {i}: non-finite data")));
            }
        }
        Ok(RegressionData { dim, agents })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentData] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentData {
        &self.agents[i]
    }

    pub fn total_samples(&self) -> usize {
        self.agents.iter().map(|a| a.targets.len()).sum()
    }
}

/// Draws the ground-truth parameter and the feature rows shared by both
/// regression cases. Last feature coordinate is 1, the rest are N(0, 25).
pub(crate) fn draw_features<R: Rng>(
    rng: &mut R,
    n: usize,
    samples: usize,
    dim: usize,
) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
    let truth: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let features = (0..n)
        .map(|_| {
            (0..samples)
                .map(|_| {
                    let mut u: Vec<f64> = (0..dim - 1)
                        .map(|_| FEATURE_STD * Distribution::<f64>::sample(&StandardNormal, rng))
                        .collect();
                    u.push(1.0);
                    u
                })
                .collect()
        })
        .collect();
    (truth, features)
}

pub(crate) fn check_sizes(n: usize, samples: usize, dim: usize) -> Result<()> {
    if n == 0 || samples == 0 || dim == 0 {
        return Err(Error::param("n, samples per agent and dimension must be positive"));
    }
    Ok(())
}

/// Linear-regression data: v = ⟨x̃, u⟩ + ε, ε ~ N(0, 1).
pub fn linear_regression_data(n: usize, samples: usize, dim: usize, seed: u64) -> Result<RegressionData> {
    check_sizes(n, samples, dim)?;
    let mut rng = rng::stream(seed);
    let (truth, features) = draw_features(&mut rng, n, samples, dim);
    let agents = features
        .into_iter()
        .map(|rows| {
            let targets = rows
                .iter()
                .map(|u| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    crate::matrix::dot(&truth, u) + noise
                })
                .collect();
            AgentData {
                features: rows,
                targets,
            }
        })
        .collect();
    RegressionData::new(agents)
}

/// Logistic-regression data: v ~ Bernoulli(1 / (1 + exp(−⟨x̃, u⟩))).
pub fn logistic_regression_data(n: usize, samples: usize, dim: usize, seed: u64) -> Result<RegressionData> {
    check_sizes(n, samples, dim)?;
    let mut rng = rng::stream(seed);
    let (truth, features) = draw_features(&mut rng, n, samples, dim);
    let agents = features
        .into_iter()
        .map(|rows| {
            let targets = rows
                .iter()
                .map(|u| {
                    let p = 1.0 / (1.0 + (-crate::matrix::dot(&truth, u)).exp());
                    if rng.random::<f64>() < p {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            AgentData {
                features: rows,
                targets,
            }
        })
        .collect();
    RegressionData::new(agents)
}
