//! Local objective families with exact gradients, smoothness constants and
//! minimizer oracles.
//!
//! Three families are provided, one per experiment case:
//!
//! * least squares, `f_i(x) = Σ_m (⟨u_im, x⟩ − v_im)²`;
//! * logistic loss, `f_i(x) = Σ_m [ln(1 + e^⟨u_im, x⟩) − v_im ⟨u_im, x⟩]`;
//! * a scalar quartic–linear family, `f_i(x) = u(x) + b_i x` with `Σ b_i = 0`.
//!
//! `alpha` and `beta` are per-agent constants: every f_i is α-strongly convex
//! and β-smooth. The logistic family reports `alpha = 0`.

mod data;
mod least_squares;
mod logistic;
mod quartic;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use data::{linear_regression_data, logistic_regression_data, AgentData, RegressionData, FEATURE_STD};
pub use least_squares::LeastSquares;
pub use logistic::Logistic;
pub use quartic::{profile, profile_derivative, QuarticLinear};

use crate::error::{Error, Result};
use crate::matrix::{distance, norm};
use crate::rng;

/// Relative gradient tolerance of the logistic minimizer oracle.
pub const LOGISTIC_ORACLE_TOLERANCE: f64 = 1e-12;
/// Minimizers whose Hessian is flatter than this (relative to β) are rejected.
const MIN_RELATIVE_CURVATURE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Problem {
    LeastSquares(LeastSquares),
    Logistic(Logistic),
    QuarticLinear(QuarticLinear),
}

/// The n local objectives of one experiment together with their constants
/// and minimizer of f = (1/n) Σ f_i.
#[derive(Clone, Debug)]
pub struct ObjectiveSuite {
    problem: Problem,
    n: usize,
    dim: usize,
    alpha: f64,
    beta: f64,
    x_star: Vec<f64>,
    f_star: f64,
    local_curvature: Option<f64>,
}

impl ObjectiveSuite {
    /// Least-squares suite from explicit data. α and β are the extreme
    /// eigenvalues over all agents of 2 Uᵢᵀ Uᵢ.
    pub fn least_squares(data: RegressionData) -> Result<Self> {
        let problem = LeastSquares::new(data);
        let x_star = problem.solve_minimizer()?;
        let (alpha, beta) = problem.curvature_extremes();
        let n = problem.data().n();
        let dim = problem.data().dim();
        let mut suite = ObjectiveSuite {
            problem: Problem::LeastSquares(problem),
            n,
            dim,
            alpha: alpha.max(0.0),
            beta,
            x_star,
            f_star: 0.0,
            local_curvature: None,
        };
        suite.f_star = suite.eval_global_value(&suite.x_star.clone());
        Ok(suite)
    }

    /// Logistic suite from explicit data with binary labels.
    pub fn logistic(data: RegressionData) -> Result<Self> {
        if data.agents().iter().flat_map(|a| &a.targets).any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("logistic labels must be 0 or 1"));
        }
        let problem = Logistic::new(data);
        let beta = problem.smoothness();
        let min = problem.solve_minimizer(LOGISTIC_ORACLE_TOLERANCE * beta)?;
        if min.curvature <= MIN_RELATIVE_CURVATURE * beta {
            return Err(Error::DegenerateData(format!(
                "logistic minimizer diverges: curvature {:e} at |x| = {:e}",
                min.curvature,
                norm(&min.x)
            )));
        }
        let n = problem.data().n();
        let dim = problem.data().dim();
        Ok(ObjectiveSuite {
            problem: Problem::Logistic(problem),
            n,
            dim,
            alpha: 0.0,
            beta,
            x_star: min.x,
            f_star: min.value,
            local_curvature: Some(min.curvature),
        })
    }

    /// Scalar quartic–linear suite. The offsets must sum to zero so that
    /// f = u with minimizer 0 and minimum 0.
    pub fn quartic_linear(offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() || offsets.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("offsets must be non-empty and finite"));
        }
        let total: f64 = offsets.iter().sum();
        if total.abs() > 1e-12 {
            return Err(Error::param(format!("offsets sum to {total:e}, expected 0")));
        }
        Ok(ObjectiveSuite {
            n: offsets.len(),
            dim: 1,
            problem: Problem::QuarticLinear(QuarticLinear::new(offsets)),
            alpha: 0.0,
            beta: 3.0,
            x_star: vec![0.0],
            f_star: 0.0,
            local_curvature: None,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Experiment case tag: 1 least squares, 2 logistic, 3 quartic–linear.
    pub fn case(&self) -> u8 {
        match self.problem {
            Problem::LeastSquares(_) => 1,
            Problem::Logistic(_) => 2,
            Problem::QuarticLinear(_) => 3,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// λ_min of ∇²f at x* (logistic suites only).
    pub fn local_curvature(&self) -> Option<f64> {
        self.local_curvature
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.alpha > 0.0
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::param(format!("point has length {}, expected {}", x.len(), self.dim)));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite point".into()));
        }
        Ok(())
    }

    fn check_agent(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::param(format!("agent {i} out of range (n = {})", self.n)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.check_agent(i)?;
        self.check_point(x)?;
        Ok(self.eval_value(i, x))
    }

    pub fn gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_agent(i)?;
        self.check_point(x)?;
        let mut out = vec![0.0; self.dim];
        self.gradient_into(i, x, &mut out);
        Ok(out)
    }

    /// f(x) = (1/n) Σ f_i(x).
    pub fn global_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_global_value(x))
    }

    /// ∇f(x) = (1/n) Σ ∇f_i(x).
    pub fn global_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut out = vec![0.0; self.dim];
        self.global_gradient_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked f_i(x).
    pub fn eval_value(&self, i: usize, x: &[f64]) -> f64 {
        match &self.problem {
            Problem::LeastSquares(p) => p.value(i, x),
            Problem::Logistic(p) => p.value(i, x),
            Problem::QuarticLinear(p) => p.value(i, x),
        }
    }

    /// Unchecked ∇f_i(x) written into `out` (length N).
    pub fn gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        match &self.problem {
            Problem::LeastSquares(p) => p.gradient_into(i, x, out),
            Problem::Logistic(p) => p.gradient_into(i, x, out),
            Problem::QuarticLinear(p) => p.gradient_into(i, x, out),
        }
    }

    pub fn eval_global_value(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| self.eval_value(i, x)).sum::<f64>() / self.n as f64
    }

    pub fn global_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let mut local = vec![0.0; self.dim];
        out.fill(0.0);
        for i in 0..self.n {
            self.gradient_into(i, x, &mut local);
            for (o, g) in out.iter_mut().zip(&local) {
                *o += g;
            }
        }
        let n = self.n as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }

    /// Objective error f(x) − f*.
    ///
    /// Least squares uses the exact quadratic form around x*; the
    /// quartic–linear family uses f = u. Both avoid cancellation near the
    /// optimum.
    pub fn objective_gap(&self, x: &[f64]) -> f64 {
        match &self.problem {
            Problem::LeastSquares(p) => p.gap(x, &self.x_star),
            Problem::QuarticLinear(_) => profile(x[0]),
            Problem::Logistic(_) => self.eval_global_value(x) - self.f_star,
        }
    }

    /// Extreme eigenvalues of the pooled sample second-moment matrix
    /// (1/Σ M_i) Σ u uᵀ, i.e. ∇²f / (2M) for least squares with equal M_i.
    /// Regression suites only.
    pub fn sample_moment_extremes(&self) -> Option<(f64, f64)> {
        let data = match &self.problem {
            Problem::LeastSquares(p) => p.data(),
            Problem::Logistic(p) => p.data(),
            Problem::QuarticLinear(_) => return None,
        };
        let dim = data.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for u in data.agents().iter().flat_map(|a| &a.features) {
            for a in 0..dim {
                for b in 0..dim {
                    m[(a, b)] += u[a] * u[b];
                }
            }
        }
        m /= data.total_samples() as f64;
        let eig = m.symmetric_eigenvalues();
        Some((eig.min(), eig.max()))
    }

    /// Serializable form carrying data and oracle constants.
    pub fn to_document(&self) -> SuiteDocument {
        let (agents, offsets) = match &self.problem {
            Problem::LeastSquares(p) => (Some(p.data().agents().to_vec()), None),
            Problem::Logistic(p) => (Some(p.data().agents().to_vec()), None),
            Problem::QuarticLinear(p) => (None, Some(p.offsets().to_vec())),
        };
        SuiteDocument {
            case: self.case(),
            n: self.n,
            dim: self.dim,
            alpha: self.alpha,
            beta: self.beta,
            x_star: self.x_star.clone(),
            f_star: self.f_star,
            local_curvature: self.local_curvature,
            agents,
            offsets,
        }
    }

    /// Rebuilds a suite from its document without re-solving for x*.
    pub fn from_document(doc: SuiteDocument) -> Result<Self> {
        let problem = match doc.case {
            1 | 2 => {
                let agents = doc
                    .agents
                    .ok_or_else(|| Error::param("regression suite document lacks agent data"))?;
                let data = RegressionData::new(agents)?;
                if doc.case == 1 {
                    Problem::LeastSquares(LeastSquares::new(data))
                } else {
                    Problem::Logistic(Logistic::new(data))
                }
            }
            3 => {
                let offsets = doc
                    .offsets
                    .ok_or_else(|| Error::param("quartic suite document lacks offsets"))?;
                Problem::QuarticLinear(QuarticLinear::new(offsets))
            }
            other => return Err(Error::param(format!("unknown suite case {other}"))),
        };
        let (n, dim) = match &problem {
            Problem::LeastSquares(p) => (p.data().n(), p.data().dim()),
            Problem::Logistic(p) => (p.data().n(), p.data().dim()),
            Problem::QuarticLinear(p) => (p.offsets().len(), 1),
        };
        if n != doc.n || dim != doc.dim || doc.x_star.len() != dim {
            return Err(Error::param("suite document sizes are inconsistent"));
        }
        Ok(ObjectiveSuite {
            problem,
            n,
            dim,
            alpha: doc.alpha,
            beta: doc.beta,
            x_star: doc.x_star,
            f_star: doc.f_star,
            local_curvature: doc.local_curvature,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ObjectiveSuite::from_document(serde_json::from_str(text)?)
    }

    /// Agents relabeled so that new agent `k` is old agent `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut doc = self.to_document();
        if let Some(agents) = doc.agents.as_mut() {
            *agents = perm.iter().map(|&p| agents[p].clone()).collect();
        }
        if let Some(offsets) = doc.offsets.as_mut() {
            *offsets = perm.iter().map(|&p| offsets[p]).collect();
        }
        ObjectiveSuite::from_document(doc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteDocument {
    pub case: u8,
    pub n: usize,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<AgentData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
}

/// Case I: linear regression with `samples` points per agent in R^dim.
pub fn gen_case1(n: usize, samples: usize, dim: usize, seed: u64) -> Result<ObjectiveSuite> {
    ObjectiveSuite::least_squares(linear_regression_data(n, samples, dim, seed)?)
}

/// Case II: logistic regression with `samples` points per agent in R^dim.
pub fn gen_case2(n: usize, samples: usize, dim: usize, seed: u64) -> Result<ObjectiveSuite> {
    ObjectiveSuite::logistic(logistic_regression_data(n, samples, dim, seed)?)
}

/// Case III: scalar quartic–linear family with offsets summing to exactly zero.
///
/// Offsets are drawn uniformly on [−1, 1], centred, and the last one is set
/// to minus the sum of the others.
pub fn gen_case3(n: usize, seed: u64) -> Result<ObjectiveSuite> {
    if n == 0 {
        return Err(Error::param("need at least one agent"));
    }
    let mut rng = rng::stream(seed);
    let mut offsets: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mean = offsets.iter().sum::<f64>() / n as f64;
    offsets.iter_mut().for_each(|b| *b -= mean);
    let head: f64 = offsets[..n - 1].iter().sum();
    offsets[n - 1] = -head;
    ObjectiveSuite::quartic_linear(offsets)
}

/// Least-squares suite whose every local Hessian has spectrum in
/// [alpha, beta] with both endpoints attained.
///
/// Agent i's features are `diag(√(λ/2)) Qᵢᵀ` for a random orthogonal Qᵢ,
/// so 2 UᵢᵀUᵢ = Qᵢ diag(λ) Qᵢᵀ. Targets are standard normal.
pub fn gen_conditioned_quadratic(
    n: usize,
    dim: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<ObjectiveSuite> {
    if n == 0 || dim == 0 {
        return Err(Error::param("n and dimension must be positive"));
    }
    if !(alpha > 0.0 && alpha <= beta) || (dim == 1 && alpha != beta) {
        return Err(Error::param("need 0 < alpha <= beta (alpha = beta when dim = 1)"));
    }
    let mut rng = rng::stream(seed);
    let mut agents = Vec::with_capacity(n);
    for _ in 0..n {
        let gauss = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let q = gauss.qr().q();
        let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(alpha..=beta)).collect();
        spectrum[0] = alpha;
        spectrum[dim - 1] = beta;
        let features = (0..dim)
            .map(|k| {
                let scale = (spectrum[k] / 2.0).sqrt();
                (0..dim).map(|a| scale * q[(a, k)]).collect()
            })
            .collect();
        let targets: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        agents.push(AgentData { features, targets });
    }
    ObjectiveSuite::least_squares(RegressionData::new(agents)?)
}

/// Worst relative error of central finite differences against the gradient
/// oracle, ‖g_fd − g‖ / max(‖g‖, 1), over `trials` random (agent, point) draws.
///
/// Step h = 1e−6 (1 + ‖x‖). Quartic–linear points stay clear of |x| = 1.
pub fn finite_diff_check(suite: &ObjectiveSuite, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    let mut rng = rng::stream(seed);
    let dim = suite.dim();
    let spread = 1.0 + norm(suite.x_star());
    let mut worst = 0.0f64;
    let mut grad = vec![0.0; dim];
    for _ in 0..trials {
        let i = rng.random_range(0..suite.n());
        let x: Vec<f64> = match suite.problem() {
            Problem::QuarticLinear(_) => loop {
                let c: f64 = rng.random_range(-3.0..3.0);
                if (c.abs() - 1.0).abs() > 1e-3 {
                    break vec![c];
                }
            },
            _ => suite
                .x_star()
                .iter()
                .map(|&c| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    c + spread * z
                })
                .collect(),
        };
        suite.gradient_into(i, &x, &mut grad);
        let h = 1e-6 * (1.0 + norm(&x));
        let mut fd = vec![0.0; dim];
        let mut probe = x.clone();
        for k in 0..dim {
            probe[k] = x[k] + h;
            let up = suite.eval_value(i, &probe);
            probe[k] = x[k] - h;
            let down = suite.eval_value(i, &probe);
            probe[k] = x[k];
            fd[k] = (up - down) / (2.0 * h);
        }
        worst = worst.max(distance(&fd, &grad) / norm(&grad).max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_sample(u: f64, v: f64) -> RegressionData {
        RegressionData::new(vec![AgentData {
            features: vec![vec![u]],
            targets: vec![v],
        }])
        .unwrap()
    }

    #[test]
    fn single_sample_quadratic() {
        let s = ObjectiveSuite::least_squares(single_sample(1.0, 3.0)).unwrap();
        assert_eq!(s.x_star(), &[3.0]);
        assert_eq!(s.f_star(), 0.0);
        assert!((s.alpha() - 2.0).abs() < 1e-15 && (s.beta() - 2.0).abs() < 1e-15);
        assert_eq!(s.gradient(0, &[0.0]).unwrap(), vec![-6.0]);
        assert_eq!(s.value(0, &[1.0]).unwrap(), 4.0);
    }

    #[test]
    fn separable_logistic_rejected() {
        match ObjectiveSuite::logistic(single_sample(1.0, 1.0)) {
            Err(Error::DegenerateData(_)) => {}
            other => panic!("expected degenerate data, got {other:?}"),
        }
    }

    #[test]
    fn logistic_value_at_zero() {
        let s = gen_case2(5, 20, 3, 17).unwrap();
        for i in 0..5 {
            let v = s.value(i, &[0.0; 3]).unwrap();
            assert!((v - 20.0 * std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn logistic_oracle_precision() {
        let s = gen_case2(100, 20, 3, 5).unwrap();
        let g = s.global_gradient(s.x_star()).unwrap();
        assert!(norm(&g) <= LOGISTIC_ORACLE_TOLERANCE * s.beta(), "{}", norm(&g));
        assert!(s.local_curvature().unwrap() > 0.0);
        assert_eq!(s.alpha(), 0.0);
    }

    #[test]
    fn case1_optimality() {
        let s = gen_case1(30, 20, 4, 9).unwrap();
        let g = s.global_gradient(s.x_star()).unwrap();
        assert!(norm(&g) <= 1e-9 * s.beta() * (1.0 + norm(s.x_star())));
        assert!(s.alpha() > 0.0 && s.alpha() <= s.beta());
        // gap agrees with value difference away from x*
        let x = [0.3, -1.0, 2.0, 0.5];
        let direct = s.global_value(&x).unwrap() - s.f_star();
        assert!((s.objective_gap(&x) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn case3_offsets_cancel() {
        let s = gen_case3(100, 3).unwrap();
        if let Problem::QuarticLinear(p) = s.problem() {
            assert_eq!(p.offsets().iter().sum::<f64>(), 0.0);
        } else {
            unreachable!()
        }
        assert_eq!(s.global_gradient(&[2.0]).unwrap().len(), 1);
        assert!((s.global_gradient(&[2.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((s.global_value(&[0.5]).unwrap() - profile(0.5)).abs() < 1e-15);
        assert_eq!((s.x_star()[0], s.f_star(), s.beta(), s.alpha()), (0.0, 0.0, 3.0, 0.0));
    }

    #[test]
    fn domain_and_range_errors() {
        let s = gen_case3(4, 1).unwrap();
        assert!(matches!(s.value(0, &[f64::NAN]), Err(Error::Domain(_))));
        assert!(matches!(s.gradient(9, &[0.0]), Err(Error::Parameter(_))));
        assert!(matches!(s.global_value(&[0.0, 1.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn conditioned_quadratic_spectrum() {
        let s = gen_conditioned_quadratic(6, 3, 1.0, 4.0, 2).unwrap();
        assert!((s.alpha() - 1.0).abs() < 1e-12, "{}", s.alpha());
        assert!((s.beta() - 4.0).abs() < 1e-12, "{}", s.beta());
    }

    #[test]
    fn finite_differences_all_cases() {
        assert!(finite_diff_check(&gen_case1(10, 20, 3, 1).unwrap(), 200, 7).unwrap() <= 1e-6);
        assert!(finite_diff_check(&gen_case2(10, 20, 3, 1).unwrap(), 200, 7).unwrap() <= 1e-5);
        assert!(finite_diff_check(&gen_case3(10, 1).unwrap(), 200, 7).unwrap() <= 1e-6);
        assert!(finite_diff_check(&gen_case3(10, 1).unwrap(), 0, 7).is_err());
    }

    #[test]
    fn document_round_trip() {
        for suite in [
            gen_case1(4, 5, 2, 3).unwrap(),
            gen_case2(6, 20, 2, 3).unwrap(),
            gen_case3(4, 3).unwrap(),
        ] {
            let text = suite.to_json().unwrap();
            let back = ObjectiveSuite::from_json(&text).unwrap();
            assert_eq!(back.to_document(), suite.to_document());
            let x = vec![0.25; suite.dim()];
            assert_eq!(back.eval_global_value(&x), suite.eval_global_value(&x));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_case1(5, 20, 3, 44).unwrap().to_document();
        let b = gen_case1(5, 20, 3, 44).unwrap().to_document();
        assert_eq!(a, b);
    }
}
