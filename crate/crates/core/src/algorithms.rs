//! Gradient tracking and its two baselines, run as synchronous rounds.
//!
//! * gradient tracking: `x ← W x − η s`, then `s ← W s + ∇(new) − ∇(old)`;
//! * DGD: `x_i ← Σ_j w_ij x_j − η_t ∇f_i(x_i)` with a fixed or vanishing step;
//! * CGD: `x ← x − η ∇f(x)` on the global average.
//!
//! States are updated in place and keep the local gradients at the stored
//! iterate, so each round costs one gradient evaluation per agent.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{distance, norm, AgentMatrix};
use crate::objectives::ObjectiveSuite;
use crate::rng;
use crate::theory::ZVector;
use crate::weights::WeightMatrix;

/// Iterates larger than this multiple of the initial scale count as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Standard deviation of the default initial iterates.
pub const INITIAL_STD: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "gt")]
    GradientTracking,
    #[serde(rename = "dgd_fixed")]
    DgdFixed,
    #[serde(rename = "dgd_vanishing")]
    DgdVanishing,
    #[serde(rename = "cgd")]
    Centralized,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::GradientTracking,
        Algorithm::DgdFixed,
        Algorithm::DgdVanishing,
        Algorithm::Centralized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::GradientTracking => "gt",
            Algorithm::DgdFixed => "dgd_fixed",
            Algorithm::DgdVanishing => "dgd_vanishing",
            Algorithm::Centralized => "cgd",
        }
    }

    pub fn schedule(self, eta: f64) -> StepSchedule {
        match self {
            Algorithm::DgdVanishing => StepSchedule::Vanishing(eta),
            _ => StepSchedule::Fixed(eta),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown algorithm {s:?}")))
    }
}

/// Step size per round: constant, or `c / √(t+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "eta", rename_all = "snake_case")]
pub enum StepSchedule {
    Fixed(f64),
    Vanishing(f64),
}

impl StepSchedule {
    pub fn base(&self) -> f64 {
        match *self {
            StepSchedule::Fixed(eta) | StepSchedule::Vanishing(eta) => eta,
        }
    }

    /// Step used in the round that produces iterate `t + 1`.
    pub fn eta_at(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Fixed(eta) => eta,
            StepSchedule::Vanishing(c) => c / ((t + 1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        check_positive_step(self.base())
    }
}

fn check_positive_step(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("step size must be positive and finite, got {eta}")))
    }
}

fn check_start(suite: &ObjectiveSuite, x0: &AgentMatrix) -> Result<()> {
    if x0.rows() != suite.n() || x0.cols() != suite.dim() {
        return Err(Error::param(format!(
            "initial iterate is {}x{}, suite needs {}x{}",
            x0.rows(),
            x0.cols(),
            suite.n(),
            suite.dim()
        )));
    }
    if !x0.is_finite() {
        return Err(Error::param("initial iterate has non-finite entries"));
    }
    Ok(())
}

fn check_weights(w: &WeightMatrix, suite: &ObjectiveSuite) -> Result<()> {
    if w.n() != suite.n() {
        return Err(Error::param(format!("weight matrix is {0}x{0} for {1} agents", w.n(), suite.n())));
    }
    Ok(())
}

fn divergence_limit(x0: &AgentMatrix) -> f64 {
    DIVERGENCE_FACTOR * x0.max_abs().max(1.0)
}

fn check_bounded(x: &AgentMatrix, limit: f64, iteration: usize) -> Result<()> {
    if !x.is_finite() || x.max_abs() > limit {
        return Err(Error::Divergence {
            iteration,
            norm: x.frobenius_norm(),
        });
    }
    Ok(())
}

fn local_gradients(suite: &ObjectiveSuite, x: &AgentMatrix, out: &mut AgentMatrix) {
    for i in 0..x.rows() {
        suite.gradient_into(i, x.row(i), out.row_mut(i));
    }
}

/// Default initial iterates: i.i.d. Gaussian entries with mean 0, std 5.
pub fn gaussian_start(n: usize, dim: usize, seed: u64) -> AgentMatrix {
    let mut rng = rng::stream(seed);
    AgentMatrix::from_fn(n, dim, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        INITIAL_STD * z
    })
}

/// Gradient-tracking state: iterates, trackers and local gradients at the
/// current iterates.
#[derive(Clone, Debug)]
pub struct TrackingState {
    t: usize,
    x: AgentMatrix,
    s: AgentMatrix,
    grad: AgentMatrix,
    scratch: AgentMatrix,
    limit: f64,
}

impl TrackingState {
    /// Arbitrary state with trackers `s`; gradients are evaluated at `x`.
    pub fn from_parts(t: usize, x: AgentMatrix, s: AgentMatrix, suite: &ObjectiveSuite) -> Result<Self> {
        check_start(suite, &x)?;
        if s.rows() != x.rows() || s.cols() != x.cols() {
            return Err(Error::param("tracker and iterate shapes differ"));
        }
        let mut grad = AgentMatrix::zeros(x.rows(), x.cols());
        local_gradients(suite, &x, &mut grad);
        Ok(TrackingState {
            t,
            scratch: AgentMatrix::zeros(x.rows(), x.cols()),
            limit: divergence_limit(&x),
            x,
            s,
            grad,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &AgentMatrix {
        &self.x
    }

    pub fn s(&self) -> &AgentMatrix {
        &self.s
    }

    /// Local gradients ∇f_i(x_i) at the stored iterate.
    pub fn gradients(&self) -> &AgentMatrix {
        &self.grad
    }

    /// g = (1/n) Σ ∇f_i(x_i).
    pub fn mean_gradient(&self) -> Vec<f64> {
        self.grad.column_mean()
    }
}

/// t = 0, x = x0, s = ∇(0).
pub fn gt_init(suite: &ObjectiveSuite, x0: &AgentMatrix) -> Result<TrackingState> {
    check_start(suite, x0)?;
    let mut grad = AgentMatrix::zeros(x0.rows(), x0.cols());
    local_gradients(suite, x0, &mut grad);
    Ok(TrackingState {
        t: 0,
        x: x0.clone(),
        s: grad.clone(),
        scratch: AgentMatrix::zeros(x0.rows(), x0.cols()),
        limit: divergence_limit(x0),
        grad,
    })
}

/// One gradient-tracking round.
pub fn gt_step(state: &mut TrackingState, w: &WeightMatrix, eta: f64, suite: &ObjectiveSuite) -> Result<()> {
    check_positive_step(eta)?;
    check_weights(w, suite)?;
    gt_advance(state, w, eta, suite)
}

fn gt_advance(state: &mut TrackingState, w: &WeightMatrix, eta: f64, suite: &ObjectiveSuite) -> Result<()> {
    let TrackingState {
        t,
        x,
        s,
        grad,
        scratch,
        limit,
    } = state;
    w.mix_into(x, scratch);
    for (xv, (&wx, &sv)) in x.as_mut_slice().iter_mut().zip(scratch.as_slice().iter().zip(s.as_slice())) {
        *xv = wx - eta * sv;
    }
    check_bounded(x, *limit, *t + 1)?;

    // (W s − ∇old) + ∇new: with n = 1 this leaves s equal to ∇new exactly
    w.mix_into(s, scratch);
    for (m, &g) in scratch.as_mut_slice().iter_mut().zip(grad.as_slice()) {
        *m -= g;
    }
    local_gradients(suite, x, grad);
    for (sv, (&m, &g)) in s.as_mut_slice().iter_mut().zip(scratch.as_slice().iter().zip(grad.as_slice())) {
        *sv = m + g;
    }
    check_bounded(s, f64::INFINITY, *t + 1)?;
    *t += 1;
    Ok(())
}

/// DGD state: iterates and local gradients at them.
#[derive(Clone, Debug)]
pub struct ConsensusState {
    t: usize,
    x: AgentMatrix,
    grad: AgentMatrix,
    scratch: AgentMatrix,
    limit: f64,
}

impl ConsensusState {
    pub fn new(suite: &ObjectiveSuite, x0: &AgentMatrix) -> Result<Self> {
        check_start(suite, x0)?;
        let mut grad = AgentMatrix::zeros(x0.rows(), x0.cols());
        local_gradients(suite, x0, &mut grad);
        Ok(ConsensusState {
            t: 0,
            x: x0.clone(),
            grad,
            scratch: AgentMatrix::zeros(x0.rows(), x0.cols()),
            limit: divergence_limit(x0),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &AgentMatrix {
        &self.x
    }

    pub fn gradients(&self) -> &AgentMatrix {
        &self.grad
    }
}

/// One DGD round with step `schedule.eta_at(t)`.
pub fn dgd_step(
    state: &mut ConsensusState,
    w: &WeightMatrix,
    schedule: StepSchedule,
    suite: &ObjectiveSuite,
) -> Result<()> {
    schedule.validate()?;
    check_weights(w, suite)?;
    dgd_advance(state, w, schedule, suite)
}

fn dgd_advance(state: &mut ConsensusState, w: &WeightMatrix, schedule: StepSchedule, suite: &ObjectiveSuite) -> Result<()> {
    let eta = schedule.eta_at(state.t);
    w.mix_into(&state.x, &mut state.scratch);
    for (xv, (&wx, &g)) in state
        .x
        .as_mut_slice()
        .iter_mut()
        .zip(state.scratch.as_slice().iter().zip(state.grad.as_slice()))
    {
        *xv = wx - eta * g;
    }
    check_bounded(&state.x, state.limit, state.t + 1)?;
    local_gradients(suite, &state.x, &mut state.grad);
    state.t += 1;
    Ok(())
}

/// Centralized gradient descent on f = (1/n) Σ f_i.
#[derive(Clone, Debug)]
pub struct CentralState {
    t: usize,
    x: Vec<f64>,
    grad: Vec<f64>,
    limit: f64,
}

impl CentralState {
    pub fn new(suite: &ObjectiveSuite, x0: &[f64]) -> Result<Self> {
        suite.global_gradient(x0)?;
        let mut grad = vec![0.0; x0.len()];
        suite.global_gradient_into(x0, &mut grad);
        Ok(CentralState {
            t: 0,
            x: x0.to_vec(),
            grad,
            limit: DIVERGENCE_FACTOR * x0.iter().fold(1.0f64, |m, v| m.max(v.abs())),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// ∇f at the stored iterate.
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// One round `x ← x − η ∇f(x)`; η = 0 is allowed and leaves x unchanged.
    pub fn step(&mut self, eta: f64, suite: &ObjectiveSuite) -> Result<()> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::param(format!("step size must be non-negative and finite, got {eta}")));
        }
        for (xv, g) in self.x.iter_mut().zip(&self.grad) {
            *xv -= eta * g;
        }
        if self.x.iter().any(|v| !v.is_finite() || v.abs() > self.limit) {
            return Err(Error::Divergence {
                iteration: self.t + 1,
                norm: norm(&self.x),
            });
        }
        suite.global_gradient_into(&self.x, &mut self.grad);
        self.t += 1;
        Ok(())
    }
}

/// Single centralized step from `x`.
pub fn cgd_step(x: &[f64], eta: f64, suite: &ObjectiveSuite) -> Result<Vec<f64>> {
    let mut state = CentralState::new(suite, x)?;
    state.step(eta, suite)?;
    Ok(state.x)
}

/// Metrics of one round.
///
/// `tracking_err` is present for gradient tracking only. For CGD every agent
/// is taken to hold the centralized iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub t: usize,
    /// (1/n) Σ_i [f(x_i) − f*].
    pub avg_obj_err: f64,
    /// (1/n) Σ_i [f(x̂_i) − f*] for the running averages x̂_i.
    pub runavg_obj_err: f64,
    /// ‖x − 1 x̄‖.
    pub consensus_err: f64,
    /// ‖s − 1 g‖.
    pub tracking_err: Option<f64>,
    /// √n ‖x̄ − x*‖.
    pub dist_to_opt: f64,
    /// ‖g‖ with g = (1/n) Σ ∇f_i(x_i).
    pub avg_grad_norm: f64,
}

impl Metrics {
    pub fn z(&self) -> Option<ZVector> {
        self.tracking_err.map(|tracking| ZVector {
            tracking,
            consensus: self.consensus_err,
            distance: self.dist_to_opt,
        })
    }
}

/// Recorded run: the initial snapshot (t = 0) and one row per round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    pub schedule: StepSchedule,
    pub initial: Metrics,
    pub rows: Vec<Metrics>,
}

impl Trajectory {
    /// Snapshot at t = 0 followed by the rows, so that index k is round k.
    pub fn all(&self) -> impl Iterator<Item = &Metrics> {
        std::iter::once(&self.initial).chain(&self.rows)
    }

    pub fn last(&self) -> &Metrics {
        self.rows.last().unwrap_or(&self.initial)
    }

    /// z(k) for k = 0..=T (gradient tracking only).
    pub fn z_vectors(&self) -> Option<Vec<ZVector>> {
        self.all().map(Metrics::z).collect()
    }
}

/// Mean over agents of f(x_i) − f*.
pub fn average_objective_error(suite: &ObjectiveSuite, x: &AgentMatrix) -> f64 {
    (0..x.rows()).map(|i| suite.objective_gap(x.row(i))).sum::<f64>() / x.rows() as f64
}

struct Recorder {
    runavg: AgentMatrix,
    count: usize,
}

impl Recorder {
    fn new(x0: &AgentMatrix) -> Self {
        Recorder {
            runavg: x0.clone(),
            count: 0,
        }
    }

    /// Folds x(t) into x̂(t) = (1/t) Σ_{k=1..t} x(k); x̂(0) is taken as x(0).
    fn absorb(&mut self, x: &AgentMatrix) {
        self.count += 1;
        let t = self.count as f64;
        for (a, &v) in self.runavg.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *a = ((t - 1.0) * *a + v) / t;
        }
    }

    fn metrics(
        &self,
        t: usize,
        suite: &ObjectiveSuite,
        x: &AgentMatrix,
        mean_grad: &[f64],
        tracking_err: Option<f64>,
    ) -> Metrics {
        let agents = suite.n() as f64;
        Metrics {
            t,
            avg_obj_err: average_objective_error(suite, x),
            runavg_obj_err: average_objective_error(suite, &self.runavg),
            consensus_err: x.deviation_norm(),
            tracking_err,
            dist_to_opt: agents.sqrt() * distance(&x.column_mean(), suite.x_star()),
            avg_grad_norm: norm(mean_grad),
        }
    }
}

/// Runs `iterations` rounds from `x0` and records every metric each round.
///
/// `eta` is the fixed step, or the constant c of `c / √(t+1)` for
/// [`Algorithm::DgdVanishing`]. CGD starts from the average of the rows of
/// `x0`.
pub fn run(
    algorithm: Algorithm,
    suite: &ObjectiveSuite,
    w: &WeightMatrix,
    eta: f64,
    iterations: usize,
    x0: &AgentMatrix,
) -> Result<Trajectory> {
    if iterations == 0 {
        return Err(Error::param("need at least one iteration"));
    }
    check_start(suite, x0)?;
    check_weights(w, suite)?;
    let schedule = algorithm.schedule(eta);
    if algorithm == Algorithm::Centralized {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::param(format!("step size must be non-negative and finite, got {eta}")));
        }
    } else {
        schedule.validate()?;
    }

    let mut rows = Vec::with_capacity(iterations);
    let initial;
    match algorithm {
        Algorithm::GradientTracking => {
            let mut state = gt_init(suite, x0)?;
            let mut rec = Recorder::new(x0);
            let tracking = |st: &TrackingState| st.s.distance_to_row(&st.mean_gradient());
            initial = rec.metrics(0, suite, &state.x, &state.mean_gradient(), Some(tracking(&state)));
            for t in 1..=iterations {
                gt_advance(&mut state, w, eta, suite)?;
                rec.absorb(&state.x);
                let g = state.mean_gradient();
                rows.push(rec.metrics(t, suite, &state.x, &g, Some(tracking(&state))));
            }
        }
        Algorithm::DgdFixed | Algorithm::DgdVanishing => {
            let mut state = ConsensusState::new(suite, x0)?;
            let mut rec = Recorder::new(x0);
            initial = rec.metrics(0, suite, &state.x, &state.grad.column_mean(), None);
            for t in 1..=iterations {
                dgd_advance(&mut state, w, schedule, suite)?;
                rec.absorb(&state.x);
                rows.push(rec.metrics(t, suite, &state.x, &state.grad.column_mean(), None));
            }
        }
        Algorithm::Centralized => {
            let start = x0.column_mean();
            let mut state = CentralState::new(suite, &start)?;
            let shared = |x: &[f64]| AgentMatrix::repeat_row(1, x);
            let mut rec = Recorder::new(&shared(&start));
            initial = rec.metrics(0, suite, &shared(&state.x), &state.grad, None);
            for t in 1..=iterations {
                state.step(eta, suite)?;
                let x = shared(&state.x);
                rec.absorb(&x);
                rows.push(rec.metrics(t, suite, &x, &state.grad, None));
            }
        }
    }
    Ok(Trajectory {
        algorithm,
        schedule,
        initial,
        rows,
    })
}

/// First round t ≥ 1 at which gradient tracking's average objective error
/// is at most `target`, or `None` if `max_iterations` rounds do not suffice.
pub fn gt_iterations_to_target(
    suite: &ObjectiveSuite,
    w: &WeightMatrix,
    eta: f64,
    x0: &AgentMatrix,
    target: f64,
    max_iterations: usize,
) -> Result<Option<usize>> {
    check_positive_step(eta)?;
    check_weights(w, suite)?;
    let mut state = gt_init(suite, x0)?;
    for t in 1..=max_iterations {
        gt_advance(&mut state, w, eta, suite)?;
        if average_objective_error(suite, &state.x) <= target {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
