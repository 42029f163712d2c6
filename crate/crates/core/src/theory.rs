//! Convergence-rate objects for gradient tracking and checks of the proof
//! inequalities against live states.
//!
//! All bound evaluators are plain formulas over measured initial norms; they
//! never run the algorithm themselves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithms::TrackingState;
use crate::error::{Error, Result};
use crate::matrix::{distance, dot};
use crate::objectives::ObjectiveSuite;

/// Multiplicative slack used by the inequality diagnostics.
pub const INEQUALITY_SLACK: f64 = 1e-8;

/// 3×3 linear system bounding one round of gradient tracking:
///
/// ```text
/// [ σ + βη   β(βη + 2)   β²η ]
/// [ η        σ           0   ]
/// [ 0        βη          λ   ]     λ = max(|1 − αη|, |1 − βη|)
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMatrix {
    pub g: [[f64; 3]; 3],
    pub lambda: f64,
    pub rho: f64,
}

impl ConvergenceMatrix {
    /// G z.
    pub fn apply(&self, z: &ZVector) -> ZVector {
        let v = z.as_array();
        let row = |r: usize| self.g[r].iter().zip(&v).map(|(a, b)| a * b).sum();
        ZVector {
            tracking: row(0),
            consensus: row(1),
            distance: row(2),
        }
    }
}

fn check_constants(alpha: f64, beta: f64, sigma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= beta && beta.is_finite()) {
        return Err(Error::param(format!("need 0 < alpha <= beta, got alpha = {alpha}, beta = {beta}")));
    }
    check_sigma(sigma)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::param(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be positive and finite, got {beta}")));
    }
    Ok(())
}

fn template(eta: f64, alpha: f64, beta: f64, sigma: f64) -> ([[f64; 3]; 3], f64) {
    let lambda = (1.0 - alpha * eta).abs().max((1.0 - beta * eta).abs());
    (
        [
            [sigma + beta * eta, beta * (eta * beta + 2.0), eta * beta * beta],
            [eta, sigma, 0.0],
            [0.0, eta * beta, lambda],
        ],
        lambda,
    )
}

pub fn build_g(eta: f64, alpha: f64, beta: f64, sigma: f64) -> Result<ConvergenceMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::OutOfRange(format!("step size must be positive, got {eta}")));
    }
    check_constants(alpha, beta, sigma)?;
    let (g, lambda) = template(eta, alpha, beta, sigma);
    Ok(ConvergenceMatrix {
        rho: spectral_radius_cubic(&g),
        g,
        lambda,
    })
}

/// Monic characteristic polynomial det(ζI − A) = ζ³ + c2 ζ² + c1 ζ + c0.
fn characteristic(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    [-trace, minors, -det]
}

/// Largest real root of a monic cubic, by bisection on a bracket where the
/// cubic changes sign exactly once.
fn largest_real_root([c2, c1, c0]: [f64; 3]) -> f64 {
    let p = |z: f64| ((z + c2) * z + c1) * z + c0;
    let bound = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
    // critical points of 3ζ² + 2 c2 ζ + c1
    let disc = c2 * c2 - 3.0 * c1;
    let (mut lo, mut hi) = if disc > 0.0 {
        let root = disc.sqrt();
        let (left, right) = ((-c2 - root) / 3.0, (-c2 + root) / 3.0);
        if p(right) <= 0.0 {
            (right, bound)
        } else {
            (-bound, left)
        }
    } else {
        (-bound, bound)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Spectral radius from the characteristic cubic: the largest real root is
/// located by bisection, the remaining quadratic factor gives the other two.
pub fn spectral_radius_cubic(a: &[[f64; 3]; 3]) -> f64 {
    let c = characteristic(a);
    let r = largest_real_root(c);
    // ζ³ + c2 ζ² + c1 ζ + c0 = (ζ − r)(ζ² + d1 ζ + d0)
    let d1 = c[0] + r;
    let d0 = c[1] + r * d1;
    let disc = d1 * d1 - 4.0 * d0;
    let other = if disc < 0.0 {
        d0.max(0.0).sqrt()
    } else {
        let root = disc.sqrt();
        ((-d1 - root) / 2.0).abs().max(((-d1 + root) / 2.0).abs())
    };
    r.abs().max(other)
}

/// Spectral radius of an irreducible nonnegative matrix by power iteration
/// (repeated squaring), bracketed with the Collatz–Wielandt bounds.
///
/// Returns `(lower, upper)`; the radius lies between them.
pub fn spectral_radius_power(a: &[[f64; 3]; 3]) -> (f64, f64) {
    let mul = |x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]| {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    };
    let mut m = *a;
    for _ in 0..64 {
        m = mul(&m, &m);
        let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return (0.0, 0.0);
        }
        m.iter_mut().flatten().for_each(|v| *v /= scale);
    }
    let v: Vec<f64> = m.iter().map(|row| row.iter().sum()).collect();
    let ratios: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|k| a[i][k] * v[k]).sum::<f64>() / v[i])
        .collect();
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lower, upper)
}

/// Upper bound on ρ(G(η)) valid for 0 < η < 1/β:
/// max(1 − αη/2, σ + 5 √(βη) √(β/α)).
pub fn rate_bound(eta: f64, alpha: f64, beta: f64, sigma: f64) -> Result<f64> {
    check_constants(alpha, beta, sigma)?;
    if !(eta > 0.0 && eta < 1.0 / beta) {
        return Err(Error::OutOfRange(format!("rate bound holds for 0 < eta < 1/beta, got {eta}")));
    }
    Ok((1.0 - alpha * eta / 2.0).max(sigma + 5.0 * (eta * beta).sqrt() * (beta / alpha).sqrt()))
}

/// Step-size rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// (α/β²)((1 − σ)/6)²; guarantees the rate bound is below one.
    StronglyConvex,
    /// (1 − σ)²/(160β), the largest step covered by the O(1/t) bounds.
    Convex,
    /// (α/β²)(1/(426U²))² for lazy Metropolis weights, U ≥ n.
    #[serde(rename = "metropolis_sc")]
    MetropolisStronglyConvex { upper_bound: usize },
    /// 1/(160β(71U²)²) for lazy Metropolis weights, U ≥ n.
    #[serde(rename = "metropolis_cvx")]
    MetropolisConvex { upper_bound: usize },
    /// Minimizer of ρ(G(η)) over 0 < η < 1/β.
    RateOptimal,
}

impl StepRule {
    pub fn name(&self) -> &'static str {
        match self {
            StepRule::StronglyConvex => "strongly_convex",
            StepRule::Convex => "convex",
            StepRule::MetropolisStronglyConvex { .. } => "metropolis_sc",
            StepRule::MetropolisConvex { .. } => "metropolis_cvx",
            StepRule::RateOptimal => "rate_optimal",
        }
    }

    /// Parses a rule name; the Metropolis rules take `upper_bound`.
    pub fn parse(name: &str, upper_bound: Option<usize>) -> Result<Self> {
        let need_bound = || upper_bound.ok_or_else(|| Error::param(format!("step rule {name} needs an upper bound U on n")));
        Ok(match name {
            "strongly_convex" => StepRule::StronglyConvex,
            "convex" => StepRule::Convex,
            "metropolis_sc" => StepRule::MetropolisStronglyConvex {
                upper_bound: need_bound()?,
            },
            "metropolis_cvx" => StepRule::MetropolisConvex {
                upper_bound: need_bound()?,
            },
            "rate_optimal" => StepRule::RateOptimal,
            other => return Err(Error::param(format!("unknown step rule {other:?}"))),
        })
    }

    pub fn needs_strong_convexity(&self) -> bool {
        matches!(
            self,
            StepRule::StronglyConvex | StepRule::MetropolisStronglyConvex { .. } | StepRule::RateOptimal
        )
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn recommend_eta(rule: StepRule, alpha: f64, beta: f64, sigma: f64) -> Result<f64> {
    check_beta(beta)?;
    check_sigma(sigma)?;
    if rule.needs_strong_convexity() {
        if !(alpha > 0.0) {
            return Err(Error::param(format!("step rule {rule} needs alpha > 0")));
        }
        check_constants(alpha, beta, sigma)?;
    }
    let gap = 1.0 - sigma;
    Ok(match rule {
        StepRule::StronglyConvex => alpha / (beta * beta) * (gap / 6.0).powi(2),
        StepRule::Convex => gap * gap / (160.0 * beta),
        StepRule::MetropolisStronglyConvex { upper_bound } => {
            let u = check_upper_bound(upper_bound)?;
            alpha / (beta * beta) * (1.0 / (426.0 * u * u)).powi(2)
        }
        StepRule::MetropolisConvex { upper_bound } => {
            let u = check_upper_bound(upper_bound)?;
            1.0 / (160.0 * beta * (71.0 * u * u).powi(2))
        }
        StepRule::RateOptimal => rate_optimal_eta(alpha, beta, sigma)?,
    })
}

fn check_upper_bound(u: usize) -> Result<f64> {
    if u == 0 {
        return Err(Error::param("upper bound U must be positive"));
    }
    Ok(u as f64)
}

/// Log-spaced scan of (0, 1/β) followed by golden-section refinement.
fn rate_optimal_eta(alpha: f64, beta: f64, sigma: f64) -> Result<f64> {
    const GRID: usize = 400;
    let top = (1.0 - 1e-9) / beta;
    let bottom = 1e-14 / beta;
    let (lb, lt) = (bottom.ln(), top.ln());
    let at = |k: usize| (lb + (lt - lb) * k as f64 / (GRID - 1) as f64).exp();
    let rho = |eta: f64| {
        let (g, _) = template(eta, alpha, beta, sigma);
        spectral_radius_cubic(&g)
    };
    let best = (0..GRID)
        .min_by(|&a, &b| rho(at(a)).total_cmp(&rho(at(b))))
        .unwrap_or(0);
    let (mut a, mut b) = (at(best.saturating_sub(1)).ln(), at((best + 1).min(GRID - 1)).ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (rho(c.exp()), rho(d.exp()));
    for _ in 0..120 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rho(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rho(d.exp());
        }
    }
    let eta = (0.5 * (a + b)).exp();
    if rho(eta) >= 1.0 {
        return Err(Error::Precondition(format!(
            "no step in (0, 1/beta) gives a contracting rate matrix (best rho = {})",
            rho(eta)
        )));
    }
    Ok(eta)
}

/// (‖s − 1g‖, ‖x − 1x̄‖, √n ‖x̄ − x*‖).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZVector {
    pub tracking: f64,
    pub consensus: f64,
    pub distance: f64,
}

impl ZVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.tracking, self.consensus, self.distance]
    }
}

pub fn z_vector(state: &TrackingState, suite: &ObjectiveSuite) -> ZVector {
    let x = state.x();
    ZVector {
        tracking: state.s().distance_to_row(&state.mean_gradient()),
        consensus: x.deviation_norm(),
        distance: (x.rows() as f64).sqrt() * distance(&x.column_mean(), suite.x_star()),
    }
}

/// For k ≥ 1, whether z(k) ≤ (1 + slack) G z(k − 1) in every component.
pub fn check_z_recursion(zs: &[ZVector], g: &ConvergenceMatrix) -> Vec<bool> {
    zs.windows(2)
        .map(|w| {
            let bound = g.apply(&w[0]).as_array();
            w[1]
                .as_array()
                .iter()
                .zip(bound)
                .all(|(&z, b)| z <= (1.0 + INEQUALITY_SLACK) * b)
        })
        .collect()
}

/// Initial-condition norms entering the O(1/t) bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    /// ‖x̄(0) − x*‖.
    pub mean_distance: f64,
    /// ‖s(0) − 1 g(0)‖.
    pub tracking: f64,
    /// ‖x(0) − 1 x̄(0)‖.
    pub consensus: f64,
    pub n: usize,
}

impl InitialNorms {
    pub fn measure(state: &TrackingState, suite: &ObjectiveSuite) -> Self {
        let z = z_vector(state, suite);
        let n = state.x().rows();
        InitialNorms {
            mean_distance: z.distance / (n as f64).sqrt(),
            tracking: z.tracking,
            consensus: z.consensus,
            n,
        }
    }
}

/// Largest step covered by the O(1/t) bounds, (1 − σ)²/(160β).
pub fn sublinear_step_limit(beta: f64, sigma: f64) -> Result<f64> {
    recommend_eta(StepRule::Convex, 0.0, beta, sigma)
}

/// Bound on the running-average objective error (1/n) Σ [f(x̂_i(t+1)) − f*]:
///
/// (1/(t+1)) { ‖x̄(0) − x*‖²/(2η)
///             + 36β/(1−σ)² [ ‖s(0) − 1g(0)‖/(β√n) + 2‖x(0) − 1x̄(0)‖/√n ]² }
pub fn objective_error_bound(t: usize, eta: f64, beta: f64, sigma: f64, init: &InitialNorms) -> Result<f64> {
    let limit = sublinear_step_limit(beta, sigma)?;
    if !(eta > 0.0 && eta <= limit * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange(format!(
            "objective error bound needs 0 < eta <= {limit:e}, got {eta:e}"
        )));
    }
    let root_n = (init.n as f64).sqrt();
    let spread = init.tracking / (beta * root_n) + 2.0 * init.consensus / root_n;
    let gap = 1.0 - sigma;
    Ok((init.mean_distance.powi(2) / (2.0 * eta) + 36.0 * beta / (gap * gap) * spread * spread) / (t as f64 + 1.0))
}

/// Bound on min_{0≤k≤t} ‖x(k) − 1x̄(k)‖² for t ≥ 1:
///
/// (1/t) { 1740/(1−σ)⁴ [ ‖s(0) − 1g(0)‖/β + 2‖x(0) − 1x̄(0)‖ ]²
///         + 24/(1−σ)² · n ‖x̄(0) − x*‖² }
pub fn consensus_error_bound(t: usize, beta: f64, sigma: f64, init: &InitialNorms) -> Result<f64> {
    check_beta(beta)?;
    check_sigma(sigma)?;
    if t == 0 {
        return Err(Error::param("consensus error bound needs t >= 1"));
    }
    let gap = 1.0 - sigma;
    let spread = init.tracking / beta + 2.0 * init.consensus;
    let offset = init.n as f64 * init.mean_distance.powi(2);
    Ok((1740.0 / gap.powi(4) * spread * spread + 24.0 / (gap * gap) * offset) / t as f64)
}

/// Constants of the consensus-error envelope
/// ‖x(k) − 1x̄(k)‖ ≤ A₁ θᵏ + A₂ Σ_{ℓ<k} θ^{k−1−ℓ} ‖g(ℓ)‖.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub a1: f64,
    pub a2: f64,
    pub theta: f64,
}

impl EnvelopeConstants {
    pub fn new(eta: f64, beta: f64, sigma: f64, init: &InitialNorms) -> Result<Self> {
        check_beta(beta)?;
        check_sigma(sigma)?;
        Ok(EnvelopeConstants {
            a1: init.tracking / beta + 2.0 * init.consensus,
            a2: eta * (init.n as f64).sqrt(),
            theta: (1.0 + sigma) / 2.0,
        })
    }

    /// Envelope values for k = 0..len, from ‖g(ℓ)‖ for ℓ = 0..len−1.
    pub fn envelope(&self, grad_norms: &[f64], len: usize) -> Result<Vec<f64>> {
        if len > 0 && grad_norms.len() < len - 1 {
            return Err(Error::param("need a gradient norm for every round before the last"));
        }
        let mut out = Vec::with_capacity(len);
        let (mut decay, mut driven) = (1.0, 0.0);
        for k in 0..len {
            if k > 0 {
                driven = self.theta * driven + grad_norms[k - 1];
                decay *= self.theta;
            }
            out.push(self.a1 * decay + self.a2 * driven);
        }
        Ok(out)
    }
}

/// Stepwise envelope check of the consensus errors ‖x(k) − 1x̄(k)‖,
/// k = 0..len, with multiplicative slack.
pub fn consensus_envelope(consensus: &[f64], consts: &EnvelopeConstants, grad_norms: &[f64]) -> Result<Vec<bool>> {
    let env = consts.envelope(grad_norms, consensus.len())?;
    Ok(consensus
        .iter()
        .zip(env)
        .map(|(&c, e)| c <= (1.0 + INEQUALITY_SLACK) * e)
        .collect())
}

/// ‖s̄ − g‖: trackers average to the average gradient.
pub fn tracker_mean_gap(state: &TrackingState) -> f64 {
    distance(&state.s().column_mean(), &state.mean_gradient())
}

/// ‖x̄(t+1) − (x̄(t) − η s̄(t))‖: the average follows a plain gradient-type step.
pub fn mean_update_gap(prev: &TrackingState, next: &TrackingState, eta: f64) -> f64 {
    let predicted: Vec<f64> = prev
        .x()
        .column_mean()
        .iter()
        .zip(prev.s().column_mean())
        .map(|(x, s)| x - eta * s)
        .collect();
    distance(&next.x().column_mean(), &predicted)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= (1.0 + slack) * self.rhs
    }
}

/// Smoothness consequences across one round:
/// `local`  ‖∇(t) − ∇(t−1)‖ ≤ β ‖x(t) − x(t−1)‖,
/// `mean`   ‖g(t) − g(t−1)‖ ≤ (β/√n) ‖x(t) − x(t−1)‖,
/// `offset` ‖g(t) − ∇f(x̄(t))‖ ≤ (β/√n) ‖x(t) − 1x̄(t)‖.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothnessChecks {
    pub local: InequalityCheck,
    pub mean: InequalityCheck,
    pub offset: InequalityCheck,
}

impl SmoothnessChecks {
    pub fn holds(&self, slack: f64) -> bool {
        self.local.holds(slack) && self.mean.holds(slack) && self.offset.holds(slack)
    }
}

pub fn smoothness_checks(prev: &TrackingState, next: &TrackingState, suite: &ObjectiveSuite) -> SmoothnessChecks {
    let beta = suite.beta();
    let scaled = beta / (next.x().rows() as f64).sqrt();
    let step = next.x().distance(prev.x());
    let mean_x = next.x().column_mean();
    let mut at_mean = vec![0.0; mean_x.len()];
    suite.global_gradient_into(&mean_x, &mut at_mean);
    SmoothnessChecks {
        local: InequalityCheck {
            lhs: next.gradients().distance(prev.gradients()),
            rhs: beta * step,
        },
        mean: InequalityCheck {
            lhs: distance(&next.mean_gradient(), &prev.mean_gradient()),
            rhs: scaled * step,
        },
        offset: InequalityCheck {
            lhs: distance(&next.mean_gradient(), &at_mean),
            rhs: scaled * next.x().deviation_norm(),
        },
    }
}

/// Slack in the co-coercivity inequality of an α-strongly convex, β-smooth f:
///
/// ⟨∇f(x) − ∇f(y), x − y⟩ − [αβ/(α+β) ‖x − y‖² + 1/(α+β) ‖∇f(x) − ∇f(y)‖²],
///
/// non-negative up to rounding.
pub fn coercivity_slack(suite: &ObjectiveSuite, x: &[f64], y: &[f64]) -> Result<f64> {
    let (alpha, beta) = (suite.alpha(), suite.beta());
    let gx = suite.global_gradient(x)?;
    let gy = suite.global_gradient(y)?;
    let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(dot(&dg, &dx) - (alpha * beta / (alpha + beta) * dot(&dx, &dx) + dot(&dg, &dg) / (alpha + beta)))
}

/// `(‖x⁺ − x*‖ / ‖x − x*‖, λ)` for the gradient step x⁺ = x − η∇f(x), with
/// λ = max(|1 − ηα|, |1 − ηβ|) the guaranteed contraction for 0 < η < 2/β.
pub fn descent_contraction(suite: &ObjectiveSuite, x: &[f64], eta: f64) -> Result<(f64, f64)> {
    let g = suite.global_gradient(x)?;
    let next: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
    let before = distance(x, suite.x_star());
    if before == 0.0 {
        return Err(Error::param("point coincides with the minimizer"));
    }
    let lambda = (1.0 - eta * suite.alpha()).abs().max((1.0 - eta * suite.beta()).abs());
    Ok((distance(&next, suite.x_star()) / before, lambda))
}

/// Least-squares slope of ln(values[k]) against k; `None` for fewer than two
/// points or any non-positive value.
pub fn log_linear_slope(values: &[f64]) -> Option<f64> {
    if values.len() < 2 || values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let n = values.len() as f64;
    let mean_k = (n - 1.0) / 2.0;
    let mean_y = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let dk = k as f64 - mean_k;
        num += dk * (v.ln() - mean_y);
        den += dk * dk;
    }
    Some(num / den)
}

/// Row-wise running minimum of squared consensus errors, min_{k≤t} ‖x(k) − 1x̄(k)‖².
pub fn running_min_squared(consensus: &[f64]) -> Vec<f64> {
    consensus
        .iter()
        .scan(f64::INFINITY, |m, &c| {
            *m = m.min(c * c);
            Some(*m)
        })
        .collect()
}
