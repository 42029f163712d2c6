//! Config-driven experiments: assemble graph, weights, suite and initial
//! iterates from a flat JSON config, then run, compare, scale or report
//! bounds. Results come back as CSV/JSON text; writing files is left to the
//! caller.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    gaussian_start, gt_init, gt_iterations_to_target, run, Algorithm, Metrics, StepSchedule, Trajectory,
};
use crate::error::{Error, Result};
use crate::graph::{gen_complete, gen_erdos_renyi, gen_path, gen_random_regular, Graph};
use crate::matrix::AgentMatrix;
use crate::objectives::{gen_case1, gen_case2, gen_case3, ObjectiveSuite};
use crate::rng::derive_seed;
use crate::theory::{
    build_g, consensus_error_bound, log_linear_slope, objective_error_bound, rate_bound, recommend_eta,
    running_min_squared, spectral_radius_power, sublinear_step_limit, InitialNorms, StepRule,
};
use crate::weights::{build_laplacian_weights, build_lazy_metropolis, metropolis_sigma_upper_bound, sigma, WeightMatrix};

pub const DEFAULT_TARGET_ERROR: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi,
    RandomRegular,
    Path,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    Laplacian,
    LazyMetropolis,
}

/// Flat experiment config. Graph, data and initial iterates have
/// independent seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub graph: GraphModel,
    pub n: usize,
    /// Edge probability for Erdős–Rényi graphs.
    pub p: f64,
    /// Degree for random regular graphs.
    pub degree: usize,
    pub graph_seed: u64,
    /// Edge-list file used instead of generating a graph.
    pub graph_file: Option<PathBuf>,
    pub weights: WeightMethod,
    /// 1 least squares, 2 logistic, 3 quartic–linear.
    pub case: u8,
    /// Samples per agent (cases 1–2).
    pub samples: usize,
    /// Dimension (cases 1–2).
    pub dim: usize,
    pub data_seed: u64,
    /// Suite JSON used instead of generating data.
    pub suite_file: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    /// Explicit step size shared by gt, dgd_fixed and cgd.
    pub eta: Option<f64>,
    /// Step rule used when `eta` is absent.
    pub step_rule: Option<String>,
    /// Upper bound U on n for the Metropolis step rules.
    pub upper_bound: Option<usize>,
    /// Constant c of the vanishing DGD step c/√(t+1); default 1/β.
    pub vanishing_constant: Option<f64>,
    /// Rounds per run; default 10⁴ for cases 1–2 and 10⁵ for case 3.
    pub iterations: Option<usize>,
    pub init_seed: u64,
    pub target_error: f64,
    /// Graph sizes for the scaling study.
    pub sizes: Vec<usize>,
    pub max_iterations: usize,
    /// Constants for `bounds` without assembling a graph and suite.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphModel::ErdosRenyi,
            n: 100,
            p: 0.3,
            degree: 3,
            graph_seed: 1,
            graph_file: None,
            weights: WeightMethod::Laplacian,
            case: 1,
            samples: 20,
            dim: 3,
            data_seed: 2,
            suite_file: None,
            algorithms: vec![Algorithm::GradientTracking],
            eta: None,
            step_rule: None,
            upper_bound: None,
            vanishing_constant: None,
            iterations: None,
            init_seed: 3,
            target_error: DEFAULT_TARGET_ERROR,
            sizes: vec![50, 100, 150, 200, 250, 300, 350, 400, 450, 500],
            max_iterations: DEFAULT_MAX_ITERATIONS,
            alpha: None,
            beta: None,
            sigma: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `key=value` seed override: `graph_seed`, `data_seed` or `init_seed`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| config_err(format!("seed override {spec:?} is not key=value")))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| config_err(format!("seed override {spec:?} needs an unsigned integer")))?;
        match key.trim() {
            "graph_seed" => self.graph_seed = value,
            "data_seed" => self.data_seed = value,
            "init_seed" => self.init_seed = value,
            other => return Err(config_err(format!("unknown seed {other:?}"))),
        }
        Ok(())
    }

    pub fn iterations(&self) -> usize {
        self.iterations
            .unwrap_or(if self.case == 3 { 100_000 } else { 10_000 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.case) {
            return Err(config_err(format!("case must be 1, 2 or 3, got {}", self.case)));
        }
        if self.iterations == Some(0) {
            return Err(config_err("iterations must be at least 1"));
        }
        if let Some(eta) = self.eta {
            if !eta.is_finite() || eta < 0.0 {
                return Err(config_err(format!("eta must be finite and non-negative, got {eta}")));
            }
        }
        if let Some(rule) = self.step_rule()? {
            if rule.needs_strong_convexity() && self.case != 1 {
                return Err(config_err(format!("step rule {rule} needs a strongly convex suite (case 1)")));
            }
        }
        let mut seen = Vec::new();
        for a in &self.algorithms {
            if seen.contains(a) {
                return Err(config_err(format!("algorithm {a} listed twice")));
            }
            seen.push(*a);
        }
        if self.algorithms.is_empty() {
            return Err(config_err("no algorithms listed"));
        }
        if !(self.target_error > 0.0) {
            return Err(config_err("target_error must be positive"));
        }
        Ok(())
    }

    fn step_rule(&self) -> Result<Option<StepRule>> {
        self.step_rule
            .as_deref()
            .map(|name| StepRule::parse(name, self.upper_bound).map_err(|e| config_err(e.to_string())))
            .transpose()
    }

    fn default_rule(&self) -> StepRule {
        if self.case == 1 {
            StepRule::StronglyConvex
        } else {
            StepRule::Convex
        }
    }

    fn resolve(&self, base: &Path, file: &Path) -> PathBuf {
        if file.is_absolute() {
            file.to_path_buf()
        } else {
            base.join(file)
        }
    }

    fn build_graph(&self, base: &Path, n: usize, seed: u64) -> Result<Graph> {
        if let Some(file) = &self.graph_file {
            return Graph::from_edge_list(&std::fs::read_to_string(self.resolve(base, file))?);
        }
        match self.graph {
            GraphModel::ErdosRenyi => gen_erdos_renyi(n, self.p, seed),
            GraphModel::RandomRegular => gen_random_regular(n, self.degree, seed),
            GraphModel::Path => gen_path(n),
            GraphModel::Complete => gen_complete(n),
        }
    }

    fn build_suite(&self, base: &Path, n: usize, seed: u64) -> Result<ObjectiveSuite> {
        if let Some(file) = &self.suite_file {
            let suite = ObjectiveSuite::from_json(&std::fs::read_to_string(self.resolve(base, file))?)?;
            if suite.case() != self.case {
                return Err(config_err(format!("suite file holds case {}, config says {}", suite.case(), self.case)));
            }
            return Ok(suite);
        }
        match self.case {
            1 => gen_case1(n, self.samples, self.dim, seed),
            2 => gen_case2(n, self.samples, self.dim, seed),
            _ => gen_case3(n, seed),
        }
    }

    /// Builds every input of a run. Files named in the config replace the
    /// corresponding generators; relative paths resolve against `base`.
    pub fn assemble(&self, base: &Path) -> Result<Assembly> {
        self.assemble_sized(base, self.n, self.graph_seed, self.data_seed, self.init_seed)
    }

    fn assemble_sized(&self, base: &Path, n: usize, graph_seed: u64, data_seed: u64, init_seed: u64) -> Result<Assembly> {
        let graph = self.build_graph(base, n, graph_seed)?;
        let suite = self.build_suite(base, graph.n(), data_seed)?;
        if suite.n() != graph.n() {
            return Err(config_err(format!("suite has {} agents, graph has {}", suite.n(), graph.n())));
        }
        let weights = match self.weights {
            WeightMethod::Laplacian => build_laplacian_weights(&graph)?,
            WeightMethod::LazyMetropolis => build_lazy_metropolis(&graph)?,
        };
        let sigma = sigma(&weights)?.sigma;
        let x0 = gaussian_start(suite.n(), suite.dim(), init_seed);
        Ok(Assembly {
            graph,
            weights,
            sigma,
            suite,
            x0,
        })
    }

    /// Step for gradient tracking, DGD-fixed and CGD: explicit `eta`, else
    /// the configured (or case-default) rule.
    fn shared_step(&self, a: &Assembly) -> Result<(f64, String)> {
        if let Some(eta) = self.eta {
            return Ok((eta, "explicit".into()));
        }
        let rule = self.step_rule()?.unwrap_or_else(|| self.default_rule());
        let eta = recommend_eta(rule, a.suite.alpha(), a.suite.beta(), a.sigma)?;
        Ok((eta, rule.name().into()))
    }

    fn step_for(&self, algorithm: Algorithm, a: &Assembly) -> Result<(f64, String)> {
        match algorithm {
            Algorithm::DgdVanishing => Ok(match self.vanishing_constant {
                Some(c) => (c, "explicit".into()),
                None => (1.0 / a.suite.beta(), "inverse_beta".into()),
            }),
            _ => self.shared_step(a),
        }
    }
}

/// Everything a run needs, built from one config.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub graph: Graph,
    pub weights: WeightMatrix,
    pub sigma: f64,
    pub suite: ObjectiveSuite,
    pub x0: AgentMatrix,
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Per-round decay factor fitted to the last half of a positive series.
pub fn fitted_rate(values: &[f64]) -> Option<f64> {
    let tail = &values[values.len() / 2..];
    log_linear_slope(tail).map(f64::exp)
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub schedule: StepSchedule,
    pub eta_source: String,
    pub final_metrics: Metrics,
    /// Fitted per-round decay of the average objective error.
    pub fitted_rate: Option<f64>,
    /// ρ(G(η)) for gradient tracking on strongly convex suites.
    pub rate_matrix_rho: Option<f64>,
    /// Whether the O(1/t) bound columns apply (η within their range).
    pub sublinear_bounds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub case: u8,
    pub n: usize,
    pub dim: usize,
    pub iterations: usize,
    pub weights: WeightMethod,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub f_star: f64,
    pub runs: Vec<AlgorithmSummary>,
}

/// One algorithm's trajectory as CSV.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub algorithm: Algorithm,
    pub csv: String,
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub runs: Vec<RunOutput>,
    pub summary: RunSummary,
    /// Edge list and suite JSON, enough to replay the run without regeneration.
    pub graph_edges: String,
    pub suite_json: String,
}

impl RunReport {
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }
}

fn trajectory_csv(traj: &Trajectory, bounds: Option<(Vec<f64>, Vec<f64>)>) -> String {
    let gt = traj.algorithm == Algorithm::GradientTracking;
    let mut out = String::from("t,avg_obj_err,runavg_obj_err,consensus_err");
    if gt {
        out.push_str(",tracking_err");
    }
    out.push_str(",dist_to_opt");
    if gt {
        out.push_str(",z1,z2,z3");
    }
    if bounds.is_some() {
        out.push_str(",bound_a,min_consensus_sq,bound_b");
    }
    out.push('\n');
    let min_sq = bounds
        .as_ref()
        .map(|_| running_min_squared(&traj.all().map(|r| r.consensus_err).collect::<Vec<_>>()));
    for (k, r) in traj.rows.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.t,
            fmt_num(r.avg_obj_err),
            fmt_num(r.runavg_obj_err),
            fmt_num(r.consensus_err)
        );
        if gt {
            let _ = write!(out, ",{}", fmt_opt(r.tracking_err));
        }
        let _ = write!(out, ",{}", fmt_num(r.dist_to_opt));
        if gt {
            let _ = write!(
                out,
                ",{},{},{}",
                fmt_opt(r.tracking_err),
                fmt_num(r.consensus_err),
                fmt_num(r.dist_to_opt)
            );
        }
        if let (Some((a, b)), Some(m)) = (&bounds, &min_sq) {
            let _ = write!(out, ",{},{},{}", fmt_num(a[k]), fmt_num(m[k + 1]), fmt_num(b[k]));
        }
        out.push('\n');
    }
    out
}

/// O(1/t) bound columns for row t = 1..T: the objective bound at t − 1
/// (the running average at row t covers rounds 1..t) and the consensus bound at t.
fn sublinear_columns(a: &Assembly, eta: f64, rows: usize) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let beta = a.suite.beta();
    let limit = sublinear_step_limit(beta, a.sigma)?;
    if !(eta > 0.0 && eta <= limit * (1.0 + 1e-12)) {
        return Ok(None);
    }
    let state = gt_init(&a.suite, &a.x0)?;
    let init = InitialNorms::measure(&state, &a.suite);
    let mut obj = Vec::with_capacity(rows);
    let mut cons = Vec::with_capacity(rows);
    for t in 1..=rows {
        obj.push(objective_error_bound(t - 1, eta, beta, a.sigma, &init)?);
        cons.push(consensus_error_bound(t, beta, a.sigma, &init)?);
    }
    Ok(Some((obj, cons)))
}

fn run_all(cfg: &ExperimentConfig, a: &Assembly) -> Result<Vec<(RunOutput, AlgorithmSummary)>> {
    let iterations = cfg.iterations();
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let (eta, source) = cfg.step_for(algorithm, a)?;
            let traj = run(algorithm, &a.suite, &a.weights, eta, iterations, &a.x0)?;
            let gt = algorithm == Algorithm::GradientTracking;
            let bounds = if gt { sublinear_columns(a, eta, iterations)? } else { None };
            let rho = if gt && a.suite.is_strongly_convex() && eta > 0.0 {
                build_g(eta, a.suite.alpha(), a.suite.beta(), a.sigma).ok().map(|g| g.rho)
            } else {
                None
            };
            let errors: Vec<f64> = traj.rows.iter().map(|r| r.avg_obj_err).collect();
            let summary = AlgorithmSummary {
                algorithm,
                schedule: traj.schedule,
                eta_source: source,
                final_metrics: *traj.last(),
                fitted_rate: fitted_rate(&errors),
                rate_matrix_rho: rho,
                sublinear_bounds: bounds.is_some(),
            };
            let csv = trajectory_csv(&traj, bounds);
            Ok((
                RunOutput {
                    algorithm,
                    csv,
                    trajectory: traj,
                },
                summary,
            ))
        })
        .collect()
}

fn summary(cfg: &ExperimentConfig, a: &Assembly, runs: Vec<AlgorithmSummary>) -> RunSummary {
    RunSummary {
        case: a.suite.case(),
        n: a.suite.n(),
        dim: a.suite.dim(),
        iterations: cfg.iterations(),
        weights: cfg.weights,
        sigma: a.sigma,
        alpha: a.suite.alpha(),
        beta: a.suite.beta(),
        f_star: a.suite.f_star(),
        runs,
    }
}

/// One trajectory CSV per algorithm plus a JSON summary.
pub fn cmd_run(cfg: &ExperimentConfig, base: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let a = cfg.assemble(base)?;
    let (runs, sums): (Vec<_>, Vec<_>) = run_all(cfg, &a)?.into_iter().unzip();
    Ok(RunReport {
        runs,
        summary: summary(cfg, &a, sums),
        graph_edges: a.graph.to_edge_list(),
        suite_json: a.suite.to_json()?,
    })
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub csv: String,
    pub summary: RunSummary,
}

/// Average objective error of every listed algorithm on shared inputs, one
/// column each.
pub fn cmd_compare(cfg: &ExperimentConfig, base: &Path) -> Result<CompareReport> {
    cfg.validate()?;
    if cfg.algorithms.len() < 2 {
        return Err(config_err("compare needs at least two algorithms"));
    }
    let a = cfg.assemble(base)?;
    let (runs, sums): (Vec<_>, Vec<_>) = run_all(cfg, &a)?.into_iter().unzip();
    let mut csv = String::from("t");
    for r in &runs {
        let _ = write!(csv, ",{}_avg_obj_err", r.algorithm);
    }
    csv.push('\n');
    for k in 0..cfg.iterations() {
        let _ = write!(csv, "{}", k + 1);
        for r in &runs {
            let _ = write!(csv, ",{}", fmt_num(r.trajectory.rows[k].avg_obj_err));
        }
        csv.push('\n');
    }
    Ok(CompareReport {
        csv,
        summary: summary(cfg, &a, sums),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub sigma: f64,
    /// Per-agent strong-convexity constant.
    pub alpha: f64,
    /// Per-agent smoothness constant.
    pub beta: f64,
    /// Extreme eigenvalues of the pooled sample second-moment matrix.
    pub moment_alpha: f64,
    pub moment_beta: f64,
    pub eta: f64,
    /// First round with average objective error ≤ target, or the cap.
    pub iterations_to_tol: usize,
    pub reached: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub target_error: f64,
    pub step_rule: String,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("n,sigma,alpha,beta,moment_alpha,moment_beta,eta,iterations_to_tol,reached\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_num(r.sigma),
                fmt_num(r.alpha),
                fmt_num(r.beta),
                fmt_num(r.moment_alpha),
                fmt_num(r.moment_beta),
                fmt_num(r.eta),
                r.iterations_to_tol,
                r.reached
            );
        }
        out
    }

    /// Largest over smallest iteration count among sizes that reached the target.
    pub fn spread(&self) -> Option<f64> {
        let reached: Vec<f64> = self.rows.iter().filter(|r| r.reached).map(|r| r.iterations_to_tol as f64).collect();
        if reached.len() != self.rows.len() || reached.is_empty() {
            return None;
        }
        let max = reached.iter().copied().fold(0.0, f64::max);
        let min = reached.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max / min)
    }
}

/// Iterations-to-tolerance of gradient tracking across graph sizes.
///
/// Each size gets its own graph, data and initial iterates from seeds
/// derived from the configured ones and the size. Sizes run in parallel.
/// The step defaults to the rate-optimal rule.
pub fn cmd_scaling(cfg: &ExperimentConfig, base: &Path) -> Result<ScalingReport> {
    cfg.validate()?;
    if cfg.case != 1 {
        return Err(config_err("the scaling study uses case 1 suites"));
    }
    if cfg.sizes.is_empty() {
        return Err(config_err("no sizes listed"));
    }
    if cfg.graph_file.is_some() || cfg.suite_file.is_some() {
        return Err(config_err("the scaling study generates its own graphs and suites"));
    }
    let rule = cfg.step_rule()?.unwrap_or(StepRule::RateOptimal);
    let results: Vec<Result<ScalingRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .sizes
            .iter()
            .map(|&n| scope.spawn(move || scaling_row(cfg, base, n, rule)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Config("scaling worker panicked".into()))))
            .collect()
    });
    Ok(ScalingReport {
        target_error: cfg.target_error,
        step_rule: match cfg.eta {
            Some(_) => "explicit".into(),
            None => rule.name().into(),
        },
        rows: results.into_iter().collect::<Result<_>>()?,
    })
}

fn scaling_row(cfg: &ExperimentConfig, base: &Path, n: usize, rule: StepRule) -> Result<ScalingRow> {
    let key = n as u64;
    let a = cfg.assemble_sized(
        base,
        n,
        derive_seed(cfg.graph_seed, key),
        derive_seed(cfg.data_seed, key),
        derive_seed(cfg.init_seed, key),
    )?;
    let eta = match cfg.eta {
        Some(eta) => eta,
        None => recommend_eta(rule, a.suite.alpha(), a.suite.beta(), a.sigma)?,
    };
    let (moment_alpha, moment_beta) = a
        .suite
        .sample_moment_extremes()
        .ok_or_else(|| config_err("scaling suite has no sample data"))?;
    let hit = gt_iterations_to_target(&a.suite, &a.weights, eta, &a.x0, cfg.target_error, cfg.max_iterations)?;
    Ok(ScalingRow {
        n: a.suite.n(),
        sigma: a.sigma,
        alpha: a.suite.alpha(),
        beta: a.suite.beta(),
        moment_alpha,
        moment_beta,
        eta,
        iterations_to_tol: hit.unwrap_or(cfg.max_iterations),
        reached: hit.is_some(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub n: Option<usize>,
    pub eta: f64,
    pub eta_source: String,
    pub g: [[f64; 3]; 3],
    pub lambda: f64,
    pub rho: f64,
    /// Collatz–Wielandt bracket on ρ from power iteration.
    pub rho_power: (f64, f64),
    /// Closed-form rate bound; absent when η ≥ 1/β.
    pub rate_bound: Option<f64>,
    pub recommended_eta: BTreeMap<String, f64>,
    /// σ bound for lazy Metropolis weights with U agents at most.
    pub metropolis_sigma_bound: Option<f64>,
}

impl BoundsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Rate matrix, spectral radius, rate bound and every step rule; no
/// simulation. Constants come from `alpha`/`beta`/`sigma` when all three are
/// set, otherwise from the assembled graph and suite.
pub fn cmd_bounds(cfg: &ExperimentConfig, base: &Path) -> Result<BoundsReport> {
    cfg.validate()?;
    let (alpha, beta, sigma, n) = match (cfg.alpha, cfg.beta, cfg.sigma) {
        (Some(a), Some(b), Some(s)) => (a, b, s, None),
        (None, None, None) => {
            let a = cfg.assemble(base)?;
            (a.suite.alpha(), a.suite.beta(), a.sigma, Some(a.suite.n()))
        }
        _ => return Err(config_err("set all of alpha, beta and sigma, or none")),
    };
    let upper_bound = cfg.upper_bound.or(n);
    let mut recommended = BTreeMap::new();
    let mut rules = vec![StepRule::StronglyConvex, StepRule::Convex, StepRule::RateOptimal];
    if let Some(u) = upper_bound {
        rules.push(StepRule::MetropolisStronglyConvex { upper_bound: u });
        rules.push(StepRule::MetropolisConvex { upper_bound: u });
    }
    for rule in rules {
        recommended.insert(rule.name().to_string(), recommend_eta(rule, alpha, beta, sigma)?);
    }
    let (eta, eta_source) = match cfg.eta {
        Some(eta) => (eta, "explicit".to_string()),
        None => {
            let rule = cfg.step_rule()?.unwrap_or(StepRule::StronglyConvex);
            (recommend_eta(rule, alpha, beta, sigma)?, rule.name().to_string())
        }
    };
    let g = build_g(eta, alpha, beta, sigma)?;
    Ok(BoundsReport {
        alpha,
        beta,
        sigma,
        n,
        eta,
        eta_source,
        rho_power: spectral_radius_power(&g.g),
        rate_bound: rate_bound(eta, alpha, beta, sigma).ok(),
        g: g.g,
        lambda: g.lambda,
        rho: g.rho,
        recommended_eta: recommended,
        metropolis_sigma_bound: upper_bound.filter(|&u| u >= 2).map(metropolis_sigma_upper_bound).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(case: u8) -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            p: 0.6,
            case,
            iterations: Some(50),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.iterations(), 10_000);
        assert_eq!(ExperimentConfig { case: 3, ..cfg.clone() }.iterations(), 100_000);
        let mut cfg = cfg;
        cfg.apply_override("data_seed=42").unwrap();
        assert_eq!(cfg.data_seed, 42);
        assert!(cfg.apply_override("seed=1").is_err());
        assert!(cfg.apply_override("init_seed=x").is_err());
        assert!(matches!(ExperimentConfig::from_json(r#"{"bogus": 1}"#), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"case": 4}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"case": 3, "step_rule": "strongly_convex"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"algorithms": ["gt", "gt"]}"#).is_err());
        let parsed = ExperimentConfig::from_json(r#"{"algorithms": ["gt", "dgd_vanishing"], "graph": "random_regular"}"#).unwrap();
        assert_eq!(parsed.algorithms, vec![Algorithm::GradientTracking, Algorithm::DgdVanishing]);
    }

    #[test]
    fn run_is_replayable() {
        let cfg = ExperimentConfig {
            algorithms: Algorithm::ALL.to_vec(),
            step_rule: Some("rate_optimal".into()),
            ..small(1)
        };
        let a = cmd_run(&cfg, Path::new(".")).unwrap();
        let b = cmd_run(&cfg, Path::new(".")).unwrap();
        assert_eq!(a.runs.len(), 4);
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.csv, y.csv);
            assert_eq!(x.csv.lines().count(), 51);
        }
        assert_eq!(a.summary_json().unwrap(), b.summary_json().unwrap());
        let header = a.runs[0].csv.lines().next().unwrap();
        assert_eq!(header, "t,avg_obj_err,runavg_obj_err,consensus_err,tracking_err,dist_to_opt,z1,z2,z3");
    }

    #[test]
    fn replay_from_saved_graph_and_suite() {
        let dir = std::env::temp_dir().join(format!("gradtrack-replay-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = ExperimentConfig { eta: Some(1e-3), ..small(2) };
        let first = cmd_run(&cfg, &dir).unwrap();
        std::fs::write(dir.join("graph.txt"), &first.graph_edges).unwrap();
        std::fs::write(dir.join("suite.json"), &first.suite_json).unwrap();
        let replay = ExperimentConfig {
            graph_file: Some("graph.txt".into()),
            suite_file: Some("suite.json".into()),
            // generators would now produce different inputs
            graph_seed: 999,
            data_seed: 999,
            ..cfg
        };
        let second = cmd_run(&replay, &dir).unwrap();
        assert_eq!(first.runs[0].csv, second.runs[0].csv);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sublinear_columns_on_case3() {
        let cfg = small(3);
        let report = cmd_run(&cfg, Path::new(".")).unwrap();
        let csv = &report.runs[0].csv;
        assert!(csv.lines().next().unwrap().ends_with(",bound_a,min_consensus_sq,bound_b"));
        assert!(report.summary.runs[0].sublinear_bounds);
        assert_eq!(report.summary.runs[0].eta_source, "convex");
    }

    #[test]
    fn compare_aligns_columns() {
        let cfg = ExperimentConfig {
            algorithms: Algorithm::ALL.to_vec(),
            step_rule: Some("rate_optimal".into()),
            ..small(1)
        };
        let report = cmd_compare(&cfg, Path::new(".")).unwrap();
        let mut lines = report.csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,gt_avg_obj_err,dgd_fixed_avg_obj_err,dgd_vanishing_avg_obj_err,cgd_avg_obj_err"
        );
        assert_eq!(lines.count(), 50);
        let single = ExperimentConfig { algorithms: vec![Algorithm::GradientTracking], ..cfg };
        assert!(cmd_compare(&single, Path::new(".")).is_err());
    }

    #[test]
    fn bounds_from_constants() {
        let cfg = ExperimentConfig {
            alpha: Some(1.0),
            beta: Some(26.23),
            sigma: Some(0.9150),
            upper_bound: Some(50),
            ..ExperimentConfig::default()
        };
        let report = cmd_bounds(&cfg, Path::new(".")).unwrap();
        assert!(report.rho < 1.0);
        assert!(report.rho <= report.rate_bound.unwrap());
        assert_eq!(report.eta_source, "strongly_convex");
        assert_eq!(report.recommended_eta.len(), 5);
        assert_eq!(report.to_json().unwrap(), cmd_bounds(&cfg, Path::new(".")).unwrap().to_json().unwrap());
        let zero = ExperimentConfig { eta: Some(0.0), ..cfg.clone() };
        assert!(matches!(cmd_bounds(&zero, Path::new(".")), Err(Error::OutOfRange(_))));
        let partial = ExperimentConfig { sigma: None, ..cfg };
        assert!(cmd_bounds(&partial, Path::new(".")).is_err());
    }

    #[test]
    fn scaling_small_sizes() {
        let cfg = ExperimentConfig {
            graph: GraphModel::RandomRegular,
            sizes: vec![10, 12],
            target_error: 1e-4,
            max_iterations: 200_000,
            ..ExperimentConfig::default()
        };
        let report = cmd_scaling(&cfg, Path::new(".")).unwrap();
        assert_eq!(report.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 12]);
        assert!(report.rows.iter().all(|r| r.reached && r.iterations_to_tol > 0));
        assert!(report.csv().starts_with("n,sigma,alpha,beta,moment_alpha,moment_beta,eta,iterations_to_tol,reached\n"));
        assert_eq!(report.csv(), cmd_scaling(&cfg, Path::new(".")).unwrap().csv());
    }
}
