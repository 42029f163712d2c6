//! Shared fixtures for the kernel benchmarks.

use gradtrack::algorithms::{gaussian_start, gt_init};
use gradtrack::graph::gen_erdos_renyi;
use gradtrack::objectives::gen_case1;
use gradtrack::theory::{build_g, recommend_eta};
use gradtrack::weights::{build_laplacian_weights, sigma};
use gradtrack::{ConvergenceMatrix, ObjectiveSuite, StepRule, TrackingState, WeightMatrix};

/// Least-squares network of `n` agents on ER(n, 0.3) with Laplacian weights.
pub struct Fixture {
    pub suite: ObjectiveSuite,
    pub weights: WeightMatrix,
    pub sigma: f64,
    pub eta: f64,
    pub state: TrackingState,
}

impl Fixture {
    pub fn new(n: usize) -> Self {
        let graph = gen_erdos_renyi(n, 0.3, 11).expect("graph");
        let weights = build_laplacian_weights(&graph).expect("weights");
        let sigma = sigma(&weights).expect("sigma").sigma;
        let suite = gen_case1(n, 20, 3, 12).expect("suite");
        let eta = recommend_eta(StepRule::RateOptimal, suite.alpha(), suite.beta(), sigma).expect("eta");
        let state = gt_init(&suite, &gaussian_start(n, 3, 13)).expect("init");
        Fixture { suite, weights, sigma, eta, state }
    }

    pub fn rate_matrix(&self) -> ConvergenceMatrix {
        build_g(self.eta, self.suite.alpha(), self.suite.beta(), self.sigma).expect("rate matrix")
    }
}
