//! Side-by-side demonstration of the unbalancedness failure: on a static
//! row-stochastic (but not doubly-stochastic) graph, the plain distributed
//! subgradient baseline converges to the Perron-weighted optimum while the
//! epigraph algorithm reaches the true one.

use ndarray::Array1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{estimate_pi, SequenceMode};
use crate::harness::config::{Algorithm, RunConfig};
use crate::harness::run::run;
use crate::oracle::{solve_centralized, weighted_optimum};

/// Disagreement between the baseline's empirical limit and its predicted
/// target beyond this bound flags a broken instance or an unconverged run.
const TARGET_DISAGREEMENT: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub seed: u64,
    pub rounds: u64,
    pub pi: Vec<f64>,
    /// Minimizer and value of the pi-weighted objective (the baseline's target).
    pub weighted_x: Vec<f64>,
    pub weighted_value: f64,
    /// True constrained optimum (the epigraph algorithm's target).
    pub centralized_x: Vec<f64>,
    pub centralized_value: f64,
    pub dgd_mean_x: Vec<f64>,
    pub dgd_vs_weighted: f64,
    pub drfp_mean_x: Vec<f64>,
    pub drfp_vs_centralized: f64,
    pub weighted_vs_centralized: f64,
    /// True when the baseline failed to land on its own predicted target.
    pub instance_error: bool,
}

fn linf(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Run both algorithms on the configured static instance and report their
/// limits against the two oracle targets.
pub fn compare_dgd_drfp(config: &RunConfig) -> Result<CompareReport> {
    let built = config.build()?;
    if !matches!(built.sequence.mode(), SequenceMode::Static(_)) {
        return Err(Error::InvalidConfig(
            "the comparison needs a static graph".into(),
        ));
    }
    let seed = config.run.seeds.first().copied().unwrap_or(0);
    let tol = config.run.oracle_tol;
    let problem = &built.problem;
    let m = problem.m();

    let pi = estimate_pi(&built.sequence, 0, 1e-12, 5_000);
    let weighted = weighted_optimum(problem, &pi.pi, tol)?;
    let centralized = solve_centralized(problem, tol)?;

    let mut dgd_cfg = config.clone();
    dgd_cfg.engine.algorithm = Algorithm::Dgd;
    dgd_cfg.run.attach_oracle = false;
    let dgd_out = run(&dgd_cfg, seed)?;

    let mut drfp_cfg = config.clone();
    drfp_cfg.engine.algorithm = Algorithm::Drfp;
    drfp_cfg.run.attach_oracle = false;
    let drfp_out = run(&drfp_cfg, seed)?;

    let mut dgd_mean = Array1::<f64>::zeros(m);
    for (j, st) in dgd_out.final_states.iter().enumerate() {
        dgd_mean.scaled_add(pi.pi[j], &st.theta);
    }
    let mut drfp_mean = Array1::<f64>::zeros(m);
    for (j, x) in drfp_out.final_x(m).iter().enumerate() {
        drfp_mean.scaled_add(pi.pi[j], x);
    }

    let dgd_vs_weighted = linf(&dgd_mean, &weighted.x_star);
    let drfp_vs_centralized = linf(&drfp_mean, &centralized.x_star);
    let weighted_vs_centralized = linf(&weighted.x_star, &centralized.x_star);

    Ok(CompareReport {
        seed,
        rounds: config.run.rounds,
        pi: pi.pi.to_vec(),
        weighted_x: weighted.x_star.to_vec(),
        weighted_value: weighted.value,
        centralized_x: centralized.x_star.to_vec(),
        centralized_value: centralized.value,
        dgd_mean_x: dgd_mean.to_vec(),
        dgd_vs_weighted,
        drfp_mean_x: drfp_mean.to_vec(),
        drfp_vs_centralized,
        weighted_vs_centralized,
        instance_error: dgd_vs_weighted > TARGET_DISAGREEMENT,
    })
}
