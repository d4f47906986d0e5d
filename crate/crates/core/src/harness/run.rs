//! The synchronous round loop: validate a config, execute the configured
//! algorithm round by round, and sample metrics into a trace.

use std::time::Instant;

use ndarray::Array1;
use serde::Serialize;

use crate::engine::{
    dgd_round, epigraph_round, init_states, NodeState, RoundScratch,
};
use crate::error::{Error, Result};
use crate::graph::{check_joint_connectivity, estimate_pi, PerronEstimate};
use crate::harness::config::{Algorithm, RunConfig};
use crate::harness::trace::TraceRecord;
use crate::oracle::{solve_centralized, OracleSolution};
use crate::problem::{lift, split, EpigraphProblem, ProblemSpec};

/// Perron estimation settings for diagnostics.
const PI_TOL: f64 = 1e-10;
const PI_WINDOW: u64 = 2_000;

/// Default cap on how far ahead the connectivity gate scans a random
/// sequence; periodic sequences only need one period plus a window.
const CONNECTIVITY_SCAN_CAP: u64 = 10_000;

/// The state the metrics are computed against.
pub enum ProblemView<'a> {
    Epigraph(&'a EpigraphProblem),
    Original(&'a ProblemSpec),
}

/// Residuals of the pi-weighted mean state, plus per-node consensus gaps.
pub fn metrics(
    states: &[NodeState],
    pi: &PerronEstimate,
    view: &ProblemView<'_>,
    oracle: Option<&OracleSolution>,
    k: u64,
    zeta: f64,
) -> Result<TraceRecord> {
    let n = states.len();
    if pi.pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pi.pi.len(),
        });
    }
    let dim = states[0].theta.len();
    let mut mean = Array1::<f64>::zeros(dim);
    for (j, st) in states.iter().enumerate() {
        mean.scaled_add(pi.pi[j], &st.theta);
    }
    let per_node_consensus: Vec<f64> = states
        .iter()
        .map(|st| {
            st.theta
                .iter()
                .zip(mean.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let max_consensus = per_node_consensus.iter().copied().fold(0.0, f64::max);

    let (max_feasibility, raw_objective, scale) = match view {
        ProblemView::Epigraph(e) => {
            let (x_mean, t_mean) = split(&mean, e.m(), e.n())?;
            let mut worst: f64 = 0.0;
            for j in 0..n {
                worst = worst.max((e.objective(j).evaluate(&x_mean)? - t_mean[j]).max(0.0));
                for g in e.constraints_of(j) {
                    worst = worst.max(g.evaluate(&x_mean)?.max(0.0));
                }
            }
            (worst, e.cost().dot(&mean), e.objective_scale())
        }
        ProblemView::Original(p) => {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                for g in p.constraints_of(j) {
                    worst = worst.max(g.evaluate(&mean)?.max(0.0));
                }
            }
            (worst, p.total_objective(&mean)?, 1.0 / p.n() as f64)
        }
    };
    let gap = match oracle {
        Some(sol) => (raw_objective - sol.value).abs() * scale,
        None => f64::NAN,
    };
    Ok(TraceRecord {
        k,
        zeta,
        max_consensus,
        max_feasibility,
        gap,
        per_node_consensus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Budget,
    ResidualThreshold,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub rounds_executed: u64,
    pub stop_reason: StopReason,
    pub final_max_consensus: f64,
    pub final_max_feasibility: f64,
    pub final_gap: f64,
    pub oracle_value: Option<f64>,
    pub wall_time_s: f64,
    pub config: RunConfig,
}

pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub scratch: Vec<RoundScratch>,
    pub final_states: Vec<NodeState>,
    pub summary: RunSummary,
}

impl RunOutput {
    /// Final x-block of every node (for the epigraph algorithm) or the full
    /// state (for the baseline).
    pub fn final_x(&self, m: usize) -> Vec<Array1<f64>> {
        self.final_states
            .iter()
            .map(|st| st.theta.slice(ndarray::s![..m]).to_owned())
            .collect()
    }
}

fn connectivity_gate(config: &RunConfig, built: &crate::harness::config::BuiltProblem) -> Result<()> {
    if !config.run.enforce_connectivity {
        return Ok(());
    }
    let b = built.sequence.b_window();
    let horizon = config.run.connectivity_horizon.unwrap_or_else(|| {
        let base = match built.sequence.period() {
            // all window positions repeat after one period
            Some(period) => (period + b) as u64,
            None => config.run.rounds.min(CONNECTIVITY_SCAN_CAP),
        };
        base.max(b as u64)
    });
    if !check_joint_connectivity(&built.sequence, b, horizon) {
        return Err(Error::ConnectivityCheckFailed { b, horizon });
    }
    Ok(())
}

/// Execute one seeded run. The stopping rule is the round budget, or every
/// residual falling below `residual_stop` at a trace point, whichever
/// happens first. Identical configs and seeds produce identical traces.
pub fn run(config: &RunConfig, seed: u64) -> Result<RunOutput> {
    let start = Instant::now();
    let built = config.build()?;
    connectivity_gate(config, &built)?;
    let problem = &built.problem;
    let n = problem.n();
    let trace_every = config.run.trace_every.max(1);
    let rounds = config.run.rounds;

    let oracle = if config.run.attach_oracle {
        Some(solve_centralized(problem, config.run.oracle_tol)?)
    } else {
        None
    };

    let epigraph = match config.engine.algorithm {
        Algorithm::Drfp => Some(lift(problem)?),
        Algorithm::Dgd => None,
    };
    let dim = match &epigraph {
        Some(e) => e.d(),
        None => problem.m(),
    };

    let mut states = init_states(n, dim, seed);
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut scratch: Vec<RoundScratch> = Vec::new();
    let mut stop_reason = StopReason::Budget;
    let mut rounds_executed = 0;

    let record = |states: &[NodeState], k: u64, trace: &mut Vec<TraceRecord>| -> Result<bool> {
        let pi = estimate_pi(&built.sequence, k, PI_TOL, PI_WINDOW);
        let view = match &epigraph {
            Some(e) => ProblemView::Epigraph(e),
            None => ProblemView::Original(problem),
        };
        let rec = metrics(states, &pi, &view, oracle.as_ref(), k, built.schedule.step(k))?;
        let hit = config.run.residual_stop.is_some_and(|thr| {
            rec.max_consensus <= thr && rec.max_feasibility <= thr
        });
        trace.push(rec);
        Ok(hit)
    };

    record(&states, 0, &mut trace)?;
    for k in 0..rounds {
        let zeta = built.schedule.step(k);
        let a = built.sequence.matrix(k);
        let want_scratch = config.run.verbose_scratch && k % trace_every == 0;
        let out = match &epigraph {
            Some(e) => epigraph_round(&states, &a, zeta, &built.options, e, want_scratch)?,
            None => dgd_round(
                &states,
                &a,
                zeta,
                problem.objectives(),
                problem.x_set(),
                want_scratch,
            )?,
        };
        states = out.states;
        if let Some(sc) = out.scratch {
            scratch.push(sc);
        }
        rounds_executed = k + 1;
        let r = k + 1;
        if (r % trace_every == 0 || r == rounds) && record(&states, r, &mut trace)? {
            stop_reason = StopReason::ResidualThreshold;
            break;
        }
    }

    let last = trace.last().expect("trace always has the initial record");
    let summary = RunSummary {
        seed,
        algorithm: config.engine.algorithm,
        rounds_executed,
        stop_reason,
        final_max_consensus: last.max_consensus,
        final_max_feasibility: last.max_feasibility,
        final_gap: last.gap,
        oracle_value: oracle.as_ref().map(|s| s.value),
        wall_time_s: start.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    Ok(RunOutput {
        trace,
        scratch,
        final_states: states,
        summary,
    })
}

/// One run per configured seed.
pub fn run_all(config: &RunConfig) -> Result<Vec<RunOutput>> {
    config.run.seeds.iter().map(|&s| run(config, s)).collect()
}
