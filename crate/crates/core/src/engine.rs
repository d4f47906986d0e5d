//! Per-round node updates: the random-fixed projected algorithm in its
//! generic and epigraph-specialized forms, and the plain distributed
//! subgradient baseline.
//!
//! A round is a two-phase contract: every node reads the previous round's
//! frozen states, then new states are installed together. Node updates
//! within a round are independent.

use ndarray::{s, Array1};
use rand::Rng;

use crate::convex::{polyak_step_unchecked, ConvexFunction, SimpleSet};
use crate::error::{Error, Result};
use crate::graph::WeightMatrix;
use crate::problem::{EpigraphProblem, GenericProblem};
use crate::stream::keyed_rng;

const SALT_OMEGA: u64 = 0x6f6d_6567;

/// Diminishing step sizes of the form a / (k + b)^p. The admissible ranges
/// a > 0, b >= 1, p in (0.5, 1] guarantee sum zeta = inf and
/// sum zeta^2 < inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    a: f64,
    b: f64,
    p: f64,
}

impl StepSchedule {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if a > 0.0 && b >= 1.0 && p > 0.5 && p <= 1.0 {
            Ok(StepSchedule { a, b, p })
        } else {
            Err(Error::InvalidSchedule)
        }
    }

    pub fn step(&self, k: u64) -> f64 {
        let base = k as f64 + self.b;
        if self.p == 1.0 {
            self.a / base
        } else {
            self.a / base.powf(self.p)
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            a: 1.0,
            b: 1.0,
            p: 1.0,
        }
    }
}

/// A node's independent draw stream, derived from (seed, node, round, draw):
/// a pure counter-based function, identical across replays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeStream {
    seed: u64,
    node: u64,
}

impl NodeStream {
    pub fn new(seed: u64, node: usize) -> Self {
        NodeStream {
            seed,
            node: node as u64,
        }
    }

    /// Uniform draw from {0, .., tau-1} for the given round and sub-draw.
    pub fn draw(&self, round: u64, sub: u64, tau: usize) -> usize {
        debug_assert!(tau >= 1);
        let mut rng = keyed_rng(&[self.seed, SALT_OMEGA, self.node, round, sub]);
        rng.random_range(0..tau)
    }
}

/// Per-node decision state at a synchronized round.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub j: usize,
    pub round: u64,
    pub theta: Array1<f64>,
    pub stream: NodeStream,
}

/// All-zero initial states, one per node.
pub fn init_states(n: usize, dim: usize, seed: u64) -> Vec<NodeState> {
    (0..n)
        .map(|j| NodeState {
            j,
            round: 0,
            theta: Array1::zeros(dim),
            stream: NodeStream::new(seed, j),
        })
        .collect()
}

/// Engine knobs beyond the step schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub beta: f64,
    /// Evaluate the objective-constraint step (value and subgradient) at the
    /// post-mix point p instead of the post-random-step point; the step is
    /// still applied from the post-random-step point. Default off: the
    /// canonical update evaluates at the post-random-step point.
    pub f_step_at_mixed_point: bool,
    /// How many random-constraint steps to take per round (>= 1).
    pub random_projections_per_round: u32,
    /// Replace the random draw by the most violated local constraint.
    pub select_farthest_constraint: bool,
}

impl EngineOptions {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        Ok(EngineOptions {
            beta,
            f_step_at_mixed_point: false,
            random_projections_per_round: 1,
            select_farthest_constraint: false,
        })
    }
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            beta: 1.0,
            f_step_at_mixed_point: false,
            random_projections_per_round: 1,
            select_farthest_constraint: false,
        }
    }
}

/// Per-node intermediate values of one round, kept for test introspection
/// and verbose traces.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeScratch {
    /// Drawn constraint indices (0-based), one per random projection.
    pub omega: Vec<usize>,
    /// Post-mix point (after the cost step).
    pub post_mix: Array1<f64>,
    /// Post-random-projection point.
    pub post_random: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundScratch {
    pub k: u64,
    pub nodes: Vec<NodeScratch>,
}

pub struct RoundOutcome {
    pub states: Vec<NodeState>,
    pub scratch: Option<RoundScratch>,
}

fn check_synchronized(states: &[NodeState]) -> Result<u64> {
    let first = states.first().ok_or(Error::EmptyProblem)?;
    if states.iter().any(|st| st.round != first.round) {
        return Err(Error::UnsynchronizedStates);
    }
    Ok(first.round)
}

/// Read-phase mixing: sum_i a_ji theta_i for node j.
pub fn mix_state(j: usize, a: &WeightMatrix, states: &[NodeState]) -> Array1<f64> {
    let dim = states[0].theta.len();
    let mut acc = Array1::zeros(dim);
    for (i, st) in states.iter().enumerate() {
        let w = a.entry(j, i);
        if w != 0.0 {
            acc.scaled_add(w, &st.theta);
        }
    }
    acc
}

fn validate_round(states: &[NodeState], a: &WeightMatrix, n: usize, dim: usize) -> Result<u64> {
    let k = check_synchronized(states)?;
    if states.len() != n || a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: states.len().max(a.n()),
        });
    }
    for st in states {
        if st.theta.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: st.theta.len(),
            });
        }
    }
    Ok(k)
}

/// Pick the constraint for one random-projection step: a uniform draw from
/// the node's stream, or the most violated constraint under the farthest
/// variant.
fn select_constraint(
    constraints: &[ConvexFunction],
    at: &Array1<f64>,
    stream: &NodeStream,
    round: u64,
    sub: u64,
    farthest: bool,
) -> Result<usize> {
    if farthest {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (l, g) in constraints.iter().enumerate() {
            let v = g.evaluate(at)?;
            if v > best_v {
                best_v = v;
                best = l;
            }
        }
        Ok(best)
    } else {
        Ok(stream.draw(round, sub, constraints.len()))
    }
}

/// One round of the generic random-fixed projected update:
/// mix with the row weights and step against the cost, take one random
/// Polyak step on a drawn local constraint, one fixed Polyak step on the
/// scalar constraint, then project onto Theta.
pub fn drfp_round(
    states: &[NodeState],
    a: &WeightMatrix,
    zeta: f64,
    opts: &EngineOptions,
    problem: &GenericProblem,
    record: bool,
) -> Result<RoundOutcome> {
    let n = problem.n();
    let d = problem.d();
    let k = validate_round(states, a, n, d)?;
    if !(opts.beta > 0.0 && opts.beta < 2.0) {
        return Err(Error::BetaOutOfRange(opts.beta));
    }
    let beta = opts.beta;

    let mut new_states = Vec::with_capacity(n);
    let mut scratch = record.then(|| RoundScratch {
        k,
        nodes: Vec::with_capacity(n),
    });
    for j in 0..n {
        let stream = states[j].stream;
        let mut p = mix_state(j, a, states);
        p.scaled_add(-zeta, problem.cost());

        let constraints = problem.vector_constraints_of(j);
        let mut q = p.clone();
        let mut omegas = Vec::with_capacity(opts.random_projections_per_round as usize);
        for sub in 0..opts.random_projections_per_round {
            let idx = select_constraint(
                constraints,
                &q,
                &stream,
                k,
                sub as u64,
                opts.select_farthest_constraint,
            )?;
            omegas.push(idx);
            q = polyak_step_unchecked(&constraints[idx], &q, beta)?;
        }

        let f = problem.scalar_constraint(j);
        let eval_at = if opts.f_step_at_mixed_point { &p } else { &q };
        let val = f.evaluate(eval_at)?;
        let pre = if val > 0.0 {
            let v = f.subgradient(eval_at)?;
            let denom = v.dot(&v);
            if denom == 0.0 {
                return Err(Error::ZeroSubgradient);
            }
            let coef = beta * val / denom;
            let mut out = q.clone();
            out.scaled_add(-coef, &v);
            out
        } else {
            q.clone()
        };
        let theta = problem.theta_set().project(&pre)?;

        if let Some(sc) = scratch.as_mut() {
            sc.nodes.push(NodeScratch {
                omega: omegas,
                post_mix: p.clone(),
                post_random: q.clone(),
            });
        }
        new_states.push(NodeState {
            j,
            round: k + 1,
            theta,
            stream,
        });
    }
    Ok(RoundOutcome {
        states: new_states,
        scratch,
    })
}

/// One round of the epigraph-specialized update on theta = (x, t):
/// p_j = t-mix - zeta 1, y_j = x-mix, a random Polyak step moves y toward a
/// drawn constraint set, then the objective-constraint step updates x
/// (projected onto X) and pushes t_j up by the same violation.
pub fn epigraph_round(
    states: &[NodeState],
    a: &WeightMatrix,
    zeta: f64,
    opts: &EngineOptions,
    problem: &EpigraphProblem,
    record: bool,
) -> Result<RoundOutcome> {
    let n = problem.n();
    let m = problem.m();
    let d = problem.d();
    let k = validate_round(states, a, n, d)?;
    if !(opts.beta > 0.0 && opts.beta < 2.0) {
        return Err(Error::BetaOutOfRange(opts.beta));
    }
    let beta = opts.beta;

    let mut new_states = Vec::with_capacity(n);
    let mut scratch = record.then(|| RoundScratch {
        k,
        nodes: Vec::with_capacity(n),
    });
    for j in 0..n {
        let stream = states[j].stream;
        let mixed = mix_state(j, a, states);
        let y = mixed.slice(s![..m]).to_owned();
        let mut p_t = mixed.slice(s![m..]).to_owned();
        p_t.mapv_inplace(|v| v - zeta);

        let constraints = problem.constraints_of(j);
        let mut z = y;
        let mut omegas = Vec::with_capacity(opts.random_projections_per_round as usize);
        for sub in 0..opts.random_projections_per_round {
            let idx = select_constraint(
                constraints,
                &z,
                &stream,
                k,
                sub as u64,
                opts.select_farthest_constraint,
            )?;
            omegas.push(idx);
            z = polyak_step_unchecked(&constraints[idx], &z, beta)?;
        }

        let f = problem.objective(j);
        let eval_x = if opts.f_step_at_mixed_point {
            mixed.slice(s![..m]).to_owned()
        } else {
            z.clone()
        };
        // violation of f_j(x) - t_j at the evaluation point
        let val = f.evaluate(&eval_x)? - p_t[j];
        let (x_new, mut t_new) = if val > 0.0 {
            let v = f.subgradient(&eval_x)?;
            let denom = v.dot(&v) + 1.0;
            let coef = beta * val / denom;
            let mut x_pre = z.clone();
            x_pre.scaled_add(-coef, &v);
            let mut t_new = p_t.clone();
            t_new[j] += coef;
            (x_pre, t_new)
        } else {
            (z.clone(), p_t.clone())
        };
        let x_proj = problem_x_project(problem, &x_new)?;
        // t-block is unconstrained
        let mut theta = Array1::zeros(d);
        theta.slice_mut(s![..m]).assign(&x_proj);
        theta
            .slice_mut(s![m..])
            .assign(&std::mem::take(&mut t_new));

        if let Some(sc) = scratch.as_mut() {
            let mut post_mix = Array1::zeros(d);
            post_mix.slice_mut(s![..m]).assign(&mixed.slice(s![..m]));
            post_mix.slice_mut(s![m..]).assign(&p_t);
            let mut post_random = post_mix.clone();
            post_random.slice_mut(s![..m]).assign(&z);
            sc.nodes.push(NodeScratch {
                omega: omegas,
                post_mix,
                post_random,
            });
        }
        new_states.push(NodeState {
            j,
            round: k + 1,
            theta,
            stream,
        });
    }
    Ok(RoundOutcome {
        states: new_states,
        scratch,
    })
}

/// Projection of the x-block onto X, read off the lifted Theta so the
/// specialized and generic paths share the identical set description.
fn problem_x_project(problem: &EpigraphProblem, x: &Array1<f64>) -> Result<Array1<f64>> {
    let m = problem.m();
    let mut padded = Array1::zeros(problem.d());
    padded.slice_mut(s![..m]).assign(x);
    let projected = problem.theta_set().project(&padded)?;
    Ok(projected.slice(s![..m]).to_owned())
}

/// One round of the plain distributed subgradient baseline:
/// x_j <- Pi_X(sum_i a_ji x_i - zeta d_j) with d_j a subgradient of the
/// node's own objective at its previous iterate. The projection is a
/// safeness addition; in the unbalancedness demonstration X never activates.
pub fn dgd_round(
    states: &[NodeState],
    a: &WeightMatrix,
    zeta: f64,
    objectives: &[ConvexFunction],
    x_set: &SimpleSet,
    record: bool,
) -> Result<RoundOutcome> {
    let n = objectives.len();
    let m = x_set.dimension();
    let k = validate_round(states, a, n, m)?;

    let mut new_states = Vec::with_capacity(n);
    let mut scratch = record.then(|| RoundScratch {
        k,
        nodes: Vec::with_capacity(n),
    });
    for j in 0..n {
        let grad = objectives[j].subgradient(&states[j].theta)?;
        let mut x = mix_state(j, a, states);
        let post_mix = record.then(|| x.clone());
        x.scaled_add(-zeta, &grad);
        let projected = x_set.project(&x)?;
        if let Some(sc) = scratch.as_mut() {
            sc.nodes.push(NodeScratch {
                omega: Vec::new(),
                post_mix: post_mix.unwrap(),
                post_random: x.clone(),
            });
        }
        new_states.push(NodeState {
            j,
            round: k + 1,
            theta: projected,
            stream: states[j].stream,
        });
    }
    Ok(RoundOutcome {
        states: new_states,
        scratch,
    })
}
