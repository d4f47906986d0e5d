//! Declarative run configuration. Everything a run needs lives in one TOML
//! file: the problem (by fixture name, file reference, or inline), the graph
//! sequence, the engine settings, and the round/trace budget. Configs
//! round-trip losslessly through serialization.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexFunction, SimpleSet};
use crate::engine::{EngineOptions, StepSchedule};
use crate::error::{Error, Result};
use crate::graph::{Digraph, GraphSequence, WeightMatrix};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub graph: GraphSection,
    #[serde(default)]
    pub engine: EngineSection,
    pub run: RunSection,
}

/// Where the problem instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    /// A named instance shipped with the crate.
    Fixture { fixture: String },
    /// A problem-definition TOML file next to the config.
    File { file: PathBuf },
    /// The definition written out inline.
    Inline { inline: ProblemDef },
}

/// A problem instance in declarative form; node indices are implicit from
/// the order of the `nodes` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDef {
    #[serde(default = "default_version")]
    pub version: u32,
    pub m: usize,
    pub feasible_point: Vec<f64>,
    pub x_set: SetDef,
    pub nodes: Vec<NodeDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDef {
    pub objective: FunctionDef,
    #[serde(default)]
    pub constraints: Vec<FunctionDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionDef {
    /// a'y + b
    Affine { a: Vec<f64>, b: f64 },
    /// 0.5 y'Py + a'y + b
    Quadratic {
        p: Vec<Vec<f64>>,
        a: Vec<f64>,
        b: f64,
    },
    /// ||y - center|| - radius
    NormShift { center: Vec<f64>, radius: f64 },
    /// pointwise max of branches
    Max { branches: Vec<FunctionDef> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetDef {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    HalfSpace { a: Vec<f64>, b: f64 },
    Intersection { pieces: Vec<SetDef> },
}

/// Graph sequence declaration. Edges are 1-based pairs [i, j] meaning node i
/// receives from node j; self-loops are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSection {
    Static {
        n: usize,
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<[usize; 2]>>,
    },
    Periodic {
        n: usize,
        gamma: f64,
        b_window: usize,
        phases: Vec<PhaseDef>,
    },
    SeededRandom {
        n: usize,
        gamma: f64,
        b_window: usize,
        seed: u64,
        #[serde(default = "default_extra_edge_prob")]
        extra_edge_prob: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDef {
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Drfp,
    Dgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub schedule: ScheduleDef,
    #[serde(default)]
    pub f_step_at_mixed_point: bool,
    #[serde(default = "default_one")]
    pub random_projections_per_round: u32,
    #[serde(default)]
    pub select_farthest_constraint: bool,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            algorithm: Algorithm::Drfp,
            beta: 1.0,
            schedule: ScheduleDef::default(),
            f_step_at_mixed_point: false,
            random_projections_per_round: 1,
            select_farthest_constraint: false,
        }
    }
}

/// Step sizes a / (k + b)^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDef {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl Default for ScheduleDef {
    fn default() -> Self {
        ScheduleDef {
            a: 1.0,
            b: 1.0,
            p: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub rounds: u64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_trace_every")]
    pub trace_every: u64,
    #[serde(default)]
    pub verbose_scratch: bool,
    /// Stop once all residuals at a trace point fall below this threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_stop: Option<f64>,
    /// Solve the instance centrally and report objective gaps in the trace.
    #[serde(default)]
    pub attach_oracle: bool,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    /// Refuse to run on a sequence failing the joint-connectivity check.
    #[serde(default = "default_true")]
    pub enforce_connectivity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity_horizon: Option<u64>,
}

fn default_version() -> u32 {
    1
}
fn default_extra_edge_prob() -> f64 {
    0.15
}
fn default_algorithm() -> Algorithm {
    Algorithm::Drfp
}
fn default_beta() -> f64 {
    1.0
}
fn default_one() -> u32 {
    1
}
fn default_trace_every() -> u64 {
    1
}
fn default_oracle_tol() -> f64 {
    1e-4
}
fn default_true() -> bool {
    true
}

/// Instances shipped with the crate, addressable as `fixture = "<name>"`.
pub fn builtin_fixture(name: &str) -> Option<&'static str> {
    match name {
        "two-node-quadratic" => Some(include_str!("../../fixtures/two_node_quadratic.toml")),
        "four-node-box" => Some(include_str!("../../fixtures/four_node_box.toml")),
        _ => None,
    }
}

pub fn builtin_fixture_names() -> &'static [&'static str] {
    &["two-node-quadratic", "four-node-box"]
}

/// Parse and build a shipped fixture in one step.
pub fn builtin_problem(name: &str) -> Result<ProblemSpec> {
    let text = builtin_fixture(name).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "unknown fixture '{name}'; available: {}",
            builtin_fixture_names().join(", ")
        ))
    })?;
    toml::from_str::<ProblemDef>(text)?.build()
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // resolve relative problem files against the config location
        if let ProblemSource::File { file } = &mut cfg.problem {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    /// Build and validate every component the run loop needs.
    pub fn build(&self) -> Result<BuiltProblem> {
        let problem = self.build_problem()?;
        let sequence = self.build_sequence()?;
        if sequence.n() != problem.n() {
            return Err(Error::InvalidConfig(format!(
                "graph has {} nodes but the problem has {}",
                sequence.n(),
                problem.n()
            )));
        }
        let schedule = StepSchedule::new(
            self.engine.schedule.a,
            self.engine.schedule.b,
            self.engine.schedule.p,
        )?;
        let mut options = EngineOptions::new(self.engine.beta)?;
        options.f_step_at_mixed_point = self.engine.f_step_at_mixed_point;
        options.random_projections_per_round = self.engine.random_projections_per_round.max(1);
        options.select_farthest_constraint = self.engine.select_farthest_constraint;
        Ok(BuiltProblem {
            problem,
            sequence,
            schedule,
            options,
        })
    }

    fn build_problem(&self) -> Result<ProblemSpec> {
        let def = match &self.problem {
            ProblemSource::Fixture { fixture } => {
                let text = builtin_fixture(fixture).ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "unknown fixture '{fixture}'; available: {}",
                        builtin_fixture_names().join(", ")
                    ))
                })?;
                toml::from_str::<ProblemDef>(text)?
            }
            ProblemSource::File { file } => {
                let text = std::fs::read_to_string(file)?;
                toml::from_str::<ProblemDef>(&text)?
            }
            ProblemSource::Inline { inline } => inline.clone(),
        };
        def.build()
    }

    fn build_sequence(&self) -> Result<GraphSequence> {
        self.graph.build()
    }
}

impl ProblemDef {
    pub fn build(&self) -> Result<ProblemSpec> {
        let x_set = self.x_set.build()?;
        if x_set.dimension() != self.m {
            return Err(Error::InvalidConfig(format!(
                "x_set has dimension {}, expected m = {}",
                x_set.dimension(),
                self.m
            )));
        }
        let mut objectives = Vec::with_capacity(self.nodes.len());
        let mut constraints = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            objectives.push(node.objective.build()?);
            constraints.push(
                node.constraints
                    .iter()
                    .map(|c| c.build())
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        ProblemSpec::new(
            x_set,
            objectives,
            constraints,
            Array1::from_vec(self.feasible_point.clone()),
        )
    }
}

impl FunctionDef {
    pub fn build(&self) -> Result<ConvexFunction> {
        match self {
            FunctionDef::Affine { a, b } => {
                Ok(ConvexFunction::affine(Array1::from_vec(a.clone()), *b))
            }
            FunctionDef::Quadratic { p, a, b } => {
                let n = a.len();
                let mut flat = Vec::with_capacity(n * n);
                for row in p {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: row.len(),
                        });
                    }
                    flat.extend_from_slice(row);
                }
                if p.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: p.len(),
                    });
                }
                let matrix = Array2::from_shape_vec((n, n), flat)
                    .map_err(|_| Error::InvalidConfig("ragged quadratic matrix".into()))?;
                ConvexFunction::quadratic(matrix, Array1::from_vec(a.clone()), *b)
            }
            FunctionDef::NormShift { center, radius } => Ok(ConvexFunction::norm_shift(
                Array1::from_vec(center.clone()),
                *radius,
            )),
            FunctionDef::Max { branches } => {
                let built = branches
                    .iter()
                    .map(|b| b.build())
                    .collect::<Result<Vec<_>>>()?;
                ConvexFunction::max_of(built)
            }
        }
    }
}

impl SetDef {
    pub fn build(&self) -> Result<SimpleSet> {
        match self {
            SetDef::Box { lower, upper } => SimpleSet::box_set(
                Array1::from_vec(lower.clone()),
                Array1::from_vec(upper.clone()),
            ),
            SetDef::Ball { center, radius } => {
                SimpleSet::ball(Array1::from_vec(center.clone()), *radius)
            }
            SetDef::HalfSpace { a, b } => SimpleSet::half_space(Array1::from_vec(a.clone()), *b),
            SetDef::Intersection { pieces } => {
                let built = pieces
                    .iter()
                    .map(|s| s.build())
                    .collect::<Result<Vec<_>>>()?;
                SimpleSet::intersection(built)
            }
        }
    }
}

fn edges_to_internal(n: usize, edges: &[[usize; 2]]) -> Result<Vec<(usize, usize)>> {
    edges
        .iter()
        .map(|&[i, j]| {
            if i == 0 || j == 0 || i > n || j > n {
                Err(Error::EdgeOutOfRange { i, j, n })
            } else {
                Ok((i - 1, j - 1))
            }
        })
        .collect()
}

impl GraphSection {
    pub fn build(&self) -> Result<GraphSequence> {
        match self {
            GraphSection::Static {
                n,
                gamma,
                matrix,
                edges,
            } => {
                let wm = match (matrix, edges) {
                    (Some(rows), None) => {
                        let mut flat = Vec::with_capacity(n * n);
                        if rows.len() != *n {
                            return Err(Error::DimensionMismatch {
                                expected: *n,
                                got: rows.len(),
                            });
                        }
                        for row in rows {
                            if row.len() != *n {
                                return Err(Error::DimensionMismatch {
                                    expected: *n,
                                    got: row.len(),
                                });
                            }
                            flat.extend_from_slice(row);
                        }
                        let a = Array2::from_shape_vec((*n, *n), flat)
                            .map_err(|_| Error::InvalidConfig("ragged weight matrix".into()))?;
                        WeightMatrix::from_matrix(a, *gamma)?
                    }
                    (None, Some(edges)) => {
                        let g = Digraph::from_edges(*n, &edges_to_internal(*n, edges)?)?;
                        WeightMatrix::from_digraph_equal(&g, *gamma)?
                    }
                    _ => {
                        return Err(Error::InvalidConfig(
                            "static graph needs exactly one of `matrix` or `edges`".into(),
                        ))
                    }
                };
                Ok(GraphSequence::fixed(wm))
            }
            GraphSection::Periodic {
                n,
                gamma,
                b_window,
                phases,
            } => {
                let mats = phases
                    .iter()
                    .map(|ph| {
                        let g = Digraph::from_edges(*n, &edges_to_internal(*n, &ph.edges)?)?;
                        WeightMatrix::from_digraph_equal(&g, *gamma)
                    })
                    .collect::<Result<Vec<_>>>()?;
                GraphSequence::periodic(mats, *b_window)
            }
            GraphSection::SeededRandom {
                n,
                gamma,
                b_window,
                seed,
                extra_edge_prob,
            } => GraphSequence::seeded_random(*n, *b_window, *gamma, *seed, *extra_edge_prob),
        }
    }
}

/// Every validated component a run needs.
pub struct BuiltProblem {
    pub problem: ProblemSpec,
    pub sequence: GraphSequence,
    pub schedule: StepSchedule,
    pub options: EngineOptions,
}
