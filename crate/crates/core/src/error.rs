use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building or running an instance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("beta must lie in (0, 2), got {0}")]
    BetaOutOfRange(f64),

    #[error("fallback direction must be nonzero")]
    ZeroFallback,

    #[error("zero subgradient at a strictly violated point; the constraint has no feasible point")]
    ZeroSubgradient,

    #[error("quadratic matrix is not symmetric positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("pointwise-max needs at least one branch")]
    EmptyMax,

    #[error("box bounds must satisfy lower <= upper in every coordinate")]
    InvalidBounds,

    #[error("ball radius must be nonnegative, got {0}")]
    NegativeRadius(f64),

    #[error("half-space normal must be nonzero")]
    ZeroNormal,

    #[error("intersection needs at least one member set")]
    EmptyIntersection,

    #[error("projection stalled: residual {residual:e} after {iterations} iterations")]
    ProjectionStalled { residual: f64, iterations: usize },

    #[error("edge ({i}, {j}) out of range for {n} nodes")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },

    #[error("gamma = {gamma} infeasible: smallest positive weight is {min_entry}")]
    GammaInfeasible { gamma: f64, min_entry: f64 },

    #[error("weight matrix row {row} sums to {sum}, not 1")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("weight entry ({i}, {j}) = {value} is positive but below gamma = {gamma}")]
    EntryBelowGamma {
        i: usize,
        j: usize,
        value: f64,
        gamma: f64,
    },

    #[error("self-loop weight missing at node {0}")]
    MissingSelfLoop(usize),

    #[error("backward product needs s >= k, got s = {s}, k = {k}")]
    InvalidWindow { s: u64, k: u64 },

    #[error("at least one node required")]
    EmptyProblem,

    #[error("decision dimension must be >= 1")]
    ZeroDimension,

    #[error("feasibility witness violates the instance: {0}")]
    InfeasibleWitness(String),

    #[error("cannot lift common set: {0}")]
    UnsupportedLift(String),

    #[error("step schedule requires a > 0, b >= 1, p in (0.5, 1]")]
    InvalidSchedule,

    #[error("node states are not synchronized at one round")]
    UnsynchronizedStates,

    #[error("instance is infeasible: {0}")]
    InfeasibleInstance(String),

    #[error(
        "oracle cross-check failed: {method_a} found {value_a}, {method_b} found {value_b}, \
         allowed gap {allowed}"
    )]
    OracleCertification {
        method_a: &'static str,
        value_a: f64,
        method_b: &'static str,
        value_b: f64,
        allowed: f64,
    },

    #[error("feasible-set projection did not converge: residual {residual:e}")]
    OracleProjection { residual: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("graph sequence fails joint connectivity for window {b} over horizon {horizon}")]
    ConnectivityCheckFailed { b: usize, horizon: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    TomlSerialize(#[from] toml::ser::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for CLI error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::BetaOutOfRange(_) => "beta_out_of_range",
            Error::ZeroFallback => "zero_fallback",
            Error::ZeroSubgradient => "zero_subgradient",
            Error::NotPositiveSemidefinite => "not_positive_semidefinite",
            Error::EmptyMax => "empty_max",
            Error::InvalidBounds => "invalid_bounds",
            Error::NegativeRadius(_) => "negative_radius",
            Error::ZeroNormal => "zero_normal",
            Error::EmptyIntersection => "empty_intersection",
            Error::ProjectionStalled { .. } => "projection_stalled",
            Error::EdgeOutOfRange { .. } => "edge_out_of_range",
            Error::GammaInfeasible { .. } => "gamma_infeasible",
            Error::NotRowStochastic { .. } => "not_row_stochastic",
            Error::EntryBelowGamma { .. } => "entry_below_gamma",
            Error::MissingSelfLoop(_) => "missing_self_loop",
            Error::InvalidWindow { .. } => "invalid_window",
            Error::EmptyProblem => "empty_problem",
            Error::ZeroDimension => "zero_dimension",
            Error::InfeasibleWitness(_) => "infeasible_witness",
            Error::UnsupportedLift(_) => "unsupported_lift",
            Error::InvalidSchedule => "invalid_schedule",
            Error::UnsynchronizedStates => "unsynchronized_states",
            Error::InfeasibleInstance(_) => "infeasible_instance",
            Error::OracleCertification { .. } => "oracle_certification",
            Error::OracleProjection { .. } => "oracle_projection",
            Error::InvalidConfig(_) => "invalid_config",
            Error::ConnectivityCheckFailed { .. } => "connectivity_check_failed",
            Error::Io(_) => "io",
            Error::TomlParse(_) => "toml_parse",
            Error::TomlSerialize(_) => "toml_serialize",
            Error::Json(_) => "json",
        }
    }
}
