//! Batch experiment orchestration: declarative run configs, the synchronous
//! round loop, trace records, and the baseline-vs-algorithm comparison.

mod compare;
mod config;
mod run;
mod trace;

pub use compare::{compare_dgd_drfp, CompareReport};
pub use config::{
    builtin_fixture, builtin_fixture_names, builtin_problem, Algorithm, BuiltProblem,
    EngineSection, FunctionDef, GraphSection, NodeDef, PhaseDef, ProblemDef, ProblemSource,
    RunConfig, RunSection, ScheduleDef, SetDef,
};
pub use run::{metrics, run, run_all, ProblemView, RunOutput, RunSummary, StopReason};
pub use trace::{
    trace_csv_string, write_scratch_jsonl, write_summary_json, write_trace_csv, TraceRecord,
};
