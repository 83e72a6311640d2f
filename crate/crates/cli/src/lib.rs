//! Configuration-driven experiments over the solvers in `feg-core`: runs each
//! method, attaches the matching rate bound and certificates, and writes CSV
//! and JSON artifacts.

mod config;
mod error;
mod output;
mod runner;

pub use config::{Emit, ExperimentConfig, MethodConfig, ProblemConfig, SCHEMA_VERSION};
pub use error::{BenchError, Result};
pub use output::{emit_trace_csv, fmt17, read_trace_csv, trace_rows, write_json, TraceRow, CSV_HEADER};
pub use runner::{build_problem, run_experiment, Certificates, ExperimentOutcome, Summary};
