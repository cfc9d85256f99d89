//! Benchmark problems, error norms, convergence studies and timings.

pub mod cli;
pub mod norms;
pub mod problems;
pub mod solve;
pub mod study;
pub mod timing;
pub mod verify;

pub use norms::{error_norms, ErrorNorms};
pub use problems::{exact_problem, ProblemKind, ProblemSpec};
pub use solve::{solve, SolveOptions, Solution};
pub use study::{convergence_study, ConvergenceRow, MeshFamily, StudyConfig};
pub use timing::{timing_ratio, TimingConfig, TimingRow};
