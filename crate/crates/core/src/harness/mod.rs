//! Simulation harness: Gaussian data generation, repeated calibration runs
//! and violation-rate aggregation.

pub mod report;
pub mod sim;

pub use report::{AggregateReport, Estimate, MethodOutcome, MethodSummary, RepetitionRecord};
pub use sim::{gen_gaussian_data, run_repetition, run_repetitions, HarnessMethod, SimulationSpec};
