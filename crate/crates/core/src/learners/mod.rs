//! Built-in base scorer and ingestion of externally produced scores.

pub mod io;
pub mod logistic;

pub use io::{load_dataset, load_scores, read_dataset, read_scores, write_dataset, ScoreRecord, ScoreTable};
pub use logistic::{fit_logistic, sigmoid, LogisticModel, LogisticOptions};
