//! Neyman-Pearson classification with an equal-opportunity constraint.
//!
//! Thresholds are calibrated per sensitive group from left-out order
//! statistics of any scoring function, so that the type I error stays below
//! `alpha` with high probability while the gap between the groups' type II
//! errors stays below `epsilon` with high probability.

pub mod calibrate;
pub mod cli;
pub mod classifier;
pub mod config;
pub mod eo;
pub mod error;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod split;
pub mod types;
pub mod umbrella;

pub use classifier::{FnScorer, GroupThresholdClassifier, GroupThresholds, IdentityScorer, Scorer, SelectedOrders};
pub use config::NpEoConfig;
pub use error::{Error, Result};
pub use metrics::{evaluate, evaluate_scores, ErrorCounter, ErrorReport};
pub use split::{stratified_split, SplitPair};
pub use types::{Cell, CellValues, Dataset, Group, Label, LabeledSample, PerCell};
pub use umbrella::{l_count, np_order, pivot};
pub use calibrate::{calibrate, calibrate_mp, calibrate_np_only, calibrate_op, Calibration, GroupScores, Method};
pub use eo::{mixture_cdf, search_pair, violation_prob, FeasiblePair, PosteriorMixture};
pub use oracle::{bayes_oracle, np_eo_oracle, np_oracle, np_oracle_shared, GaussianGroupModel, OracleSolution};
