//! Equal-opportunity calibration: posterior mixtures of the group type II
//! errors, their disparity-violation probability and the pair search.

pub mod mixture;
pub mod search;
pub mod violation;

pub use mixture::{mixture_cdf, mixture_cdf_gauss_route, MixtureTable, PosteriorMixture};
pub use search::{search_pair, FeasiblePair, PairProblem, SearchContext, SearchStats};
pub use violation::{violation_estimate, violation_lower_bound, violation_prob, ViolationEstimate};
