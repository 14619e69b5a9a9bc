use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of an NP-EO calibration run.
///
/// `alpha` bounds the type I error, `delta` the probability of exceeding it;
/// `epsilon` bounds the type II error disparity between groups and `gamma`
/// the probability of exceeding that bound. `eta` is the type I margin used
/// only by the multiple-pivot variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NpEoConfig {
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub eta: f64,
    pub split_fraction: f64,
    pub seed: u64,
    /// Run the per-group NP order rule at `delta / 2`, which makes the
    /// union bound over both groups exact. Off by default.
    pub use_half_delta: bool,
}

impl Default for NpEoConfig {
    fn default() -> Self {
        NpEoConfig::new(0.1, 0.05, 0.2, 0.05)
    }
}

impl NpEoConfig {
    /// Config with `eta = 0.05 * alpha`, an even split and seed 0.
    pub fn new(alpha: f64, delta: f64, epsilon: f64, gamma: f64) -> Self {
        NpEoConfig {
            alpha,
            delta,
            epsilon,
            gamma,
            eta: 0.05 * alpha,
            split_fraction: 0.5,
            seed: 0,
            use_half_delta: false,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_half_delta(mut self, on: bool) -> Self {
        self.use_half_delta = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The violation level handed to the per-group NP order rule.
    pub fn np_delta(&self) -> f64 {
        if self.use_half_delta {
            self.delta / 2.0
        } else {
            self.delta
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        open_unit("alpha", self.alpha)?;
        open_unit("delta", self.delta)?;
        open_unit("epsilon", self.epsilon)?;
        open_unit("gamma", self.gamma)?;
        open_unit("split_fraction", self.split_fraction)?;
        if !(self.eta >= 0.0 && self.eta < self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "eta must satisfy 0 <= eta < alpha, got eta = {} with alpha = {}",
                self.eta, self.alpha
            )));
        }
        Ok(())
    }
}
