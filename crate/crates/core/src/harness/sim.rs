//! Gaussian simulation and the repetition runner.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{AggregateReport, MethodOutcome, RepetitionRecord};
use crate::calibrate::{calibrate_mp, calibrate_np_only, calibrate_op, GroupScores};
use crate::classifier::{GroupThresholds, Scorer};
use crate::config::NpEoConfig;
use crate::error::{Error, Result};
use crate::learners::{fit_logistic, LogisticOptions};
use crate::metrics::ErrorCounter;
use crate::split::stratified_split;
use crate::types::{Cell, CellValues, Dataset, LabeledSample, PerCell};

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

/// Methods compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarnessMethod {
    Op,
    Mp,
    /// NP umbrella on merged class-0 scores, no EO step.
    Np,
    /// Logistic scores thresholded at 0.5.
    Classical,
}

impl HarnessMethod {
    pub const ALL: [HarnessMethod; 4] = [HarnessMethod::Op, HarnessMethod::Mp, HarnessMethod::Np, HarnessMethod::Classical];

    pub fn name(self) -> &'static str {
        match self {
            HarnessMethod::Op => "op",
            HarnessMethod::Mp => "mp",
            HarnessMethod::Np => "np",
            HarnessMethod::Classical => "classical",
        }
    }
}

impl std::fmt::Display for HarnessMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for HarnessMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        HarnessMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method {s:?} (expected op, mp, np or classical)"))
    }
}

fn default_test_multiplier() -> usize {
    100
}

fn default_repetitions() -> usize {
    200
}

fn default_methods() -> Vec<HarnessMethod> {
    HarnessMethod::ALL.to_vec()
}

/// A Gaussian simulation: `X | (y, s) ~ N(mu_{y,s}, scale I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default)]
    pub name: String,
    pub means: CellValues<Vec<f64>>,
    /// Common covariance scale.
    pub scale: f64,
    /// Training-data size per cell (before the calibration split).
    pub counts: CellValues<usize>,
    /// Test samples per cell, as a multiple of `counts`.
    #[serde(default = "default_test_multiplier")]
    pub test_multiplier: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<HarnessMethod>,
    #[serde(default)]
    pub config: NpEoConfig,
    #[serde(default)]
    pub logistic: LogisticOptions,
}

impl SimulationSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SimulationSpec = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        SimulationSpec::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let means = self.means.to_per_cell();
        let dim = means[Cell::ALL[0]].len();
        if dim == 0 || means.iter().any(|(_, m)| m.len() != dim) {
            return Err(Error::InvalidConfig("all cell means need the same nonzero dimension".into()));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidConfig(format!("covariance scale must be positive, got {}", self.scale)));
        }
        if self.counts.to_per_cell().iter().any(|(_, &n)| n == 0) {
            return Err(Error::InvalidConfig("every cell count must be positive".into()));
        }
        if self.test_multiplier == 0 || self.repetitions == 0 {
            return Err(Error::InvalidConfig("test multiplier and repetitions must be positive".into()));
        }
        self.config.validate()
    }

    pub fn dim(&self) -> usize {
        self.means.a0.len()
    }
}

/// Draws `counts[cell]` samples per cell from `N(mu_cell, scale I)`, cells
/// in the fixed order `(0,a), (0,b), (1,a), (1,b)`.
pub fn gen_gaussian_data(spec: &SimulationSpec, counts: PerCell<usize>, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TRAIN_STREAM);
    let means = spec.means.to_per_cell();
    let sd = spec.scale.sqrt();
    let mut samples = Vec::with_capacity(counts.0.iter().sum());
    for cell in Cell::ALL {
        for _ in 0..counts[cell] {
            let x = means[cell]
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + sd * z
                })
                .collect();
            samples.push(LabeledSample::new(x, cell.group, cell.label));
        }
    }
    Dataset::new(samples).expect("spec validated: nonempty dataset with a common dimension")
}

/// Evaluates several threshold pairs on a fresh test sample streamed from
/// the simulation without materializing it.
fn evaluate_on_fresh_sample<S: Scorer>(
    spec: &SimulationSpec,
    seed: u64,
    scorer: &S,
    thresholds: &[Option<GroupThresholds>],
) -> Vec<ErrorCounter> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TEST_STREAM);
    let means = spec.means.to_per_cell();
    let counts = spec.counts.to_per_cell();
    let sd = spec.scale.sqrt();
    let mut counters = vec![ErrorCounter::default(); thresholds.len()];
    let mut x = vec![0.0; spec.dim()];
    for cell in Cell::ALL {
        for _ in 0..counts[cell] * spec.test_multiplier {
            for (xi, &m) in x.iter_mut().zip(&means[cell]) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *xi = m + sd * z;
            }
            let score = scorer.score(&x, cell.group);
            for (counter, th) in counters.iter_mut().zip(thresholds) {
                if let Some(th) = th {
                    counter.record_score(th, cell, score);
                }
            }
        }
    }
    counters
}

/// One repetition: generate, split, fit, calibrate every method and
/// evaluate on a fresh test sample.
pub fn run_repetition(spec: &SimulationSpec, index: usize) -> Result<RepetitionRecord> {
    let seed = spec.base_seed.wrapping_add(index as u64);
    let data = gen_gaussian_data(spec, spec.counts.to_per_cell(), seed);
    let split = stratified_split(&data, spec.config.split_fraction, seed)?;
    let model = fit_logistic(&split.train, spec.logistic)?;
    let scores = GroupScores::from_dataset(&model, &split.left_out)?;

    let mut calibrated = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let result = match method {
            HarnessMethod::Op => calibrate_op(&scores, &spec.config).map(|c| (c.thresholds, c.orders)),
            HarnessMethod::Mp => calibrate_mp(&scores, &spec.config).map(|c| (c.thresholds, c.orders)),
            HarnessMethod::Np => calibrate_np_only(&scores, &spec.config).map(|c| (c.thresholds, None)),
            HarnessMethod::Classical => Ok((GroupThresholds::uniform(0.5), None)),
        };
        calibrated.push(result);
    }
    let thresholds: Vec<Option<GroupThresholds>> =
        calibrated.iter().map(|r| r.as_ref().ok().map(|(t, _)| *t)).collect();
    let counters = evaluate_on_fresh_sample(spec, seed, &model, &thresholds);

    let mut outcomes = Vec::with_capacity(spec.methods.len());
    for ((&method, result), counter) in spec.methods.iter().zip(calibrated).zip(counters) {
        outcomes.push(match result {
            Ok((thresholds, orders)) => MethodOutcome::Ok { method, thresholds, orders, report: counter.finish()? },
            Err(e) => MethodOutcome::Failed { method, error: e.to_string() },
        });
    }
    Ok(RepetitionRecord { index, seed, outcomes })
}

/// Runs all repetitions in parallel and aggregates them in index order, so
/// the result does not depend on scheduling.
pub fn run_repetitions(spec: &SimulationSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let records: Vec<RepetitionRecord> =
        (0..spec.repetitions).into_par_iter().map(|r| run_repetition(spec, r)).collect::<Result<_>>()?;
    Ok(AggregateReport::from_records(spec, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SimulationSpec {
        SimulationSpec::from_toml(
            r#"
            scale = 1.0
            test_multiplier = 2
            repetitions = 2
            methods = ["np", "classical"]
            [means]
            a0 = [0.0, 0.0]
            b0 = [0.0, 1.0]
            a1 = [2.0, 0.0]
            b1 = [2.0, 2.0]
            [counts]
            a0 = 200
            b0 = 200
            a1 = 100
            b1 = 100
            "#,
        )
        .unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = tiny();
        let counts = spec.counts.to_per_cell();
        assert_eq!(gen_gaussian_data(&spec, counts, 5), gen_gaussian_data(&spec, counts, 5));
        assert_ne!(gen_gaussian_data(&spec, counts, 5), gen_gaussian_data(&spec, counts, 6));
    }

    #[test]
    fn spec_validation() {
        let mut spec = tiny();
        spec.scale = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = tiny();
        spec.means.b1 = vec![1.0];
        assert!(spec.validate().is_err());
        assert!(SimulationSpec::from_toml("scale = 1.0\nbogus = 3").is_err());
    }

    #[test]
    fn method_names_roundtrip() {
        for m in HarnessMethod::ALL {
            assert_eq!(m.name().parse::<HarnessMethod>().unwrap(), m);
        }
        assert!("fairbayes".parse::<HarnessMethod>().is_err());
    }

    #[test]
    fn repetitions_run() {
        let report = run_repetitions(&tiny()).unwrap();
        assert_eq!(report.methods.len(), 2);
        assert_eq!(report.methods[0].successes, 2);
    }
}
