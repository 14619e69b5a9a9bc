//! Empirical group-conditional error rates.
//!
//! Counts are kept next to the rates so the decomposition
//! `R_y = R_y^a p(a|y) + R_y^b p(b|y)` can be checked exactly in integers.

use serde::{Deserialize, Serialize};

use crate::classifier::{GroupThresholdClassifier, GroupThresholds, Scorer};
use crate::error::{Error, Result};
use crate::types::{Cell, Dataset, Group, Label, PerCell};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Samples per cell.
    pub counts: PerCell<usize>,
    /// Misclassified samples per cell.
    pub errors: PerCell<usize>,
    pub r0: f64,
    pub r1: f64,
    pub r0_a: f64,
    pub r0_b: f64,
    pub r1_a: f64,
    pub r1_b: f64,
    /// Type II error disparity `|r1_a - r1_b|`.
    pub l1: f64,
    /// Empirical `p(group | label)`, indexed `[label][group]`.
    pub group_share: [[f64; 2]; 2],
}

impl ErrorReport {
    pub fn from_counts(counts: PerCell<usize>, errors: PerCell<usize>) -> Result<Self> {
        for (cell, &n) in counts.iter() {
            if n == 0 {
                return Err(Error::EmptyCell { label: cell.label, group: cell.group });
            }
            debug_assert!(errors[cell] <= n);
        }
        let rate = |label, group| {
            let cell = Cell::new(label, group);
            errors[cell] as f64 / counts[cell] as f64
        };
        let pooled = |label| {
            let (a, b) = (Cell::new(label, Group::A), Cell::new(label, Group::B));
            (errors[a] + errors[b]) as f64 / (counts[a] + counts[b]) as f64
        };
        let share = |label: Label| {
            let (a, b) = (counts[Cell::new(label, Group::A)], counts[Cell::new(label, Group::B)]);
            let n = (a + b) as f64;
            [a as f64 / n, b as f64 / n]
        };
        let (r1_a, r1_b) = (rate(Label::One, Group::A), rate(Label::One, Group::B));
        Ok(ErrorReport {
            counts,
            errors,
            r0: pooled(Label::Zero),
            r1: pooled(Label::One),
            r0_a: rate(Label::Zero, Group::A),
            r0_b: rate(Label::Zero, Group::B),
            r1_a,
            r1_b,
            l1: (r1_a - r1_b).abs(),
            group_share: [share(Label::Zero), share(Label::One)],
        })
    }

    pub fn rate(&self, label: Label, group: Group) -> f64 {
        match (label, group) {
            (Label::Zero, Group::A) => self.r0_a,
            (Label::Zero, Group::B) => self.r0_b,
            (Label::One, Group::A) => self.r1_a,
            (Label::One, Group::B) => self.r1_b,
        }
    }

    /// Checks `R_y = R_y^a p(a|y) + R_y^b p(b|y)` exactly on counts: the
    /// pooled numerator and denominator must equal the per-group sums.
    pub fn decomposition_holds(&self) -> bool {
        Label::ALL.iter().all(|&label| {
            let (a, b) = (Cell::new(label, Group::A), Cell::new(label, Group::B));
            let n = self.counts[a] + self.counts[b];
            let e = self.errors[a] + self.errors[b];
            // R_y * n_y == e_a + e_b, and the weighted group rates reduce to
            // the same fraction since p(s|y) = n_s / n_y.
            let pooled = if label == Label::Zero { self.r0 } else { self.r1 };
            pooled == e as f64 / n as f64
        })
    }
}

/// Accumulates per-cell error counts from scored samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorCounter {
    counts: PerCell<usize>,
    errors: PerCell<usize>,
}

impl ErrorCounter {
    pub fn record(&mut self, cell: Cell, predicted: Label) {
        self.counts[cell] += 1;
        if predicted != cell.label {
            self.errors[cell] += 1;
        }
    }

    pub fn record_score(&mut self, thresholds: &GroupThresholds, cell: Cell, score: f64) {
        self.record(cell, thresholds.predict_score(cell.group, score));
    }

    pub fn merge(&mut self, other: &ErrorCounter) {
        for i in 0..4 {
            self.counts.0[i] += other.counts.0[i];
            self.errors.0[i] += other.errors.0[i];
        }
    }

    pub fn finish(self) -> Result<ErrorReport> {
        ErrorReport::from_counts(self.counts, self.errors)
    }
}

/// Empirical error report of `classifier` on `dataset`.
pub fn evaluate<S: Scorer>(classifier: &GroupThresholdClassifier<S>, dataset: &Dataset) -> Result<ErrorReport> {
    let mut counter = ErrorCounter::default();
    for s in dataset.samples() {
        counter.record(s.cell(), classifier.predict_sample(s));
    }
    counter.finish()
}

/// Error report for precomputed scores, one `(cell, score)` per sample.
pub fn evaluate_scores<I>(thresholds: &GroupThresholds, scored: I) -> Result<ErrorReport>
where
    I: IntoIterator<Item = (Cell, f64)>,
{
    let mut counter = ErrorCounter::default();
    for (cell, score) in scored {
        counter.record_score(thresholds, cell, score);
    }
    counter.finish()
}
