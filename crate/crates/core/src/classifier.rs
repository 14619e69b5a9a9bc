//! Group-threshold classifiers: a scoring function plus one threshold per
//! sensitive group. A sample is predicted class 1 iff its score is strictly
//! greater than its group's threshold; a score equal to the threshold
//! predicts class 0.

use serde::{Deserialize, Serialize};

use crate::types::{Group, Label, LabeledSample};

/// Maps `(features, group)` to a real score; larger means "more class 1".
pub trait Scorer: Send + Sync {
    fn score(&self, features: &[f64], group: Group) -> f64;
}

/// Adapts a closure `(features, group) -> score` into a [`Scorer`].
#[derive(Debug, Clone, Copy)]
pub struct FnScorer<F>(pub F);

impl<F> Scorer for FnScorer<F>
where
    F: Fn(&[f64], Group) -> f64 + Send + Sync,
{
    fn score(&self, features: &[f64], group: Group) -> f64 {
        (self.0)(features, group)
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, features: &[f64], group: Group) -> f64 {
        (**self).score(features, group)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score(&self, features: &[f64], group: Group) -> f64 {
        (**self).score(features, group)
    }
}

/// Uses the first feature as the score. Datasets loaded from score files
/// carry the external score in that slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityScorer;

impl Scorer for IdentityScorer {
    fn score(&self, features: &[f64], _group: Group) -> f64 {
        features[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupThresholds {
    pub a: f64,
    pub b: f64,
}

impl GroupThresholds {
    pub fn new(a: f64, b: f64) -> Self {
        GroupThresholds { a, b }
    }

    pub fn uniform(c: f64) -> Self {
        GroupThresholds { a: c, b: c }
    }

    /// Thresholds that send every finite score to class 0.
    pub fn reject_all() -> Self {
        GroupThresholds::uniform(f64::INFINITY)
    }

    pub fn get(&self, group: Group) -> f64 {
        match group {
            Group::A => self.a,
            Group::B => self.b,
        }
    }

    pub fn set(&mut self, group: Group, value: f64) {
        match group {
            Group::A => self.a = value,
            Group::B => self.b = value,
        }
    }

    pub fn predict_score(&self, group: Group, score: f64) -> Label {
        if score > self.get(group) {
            Label::One
        } else {
            Label::Zero
        }
    }
}

/// The 1-based class-1 order statistics selected in each group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedOrders {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub struct GroupThresholdClassifier<S> {
    pub scorer: S,
    pub thresholds: GroupThresholds,
    pub orders: Option<SelectedOrders>,
}

impl<S: Scorer> GroupThresholdClassifier<S> {
    pub fn new(scorer: S, thresholds: GroupThresholds) -> Self {
        GroupThresholdClassifier { scorer, thresholds, orders: None }
    }

    pub fn with_orders(mut self, orders: SelectedOrders) -> Self {
        self.orders = Some(orders);
        self
    }

    pub fn score(&self, features: &[f64], group: Group) -> f64 {
        self.scorer.score(features, group)
    }

    pub fn predict(&self, features: &[f64], group: Group) -> Label {
        self.thresholds.predict_score(group, self.score(features, group))
    }

    pub fn predict_sample(&self, sample: &LabeledSample) -> Label {
        self.predict(&sample.features, sample.group)
    }
}
