//! Logistic regression trained by deterministic full-batch gradient descent.
//!
//! The design row of a sample is `[x_1 .. x_d, 1{group = b}, 1]`, so the two
//! group score functions differ only by one weight.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Scorer;
use crate::error::{Error, Result};
use crate::types::{Dataset, Group, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticOptions {
    pub iterations: usize,
    /// Base step; the actual rate is `step * 4 / (1 + mean ||row||^2)`.
    pub step: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions { iterations: 500, step: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Feature weights followed by the group-b weight and the intercept.
    pub weights: Vec<f64>,
}

fn design_row(features: &[f64], group: Group, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(features);
    out.push(if group == Group::B { 1.0 } else { 0.0 });
    out.push(1.0);
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        LogisticModel { weights: vec![0.0; dim + 2] }
    }

    /// Number of raw features the model expects.
    pub fn dim(&self) -> usize {
        self.weights.len() - 2
    }

    /// Linear predictor `w . row`.
    pub fn margin(&self, features: &[f64], group: Group) -> f64 {
        let d = self.dim();
        debug_assert_eq!(features.len(), d);
        let mut z = self.weights[d + 1];
        if group == Group::B {
            z += self.weights[d];
        }
        z + features.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>()
    }

    /// Mean negative log-likelihood on `data`.
    pub fn log_loss(&self, data: &Dataset) -> f64 {
        let total: f64 = data
            .samples()
            .iter()
            .map(|s| {
                let z = self.margin(&s.features, s.group);
                // log(1 + e^z) - y z, computed stably
                let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                softplus - if s.label == Label::One { z } else { 0.0 }
            })
            .sum();
        total / data.len() as f64
    }

    /// Whitespace-separated weights on one line, after a `#` comment.
    pub fn to_text(&self) -> String {
        let mut s = format!("# logistic weights: {} features, group-b, intercept\n", self.dim());
        let line: Vec<String> = self.weights.iter().map(|w| format!("{w:e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line.split_whitespace() {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse { line: idx + 1, message: format!("bad weight {tok:?}") })?;
                if !w.is_finite() {
                    return Err(Error::Parse { line: idx + 1, message: format!("non-finite weight {tok:?}") });
                }
                weights.push(w);
            }
        }
        if weights.len() < 3 {
            return Err(Error::Parse { line: 0, message: format!("expected at least 3 weights, found {}", weights.len()) });
        }
        Ok(LogisticModel { weights })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        LogisticModel::from_text(&std::fs::read_to_string(path)?)
    }
}

impl Scorer for LogisticModel {
    fn score(&self, features: &[f64], group: Group) -> f64 {
        sigmoid(self.margin(features, group))
    }
}

/// Fits a logistic model from zero weights with a fixed number of
/// full-batch gradient steps.
pub fn fit_logistic(train: &Dataset, options: LogisticOptions) -> Result<LogisticModel> {
    let labels = train.samples().iter().map(|s| s.label);
    let ones = labels.filter(|&l| l == Label::One).count();
    if ones == 0 || ones == train.len() {
        return Err(Error::DegenerateLabels);
    }
    if !(options.step > 0.0) {
        return Err(Error::InvalidConfig(format!("logistic step must be positive, got {}", options.step)));
    }
    let d = train.dim();
    let n = train.len() as f64;
    let rows: Vec<(Vec<f64>, f64)> = train
        .samples()
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(d + 2);
            design_row(&s.features, s.group, &mut row);
            (row, if s.label == Label::One { 1.0 } else { 0.0 })
        })
        .collect();
    let mean_sq = rows.iter().map(|(r, _)| r.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / n;
    // 4 / mean ||row||^2 bounds the inverse curvature of the mean log-loss
    let rate = options.step * 4.0 / (1.0 + mean_sq);

    let mut model = LogisticModel::zeros(d);
    let mut grad = vec![0.0; d + 2];
    for _ in 0..options.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (row, y) in &rows {
            let z: f64 = row.iter().zip(&model.weights).map(|(x, w)| x * w).sum();
            let r = sigmoid(z) - y;
            for (g, x) in grad.iter_mut().zip(row) {
                *g += r * x;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= rate * g / n;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LabeledSample;

    fn toy() -> Dataset {
        let pts = [(-2.0, 0), (-1.5, 0), (-1.0, 0), (-0.7, 0), (0.8, 1), (1.1, 1), (1.6, 1), (2.5, 1)];
        Dataset::new(
            pts.iter()
                .enumerate()
                .map(|(i, &(x, y))| {
                    let g = if i % 2 == 0 { Group::A } else { Group::B };
                    LabeledSample::new(vec![x], g, Label::from_bit(y).unwrap())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_iterations_score_one_half() {
        let m = fit_logistic(&toy(), LogisticOptions { iterations: 0, step: 1.0 }).unwrap();
        assert_eq!(m.score(&[3.0], Group::A), 0.5);
        assert_eq!(m.score(&[-3.0], Group::B), 0.5);
    }

    #[test]
    fn loss_decreases_every_iteration() {
        let data = toy();
        let mut prev = f64::INFINITY;
        for it in 0..40 {
            let m = fit_logistic(&data, LogisticOptions { iterations: it, step: 1.0 }).unwrap();
            let loss = m.log_loss(&data);
            assert!(loss < prev, "iteration {it}: {loss} >= {prev}");
            prev = loss;
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let d = Dataset::new(vec![LabeledSample::new(vec![1.0], Group::A, Label::Zero)]).unwrap();
        assert!(matches!(fit_logistic(&d, LogisticOptions::default()), Err(Error::DegenerateLabels)));
    }

    #[test]
    fn text_roundtrip() {
        let m = fit_logistic(&toy(), LogisticOptions::default()).unwrap();
        let back = LogisticModel::from_text(&m.to_text()).unwrap();
        assert_eq!(m, back);
        assert!(matches!(LogisticModel::from_text("1 2 x"), Err(Error::Parse { line: 1, .. })));
    }
}
