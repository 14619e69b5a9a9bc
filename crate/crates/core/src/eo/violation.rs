//! Probability that two independent posterior mixtures differ by more than
//! `epsilon`.

use super::mixture::{MixtureTable, PosteriorMixture};

/// Initial number of Stieltjes cells.
pub const BASE_CELLS: usize = 512;
/// Largest number of cells tried before the self-check gives up refining.
pub const MAX_CELLS: usize = 16_384;
/// Agreement required between a resolution and its doubling.
pub const SELF_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationEstimate {
    pub value: f64,
    /// Cells used for the returned value.
    pub cells: usize,
    /// `|value - value at half the cells|`.
    pub gap: f64,
}

/// `P(|F_a - F_b| > epsilon)` for independent mixtures.
pub fn violation_prob(mix_a: &PosteriorMixture, mix_b: &PosteriorMixture, epsilon: f64) -> f64 {
    if epsilon >= 1.0 {
        return 0.0;
    }
    violation_estimate(&MixtureTable::new(mix_a), &MixtureTable::new(mix_b), epsilon).value
}

/// Refines the Stieltjes sum until two successive resolutions agree.
pub fn violation_estimate(a: &MixtureTable, b: &MixtureTable, epsilon: f64) -> ViolationEstimate {
    if epsilon >= 1.0 {
        return ViolationEstimate { value: 0.0, cells: 0, gap: 0.0 };
    }
    // integrate against the narrower law so the cells resolve the wider one
    let (outer, inner) = if b.variance() <= a.variance() { (b, a) } else { (a, b) };
    let mut cells = BASE_CELLS;
    let mut prev = violation_at(inner, outer, epsilon, cells);
    loop {
        let next = violation_at(inner, outer, epsilon, 2 * cells);
        cells *= 2;
        let gap = (next - prev).abs();
        if gap <= SELF_CHECK_TOL || cells >= MAX_CELLS {
            return ViolationEstimate { value: next, cells, gap };
        }
        prev = next;
    }
}

/// `1 - Σ_m [A(τ_m + ε) - A(τ_m - ε)] (B(x_{m+1}) - B(x_m))` on `cells`
/// uniform cells covering the support of `outer`, with `τ_m` the cell
/// midpoints.
pub fn violation_at(inner: &MixtureTable, outer: &MixtureTable, epsilon: f64, cells: usize) -> f64 {
    let (lo, hi) = outer.support();
    let h = (hi - lo) / cells as f64;
    let mut prev_b = 0.0;
    let mut inside = 0.0;
    for m in 0..cells {
        let right = if m + 1 == cells { 1.0 } else { outer.cdf(lo + h * (m + 1) as f64) };
        let w = right - prev_b;
        prev_b = right;
        if w <= 0.0 {
            continue;
        }
        let tau = lo + h * (m as f64 + 0.5);
        inside += w * (inner.cdf(tau + epsilon) - inner.cdf(tau - epsilon));
    }
    (1.0 - inside).clamp(0.0, 1.0)
}

/// Cantelli lower bound on `P(|F_a - F_b| > epsilon)` from the first two
/// moments; zero when the mean gap is within `epsilon`.
pub fn violation_lower_bound(mean_gap: f64, variance: f64, epsilon: f64) -> f64 {
    let d = mean_gap.abs() - epsilon;
    if d <= 0.0 {
        return 0.0;
    }
    d * d / (variance + d * d)
}
