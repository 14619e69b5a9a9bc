//! Threshold calibration from left-out scores.
//!
//! The one-pair-of-pivots procedure (OP) fixes one class-0 pivot per group
//! with the NP order rule and then raises the thresholds to class-1 order
//! statistics until the disparity-violation probability is at most `gamma`.
//! The multiple-pivots procedure (MP) tries every pivot pair that leaves the
//! same number of class-0 scores above the pivots as OP would at level
//! `alpha - eta`, and keeps the pair with the lowest empirical type II error.

use serde::{Deserialize, Serialize};

use crate::classifier::{GroupThresholdClassifier, GroupThresholds, Scorer, SelectedOrders};
use crate::config::NpEoConfig;
use crate::eo::{FeasiblePair, PairProblem, SearchContext, SearchStats};
use crate::error::{Error, Result};
use crate::types::{Cell, Dataset, Group, Label, PerCell};
use crate::umbrella::{l_count, np_order, pivot};

/// The four ascending left-out score sequences, one per `(label, group)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScores {
    cells: PerCell<Vec<f64>>,
}

impl GroupScores {
    /// Sorts each sequence; every cell must be nonempty and every score
    /// finite.
    pub fn new(mut cells: PerCell<Vec<f64>>) -> Result<Self> {
        for cell in Cell::ALL {
            let v = &mut cells[cell];
            if v.is_empty() {
                return Err(Error::EmptyCell { label: cell.label, group: cell.group });
            }
            if let Some(bad) = v.iter().find(|s| !s.is_finite()) {
                return Err(Error::InvalidConfig(format!("non-finite score {bad} in cell {cell}")));
            }
            v.sort_by(f64::total_cmp);
        }
        Ok(GroupScores { cells })
    }

    pub fn from_scored<I: IntoIterator<Item = (Cell, f64)>>(scored: I) -> Result<Self> {
        let mut cells = PerCell::<Vec<f64>>::default();
        for (cell, s) in scored {
            cells[cell].push(s);
        }
        GroupScores::new(cells)
    }

    /// Scores every sample of `dataset` with `scorer`.
    pub fn from_dataset<S: Scorer>(scorer: &S, dataset: &Dataset) -> Result<Self> {
        GroupScores::from_scored(dataset.samples().iter().map(|s| (s.cell(), scorer.score(&s.features, s.group))))
    }

    pub fn get(&self, cell: Cell) -> &[f64] {
        &self.cells[cell]
    }

    pub fn class(&self, label: Label, group: Group) -> &[f64] {
        self.get(Cell::new(label, group))
    }

    pub fn len(&self, cell: Cell) -> usize {
        self.cells[cell].len()
    }

    pub fn counts(&self) -> PerCell<usize> {
        PerCell::from_fn(|c| self.len(c))
    }

    /// Applies `f` to every score, re-sorting afterwards.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GroupScores::new(PerCell::from_fn(|c| self.get(c).iter().map(|&s| f(s)).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// One pair of pivots.
    Op,
    /// Multiple pairs of pivots.
    Mp,
    /// NP umbrella on the merged class-0 scores with a common threshold.
    NpOnly,
}

/// Outcome of a calibration: thresholds plus the intermediate quantities
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub method: Method,
    pub thresholds: GroupThresholds,
    /// Selected class-1 orders; absent for [`Method::NpOnly`].
    pub orders: Option<SelectedOrders>,
    /// Class-0 orders of the pivots (`u`, `v`).
    pub pivot_orders: SelectedOrders,
    pub pivots: GroupThresholds,
    /// Class-1 scores at or below each pivot.
    pub l_counts: [usize; 2],
    pub pair: Option<FeasiblePair>,
    /// Pivot pairs enumerated / actually searched (1 / 1 for OP).
    pub pivot_pairs: usize,
    pub pivot_pairs_searched: usize,
    pub stats: SearchStats,
}

impl Calibration {
    pub fn into_classifier<S: Scorer>(self, scorer: S) -> GroupThresholdClassifier<S> {
        let clf = GroupThresholdClassifier::new(scorer, self.thresholds);
        match self.orders {
            Some(o) => clf.with_orders(o),
            None => clf,
        }
    }
}

/// Runs the calibration selected by `method`.
pub fn calibrate(method: Method, scores: &GroupScores, config: &NpEoConfig) -> Result<Calibration> {
    match method {
        Method::Op => calibrate_op(scores, config),
        Method::Mp => calibrate_mp(scores, config),
        Method::NpOnly => calibrate_np_only(scores, config),
    }
}

struct Pivots {
    orders: SelectedOrders,
    values: GroupThresholds,
    l: [usize; 2],
}

fn pivots_at(scores: &GroupScores, u: usize, v: usize) -> Result<Pivots> {
    let pa = pivot(scores.class(Label::Zero, Group::A), u)?;
    let pb = pivot(scores.class(Label::Zero, Group::B), v)?;
    let l = [l_count(scores.class(Label::One, Group::A), pa), l_count(scores.class(Label::One, Group::B), pb)];
    Ok(Pivots { orders: SelectedOrders { a: u, b: v }, values: GroupThresholds::new(pa, pb), l })
}

fn problem(scores: &GroupScores, l: [usize; 2]) -> PairProblem {
    PairProblem::new(l[0], l[1], scores.class(Label::One, Group::A).len(), scores.class(Label::One, Group::B).len())
}

fn thresholds_for(scores: &GroupScores, pair: &FeasiblePair) -> GroupThresholds {
    GroupThresholds::new(scores.class(Label::One, Group::A)[pair.i - 1], scores.class(Label::One, Group::B)[pair.j - 1])
}

/// One-pair-of-pivots calibration.
pub fn calibrate_op(scores: &GroupScores, config: &NpEoConfig) -> Result<Calibration> {
    config.validate()?;
    let delta = config.np_delta();
    let u = np_order(scores.class(Label::Zero, Group::A).len(), config.alpha, delta)?;
    let v = np_order(scores.class(Label::Zero, Group::B).len(), config.alpha, delta)?;
    let piv = pivots_at(scores, u, v)?;
    let mut ctx = SearchContext::new(config.epsilon, config.gamma);
    let pair = ctx.search(problem(scores, piv.l), None)?;
    Ok(Calibration {
        method: Method::Op,
        thresholds: thresholds_for(scores, &pair),
        orders: Some(SelectedOrders { a: pair.i, b: pair.j }),
        pivot_orders: piv.orders,
        pivots: piv.values,
        l_counts: piv.l,
        pair: Some(pair),
        pivot_pairs: 1,
        pivot_pairs_searched: 1,
        stats: ctx.stats,
    })
}

/// Number of class-0 scores left above the pivots by the multiple-pivots
/// procedure: the OP count at level `alpha - eta` with the full `delta`.
pub fn mp_budget(scores: &GroupScores, config: &NpEoConfig) -> Result<usize> {
    let alpha = config.alpha - config.eta;
    let n_a = scores.class(Label::Zero, Group::A).len();
    let n_b = scores.class(Label::Zero, Group::B).len();
    let u = np_order(n_a, alpha, config.delta)?;
    let v = np_order(n_b, alpha, config.delta)?;
    Ok((n_a - u) + (n_b - v))
}

/// Pivot pairs `(u, v)` with `(n_a - u) + (n_b - v) == above`, by
/// descending `u`.
pub fn pivot_pairs(n_a: usize, n_b: usize, above: usize) -> Vec<(usize, usize)> {
    (0..=above)
        .filter(|&r| r < n_a && above - r < n_b)
        .map(|r| (n_a - r, n_b - (above - r)))
        .collect()
}

/// Multiple-pairs-of-pivots calibration.
pub fn calibrate_mp(scores: &GroupScores, config: &NpEoConfig) -> Result<Calibration> {
    config.validate()?;
    let above = mp_budget(scores, config)?;
    let n_a = scores.class(Label::Zero, Group::A).len();
    let n_b = scores.class(Label::Zero, Group::B).len();
    let pairs = pivot_pairs(n_a, n_b, above);

    let mut ctx = SearchContext::new(config.epsilon, config.gamma);
    // identical l-counts give identical searches; the lowest pivot order
    // wins ties, so only the first of each is kept
    let mut seen_l = std::collections::HashSet::new();
    let mut candidates = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs.iter().rev() {
        let piv = pivots_at(scores, u, v)?;
        if !seen_l.insert(piv.l) {
            continue;
        }
        if let Some(floor) = ctx.sum_floor(problem(scores, piv.l), None) {
            candidates.push((floor, piv));
        }
    }
    // most promising first so the bound on the sum tightens early
    candidates.sort_by_key(|(floor, p)| (*floor, p.orders.a));

    let mut best: Option<((usize, usize, usize, usize), Pivots, FeasiblePair)> = None;
    let mut searched = 0;
    for (floor, piv) in candidates {
        let bound = best.as_ref().map(|(key, _, _)| key.0);
        if bound.is_some_and(|b| floor > b) {
            break;
        }
        searched += 1;
        let prob = problem(scores, piv.l);
        match ctx.search(prob, bound) {
            Ok(pair) => {
                let key = (pair.i + pair.j, prob.balance(pair.i, pair.j), pair.i, piv.orders.a);
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, piv, pair));
                }
            }
            Err(Error::NoViablePair { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let (_, piv, pair) = best.ok_or(Error::NoViablePair { epsilon: config.epsilon, gamma: config.gamma })?;
    Ok(Calibration {
        method: Method::Mp,
        thresholds: thresholds_for(scores, &pair),
        orders: Some(SelectedOrders { a: pair.i, b: pair.j }),
        pivot_orders: piv.orders,
        pivots: piv.values,
        l_counts: piv.l,
        pair: Some(pair),
        pivot_pairs: pairs.len(),
        pivot_pairs_searched: searched,
        stats: ctx.stats,
    })
}

/// NP umbrella on the merged class-0 scores; both groups share the pivot.
pub fn calibrate_np_only(scores: &GroupScores, config: &NpEoConfig) -> Result<Calibration> {
    config.validate()?;
    let mut merged: Vec<f64> = Group::ALL.iter().flat_map(|&g| scores.class(Label::Zero, g).iter().copied()).collect();
    merged.sort_by(f64::total_cmp);
    let k = np_order(merged.len(), config.alpha, config.delta)?;
    let c = pivot(&merged, k)?;
    let l = [
        l_count(scores.class(Label::One, Group::A), c),
        l_count(scores.class(Label::One, Group::B), c),
    ];
    Ok(Calibration {
        method: Method::NpOnly,
        thresholds: GroupThresholds::uniform(c),
        orders: None,
        pivot_orders: SelectedOrders { a: k, b: k },
        pivots: GroupThresholds::uniform(c),
        l_counts: l,
        pair: None,
        pivot_pairs: 1,
        pivot_pairs_searched: 0,
        stats: SearchStats::default(),
    })
}
