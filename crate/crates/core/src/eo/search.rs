//! Search for the class-1 order pair `(i, j)` with the smallest empirical
//! type II error whose disparity-violation probability is at most `gamma`.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::mixture::{MixtureTable, PosteriorMixture};
use super::violation::{violation_estimate, violation_lower_bound};
use crate::error::{Error, Result};
use crate::types::Group;

/// Slack above `gamma` a moment bound must clear before a pair is discarded
/// without evaluating the integral.
const PREFILTER_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePair {
    /// Order in group A, `l_a < i <= n_a1`.
    pub i: usize,
    /// Order in group B, `l_b < j <= n_b1`.
    pub j: usize,
    pub violation_prob: f64,
    /// `(i + j - 2) / (n_a1 + n_b1)`.
    pub empirical_type2: f64,
}

/// Class-1 counts that define one search instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairProblem {
    pub l_a: usize,
    pub l_b: usize,
    pub n_a1: usize,
    pub n_b1: usize,
}

impl PairProblem {
    pub fn new(l_a: usize, l_b: usize, n_a1: usize, n_b1: usize) -> Self {
        PairProblem { l_a, l_b, n_a1, n_b1 }
    }

    /// Balance of a pair: how unevenly it moves past the two l-counts.
    pub fn balance(&self, i: usize, j: usize) -> usize {
        (i - self.l_a).abs_diff(j - self.l_b)
    }

    /// Candidate pairs with `i + j == sum`, in tie-break order.
    pub fn pairs_with_sum(&self, sum: usize) -> Vec<(usize, usize)> {
        let i_lo = (self.l_a + 1).max(sum.saturating_sub(self.n_b1));
        let i_hi = self.n_a1.min(sum.saturating_sub(self.l_b + 1));
        if i_lo > i_hi {
            return Vec::new();
        }
        let mut pairs: Vec<(usize, usize)> = (i_lo..=i_hi).map(|i| (i, sum - i)).collect();
        pairs.sort_by_key(|&(i, j)| (self.balance(i, j), i));
        pairs
    }

    fn check(&self) -> Result<()> {
        if self.l_a >= self.n_a1 {
            return Err(Error::EmptyCandidates { group: Group::A, n: self.n_a1 });
        }
        if self.l_b >= self.n_b1 {
            return Err(Error::EmptyCandidates { group: Group::B, n: self.n_b1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub pairs_visited: usize,
    pub prefiltered: usize,
    pub integrals: usize,
    pub memo_hits: usize,
    pub tables_built: usize,
}

/// Memoized violation probabilities for one calibration. Pairs recur across
/// pivot pairs of the multiple-pivot search, so the context is meant to be
/// shared by all searches of a calibration.
#[derive(Debug)]
pub struct SearchContext {
    pub epsilon: f64,
    pub gamma: f64,
    /// Discard pairs whose moment bound already certifies a violation.
    pub prefilter: bool,
    tables: HashMap<PosteriorMixture, Rc<MixtureTable>>,
    memo: HashMap<(PosteriorMixture, PosteriorMixture), f64>,
    moments: HashMap<PosteriorMixture, (f64, f64)>,
    pub stats: SearchStats,
}

impl SearchContext {
    pub fn new(epsilon: f64, gamma: f64) -> Self {
        SearchContext {
            epsilon,
            gamma,
            prefilter: true,
            tables: HashMap::new(),
            memo: HashMap::new(),
            moments: HashMap::new(),
            stats: SearchStats::default(),
        }
    }

    pub fn without_prefilter(mut self) -> Self {
        self.prefilter = false;
        self
    }

    fn table(&mut self, mix: PosteriorMixture) -> Rc<MixtureTable> {
        if let Some(t) = self.tables.get(&mix) {
            return Rc::clone(t);
        }
        self.stats.tables_built += 1;
        let t = Rc::new(MixtureTable::new(&mix));
        self.tables.insert(mix, Rc::clone(&t));
        t
    }

    fn moments(&mut self, mix: PosteriorMixture) -> (f64, f64) {
        *self.moments.entry(mix).or_insert_with(|| mix.moments())
    }

    /// Violation probability of a pair, evaluated once per context.
    pub fn violation(&mut self, a: PosteriorMixture, b: PosteriorMixture) -> f64 {
        if let Some(&v) = self.memo.get(&(a, b)) {
            self.stats.memo_hits += 1;
            return v;
        }
        self.stats.integrals += 1;
        let v = if self.epsilon >= 1.0 {
            0.0
        } else {
            let (ta, tb) = (self.table(a), self.table(b));
            violation_estimate(&ta, &tb, self.epsilon).value
        };
        self.memo.insert((a, b), v);
        v
    }

    fn certified_infeasible(&mut self, problem: &PairProblem, i: usize, j: usize) -> bool {
        if !self.prefilter || self.gamma >= 1.0 {
            return false;
        }
        let a = PosteriorMixture { l: problem.l_a, n: problem.n_a1, k: i };
        let b = PosteriorMixture { l: problem.l_b, n: problem.n_b1, k: j };
        let (ma, va) = self.moments(a);
        let (mb, vb) = self.moments(b);
        violation_lower_bound(ma - mb, va + vb, self.epsilon) > self.gamma + PREFILTER_SLACK
    }

    /// Smallest sum up to `max_sum` holding a pair that the moment bound
    /// does not rule out; no search of `problem` can succeed below it.
    pub fn sum_floor(&mut self, problem: PairProblem, max_sum: Option<usize>) -> Option<usize> {
        let first = problem.l_a + problem.l_b + 2;
        let last = (problem.n_a1 + problem.n_b1).min(max_sum.unwrap_or(usize::MAX));
        (first..=last).find(|&sum| problem.pairs_with_sum(sum).into_iter().any(|(i, j)| !self.certified_infeasible(&problem, i, j)))
    }

    /// `Some(violation)` when the pair is feasible.
    fn feasible(&mut self, problem: &PairProblem, i: usize, j: usize) -> Option<f64> {
        self.stats.pairs_visited += 1;
        let a = PosteriorMixture { l: problem.l_a, n: problem.n_a1, k: i };
        let b = PosteriorMixture { l: problem.l_b, n: problem.n_b1, k: j };
        if self.certified_infeasible(problem, i, j) {
            self.stats.prefiltered += 1;
            return None;
        }
        let v = self.violation(a, b);
        (v <= self.gamma).then_some(v)
    }

    /// First feasible pair in order of `(i + j, balance, i)`, considering
    /// only sums up to `max_sum` when given.
    pub fn search(&mut self, problem: PairProblem, max_sum: Option<usize>) -> Result<FeasiblePair> {
        problem.check()?;
        let first = problem.l_a + problem.l_b + 2;
        let last = (problem.n_a1 + problem.n_b1).min(max_sum.unwrap_or(usize::MAX));
        for sum in first..=last {
            for (i, j) in problem.pairs_with_sum(sum) {
                if let Some(v) = self.feasible(&problem, i, j) {
                    return Ok(FeasiblePair {
                        i,
                        j,
                        violation_prob: v,
                        empirical_type2: (i + j - 2) as f64 / (problem.n_a1 + problem.n_b1) as f64,
                    });
                }
            }
        }
        Err(Error::NoViablePair { epsilon: self.epsilon, gamma: self.gamma })
    }
}

/// Minimal-sum feasible pair for one instance; see [`SearchContext::search`].
pub fn search_pair(l_a: usize, l_b: usize, n_a1: usize, n_b1: usize, epsilon: f64, gamma: f64) -> Result<FeasiblePair> {
    SearchContext::new(epsilon, gamma).search(PairProblem::new(l_a, l_b, n_a1, n_b1), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuous_constraints_pick_first_pair() {
        let p = search_pair(3, 5, 20, 30, 0.1, 1.0).unwrap();
        assert_eq!((p.i, p.j), (4, 6));
        let p = search_pair(3, 5, 20, 30, 0.999, 0.05).unwrap();
        assert_eq!((p.i, p.j), (4, 6));
        assert!((p.empirical_type2 - 8.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn empty_candidates() {
        assert!(matches!(search_pair(6, 1, 6, 6, 0.2, 0.1), Err(Error::EmptyCandidates { group: Group::A, .. })));
        assert!(matches!(search_pair(1, 6, 6, 6, 0.2, 0.1), Err(Error::EmptyCandidates { group: Group::B, .. })));
    }

    #[test]
    fn tie_order_within_sum() {
        let p = PairProblem::new(2, 5, 10, 10);
        assert_eq!(p.pairs_with_sum(11), vec![(4, 7), (3, 8), (5, 6)]);
        assert_eq!(p.pairs_with_sum(13), vec![(5, 8), (4, 9), (6, 7), (3, 10), (7, 6)]);
        assert!(p.pairs_with_sum(8).is_empty());
    }

    #[test]
    fn bounded_search_reports_no_pair() {
        let mut ctx = SearchContext::new(0.05, 0.05);
        let r = ctx.search(PairProblem::new(1, 1, 30, 30), Some(4));
        assert!(matches!(r, Err(Error::NoViablePair { .. })));
    }

    #[test]
    fn prefilter_does_not_change_result() {
        for &(la, lb, na, nb) in &[(1usize, 1usize, 6usize, 6usize), (2, 9, 25, 30), (10, 2, 30, 20)] {
            let a = SearchContext::new(0.15, 0.1).search(PairProblem::new(la, lb, na, nb), None);
            let b = SearchContext::new(0.15, 0.1).without_prefilter().search(PairProblem::new(la, lb, na, nb), None);
            match (a, b) {
                (Ok(x), Ok(y)) => assert_eq!((x.i, x.j), (y.i, y.j)),
                (Err(_), Err(_)) => {}
                other => panic!("{other:?}"),
            }
        }
    }
}
