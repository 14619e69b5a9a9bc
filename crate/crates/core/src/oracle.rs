//! Population oracles for univariate Gaussian group models.
//!
//! Within each group both classes share a variance and class 1 has the
//! larger mean, so every likelihood-ratio rule `f_1 / f_0 > c` is a
//! feature threshold `x > x_s(c)` and all solvers work on the feature axis.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::GroupThresholds;
use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile, normal_sf};
use crate::types::{Cell, CellValues, Group, Label, PerCell};

/// Absolute tolerance on a root-finding residual.
pub const ROOT_TOL: f64 = 1e-10;
/// Iteration cap for bracket expansion and for bisection.
pub const MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianGroupModel {
    #[serde(default)]
    pub name: String,
    pub mean: CellValues<f64>,
    pub variance: CellValues<f64>,
    /// Joint probabilities `P(S = s, Y = y)`.
    pub prob: CellValues<f64>,
}

/// Population errors of a pair of feature thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleErrors {
    pub r0: f64,
    pub r1: f64,
    pub r0_a: f64,
    pub r0_b: f64,
    pub r1_a: f64,
    pub r1_b: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub thresholds: GroupThresholds,
    pub errors: OracleErrors,
    /// Whether the disparity constraint is active at the solution.
    pub eo_binding: bool,
}

impl GaussianGroupModel {
    pub fn new(mean: PerCell<f64>, variance: PerCell<f64>, prob: PerCell<f64>) -> Result<Self> {
        let named = |v: PerCell<f64>| CellValues {
            a0: v[Cell::new(Label::Zero, Group::A)],
            b0: v[Cell::new(Label::Zero, Group::B)],
            a1: v[Cell::new(Label::One, Group::A)],
            b1: v[Cell::new(Label::One, Group::B)],
        };
        let model = GaussianGroupModel { name: String::new(), mean: named(mean), variance: named(variance), prob: named(prob) };
        model.validate()?;
        Ok(model)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let model: GaussianGroupModel = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        GaussianGroupModel::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let (mean, var, prob) = (self.mean.to_per_cell(), self.variance.to_per_cell(), self.prob.to_per_cell());
        for cell in Cell::ALL {
            if !mean[cell].is_finite() {
                return Err(Error::InvalidConfig(format!("mean of cell {cell} is not finite")));
            }
            if !(var[cell] > 0.0 && var[cell].is_finite()) {
                return Err(Error::InvalidConfig(format!("variance of cell {cell} must be positive, got {}", var[cell])));
            }
            if !(prob[cell] > 0.0 && prob[cell] < 1.0) {
                return Err(Error::InvalidConfig(format!("probability of cell {cell} must lie in (0, 1), got {}", prob[cell])));
            }
        }
        let total: f64 = prob.0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("joint probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Fails unless each group has equal class variances and a larger
    /// class-1 mean.
    pub fn require_monotone(&self) -> Result<()> {
        for group in Group::ALL {
            let (c0, c1) = (Cell::new(Label::Zero, group), Cell::new(Label::One, group));
            let (v0, v1) = (self.var(c0), self.var(c1));
            if v0 != v1 {
                return Err(Error::NonMonotoneLikelihoodRatio {
                    group,
                    reason: format!("class variances differ ({v0} vs {v1})"),
                });
            }
            if !(self.mu(c1) > self.mu(c0)) {
                return Err(Error::NonMonotoneLikelihoodRatio {
                    group,
                    reason: format!("class-1 mean {} does not exceed class-0 mean {}", self.mu(c1), self.mu(c0)),
                });
            }
        }
        Ok(())
    }

    fn mu(&self, cell: Cell) -> f64 {
        self.mean.to_per_cell()[cell]
    }

    fn var(&self, cell: Cell) -> f64 {
        self.variance.to_per_cell()[cell]
    }

    fn sd(&self, cell: Cell) -> f64 {
        self.var(cell).sqrt()
    }

    pub fn joint(&self, cell: Cell) -> f64 {
        self.prob.to_per_cell()[cell]
    }

    pub fn class_prob(&self, label: Label) -> f64 {
        self.joint(Cell::new(label, Group::A)) + self.joint(Cell::new(label, Group::B))
    }

    /// `p(s | y)`.
    pub fn group_share(&self, label: Label, group: Group) -> f64 {
        self.joint(Cell::new(label, group)) / self.class_prob(label)
    }

    /// The same conditionals and `p(s | y)` with `P(Y = 0) = p0`.
    pub fn with_class0_prob(&self, p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::InvalidConfig(format!("P(Y = 0) must lie in (0, 1), got {p0}")));
        }
        let r0 = p0 / self.class_prob(Label::Zero);
        let r1 = (1.0 - p0) / self.class_prob(Label::One);
        let mut out = self.clone();
        out.prob.a0 *= r0;
        out.prob.b0 *= r0;
        out.prob.a1 *= r1;
        out.prob.b1 *= r1;
        Ok(out)
    }

    /// Group-conditional error of threshold `t` in `cell`: `P(X > t)` for
    /// class 0 and `P(X <= t)` for class 1.
    pub fn cell_error(&self, cell: Cell, t: f64) -> f64 {
        let z = (t - self.mu(cell)) / self.sd(cell);
        match cell.label {
            Label::Zero => normal_sf(z),
            Label::One => normal_cdf(z),
        }
    }

    /// Threshold with the given group-conditional error.
    fn threshold_for_error(&self, cell: Cell, err: f64) -> f64 {
        let z = match cell.label {
            Label::Zero => -normal_quantile(err),
            Label::One => normal_quantile(err),
        };
        self.mu(cell) + self.sd(cell) * z
    }

    pub fn errors(&self, thresholds: GroupThresholds) -> OracleErrors {
        let err = |label, group| self.cell_error(Cell::new(label, group), thresholds.get(group));
        let (r0_a, r0_b) = (err(Label::Zero, Group::A), err(Label::Zero, Group::B));
        let (r1_a, r1_b) = (err(Label::One, Group::A), err(Label::One, Group::B));
        let w = |label, group| self.group_share(label, group);
        OracleErrors {
            r0: w(Label::Zero, Group::A) * r0_a + w(Label::Zero, Group::B) * r0_b,
            r1: w(Label::One, Group::A) * r1_a + w(Label::One, Group::B) * r1_b,
            r0_a,
            r0_b,
            r1_a,
            r1_b,
            l1: (r1_a - r1_b).abs(),
        }
    }

    /// Feature threshold where `f_{1,s} / f_{0,s}` equals `exp(log_ratio)`.
    pub fn lr_threshold(&self, group: Group, log_ratio: f64) -> f64 {
        let (m0, m1) = (self.mu(Cell::new(Label::Zero, group)), self.mu(Cell::new(Label::One, group)));
        let v = self.var(Cell::new(Label::Zero, group));
        0.5 * (m0 + m1) + v * log_ratio / (m1 - m0)
    }

    fn solution(&self, thresholds: GroupThresholds, eo_binding: bool) -> OracleSolution {
        OracleSolution { thresholds, errors: self.errors(thresholds), eo_binding }
    }

    /// Threshold of `group` that brings `R0` to `alpha` given the other
    /// group's threshold, or `None` when `group` cannot make up the rest.
    pub fn complete_np(&self, alpha: f64, group: Group, t_other: f64) -> Option<f64> {
        let other = group.other();
        let rest = alpha - self.group_share(Label::Zero, other) * self.cell_error(Cell::new(Label::Zero, other), t_other);
        let need = rest / self.group_share(Label::Zero, group);
        (need > 0.0 && need < 1.0).then(|| self.threshold_for_error(Cell::new(Label::Zero, group), need))
    }

    /// Threshold of `group` with `R1^a - R1^b = gap` given the other
    /// group's threshold, when one exists.
    pub fn complete_eo(&self, gap: f64, group: Group, t_other: f64) -> Option<f64> {
        let known = self.cell_error(Cell::new(Label::One, group.other()), t_other);
        let need = match group {
            Group::A => known + gap,
            Group::B => known - gap,
        };
        (need > 0.0 && need < 1.0).then(|| self.threshold_for_error(Cell::new(Label::One, group), need))
    }
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ
/// in sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo.abs() <= ROOT_TOL {
        return Ok(lo);
    }
    if f_hi.abs() <= ROOT_TOL {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotBracketed(format!("f({lo}) = {f_lo}, f({hi}) = {f_hi}")));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= ROOT_TOL || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Widens `[x - step, x + step]` by doubling until `f` changes sign.
/// `f` may return NaN outside its domain; such points are pulled halfway
/// back towards `x`.
pub fn expand_bracket(mut f: impl FnMut(f64) -> f64, x: f64, step: f64) -> Result<(f64, f64)> {
    let f_x = f(x);
    if f_x == 0.0 {
        return Ok((x, x));
    }
    let (mut lo, mut hi, mut width) = (x, x, step);
    for _ in 0..MAX_ITER {
        for (side, end) in [(-1.0, &mut lo), (1.0, &mut hi)] {
            let mut probe = x + side * width;
            let mut v = f(probe);
            let mut tries = 0;
            while v.is_nan() && tries < 60 {
                probe = 0.5 * (probe + *end);
                v = f(probe);
                tries += 1;
            }
            if v.is_nan() {
                continue;
            }
            *end = probe;
            if v.signum() != f_x.signum() {
                return Ok(if side < 0.0 { (probe, x) } else { (x, probe) });
            }
        }
        width *= 2.0;
    }
    Err(Error::RootNotBracketed(format!("no sign change around {x} within {MAX_ITER} doublings")))
}

/// Per-group thresholds where the posterior odds equal 1.
pub fn bayes_oracle(model: &GaussianGroupModel) -> Result<OracleSolution> {
    model.validate()?;
    model.require_monotone()?;
    let t = |g| {
        let ratio = model.joint(Cell::new(Label::Zero, g)) / model.joint(Cell::new(Label::One, g));
        model.lr_threshold(g, ratio.ln())
    };
    Ok(model.solution(GroupThresholds::new(t(Group::A), t(Group::B)), false))
}

/// NP oracle: the likelihood-ratio rule `p(s|1) f_{1,s} > c p(s|0) f_{0,s}`
/// with `c` chosen so that `R0 = alpha`.
pub fn np_oracle(model: &GaussianGroupModel, alpha: f64) -> Result<OracleSolution> {
    check_alpha(alpha)?;
    model.validate()?;
    model.require_monotone()?;
    let at = |log_c: f64| {
        let t = |g| {
            let shift = (model.group_share(Label::Zero, g) / model.group_share(Label::One, g)).ln();
            model.lr_threshold(g, log_c + shift)
        };
        GroupThresholds::new(t(Group::A), t(Group::B))
    };
    let residual = |log_c: f64| model.errors(at(log_c)).r0 - alpha;
    let (lo, hi) = expand_bracket(residual, 0.0, 1.0)?;
    let log_c = bisect(residual, lo, hi)?;
    Ok(model.solution(at(log_c), false))
}

/// Best single feature threshold shared by both groups with `R0 = alpha`.
pub fn np_oracle_shared(model: &GaussianGroupModel, alpha: f64) -> Result<OracleSolution> {
    check_alpha(alpha)?;
    model.validate()?;
    model.require_monotone()?;
    let residual = |t: f64| model.errors(GroupThresholds::uniform(t)).r0 - alpha;
    let start = 0.5 * (model.mu(Cell::new(Label::Zero, Group::A)) + model.mu(Cell::new(Label::Zero, Group::B)));
    let (lo, hi) = expand_bracket(residual, start, 1.0)?;
    let t = bisect(residual, lo, hi)?;
    Ok(model.solution(GroupThresholds::uniform(t), false))
}

/// Sign `s` of the binding disparity constraint `R1^a - R1^b = s epsilon`,
/// taken from the NP oracle's disparity.
fn disparity_sign(np: &OracleSolution) -> f64 {
    if np.errors.r1_a >= np.errors.r1_b {
        1.0
    } else {
        -1.0
    }
}

/// NP-EO oracle. Returns the NP oracle when its disparity is within
/// `epsilon`; otherwise the point of `{R0 = alpha}` where the disparity
/// equals `epsilon` on the side the NP oracle violates.
pub fn np_eo_oracle(model: &GaussianGroupModel, alpha: f64, epsilon: f64) -> Result<OracleSolution> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let np = np_oracle(model, alpha)?;
    if np.errors.l1 <= epsilon {
        return Ok(np);
    }
    let gap = disparity_sign(&np) * epsilon;
    let residual = |t_b: f64| match model.complete_np(alpha, Group::A, t_b) {
        Some(t_a) => {
            let e = model.errors(GroupThresholds::new(t_a, t_b));
            e.r1_a - e.r1_b - gap
        }
        None => f64::NAN,
    };
    let start = np.thresholds.b;
    let step = model.sd(Cell::new(Label::Zero, Group::B));
    let (lo, hi) = expand_bracket(residual, start, step)?;
    let t_b = bisect(residual, lo, hi)?;
    let t_a = model
        .complete_np(alpha, Group::A, t_b)
        .ok_or_else(|| Error::RootNotBracketed(format!("group-b threshold {t_b} leaves no NP completion")))?;
    Ok(model.solution(GroupThresholds::new(t_a, t_b), true))
}

/// The two loci whose intersection is the NP-EO oracle, as `(t_a, t_b)`
/// feature-threshold points ordered by `t_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCurves {
    /// `{R0 = alpha}`; `t_a` falls as `t_b` rises.
    pub np: Vec<(f64, f64)>,
    /// `{R1^a - R1^b = sign * epsilon}`; `t_a` rises with `t_b`.
    pub eo: Vec<(f64, f64)>,
    pub sign: f64,
}

/// Samples both loci within four class-0 standard deviations of the NP-EO
/// oracle, stepping half of the `grid` points along each axis so that
/// steep stretches stay covered.
pub fn feasibility_curves(model: &GaussianGroupModel, alpha: f64, epsilon: f64, grid: usize) -> Result<FeasibilityCurves> {
    let np = np_oracle(model, alpha)?;
    let sign = disparity_sign(&np);
    let centre = np_eo_oracle(model, alpha, epsilon)?.thresholds;
    let per_axis = (grid / 2).max(2);
    let mut curves = FeasibilityCurves { np: Vec::new(), eo: Vec::new(), sign };
    for free in Group::ALL {
        let fixed = free.other();
        let half = 4.0 * model.sd(Cell::new(Label::Zero, fixed));
        for i in 0..per_axis {
            let t = centre.get(fixed) - half + 2.0 * half * i as f64 / (per_axis - 1) as f64;
            let point = |solved: f64| match free {
                Group::A => (solved, t),
                Group::B => (t, solved),
            };
            if let Some(x) = model.complete_np(alpha, free, t) {
                curves.np.push(point(x));
            }
            if let Some(x) = model.complete_eo(sign * epsilon, free, t) {
                curves.eo.push(point(x));
            }
        }
    }
    for pts in [&mut curves.np, &mut curves.eo] {
        pts.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)));
        pts.dedup();
    }
    Ok(curves)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorInvariance {
    pub invariant: bool,
    /// Largest threshold change.
    pub shift: f64,
    pub before: OracleSolution,
    pub after: OracleSolution,
}

/// Threshold change tolerated by [`check_prior_invariance`].
pub const INVARIANCE_TOL: f64 = 1e-7;

/// Re-solves the NP-EO oracle after moving `P(Y = 0)` to `new_p0` with all
/// conditionals fixed.
pub fn check_prior_invariance(model: &GaussianGroupModel, alpha: f64, epsilon: f64, new_p0: f64) -> Result<PriorInvariance> {
    let before = np_eo_oracle(model, alpha, epsilon)?;
    let after = np_eo_oracle(&model.with_class0_prob(new_p0)?, alpha, epsilon)?;
    let shift = Group::ALL
        .iter()
        .map(|&g| (before.thresholds.get(g) - after.thresholds.get(g)).abs())
        .fold(0.0, f64::max);
    Ok(PriorInvariance { invariant: shift <= INVARIANCE_TOL, shift, before, after })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}
