//! The posterior law `F = G + (1 - G) B` of a group's type II error when its
//! threshold is the `k`-th smallest of `n` class-1 scores and `l` of those
//! scores sit at or below the pivot.
//!
//! `G` is the normal approximation to the pivot's class-1 CDF value,
//! truncated to `[0, 1]`, and `B ~ Beta(k - l, n - k + 1)` is the uniform
//! order statistic of the remaining mass.

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::{inc_beta, BetaDensity, UnitTruncatedNormal};

/// Nodes of the Gauss-Legendre rule behind [`mixture_cdf`].
pub const CDF_NODES: usize = 128;
/// Half-width of the window kept for `G`, in standard deviations.
const GAUSS_WINDOW_SD: f64 = 8.0;
/// Tail mass discarded on each side of the Beta factor.
const BETA_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PosteriorMixture {
    pub l: usize,
    pub n: usize,
    pub k: usize,
}

impl PosteriorMixture {
    /// Requires `l < k <= n`.
    pub fn new(l: usize, n: usize, k: usize) -> Result<Self> {
        if !(l < k && k <= n) {
            return Err(Error::InvalidConfig(format!("posterior mixture needs l < k <= n, got l={l}, k={k}, n={n}")));
        }
        Ok(PosteriorMixture { l, n, k })
    }

    pub fn gauss_mean(&self) -> f64 {
        self.l as f64 / self.n as f64
    }

    pub fn gauss_var(&self) -> f64 {
        let p = self.gauss_mean();
        p * (1.0 - p) / self.n as f64
    }

    /// `(k - l, n - k + 1)`.
    pub fn beta_shapes(&self) -> (f64, f64) {
        ((self.k - self.l) as f64, (self.n - self.k + 1) as f64)
    }

    pub fn gauss(&self) -> UnitTruncatedNormal {
        if self.l == 0 || self.l == self.n {
            return UnitTruncatedNormal::new(self.gauss_mean(), 0.0);
        }
        UnitTruncatedNormal::new(self.gauss_mean(), self.gauss_var().sqrt())
    }

    pub fn beta(&self) -> BetaDensity {
        let (a, b) = self.beta_shapes();
        BetaDensity::new(a, b)
    }

    /// Mean and variance of `F`, from `1 - F = (1 - G)(1 - B)` with
    /// independent factors.
    pub fn moments(&self) -> (f64, f64) {
        let (a, b) = self.beta_shapes();
        let (eg, eg2) = self.gauss().moments();
        let one_minus_g = 1.0 - eg;
        let one_minus_g_sq = 1.0 - 2.0 * eg + eg2;
        let one_minus_b = b / (a + b);
        let one_minus_b_sq = b * (b + 1.0) / ((a + b) * (a + b + 1.0));
        let m = one_minus_g * one_minus_b;
        let second = one_minus_g_sq * one_minus_b_sq;
        (1.0 - m, (second - m * m).max(0.0))
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    pub fn cdf(&self, t: f64) -> f64 {
        mixture_cdf(self, t)
    }
}

/// `P(F <= t)` by Gauss-Legendre quadrature.
///
/// Conditioning on `B = x`, `F <= t` iff `G <= (t - x) / (1 - x)`. Where that
/// bound lies above the window of `G` the conditional probability is 1, and
/// that stretch contributes a closed-form incomplete beta; only the
/// remaining stretch, where both factors vary, is integrated numerically.
pub fn mixture_cdf(mix: &PosteriorMixture, t: f64) -> f64 {
    let parts = Parts::new(mix);
    parts.cdf(t, &Quadrature::gauss_legendre(CDF_NODES))
}

/// `P(F <= t)` as `∫ φ(g) I_{(t-g)/(1-g)}(a, b) dg` over `g <= t`; a slower
/// cross-check of [`mixture_cdf`].
pub fn mixture_cdf_gauss_route(mix: &PosteriorMixture, t: f64) -> f64 {
    let parts = Parts::new(mix);
    if let Some(v) = parts.trivial(t) {
        return v;
    }
    let rule = Quadrature::gauss_legendre(CDF_NODES);
    let (lo, hi) = (parts.g_window.0, parts.g_window.1.min(t));
    let v = rule.integrate(lo, hi, |g| parts.gauss.pdf(g) * inc_beta(parts.a, parts.b, (t - g) / (1.0 - g)));
    v.clamp(0.0, 1.0)
}

/// Pieces of a mixture needed for repeated CDF evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Parts {
    a: f64,
    b: f64,
    gauss: UnitTruncatedNormal,
    beta: BetaDensity,
    g_window: (f64, f64),
    b_window: (f64, f64),
}

impl Parts {
    pub(crate) fn new(mix: &PosteriorMixture) -> Self {
        let (a, b) = mix.beta_shapes();
        let gauss = mix.gauss();
        let beta = mix.beta();
        let g_window = if gauss.is_point_mass() { (gauss.mean, gauss.mean) } else { gauss.window(GAUSS_WINDOW_SD) };
        let b_window = (beta_quantile(a, b, BETA_TAIL), beta_quantile(a, b, 1.0 - BETA_TAIL));
        Parts { a, b, gauss, beta, g_window, b_window }
    }

    /// Interval outside which the CDF is 0 or 1 to within the discarded
    /// tail mass.
    pub(crate) fn support(&self) -> (f64, f64) {
        let (g_lo, g_hi) = self.g_window;
        let (b_lo, b_hi) = self.b_window;
        (g_lo + (1.0 - g_lo) * b_lo, (g_hi + (1.0 - g_hi) * b_hi).min(1.0))
    }

    fn trivial(&self, t: f64) -> Option<f64> {
        if t >= 1.0 {
            return Some(1.0);
        }
        if t <= 0.0 {
            return Some(0.0);
        }
        if self.gauss.is_point_mass() {
            let g = self.gauss.mean;
            return Some(inc_beta(self.a, self.b, (t - g) / (1.0 - g)));
        }
        None
    }

    pub(crate) fn cdf(&self, t: f64, rule: &Quadrature) -> f64 {
        if let Some(v) = self.trivial(t) {
            return v;
        }
        // x below x_hi puts the bound on G above its window; x above x_lo
        // puts it below
        let bound_at = |g: f64| if g >= 1.0 { f64::NEG_INFINITY } else { (t - g) / (1.0 - g) };
        let x_sure = bound_at(self.g_window.1);
        let x_none = bound_at(self.g_window.0);
        let (b_lo, b_hi) = self.b_window;
        let certain = if x_sure > 0.0 { inc_beta(self.a, self.b, x_sure) } else { 0.0 };
        let (lo, hi) = (x_sure.max(b_lo), x_none.min(b_hi).min(t));
        let partial = rule.integrate(lo, hi, |x| self.beta.pdf(x) * self.gauss.cdf((t - x) / (1.0 - x)));
        (certain + partial).clamp(0.0, 1.0)
    }
}

/// Beta quantile by bisection on the incomplete beta.
pub(crate) fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inc_beta(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// A mixture CDF tabulated on its support and evaluated by monotone cubic
/// (Fritsch-Carlson) interpolation. Used where one mixture is evaluated at
/// many points.
#[derive(Debug, Clone)]
pub struct MixtureTable {
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    mean: f64,
    variance: f64,
}

/// Table size used by the calibration search.
pub const TABLE_POINTS: usize = 193;
/// Quadrature nodes per tabulated point.
pub const TABLE_NODES: usize = 32;

impl MixtureTable {
    pub fn new(mix: &PosteriorMixture) -> Self {
        MixtureTable::with_resolution(mix, TABLE_POINTS, TABLE_NODES)
    }

    pub fn with_resolution(mix: &PosteriorMixture, points: usize, nodes: usize) -> Self {
        assert!(points >= 2);
        let parts = Parts::new(mix);
        let rule = Quadrature::gauss_legendre(nodes);
        let (lo, hi) = parts.support();
        let (mean, variance) = mix.moments();
        let hi = hi.max(lo + 1e-12);
        let step = (hi - lo) / (points - 1) as f64;
        let mut values = Vec::with_capacity(points);
        let mut running = 0.0f64;
        for p in 0..points {
            let t = if p + 1 == points { hi } else { lo + step * p as f64 };
            let v = if p == 0 {
                0.0
            } else if p + 1 == points {
                1.0
            } else {
                parts.cdf(t, &rule)
            };
            running = running.max(v);
            values.push(running);
        }
        let slopes = pchip_slopes(&values, step);
        MixtureTable { lo, hi, step, values, slopes, mean, variance }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return 1.0;
        }
        let x = (t - self.lo) / self.step;
        let i = (x as usize).min(self.values.len() - 2);
        let s = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1).clamp(0.0, 1.0)
    }
}

fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for i in 1..n - 1 {
        let (a, b) = (d[i - 1], d[i]);
        m[i] = if a * b <= 0.0 { 0.0 } else { 2.0 * a * b / (a + b) };
    }
    m[0] = end_slope(d[0], d[1]);
    m[n - 1] = end_slope(d[n - 2], d[n - 3]);
    m
}

fn end_slope(d0: f64, d1: f64) -> f64 {
    let m = 1.5 * d0 - 0.5 * d1;
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
