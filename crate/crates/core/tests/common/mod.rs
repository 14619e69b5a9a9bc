//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use npeo::{GroupScores, PerCell, PosteriorMixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `G + (1 - G) B` directly: `G` by rejection from the untruncated
/// normal, `B` from the Beta law.
pub struct MixtureSampler {
    gauss: Option<Normal<f64>>,
    point: f64,
    beta: Beta<f64>,
}

impl MixtureSampler {
    pub fn new(mix: &PosteriorMixture) -> Self {
        let p = mix.l as f64 / mix.n as f64;
        let gauss = (mix.l > 0 && mix.l < mix.n).then(|| Normal::new(p, (p * (1.0 - p) / mix.n as f64).sqrt()).unwrap());
        let beta = Beta::new((mix.k - mix.l) as f64, (mix.n - mix.k + 1) as f64).unwrap();
        MixtureSampler { gauss, point: p, beta }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let g = match &self.gauss {
            None => self.point,
            Some(n) => loop {
                let g = n.sample(rng);
                if (0.0..=1.0).contains(&g) {
                    break g;
                }
            },
        };
        g + (1.0 - g) * self.beta.sample(rng)
    }

    pub fn draws<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }
}

pub fn mc_cdf(mix: &PosteriorMixture, t: f64, draws: usize, seed: u64) -> f64 {
    let s = MixtureSampler::new(mix);
    let mut r = rng(seed);
    (0..draws).filter(|_| s.draw(&mut r) <= t).count() as f64 / draws as f64
}

pub fn mc_violation(a: &PosteriorMixture, b: &PosteriorMixture, eps: f64, draws: usize, seed: u64) -> f64 {
    let (sa, sb) = (MixtureSampler::new(a), MixtureSampler::new(b));
    let mut r = rng(seed);
    (0..draws).filter(|_| (sa.draw(&mut r) - sb.draw(&mut r)).abs() > eps).count() as f64 / draws as f64
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln n! - ((n + 1/2) ln n - n + ln sqrt(2 pi))`, Stirling's error term.
fn stirlerr(n: f64) -> f64 {
    if n <= 15.0 {
        return statrs::function::gamma::ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    let (s0, s1, s2, s3, s4) = (1.0 / 12.0, 1.0 / 360.0, 1.0 / 1260.0, 1.0 / 1680.0, 1.0 / 1188.0);
    (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n
}

/// `x ln(x / m) + m - x` without cancellation when `x` is near `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        for j in 1.. {
            ej *= v * v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                break;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln [C(n, j) p^j q^(n-j)]` by Loader's saddle-point expansion.
fn ln_binom_pmf(n: usize, j: usize, p: f64, q: f64) -> f64 {
    let (nf, x) = (n as f64, j as f64);
    if j == 0 {
        return nf * q.ln();
    }
    if j == n {
        return nf * p.ln();
    }
    let lc = stirlerr(nf) - stirlerr(x) - stirlerr(nf - x) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    lc + 0.5 * (nf / (2.0 * std::f64::consts::PI * x * (nf - x))).ln()
}

/// `sum_{j >= k} C(n, j) (1 - alpha)^j alpha^(n - j)` summed in log space.
pub fn log_space_tail(n: usize, k: usize, alpha: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for j in k..=n {
        acc = log_add(acc, ln_binom_pmf(n, j, 1.0 - alpha, alpha));
    }
    acc.exp()
}

/// Four cells of Gaussian scores with the given class-1 shift per group.
pub fn gaussian_scores(n0: [usize; 2], n1: [usize; 2], shift: [f64; 2], spread: [f64; 2], seed: u64) -> GroupScores {
    let mut r = rng(seed);
    GroupScores::new(PerCell::from_fn(|c| {
        let g = c.group.index();
        let (n, mean) = match c.label {
            npeo::Label::Zero => (n0[g], 0.0),
            npeo::Label::One => (n1[g], shift[g]),
        };
        let d = Normal::new(mean, spread[g]).unwrap();
        (0..n).map(|_| d.sample(&mut r)).collect()
    }))
    .unwrap()
}

/// Equal-variance Gaussian group model with class 1 above class 0 in each
/// group and random joint probabilities.
pub fn random_model<R: Rng>(r: &mut R) -> npeo::GaussianGroupModel {
    let m0 = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
    let m1 = [m0[0] + r.random_range(0.8..3.0), m0[1] + r.random_range(0.8..3.0)];
    let var = [r.random_range(0.3..4.0), r.random_range(0.3..4.0)];
    let w: Vec<f64> = (0..4).map(|_| r.random_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    let pick = |c: npeo::Cell, vals: [f64; 2], alt: [f64; 2]| match c.label {
        npeo::Label::Zero => vals[c.group.index()],
        npeo::Label::One => alt[c.group.index()],
    };
    npeo::GaussianGroupModel::new(
        PerCell::from_fn(|c| pick(c, m0, m1)),
        PerCell::from_fn(|c| var[c.group.index()]),
        PerCell::from_fn(|c| w[c.index()] / total),
    )
    .unwrap()
}
