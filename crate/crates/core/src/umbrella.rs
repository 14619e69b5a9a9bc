//! NP umbrella order selection: the smallest class-0 order statistic whose
//! threshold keeps type I error at most `alpha` with probability `1 - delta`.

use crate::error::{Error, Result};
use crate::special::inc_beta;

/// `P(Binomial(n, 1 - alpha) >= k)`, the probability that the `k`-th
/// smallest of `n` class-0 scores sits below the `(1 - alpha)` quantile.
pub fn binomial_tail(n: usize, k: usize, alpha: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    inc_beta(k as f64, (n - k + 1) as f64, 1.0 - alpha)
}

/// Smallest `k` in `1..=n` with `binomial_tail(n, k, alpha) <= delta`.
pub fn np_order(n: usize, alpha: f64, delta: f64) -> Result<usize> {
    let infeasible = Error::Infeasible { n, alpha, delta };
    if n == 0 || !(alpha > 0.0 && alpha < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(infeasible);
    }
    if binomial_tail(n, n, alpha) > delta {
        return Err(infeasible);
    }
    // tail is decreasing in k; find the first k where it drops to delta
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if binomial_tail(n, mid, alpha) <= delta {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Smallest class-0 sample size for which [`np_order`] is feasible.
pub fn min_sample_size(alpha: f64, delta: f64) -> usize {
    (delta.ln() / (1.0 - alpha).ln()).ceil().max(1.0) as usize
}

/// The `k`-th smallest element (1-based) of an ascending sequence.
pub fn pivot(sorted: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > sorted.len() {
        return Err(Error::OutOfRange { order: k, len: sorted.len() });
    }
    Ok(sorted[k - 1])
}

/// Number of entries of an ascending sequence that are `<= pivot`.
pub fn l_count(sorted: &[f64], pivot: f64) -> usize {
    sorted.partition_point(|&t| t <= pivot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct summation of `C(n,j) p^j q^(n-j)` for `j >= k` in log space.
    fn log_space_tail(n: usize, k: usize, alpha: f64) -> f64 {
        let (lp, lq) = ((1.0 - alpha).ln(), alpha.ln());
        let mut ln_choose = vec![0.0f64; n + 1];
        let (mut acc, mut comp) = (0.0f64, 0.0f64);
        for i in 0..n {
            // Kahan-compensated running sum of ln((n-i)/(i+1))
            let y = ((n - i) as f64 / (i + 1) as f64).ln() - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            ln_choose[i + 1] = acc;
        }
        let terms: Vec<f64> = (k..=n).map(|j| ln_choose[j] + j as f64 * lp + (n - j) as f64 * lq).collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m.exp() * terms.iter().map(|t| (t - m).exp()).sum::<f64>()
    }

    #[test]
    fn small_orders() {
        assert_eq!(np_order(10, 0.5, 0.05).unwrap(), 9);
        assert!((binomial_tail(10, 9, 0.5) - 11.0 / 1024.0).abs() < 1e-14);
        assert!((binomial_tail(10, 8, 0.5) - 56.0 / 1024.0).abs() < 1e-14);
        assert_eq!(np_order(59, 0.05, 0.05).unwrap(), 59);
        assert!(matches!(np_order(10, 0.05, 0.05), Err(Error::Infeasible { n: 10, .. })));
        assert!(np_order(0, 0.1, 0.1).is_err());
    }

    #[test]
    fn minimum_sample_size_boundary() {
        assert_eq!(min_sample_size(0.1, 0.05), 29);
        assert!(np_order(29, 0.1, 0.05).is_ok());
        assert!(np_order(28, 0.1, 0.05).is_err());
    }

    #[test]
    fn matches_log_space_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.random_range(1..=3000usize);
            let k = rng.random_range(1..=n);
            let alpha = rng.random_range(0.01..0.5);
            let (a, b) = (binomial_tail(n, k, alpha), log_space_tail(n, k, alpha));
            if b > 1e-280 {
                assert!((a - b).abs() <= 1e-10 * b.max(1e-300) || (a - b).abs() < 1e-300, "{n} {k} {alpha}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn order_monotone_in_tolerances() {
        for n in [50usize, 100, 500] {
            let mut prev = usize::MAX;
            for d in [0.01, 0.05, 0.1, 0.2] {
                let k = np_order(n, 0.1, d).unwrap();
                assert!(k <= prev);
                prev = k;
            }
            prev = usize::MAX;
            for a in [0.1, 0.15, 0.2, 0.3] {
                let k = np_order(n, a, 0.05).unwrap();
                assert!(k <= prev);
                prev = k;
            }
        }
    }

    #[test]
    fn pivot_and_l_count() {
        assert_eq!(pivot(&[1.0, 2.0, 3.0, 4.0], 4).unwrap(), 4.0);
        assert_eq!(pivot(&[5.0], 1).unwrap(), 5.0);
        assert!(matches!(pivot(&[1.0], 2), Err(Error::OutOfRange { order: 2, len: 1 })));
        assert!(pivot(&[1.0], 0).is_err());
        assert_eq!(l_count(&[0.1, 0.2, 0.9], 0.5), 2);
        assert_eq!(l_count(&[0.1, 0.2, 0.9], 0.0), 0);
        assert_eq!(l_count(&[0.1, 0.2, 0.9], 0.2), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut xs: Vec<f64> = (0..1000).map(|_| rng.random_range(0..50) as f64 / 7.0).collect();
        let raw = xs.clone();
        xs.sort_by(f64::total_cmp);
        for _ in 0..50 {
            let p = rng.random_range(-1.0..8.0);
            assert_eq!(l_count(&xs, p), raw.iter().filter(|&&t| t <= p).count());
        }
        let k = 9;
        let mut ten = raw[..10].to_vec();
        ten.sort_by(f64::total_cmp);
        assert_eq!(pivot(&ten, k).unwrap(), ten[8]);
    }
}
