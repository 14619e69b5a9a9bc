use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre rule with nodes cached on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pairs: Arc<[(f64, f64)]>,
}

impl Quadrature {
    /// Rule with `nodes` points; rules are built once per size and shared.
    pub fn gauss_legendre(nodes: usize) -> Self {
        static CACHE: OnceLock<Mutex<Vec<(usize, Arc<[(f64, f64)]>)>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut cache = cache.lock().expect("quadrature cache poisoned");
        if let Some((_, pairs)) = cache.iter().find(|(n, _)| *n == nodes) {
            return Quadrature { pairs: Arc::clone(pairs) };
        }
        let degree = NonZeroUsize::new(nodes).expect("quadrature needs at least one node");
        let pairs: Arc<[(f64, f64)]> = GaussLegendre::new(degree).as_node_weight_pairs().into();
        cache.push((nodes, Arc::clone(&pairs)));
        Quadrature { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `∫_lo^hi f`; returns 0 for an empty or reversed interval.
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.pairs.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, w * half))
    }
}
