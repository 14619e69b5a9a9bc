mod common;

use common::{random_model, rng};
use npeo::oracle::{check_prior_invariance, feasibility_curves};
use npeo::{
    bayes_oracle, np_eo_oracle, np_oracle, np_oracle_shared, Cell, Error, GaussianGroupModel, Group, GroupThresholds, Label,
    PerCell,
};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn example1() -> GaussianGroupModel {
    GaussianGroupModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/example1.toml")).unwrap()
}

fn model(mean: [f64; 4], var: [f64; 4], prob: [f64; 4]) -> GaussianGroupModel {
    // Arrays follow Cell::ALL: a0, b0, a1, b1.
    GaussianGroupModel::new(PerCell(mean), PerCell(var), PerCell(prob)).unwrap()
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

#[test]
fn example1_bayes_and_np() {
    let m = example1();
    let bayes = bayes_oracle(&m).unwrap();
    assert!(close(bayes.thresholds.a, 2.0, 1e-12) && close(bayes.thresholds.b, 2.0, 1e-12));
    assert!(close(bayes.errors.r0, 0.137, 0.001) && close(bayes.errors.r1, 0.137, 0.001));
    assert!(close(bayes.errors.l1, 0.23, 0.001));

    let shared = np_oracle_shared(&m, 0.1).unwrap();
    assert!(close(shared.thresholds.a, 2.58, 0.01));
    assert!(close(shared.errors.r1, 0.198, 0.002) && close(shared.errors.l1, 0.24, 0.002));

    // The likelihood-ratio NP rule beats any shared threshold at the same R0.
    let np = np_oracle(&m, 0.1).unwrap();
    assert!(close(np.errors.r0, 0.1, 1e-9));
    assert!(np.errors.r1 < shared.errors.r1);
}

#[test]
fn example1_np_eo() {
    let m = example1();
    let s = np_eo_oracle(&m, 0.1, 0.1).unwrap();
    assert!(s.eo_binding);
    assert!(close(s.thresholds.a, 3.20, 0.01) && close(s.thresholds.b, 2.53, 0.01), "{:?}", s.thresholds);
    assert!(close(s.errors.r0, 0.1, 1e-8) && close(s.errors.l1, 0.1, 1e-8));
    assert!(close(s.errors.r1, 0.262, 0.002));
}

#[test]
fn unequal_variances_are_rejected() {
    let m = model([0.0, 0.0, 1.0, 1.0], [1.0, 1.0, 2.0, 1.0], [0.25; 4]);
    assert!(matches!(bayes_oracle(&m), Err(Error::NonMonotoneLikelihoodRatio { .. })));
    let m = model([0.0, 0.0, -1.0, 1.0], [1.0; 4], [0.25; 4]);
    assert!(matches!(np_oracle(&m, 0.1), Err(Error::NonMonotoneLikelihoodRatio { .. })));
}

#[test]
fn bayes_matches_closed_forms() {
    let sym = model([-1.5, -0.5, 1.5, 0.5], [1.0, 2.0, 1.0, 2.0], [0.25; 4]);
    let b = bayes_oracle(&sym).unwrap();
    assert!(b.thresholds.a.abs() < 1e-12 && b.thresholds.b.abs() < 1e-12);

    let mut r = rng(3);
    for _ in 0..50 {
        let m0 = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
        let m1 = [m0[0] + r.random_range(0.1..4.0), m0[1] + r.random_range(0.1..4.0)];
        let (pa, var) = (r.random_range(0.1..0.4), [r.random_range(0.2..5.0), r.random_range(0.2..5.0)]);
        let m = model([m0[0], m0[1], m1[0], m1[1]], [var[0], var[1], var[0], var[1]], [pa, 0.5 - pa, pa, 0.5 - pa]);
        // Root of the posterior log-odds, found independently by bisection.
        for g in Group::ALL {
            let i = g.index();
            let odds = |x: f64| (x - m0[i]).powi(2) - (x - m1[i]).powi(2);
            let (mut lo, mut hi) = (m0[i], m1[i]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if odds(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = bayes_oracle(&m).unwrap().thresholds.get(g);
            assert!(close(t, 0.5 * (lo + hi), 1e-9));
            assert!(close(t, 0.5 * (m0[i] + m1[i]), 1e-9));
        }
    }
}

#[test]
fn np_at_bayes_level_is_bayes() {
    let mut r = rng(4);
    for _ in 0..20 {
        let m = random_model(&mut r);
        let bayes = bayes_oracle(&m).unwrap();
        let np = np_oracle(&m, bayes.errors.r0).unwrap();
        assert!(close(np.thresholds.a, bayes.thresholds.a, 1e-6) && close(np.thresholds.b, bayes.thresholds.b, 1e-6));
    }
}

#[test]
fn one_group_limit_is_class0_quantile() {
    let tiny = 1e-12;
    let m = model([0.5, 0.0, 2.5, 1.0], [2.0, 1.0, 2.0, 1.0], [0.5 - tiny, tiny, 0.5 - tiny, tiny]);
    let alpha = 0.07;
    let q = Normal::new(0.5, 2f64.sqrt()).unwrap().inverse_cdf(1.0 - alpha);
    let np = np_oracle(&m, alpha).unwrap();
    assert!(close(np.thresholds.a, q, 1e-8), "{} vs {q}", np.thresholds.a);
}

#[test]
fn errors_recompute_from_normal_cdf() {
    let mut r = rng(5);
    for _ in 0..30 {
        let m = random_model(&mut r);
        let s = np_eo_oracle(&m, r.random_range(0.05..0.2), r.random_range(0.02..0.2)).unwrap();
        let cell = |label, group| Cell::new(label, group);
        let err = |label, group: Group| {
            let c = cell(label, group);
            let d = Normal::new(m.mean.to_per_cell()[c], m.variance.to_per_cell()[c].sqrt()).unwrap();
            let t = s.thresholds.get(group);
            match label {
                Label::Zero => d.sf(t),
                Label::One => d.cdf(t),
            }
        };
        let p = m.prob.to_per_cell();
        let w = |label, group| p[cell(label, group)] / (p[cell(label, Group::A)] + p[cell(label, Group::B)]);
        let r0 = w(Label::Zero, Group::A) * err(Label::Zero, Group::A) + w(Label::Zero, Group::B) * err(Label::Zero, Group::B);
        let r1 = w(Label::One, Group::A) * err(Label::One, Group::A) + w(Label::One, Group::B) * err(Label::One, Group::B);
        let l1 = (err(Label::One, Group::A) - err(Label::One, Group::B)).abs();
        for (x, y) in [(s.errors.r0, r0), (s.errors.r1, r1), (s.errors.l1, l1)] {
            assert!(close(x, y, 1e-12), "{x} vs {y}");
        }
    }
}

#[test]
fn np_eo_is_feasible_and_slack_eo_returns_np() {
    let mut r = rng(6);
    for _ in 0..30 {
        let m = random_model(&mut r);
        let (alpha, eps) = (r.random_range(0.05..0.2), r.random_range(0.02..0.2));
        let s = np_eo_oracle(&m, alpha, eps).unwrap();
        assert!(s.errors.r0 <= alpha + 1e-8 && s.errors.l1 <= eps + 1e-8);
        if s.eo_binding {
            assert!(close(s.errors.r0, alpha, 1e-8) && close(s.errors.l1, eps, 1e-8));
        }
        let np = np_oracle(&m, alpha).unwrap();
        assert_eq!(np_eo_oracle(&m, alpha, np.errors.l1.max(1e-3) + 1e-9).unwrap(), np);
    }
}

/// Checks that no lattice point with `R0 <= alpha` and `L1 <= eps` has a
/// smaller `R1` than the oracle.
fn grid_dominance(m: &GaussianGroupModel, alpha: f64, eps: f64, size: usize) {
    let s = np_eo_oracle(m, alpha, eps).unwrap();
    let axis = |g: Group| {
        let c = Cell::new(Label::Zero, g);
        let (mu, sd) = (m.mean.to_per_cell()[c], m.variance.to_per_cell()[c].sqrt());
        let (lo, hi) = (mu - 2.0 * sd, mu + 6.0 * sd);
        (0..size)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (size - 1) as f64;
                (m.cell_error(c, t), m.cell_error(Cell::new(Label::One, g), t))
            })
            .collect::<Vec<_>>()
    };
    let (ax, bx) = (axis(Group::A), axis(Group::B));
    let w = |label, g| m.group_share(label, g);
    let mut best = f64::INFINITY;
    for &(r0a, r1a) in &ax {
        for &(r0b, r1b) in &bx {
            if w(Label::Zero, Group::A) * r0a + w(Label::Zero, Group::B) * r0b <= alpha && (r1a - r1b).abs() <= eps {
                best = best.min(w(Label::One, Group::A) * r1a + w(Label::One, Group::B) * r1b);
            }
        }
    }
    assert!(best.is_finite());
    assert!(best >= s.errors.r1 - 1e-9, "grid {best} beats oracle {}", s.errors.r1);
}

#[test]
fn np_eo_dominates_lattice_search() {
    grid_dominance(&example1(), 0.1, 0.1, 2000);
    let mut r = rng(7);
    for _ in 0..5 {
        grid_dominance(&random_model(&mut r), r.random_range(0.05..0.2), r.random_range(0.02..0.2), 400);
    }
}

fn nearest(p: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).fold(f64::INFINITY, f64::min)
}

#[test]
fn curves_are_monotone_and_meet_at_the_oracle() {
    let m = example1();
    let s = np_eo_oracle(&m, 0.1, 0.1).unwrap();
    let sol = (s.thresholds.a, s.thresholds.b);
    let mut gaps = Vec::new();
    for grid in [40, 400, 4000] {
        let c = feasibility_curves(&m, 0.1, 0.1, grid).unwrap();
        for w in c.np.windows(2) {
            assert!(w[1].1 >= w[0].1 && w[1].0 <= w[0].0 + 1e-12, "np locus {w:?}");
        }
        for w in c.eo.windows(2) {
            assert!(w[1].1 >= w[0].1 && w[1].0 >= w[0].0 - 1e-12, "eo locus {w:?}");
        }
        let closest = c.np.iter().map(|&p| nearest(p, &c.eo)).fold(f64::INFINITY, f64::min);
        gaps.push((closest, nearest(sol, &c.np).max(nearest(sol, &c.eo))));
    }
    assert!(gaps.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "{gaps:?}");
    assert!(gaps[2].0 < 0.01 && gaps[2].1 < 0.01);
}

#[test]
fn prior_invariance() {
    let m = example1();
    let moved = check_prior_invariance(&m, 0.1, 0.1, 0.3).unwrap();
    assert!(moved.invariant && moved.shift <= 1e-7);
    let same = check_prior_invariance(&m, 0.1, 0.1, m.class_prob(Label::Zero)).unwrap();
    assert_eq!(same.shift, 0.0);
    assert_eq!(same.before, same.after);

    let mut r = rng(8);
    for _ in 0..20 {
        let m = random_model(&mut r);
        let inv = check_prior_invariance(&m, r.random_range(0.05..0.2), r.random_range(0.02..0.2), r.random_range(0.1..0.9)).unwrap();
        assert!(inv.invariant, "shift {}", inv.shift);
    }
}

#[test]
fn thresholds_round_trip_through_errors() {
    let m = example1();
    let e = m.errors(GroupThresholds::new(3.2, 2.53));
    assert!(close(e.r0, 0.1, 0.002) && close(e.l1, 0.1, 0.002));
}
