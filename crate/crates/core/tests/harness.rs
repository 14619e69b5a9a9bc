use npeo::harness::{gen_gaussian_data, run_repetitions, HarnessMethod, SimulationSpec};
use npeo::{Cell, PerCell};

fn simulation1() -> SimulationSpec {
    SimulationSpec::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/simulation1.toml")).unwrap()
}

fn small(methods: Vec<HarnessMethod>, reps: usize) -> SimulationSpec {
    let mut spec = simulation1();
    spec.repetitions = reps;
    spec.test_multiplier = 5;
    spec.methods = methods;
    spec
}

#[test]
fn simulated_cells_center_on_their_means() {
    let spec = simulation1();
    let counts = spec.counts.to_per_cell();
    let data = gen_gaussian_data(&spec, counts, 17);
    let means = spec.means.to_per_cell();
    for cell in Cell::ALL {
        let n = counts[cell] as f64;
        let rows: Vec<&Vec<f64>> = data.cell(cell).map(|s| &s.features).collect();
        assert_eq!(rows.len(), counts[cell]);
        for (d, &mu) in means[cell].iter().enumerate() {
            let avg = rows.iter().map(|r| r[d]).sum::<f64>() / n;
            assert!((avg - mu).abs() < 3.0 * spec.scale.sqrt() / n.sqrt(), "{cell} coordinate {d}: {avg} vs {mu}");
        }
    }
}

#[test]
fn vanishing_scale_collapses_onto_means() {
    let mut spec = simulation1();
    spec.scale = 1e-12;
    let data = gen_gaussian_data(&spec, PerCell([3, 3, 3, 3]), 1);
    let means = spec.means.to_per_cell();
    for s in data.samples() {
        for (x, m) in s.features.iter().zip(&means[s.cell()]) {
            assert!((x - m).abs() < 1e-5);
        }
    }
}

#[test]
fn same_seed_same_data() {
    let spec = simulation1();
    let counts = PerCell([10, 20, 30, 40]);
    let (a, b) = (gen_gaussian_data(&spec, counts, 9), gen_gaussian_data(&spec, counts, 9));
    assert_eq!(a.samples(), b.samples());
    assert_ne!(a.samples(), gen_gaussian_data(&spec, counts, 10).samples());
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let spec = small(vec![HarnessMethod::Op, HarnessMethod::Np, HarnessMethod::Classical], 6);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_repetitions(&spec).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one, four);
    assert_eq!(one.summary_json(), four.summary_json());
    assert_eq!(one.to_tsv(), four.to_tsv());
}

#[test]
fn violation_rates_are_exact_fractions() {
    let spec = small(vec![HarnessMethod::Op, HarnessMethod::Np, HarnessMethod::Classical], 8);
    let report = run_repetitions(&spec).unwrap();
    assert_eq!(report.records.len(), 8);
    for (m, summary) in spec.methods.iter().zip(&report.methods) {
        assert_eq!(summary.method, *m);
        let reports: Vec<_> = report
            .records
            .iter()
            .flat_map(|r| r.outcomes.iter().filter(|o| o.method() == *m).filter_map(|o| o.report()))
            .collect();
        assert_eq!(reports.len() + summary.failures, 8);
        let n = reports.len() as f64;
        let hits = reports.iter().filter(|r| r.r0 > spec.config.alpha).count() as f64;
        let p = hits / n;
        assert_eq!(summary.np_violation.mean, p);
        assert!((summary.np_violation.se - (p * (1.0 - p) / n).sqrt()).abs() < 1e-15);
        let eo = reports.iter().filter(|r| r.l1 > spec.config.epsilon).count() as f64 / n;
        assert_eq!(summary.eo_violation.mean, eo);
        let avg_r1 = reports.iter().map(|r| r.r1).sum::<f64>() / n;
        assert!((summary.r1.mean - avg_r1).abs() < 1e-15);
        for rate in [summary.np_violation.mean, summary.eo_violation.mean] {
            assert!((0.0..=1.0).contains(&rate));
        }
    }
    // Thresholding logistic scores at 0.5 ignores alpha entirely.
    assert!(report.method(HarnessMethod::Classical).unwrap().np_violation.mean > 0.9);
    // Without the EO step the group gap is left wherever the scores put it.
    let np = report.method(HarnessMethod::Np).unwrap();
    assert!(np.eo_violation.mean > spec.config.gamma);
}

#[test]
fn repetition_seeds_follow_the_base_seed() {
    let mut spec = small(vec![HarnessMethod::Classical], 3);
    spec.base_seed = 40;
    let report = run_repetitions(&spec).unwrap();
    let seeds: Vec<u64> = report.records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![40, 41, 42]);
}
