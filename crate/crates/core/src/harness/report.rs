//! Per-repetition records and their aggregation into violation rates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::sim::{HarnessMethod, SimulationSpec};
use crate::classifier::{GroupThresholds, SelectedOrders};
use crate::metrics::ErrorReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum MethodOutcome {
    Ok {
        method: HarnessMethod,
        thresholds: GroupThresholds,
        orders: Option<SelectedOrders>,
        report: ErrorReport,
    },
    Failed {
        method: HarnessMethod,
        error: String,
    },
}

impl MethodOutcome {
    pub fn method(&self) -> HarnessMethod {
        match self {
            MethodOutcome::Ok { method, .. } | MethodOutcome::Failed { method, .. } => *method,
        }
    }

    pub fn report(&self) -> Option<&ErrorReport> {
        match self {
            MethodOutcome::Ok { report, .. } => Some(report),
            MethodOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub index: usize,
    pub seed: u64,
    pub outcomes: Vec<MethodOutcome>,
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and `sd / sqrt(n)` with the `n - 1` variance.
    pub fn of(values: &[f64]) -> Estimate {
        let n = values.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Estimate { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Estimate { mean, se: (var / n as f64).sqrt() }
    }

    /// Fraction of `true` with the binomial standard error `sqrt(p(1-p)/n)`.
    pub fn rate(flags: &[bool]) -> Estimate {
        let n = flags.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN };
        }
        let p = flags.iter().filter(|&&f| f).count() as f64 / n as f64;
        Estimate { mean: p, se: (p * (1.0 - p) / n as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: HarnessMethod,
    pub successes: usize,
    pub failures: usize,
    pub r0: Estimate,
    pub r1: Estimate,
    pub l1: Estimate,
    /// Fraction of repetitions with `R0 > alpha`.
    pub np_violation: Estimate,
    /// Fraction of repetitions with `L1 > epsilon`.
    pub eo_violation: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub name: String,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub repetitions: usize,
    pub methods: Vec<MethodSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub records: Vec<RepetitionRecord>,
}

impl AggregateReport {
    pub fn from_records(spec: &SimulationSpec, records: Vec<RepetitionRecord>) -> Self {
        let cfg = &spec.config;
        let methods = spec
            .methods
            .iter()
            .map(|&method| {
                let reports: Vec<&ErrorReport> = records
                    .iter()
                    .flat_map(|r| r.outcomes.iter().filter(move |o| o.method() == method))
                    .filter_map(MethodOutcome::report)
                    .collect();
                let pick = |f: fn(&ErrorReport) -> f64| reports.iter().map(|r| f(r)).collect::<Vec<f64>>();
                let np: Vec<bool> = reports.iter().map(|r| r.r0 > cfg.alpha).collect();
                let eo: Vec<bool> = reports.iter().map(|r| r.l1 > cfg.epsilon).collect();
                MethodSummary {
                    method,
                    successes: reports.len(),
                    failures: records.len() - reports.len(),
                    r0: Estimate::of(&pick(|r| r.r0)),
                    r1: Estimate::of(&pick(|r| r.r1)),
                    l1: Estimate::of(&pick(|r| r.l1)),
                    np_violation: Estimate::rate(&np),
                    eo_violation: Estimate::rate(&eo),
                }
            })
            .collect();
        AggregateReport {
            name: spec.name.clone(),
            alpha: cfg.alpha,
            delta: cfg.delta,
            epsilon: cfg.epsilon,
            gamma: cfg.gamma,
            repetitions: records.len(),
            methods,
            records,
        }
    }

    pub fn method(&self, method: HarnessMethod) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// Tab-separated table; standard errors are scaled by 10^4.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from(
            "method\tavg_R0\tse_R0_e4\tavg_R1\tse_R1_e4\tavg_L1\tse_L1_e4\tnp_violation\tse_np_e4\teo_violation\tse_eo_e4\tfailures\n",
        );
        for m in &self.methods {
            let _ = write!(s, "{}", m.method);
            for e in [m.r0, m.r1, m.l1, m.np_violation, m.eo_violation] {
                let _ = write!(s, "\t{:.3}\t{:.1}", e.mean, e.se * 1e4);
            }
            let _ = writeln!(s, "\t{}", m.failures);
        }
        s
    }

    /// JSON summary without the per-repetition records.
    pub fn summary_json(&self) -> String {
        let mut summary = self.clone();
        summary.records.clear();
        serde_json::to_string_pretty(&summary).expect("report serializes")
    }
}
