//! Command-line front end: argument definitions and subcommand runners.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibrate::{calibrate, Calibration, GroupScores, Method};
use crate::classifier::{GroupThresholds, Scorer};
use crate::config::NpEoConfig;
use crate::error::{Error, Result};
use crate::harness::{run_repetitions, HarnessMethod, SimulationSpec};
use crate::learners::{fit_logistic, load_dataset, load_scores, LogisticModel, LogisticOptions};
use crate::metrics::{evaluate_scores, ErrorReport};
use crate::oracle::{
    bayes_oracle, check_prior_invariance, feasibility_curves, np_eo_oracle, np_oracle, np_oracle_shared, GaussianGroupModel,
    OracleSolution, PriorInvariance,
};
use crate::split::stratified_split;
use crate::types::{Cell, Dataset};

#[derive(Debug, Parser)]
#[command(name = "npeo", version, about = "Neyman-Pearson classification under an equal-opportunity constraint")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose group thresholds from a score file, or fit a logistic model
    /// on part of a dataset and calibrate on the rest.
    Calibrate(CalibrateArgs),
    /// Error rates of fixed thresholds on a score file or dataset.
    Evaluate(EvaluateArgs),
    /// Run a simulation spec and report violation rates.
    Simulate(SimulateArgs),
    /// Bayes, NP and NP-EO oracles of a Gaussian group model.
    Oracle(OracleArgs),
    /// The two loci whose crossing is the NP-EO oracle, for plotting.
    Curves(CurvesArgs),
}

/// Overrides applied on top of a base configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the configuration keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Type I margin of the multiple-pivot method; defaults to 0.05 * alpha
    /// when only alpha is given.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of each cell used for training when fitting from a dataset.
    #[arg(long)]
    pub split: Option<f64>,
    /// Run the per-group NP order rule at delta / 2.
    #[arg(long)]
    pub half_delta: bool,
}

impl ConfigArgs {
    pub fn resolve(&self, base: NpEoConfig) -> Result<NpEoConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?
            }
            None => base,
        };
        if let Some(a) = self.alpha {
            cfg.alpha = a;
            if self.eta.is_none() {
                cfg.eta = 0.05 * a;
            }
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.delta, self.delta);
        set(&mut cfg.epsilon, self.epsilon);
        set(&mut cfg.gamma, self.gamma);
        set(&mut cfg.eta, self.eta);
        set(&mut cfg.split_fraction, self.split);
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.half_delta {
            cfg.use_half_delta = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Score file with columns id, group, label, score.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub scores: Option<PathBuf>,
    /// Dataset with columns id, group, label, f1 .. fd.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Score the calibration half of `--data` with this saved model instead
    /// of fitting one.
    #[arg(long, requires = "data")]
    pub model: Option<PathBuf>,
    /// Write the fitted model's weights here.
    #[arg(long, requires = "data")]
    pub save_model: Option<PathBuf>,
    #[arg(long, default_value = "op")]
    pub method: HarnessMethod,
    #[arg(long, default_value_t = LogisticOptions::default().iterations)]
    pub iterations: usize,
    #[arg(long, default_value_t = LogisticOptions::default().step)]
    pub step: f64,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub scores: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    /// Saved logistic weights used to score `--data`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Thresholds as `A,B` (one value applies to both groups).
    #[arg(long, value_delimiter = ',', num_args = 1..=2, required_unless_present = "calibration")]
    pub thresholds: Option<Vec<f64>>,
    /// JSON output of `calibrate --format json`.
    #[arg(long, conflicts_with = "thresholds")]
    pub calibration: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation spec (TOML).
    pub spec: PathBuf,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Test samples per cell as a multiple of the training counts.
    #[arg(long)]
    pub test_multiplier: Option<usize>,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<HarnessMethod>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also write every repetition's record as JSON.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Gaussian group model (TOML).
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Also re-solve with P(Y = 0) moved to this value.
    #[arg(long)]
    pub new_p0: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Points per curve.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Runs one parsed command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let text = match cli.command {
        Command::Calibrate(a) => run_calibrate(&a)?,
        Command::Evaluate(a) => run_evaluate(&a)?,
        Command::Simulate(a) => run_simulate(&a)?,
        Command::Oracle(a) => run_oracle(&a)?,
        Command::Curves(a) => run_curves(&a)?,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct CalibrateReport {
    config: NpEoConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<LogisticModel>,
    calibration: Calibration,
}

fn calibration_for(method: HarnessMethod, scores: &GroupScores, cfg: &NpEoConfig) -> Result<Calibration> {
    let method = match method {
        HarnessMethod::Op => Method::Op,
        HarnessMethod::Mp => Method::Mp,
        HarnessMethod::Np => Method::NpOnly,
        HarnessMethod::Classical => {
            return Err(Error::InvalidConfig("the classical method has no calibration step; use evaluate --thresholds 0.5".into()))
        }
    };
    calibrate(method, scores, cfg)
}

fn run_calibrate(a: &CalibrateArgs) -> Result<String> {
    let cfg = a.config.resolve(NpEoConfig::default())?;
    let (scores, model) = match (&a.scores, &a.data) {
        (Some(path), _) => (load_scores(path)?.group_scores()?, None),
        (None, Some(path)) => {
            let data = load_dataset(path)?;
            let split = stratified_split(&data, cfg.split_fraction, cfg.seed)?;
            let model = match &a.model {
                Some(p) => LogisticModel::load(p)?,
                None => fit_logistic(&split.train, LogisticOptions { iterations: a.iterations, step: a.step })?,
            };
            check_dim(&model, &data)?;
            if let Some(p) = &a.save_model {
                model.save(p)?;
            }
            (GroupScores::from_dataset(&model, &split.left_out)?, Some(model))
        }
        (None, None) => return Err(Error::InvalidConfig("one of --scores or --data is required".into())),
    };
    let calibration = calibration_for(a.method, &scores, &cfg)?;
    Ok(match a.format {
        Format::Json => json(&CalibrateReport { config: cfg, model, calibration }),
        Format::Tsv => calibration_tsv(&calibration),
    })
}

fn calibration_tsv(c: &Calibration) -> String {
    let mut s = String::from("key\tvalue\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(s, "{k}\t{v}");
    };
    let method = match c.method {
        Method::Op => "op",
        Method::Mp => "mp",
        Method::NpOnly => "np-only",
    };
    row("method", method.to_string());
    row("threshold_a", c.thresholds.a.to_string());
    row("threshold_b", c.thresholds.b.to_string());
    if let Some(o) = c.orders {
        row("order_a", o.a.to_string());
        row("order_b", o.b.to_string());
    }
    row("pivot_order_a", c.pivot_orders.a.to_string());
    row("pivot_order_b", c.pivot_orders.b.to_string());
    row("pivot_a", c.pivots.a.to_string());
    row("pivot_b", c.pivots.b.to_string());
    row("l_a", c.l_counts[0].to_string());
    row("l_b", c.l_counts[1].to_string());
    if let Some(p) = c.pair {
        row("violation_prob", p.violation_prob.to_string());
        row("empirical_type2", p.empirical_type2.to_string());
    }
    row("pivot_pairs", c.pivot_pairs.to_string());
    row("pivot_pairs_searched", c.pivot_pairs_searched.to_string());
    s
}

fn check_dim(model: &LogisticModel, data: &Dataset) -> Result<()> {
    if model.dim() != data.dim() {
        return Err(Error::InvalidConfig(format!(
            "model expects {} features but the dataset has {}",
            model.dim(),
            data.dim()
        )));
    }
    Ok(())
}

fn run_evaluate(a: &EvaluateArgs) -> Result<String> {
    let thresholds = match (&a.thresholds, &a.calibration) {
        (Some(t), _) => match t.as_slice() {
            [c] => GroupThresholds::uniform(*c),
            [ta, tb] => GroupThresholds::new(*ta, *tb),
            _ => return Err(Error::InvalidConfig("--thresholds takes one or two values".into())),
        },
        (None, Some(path)) => {
            let value: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            // accept both the full calibrate report and a bare calibration
            let cal = value.get("calibration").cloned().unwrap_or(value);
            let cal: Calibration = serde_json::from_value(cal).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            cal.thresholds
        }
        (None, None) => return Err(Error::InvalidConfig("one of --thresholds or --calibration is required".into())),
    };
    let report = match (&a.scores, &a.data, &a.model) {
        (Some(path), _, _) => {
            let table = load_scores(path)?;
            evaluate_scores(&thresholds, table.records.iter().map(|r| (Cell::new(r.label, r.group), r.score)))?
        }
        (None, Some(data), Some(model)) => {
            let data = load_dataset(data)?;
            let model = LogisticModel::load(model)?;
            check_dim(&model, &data)?;
            evaluate_with(&model, &thresholds, &data)?
        }
        _ => return Err(Error::InvalidConfig("give --scores, or --data with --model".into())),
    };
    Ok(match a.format {
        Format::Json => json(&report),
        Format::Tsv => error_report_tsv(&report),
    })
}

fn evaluate_with<S: Scorer>(scorer: &S, thresholds: &GroupThresholds, data: &Dataset) -> Result<ErrorReport> {
    evaluate_scores(thresholds, data.samples().iter().map(|s| (s.cell(), scorer.score(&s.features, s.group))))
}

fn error_report_tsv(r: &ErrorReport) -> String {
    let mut s = String::from("metric\tvalue\n");
    for (k, v) in [("r0", r.r0), ("r1", r.r1), ("r0_a", r.r0_a), ("r0_b", r.r0_b), ("r1_a", r.r1_a), ("r1_b", r.r1_b), ("l1", r.l1)] {
        let _ = writeln!(s, "{k}\t{v}");
    }
    for (cell, n) in r.counts.iter() {
        let _ = writeln!(s, "n_{}{}\t{n}", cell.group, cell.label);
    }
    s
}

fn run_simulate(a: &SimulateArgs) -> Result<String> {
    let mut spec = SimulationSpec::load(&a.spec)?;
    spec.config = a.config.resolve(spec.config)?;
    if let Some(seed) = a.config.seed {
        spec.base_seed = seed;
    }
    if let Some(r) = a.reps {
        spec.repetitions = r;
    }
    if let Some(m) = a.test_multiplier {
        spec.test_multiplier = m;
    }
    if !a.method.is_empty() {
        spec.methods = a.method.clone();
    }
    let report = run_repetitions(&spec)?;
    if let Some(path) = &a.records {
        std::fs::write(path, json(&report.records))?;
    }
    Ok(match a.format {
        Format::Json => report.summary_json() + "\n",
        Format::Tsv => report.to_tsv(),
    })
}

#[derive(Debug, Serialize)]
struct OracleReport {
    model: GaussianGroupModel,
    alpha: f64,
    epsilon: f64,
    bayes: OracleSolution,
    np: OracleSolution,
    np_shared: OracleSolution,
    np_eo: OracleSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    prior_invariance: Option<PriorInvariance>,
}

fn run_oracle(a: &OracleArgs) -> Result<String> {
    let model = GaussianGroupModel::load(&a.model)?;
    let report = OracleReport {
        bayes: bayes_oracle(&model)?,
        np: np_oracle(&model, a.alpha)?,
        np_shared: np_oracle_shared(&model, a.alpha)?,
        np_eo: np_eo_oracle(&model, a.alpha, a.epsilon)?,
        prior_invariance: a.new_p0.map(|p| check_prior_invariance(&model, a.alpha, a.epsilon, p)).transpose()?,
        model,
        alpha: a.alpha,
        epsilon: a.epsilon,
    };
    if a.format == Format::Json {
        return Ok(json(&report));
    }
    let mut s = String::from("oracle\tthreshold_a\tthreshold_b\tr0\tr1\tr0_a\tr0_b\tr1_a\tr1_b\tl1\n");
    let mut rows = vec![("bayes", report.bayes), ("np", report.np), ("np-shared", report.np_shared), ("np-eo", report.np_eo)];
    if let Some(inv) = &report.prior_invariance {
        rows.push(("np-eo-reweighted", inv.after));
    }
    for (name, sol) in rows {
        let e = sol.errors;
        let _ = writeln!(
            s,
            "{name}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            sol.thresholds.a, sol.thresholds.b, e.r0, e.r1, e.r0_a, e.r0_b, e.r1_a, e.r1_b, e.l1
        );
    }
    Ok(s)
}

fn run_curves(a: &CurvesArgs) -> Result<String> {
    let model = GaussianGroupModel::load(&a.model)?;
    let curves = feasibility_curves(&model, a.alpha, a.epsilon, a.grid)?;
    if a.format == Format::Json {
        return Ok(json(&curves));
    }
    let mut s = String::from("curve\tthreshold_a\tthreshold_b\n");
    for (name, pts) in [("np", &curves.np), ("eo", &curves.eo)] {
        for (ta, tb) in pts {
            let _ = writeln!(s, "{name}\t{ta}\t{tb}");
        }
    }
    Ok(s)
}
