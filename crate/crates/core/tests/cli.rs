use std::path::Path;
use std::process::{Command, Output};

use npeo::harness::{gen_gaussian_data, SimulationSpec};
use npeo::learners::write_dataset;
use npeo::PerCell;

fn npeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npeo")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_file(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn tsv_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn oracle_prints_example1_thresholds() {
    let text = stdout(&npeo(&["oracle", &data_file("example1.toml")]));
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("np-eo\t")).unwrap().split('\t').collect();
    let (ta, tb): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!((ta - 3.20).abs() < 0.01 && (tb - 2.53).abs() < 0.01, "{row:?}");

    let json = stdout(&npeo(&["oracle", &data_file("example1.toml"), "--new-p0", "0.3", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["prior_invariance"]["invariant"], true);
    assert!((v["bayes"]["thresholds"]["a"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_nonzero() {
    let out = npeo(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(!npeo(&["calibrate"]).status.success());
    let missing = npeo(&["oracle", "/nonexistent/model.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("npeo: "));
}

#[test]
fn curves_emit_both_loci() {
    let text = stdout(&npeo(&["curves", &data_file("example1.toml"), "--grid", "40"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("curve\tthreshold_a\tthreshold_b"));
    let names: Vec<&str> = lines.map(|l| l.split('\t').next().unwrap()).collect();
    assert!(names.contains(&"np") && names.contains(&"eo"));
}

#[test]
fn calibrate_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SimulationSpec::load(data_file("simulation1.toml")).unwrap();
    let data = gen_gaussian_data(&spec, PerCell([400, 600, 200, 800]), 3);
    let data_path = dir.path().join("data.csv");
    write_dataset(&data, std::fs::File::create(&data_path).unwrap()).unwrap();
    let data_path = data_path.display().to_string();
    let model_path = dir.path().join("model.txt").display().to_string();
    let cal_path = dir.path().join("cal.json");

    let args = ["calibrate", "--data", &data_path, "--save-model", &model_path, "--alpha", "0.1", "--format", "json"];
    let json = stdout(&npeo(&args));
    std::fs::write(&cal_path, &json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let ta = v["calibration"]["thresholds"]["a"].as_f64().unwrap();

    // Reusing the saved model and seed reproduces the thresholds.
    let tsv = stdout(&npeo(&["calibrate", "--data", &data_path, "--model", &model_path, "--alpha", "0.1"]));
    assert_eq!(tsv_value(&tsv, "threshold_a").parse::<f64>().unwrap(), ta);
    assert_eq!(tsv_value(&tsv, "method"), "op");

    let cal = cal_path.display().to_string();
    let eval = stdout(&npeo(&["evaluate", "--data", &data_path, "--model", &model_path, "--calibration", &cal]));
    let r0: f64 = tsv_value(&eval, "r0").parse().unwrap();
    assert!((0.0..=1.0).contains(&r0));
    let none = stdout(&npeo(&["evaluate", "--data", &data_path, "--model", &model_path, "--thresholds", "inf"]));
    assert_eq!(tsv_value(&none, "r0").parse::<f64>().unwrap(), 0.0);
    assert_eq!(tsv_value(&none, "r1").parse::<f64>().unwrap(), 1.0);
}

#[test]
fn calibrate_from_score_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.csv");
    let mut text = String::from("id,group,label,score\n");
    for i in 0..200 {
        let u = (i as f64 + 0.5) / 200.0;
        text += &format!("a0-{i},a,0,{u}\nb0-{i},b,0,{}\n", u * 0.9);
        text += &format!("a1-{i},a,1,{}\nb1-{i},b,1,{}\n", u + 0.5, u + 0.4);
    }
    std::fs::write(&path, text).unwrap();
    let path = path.display().to_string();
    let out = stdout(&npeo(&["calibrate", "--scores", &path, "--alpha", "0.1", "--delta", "0.1", "--epsilon", "0.2"]));
    let order_a: usize = tsv_value(&out, "order_a").parse().unwrap();
    assert!(order_a >= 1);
    let np = stdout(&npeo(&["calibrate", "--scores", &path, "--method", "np"]));
    assert_eq!(tsv_value(&np, "method"), "np-only");
    assert!(!npeo(&["calibrate", "--scores", &path, "--method", "classical"]).status.success());
}

#[test]
fn tiny_simulation_runs() {
    let out = stdout(&npeo(&[
        "simulate",
        &data_file("simulation1.toml"),
        "--reps",
        "2",
        "--test-multiplier",
        "2",
        "--method",
        "op,np,classical",
    ]));
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("method\tavg_R0"));
    let methods: Vec<&str> = lines.map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(methods, ["op", "np", "classical"]);
}
