//! End-to-end CLI behavior: exit codes, diagnostics naming the offending
//! field, config-file precedence, output files, and the distributional
//! content of the experiment sweep.

use std::process::{Command, Output};

use gumbel_core::{chi_square_gof, DEFAULT_ALPHA};

fn gumbel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gumbel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn sample_csv_schema() {
    let out = gumbel(&[
        "sample",
        "--logits",
        "1.0,0.0",
        "--n-draws",
        "5",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("draw_id,index,max_value"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn topk_rows_are_ranked_per_draw() {
    let out = gumbel(&[
        "topk",
        "--logits",
        "1.0,0.5,0.0",
        "--k",
        "2",
        "--n-draws",
        "3",
        "--seed",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("draw_id,rank,index,perturbed_value"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert_eq!(pair[0][1], "0");
        assert_eq!(pair[1][1], "1");
        let v0: f64 = pair[0][3].parse().unwrap();
        let v1: f64 = pair[1][3].parse().unwrap();
        assert!(v0 > v1);
    }
}

#[test]
fn topdown_emits_one_node_per_class() {
    let out = gumbel(&["topdown", "--logits", "0.5,0.0,-0.5,0.2", "--seed", "9"]);
    assert!(out.status.success());
    let nodes: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let nodes = nodes.as_array().unwrap();
    assert_eq!(nodes.len(), 4);
    assert_eq!(nodes[0]["domain"].as_array().unwrap().len(), 4);
    let mut omegas: Vec<u64> = nodes.iter().map(|n| n["omega"].as_u64().unwrap()).collect();
    omegas.sort_unstable();
    assert_eq!(omegas, vec![0, 1, 2, 3]);
}

#[test]
fn conditioned_topdown_pins_the_root() {
    let out = gumbel(&[
        "topdown",
        "--logits",
        "0.5,0.0,-0.5",
        "--condition-index",
        "2",
        "--condition-max",
        "1.5",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let nodes: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(nodes[0]["omega"], 2);
    assert_eq!(nodes[0]["m"], 1.5);
}

#[test]
fn relax_hard_mode_appends_the_hard_index() {
    let out = gumbel(&[
        "relax",
        "--logits",
        "1.0,0.0",
        "--lambda",
        "0.5",
        "--n-draws",
        "2",
        "--hard",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("draw_id,w0,w1,hard_index\n"), "{text}");
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let w0: f64 = fields[1].parse().unwrap();
        let w1: f64 = fields[2].parse().unwrap();
        assert!((w0 + w1 - 1.0).abs() < 1e-12);
        let hard: usize = fields[3].parse().unwrap();
        assert_eq!(hard, if w0 >= w1 { 0 } else { 1 });
    }
}

#[test]
fn estimate_reports_against_the_analytic_oracle() {
    let out = gumbel(&[
        "estimate",
        "--estimator",
        "gs",
        "--lambda",
        "1.0",
        "--logits",
        "0.5,0.0,-0.5",
        "--payoff",
        "1,2,3",
        "--n-samples",
        "20000",
        "--seed",
        "6",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["estimator"], "gs");
    assert_eq!(v["report"]["n_samples"], 20000);
    assert_eq!(v["report"]["grad_mean"].as_array().unwrap().len(), 3);
    assert!(v["report"]["max_abs_bias"].as_f64().unwrap() >= 0.0);
}

fn experiment_sections(seed: &str, n_draws: &str) -> Vec<(String, String, Vec<f64>)> {
    let out = gumbel(&["experiment", "--n-draws", n_draws, "--seed", seed]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut sections: Vec<(String, String, Vec<f64>)> = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let (section, param, value) = (fields[0], fields[1], fields[3].parse::<f64>().unwrap());
        match sections.last_mut() {
            Some((s, p, values)) if s == section && p == param => values.push(value),
            _ => sections.push((section.into(), param.into(), vec![value])),
        }
    }
    sections
}

#[test]
fn experiment_reproduces_the_sweep_claims() {
    let n_draws = 20_000usize;
    let sections = experiment_sections("17", &n_draws.to_string());
    let pi = &sections.iter().find(|(s, _, _)| s == "pi").unwrap().2;
    let find = |section: &str, param: &str| -> &Vec<f64> {
        &sections
            .iter()
            .find(|(s, p, _)| s == section && p == param)
            .unwrap_or_else(|| panic!("missing {section}/{param}"))
            .2
    };

    // beta = 1 frequencies follow pi.
    let counts: Vec<u64> = find("beta_hist", "1")
        .iter()
        .map(|f| (f * n_draws as f64).round() as u64)
        .collect();
    let gof = chi_square_gof(&counts, pi, DEFAULT_ALPHA).unwrap();
    assert!(gof.pass, "beta 1 vs pi: p = {}", gof.p_value);

    // Lower noise scale concentrates, higher flattens.
    let entropy =
        |f: &Vec<f64>| -> f64 { f.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum() };
    assert!(entropy(find("beta_hist", "0.3")) < entropy(find("beta_hist", "1")));
    assert!(entropy(find("beta_hist", "1")) < entropy(find("beta_hist", "3")));

    // Mean soft samples: lambda = 0.05 nearest pi, lambda = 5 nearest
    // uniform.
    let l1 = |a: &Vec<f64>, b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum() };
    let uniform = vec![0.2; 5];
    let cold = find("gs_mean", "0.05");
    let mid = find("gs_mean", "1");
    let hot = find("gs_mean", "5");
    assert!(l1(cold, pi) < l1(mid, pi) && l1(cold, pi) < l1(hot, pi));
    assert!(l1(hot, &uniform) < l1(mid, &uniform) && l1(hot, &uniform) < l1(cold, &uniform));
}

#[test]
fn flags_override_config_file() {
    let dir = std::env::temp_dir().join(format!("gumbel-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("config.json");
    std::fs::write(
        &cfg_path,
        r#"{"seed": 7, "logits": [1.0, 0.0], "n_draws": 3}"#,
    )
    .unwrap();
    let cfg = cfg_path.to_str().unwrap();

    let from_file = gumbel(&["sample", "--config", cfg]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file).lines().count(), 4);

    let overridden = gumbel(&["sample", "--config", cfg, "--n-draws", "5"]);
    assert_eq!(stdout(&overridden).lines().count(), 6);

    // Same seed via flag and via file: identical draws.
    let by_flag = gumbel(&[
        "sample",
        "--logits",
        "1.0,0.0",
        "--n-draws",
        "3",
        "--seed",
        "7",
    ]);
    assert_eq!(stdout(&from_file), stdout(&by_flag));

    // --out writes the same bytes to a file.
    let out_path = dir.join("draws.csv");
    let to_file = gumbel(&[
        "sample",
        "--config",
        cfg,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert!(stdout(&to_file).is_empty());
    assert_eq!(
        std::fs::read_to_string(&out_path).unwrap(),
        stdout(&from_file)
    );

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_inputs_name_the_offending_field() {
    let bad_temp = gumbel(&[
        "sample",
        "--logits",
        "1.0,0.0",
        "--temperature",
        "-1.0",
        "--seed",
        "1",
    ]);
    assert_eq!(bad_temp.status.code(), Some(2));
    assert!(
        stderr(&bad_temp).contains("field 'temperature'"),
        "{}",
        stderr(&bad_temp)
    );

    let bad_k = gumbel(&["topk", "--logits", "1.0,0.0", "--k", "5", "--seed", "1"]);
    assert_eq!(bad_k.status.code(), Some(2));
    assert!(stderr(&bad_k).contains("field 'k'"));

    let missing_logits = gumbel(&["sample", "--seed", "1"]);
    assert_eq!(missing_logits.status.code(), Some(2));
    assert!(stderr(&missing_logits).contains("field 'logits'"));

    let bad_lambda = gumbel(&[
        "relax", "--logits", "1.0,0.0", "--lambda", "0.0", "--seed", "1",
    ]);
    assert_eq!(bad_lambda.status.code(), Some(2));
    assert!(stderr(&bad_lambda).contains("field 'gs_lambda'"));

    let dir = std::env::temp_dir().join(format!("gumbel-cli-badcfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("bad.json");
    std::fs::write(&cfg_path, r#"{"temperature": 0.0, "logits": [0.0, 1.0]}"#).unwrap();
    let bad_cfg = gumbel(&["sample", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(bad_cfg.status.code(), Some(2));
    assert!(stderr(&bad_cfg).contains("field 'temperature'"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_suite_is_rejected() {
    let out = gumbel(&["verify", "nosuch", "--seed", "1"]);
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn verify_exactness_passes_and_reports() {
    let out = gumbel(&["verify", "exactness", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("suite: exactness"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 5);
    assert!(text.contains("result: PASS"));

    let json = gumbel(&["verify", "exactness", "--seed", "7", "--format", "json"]);
    assert_eq!(json.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["suite"], "exactness");
    assert_eq!(v["all_pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 5);
}

#[test]
fn categorical_params_json_wire_shape() {
    let c = gumbel_core::CategoricalParams::new(vec![1.0, 0.0, -0.5], 2.0).unwrap();
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(json, r#"{"logits":[1.0,0.0,-0.5],"temperature":2.0}"#);
    let back: gumbel_core::CategoricalParams = serde_json::from_str(&json).unwrap();
    assert_eq!(back, c);
    // Deserialization revalidates.
    let bad: Result<gumbel_core::CategoricalParams, _> =
        serde_json::from_str(r#"{"logits":[1.0],"temperature":-1.0}"#);
    assert!(bad.is_err());
    let empty: Result<gumbel_core::CategoricalParams, _> =
        serde_json::from_str(r#"{"logits":[],"temperature":1.0}"#);
    assert!(empty.is_err());
}

#[test]
fn verify_all_passes_in_process() {
    let report = gumbel_cli::verify::run_suite(gumbel_cli::verify::Suite::All, 7);
    assert!(report.all_pass, "{}", report.render_table());
    assert!(report.checks.len() >= 40);
}

#[test]
fn csv_is_rejected_where_only_json_makes_sense() {
    let out = gumbel(&[
        "topdown", "--logits", "1.0,0.0", "--seed", "1", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("field 'format'"));
}
