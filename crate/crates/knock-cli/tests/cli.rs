//! CLI behavior: pipelines, file round-trips, and exit codes.

mod common;

use common::*;
use tempfile::tempdir;

#[test]
fn extract_then_fit_pipeline() {
    let dir = tempdir().unwrap();
    let traces = dir.path().join("traces.csv");
    let ki = dir.path().join("ki.csv");
    let th = dir.path().join("th.json");
    let report = dir.path().join("report.json");
    let model = dir.path().join("model.json");
    write_traces_csv(&traces, 30);

    run_ok(&[
        "extract",
        "--in", traces.to_str().unwrap(),
        "--band", "3000:25000",
        "--out", ki.to_str().unwrap(),
    ]);
    let ki_text = std::fs::read_to_string(&ki).unwrap();
    assert!(ki_text.starts_with("cycle,ki_bar\n"));
    assert_eq!(ki_text.lines().count(), 31);

    run_ok(&[
        "thresholds",
        "--family", "mixture",
        "--n", "120",
        "--reps", "40",
        "--seed", "7",
        "--out", th.to_str().unwrap(),
    ]);
    let th_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&th).unwrap()).unwrap();
    assert_eq!(th_json["family"], "mixture");
    assert!(th_json["r2_5th"].as_f64().unwrap() > 0.9);
    assert!(th_json["ks_95th"].as_f64().unwrap() < 0.5);

    let out = run_ok(&[
        "fit",
        "--in", ki.to_str().unwrap(),
        "--family", "mixture",
        "--thresholds", th.to_str().unwrap(),
        "--seed", "1",
        "--out", report.to_str().unwrap(),
        "--model-out", model.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed=1"));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["family"], "mixture");
    assert!(rep["scores"]["r2"].is_number());
    assert!(rep["accept"].is_boolean());

    // the written model feeds plot data directly
    let ecdf = dir.path().join("ecdf.csv");
    run_ok(&[
        "plotdata", "ecdf",
        "--in", ki.to_str().unwrap(),
        "--model", model.to_str().unwrap(),
        "--out", ecdf.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&ecdf).unwrap();
    assert!(text.starts_with("ki_bar,ln_ki,ecdf,model_cdf\n"));
}

#[test]
fn acf_reports_bounds() {
    let dir = tempdir().unwrap();
    let traces = dir.path().join("traces.csv");
    let ki = dir.path().join("ki.csv");
    let acf = dir.path().join("acf.csv");
    write_traces_csv(&traces, 25);
    run_ok(&["extract", "--in", traces.to_str().unwrap(), "--out", ki.to_str().unwrap()]);
    run_ok(&[
        "acf",
        "--in", ki.to_str().unwrap(),
        "--max-lag", "5",
        "--out", acf.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&acf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lag,acf,bound_lo,bound_hi");
    let lag0 = lines.next().unwrap();
    assert!(lag0.starts_with("0,1,"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn classify_and_simulate_produce_controller_traces() {
    let dir = tempdir().unwrap();
    let engine = dir.path().join("engine.json");
    let bank = dir.path().join("bank.json");
    let traj = dir.path().join("traj.csv");
    demo_engine_json(&engine);
    demo_bank_json(&bank);

    let out = run_ok(&[
        "simulate",
        "--engine", engine.to_str().unwrap(),
        "--bank", bank.to_str().unwrap(),
        "--cycles", "300",
        "--seed", "3",
        "--out", traj.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("seed=3"));
    assert!(stdout.contains("mean_spark_btdc="));
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("cycle,ki_bar,spark_btdc,delta_deg,p1,p2,p3,p4,p5\n"));
    assert_eq!(text.lines().count(), 301);

    // feed the simulated KI column back through the classifier
    let ki = dir.path().join("sim_ki.csv");
    let mut s = String::from("cycle,ki_bar\n");
    for line in text.lines().skip(1) {
        let mut fields = line.split(',');
        let cycle = fields.next().unwrap();
        let ki_bar = fields.next().unwrap();
        s.push_str(&format!("{cycle},{ki_bar}\n"));
    }
    std::fs::write(&ki, s).unwrap();
    let cls = dir.path().join("cls.csv");
    run_ok(&[
        "classify",
        "--in", ki.to_str().unwrap(),
        "--bank", bank.to_str().unwrap(),
        "--out", cls.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&cls).unwrap();
    assert!(text.starts_with("cycle,ki_bar,spark_btdc,delta_deg,p1,p2,p3,p4,p5\n"));
    assert_eq!(text.lines().count(), 301);
}

#[test]
fn plotdata_states_and_ki_vs_spark() {
    let dir = tempdir().unwrap();
    let engine = dir.path().join("engine.json");
    let bank = dir.path().join("bank.json");
    demo_engine_json(&engine);
    demo_bank_json(&bank);

    let f3 = dir.path().join("f3.csv");
    run_ok(&[
        "plotdata", "ki-vs-spark",
        "--engine", engine.to_str().unwrap(),
        "--sparks", "12:21:3",
        "--n", "200",
        "--seed", "2",
        "--out", f3.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&f3).unwrap();
    assert_eq!(text.lines().next().unwrap(), "spark_btdc,mean_ki,p5_ki,p95_ki");
    assert_eq!(text.lines().count(), 5);
    // mean KI must rise with spark advance
    let means: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "means {means:?}");

    let states = dir.path().join("states.csv");
    run_ok(&[
        "plotdata", "states",
        "--bank", bank.to_str().unwrap(),
        "--points", "50",
        "--out", states.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&states).unwrap();
    assert_eq!(text.lines().next().unwrap(), "state,label,ln_ki,density");
    assert_eq!(text.lines().count(), 1 + 5 * 50);
}

#[test]
fn shipped_demo_files_match_the_builtin_configs() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let engine: knock_core::EngineModel =
        serde_json::from_str(&std::fs::read_to_string(format!("{root}/demo/engine.json")).unwrap())
            .unwrap();
    assert_eq!(engine, knock_core::demo_engine(3));
    let bank: knock_core::StateBank =
        serde_json::from_str(&std::fs::read_to_string(format!("{root}/demo/bank.json")).unwrap())
            .unwrap();
    assert_eq!(bank, knock_core::demo_bank());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(exit_code(&["no-such-command"]), 2);
    assert_eq!(exit_code(&["extract", "--no-such-flag"]), 2);
    assert_eq!(exit_code(&["fit"]), 2); // missing required options
}

#[test]
fn format_errors_exit_3() {
    let dir = tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = dir.path().join("out.csv");
    assert_eq!(
        exit_code(&[
            "extract",
            "--in", missing.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
        ]),
        3
    );

    // decreasing crank angles
    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n0,0.2,1.0\n0,0.1,1.0\n",
    )
    .unwrap();
    let output = knock()
        .args(["extract", "--in", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.starts_with("knock: [FORMAT]"), "stderr: {stderr}");
}

#[test]
fn numeric_errors_exit_4() {
    let dir = tempdir().unwrap();
    let ki = dir.path().join("tiny.csv");
    std::fs::write(&ki, "cycle,ki_bar\n0,1.0\n1,2.0\n").unwrap();
    let th = dir.path().join("th.json");
    run_ok(&[
        "thresholds",
        "--family", "mixture",
        "--n", "60",
        "--reps", "5",
        "--seed", "1",
        "--out", th.to_str().unwrap(),
    ]);
    // 2 samples cannot support an EM mixture fit
    let output = knock()
        .args([
            "fit",
            "--in", ki.to_str().unwrap(),
            "--family", "mixture",
            "--thresholds", th.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.starts_with("knock: [NUMERIC]"), "stderr: {stderr}");

    // Nyquist violation: 1 deg resolution is 9 kHz sampling
    let coarse = dir.path().join("coarse.csv");
    let mut s = String::from("# rpm=1500\n# spark_btdc=20\n# resolution_deg=1\n");
    for i in 0..360 {
        s.push_str(&format!("0,{},1.0\n", -180.0 + i as f64));
    }
    std::fs::write(&coarse, s).unwrap();
    assert_eq!(
        exit_code(&[
            "extract",
            "--in", coarse.to_str().unwrap(),
            "--out", dir.path().join("x.csv").to_str().unwrap(),
        ]),
        4
    );
}
