//! Shared helpers for the CLI test suites.

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

pub fn knock() -> Command {
    Command::new(env!("CARGO_BIN_EXE_knock"))
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = knock().args(args).output().expect("spawn knock");
    assert!(
        out.status.success(),
        "knock {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

// not every test target exercises every helper
#[allow(dead_code)]
pub fn exit_code(args: &[&str]) -> i32 {
    knock()
        .args(args)
        .output()
        .expect("spawn knock")
        .status
        .code()
        .expect("exit code")
}

/// Synthetic trace CSV: compression hump plus a 10 kHz burst at 45 deg whose
/// amplitude cycles through a few levels.
pub fn write_traces_csv(path: &Path, cycles: usize) {
    let fs = 90_000.0;
    let mut s = String::from("# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n");
    s.push_str("cycle_id,crank_angle_deg,pressure_bar\n");
    for c in 0..cycles {
        let amp = 0.1 + 0.05 * (c % 7) as f64;
        for i in 0..3600 {
            let a = -180.0 + 0.1 * i as f64;
            let t = i as f64 / fs;
            let mut p = 1.0 + 28.0 * (-(a / 40.0) * (a / 40.0)).exp();
            p += amp
                * (-((a - 45.0) / 10.0f64).powi(2)).exp()
                * (2.0 * std::f64::consts::PI * 10_000.0 * t).sin();
            writeln!(s, "{c},{a},{p}").unwrap();
        }
    }
    std::fs::write(path, s).unwrap();
}

pub fn demo_engine_json(path: &Path) {
    let mut s = serde_json::to_string_pretty(&knock_core::demo_engine(3)).unwrap();
    s.push('\n');
    std::fs::write(path, s).unwrap();
}

pub fn demo_bank_json(path: &Path) {
    let mut s = serde_json::to_string_pretty(&knock_core::demo_bank()).unwrap();
    s.push('\n');
    std::fs::write(path, s).unwrap();
}
