//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use knock_core::distfit::{EMConfig, Family, Model};
use knock_core::gof::{canonical_lognormal, canonical_mixture, Thresholds};
use knock_core::knockctl::{controller_step, write_controller_csv, ControllerState, CycleRecord, StateBank};
use knock_core::simloop::{engine_response, run_closed_loop, trajectory_summary, EngineModel};
use knock_core::trace::{
    extract_ki_series, load_ki_dataset, load_traces, read_ki_csv, write_ki_csv, KIDataset,
    KnockWindow, TraceFormat,
};
use knock_core::{acf, acf_bounds, fit_report, mc_thresholds, sample_mixture, Error, FilterSpec, Result};

use crate::opts::{Command, ControllerOpts, PlotKind};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract {
            input,
            band,
            offsets,
            attenuation,
            transition,
            out,
        } => {
            let traces = load_traces(&input, TraceFormat::Csv)?;
            let spec = FilterSpec::with_shape(band.low, band.high, attenuation, transition)?;
            let window = KnockWindow {
                start_offset_deg: offsets.a,
                end_offset_deg: offsets.b,
            };
            let rows = extract_ki_series(&traces, &spec, &window)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_ki_csv(&mut w, &rows)?;
            w.flush()?;
            println!("cycles={}", rows.len());
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Acf {
            input,
            max_lag,
            alpha,
            out,
        } => {
            let data = load_ki_dataset(&input)?;
            write_acf_csv(&data, max_lag, alpha, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Thresholds {
            family,
            n,
            reps,
            seed,
            params,
            out,
        } => {
            let seed = announce_seed(seed);
            let truth = match params {
                Some(path) => {
                    let model: Model = read_json(&path)?;
                    if model.family() != family {
                        return Err(Error::Precondition(format!(
                            "--family {family} but {} holds a {} model",
                            path.display(),
                            model.family()
                        )));
                    }
                    model
                }
                None => match family {
                    Family::Lognormal => Model::Lognormal(canonical_lognormal()),
                    Family::Mixture => Model::Mixture(canonical_mixture()),
                },
            };
            let cal = mc_thresholds(&truth, n, reps, seed, &EMConfig::default())?;
            write_json(&out, &cal.thresholds)?;
            println!(
                "r2_5th={} ks_95th={} redraws={}",
                cal.thresholds.r2_5th, cal.thresholds.ks_95th, cal.degenerate_redraws
            );
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Fit {
            input,
            family,
            thresholds,
            seed,
            out,
            model_out,
        } => {
            let em = if family == Family::Mixture {
                EMConfig {
                    seed: announce_seed(seed),
                    ..EMConfig::default()
                }
            } else {
                EMConfig::default()
            };
            let data = load_ki_dataset(&input)?;
            let th: Thresholds = read_json(&thresholds)?;
            let report = fit_report(&data, family, &th, &em)?;
            if let Some(path) = &model_out {
                write_json(path, &report.model)?;
                println!("wrote {}", path.display());
            }
            match &out {
                Some(path) => {
                    write_json(path, &report)?;
                    println!(
                        "r2={} ks={} accept={}",
                        report.scores.r2, report.scores.ks, report.accept
                    );
                    println!("wrote {}", path.display());
                }
                None => println!("{}", to_pretty_json(&report)?),
            }
            Ok(())
        }

        Command::Classify {
            input,
            bank,
            controller,
            out,
        } => {
            let bank: StateBank = read_json(&bank)?;
            let rows = read_ki_csv(BufReader::new(File::open(&input)?))?;
            if rows.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "{} holds no KI rows",
                    input.display()
                )));
            }
            let spark0 = controller
                .spark0()
                .unwrap_or_else(|| middle_anchor(&bank));
            let mut state = new_controller(&bank, spark0, &controller)?;
            let mut records = Vec::with_capacity(rows.len());
            for (cycle, ki) in rows {
                let spark = state.spark_btdc();
                let step = controller_step(&mut state, &bank, ki)?;
                records.push(CycleRecord {
                    cycle,
                    ki_bar: ki,
                    spark_btdc: spark,
                    delta_deg: step.applied_delta,
                    posterior: step.posterior.probs().to_vec(),
                });
            }
            let mut w = BufWriter::new(File::create(&out)?);
            write_controller_csv(&mut w, &records)?;
            w.flush()?;
            println!("cycles={}", records.len());
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Simulate {
            engine,
            bank,
            cycles,
            seed,
            controller,
            out,
        } => {
            let mut engine: EngineModel = read_json(&engine)?;
            if let Some(seed) = seed {
                engine.seed = seed;
            }
            println!("seed={}", engine.seed);
            let bank: StateBank = read_json(&bank)?;
            let spark0 = controller
                .spark0()
                .unwrap_or_else(|| middle_anchor(&bank) - 10.0);
            let state = new_controller(&bank, spark0, &controller)?;
            let trajectory = run_closed_loop(&engine, &bank, state, cycles)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_controller_csv(&mut w, &trajectory.records)?;
            w.flush()?;
            if !trajectory.records.is_empty() {
                let severe = bank.len() - 1;
                let summary = trajectory_summary(&trajectory, severe, 0.5)?;
                println!(
                    "mean_spark_btdc={} spark_std_deg={} severe_fraction={} mean_ki_bar={}",
                    summary.mean_spark_btdc,
                    summary.spark_std_deg,
                    summary.severe_fraction,
                    summary.mean_ki_bar
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Plotdata { kind } => plotdata(kind),
    }
}

fn plotdata(kind: PlotKind) -> Result<()> {
    match kind {
        PlotKind::KiVsSpark {
            engine,
            sparks,
            n,
            seed,
            out,
        } => {
            let seed = announce_seed(seed);
            let engine: EngineModel = read_json(&engine)?;
            let mut w = BufWriter::new(File::create(&out)?);
            writeln!(w, "spark_btdc,mean_ki,p5_ki,p95_ki")?;
            let mut spark = sparks.lo;
            let mut index = 0u64;
            while spark <= sparks.hi + 1e-9 {
                let params = engine_response(&engine, spark);
                let draws = sample_mixture(&params, n, knock_core::seed::derive(seed, index))?;
                let mut sorted = draws.ki().to_vec();
                sorted.sort_by(f64::total_cmp);
                let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
                let p5 = percentile(&sorted, 5.0);
                let p95 = percentile(&sorted, 95.0);
                writeln!(w, "{spark},{mean},{p5},{p95}")?;
                index += 1;
                spark = sparks.lo + sparks.step * index as f64;
            }
            w.flush()?;
            println!("wrote {}", out.display());
            Ok(())
        }

        PlotKind::Acf {
            input,
            max_lag,
            alpha,
            out,
        } => {
            let data = load_ki_dataset(&input)?;
            write_acf_csv(&data, max_lag, alpha, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }

        PlotKind::Ecdf { input, model, out } => {
            let data = load_ki_dataset(&input)?;
            let model: Model = read_json(&model)?;
            let ecdf = knock_core::empirical_cdf(&data)?;
            let mut w = BufWriter::new(File::create(&out)?);
            writeln!(w, "ki_bar,ln_ki,ecdf,model_cdf")?;
            for (&x, &s) in ecdf.points().iter().zip(ecdf.steps()) {
                writeln!(w, "{x},{},{s},{}", x.ln(), model.cdf(x))?;
            }
            w.flush()?;
            println!("wrote {}", out.display());
            Ok(())
        }

        PlotKind::Scores {
            inputs,
            family,
            thresholds,
            seed,
            out,
        } => {
            let seed = announce_seed(seed);
            let th: Thresholds = read_json(&thresholds)?;
            let mut w = BufWriter::new(File::create(&out)?);
            writeln!(w, "index,label,n,r2,ks,r2_5th,ks_95th,r2_pass,ks_pass,accept")?;
            for (i, path) in inputs.iter().enumerate() {
                let data = load_ki_dataset(path)?;
                let em = EMConfig {
                    seed: knock_core::seed::derive(seed, i as u64),
                    ..EMConfig::default()
                };
                let rep = fit_report(&data, family, &th, &em)?;
                writeln!(
                    w,
                    "{i},{},{},{},{},{},{},{},{},{}",
                    rep.label,
                    rep.n,
                    rep.scores.r2,
                    rep.scores.ks,
                    th.r2_5th,
                    th.ks_95th,
                    rep.r2_pass,
                    rep.ks_pass,
                    rep.accept
                )?;
            }
            w.flush()?;
            println!("wrote {}", out.display());
            Ok(())
        }

        PlotKind::States { bank, points, out } => {
            if points < 2 {
                return Err(Error::Precondition("need at least 2 grid points".into()));
            }
            let bank: StateBank = read_json(&bank)?;
            // shared log-KI grid covering every state out to four sigmas
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in bank.states() {
                let m = s.model;
                lo = lo.min(m.comp1().mu() - 4.0 * m.comp1().sigma());
                hi = hi.max(m.comp2().mu() + 4.0 * m.comp2().sigma());
            }
            let mut w = BufWriter::new(File::create(&out)?);
            writeln!(w, "state,label,ln_ki,density")?;
            for (i, s) in bank.states().iter().enumerate() {
                for j in 0..points {
                    let y = lo + (hi - lo) * j as f64 / (points - 1) as f64;
                    writeln!(w, "{},{},{y},{}", i + 1, s.label, s.model.log_space_pdf(y))?;
                }
            }
            w.flush()?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

/// Resolve an optional seed to a concrete printed value so every random
/// result is traceable from the output alone.
fn announce_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or(0);
    println!("seed={seed}");
    seed
}

fn new_controller(bank: &StateBank, spark0: f64, opts: &ControllerOpts) -> Result<ControllerState> {
    ControllerState::new(spark0, bank.len(), opts.window(), opts.limits(), opts.lambda())
}

fn middle_anchor(bank: &StateBank) -> f64 {
    bank.states()[(bank.len() - 1) / 2].spark_anchor_btdc
}

fn write_acf_csv(data: &KIDataset, max_lag: usize, alpha: f64, out: &Path) -> Result<()> {
    let r = acf(data, max_lag)?;
    let bound = acf_bounds(data.len(), alpha)?;
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "lag,acf,bound_lo,bound_hi")?;
    for (lag, v) in r.iter().enumerate() {
        writeln!(w, "{lag},{v},{},{bound}", -bound)?;
    }
    w.flush()?;
    Ok(())
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn read_json<T: DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let file = File::open(path)
        .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_pretty_json(value)?)?;
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
