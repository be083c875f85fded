//! Argument layout and small value parsers.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand};

use knock_core::Family;

/// Numeric defaults follow the usual experimental constants: 3-25 kHz knock
/// band, spark+20..spark+110 deg analysis window, 1116-cycle operating
/// points, 10,000 calibration replicates.
#[derive(Subcommand)]
pub enum Command {
    /// Extract per-cycle knock intensity from a pressure-trace CSV.
    Extract {
        /// Trace CSV (`# rpm=`, `# spark_btdc=`, `# resolution_deg=` headers,
        /// then `cycle_id,crank_angle_deg,pressure_bar` rows).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Knock band in Hz as `low:high`.
        #[arg(long, value_parser = parse_band, default_value = "3000:25000")]
        band: Band,
        /// Analysis window as crank-angle offsets after spark, `start:end`.
        #[arg(long, value_parser = parse_span, default_value = "20:110")]
        offsets: Span,
        /// Stop-band attenuation floor in dB.
        #[arg(long, default_value_t = 40.0)]
        attenuation: f64,
        /// Transition-band width as a fraction of each band edge.
        #[arg(long, default_value_t = 0.15)]
        transition: f64,
        /// Output KI CSV (`cycle,ki_bar`).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Autocorrelation of a KI series with white-noise confidence bounds.
    Acf {
        /// KI CSV (`cycle,ki_bar`).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_lag: usize,
        /// Significance level for the bounds.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Output CSV (`lag,acf,bound_lo,bound_hi`).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Calibrate 95% acceptance thresholds by parametric Monte Carlo.
    Thresholds {
        #[arg(long, value_parser = Family::from_str)]
        family: Family,
        /// Samples per replicate.
        #[arg(long, default_value_t = 1116)]
        n: usize,
        /// Replicate count.
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Truth model JSON; defaults to the built-in canonical parameters.
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
        /// Output thresholds JSON.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Fit a distribution family to a KI series and score it against
    /// calibrated thresholds.
    Fit {
        /// KI CSV (`cycle,ki_bar`).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_parser = Family::from_str)]
        family: Family,
        /// Thresholds JSON from `knock thresholds`.
        #[arg(long, value_name = "FILE")]
        thresholds: PathBuf,
        /// Seed for the EM restarts (mixture family).
        #[arg(long)]
        seed: Option<u64>,
        /// Report JSON; written to stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Also write the fitted model JSON.
        #[arg(long, value_name = "FILE")]
        model_out: Option<PathBuf>,
    },

    /// Run the Bayesian knock-state estimator over a recorded KI series.
    Classify {
        /// KI CSV (`cycle,ki_bar`).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// State-bank JSON.
        #[arg(long, value_name = "FILE")]
        bank: PathBuf,
        #[command(flatten)]
        controller: ControllerOpts,
        /// Output controller-trace CSV (`cycle,ki_bar,spark_btdc,delta_deg,p1..pK`).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Closed-loop run of the controller against a synthetic engine.
    Simulate {
        /// Engine-model JSON.
        #[arg(long, value_name = "FILE")]
        engine: PathBuf,
        /// State-bank JSON.
        #[arg(long, value_name = "FILE")]
        bank: PathBuf,
        #[arg(long, default_value_t = 2000)]
        cycles: u64,
        /// Overrides the engine file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        controller: ControllerOpts,
        /// Output trajectory CSV (`cycle,ki_bar,spark_btdc,delta_deg,p1..pK`).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Emit plot-ready CSV series (no rendering).
    Plotdata {
        #[command(subcommand)]
        kind: PlotKind,
    },
}

#[derive(Args)]
pub struct ControllerOpts {
    /// Measurement-window capacity (cycles). Short windows track spark
    /// motion; long ones lag it and oscillate.
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Forgetting factor blending the posterior into the next prior.
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    /// Initial spark in degBTDC; defaults relative to the bank's middle
    /// anchor (at it for classify, 10 degCA retarded for simulate).
    #[arg(long)]
    spark0: Option<f64>,
    /// Actuator limits in degBTDC as `min:max`.
    #[arg(long, value_parser = parse_span, default_value = "0:40")]
    limits: Span,
}

impl ControllerOpts {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spark0(&self) -> Option<f64> {
        self.spark0
    }

    pub fn limits(&self) -> knock_core::SparkLimits {
        knock_core::SparkLimits {
            min_btdc: self.limits.a,
            max_btdc: self.limits.b,
        }
    }
}

#[derive(Subcommand)]
pub enum PlotKind {
    /// Mean KI versus spark with 5th/95th percentile bars.
    KiVsSpark {
        /// Engine-model JSON.
        #[arg(long, value_name = "FILE")]
        engine: PathBuf,
        /// Spark grid in degBTDC as `lo:hi:step`.
        #[arg(long, value_parser = parse_grid, default_value = "10:22:0.5")]
        sparks: Grid,
        /// Draws per grid point.
        #[arg(long, default_value_t = 1116)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// ACF series with confidence bounds (same layout as `knock acf`).
    Acf {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_lag: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Empirical CDF overlaid with a model CDF.
    Ecdf {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Model JSON (e.g. from `knock fit --model-out`).
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Per-dataset fit scores against a threshold line.
    Scores {
        /// One or more KI CSVs.
        #[arg(long = "in", value_name = "FILE", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = Family::from_str)]
        family: Family,
        #[arg(long, value_name = "FILE")]
        thresholds: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Per-state log-KI densities of a bank.
    States {
        #[arg(long, value_name = "FILE")]
        bank: PathBuf,
        /// Grid resolution.
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Span {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

fn parse_band(s: &str) -> Result<Band, String> {
    let (low, high) = split2(s)?;
    Ok(Band { low, high })
}

fn parse_span(s: &str) -> Result<Span, String> {
    let (a, b) = split2(s)?;
    Ok(Span { a, b })
}

fn split2(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
    Ok((
        a.parse().map_err(|_| format!("bad number `{a}`"))?,
        b.parse().map_err(|_| format!("bad number `{b}`"))?,
    ))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected `lo:hi:step`, got `{s}`"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| format!("bad number `{p}`")))
        .collect::<Result<_, _>>()?;
    if nums[2].is_nan() || nums[2] <= 0.0 {
        return Err("step must be positive".into());
    }
    if nums[1] < nums[0] {
        return Err("hi must not be below lo".into());
    }
    Ok(Grid {
        lo: nums[0],
        hi: nums[1],
        step: nums[2],
    })
}
