//! Engine-knock statistics toolkit.
//!
//! This crate extracts per-cycle knock-intensity (KI) values from cylinder
//! pressure traces, characterizes KI as a lognormal or two-component
//! mixed-lognormal random variable with Monte Carlo calibrated
//! goodness-of-fit acceptance, and closes the loop with a Bayesian
//! spark-advance controller running against a synthetic engine.
//!
//! Modules:
//! - [`trace`]: pressure-trace ingestion, band-pass KI extraction
//! - [`filter`]: zero-phase FIR band-pass design
//! - [`distfit`]: lognormal / mixture models, MLE, EM, sampling
//! - [`gof`]: empirical CDFs, ACF independence checks, R²/KS scoring,
//!   threshold calibration
//! - [`knockctl`]: Bayesian knock-state estimation and spark control
//! - [`simloop`]: synthetic engine and closed-loop harness
//!
//! All randomness is seeded and per-work-item derived ([`seed`]), so every
//! result is reproducible across runs and thread counts.

pub mod distfit;
pub mod error;
pub mod filter;
pub mod gof;
pub mod knockctl;
pub mod seed;
pub mod simloop;
pub mod trace;

pub use distfit::{
    log_likelihood, lognormal_cdf, lognormal_mle, lognormal_pdf, mixture_cdf, mixture_em,
    mixture_pdf, sample_lognormal, sample_mixture, EMConfig, EmFit, Family, LognormalParams,
    Model, MixtureParams,
};
pub use error::{Error, Result};
pub use filter::{bandpass_filter, design_bandpass, BandpassFilter, FilterSpec};
pub use gof::{
    acf, acf_bounds, canonical_lognormal, canonical_mixture, empirical_cdf, fit_report,
    ks_distance, mc_thresholds, r_squared, Calibration, EmpiricalCdf, FitReport, FitScores,
    Thresholds,
};
pub use knockctl::{
    controller_step, default_action_weights, posterior_update, spark_delta, state_likelihoods,
    BankState, ControllerState, CycleRecord, Posterior, SparkLimits, StateBank, StepOutcome,
};
pub use simloop::{
    demo_bank, demo_engine, engine_response, run_closed_loop, simulate_cycle, trajectory_summary,
    EngineAnchor, EngineModel, Trajectory, TrajectorySummary,
};
pub use trace::{
    extract_ki, extract_ki_series, load_ki_dataset, load_traces, parse_traces_csv, read_ki_csv,
    resample_to_time, write_ki_csv, KIDataset, KnockWindow, PressureTrace, TimeSeries,
    TraceFormat, KI_FLOOR,
};
