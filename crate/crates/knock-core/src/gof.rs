//! Goodness-of-fit machinery: empirical CDFs, autocorrelation-based
//! independence checks, R²/KS fit scoring, and Monte Carlo calibration of
//! 95%-confidence acceptance thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distfit::{lognormal_mle, mixture_em, EMConfig, Family, Model};
use crate::error::{Error, Result};
use crate::seed;
use crate::trace::KIDataset;

/// Re-draw limit for replicates whose fit collapses during calibration.
const MAX_REDRAWS_PER_REPLICATE: usize = 32;

/// Step-function empirical CDF.
///
/// Points are sorted and unique; tied samples collapse into one point
/// carrying the highest applicable cumulative step `i/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<f64>,
    steps: Vec<f64>,
}

/// Build the empirical CDF of a dataset.
pub fn empirical_cdf(data: &KIDataset) -> Result<EmpiricalCdf> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empirical CDF of an empty dataset".into()));
    }
    let n = data.len() as f64;
    let mut sorted = data.ki().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let mut steps = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let step = (i + 1) as f64 / n;
        if points.last() == Some(&x) {
            *steps.last_mut().expect("parallel to points") = step;
        } else {
            points.push(x);
            steps.push(step);
        }
    }
    Ok(EmpiricalCdf { points, steps })
}

impl EmpiricalCdf {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Step-function value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.points.partition_point(|&p| p <= x) {
            0 => 0.0,
            i => self.steps[i - 1],
        }
    }
}

/// Lag-k autocorrelation sequence for k = 0..=max_lag.
///
/// Uses the full-sample mean in both the numerator and the denominator, so
/// `r_0` is exactly 1 and every `|r_k| <= 1`.
pub fn acf(data: &KIDataset, max_lag: usize) -> Result<Vec<f64>> {
    let xs = data.ki();
    let n = xs.len();
    if n < max_lag + 2 {
        return Err(Error::InsufficientData(format!(
            "autocorrelation to lag {max_lag} needs at least {} samples, got {n}",
            max_lag + 2
        )));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let denom: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    if denom == 0.0 {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let num: f64 = (0..n - k).map(|i| (xs[i] - mean) * (xs[i + k] - mean)).sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Two-sided white-noise confidence bound for the ACF at significance
/// `alpha`: `z_{1-alpha/2} / sqrt(n)`.
pub fn acf_bounds(n: usize, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InsufficientData(format!("need n >= 2, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    Ok(z / (n as f64).sqrt())
}

/// Fit quality of a model CDF against an empirical CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitScores {
    pub r2: f64,
    pub ks: f64,
}

/// Coefficient of determination between the empirical steps and the model
/// CDF evaluated at the sample points. May be negative for very poor fits.
pub fn r_squared(ecdf: &EmpiricalCdf, model_cdf: impl Fn(f64) -> f64) -> f64 {
    let ys = ecdf.steps();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for (&x, &y) in ecdf.points().iter().zip(ys) {
        let f = model_cdf(x);
        ss_tot += (y - mean) * (y - mean);
        ss_res += (y - f) * (y - f);
    }
    if ss_tot == 0.0 {
        // single distinct point: perfect or unboundedly poor
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    (ss_tot - ss_res) / ss_tot
}

/// Kolmogorov–Smirnov distance: the exact supremum of |ECDF - model CDF|,
/// checking both sides of every step.
pub fn ks_distance(ecdf: &EmpiricalCdf, model_cdf: impl Fn(f64) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut best = 0.0f64;
    for (&x, &s) in ecdf.points().iter().zip(ecdf.steps()) {
        let f = model_cdf(x);
        best = best.max((s - f).abs()).max((prev - f).abs());
        prev = s;
    }
    best
}

/// Calibrated 95% acceptance cutoffs for one family and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub family: Family,
    /// Samples per replicate.
    pub n: usize,
    /// Replicate count.
    pub reps: usize,
    /// 5th percentile of R² across replicates; fits below it are rejected.
    pub r2_5th: f64,
    /// 95th percentile of KS distance; fits above it are rejected.
    pub ks_95th: f64,
    pub seed: u64,
}

/// Threshold calibration output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub thresholds: Thresholds,
    /// Replicates that had to be re-drawn because the fit collapsed.
    pub degenerate_redraws: usize,
}

/// Default truth parameters for lognormal threshold calibration.
///
/// The joint distribution of (R², KS) under a lognormal MLE fit of lognormal
/// data does not depend on (mu, sigma), so the standard parameters serve as
/// the canonical choice.
pub fn canonical_lognormal() -> crate::distfit::LognormalParams {
    crate::distfit::LognormalParams::new(0.0, 1.0).unwrap()
}

/// Default truth parameters for mixture threshold calibration: a balanced
/// two-component split with the component gap at three standard deviations,
/// typical of a knocking/non-knocking cycle split.
pub fn canonical_mixture() -> crate::distfit::MixtureParams {
    crate::distfit::MixtureParams::new(
        0.5,
        crate::distfit::LognormalParams::new(-0.75, 0.5).unwrap(),
        crate::distfit::LognormalParams::new(0.75, 0.5).unwrap(),
    )
    .unwrap()
}

/// Calibrate acceptance thresholds by parametric Monte Carlo.
///
/// Each replicate draws `n` points from `truth`, fits the same family
/// (MLE or EM), and scores the fit; the thresholds are the 5th percentile of
/// R² and the 95th percentile of KS across replicates (nearest-rank).
/// Replicates run in parallel with per-index derived seeds, so the result is
/// identical for any thread count. Replicates whose fit collapses are
/// re-drawn with a further derived seed and counted.
pub fn mc_thresholds(
    truth: &Model,
    n: usize,
    reps: usize,
    seed: u64,
    em: &EMConfig,
) -> Result<Calibration> {
    if reps < 1 {
        return Err(Error::Precondition("need at least 1 replicate".into()));
    }
    if n < 10 {
        return Err(Error::Precondition(format!(
            "need at least 10 samples per replicate, got {n}"
        )));
    }

    let scored: Result<Vec<(f64, f64, usize)>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = seed::derive(seed, rep);
            let mut redraws = 0usize;
            loop {
                let draw_seed = if redraws == 0 {
                    rep_seed
                } else {
                    seed::derive(rep_seed, redraws as u64)
                };
                let data = truth.sample(n, draw_seed)?;
                let fitted = match truth.family() {
                    Family::Lognormal => lognormal_mle(&data).map(Model::Lognormal),
                    Family::Mixture => {
                        let cfg = EMConfig {
                            seed: seed::derive(draw_seed, u64::MAX),
                            ..*em
                        };
                        mixture_em(&data, &cfg).map(|fit| Model::Mixture(fit.params))
                    }
                };
                match fitted {
                    Ok(model) => {
                        let ecdf = empirical_cdf(&data)?;
                        let r2 = r_squared(&ecdf, |x| model.cdf(x));
                        let ks = ks_distance(&ecdf, |x| model.cdf(x));
                        return Ok((r2, ks, redraws));
                    }
                    Err(Error::Degenerate(_)) if redraws < MAX_REDRAWS_PER_REPLICATE => {
                        redraws += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let scored = scored?;

    let degenerate_redraws = scored.iter().map(|(_, _, r)| r).sum();
    let mut r2s: Vec<f64> = scored.iter().map(|(r2, _, _)| *r2).collect();
    let mut kss: Vec<f64> = scored.iter().map(|(_, ks, _)| *ks).collect();
    r2s.sort_by(f64::total_cmp);
    kss.sort_by(f64::total_cmp);

    Ok(Calibration {
        thresholds: Thresholds {
            family: truth.family(),
            n,
            reps,
            r2_5th: nearest_rank(&r2s, 5.0),
            ks_95th: nearest_rank(&kss, 95.0),
            seed,
        },
        degenerate_redraws,
    })
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn nearest_rank(sorted: &[f64], percentile: f64) -> f64 {
    let n = sorted.len();
    let rank = ((percentile / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// A fitted model, its scores, and the accept/reject verdict per metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub label: String,
    pub n: usize,
    pub family: Family,
    pub model: Model,
    pub scores: FitScores,
    /// R² at or above the calibrated 5th percentile.
    pub r2_pass: bool,
    /// KS at or below the calibrated 95th percentile.
    pub ks_pass: bool,
    /// Both metrics pass.
    pub accept: bool,
}

/// Fit `family` to the data and score it against calibrated thresholds.
pub fn fit_report(
    data: &KIDataset,
    family: Family,
    thresholds: &Thresholds,
    em: &EMConfig,
) -> Result<FitReport> {
    if thresholds.family != family {
        return Err(Error::Precondition(format!(
            "thresholds were calibrated for the {} family, not {family}",
            thresholds.family
        )));
    }
    let model = match family {
        Family::Lognormal => Model::Lognormal(lognormal_mle(data)?),
        Family::Mixture => Model::Mixture(mixture_em(data, em)?.params),
    };
    let ecdf = empirical_cdf(data)?;
    let scores = FitScores {
        r2: r_squared(&ecdf, |x| model.cdf(x)),
        ks: ks_distance(&ecdf, |x| model.cdf(x)),
    };
    let r2_pass = scores.r2 >= thresholds.r2_5th;
    let ks_pass = scores.ks <= thresholds.ks_95th;
    Ok(FitReport {
        label: data.label.clone(),
        n: data.len(),
        family,
        model,
        scores,
        r2_pass,
        ks_pass,
        accept: r2_pass && ks_pass,
    })
}
