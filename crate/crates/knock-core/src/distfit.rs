//! Lognormal and two-component mixed-lognormal models.
//!
//! Provides density/CDF evaluation, the closed-form lognormal maximum
//! likelihood estimator, EM estimation of the mixture (run on the log of the
//! data, where the mixture is an ordinary two-component Gaussian mixture),
//! and seeded, reproducible sampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::seed;
use crate::trace::KIDataset;

const LN_2PI: f64 = 1.8378770664093453;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Weight bound below/above which an EM run counts as collapsed.
const EM_WEIGHT_COLLAPSE: f64 = 1e-6;

/// Parameters of a lognormal distribution: mean and standard deviation of
/// the variable's natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    mu: f64,
    sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density at `x`; zero outside the support `(0, inf)`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.ln_pdf(x).exp()
        }
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let y = x.ln();
        let z = (y - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - 0.5 * LN_2PI - y
    }

    /// Cumulative probability at `x`; zero at and below the support boundary.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            0.5 + 0.5 * erf((x.ln() - self.mu) / (self.sigma * SQRT_2))
        }
    }
}

/// Two-component lognormal mixture. `a` is the weight of the first
/// component; components are kept in canonical order `comp1.mu <= comp2.mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    a: f64,
    comp1: LognormalParams,
    comp2: LognormalParams,
}

impl MixtureParams {
    pub fn new(a: f64, comp1: LognormalParams, comp2: LognormalParams) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Domain(format!("mixture weight must lie in (0, 1), got {a}")));
        }
        if comp1.mu() <= comp2.mu() {
            Ok(Self { a, comp1, comp2 })
        } else {
            Ok(Self {
                a: 1.0 - a,
                comp1: comp2,
                comp2: comp1,
            })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn comp1(&self) -> LognormalParams {
        self.comp1
    }

    pub fn comp2(&self) -> LognormalParams {
        self.comp2
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.a * self.comp1.pdf(x) + (1.0 - self.a) * self.comp2.pdf(x)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let l1 = self.a.ln() + self.comp1.ln_pdf(x);
        let l2 = (1.0 - self.a).ln() + self.comp2.ln_pdf(x);
        log_sum_exp2(l1, l2)
    }

    /// Mixture CDF: the weighted sum of the component CDFs.
    pub fn cdf(&self, x: f64) -> f64 {
        self.a * self.comp1.cdf(x) + (1.0 - self.a) * self.comp2.cdf(x)
    }

    /// Mean of the variable's natural logarithm under the mixture.
    pub fn log_space_mean(&self) -> f64 {
        self.a * self.comp1.mu() + (1.0 - self.a) * self.comp2.mu()
    }

    /// Density of `ln X` (a two-component Gaussian mixture density).
    pub fn log_space_pdf(&self, y: f64) -> f64 {
        let g = |m: f64, s: f64| (-0.5 * ((y - m) / s) * ((y - m) / s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        self.a * g(self.comp1.mu(), self.comp1.sigma())
            + (1.0 - self.a) * g(self.comp2.mu(), self.comp2.sigma())
    }
}

/// Distribution family identifier used in files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lognormal,
    Mixture,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lognormal => write!(f, "lognormal"),
            Family::Mixture => write!(f, "mixture"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lognormal" => Ok(Family::Lognormal),
            "mixture" => Ok(Family::Mixture),
            other => Err(Error::Format(format!(
                "unknown family `{other}` (expected `lognormal` or `mixture`)"
            ))),
        }
    }
}

/// A fitted or specified distribution of either family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub enum Model {
    Lognormal(LognormalParams),
    Mixture(MixtureParams),
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Lognormal(_) => Family::Lognormal,
            Model::Mixture(_) => Family::Mixture,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Model::Lognormal(p) => p.pdf(x),
            Model::Mixture(p) => p.pdf(x),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Model::Lognormal(p) => p.ln_pdf(x),
            Model::Mixture(p) => p.ln_pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Model::Lognormal(p) => p.cdf(x),
            Model::Mixture(p) => p.cdf(x),
        }
    }

    /// Draw `n` samples; see [`sample_lognormal`] and [`sample_mixture`].
    pub fn sample(&self, n: usize, seed: u64) -> Result<KIDataset> {
        match self {
            Model::Lognormal(p) => sample_lognormal(p, n, seed),
            Model::Mixture(p) => sample_mixture(p, n, seed),
        }
    }
}

/// Flat on-disk model layout: `{"family": ..., "a": ..., "mu1": ..., ...}`.
/// The lognormal family carries only `mu1`/`sigma1`.
#[derive(Serialize, Deserialize)]
struct ModelRepr {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    mu1: f64,
    sigma1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
}

impl TryFrom<ModelRepr> for Model {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        match r.family {
            Family::Lognormal => Ok(Model::Lognormal(LognormalParams::new(r.mu1, r.sigma1)?)),
            Family::Mixture => {
                let (a, mu2, sigma2) = match (r.a, r.mu2, r.sigma2) {
                    (Some(a), Some(m), Some(s)) => (a, m, s),
                    _ => {
                        return Err(Error::Format(
                            "mixture model requires `a`, `mu2` and `sigma2`".into(),
                        ))
                    }
                };
                Ok(Model::Mixture(MixtureParams::new(
                    a,
                    LognormalParams::new(r.mu1, r.sigma1)?,
                    LognormalParams::new(mu2, sigma2)?,
                )?))
            }
        }
    }
}

impl From<Model> for ModelRepr {
    fn from(m: Model) -> Self {
        match m {
            Model::Lognormal(p) => ModelRepr {
                family: Family::Lognormal,
                a: None,
                mu1: p.mu(),
                sigma1: p.sigma(),
                mu2: None,
                sigma2: None,
            },
            Model::Mixture(p) => ModelRepr {
                family: Family::Mixture,
                a: Some(p.a()),
                mu1: p.comp1().mu(),
                sigma1: p.comp1().sigma(),
                mu2: Some(p.comp2().mu()),
                sigma2: Some(p.comp2().sigma()),
            },
        }
    }
}

/// Lognormal density at `x`.
pub fn lognormal_pdf(x: f64, p: &LognormalParams) -> Result<f64> {
    check_support(x)?;
    Ok(p.pdf(x))
}

/// Lognormal CDF at `x`.
pub fn lognormal_cdf(x: f64, p: &LognormalParams) -> Result<f64> {
    check_support(x)?;
    Ok(p.cdf(x))
}

/// Mixture density at `x`.
pub fn mixture_pdf(x: f64, p: &MixtureParams) -> Result<f64> {
    check_support(x)?;
    Ok(p.pdf(x))
}

/// Mixture CDF at `x`.
pub fn mixture_cdf(x: f64, p: &MixtureParams) -> Result<f64> {
    check_support(x)?;
    Ok(p.cdf(x))
}

fn check_support(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must be in (0, inf), got {x}")))
    }
}

/// Closed-form lognormal maximum likelihood fit: the sample mean and
/// population (divide-by-N) variance of the log data.
pub fn lognormal_mle(data: &KIDataset) -> Result<LognormalParams> {
    let xs = data.ki();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "lognormal fit needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(Error::Degenerate(
            "all samples identical; log variance is zero".into(),
        ));
    }
    LognormalParams::new(mu, var.sqrt())
}

/// Log-likelihood of the data under a model, accumulated in log space.
pub fn log_likelihood(data: &KIDataset, model: &Model) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    let mut ll = 0.0;
    for &x in data.ki() {
        check_support(x)?;
        ll += model.ln_pdf(x);
    }
    Ok(ll)
}

/// Draw `n` lognormal samples: `exp(mu + sigma*z)` with standard-normal `z`.
pub fn sample_lognormal(p: &LognormalParams, n: usize, seed: u64) -> Result<KIDataset> {
    if n == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let ki = (0..n).map(|_| draw_lognormal(&mut rng, p)).collect();
    KIDataset::from_values(format!("lognormal-sample(seed={seed})"), ki)
}

/// Draw `n` mixture samples: a Bernoulli(`a`) component pick followed by a
/// lognormal draw. The same seed reproduces the same sequence exactly.
pub fn sample_mixture(p: &MixtureParams, n: usize, seed: u64) -> Result<KIDataset> {
    if n == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let ki = (0..n).map(|_| draw_mixture(&mut rng, p)).collect();
    KIDataset::from_values(format!("mixture-sample(seed={seed})"), ki)
}

pub(crate) fn draw_lognormal(rng: &mut ChaCha8Rng, p: &LognormalParams) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (p.mu() + p.sigma() * z).exp().max(f64::MIN_POSITIVE)
}

pub(crate) fn draw_mixture(rng: &mut ChaCha8Rng, p: &MixtureParams) -> f64 {
    let u: f64 = rng.random();
    let comp = if u < p.a() { p.comp1() } else { p.comp2() };
    draw_lognormal(rng, &comp)
}

/// EM settings for the mixture fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    /// Lower bound on each component's log-space variance.
    pub variance_floor: f64,
    pub seed: u64,
}

impl Default for EMConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-8,
            restarts: 5,
            variance_floor: 1e-6,
            seed: 0,
        }
    }
}

impl EMConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Precondition("max_iters must be at least 1".into()));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::Precondition("rel_tol must be positive".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Precondition("restarts must be at least 1".into()));
        }
        if self.variance_floor.is_nan() || self.variance_floor <= 0.0 {
            return Err(Error::Precondition("variance_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Result of an EM mixture fit.
#[derive(Debug, Clone)]
pub struct EmFit {
    pub params: MixtureParams,
    /// Log-likelihood of the returned parameters on the data.
    pub log_likelihood: f64,
    /// E-step count of the winning restart.
    pub iterations: usize,
    /// Per-restart log-likelihood sequences, one entry per E step.
    pub histories: Vec<Vec<f64>>,
    pub best_restart: usize,
}

/// Fit the two-component mixture by EM on the log of the data.
///
/// Runs `cfg.restarts` deterministic restarts (median-split initialization,
/// then seeded perturbations of it) and returns the best non-collapsed run,
/// with components relabeled into canonical order.
pub fn mixture_em(data: &KIDataset, cfg: &EMConfig) -> Result<EmFit> {
    cfg.validate()?;
    let xs = data.ki();
    if xs.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "mixture fit needs at least 10 samples, got {}",
            xs.len()
        )));
    }
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    // Constant offset between the Gaussian log-likelihood of ln(x) and the
    // mixture log-likelihood of x (the change-of-variables Jacobian).
    let jacobian: f64 = logs.iter().sum();

    let mut histories = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, GaussMix, f64, usize)> = None;
    for r in 0..cfg.restarts {
        let init = initialize(&logs, r, cfg);
        let run = em_single(&logs, init, cfg, jacobian);
        let iterations = run.history.len();
        let final_ll = *run.history.last().expect("at least one E step");
        histories.push(run.history);
        if run.collapsed || !final_ll.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, _, ll, _)| final_ll > *ll) {
            best = Some((r, run.params, final_ll, iterations));
        }
    }

    let (best_restart, g, log_likelihood, iterations) = best.ok_or_else(|| {
        Error::Degenerate(format!(
            "all {} EM restarts collapsed onto one component",
            cfg.restarts
        ))
    })?;
    let params = MixtureParams::new(
        g.w,
        LognormalParams::new(g.m1, g.s1)?,
        LognormalParams::new(g.m2, g.s2)?,
    )?;
    Ok(EmFit {
        params,
        log_likelihood,
        iterations,
        histories,
        best_restart,
    })
}

#[derive(Debug, Clone, Copy)]
struct GaussMix {
    w: f64,
    m1: f64,
    s1: f64,
    m2: f64,
    s2: f64,
}

struct EmRun {
    params: GaussMix,
    history: Vec<f64>,
    collapsed: bool,
}

/// Median-split initialization; restarts beyond the first perturb it with
/// seeded noise.
fn initialize(logs: &[f64], restart: usize, cfg: &EMConfig) -> GaussMix {
    let mut sorted = logs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let half = sorted.len() / 2;
    let (lo, hi) = sorted.split_at(half);
    let floor = cfg.variance_floor.sqrt();
    let moments = |s: &[f64]| -> (f64, f64) {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let v = s.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / n;
        (m, v.sqrt().max(floor))
    };
    let (m1, s1) = moments(lo);
    let (m2, s2) = moments(hi);
    let mut g = GaussMix {
        w: 0.5,
        m1,
        s1,
        m2,
        s2,
    };
    if restart > 0 {
        let mut rng = seed::rng(seed::derive(cfg.seed, restart as u64));
        let mut z = || -> f64 { rng.sample(StandardNormal) };
        g.m1 += 0.5 * g.s1 * z();
        g.m2 += 0.5 * g.s2 * z();
        g.s1 = (g.s1 * (0.25 * z()).exp()).max(floor);
        g.s2 = (g.s2 * (0.25 * z()).exp()).max(floor);
    }
    g
}

fn em_single(logs: &[f64], mut g: GaussMix, cfg: &EMConfig, jacobian: f64) -> EmRun {
    let n = logs.len() as f64;
    let floor = cfg.variance_floor;
    let mut history = Vec::new();
    let mut prev_ll = f64::NEG_INFINITY;
    let mut resp = vec![0.0; logs.len()];

    for _ in 0..cfg.max_iters {
        // E step: responsibilities and the current log-likelihood
        let (lw1, lw2) = (g.w.ln(), (1.0 - g.w).ln());
        let mut ll = 0.0;
        for (i, &y) in logs.iter().enumerate() {
            let l1 = lw1 + gaussian_ln_pdf(y, g.m1, g.s1);
            let l2 = lw2 + gaussian_ln_pdf(y, g.m2, g.s2);
            let li = log_sum_exp2(l1, l2);
            resp[i] = (l1 - li).exp();
            ll += li;
        }
        let ll = ll - jacobian;
        history.push(ll);
        if !ll.is_finite() {
            break;
        }
        if prev_ll.is_finite()
            && (ll - prev_ll).abs() <= cfg.rel_tol * prev_ll.abs().max(f64::MIN_POSITIVE)
        {
            break;
        }
        prev_ll = ll;

        // M step
        let r1: f64 = resp.iter().sum();
        let r2 = n - r1;
        if r1 <= 0.0 || r2 <= 0.0 {
            g.w = r1 / n;
            break;
        }
        let m1 = logs.iter().zip(&resp).map(|(y, r)| r * y).sum::<f64>() / r1;
        let m2 = logs.iter().zip(&resp).map(|(y, r)| (1.0 - r) * y).sum::<f64>() / r2;
        let v1 = logs
            .iter()
            .zip(&resp)
            .map(|(y, r)| r * (y - m1) * (y - m1))
            .sum::<f64>()
            / r1;
        let v2 = logs
            .iter()
            .zip(&resp)
            .map(|(y, r)| (1.0 - r) * (y - m2) * (y - m2))
            .sum::<f64>()
            / r2;
        g = GaussMix {
            w: r1 / n,
            m1,
            s1: v1.max(floor).sqrt(),
            m2,
            s2: v2.max(floor).sqrt(),
        };
    }

    let collapsed = !(g.w > EM_WEIGHT_COLLAPSE && g.w < 1.0 - EM_WEIGHT_COLLAPSE)
        || !g.m1.is_finite()
        || !g.m2.is_finite();
    EmRun {
        params: g,
        history,
        collapsed,
    }
}

fn gaussian_ln_pdf(y: f64, m: f64, s: f64) -> f64 {
    let z = (y - m) / s;
    -0.5 * z * z - s.ln() - 0.5 * LN_2PI
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}
