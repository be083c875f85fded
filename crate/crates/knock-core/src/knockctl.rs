//! Bayesian knock-state estimation and spark-advance control.
//!
//! A bank of per-state mixture models describes how KI is distributed at
//! each discrete knock level, ordered least to most severe. Observed KI
//! windows update a probability vector over the states by Bayes' rule
//! (likelihoods accumulated in log space), and the spark command is the
//! probability-weighted sum of per-state action deltas.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distfit::{LognormalParams, MixtureParams};
use crate::error::{Error, Result};

/// Tolerance on posterior normalization.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// One knock state: a label, its KI distribution, and the spark timing at
/// which that distribution is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct BankState {
    pub label: String,
    pub model: MixtureParams,
    pub spark_anchor_btdc: f64,
}

/// Ordered bank of knock states (least severe first) with per-state spark
/// deltas (positive = advance).
///
/// Anchors must be strictly advancing along the sequence: more severe knock
/// is observed at earlier spark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BankEntry>", into = "Vec<BankEntry>")]
pub struct StateBank {
    states: Vec<BankState>,
    action_weights: Vec<f64>,
}

impl StateBank {
    pub fn new(states: Vec<BankState>, action_weights: Vec<f64>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::Precondition(format!(
                "state bank needs at least 2 states, got {}",
                states.len()
            )));
        }
        if action_weights.len() != states.len() {
            return Err(Error::Precondition(format!(
                "{} states but {} action weights",
                states.len(),
                action_weights.len()
            )));
        }
        let mut labels = std::collections::HashSet::new();
        for s in &states {
            if !labels.insert(s.label.as_str()) {
                return Err(Error::Format(format!("duplicate state label `{}`", s.label)));
            }
            if !s.spark_anchor_btdc.is_finite() {
                return Err(Error::Format(format!("state `{}` has non-finite anchor", s.label)));
            }
        }
        for w in states.windows(2) {
            if w[1].spark_anchor_btdc <= w[0].spark_anchor_btdc {
                return Err(Error::Format(format!(
                    "spark anchors must advance with severity: `{}` at {} degBTDC follows `{}` at {}",
                    w[1].label, w[1].spark_anchor_btdc, w[0].label, w[0].spark_anchor_btdc
                )));
            }
        }
        if action_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Format("non-finite action weight".into()));
        }
        Ok(Self {
            states,
            action_weights,
        })
    }

    pub fn states(&self) -> &[BankState] {
        &self.states
    }

    pub fn action_weights(&self) -> &[f64] {
        &self.action_weights
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Default spark deltas: +2 °CA at the least severe state, linearly down to
/// −2 °CA at the most severe.
pub fn default_action_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least two states");
    (0..n)
        .map(|i| 2.0 - 4.0 * i as f64 / (n - 1) as f64)
        .collect()
}

/// Flat bank-file entry.
#[derive(Serialize, Deserialize)]
struct BankEntry {
    label: String,
    a: f64,
    mu1: f64,
    sigma1: f64,
    mu2: f64,
    sigma2: f64,
    spark_anchor_btdc: f64,
    weight_deg: f64,
}

impl TryFrom<Vec<BankEntry>> for StateBank {
    type Error = Error;

    fn try_from(entries: Vec<BankEntry>) -> Result<Self> {
        let mut states = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        for e in entries {
            states.push(BankState {
                label: e.label,
                model: MixtureParams::new(
                    e.a,
                    LognormalParams::new(e.mu1, e.sigma1)?,
                    LognormalParams::new(e.mu2, e.sigma2)?,
                )?,
                spark_anchor_btdc: e.spark_anchor_btdc,
            });
            weights.push(e.weight_deg);
        }
        StateBank::new(states, weights)
    }
}

impl From<StateBank> for Vec<BankEntry> {
    fn from(bank: StateBank) -> Self {
        bank.states
            .iter()
            .zip(&bank.action_weights)
            .map(|(s, &w)| BankEntry {
                label: s.label.clone(),
                a: s.model.a(),
                mu1: s.model.comp1().mu(),
                sigma1: s.model.comp1().sigma(),
                mu2: s.model.comp2().mu(),
                sigma2: s.model.comp2().sigma(),
                spark_anchor_btdc: s.spark_anchor_btdc,
                weight_deg: w,
            })
            .collect()
    }
}

/// Probability vector over knock states.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior(Vec<f64>);

impl Posterior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Precondition("empty probability vector".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Domain(format!(
                "probabilities sum to {sum}, not 1 within {SIMPLEX_TOL}"
            )));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "need at least one state");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-state log-likelihood of a KI window: the independence product
/// `sum_t ln f(ki_t | state)` accumulated in log space.
pub fn state_likelihoods(bank: &StateBank, window: &[f64]) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(Error::Precondition("empty measurement window".into()));
    }
    for &ki in window {
        if !(ki > 0.0 && ki.is_finite()) {
            return Err(Error::Domain(format!("KI must be strictly positive, got {ki}")));
        }
    }
    Ok(bank
        .states()
        .iter()
        .map(|s| window.iter().map(|&ki| s.model.ln_pdf(ki)).sum())
        .collect())
}

/// Posterior update outcome; `underflow_fallback` flags the (numerically
/// pathological) case where all posterior mass vanished and the prior was
/// returned unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorUpdate {
    pub posterior: Posterior,
    pub underflow_fallback: bool,
}

/// Bayes update of the prior from per-state log-likelihoods, computed with a
/// max-shifted exponential sum so widely scaled likelihoods cannot
/// underflow.
pub fn posterior_from_log_likelihoods(prior: &Posterior, ln_likelihoods: &[f64]) -> Result<PosteriorUpdate> {
    if ln_likelihoods.len() != prior.len() {
        return Err(Error::Precondition(format!(
            "{} likelihoods for {} states",
            ln_likelihoods.len(),
            prior.len()
        )));
    }
    let ln_joint: Vec<f64> = prior
        .probs()
        .iter()
        .zip(ln_likelihoods)
        .map(|(&p, &ll)| p.ln() + ll)
        .collect();
    let max = ln_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // all joint mass is numerically zero; a controller must still act
        return Ok(PosteriorUpdate {
            posterior: prior.clone(),
            underflow_fallback: true,
        });
    }
    let weights: Vec<f64> = ln_joint.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let posterior = Posterior::new(weights.iter().map(|w| w / sum).collect())?;
    Ok(PosteriorUpdate {
        posterior,
        underflow_fallback: false,
    })
}

/// Posterior over knock states given a KI measurement window.
pub fn posterior_update(bank: &StateBank, prior: &Posterior, window: &[f64]) -> Result<PosteriorUpdate> {
    let ln_likelihoods = state_likelihoods(bank, window)?;
    posterior_from_log_likelihoods(prior, &ln_likelihoods)
}

/// Probability-weighted spark delta in °CA (positive = advance).
pub fn spark_delta(posterior: &Posterior, bank: &StateBank) -> Result<f64> {
    if posterior.len() != bank.len() {
        return Err(Error::Precondition(format!(
            "posterior over {} states against a bank of {}",
            posterior.len(),
            bank.len()
        )));
    }
    Ok(posterior
        .probs()
        .iter()
        .zip(bank.action_weights())
        .map(|(p, w)| p * w)
        .sum())
}

/// Actuator limits on spark timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparkLimits {
    pub min_btdc: f64,
    pub max_btdc: f64,
}

impl Default for SparkLimits {
    fn default() -> Self {
        Self {
            min_btdc: 0.0,
            max_btdc: 40.0,
        }
    }
}

/// Mutable controller state: current spark, carried prior, and the ring of
/// recent KI measurements.
#[derive(Debug, Clone)]
pub struct ControllerState {
    spark_btdc: f64,
    prior: Posterior,
    window: VecDeque<f64>,
    window_capacity: usize,
    limits: SparkLimits,
    forgetting: f64,
}

impl ControllerState {
    /// Start at `spark_btdc` with a uniform prior over `n_states` and an
    /// empty measurement window of the given capacity.
    pub fn new(
        spark_btdc: f64,
        n_states: usize,
        window_capacity: usize,
        limits: SparkLimits,
        forgetting: f64,
    ) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::Precondition("need at least 2 states".into()));
        }
        if window_capacity < 1 {
            return Err(Error::Precondition("window capacity must be at least 1".into()));
        }
        if !(limits.min_btdc <= spark_btdc && spark_btdc <= limits.max_btdc) {
            return Err(Error::Range(format!(
                "spark {spark_btdc} degBTDC outside limits [{}, {}]",
                limits.min_btdc, limits.max_btdc
            )));
        }
        if !(0.0..=1.0).contains(&forgetting) {
            return Err(Error::Domain(format!(
                "forgetting factor must lie in [0, 1], got {forgetting}"
            )));
        }
        Ok(Self {
            spark_btdc,
            prior: Posterior::uniform(n_states),
            window: VecDeque::with_capacity(window_capacity),
            window_capacity,
            limits,
            forgetting,
        })
    }

    pub fn spark_btdc(&self) -> f64 {
        self.spark_btdc
    }

    pub fn prior(&self) -> &Posterior {
        &self.prior
    }

    pub fn window(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().copied()
    }

    pub fn limits(&self) -> SparkLimits {
        self.limits
    }
}

/// One controller step outcome.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Spark change actually applied after clamping to the limits.
    pub applied_delta: f64,
    pub posterior: Posterior,
    pub underflow_fallback: bool,
}

/// Advance the controller by one measured cycle: push the new KI into the
/// window, update the posterior from the carried prior, apply the weighted
/// (and clamped) spark delta, then blend the posterior back into the prior
/// with the forgetting factor.
pub fn controller_step(state: &mut ControllerState, bank: &StateBank, new_ki: f64) -> Result<StepOutcome> {
    if !(new_ki > 0.0 && new_ki.is_finite()) {
        return Err(Error::Domain(format!("KI must be strictly positive, got {new_ki}")));
    }
    if state.prior.len() != bank.len() {
        return Err(Error::Precondition(format!(
            "controller tracks {} states but the bank has {}",
            state.prior.len(),
            bank.len()
        )));
    }
    if state.window.len() == state.window_capacity {
        state.window.pop_front();
    }
    state.window.push_back(new_ki);
    let window: Vec<f64> = state.window.iter().copied().collect();
    let update = posterior_update(bank, &state.prior, &window)?;

    let delta = spark_delta(&update.posterior, bank)?;
    let target = (state.spark_btdc + delta).clamp(state.limits.min_btdc, state.limits.max_btdc);
    let applied = target - state.spark_btdc;
    state.spark_btdc = target;

    let lambda = state.forgetting;
    let uniform = 1.0 / bank.len() as f64;
    let mut blended: Vec<f64> = update
        .posterior
        .probs()
        .iter()
        .map(|&p| lambda * p + (1.0 - lambda) * uniform)
        .collect();
    let sum: f64 = blended.iter().sum();
    for b in &mut blended {
        *b /= sum;
    }
    state.prior = Posterior::new(blended)?;

    Ok(StepOutcome {
        applied_delta: applied,
        posterior: update.posterior,
        underflow_fallback: update.underflow_fallback,
    })
}

/// One row of a controller trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: u64,
    pub ki_bar: f64,
    /// Spark in effect while this cycle fired.
    pub spark_btdc: f64,
    /// Delta applied after observing this cycle.
    pub delta_deg: f64,
    pub posterior: Vec<f64>,
}

/// Write controller records as `cycle,ki_bar,spark_btdc,delta_deg,p1..pK`.
pub fn write_controller_csv(mut w: impl Write, records: &[CycleRecord]) -> Result<()> {
    let n_states = records.first().map_or(0, |r| r.posterior.len());
    write!(w, "cycle,ki_bar,spark_btdc,delta_deg")?;
    for i in 1..=n_states {
        write!(w, ",p{i}")?;
    }
    writeln!(w)?;
    for r in records {
        if r.posterior.len() != n_states {
            return Err(Error::Format(format!(
                "cycle {}: posterior over {} states, expected {n_states}",
                r.cycle,
                r.posterior.len()
            )));
        }
        write!(w, "{},{},{},{}", r.cycle, r.ki_bar, r.spark_btdc, r.delta_deg)?;
        for p in &r.posterior {
            write!(w, ",{p}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfit::sample_mixture;
    use approx::assert_relative_eq;

    fn mix(mu1: f64, mu2: f64) -> MixtureParams {
        MixtureParams::new(
            0.6,
            LognormalParams::new(mu1, 0.4).unwrap(),
            LognormalParams::new(mu2, 0.5).unwrap(),
        )
        .unwrap()
    }

    fn five_state_bank() -> StateBank {
        let mus = [-1.6, -1.0, -0.4, 0.2, 0.8];
        let states = mus
            .iter()
            .enumerate()
            .map(|(i, &m)| BankState {
                label: format!("M{}", i + 1),
                model: mix(m, m + 1.0),
                spark_anchor_btdc: 12.0 + 2.0 * i as f64,
            })
            .collect();
        StateBank::new(states, default_action_weights(5)).unwrap()
    }

    #[test]
    fn default_weights_interpolate_linearly() {
        assert_eq!(default_action_weights(5), vec![2.0, 1.0, 0.0, -1.0, -2.0]);
        assert_eq!(default_action_weights(2), vec![2.0, -2.0]);
        assert_eq!(default_action_weights(3), vec![2.0, 0.0, -2.0]);
    }

    #[test]
    fn bank_validation() {
        let b = five_state_bank();
        assert_eq!(b.len(), 5);
        // anchors must strictly advance
        let mut states: Vec<BankState> = b.states().to_vec();
        states[1].spark_anchor_btdc = states[0].spark_anchor_btdc;
        assert!(StateBank::new(states.clone(), default_action_weights(5)).is_err());
        // duplicate labels rejected
        let mut states: Vec<BankState> = b.states().to_vec();
        states[1].label = states[0].label.clone();
        assert!(StateBank::new(states, default_action_weights(5)).is_err());
        // weight count must match
        assert!(StateBank::new(b.states().to_vec(), vec![0.0; 4]).is_err());
    }

    #[test]
    fn bank_json_round_trip() {
        let b = five_state_bank();
        let s = serde_json::to_string_pretty(&b).unwrap();
        assert!(s.trim_start().starts_with('['));
        assert!(s.contains("weight_deg"));
        let back: StateBank = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn single_value_window_likelihood_is_one_term() {
        let b = five_state_bank();
        let l = state_likelihoods(&b, &[0.5]).unwrap();
        for (s, &ll) in b.states().iter().zip(&l) {
            assert_relative_eq!(ll, s.model.ln_pdf(0.5), max_relative = 1e-14);
        }
        assert!(state_likelihoods(&b, &[]).is_err());
        assert!(matches!(state_likelihoods(&b, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn identical_states_get_identical_likelihoods() {
        let m = mix(-0.5, 0.5);
        let states = vec![
            BankState { label: "a".into(), model: m, spark_anchor_btdc: 10.0 },
            BankState { label: "b".into(), model: m, spark_anchor_btdc: 12.0 },
        ];
        let bank = StateBank::new(states, default_action_weights(2)).unwrap();
        let l = state_likelihoods(&bank, &[0.3, 0.9, 2.0]).unwrap();
        assert_eq!(l[0], l[1]);
    }

    #[test]
    fn uniform_prior_equal_likelihoods_stay_uniform() {
        let prior = Posterior::uniform(5);
        let update = posterior_from_log_likelihoods(&prior, &[-3.0; 5]).unwrap();
        for &p in update.posterior.probs() {
            assert_relative_eq!(p, 0.2, max_relative = 1e-14);
        }
        assert!(!update.underflow_fallback);
    }

    #[test]
    fn three_to_one_likelihood_ratio() {
        let prior = Posterior::uniform(2);
        let l3 = 3.0f64.ln();
        let update = posterior_from_log_likelihoods(&prior, &[l3, 0.0]).unwrap();
        assert_relative_eq!(update.posterior.probs()[0], 0.75, max_relative = 1e-12);
        assert_relative_eq!(update.posterior.probs()[1], 0.25, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_prior_absorbs_any_window() {
        let bank = five_state_bank();
        let prior = Posterior::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let update = posterior_update(&bank, &prior, &[0.2, 1.4, 0.6]).unwrap();
        assert_eq!(update.posterior.probs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn likelihood_scaling_cancels() {
        let prior = Posterior::new(vec![0.5, 0.3, 0.2]).unwrap();
        let lnl = [-700.0, -710.0, -695.0];
        let shifted: Vec<f64> = lnl.iter().map(|l| l + 650.0).collect();
        let a = posterior_from_log_likelihoods(&prior, &lnl).unwrap();
        let b = posterior_from_log_likelihoods(&prior, &shifted).unwrap();
        for (x, y) in a.posterior.probs().iter().zip(b.posterior.probs()) {
            assert_relative_eq!(x, y, max_relative = 1e-10);
        }
    }

    #[test]
    fn log_sum_exp_matches_naive_bayes_when_safe() {
        let prior = Posterior::new(vec![0.4, 0.35, 0.25]).unwrap();
        let lnl = [-2.0, -1.0, -3.0];
        let update = posterior_from_log_likelihoods(&prior, &lnl).unwrap();
        let joint: Vec<f64> = prior
            .probs()
            .iter()
            .zip(&lnl)
            .map(|(p, l)| p * l.exp())
            .collect();
        let total: f64 = joint.iter().sum();
        for (a, j) in update.posterior.probs().iter().zip(&joint) {
            assert_relative_eq!(*a, j / total, max_relative = 1e-10);
        }
    }

    #[test]
    fn window_of_true_state_identifies_it() {
        let bank = five_state_bank();
        let truth = bank.states()[4].model;
        let mut wins = 0;
        for s in 0..100u64 {
            let data = sample_mixture(&truth, 50, s).unwrap();
            let l = state_likelihoods(&bank, data.ki()).unwrap();
            let argmax = l
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            if argmax == 4 {
                wins += 1;
            }
        }
        assert!(wins >= 95, "state 5 won only {wins}/100 windows");
    }

    #[test]
    fn pure_state_deltas_hit_the_extremes() {
        let bank = five_state_bank();
        for (i, expected) in [(0usize, 2.0f64), (2, 0.0), (4, -2.0)] {
            let mut probs = vec![0.0; 5];
            probs[i] = 1.0;
            let p = Posterior::new(probs).unwrap();
            assert_eq!(spark_delta(&p, &bank).unwrap(), expected);
        }
        let split = Posterior::new(vec![0.0, 0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_relative_eq!(spark_delta(&split, &bank).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn controller_clamps_at_limits() {
        let bank = five_state_bank();
        let limits = SparkLimits { min_btdc: 0.0, max_btdc: 20.0 };
        let mut state = ControllerState::new(20.0, 5, 4, limits, 0.9).unwrap();
        // very small KI drives the posterior to the least severe state -> +delta
        let out = controller_step(&mut state, &bank, 0.05).unwrap();
        assert_eq!(state.spark_btdc(), 20.0);
        assert_eq!(out.applied_delta, 0.0);
    }

    #[test]
    fn zero_forgetting_resets_prior_to_uniform() {
        let bank = five_state_bank();
        let mut state = ControllerState::new(15.0, 5, 8, SparkLimits::default(), 0.0).unwrap();
        controller_step(&mut state, &bank, 0.05).unwrap();
        for &p in state.prior().probs() {
            assert_relative_eq!(p, 0.2, max_relative = 1e-12);
        }
    }

    #[test]
    fn window_capacity_one_sees_only_newest_ki() {
        let bank = five_state_bank();
        let mut s1 = ControllerState::new(15.0, 5, 1, SparkLimits::default(), 0.0).unwrap();
        // with W=1 and lambda=0 each step depends only on the newest KI
        controller_step(&mut s1, &bank, 4.0).unwrap();
        let a = controller_step(&mut s1, &bank, 0.3).unwrap();
        let mut s2 = ControllerState::new(15.0, 5, 1, SparkLimits::default(), 0.0).unwrap();
        let b = controller_step(&mut s2, &bank, 0.3).unwrap();
        assert_eq!(a.posterior.probs(), b.posterior.probs());
    }

    #[test]
    fn rejects_nonpositive_ki() {
        let bank = five_state_bank();
        let mut state = ControllerState::new(15.0, 5, 4, SparkLimits::default(), 0.9).unwrap();
        assert!(matches!(
            controller_step(&mut state, &bank, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn controller_csv_layout() {
        let records = vec![
            CycleRecord {
                cycle: 0,
                ki_bar: 0.5,
                spark_btdc: 15.0,
                delta_deg: 0.25,
                posterior: vec![0.2, 0.3, 0.5],
            },
        ];
        let mut buf = Vec::new();
        write_controller_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "cycle,ki_bar,spark_btdc,delta_deg,p1,p2,p3\n0,0.5,15,0.25,0.2,0.3,0.5\n"
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn posterior_stays_on_simplex(
                seed in 0u64..10_000,
                raw in proptest::collection::vec(1e-4f64..1.0, 5),
                window_len in 1usize..40,
            ) {
                let bank = five_state_bank();
                let total: f64 = raw.iter().sum();
                let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
                let corr: f64 = probs.iter().sum();
                probs[0] += 1.0 - corr; // pin the sum exactly
                let prior = Posterior::new(probs).unwrap();
                let data = sample_mixture(&bank.states()[2].model, window_len, seed).unwrap();
                let update = posterior_update(&bank, &prior, data.ki()).unwrap();
                let sum: f64 = update.posterior.probs().iter().sum();
                prop_assert!((sum - 1.0).abs() <= SIMPLEX_TOL);
                for &p in update.posterior.probs() {
                    prop_assert!((0.0..=1.0).contains(&p));
                }
            }

            #[test]
            fn delta_is_bounded_by_weights(raw in proptest::collection::vec(1e-4f64..1.0, 5)) {
                let bank = five_state_bank();
                let total: f64 = raw.iter().sum();
                let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
                let corr: f64 = probs.iter().sum();
                probs[0] += 1.0 - corr;
                let p = Posterior::new(probs).unwrap();
                let d = spark_delta(&p, &bank).unwrap();
                prop_assert!((-2.0..=2.0).contains(&d));
            }
        }
    }
}
