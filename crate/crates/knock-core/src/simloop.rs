//! Synthetic engine and closed-loop controller harness.
//!
//! The engine maps spark timing to a KI distribution by componentwise linear
//! interpolation between spark-anchored mixture models, encoding the
//! monotone rise of knock with spark advance. Each cycle draws one KI from
//! the interpolated mixture on an RNG stream derived from (master seed,
//! cycle index), so trajectories are reproducible under any evaluation
//! order.

use serde::{Deserialize, Serialize};

use crate::distfit::{LognormalParams, MixtureParams};
use crate::error::{Error, Result};
use crate::knockctl::{
    controller_step, default_action_weights, BankState, ControllerState, CycleRecord, StateBank,
};
use crate::seed;

/// A spark timing and the KI mixture observed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineAnchor {
    pub spark_btdc: f64,
    pub params: MixtureParams,
}

/// Spark-indexed mixture response of the synthetic engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EngineRepr", into = "EngineRepr")]
pub struct EngineModel {
    anchors: Vec<EngineAnchor>,
    pub seed: u64,
}

impl EngineModel {
    pub fn new(anchors: Vec<EngineAnchor>, seed: u64) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::Precondition(format!(
                "engine model needs at least 2 anchors, got {}",
                anchors.len()
            )));
        }
        for a in &anchors {
            if !a.spark_btdc.is_finite() {
                return Err(Error::Format(format!("non-finite anchor spark {}", a.spark_btdc)));
            }
        }
        for w in anchors.windows(2) {
            if w[1].spark_btdc <= w[0].spark_btdc {
                return Err(Error::Format(format!(
                    "anchor sparks must strictly increase: {} after {}",
                    w[1].spark_btdc, w[0].spark_btdc
                )));
            }
            if w[1].params.log_space_mean() < w[0].params.log_space_mean() {
                return Err(Error::Format(format!(
                    "knock must not fall as spark advances: log-mean {} at {} degBTDC after {} at {}",
                    w[1].params.log_space_mean(),
                    w[1].spark_btdc,
                    w[0].params.log_space_mean(),
                    w[0].spark_btdc
                )));
            }
        }
        Ok(Self { anchors, seed })
    }

    pub fn anchors(&self) -> &[EngineAnchor] {
        &self.anchors
    }
}

#[derive(Serialize, Deserialize)]
struct AnchorRepr {
    spark_btdc: f64,
    a: f64,
    mu1: f64,
    sigma1: f64,
    mu2: f64,
    sigma2: f64,
}

#[derive(Serialize, Deserialize)]
struct EngineRepr {
    seed: u64,
    anchors: Vec<AnchorRepr>,
}

impl TryFrom<EngineRepr> for EngineModel {
    type Error = Error;

    fn try_from(r: EngineRepr) -> Result<Self> {
        let anchors = r
            .anchors
            .into_iter()
            .map(|a| {
                Ok(EngineAnchor {
                    spark_btdc: a.spark_btdc,
                    params: MixtureParams::new(
                        a.a,
                        LognormalParams::new(a.mu1, a.sigma1)?,
                        LognormalParams::new(a.mu2, a.sigma2)?,
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EngineModel::new(anchors, r.seed)
    }
}

impl From<EngineModel> for EngineRepr {
    fn from(m: EngineModel) -> Self {
        EngineRepr {
            seed: m.seed,
            anchors: m
                .anchors
                .iter()
                .map(|a| AnchorRepr {
                    spark_btdc: a.spark_btdc,
                    a: a.params.a(),
                    mu1: a.params.comp1().mu(),
                    sigma1: a.params.comp1().sigma(),
                    mu2: a.params.comp2().mu(),
                    sigma2: a.params.comp2().sigma(),
                })
                .collect(),
        }
    }
}

/// KI mixture at an arbitrary spark: componentwise linear interpolation
/// between the bracketing anchors, clamped to the end anchors outside the
/// range.
pub fn engine_response(model: &EngineModel, spark_btdc: f64) -> MixtureParams {
    let anchors = model.anchors();
    if spark_btdc <= anchors[0].spark_btdc {
        return anchors[0].params;
    }
    if spark_btdc >= anchors[anchors.len() - 1].spark_btdc {
        return anchors[anchors.len() - 1].params;
    }
    let hi = anchors.partition_point(|a| a.spark_btdc < spark_btdc);
    let (lo, hi) = (&anchors[hi - 1], &anchors[hi]);
    if spark_btdc == lo.spark_btdc {
        return lo.params;
    }
    let t = (spark_btdc - lo.spark_btdc) / (hi.spark_btdc - lo.spark_btdc);
    let lerp = |x: f64, y: f64| (1.0 - t) * x + t * y;
    // anchors are canonical (mu1 <= mu2), so componentwise interpolation is
    // well-defined and preserves the ordering
    MixtureParams::new(
        lerp(lo.params.a(), hi.params.a()),
        LognormalParams::new(
            lerp(lo.params.comp1().mu(), hi.params.comp1().mu()),
            lerp(lo.params.comp1().sigma(), hi.params.comp1().sigma()),
        )
        .expect("interpolated sigma stays positive"),
        LognormalParams::new(
            lerp(lo.params.comp2().mu(), hi.params.comp2().mu()),
            lerp(lo.params.comp2().sigma(), hi.params.comp2().sigma()),
        )
        .expect("interpolated sigma stays positive"),
    )
    .expect("interpolated weight stays in (0, 1)")
}

/// Draw one cycle's KI at the given spark on the stream derived from
/// (engine seed, cycle index).
pub fn simulate_cycle(model: &EngineModel, spark_btdc: f64, cycle: u64) -> f64 {
    let params = engine_response(model, spark_btdc);
    let mut rng = seed::rng(seed::derive(model.seed, cycle));
    crate::distfit::draw_mixture(&mut rng, &params)
}

/// Closed-loop run record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<CycleRecord>,
}

/// Run the controller against the synthetic engine for `cycles` cycles.
///
/// Each cycle fires at the controller's current spark, the drawn KI feeds
/// one controller step, and the record keeps the firing spark together with
/// the resulting posterior and applied delta.
pub fn run_closed_loop(
    model: &EngineModel,
    bank: &StateBank,
    mut ctrl: ControllerState,
    cycles: u64,
) -> Result<Trajectory> {
    let mut records = Vec::with_capacity(cycles as usize);
    for cycle in 0..cycles {
        let spark = ctrl.spark_btdc();
        let ki = simulate_cycle(model, spark, cycle);
        let out = controller_step(&mut ctrl, bank, ki)?;
        records.push(CycleRecord {
            cycle,
            ki_bar: ki,
            spark_btdc: spark,
            delta_deg: out.applied_delta,
            posterior: out.posterior.probs().to_vec(),
        });
    }
    Ok(Trajectory { records })
}

/// Aggregate statistics of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub mean_spark_btdc: f64,
    pub spark_std_deg: f64,
    /// Fraction of cycles whose posterior put more than the cut on the
    /// severe state.
    pub severe_fraction: f64,
    pub mean_ki_bar: f64,
}

/// Summarize a trajectory; `severe_state_index` selects the state whose
/// posterior probability is compared against `severe_prob_cut`.
pub fn trajectory_summary(
    t: &Trajectory,
    severe_state_index: usize,
    severe_prob_cut: f64,
) -> Result<TrajectorySummary> {
    if t.records.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    let n = t.records.len() as f64;
    let mean_spark = t.records.iter().map(|r| r.spark_btdc).sum::<f64>() / n;
    let var = t
        .records
        .iter()
        .map(|r| (r.spark_btdc - mean_spark) * (r.spark_btdc - mean_spark))
        .sum::<f64>()
        / n;
    let mean_ki = t.records.iter().map(|r| r.ki_bar).sum::<f64>() / n;
    let severe = t
        .records
        .iter()
        .filter(|r| {
            r.posterior
                .get(severe_state_index)
                .is_some_and(|&p| p > severe_prob_cut)
        })
        .count() as f64;
    Ok(TrajectorySummary {
        mean_spark_btdc: mean_spark,
        spark_std_deg: var.sqrt(),
        severe_fraction: severe / n,
        mean_ki_bar: mean_ki,
    })
}

/// Demo engine: five anchors from light to heavy knock across
/// 12..21 degBTDC. Shipped as a configuration default for demos and tests;
/// the numbers describe no particular physical engine.
pub fn demo_engine(seed: u64) -> EngineModel {
    let table: [(f64, f64, f64, f64, f64, f64); 5] = [
        // spark, a, mu1, sigma1, mu2, sigma2
        (12.0, 0.85, -1.6, 0.40, -0.2, 0.50),
        (15.0, 0.80, -1.2, 0.40, 0.0, 0.50),
        (17.0, 0.70, -0.8, 0.45, 0.4, 0.50),
        (19.0, 0.55, -0.4, 0.50, 0.8, 0.55),
        (21.0, 0.40, 0.0, 0.50, 1.2, 0.60),
    ];
    let anchors = table
        .iter()
        .map(|&(spark, a, m1, s1, m2, s2)| EngineAnchor {
            spark_btdc: spark,
            params: MixtureParams::new(
                a,
                LognormalParams::new(m1, s1).unwrap(),
                LognormalParams::new(m2, s2).unwrap(),
            )
            .unwrap(),
        })
        .collect();
    EngineModel::new(anchors, seed).unwrap()
}

/// Five-state bank matched to [`demo_engine`]: each state's model equals the
/// engine's anchor distribution at that spark, with the default action
/// weights.
pub fn demo_bank() -> StateBank {
    let labels = ["very_low", "mild_low", "borderline", "mild_high", "very_high"];
    let engine = demo_engine(0);
    let states = engine
        .anchors()
        .iter()
        .zip(labels)
        .map(|(a, label)| BankState {
            label: label.to_string(),
            model: a.params,
            spark_anchor_btdc: a.spark_btdc,
        })
        .collect();
    StateBank::new(states, default_action_weights(5)).unwrap()
}
