//! Operating modes of the secondary transmitter as interchangeable
//! strategies, looked up by name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate, Detection, EeBreakdown, NetworkParams, SensingParams, TimeSplit};
use crate::optimizer::{
    optimal_alpha_with, optimal_threshold, optimal_tau, select_optimum, AlphaBound, ModeOptimum,
};

/// Which split family produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Hybrid,
    AbcOnly,
    HttOnly,
}

/// Whether the transmitter sees the PU state through the detector or
/// directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    Imperfect,
    Perfect,
}

/// Best configuration of a mode at one sensing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePoint {
    pub regime: Regime,
    pub threshold: f64,
    pub split: TimeSplit,
    pub alpha_bound: Option<AlphaBound>,
    pub breakdown: EeBreakdown,
}

pub trait OperatingMode: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether HTT must be fundable, which raises the lower `tau` limit.
    fn uses_htt(&self) -> bool;

    /// Whether the false-alarm target limits the sensing time.
    fn pf_constrained(&self) -> bool {
        true
    }

    /// Threshold, split and EE at sensing time `tau`.
    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint>;

    /// Best point over `tau`.
    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum>;
}

struct Sensed {
    threshold: f64,
    det: Detection,
}

fn sense(n: &NetworkParams, s: &SensingParams, tau: f64, knowledge: Knowledge) -> Result<Sensed> {
    let threshold = optimal_threshold(s, tau, n.target_pd)?;
    let det = match knowledge {
        Knowledge::Imperfect => Detection::from_sensing(&s.with_threshold(threshold), tau),
        Knowledge::Perfect => Detection::PERFECT,
    };
    Ok(Sensed { threshold, det })
}

fn harvesting_point(
    n: &NetworkParams,
    sensed: Sensed,
    tau: f64,
    regime: Regime,
) -> Result<ModePoint> {
    let a = optimal_alpha_with(n, sensed.det, tau, 1.0)?;
    let split = TimeSplit {
        tau,
        alpha: a.alpha,
        mu: 1.0,
    };
    Ok(ModePoint {
        regime,
        threshold: sensed.threshold,
        split,
        alpha_bound: Some(a.bound),
        breakdown: evaluate(n, sensed.det, &split),
    })
}

/// Backscatter when the PU is declared busy, HTT when declared idle.
#[derive(Debug, Clone, Copy)]
pub struct Hybrid {
    pub knowledge: Knowledge,
}

impl Hybrid {
    pub fn imperfect() -> Self {
        Self {
            knowledge: Knowledge::Imperfect,
        }
    }
}

impl OperatingMode for Hybrid {
    fn name(&self) -> &'static str {
        "hybrid"
    }

    fn uses_htt(&self) -> bool {
        true
    }

    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint> {
        let sensed = sense(n, s, tau, self.knowledge)?;
        harvesting_point(n, sensed, tau, Regime::Hybrid)
    }

    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum> {
        optimal_tau(n, s, self)
    }
}

/// Backscatter only: no harvesting, so the whole busy slot carries data.
#[derive(Debug, Clone, Copy)]
pub struct AbcOnly {
    pub knowledge: Knowledge,
}

impl AbcOnly {
    pub fn imperfect() -> Self {
        Self {
            knowledge: Knowledge::Imperfect,
        }
    }
}

impl OperatingMode for AbcOnly {
    fn name(&self) -> &'static str {
        "abc_only"
    }

    fn uses_htt(&self) -> bool {
        false
    }

    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint> {
        let sensed = sense(n, s, tau, self.knowledge)?;
        let split = TimeSplit {
            tau,
            alpha: 0.0,
            mu: 1.0,
        };
        Ok(ModePoint {
            regime: Regime::AbcOnly,
            threshold: sensed.threshold,
            split,
            alpha_bound: None,
            breakdown: evaluate(n, sensed.det, &split),
        })
    }

    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum> {
        optimal_tau(n, s, self)
    }
}

/// Harvest-then-transmit only: backscatter is switched off and the
/// harvesting fraction is optimized for HTT alone.
#[derive(Debug, Clone, Copy)]
pub struct HttOnly {
    pub knowledge: Knowledge,
}

impl HttOnly {
    pub fn imperfect() -> Self {
        Self {
            knowledge: Knowledge::Imperfect,
        }
    }
}

impl OperatingMode for HttOnly {
    fn name(&self) -> &'static str {
        "htt_only"
    }

    fn uses_htt(&self) -> bool {
        true
    }

    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint> {
        let silent = NetworkParams {
            backscatter_rate: 0.0,
            ..*n
        };
        let sensed = sense(&silent, s, tau, self.knowledge)?;
        harvesting_point(&silent, sensed, tau, Regime::HttOnly)
    }

    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum> {
        optimal_tau(n, s, self)
    }
}

/// Perfect knowledge of the PU state, keeping the sensing slot and its
/// energy. Chooses between hybrid and backscatter-only operation like the
/// imperfect-sensing optimizer does.
#[derive(Debug, Clone, Copy)]
pub struct NoSensingErrors {
    /// Keep the false-alarm limit on the sensing time so that both runs
    /// share one `tau` range.
    pub sensing_constraint: bool,
}

impl Default for NoSensingErrors {
    fn default() -> Self {
        Self {
            sensing_constraint: true,
        }
    }
}

struct Constrained<M> {
    inner: M,
    pf_constrained: bool,
}

impl<M: OperatingMode> OperatingMode for Constrained<M> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn uses_htt(&self) -> bool {
        self.inner.uses_htt()
    }

    fn pf_constrained(&self) -> bool {
        self.pf_constrained
    }

    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint> {
        self.inner.evaluate_at(n, s, tau)
    }

    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum> {
        optimal_tau(n, s, self)
    }
}

impl OperatingMode for NoSensingErrors {
    fn name(&self) -> &'static str {
        "no_sensing_errors"
    }

    fn uses_htt(&self) -> bool {
        false
    }

    fn pf_constrained(&self) -> bool {
        self.sensing_constraint
    }

    fn evaluate_at(&self, n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<ModePoint> {
        let hybrid = Hybrid {
            knowledge: Knowledge::Perfect,
        }
        .evaluate_at(n, s, tau);
        let abc = AbcOnly {
            knowledge: Knowledge::Perfect,
        }
        .evaluate_at(n, s, tau)?;
        Ok(match hybrid {
            Ok(h) if h.breakdown.ee >= abc.breakdown.ee => h,
            _ => abc,
        })
    }

    fn optimize(&self, n: &NetworkParams, s: &SensingParams) -> Result<ModeOptimum> {
        let hybrid = Constrained {
            inner: Hybrid {
                knowledge: Knowledge::Perfect,
            },
            pf_constrained: self.sensing_constraint,
        };
        let abc = Constrained {
            inner: AbcOnly {
                knowledge: Knowledge::Perfect,
            },
            pf_constrained: self.sensing_constraint,
        };
        let mut best = select_optimum(optimal_tau(n, s, &hybrid), optimal_tau(n, s, &abc))?;
        best.mode = self.name();
        Ok(best)
    }
}

/// Name-keyed set of operating modes.
pub struct ModeRegistry {
    modes: BTreeMap<&'static str, Box<dyn OperatingMode>>,
}

impl ModeRegistry {
    pub fn empty() -> Self {
        Self {
            modes: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        Self::with_baseline(NoSensingErrors::default())
    }

    /// Built-in modes with a custom perfect-knowledge baseline.
    pub fn with_baseline(baseline: NoSensingErrors) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Hybrid::imperfect()));
        r.register(Box::new(AbcOnly::imperfect()));
        r.register(Box::new(HttOnly::imperfect()));
        r.register(Box::new(baseline));
        r
    }

    pub fn register(&mut self, mode: Box<dyn OperatingMode>) {
        self.modes.insert(mode.name(), mode);
    }

    pub fn get(&self, name: &str) -> Result<&dyn OperatingMode> {
        self.modes
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "mode",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.modes.keys().copied()
    }
}
