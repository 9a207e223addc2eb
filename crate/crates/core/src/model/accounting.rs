//! Per-scenario throughput and energy, and the resulting energy efficiency.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::detector::Detection;
use super::params::{NetworkParams, SensingParams, TimeSplit};

/// Sensing outcome crossed with true PU state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// PU busy, detected: backscatter over the PU signal.
    S1,
    /// PU idle, false alarm: nothing sent.
    S2,
    /// PU busy, missed: harvested-energy transmission under interference.
    S3,
    /// PU idle, correctly declared idle: harvested-energy transmission.
    S4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4];

    pub fn index(self) -> usize {
        match self {
            Scenario::S1 => 0,
            Scenario::S2 => 1,
            Scenario::S3 => 2,
            Scenario::S4 => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    pub probability: f64,
    /// Bits delivered in the frame.
    pub throughput: f64,
    /// Joules consumed in the frame.
    pub energy: f64,
}

/// Throughput, energy and efficiency of one operating point.
///
/// Throughputs are in bits per unit frame, energy in joules. `ee` is
/// normalized by the bandwidth (bits/Hz/J); `ee_raw` is bits/J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EeBreakdown {
    pub pf: f64,
    pub pd: f64,
    pub alpha_dagger: f64,
    /// Transmit power as computed; negative when harvesting falls short.
    pub ptr: f64,
    pub htt_feasible: bool,
    pub throughput_abc: f64,
    pub throughput_htt: f64,
    pub energy: f64,
    pub ee: f64,
    pub ee_raw: f64,
}

impl EeBreakdown {
    pub fn throughput(&self) -> f64 {
        self.throughput_abc + self.throughput_htt
    }

    /// Backscatter share of `ee`.
    pub fn ee_abc(&self) -> f64 {
        self.ee * share(self.throughput_abc, self.throughput())
    }

    /// Harvest-then-transmit share of `ee`.
    pub fn ee_htt(&self) -> f64 {
        self.ee * share(self.throughput_htt, self.throughput())
    }
}

fn share(part: f64, total: f64) -> f64 {
    if total == 0.0 {
        0.0
    } else {
        part / total
    }
}

/// Minimum harvesting fraction of `tau` that pays for sensing and circuit
/// energy. Values above 1 mean HTT is impossible at this split.
pub fn alpha_dagger(n: &NetworkParams, t: &TimeSplit) -> f64 {
    let circuit = t.mu * t.tau * n.circuit_power;
    let sensing = n.sensing_power * (1.0 - t.tau);
    (circuit + sensing) / (t.tau * n.harvested_power)
}

/// Power left for transmission after sensing and circuit costs.
pub fn transmit_power(n: &NetworkParams, t: &TimeSplit) -> f64 {
    (t.alpha * t.tau * n.harvested_power
        - n.sensing_power * (1.0 - t.tau)
        - t.mu * t.tau * n.circuit_power)
        / (t.mu * t.tau)
}

#[inline]
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Per-scenario link quantities shared by the table and the aggregates.
struct Frame {
    alpha_dagger: f64,
    ptr: f64,
    feasible: bool,
    rate_abc: f64,
    rate_s3: f64,
    rate_s4: f64,
    e_sense: f64,
    e_tx: f64,
}

fn frame(n: &NetworkParams, t: &TimeSplit) -> Frame {
    let ad = alpha_dagger(n, t);
    let ptr = transmit_power(n, t);
    let feasible = t.alpha >= ad;
    let p_used = if feasible { ptr.max(0.0) } else { 0.0 };
    let slot = t.mu * t.tau * n.bandwidth;
    Frame {
        alpha_dagger: ad,
        ptr,
        feasible,
        rate_abc: (1.0 - t.alpha) * t.tau * n.backscatter_rate,
        rate_s3: n.partial_throughput_factor * slot * log2_1p(p_used / n.interference_floor()),
        rate_s4: slot * log2_1p(p_used / n.noise_to_channel_power),
        e_sense: n.sensing_power * (1.0 - t.tau),
        e_tx: p_used * t.mu * t.tau,
    }
}

fn rows_from(n: &NetworkParams, det: Detection, f: &Frame) -> [ScenarioRow; 4] {
    [
        ScenarioRow {
            scenario: Scenario::S1,
            probability: n.prior_busy * det.pd,
            throughput: f.rate_abc,
            energy: f.e_sense,
        },
        ScenarioRow {
            scenario: Scenario::S2,
            probability: n.prior_idle * det.pf,
            throughput: 0.0,
            energy: f.e_sense,
        },
        ScenarioRow {
            scenario: Scenario::S3,
            probability: n.prior_busy * (1.0 - det.pd),
            throughput: f.rate_s3,
            energy: f.e_sense + f.e_tx,
        },
        ScenarioRow {
            scenario: Scenario::S4,
            probability: n.prior_idle * (1.0 - det.pf),
            throughput: f.rate_s4,
            energy: f.e_sense + f.e_tx,
        },
    ]
}

/// The four sensing scenarios with their probability, throughput and energy.
pub fn scenario_table(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> [ScenarioRow; 4] {
    scenario_table_with(n, Detection::from_sensing(s, t.tau), t)
}

pub fn scenario_table_with(n: &NetworkParams, det: Detection, t: &TimeSplit) -> [ScenarioRow; 4] {
    rows_from(n, det, &frame(n, t))
}

/// Average backscatter and HTT throughput in bits per frame.
pub fn avg_throughput(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> (f64, f64) {
    let b = evaluate(n, Detection::from_sensing(s, t.tau), t);
    (b.throughput_abc, b.throughput_htt)
}

/// Average energy per frame in joules.
pub fn avg_energy(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> f64 {
    evaluate(n, Detection::from_sensing(s, t.tau), t).energy
}

/// Energy efficiency with the detector implied by `s`.
pub fn energy_efficiency(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> EeBreakdown {
    evaluate(n, Detection::from_sensing(s, t.tau), t)
}

/// Energy efficiency with perfect PU knowledge (`Pd = 1`, `Pf = 0`). The
/// sensing slot and its energy stay in the frame.
pub fn no_sensing_errors_baseline(n: &NetworkParams, t: &TimeSplit) -> EeBreakdown {
    evaluate(n, Detection::PERFECT, t)
}

/// Energy efficiency for explicit detection probabilities.
pub fn evaluate(n: &NetworkParams, det: Detection, t: &TimeSplit) -> EeBreakdown {
    let f = frame(n, t);
    let busy_missed = n.prior_busy * (1.0 - det.pd);
    let idle_clear = n.prior_idle * (1.0 - det.pf);

    let throughput_abc = n.prior_busy * det.pd * f.rate_abc;
    let throughput_htt = busy_missed * f.rate_s3 + idle_clear * f.rate_s4;
    let energy = f.e_sense + f.e_tx * (busy_missed + idle_clear);
    let ee_raw = (throughput_abc + throughput_htt) / energy;

    EeBreakdown {
        pf: det.pf,
        pd: det.pd,
        alpha_dagger: f.alpha_dagger,
        ptr: f.ptr,
        htt_feasible: f.feasible,
        throughput_abc,
        throughput_htt,
        energy,
        ee: ee_raw / n.bandwidth,
        ee_raw,
    }
}
