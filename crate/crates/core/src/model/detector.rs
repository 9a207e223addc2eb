//! Energy-detector false-alarm and detection probabilities, plus the Friis
//! budget for harvested power.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::{FriisParams, SensingParams};
use crate::error::{Error, Result};
use crate::special::q;

/// Sensing outcome probabilities used by the accounting formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub pf: f64,
    pub pd: f64,
}

impl Detection {
    /// Perfect knowledge of the PU state.
    pub const PERFECT: Detection = Detection { pf: 0.0, pd: 1.0 };

    pub fn from_sensing(s: &SensingParams, tau: f64) -> Detection {
        Detection {
            pf: pf_unchecked(s, tau),
            pd: pd_unchecked(s, tau),
        }
    }
}

pub(crate) fn check_tau(op: &'static str, tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("tau = {tau} not in (0, 1)")))
    }
}

/// `Q[(eps/sigma^2 - 1) sqrt((1 - tau) Ns)]`.
pub fn prob_false_alarm(s: &SensingParams, tau: f64) -> Result<f64> {
    check_tau("prob_false_alarm", tau)?;
    Ok(pf_unchecked(s, tau))
}

/// `Q[(eps/sigma^2 - gamma - 1) sqrt((1 - tau) Ns / (2 gamma + 1))]`.
pub fn prob_detection(s: &SensingParams, tau: f64) -> Result<f64> {
    check_tau("prob_detection", tau)?;
    Ok(pd_unchecked(s, tau))
}

pub(crate) fn pf_arg(s: &SensingParams, tau: f64) -> f64 {
    (s.threshold / s.noise_variance - 1.0) * s.effective_samples(tau).sqrt()
}

pub(crate) fn pd_arg(s: &SensingParams, tau: f64) -> f64 {
    (s.threshold / s.noise_variance - s.snr - 1.0)
        * (s.effective_samples(tau) / (2.0 * s.snr + 1.0)).sqrt()
}

pub(crate) fn pf_unchecked(s: &SensingParams, tau: f64) -> f64 {
    q(pf_arg(s, tau))
}

pub(crate) fn pd_unchecked(s: &SensingParams, tau: f64) -> f64 {
    q(pd_arg(s, tau))
}

/// `delta * P_T * G_T * G_R * lambda^2 / (4 pi d)^2`.
pub fn friis_harvested_power(f: &FriisParams, pu_tx_power: f64) -> Result<f64> {
    if !(f.distance > 0.0) {
        return Err(Error::domain(
            "friis_harvested_power",
            format!("distance {} must be positive", f.distance),
        ));
    }
    f.validate()?;
    let spread = 4.0 * PI * f.distance;
    Ok(f.harvesting_efficiency * pu_tx_power * f.tx_gain * f.rx_gain * f.wavelength * f.wavelength
        / (spread * spread))
}

/// Wavelength that makes the Friis budget deliver `target_power`.
pub fn friis_wavelength_for(
    harvesting_efficiency: f64,
    tx_gain: f64,
    rx_gain: f64,
    distance: f64,
    pu_tx_power: f64,
    target_power: f64,
) -> f64 {
    4.0 * PI * distance
        * (target_power / (harvesting_efficiency * pu_tx_power * tx_gain * rx_gain)).sqrt()
}
