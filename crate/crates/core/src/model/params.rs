use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy-detector configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingParams {
    /// Observations per frame (`fs * T`).
    pub num_samples: u32,
    /// Received SNR at the secondary transmitter, linear.
    pub snr: f64,
    /// Noise variance in watts.
    pub noise_variance: f64,
    /// Detection threshold in watts.
    pub threshold: f64,
}

impl SensingParams {
    pub fn new(num_samples: u32, snr: f64, noise_variance: f64, threshold: f64) -> Result<Self> {
        let s = Self {
            num_samples,
            snr,
            noise_variance,
            threshold,
        };
        s.validate()?;
        Ok(s)
    }

    /// Build from an SNR in dB, placing the threshold at the H1 mean.
    pub fn from_snr_db(num_samples: u32, snr_db: f64, noise_variance: f64) -> Result<Self> {
        let snr = db_to_linear(snr_db);
        Self::new(num_samples, snr, noise_variance, noise_variance * (1.0 + snr))
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Self { threshold, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples < 1 {
            return Err(Error::param("num_samples", "must be >= 1"));
        }
        positive("snr", self.snr)?;
        positive("noise_variance", self.noise_variance)?;
        positive("threshold", self.threshold)
    }

    /// `(1 - tau) * Ns`, the number of samples inside the sensing slot.
    pub fn effective_samples(&self, tau: f64) -> f64 {
        (1.0 - tau) * f64::from(self.num_samples)
    }
}

impl Default for SensingParams {
    fn default() -> Self {
        Self::from_snr_db(2000, -10.0, 1.0).expect("static defaults are valid")
    }
}

/// Powers, rates, gains, priors and constraint targets of the PU/SU pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// P(H0): the primary transmitter is idle.
    pub prior_idle: f64,
    /// P(H1): the primary transmitter is active.
    pub prior_busy: f64,
    /// Bandwidth `W` in Hz.
    pub bandwidth: f64,
    /// Backscatter rate `B_b` in bits/s. Zero disables ambient backscatter.
    pub backscatter_rate: f64,
    /// Fraction of the rate kept when transmitting over an undetected PU.
    pub partial_throughput_factor: f64,
    pub sensing_power: f64,
    pub circuit_power: f64,
    pub pu_tx_power: f64,
    /// Ratio of the PT-ST gain to the ST-SR gain.
    pub interference_gain_ratio: f64,
    /// `P0 = N0 / g_c`.
    pub noise_to_channel_power: f64,
    pub harvested_power: f64,
    pub target_pd: f64,
    pub target_pf: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            prior_idle: 0.75,
            prior_busy: 0.25,
            bandwidth: 6e6,
            backscatter_rate: 5e4,
            partial_throughput_factor: 1.0,
            sensing_power: 1e-3,
            circuit_power: 1e-4,
            pu_tx_power: 1.7e4,
            interference_gain_ratio: 0.5e-3,
            noise_to_channel_power: 0.1,
            harvested_power: 0.25,
            target_pd: 0.9,
            target_pf: 0.1,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        open_unit("prior_idle", self.prior_idle)?;
        open_unit("prior_busy", self.prior_busy)?;
        if (self.prior_idle + self.prior_busy - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "prior_busy",
                format!(
                    "priors must sum to 1 (got {} + {})",
                    self.prior_idle, self.prior_busy
                ),
            ));
        }
        positive("bandwidth", self.bandwidth)?;
        non_negative("backscatter_rate", self.backscatter_rate)?;
        if !(0.0..=1.0).contains(&self.partial_throughput_factor) {
            return Err(Error::param(
                "partial_throughput_factor",
                format!("{} not in [0, 1]", self.partial_throughput_factor),
            ));
        }
        positive("sensing_power", self.sensing_power)?;
        non_negative("circuit_power", self.circuit_power)?;
        positive("pu_tx_power", self.pu_tx_power)?;
        non_negative("interference_gain_ratio", self.interference_gain_ratio)?;
        positive("noise_to_channel_power", self.noise_to_channel_power)?;
        positive("harvested_power", self.harvested_power)?;
        open_unit("target_pd", self.target_pd)?;
        open_unit("target_pf", self.target_pf)
    }

    /// Noise-plus-interference floor seen by a transmission over an active PU.
    pub fn interference_floor(&self) -> f64 {
        self.interference_gain_ratio * self.pu_tx_power + self.noise_to_channel_power
    }
}

/// Inputs to the Friis link budget for the harvested power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriisParams {
    pub harvesting_efficiency: f64,
    /// Linear transmit antenna gain.
    pub tx_gain: f64,
    /// Linear receive antenna gain.
    pub rx_gain: f64,
    /// Wavelength in meters.
    pub wavelength: f64,
    /// PT-ST distance in meters.
    pub distance: f64,
}

impl FriisParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.harvesting_efficiency) {
            return Err(Error::param(
                "harvesting_efficiency",
                format!("{} not in [0, 1]", self.harvesting_efficiency),
            ));
        }
        positive("tx_gain", self.tx_gain)?;
        positive("rx_gain", self.rx_gain)?;
        positive("wavelength", self.wavelength)?;
        positive("distance", self.distance)
    }
}

/// Normalized frame allocation: `1 - tau` sensing, `tau` data; within the
/// data slot `alpha` harvests when the PU is declared busy and `mu` transmits
/// when it is declared idle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSplit {
    pub tau: f64,
    pub alpha: f64,
    pub mu: f64,
}

impl TimeSplit {
    pub fn new(tau: f64, alpha: f64, mu: f64) -> Result<Self> {
        let t = Self { tau, alpha, mu };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::param("tau", format!("{} not in (0, 1)", self.tau)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param("alpha", format!("{} not in [0, 1]", self.alpha)));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::param("mu", format!("{} not in (0, 1]", self.mu)));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{v} must be positive")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{v} must be non-negative")))
    }
}

fn open_unit(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("{v} not in (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        NetworkParams::default().validate().unwrap();
        SensingParams::default().validate().unwrap();
        assert!((SensingParams::default().snr - 0.1).abs() < 1e-15);
    }

    #[test]
    fn priors_must_sum_to_one() {
        let n = NetworkParams {
            prior_busy: 0.3,
            ..NetworkParams::default()
        };
        match n.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "prior_busy"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_bandwidth_names_field() {
        let n = NetworkParams {
            bandwidth: -1.0,
            ..NetworkParams::default()
        };
        let err = n.validate().unwrap_err();
        assert!(err.to_string().contains("bandwidth"), "{err}");
    }

    #[test]
    fn time_split_bounds() {
        assert!(TimeSplit::new(0.5, 0.0, 1.0).is_ok());
        assert!(TimeSplit::new(0.0, 0.5, 1.0).is_err());
        assert!(TimeSplit::new(1.0, 0.5, 1.0).is_err());
        assert!(TimeSplit::new(0.5, 1.1, 1.0).is_err());
        assert!(TimeSplit::new(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn sensing_rejects_zero_samples() {
        assert!(SensingParams::new(0, 0.1, 1.0, 1.0).is_err());
        assert!(SensingParams::new(10, -0.1, 1.0, 1.0).is_err());
    }
}
