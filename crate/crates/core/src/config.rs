//! JSON experiment configuration.
//!
//! Every key is optional; absent keys take the reference values below.
//!
//! ```json
//! {
//!   "num_samples": 2000, "snr_db": -10, "noise_variance": 1,
//!   "target_pd": 0.9, "target_pf": 0.1, "prior_idle": 0.75, "prior_busy": 0.25,
//!   "bandwidth": 6e6, "backscatter_rate": 5e4, "partial_throughput_factor": 1,
//!   "sensing_power": 1e-3, "circuit_power": 1e-4, "pu_tx_power": 1.7e4,
//!   "interference_gain_ratio": 5e-4, "noise_to_channel_power": 0.1,
//!   "harvested_power": 0.25,
//!   "friis": { "harvesting_efficiency": 0.6, "tx_gain_dbi": 6, "rx_gain_dbi": 6,
//!              "distance": 2475, "wavelength": 38.677 },
//!   "tau": 0.5, "alpha": 0.3, "mu": 1,
//!   "sweep": { "axis": "snr_db", "values": [-10, -8, -6] },
//!   "modes": ["hybrid", "abc_only", "htt_only", "no_sensing_errors"],
//!   "output_path": "out.csv", "seed": 0
//! }
//! ```
//!
//! A `friis` block replaces `harvested_power` with the Friis budget; giving
//! both is an error.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    db_to_linear, friis_harvested_power, friis_wavelength_for, FriisParams, NetworkParams,
    SensingParams,
};
use crate::modes::ModeRegistry;

pub const DEFAULT_SNR_DB: f64 = -10.0;
pub const DEFAULT_NUM_SAMPLES: u32 = 2000;
pub const DEFAULT_NOISE_VARIANCE: f64 = 1.0;

/// Friis inputs as they appear in the file, gains in dBi.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawFriis {
    pub harvesting_efficiency: Option<f64>,
    pub tx_gain_dbi: Option<f64>,
    pub rx_gain_dbi: Option<f64>,
    pub wavelength: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub axis: String,
    pub values: Vec<f64>,
}

/// The file as written, before defaults are filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub num_samples: Option<u32>,
    pub snr_db: Option<f64>,
    pub noise_variance: Option<f64>,
    pub target_pd: Option<f64>,
    pub target_pf: Option<f64>,
    pub prior_idle: Option<f64>,
    pub prior_busy: Option<f64>,
    pub bandwidth: Option<f64>,
    pub backscatter_rate: Option<f64>,
    pub partial_throughput_factor: Option<f64>,
    pub sensing_power: Option<f64>,
    pub circuit_power: Option<f64>,
    pub pu_tx_power: Option<f64>,
    pub interference_gain_ratio: Option<f64>,
    pub noise_to_channel_power: Option<f64>,
    pub harvested_power: Option<f64>,
    pub friis: Option<RawFriis>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub sweep: Option<RawSweep>,
    pub modes: Option<Vec<String>>,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Tau,
    Alpha,
    SnrDb,
    NumSamples,
    TargetPd,
    BackscatterRate,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::Tau,
        SweepAxis::Alpha,
        SweepAxis::SnrDb,
        SweepAxis::NumSamples,
        SweepAxis::TargetPd,
        SweepAxis::BackscatterRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Tau => "tau",
            SweepAxis::Alpha => "alpha",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NumSamples => "num_samples",
            SweepAxis::TargetPd => "target_pd",
            SweepAxis::BackscatterRate => "backscatter_rate",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
                Error::config(
                    "sweep.axis",
                    format!("unknown axis `{name}` (expected one of {})", known.join(", ")),
                )
            })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Fixed operating point overrides; unset parts are optimized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
}

/// Fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub network: NetworkParams,
    pub sensing: SensingParams,
    pub snr_db: f64,
    pub friis: Option<FriisParams>,
    pub operating_point: OperatingPoint,
    pub sweep: Option<Sweep>,
    pub modes: Vec<String>,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let snr = db_to_linear(snr_db);
        Self {
            snr_db,
            sensing: SensingParams {
                snr,
                threshold: self.sensing.noise_variance * (1.0 + snr),
                ..self.sensing
            },
            ..self.clone()
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        RawConfig::default().resolve().expect("defaults are valid")
    }
}

pub fn default_modes() -> Vec<String> {
    ["hybrid", "abc_only", "htt_only", "no_sensing_errors"]
        .map(String::from)
        .to_vec()
}

/// Reference Friis setup: 6 dBi antennas at 2475 m, wavelength chosen so that
/// a 17 kW PU delivers 0.25 W.
pub fn default_friis() -> FriisParams {
    let g = db_to_linear(6.0);
    FriisParams {
        harvesting_efficiency: 0.6,
        tx_gain: g,
        rx_gain: g,
        wavelength: friis_wavelength_for(0.6, g, g, 2475.0, 1.7e4, 0.25),
        distance: 2475.0,
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path == "." || path.is_empty() {
                unknown_field(&inner.to_string()).unwrap_or_else(|| "<root>".to_string())
            } else {
                path
            };
            Error::Config {
                field,
                reason: inner.to_string(),
            }
        })
    }

    /// Fill defaults and validate.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let d = NetworkParams::default();
        let (prior_idle, prior_busy) = match (self.prior_idle, self.prior_busy) {
            (Some(i), Some(b)) => (i, b),
            (Some(i), None) => (i, 1.0 - i),
            (None, Some(b)) => (1.0 - b, b),
            (None, None) => (d.prior_idle, d.prior_busy),
        };
        let pu_tx_power = self.pu_tx_power.unwrap_or(d.pu_tx_power);

        let friis = match self.friis {
            None => None,
            Some(f) => {
                if self.harvested_power.is_some() {
                    return Err(Error::config(
                        "harvested_power",
                        "give either harvested_power or a friis block, not both",
                    ));
                }
                let base = default_friis();
                let resolved = FriisParams {
                    harvesting_efficiency: f
                        .harvesting_efficiency
                        .unwrap_or(base.harvesting_efficiency),
                    tx_gain: f.tx_gain_dbi.map(db_to_linear).unwrap_or(base.tx_gain),
                    rx_gain: f.rx_gain_dbi.map(db_to_linear).unwrap_or(base.rx_gain),
                    wavelength: f.wavelength.unwrap_or(base.wavelength),
                    distance: f.distance.unwrap_or(base.distance),
                };
                resolved.validate().map_err(|e| prefixed("friis", e))?;
                Some(resolved)
            }
        };
        let harvested_power = match friis {
            Some(f) => friis_harvested_power(&f, pu_tx_power).map_err(|e| prefixed("friis", e))?,
            None => self.harvested_power.unwrap_or(d.harvested_power),
        };

        let network = NetworkParams {
            prior_idle,
            prior_busy,
            bandwidth: self.bandwidth.unwrap_or(d.bandwidth),
            backscatter_rate: self.backscatter_rate.unwrap_or(d.backscatter_rate),
            partial_throughput_factor: self
                .partial_throughput_factor
                .unwrap_or(d.partial_throughput_factor),
            sensing_power: self.sensing_power.unwrap_or(d.sensing_power),
            circuit_power: self.circuit_power.unwrap_or(d.circuit_power),
            pu_tx_power,
            interference_gain_ratio: self
                .interference_gain_ratio
                .unwrap_or(d.interference_gain_ratio),
            noise_to_channel_power: self.noise_to_channel_power.unwrap_or(d.noise_to_channel_power),
            harvested_power,
            target_pd: self.target_pd.unwrap_or(d.target_pd),
            target_pf: self.target_pf.unwrap_or(d.target_pf),
        };
        network.validate().map_err(as_config)?;

        let snr_db = self.snr_db.unwrap_or(DEFAULT_SNR_DB);
        if !snr_db.is_finite() {
            return Err(Error::config("snr_db", format!("{snr_db} is not finite")));
        }
        let sensing = SensingParams::from_snr_db(
            self.num_samples.unwrap_or(DEFAULT_NUM_SAMPLES),
            snr_db,
            self.noise_variance.unwrap_or(DEFAULT_NOISE_VARIANCE),
        )
        .map_err(as_config)?;

        let operating_point = OperatingPoint {
            tau: self.tau,
            alpha: self.alpha,
            mu: self.mu,
        };
        check_open("tau", operating_point.tau, 0.0, 1.0, false)?;
        check_open("alpha", operating_point.alpha, 0.0, 1.0, true)?;
        if let Some(mu) = operating_point.mu {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::config("mu", format!("{mu} not in (0, 1]")));
            }
        }

        let sweep = self.sweep.as_ref().map(resolve_sweep).transpose()?;

        let modes = self.modes.clone().unwrap_or_else(default_modes);
        if modes.is_empty() {
            return Err(Error::config("modes", "must list at least one mode"));
        }
        let registry = ModeRegistry::builtin();
        for m in &modes {
            registry
                .get(m)
                .map_err(|_| Error::config("modes", format!("unknown mode `{m}`")))?;
        }

        Ok(ExperimentConfig {
            network,
            sensing,
            snr_db,
            friis,
            operating_point,
            sweep,
            modes,
            output_path: self.output_path.clone(),
            seed: self.seed.unwrap_or(0),
        })
    }
}

fn resolve_sweep(raw: &RawSweep) -> Result<Sweep> {
    let axis = SweepAxis::from_name(&raw.axis)?;
    if raw.values.is_empty() {
        return Err(Error::config("sweep.values", "must not be empty"));
    }
    if let Some(w) = raw.values.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::config(
            "sweep.values",
            format!("must be strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    if raw.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("sweep.values", "must be finite"));
    }
    let bad = |reason: &str| Err(Error::config("sweep.values", reason.to_string()));
    let all = |f: &dyn Fn(f64) -> bool| raw.values.iter().all(|&v| f(v));
    match axis {
        SweepAxis::Tau if !all(&|v| v > 0.0 && v < 1.0) => return bad("tau values must lie in (0, 1)"),
        SweepAxis::Alpha if !all(&|v| (0.0..=1.0).contains(&v)) => {
            return bad("alpha values must lie in [0, 1]")
        }
        SweepAxis::TargetPd if !all(&|v| v > 0.0 && v < 1.0) => {
            return bad("target_pd values must lie in (0, 1)")
        }
        SweepAxis::NumSamples if !all(&|v| v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)) => {
            return bad("num_samples values must be positive integers")
        }
        SweepAxis::BackscatterRate if !all(&|v| v >= 0.0) => {
            return bad("backscatter_rate values must be non-negative")
        }
        _ => {}
    }
    Ok(Sweep {
        axis,
        values: raw.values.clone(),
    })
}

fn check_open(field: &'static str, v: Option<f64>, lo: f64, hi: f64, closed: bool) -> Result<()> {
    match v {
        Some(x) if closed && !(x >= lo && x <= hi) => {
            Err(Error::config(field, format!("{x} not in [{lo}, {hi}]")))
        }
        Some(x) if !closed && !(x > lo && x < hi) => {
            Err(Error::config(field, format!("{x} not in ({lo}, {hi})")))
        }
        _ => Ok(()),
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::Config {
            field: field.to_string(),
            reason,
        },
        other => other,
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::Config {
            field: format!("{prefix}.{field}"),
            reason,
        },
        Error::Domain { reason, .. } => Error::Config {
            field: prefix.to_string(),
            reason,
        },
        other => other,
    }
}

fn unknown_field(msg: &str) -> Option<String> {
    let start = msg.find("unknown field `")? + "unknown field `".len();
    let end = msg[start..].find('`')?;
    Some(msg[start..start + end].to_string())
}

/// Read, parse and resolve a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    load_raw(path)?.resolve()
}

pub fn load_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
    RawConfig::parse(&text)
}
