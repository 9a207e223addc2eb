//! Frame-level Monte Carlo of the sensing outcomes and Table-style
//! accounting.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_tau, scenario_table_with, Detection, NetworkParams, SensingParams, TimeSplit,
};
use crate::special::q;

/// Frames drawn from one random stream.
pub const BLOCK_FRAMES: u64 = 1 << 16;
/// Beyond this, frame counts stop being exact in `f64`.
pub const MAX_FRAMES: u64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    GaussianApprox,
    ExactChiSquare,
}

impl DetectorKind {
    pub fn model(self) -> &'static dyn DetectorModel {
        match self {
            DetectorKind::GaussianApprox => &GaussianApprox,
            DetectorKind::ExactChiSquare => &ExactChiSquare,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [DetectorKind::GaussianApprox, DetectorKind::ExactChiSquare]
            .into_iter()
            .find(|k| k.model().name() == name)
            .ok_or_else(|| Error::Unknown {
                kind: "detector model",
                name: name.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// PU idle.
    H0,
    /// PU active.
    H1,
}

/// Draws one frame's energy statistic.
pub type Sampler = Box<dyn Fn(&mut ChaCha8Rng, Hypothesis) -> f64 + Send + Sync>;

pub trait DetectorModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn sampler(&self, s: &SensingParams, tau: f64) -> Result<Sampler>;
}

/// Mean and variance of the Gaussian statistic that reproduces the analytic
/// false-alarm and detection probabilities exactly.
pub fn detector_statistic_moments(
    s: &SensingParams,
    tau: f64,
    hypothesis: Hypothesis,
) -> Result<(f64, f64)> {
    check_tau("detector_statistic_moments", tau)?;
    let n = s.effective_samples(tau);
    let var0 = s.noise_variance * s.noise_variance / n;
    Ok(match hypothesis {
        Hypothesis::H0 => (s.noise_variance, var0),
        Hypothesis::H1 => (s.noise_variance * (1.0 + s.snr), var0 * (2.0 * s.snr + 1.0)),
    })
}

pub struct GaussianApprox;

impl DetectorModel for GaussianApprox {
    fn name(&self) -> &'static str {
        "gaussian_approx"
    }

    fn sampler(&self, s: &SensingParams, tau: f64) -> Result<Sampler> {
        let (m0, v0) = detector_statistic_moments(s, tau, Hypothesis::H0)?;
        let (m1, v1) = detector_statistic_moments(s, tau, Hypothesis::H1)?;
        let (sd0, sd1) = (v0.sqrt(), v1.sqrt());
        Ok(Box::new(move |rng, h| {
            let z: f64 = rng.sample(StandardNormal);
            match h {
                Hypothesis::H0 => m0 + sd0 * z,
                Hypothesis::H1 => m1 + sd1 * z,
            }
        }))
    }
}

/// Average of `(1 - tau) Ns` squared complex Gaussian samples, scaled by
/// `1 + gamma` under H1.
pub struct ExactChiSquare;

impl DetectorModel for ExactChiSquare {
    fn name(&self) -> &'static str {
        "exact_chi_square"
    }

    fn sampler(&self, s: &SensingParams, tau: f64) -> Result<Sampler> {
        check_tau("exact_chi_square", tau)?;
        let n = s.effective_samples(tau);
        let gamma = Gamma::new(n, 1.0)
            .map_err(|e| Error::domain("exact_chi_square", e.to_string()))?;
        let scale0 = s.noise_variance / n;
        let scale1 = scale0 * (1.0 + s.snr);
        Ok(Box::new(move |rng, h| {
            let g: f64 = rng.sample(gamma);
            match h {
                Hypothesis::H0 => scale0 * g,
                Hypothesis::H1 => scale1 * g,
            }
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_frames: u64,
    pub seed: u64,
    pub detector_model: DetectorKind,
}

impl SimConfig {
    pub fn new(num_frames: u64, seed: u64) -> Self {
        Self {
            num_frames,
            seed,
            detector_model: DetectorKind::GaussianApprox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub pf: f64,
    pub pd: f64,
    pub throughput: f64,
    pub energy: f64,
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub empirical_pf: f64,
    pub empirical_pd: f64,
    /// Mean throughput per frame in bits/Hz.
    pub mean_throughput: f64,
    /// Mean energy per frame in joules.
    pub mean_energy: f64,
    /// bits/Hz/J.
    pub empirical_ee: f64,
    pub standard_errors: StandardErrors,
    /// Frames in S1..S4.
    pub scenario_counts: [u64; 4],
    pub chi_square: f64,
    pub chi_square_dof: u32,
    pub chi_square_p_value: f64,
}

const CSV_HEADER: [&str; 18] = [
    "num_frames",
    "seed",
    "detector_model",
    "empirical_pf",
    "empirical_pd",
    "mean_throughput",
    "mean_energy",
    "empirical_ee",
    "se_pf",
    "se_pd",
    "se_throughput",
    "se_energy",
    "se_ee",
    "count_s1",
    "count_s2",
    "count_s3",
    "count_s4",
    "chi_square_p_value",
];

impl SimResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let se = &self.standard_errors;
        let c = &self.scenario_counts;
        let mut out = csv::Writer::from_writer(w);
        let row = [
            self.config.num_frames.to_string(),
            self.config.seed.to_string(),
            self.config.detector_model.model().name().to_string(),
            self.empirical_pf.to_string(),
            self.empirical_pd.to_string(),
            self.mean_throughput.to_string(),
            self.mean_energy.to_string(),
            self.empirical_ee.to_string(),
            se.pf.to_string(),
            se.pd.to_string(),
            se.throughput.to_string(),
            se.energy.to_string(),
            se.ee.to_string(),
            c[0].to_string(),
            c[1].to_string(),
            c[2].to_string(),
            c[3].to_string(),
            self.chi_square_p_value.to_string(),
        ];
        out.write_record(CSV_HEADER)
            .and_then(|_| out.write_record(&row))
            .map_err(|e| Error::Io(e.to_string()))?;
        out.flush()?;
        Ok(())
    }
}

/// Simulate `c.num_frames` frames at threshold `s.threshold` and split `t`.
///
/// Frames are drawn in fixed blocks, each from its own ChaCha stream, so the
/// result does not depend on how blocks are scheduled across threads.
pub fn simulate(
    n: &NetworkParams,
    s: &SensingParams,
    t: &TimeSplit,
    c: &SimConfig,
) -> Result<SimResult> {
    n.validate()?;
    s.validate()?;
    t.validate()?;
    if c.num_frames == 0 {
        return Err(Error::param("num_frames", "must be >= 1"));
    }
    if c.num_frames > MAX_FRAMES {
        return Err(Error::Resource(format!(
            "{} frames exceeds the supported maximum of {MAX_FRAMES}",
            c.num_frames
        )));
    }
    let sampler = c.detector_model.model().sampler(s, t.tau)?;
    let blocks = c.num_frames.div_ceil(BLOCK_FRAMES);

    let per_block: Vec<[u64; 4]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            rng.set_stream(b);
            let frames = BLOCK_FRAMES.min(c.num_frames - b * BLOCK_FRAMES);
            let mut counts = [0u64; 4];
            for _ in 0..frames {
                let busy = rng.random::<f64>() < n.prior_busy;
                let h = if busy { Hypothesis::H1 } else { Hypothesis::H0 };
                let declared_busy = sampler(&mut rng, h) > s.threshold;
                let idx = match (busy, declared_busy) {
                    (true, true) => 0,
                    (false, true) => 1,
                    (true, false) => 2,
                    (false, false) => 3,
                };
                counts[idx] += 1;
            }
            counts
        })
        .collect();
    let mut counts = [0u64; 4];
    for block in &per_block {
        for (acc, v) in counts.iter_mut().zip(block) {
            *acc += v;
        }
    }
    Ok(summarize(n, s, t, c, counts))
}

fn summarize(
    n: &NetworkParams,
    s: &SensingParams,
    t: &TimeSplit,
    c: &SimConfig,
    counts: [u64; 4],
) -> SimResult {
    let analytic = Detection::from_sensing(s, t.tau);
    let rows = scenario_table_with(n, analytic, t);
    let total = c.num_frames as f64;
    let freq: Vec<f64> = counts.iter().map(|&k| k as f64 / total).collect();

    let thr: Vec<f64> = rows.iter().map(|r| r.throughput / n.bandwidth).collect();
    let en: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    let mean = |v: &[f64]| freq.iter().zip(v).map(|(f, x)| f * x).sum::<f64>();
    let mean_throughput = mean(&thr);
    let mean_energy = mean(&en);
    let cross: Vec<f64> = thr.iter().zip(&en).map(|(a, b)| a * b).collect();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let var_t = (mean(&sq(&thr)) - mean_throughput * mean_throughput).max(0.0);
    let var_e = (mean(&sq(&en)) - mean_energy * mean_energy).max(0.0);
    let cov = mean(&cross) - mean_throughput * mean_energy;
    let ratio = mean_throughput / mean_energy;
    let var_ratio = ((var_t - 2.0 * ratio * cov + ratio * ratio * var_e) / (mean_energy * mean_energy)).max(0.0);

    let idle = counts[1] + counts[3];
    let busy = counts[0] + counts[2];
    let (pf, se_pf) = proportion(counts[1], idle);
    let (pd, se_pd) = proportion(counts[0], busy);

    let (chi_square, dof) = chi_square_statistic(&counts, &rows.map(|r| r.probability), total);

    SimResult {
        config: *c,
        empirical_pf: pf,
        empirical_pd: pd,
        mean_throughput,
        mean_energy,
        empirical_ee: ratio,
        standard_errors: StandardErrors {
            pf: se_pf,
            pd: se_pd,
            throughput: (var_t / total).sqrt(),
            energy: (var_e / total).sqrt(),
            ee: (var_ratio / total).sqrt(),
        },
        scenario_counts: counts,
        chi_square,
        chi_square_dof: dof,
        chi_square_p_value: chi_square_survival(chi_square, dof),
    }
}

fn proportion(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Pearson statistic over the categories with positive expected count.
fn chi_square_statistic(counts: &[u64; 4], probs: &[f64; 4], total: f64) -> (f64, u32) {
    let mut x = 0.0;
    let mut cats = 0u32;
    for (&k, &p) in counts.iter().zip(probs) {
        let expected = p * total;
        if expected > 0.0 {
            let d = k as f64 - expected;
            x += d * d / expected;
            cats += 1;
        }
    }
    (x, cats.saturating_sub(1))
}

/// Upper tail of the chi-square distribution with integer `dof`.
pub fn chi_square_survival(x: f64, dof: u32) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    let half = 0.5 * x;
    // Q_{k+2}(x) = Q_k(x) + (x/2)^{k/2} e^{-x/2} / Gamma(k/2 + 1).
    let (mut k, mut acc, mut term) = if dof % 2 == 1 {
        let t = (2.0 * x / PI).sqrt() * (-half).exp();
        (1u32, 2.0 * q(x.sqrt()), t)
    } else {
        (2u32, (-half).exp(), half * (-half).exp())
    };
    while k < dof {
        acc += term;
        term *= half / (0.5 * f64::from(k) + 1.0);
        k += 2;
    }
    acc.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_reproduce_detector() {
        let s = SensingParams::new(2000, 0.1, 1.0, 1.06).unwrap();
        let tau = 0.4;
        let (m0, v0) = detector_statistic_moments(&s, tau, Hypothesis::H0).unwrap();
        let (m1, v1) = detector_statistic_moments(&s, tau, Hypothesis::H1).unwrap();
        let pf = q((s.threshold - m0) / v0.sqrt());
        let pd = q((s.threshold - m1) / v1.sqrt());
        let det = Detection::from_sensing(&s, tau);
        assert!((pf - det.pf).abs() < 1e-12);
        assert!((pd - det.pd).abs() < 1e-12);
        assert!(v1 > v0);
    }

    #[test]
    fn chi_square_survival_references() {
        // Values from the regularized upper incomplete gamma function.
        assert!((chi_square_survival(7.814_727_903_251_178, 3) - 0.05).abs() < 1e-12);
        assert!((chi_square_survival(3.841_458_820_694_128_5, 1) - 0.05).abs() < 1e-12);
        assert!((chi_square_survival(5.991_464_547_107_983, 2) - 0.05).abs() < 1e-12);
        assert!((chi_square_survival(9.487_729_036_781_158, 4) - 0.05).abs() < 1e-12);
        assert!((chi_square_survival(11.070_497_693_516_355, 5) - 0.05).abs() < 1e-12);
        assert_eq!(chi_square_survival(0.0, 3), 1.0);
    }

    #[test]
    fn frame_limits() {
        let n = NetworkParams::default();
        let s = SensingParams::default();
        let t = TimeSplit::new(0.5, 0.3, 1.0).unwrap();
        assert!(matches!(
            simulate(&n, &s, &t, &SimConfig::new(u64::MAX, 1)),
            Err(Error::Resource(_))
        ));
        assert!(simulate(&n, &s, &t, &SimConfig::new(0, 1)).is_err());
    }

    #[test]
    fn detector_names_roundtrip() {
        for k in [DetectorKind::GaussianApprox, DetectorKind::ExactChiSquare] {
            assert_eq!(DetectorKind::from_name(k.model().name()).unwrap(), k);
        }
        assert!(DetectorKind::from_name("matched_filter").is_err());
    }

    #[test]
    fn counts_and_identities() {
        let n = NetworkParams::default();
        let s = SensingParams::default().with_threshold(1.06);
        let t = TimeSplit::new(0.5, 0.3, 1.0).unwrap();
        let r = simulate(&n, &s, &t, &SimConfig::new(100_003, 9)).unwrap();
        assert_eq!(r.scenario_counts.iter().sum::<u64>(), 100_003);
        assert!((r.empirical_ee - r.mean_throughput / r.mean_energy).abs() <= 1e-12 * r.empirical_ee);
    }
}
