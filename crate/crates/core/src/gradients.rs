//! Analytic derivatives of the detector probabilities and of the energy
//! efficiency with respect to the harvesting fraction.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    alpha_dagger, check_tau, evaluate, log2_1p, pd_arg, pf_arg, Detection,
    NetworkParams, SensingParams, TimeSplit,
};
use crate::special::normal_pdf;

/// Closest approach to `tau = 1` accepted by [`dpf_dtau`].
pub const TAU_DERIVATIVE_LIMIT: f64 = 1.0 - 1e-6;

/// `dPf/d eps`; never positive.
pub fn dpf_deps(s: &SensingParams, tau: f64) -> Result<f64> {
    check_tau("dpf_deps", tau)?;
    let n = s.effective_samples(tau);
    Ok(-normal_pdf(pf_arg(s, tau)) * n.sqrt() / s.noise_variance)
}

/// `dPd/d eps`; never positive.
pub fn dpd_deps(s: &SensingParams, tau: f64) -> Result<f64> {
    check_tau("dpd_deps", tau)?;
    let n = s.effective_samples(tau) / (2.0 * s.snr + 1.0);
    Ok(-normal_pdf(pd_arg(s, tau)) * n.sqrt() / s.noise_variance)
}

/// `dPf/d tau` at a fixed threshold.
pub fn dpf_dtau(s: &SensingParams, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= TAU_DERIVATIVE_LIMIT) {
        return Err(Error::domain(
            "dpf_dtau",
            format!("tau = {tau} not in (0, {TAU_DERIVATIVE_LIMIT}]"),
        ));
    }
    let ns = f64::from(s.num_samples);
    let r = s.threshold / s.noise_variance - 1.0;
    let z = pf_arg(s, tau);
    Ok(r * (ns / (8.0 * PI * (1.0 - tau))).sqrt() * (-0.5 * z * z).exp())
}

/// Pieces of the EE numerator and denominator as functions of `alpha`.
struct AlphaTerms {
    rate: f64,
    rate_slope: f64,
    energy: f64,
    energy_slope: f64,
}

fn alpha_terms(n: &NetworkParams, det: Detection, t: &TimeSplit) -> AlphaTerms {
    let (tau, mu) = (t.tau, t.mu);
    let p1 = n.prior_busy;
    let p0 = n.prior_idle;
    let p3 = n.interference_floor();
    let pn = n.noise_to_channel_power;
    let fixed = mu * tau * n.circuit_power + n.sensing_power * (1.0 - tau);

    let y1 = 1.0 - fixed / (p3 * mu * tau);
    let y2 = n.harvested_power / (p3 * mu);
    let y3 = 1.0 - n.circuit_power / pn - n.sensing_power * (1.0 - tau) / (pn * tau * mu);
    let y4 = n.harvested_power / (pn * mu);

    let slot = mu * tau * n.bandwidth / LN_2;
    let c3 = n.partial_throughput_factor * p1 * (1.0 - det.pd) * slot;
    let c4 = p0 * (1.0 - det.pf) * slot;
    let rate_slope = c3 * y2 / (y1 + t.alpha * y2) - p1 * det.pd * tau * n.backscatter_rate
        + c4 * y4 / (y3 + t.alpha * y4);

    let b = evaluate(n, det, t);
    let q = p1 * (1.0 - det.pd) + p0 * (1.0 - det.pf);
    AlphaTerms {
        rate: b.throughput(),
        rate_slope,
        energy: b.energy,
        energy_slope: tau * n.harvested_power * q,
    }
}

fn check_alpha(op: &'static str, n: &NetworkParams, t: &TimeSplit) -> Result<()> {
    let ad = alpha_dagger(n, t);
    if t.alpha < ad || t.alpha > 1.0 {
        return Err(Error::domain(
            op,
            format!("alpha = {} outside [{ad}, 1]", t.alpha),
        ));
    }
    check_tau(op, t.tau)
}

/// `dEE/d alpha` in bits/Hz/J on the HTT-feasible range `[alpha_dagger, 1]`,
/// accounting for the transmit energy growing with `alpha`.
pub fn dee_dalpha(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> Result<f64> {
    check_alpha("dee_dalpha", n, t)?;
    Ok(dee_dalpha_with(n, Detection::from_sensing(s, t.tau), t))
}

pub(crate) fn dee_dalpha_with(n: &NetworkParams, det: Detection, t: &TimeSplit) -> f64 {
    let a = alpha_terms(n, det, t);
    (a.rate_slope * a.energy - a.rate * a.energy_slope) / (a.energy * a.energy) / n.bandwidth
}

/// Sign-carrying numerator of [`dee_dalpha`]; cheaper and free of the
/// energy scaling.
pub(crate) fn dee_dalpha_numerator(n: &NetworkParams, det: Detection, t: &TimeSplit) -> f64 {
    let a = alpha_terms(n, det, t);
    a.rate_slope * a.energy - a.rate * a.energy_slope
}

/// `dEE/d alpha` with the average energy frozen at its value for `t`: the
/// three-term expression obtained when the denominator is treated as
/// constant in `alpha`.
pub fn dee_dalpha_fixed_energy(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> Result<f64> {
    check_alpha("dee_dalpha_fixed_energy", n, t)?;
    let a = alpha_terms(n, Detection::from_sensing(s, t.tau), t);
    Ok(a.rate_slope / a.energy / n.bandwidth)
}

/// Stationary point of the fixed-energy surrogate with interference
/// neglected. Diagnostic only; may fall outside `[alpha_dagger, 1]`.
pub fn alpha_star_fixed_energy(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> f64 {
    let det = Detection::from_sensing(s, t.tau);
    let pn = n.noise_to_channel_power;
    let c = n.partial_throughput_factor * n.prior_busy * (1.0 - det.pd)
        + n.prior_idle * (1.0 - det.pf);
    let y3 = 1.0 - n.circuit_power / pn - n.sensing_power * (1.0 - t.tau) / (pn * t.tau * t.mu);
    let y4 = n.harvested_power / (pn * t.mu);
    c * t.mu * n.bandwidth / (n.prior_busy * det.pd * n.backscatter_rate * LN_2) - y3 / y4
}

/// Sufficient condition under which EE decreases in the threshold, so the
/// detection constraint is active at the optimum.
pub fn threshold_monotonicity_condition(
    n: &NetworkParams,
    s: &SensingParams,
    t: &TimeSplit,
) -> bool {
    let b = evaluate(n, Detection::from_sensing(s, t.tau), t);
    let ptr = if b.htt_feasible { b.ptr.max(0.0) } else { 0.0 };
    let lhs = n.bandwidth
        * n.partial_throughput_factor
        * log2_1p(ptr / n.noise_to_channel_power);
    let rhs = (1.0 - t.alpha) * n.backscatter_rate / (b.energy * t.mu)
        + ptr * b.throughput() / (b.energy * b.energy);
    lhs >= rhs
}

/// The four derivatives at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBundle {
    pub dpf_deps: f64,
    pub dpd_deps: f64,
    pub dpf_dtau: f64,
    pub dee_dalpha: f64,
}

impl GradientBundle {
    pub fn at(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> Result<Self> {
        Ok(Self {
            dpf_deps: dpf_deps(s, t.tau)?,
            dpd_deps: dpd_deps(s, t.tau)?,
            dpf_dtau: dpf_dtau(s, t.tau)?,
            dee_dalpha: dee_dalpha(n, s, t)?,
        })
    }

    /// Whether `dPd/d eps >= dPf/d eps` at this point.
    ///
    /// Holds when `z_f^2 <= z_d^2 + ln(2 gamma + 1)` for the two Q-function
    /// arguments, in particular at `eps <= sigma^2`, but not for every
    /// threshold.
    pub fn ordering_holds(&self) -> bool {
        self.dpd_deps >= self.dpf_deps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy_efficiency, prob_false_alarm};

    fn sensing(eps: f64) -> SensingParams {
        SensingParams::new(2000, 0.1, 1.0, eps).unwrap()
    }

    #[test]
    fn dpf_deps_peak_at_noise_floor() {
        let s = sensing(1.0);
        let n = s.effective_samples(0.5);
        let g = dpf_deps(&s, 0.5).unwrap();
        assert!((g + n.sqrt() / (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dpd_matches_dpf_without_signal() {
        let s = SensingParams::new(2000, 1e-12, 1.0, 1.03).unwrap();
        let a = dpf_deps(&s, 0.4).unwrap();
        let b = dpd_deps(&s, 0.4).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn dpf_dtau_positive_above_noise_floor() {
        let s = sensing(1.05);
        assert!(dpf_dtau(&s, 0.3).unwrap() > 0.0);
        assert!(dpf_dtau(&s, TAU_DERIVATIVE_LIMIT).unwrap().is_finite());
        assert!(dpf_dtau(&s, 1.0 - 1e-7).is_err());
        let h = 1e-6;
        let fd = (prob_false_alarm(&s, 0.3 + h).unwrap() - prob_false_alarm(&s, 0.3 - h).unwrap())
            / (2.0 * h);
        assert!((fd - dpf_dtau(&s, 0.3).unwrap()).abs() < 1e-6 * fd.abs());
    }

    #[test]
    fn dee_dalpha_domain() {
        let n = NetworkParams::default();
        let s = sensing(1.05);
        assert!(dee_dalpha(&n, &s, &TimeSplit::new(0.5, 1e-4, 1.0).unwrap()).is_err());
        assert!(dee_dalpha(&n, &s, &TimeSplit::new(0.5, 0.3, 1.0).unwrap()).is_ok());
    }

    #[test]
    fn dee_dalpha_matches_difference_quotient() {
        let n = NetworkParams::default();
        let s = sensing(1.055);
        for alpha in [0.01, 0.05, 0.2, 0.7, 0.95] {
            let t = TimeSplit::new(0.5, alpha, 1.0).unwrap();
            let h = 1e-7;
            let ee = |a: f64| energy_efficiency(&n, &s, &TimeSplit { alpha: a, ..t }).ee;
            let fd = (ee(alpha + h) - ee(alpha - h)) / (2.0 * h);
            let an = dee_dalpha(&n, &s, &t).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "alpha {alpha}: {fd} vs {an}");
        }
    }

    #[test]
    fn threshold_condition_edges() {
        let n = NetworkParams {
            backscatter_rate: 0.0,
            ..NetworkParams::default()
        };
        let s = sensing(1.05);
        let t = TimeSplit::new(0.5, 0.0, 1.0).unwrap();
        let ad = alpha_dagger(&n, &t);
        assert!(threshold_monotonicity_condition(&n, &s, &TimeSplit { alpha: ad, ..t }));

        let tiny = NetworkParams {
            bandwidth: 1e-9,
            ..NetworkParams::default()
        };
        assert!(!threshold_monotonicity_condition(
            &tiny,
            &s,
            &TimeSplit::new(0.5, 0.3, 1.0).unwrap()
        ));
    }

    #[test]
    fn ordering_depends_on_threshold() {
        let s = sensing(1.0);
        let t = TimeSplit::new(0.5, 0.3, 1.0).unwrap();
        let n = NetworkParams::default();
        assert!(GradientBundle::at(&n, &s, &t).unwrap().ordering_holds());
        let at_signal_mean = sensing(1.1);
        assert!(!GradientBundle::at(&n, &at_signal_mean, &t).unwrap().ordering_holds());
    }
}
