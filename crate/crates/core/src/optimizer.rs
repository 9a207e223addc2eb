//! Optimal threshold, harvesting split and sensing time, and the final mode
//! selection.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::{dee_dalpha_numerator, threshold_monotonicity_condition};
use crate::model::{
    alpha_dagger, evaluate, pf_unchecked, transmit_power, Detection, NetworkParams,
    SensingParams, TimeSplit,
};
use crate::modes::{AbcOnly, Hybrid, ModePoint, OperatingMode, Regime};
use crate::special::{lambert_w0, q_inv, wright_omega};

/// Outer limits of the sensing-time search.
pub const TAU_MIN: f64 = 1e-3;
pub const TAU_MAX: f64 = 1.0 - 1e-3;

const PRESCAN_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;

/// Threshold that meets the detection target with equality at `tau`.
pub fn optimal_threshold(s: &SensingParams, tau: f64, target_pd: f64) -> Result<f64> {
    if !(target_pd > 0.0 && target_pd < 1.0) {
        return Err(Error::domain(
            "optimal_threshold",
            format!("target_pd = {target_pd} not in (0, 1)"),
        ));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain("optimal_threshold", format!("tau = {tau} not in (0, 1)")));
    }
    let n = s.effective_samples(tau);
    if n < 1.0 {
        return Err(Error::DegenerateSensing {
            effective_samples: n,
        });
    }
    let g = s.snr;
    Ok(s.noise_variance * ((g + 1.0) + ((2.0 * g + 1.0) / n).sqrt() * q_inv(target_pd)))
}

/// Whether the false-alarm probability at `s.threshold` meets the target.
pub fn check_pf_constraint(n: &NetworkParams, s: &SensingParams, tau: f64) -> bool {
    tau > 0.0 && tau < 1.0 && pf_unchecked(s, tau) <= n.target_pf
}

/// Largest data fraction for which the detection-constrained threshold still
/// meets the false-alarm target. Returns 1 when every `tau` qualifies.
pub fn tau_max(n: &NetworkParams, s: &SensingParams) -> f64 {
    let g = s.snr;
    let gap = q_inv(n.target_pf) - (2.0 * g + 1.0).sqrt() * q_inv(n.target_pd);
    if gap <= 0.0 {
        return 1.0;
    }
    let need = (gap / g).powi(2);
    1.0 - need / f64::from(s.num_samples)
}

/// Smallest `tau` at which harvesting can pay for sensing and circuit power
/// with `mu = 1`, or `None` when it never can.
pub fn tau_htt_min(n: &NetworkParams) -> Option<f64> {
    let margin = n.harvested_power - n.circuit_power + n.sensing_power;
    if n.harvested_power <= n.circuit_power {
        return None;
    }
    Some(n.sensing_power / margin)
}

/// Search interval for `tau`.
pub fn tau_bracket(
    n: &NetworkParams,
    s: &SensingParams,
    uses_htt: bool,
    pf_constrained: bool,
) -> Result<(f64, f64)> {
    let ns = f64::from(s.num_samples);
    let mut hi = TAU_MAX.min(1.0 - 1.0 / ns);
    if pf_constrained {
        hi = hi.min(tau_max(n, s));
    }
    let mut lo = TAU_MIN;
    if uses_htt {
        let Some(t) = tau_htt_min(n) else {
            return Err(Error::Infeasible(
                "harvested power cannot cover circuit power".into(),
            ));
        };
        lo = lo.max(t);
        let mut step = lo * f64::EPSILON;
        while alpha_dagger(n, &TimeSplit { tau: lo, alpha: 0.0, mu: 1.0 }) > 1.0 {
            lo += step;
            step *= 2.0;
        }
    }
    if pf_constrained && hi > lo {
        let mut step = hi * f64::EPSILON;
        loop {
            let eps = optimal_threshold(s, hi, n.target_pd)?;
            if pf_unchecked(&s.with_threshold(eps), hi) <= n.target_pf {
                break;
            }
            hi -= step;
            step *= 2.0;
            if hi <= lo {
                break;
            }
        }
    }
    if !(hi >= lo) {
        return Err(Error::Infeasible(format!(
            "no sensing time satisfies the constraints (tau in [{lo}, {hi}])"
        )));
    }
    Ok((lo, hi))
}

/// Transmit-slot fraction maximizing EE; always full occupancy.
pub fn optimal_mu(_n: &NetworkParams, _s: &SensingParams, _t: &TimeSplit) -> f64 {
    1.0
}

/// Backscatter rates for which the optimal split is interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbWindow {
    pub lower: f64,
    pub upper: f64,
}

impl BbWindow {
    pub fn contains(&self, rate: f64) -> bool {
        rate >= self.lower && rate <= self.upper
    }
}

/// Interval of backscatter rates with `dEE/d alpha >= 0` at `alpha_dagger`
/// and `<= 0` at `alpha = 1`.
pub fn bb_window(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> BbWindow {
    bb_window_with(n, Detection::from_sensing(s, t.tau), t.tau, t.mu)
}

pub(crate) fn bb_window_with(n: &NetworkParams, det: Detection, tau: f64, mu: f64) -> BbWindow {
    let p1 = n.prior_busy;
    let p0 = n.prior_idle;
    let pn = n.noise_to_channel_power;
    let p3 = n.interference_floor();
    let base = TimeSplit { tau, alpha: 1.0, mu };
    let ad = alpha_dagger(n, &base);
    let e0 = n.sensing_power * (1.0 - tau);
    let m = mu * tau * (p1 * (1.0 - det.pd) + p0 * (1.0 - det.pf));
    let slot = mu * tau * n.bandwidth / LN_2;
    let c3 = n.partial_throughput_factor * p1 * (1.0 - det.pd) * slot;
    let c4 = p0 * (1.0 - det.pf) * slot;
    let a = p1 * det.pd * tau * (1.0 - ad).max(0.0);
    let b = p1 * det.pd * tau * mu / n.harvested_power;
    let denom = b * e0 + m * a;
    if denom <= 0.0 {
        return BbWindow {
            lower: 0.0,
            upper: f64::INFINITY,
        };
    }
    let rate_at = |x: f64| {
        let energy = e0 + m * x;
        let slope = c3 / (p3 + x) + c4 / (pn + x);
        let level = c3 * (x / p3).ln_1p() + c4 * (x / pn).ln_1p();
        (energy * slope - m * level) / denom
    };
    let x1 = transmit_power(n, &base).max(0.0);
    BbWindow {
        lower: rate_at(x1),
        upper: rate_at(0.0),
    }
}

/// Where the chosen harvesting fraction sits in `[alpha_dagger, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaBound {
    Interior,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    pub alpha: f64,
    pub bound: AlphaBound,
}

/// EE-maximizing harvesting fraction on `[alpha_dagger, 1]` for the split
/// `t.tau`, `t.mu` (`t.alpha` is ignored).
pub fn optimal_alpha(n: &NetworkParams, s: &SensingParams, t: &TimeSplit) -> Result<AlphaStar> {
    optimal_alpha_with(n, Detection::from_sensing(s, t.tau), t.tau, t.mu)
}

pub(crate) fn optimal_alpha_with(
    n: &NetworkParams,
    det: Detection,
    tau: f64,
    mu: f64,
) -> Result<AlphaStar> {
    let at = |alpha: f64| TimeSplit { tau, alpha, mu };
    let lo = alpha_dagger(n, &at(0.0));
    if !(lo <= 1.0) {
        return Err(Error::Infeasible(format!(
            "harvesting cannot fund transmission at tau = {tau} (alpha_dagger = {lo})"
        )));
    }
    if lo == 1.0 {
        return Ok(AlphaStar {
            alpha: 1.0,
            bound: AlphaBound::Lower,
        });
    }

    let closed = closed_form_alpha(n, det, tau, mu, lo);
    if n.interference_floor() == n.noise_to_channel_power {
        return Ok(closed);
    }

    let f = |alpha: f64| dee_dalpha_numerator(n, det, &at(alpha));
    let (f_lo, f_hi) = (f(lo), f(1.0));
    if f_lo > 0.0 && f_hi < 0.0 {
        let seed = closed.alpha.clamp(lo, 1.0);
        let alpha = refine_root(&f, lo, 1.0, f_lo, f_hi, seed);
        return Ok(AlphaStar {
            alpha,
            bound: AlphaBound::Interior,
        });
    }
    let ee_lo = evaluate(n, det, &at(lo)).ee;
    let ee_hi = evaluate(n, det, &at(1.0)).ee;
    Ok(if ee_hi > ee_lo || (ee_hi == ee_lo && f_hi >= 0.0) {
        AlphaStar {
            alpha: 1.0,
            bound: AlphaBound::Upper,
        }
    } else {
        AlphaStar {
            alpha: lo,
            bound: AlphaBound::Lower,
        }
    })
}

/// Exact stationary point of EE in `alpha` with interference neglected.
///
/// Writing `x` for the transmit power and `s = 1 + x/P0`, the first-order
/// condition reduces to `ln s - k/s = beta`, solved by Lambert W.
fn closed_form_alpha(n: &NetworkParams, det: Detection, tau: f64, mu: f64, lo: f64) -> AlphaStar {
    let p1 = n.prior_busy;
    let p0 = n.prior_idle;
    let pn = n.noise_to_channel_power;
    let e0 = n.sensing_power * (1.0 - tau);
    let fixed = e0 + mu * tau * n.circuit_power;

    let m = mu * tau * (p1 * (1.0 - det.pd) + p0 * (1.0 - det.pf));
    let c = n.partial_throughput_factor * p1 * (1.0 - det.pd) + p0 * (1.0 - det.pf);
    let big_c = c * mu * tau * n.bandwidth / LN_2;
    let abc = p1 * det.pd * tau * n.backscatter_rate;
    let a0 = abc * (1.0 - lo);
    let b = abc * mu / n.harvested_power;

    let lower = AlphaStar {
        alpha: lo,
        bound: AlphaBound::Lower,
    };
    if m <= 0.0 || big_c <= 0.0 {
        return lower;
    }
    let beta = 1.0 - (b * e0 + m * a0) / (m * big_c);
    let k = e0 / (m * pn) - 1.0;
    let g = |s: f64| s.ln() - k / s - beta;

    let x1 = transmit_power(n, &TimeSplit { tau, alpha: 1.0, mu }).max(0.0);
    let s1 = 1.0 + x1 / pn;
    if g(1.0) >= 0.0 {
        return lower;
    }
    if g(s1) <= 0.0 {
        return AlphaStar {
            alpha: 1.0,
            bound: AlphaBound::Upper,
        };
    }

    let mut s = if k > 0.0 {
        k / wright_omega(k.ln() - beta)
    } else if k < 0.0 {
        lambert_w0(-(k.abs().ln() - beta).exp())
            .map(|t| k / t)
            .unwrap_or(f64::NAN)
    } else {
        beta.exp()
    };
    if !(s >= 1.0 && s <= s1) {
        s = bisect(&g, 1.0, s1);
    }
    let x = pn * (s - 1.0);
    let alpha = ((mu * tau * x + fixed) / (tau * n.harvested_power)).clamp(lo, 1.0);
    AlphaStar {
        alpha,
        bound: AlphaBound::Interior,
    }
}

fn bisect(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Root of a decreasing function on `[a, b]` with `f(a) > 0 > f(b)`,
/// Illinois false position started from `seed`.
fn refine_root(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, seed: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if seed > a && seed < b {
        let fs = f(seed);
        if fs == 0.0 {
            return seed;
        }
        if fs > 0.0 {
            a = seed;
            fa = fs;
        } else {
            b = seed;
            fb = fs;
        }
    }
    let mut side = 0i8;
    for _ in 0..300 {
        let c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) || b - a <= 1e-14 * b.abs().max(1.0) {
            return 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (a + b)
}

/// Maximizer of a unimodal function on `[a, b]`.
pub fn golden_section_max(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Best sensing time of one operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeOptimum {
    pub mode: &'static str,
    pub point: ModePoint,
    /// Set when the pre-scan saw more than one strict local maximum.
    pub non_concave: bool,
}

impl ModeOptimum {
    pub fn ee(&self) -> f64 {
        self.point.breakdown.ee
    }
}

/// Maximize a mode's EE over `tau`, re-deriving the threshold and split at
/// every candidate.
pub fn optimal_tau(
    n: &NetworkParams,
    s_template: &SensingParams,
    mode: &dyn OperatingMode,
) -> Result<ModeOptimum> {
    let (lo, hi) = tau_bracket(n, s_template, mode.uses_htt(), mode.pf_constrained())?;
    let ee_at = |tau: f64| {
        mode.evaluate_at(n, s_template, tau)
            .map(|p| p.breakdown.ee)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&t| ee_at(t)).collect();
    let k = first_argmax(&values);
    let non_concave = strict_local_maxima(&values) > 1;

    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(PRESCAN_POINTS - 1)];
    let (mut tau, mut best) = (grid[k], values[k]);
    if b > a {
        let (t, v) = golden_section_max(&ee_at, a, b, GOLDEN_TOL);
        if v > best {
            tau = t;
            best = v;
        }
    }
    if !best.is_finite() {
        return Err(Error::Infeasible(format!(
            "mode {} has no feasible operating point",
            mode.name()
        )));
    }
    Ok(ModeOptimum {
        mode: mode.name(),
        point: mode.evaluate_at(n, s_template, tau)?,
        non_concave,
    })
}

pub(crate) fn first_argmax(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[k] {
            k = i;
        }
    }
    k
}

fn strict_local_maxima(v: &[f64]) -> usize {
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] > v[i - 1];
            let right = i + 1 == n || v[i] > v[i + 1];
            v[i].is_finite() && left && right
        })
        .count()
}

/// Jointly optimal operating point after choosing between the hybrid and
/// backscatter-only regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPoint {
    pub eps_star: f64,
    pub mu_star: f64,
    pub alpha_star: f64,
    pub tau_star: f64,
    /// bits/Hz/J.
    pub ee_max: f64,
    /// bits/J.
    pub ee_max_raw: f64,
    pub mode: Regime,
    pub alpha_dagger: f64,
    pub alpha_bound: Option<AlphaBound>,
    pub pf: f64,
    pub pd: f64,
    pub throughput_abc: f64,
    pub throughput_htt: f64,
    pub energy: f64,
    pub non_concave_warning: bool,
    pub threshold_condition: bool,
}

impl OptimalPoint {
    fn from_optimum(n: &NetworkParams, s: &SensingParams, o: &ModeOptimum) -> Self {
        let p = &o.point;
        let b = &p.breakdown;
        Self {
            eps_star: p.threshold,
            mu_star: p.split.mu,
            alpha_star: p.split.alpha,
            tau_star: p.split.tau,
            ee_max: b.ee,
            ee_max_raw: b.ee_raw,
            mode: p.regime,
            alpha_dagger: b.alpha_dagger,
            alpha_bound: p.alpha_bound,
            pf: b.pf,
            pd: b.pd,
            throughput_abc: b.throughput_abc,
            throughput_htt: b.throughput_htt,
            energy: b.energy,
            non_concave_warning: o.non_concave,
            threshold_condition: threshold_monotonicity_condition(
                n,
                &s.with_threshold(p.threshold),
                &p.split,
            ),
        }
    }

    pub fn split(&self) -> TimeSplit {
        TimeSplit {
            tau: self.tau_star,
            alpha: self.alpha_star,
            mu: self.mu_star,
        }
    }
}

/// Pick the better of two mode optima; ties go to `first`.
pub fn select_optimum(
    first: Result<ModeOptimum>,
    second: Result<ModeOptimum>,
) -> Result<ModeOptimum> {
    match (first, second) {
        (Ok(a), Ok(b)) => {
            let tol = TIE_TOL * a.ee().abs().max(1.0);
            Ok(if b.ee() > a.ee() + tol { b } else { a })
        }
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Optimize hybrid and backscatter-only operation separately and keep the
/// better one.
pub fn maximize_ee(n: &NetworkParams, s_template: &SensingParams) -> Result<OptimalPoint> {
    n.validate()?;
    s_template.validate()?;
    // The false-alarm bracket does not depend on the mode; surface it first
    // so that its message wins over the HTT one.
    tau_bracket(n, s_template, false, true)?;
    let hybrid = optimal_tau(n, s_template, &Hybrid::imperfect());
    let abc = optimal_tau(n, s_template, &AbcOnly::imperfect());
    let best = select_optimum(hybrid, abc)?;
    Ok(OptimalPoint::from_optimum(n, s_template, &best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy_efficiency, prob_detection};

    fn defaults() -> (NetworkParams, SensingParams) {
        (NetworkParams::default(), SensingParams::default())
    }

    #[test]
    fn threshold_at_half_target_is_signal_mean() {
        let s = SensingParams::new(2000, 0.1, 1.0, 1.0).unwrap();
        assert!((optimal_threshold(&s, 0.5, 0.5).unwrap() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn threshold_reference_value() {
        let s = SensingParams::new(2000, 0.1, 1.0, 1.0).unwrap();
        let eps = optimal_threshold(&s, 0.5, 0.9).unwrap();
        // 40-digit evaluation of 1.1 - sqrt(1.2/1000) Q^-1(0.1).
        assert!((eps - 1.055_605_751_519_146_3).abs() < 1e-12);
        let pd = prob_detection(&s.with_threshold(eps), 0.5).unwrap();
        assert!((pd - 0.9).abs() < 1e-12);
    }

    #[test]
    fn threshold_degenerate_sensing() {
        let s = SensingParams::new(10, 0.1, 1.0, 1.0).unwrap();
        assert!(matches!(
            optimal_threshold(&s, 0.95, 0.9),
            Err(Error::DegenerateSensing { .. })
        ));
        assert!(optimal_threshold(&s, 0.5, 1.0).is_err());
    }

    #[test]
    fn pf_constraint_cases() {
        let (n, s) = defaults();
        let big = SensingParams {
            num_samples: 200_000,
            ..s
        };
        let eps = optimal_threshold(&big, 0.5, n.target_pd).unwrap();
        assert!(check_pf_constraint(&n, &big.with_threshold(eps), 0.5));

        let small = SensingParams { num_samples: 10, ..s };
        let eps = optimal_threshold(&small, 0.5, n.target_pd).unwrap();
        assert!(!check_pf_constraint(&n, &small.with_threshold(eps), 0.5));
        assert!(tau_bracket(&n, &small, false, true).is_err());
    }

    #[test]
    fn pf_constraint_is_inclusive() {
        let (n, s) = defaults();
        let tau = 0.3;
        let m = s.effective_samples(tau);
        let eps = 1.0 + q_inv(n.target_pf) / m.sqrt();
        let pf = pf_unchecked(&s.with_threshold(eps), tau);
        let n = NetworkParams { target_pf: pf, ..n };
        assert!(check_pf_constraint(&n, &s.with_threshold(eps), tau));
    }

    #[test]
    fn tau_max_reference() {
        let (n, s) = defaults();
        let t = tau_max(&n, &s);
        assert!((t - 0.639_43).abs() < 1e-4, "{t}");
        let eps = optimal_threshold(&s, t, n.target_pd).unwrap();
        let pf = pf_unchecked(&s.with_threshold(eps), t);
        assert!((pf - n.target_pf).abs() < 1e-9);
    }

    #[test]
    fn bracket_respects_htt_floor() {
        let (n, s) = defaults();
        let (lo, hi) = tau_bracket(&n, &s, true, true).unwrap();
        assert!(alpha_dagger(&n, &TimeSplit::new(lo, 0.0, 1.0).unwrap()) <= 1.0);
        assert!(lo > TAU_MIN && hi < 0.64);
    }

    #[test]
    fn window_collapses_when_alpha_dagger_is_one() {
        let (n, s) = defaults();
        let tau = tau_htt_min(&n).unwrap();
        let s = s.with_threshold(optimal_threshold(&s, tau, 0.9).unwrap());
        let w = bb_window(&n, &s, &TimeSplit::new(tau, 1.0, 1.0).unwrap());
        assert!((w.upper - w.lower).abs() <= 1e-9 * w.upper.abs());
    }

    #[test]
    fn window_scales_with_bandwidth() {
        let (n, s) = defaults();
        let s = s.with_threshold(optimal_threshold(&s, 0.5, 0.9).unwrap());
        let t = TimeSplit::new(0.5, 1.0, 1.0).unwrap();
        let w1 = bb_window(&n, &s, &t);
        let w2 = bb_window(
            &NetworkParams {
                bandwidth: 2.0 * n.bandwidth,
                ..n
            },
            &s,
            &t,
        );
        assert!(w1.lower <= w1.upper);
        assert!((w2.lower - 2.0 * w1.lower).abs() <= 1e-9 * w1.lower.abs());
        assert!((w2.upper - 2.0 * w1.upper).abs() <= 1e-9 * w1.upper.abs());
    }

    #[test]
    fn alpha_below_window_goes_to_one() {
        let (n, s) = defaults();
        let s = s.with_threshold(optimal_threshold(&s, 0.5, 0.9).unwrap());
        let t = TimeSplit::new(0.5, 1.0, 1.0).unwrap();
        let n0 = NetworkParams {
            interference_gain_ratio: 0.0,
            noise_to_channel_power: 100.0,
            ..n
        };
        let w = bb_window(&n0, &s, &t);
        assert!(w.lower > 0.0);
        let slow = NetworkParams {
            backscatter_rate: 0.5 * w.lower,
            ..n0
        };
        let a = optimal_alpha(&slow, &s, &t).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert_eq!(a.bound, AlphaBound::Upper);
        let fast = NetworkParams {
            backscatter_rate: 2.0 * w.upper,
            ..n0
        };
        let a = optimal_alpha(&fast, &s, &t).unwrap();
        assert_eq!(a.bound, AlphaBound::Lower);
    }

    #[test]
    fn interference_refinement_is_stationary() {
        let (n, s) = defaults();
        let s = s.with_threshold(optimal_threshold(&s, 0.5, 0.9).unwrap());
        let t = TimeSplit::new(0.5, 1.0, 1.0).unwrap();
        let a = optimal_alpha(&n, &s, &t).unwrap();
        assert_eq!(a.bound, AlphaBound::Interior);
        let at = TimeSplit { alpha: a.alpha, ..t };
        let d = crate::gradients::dee_dalpha(&n, &s, &at).unwrap();
        assert!(d.abs() < 1e-6, "{d}");
        let ee = energy_efficiency(&n, &s, &at).ee;
        for da in [-1e-4, 1e-4] {
            let near = TimeSplit {
                alpha: a.alpha + da,
                ..t
            };
            assert!(energy_efficiency(&n, &s, &near).ee <= ee);
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section_max(&|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0);
    }

    #[test]
    fn defaults_select_hybrid() {
        let (n, s) = defaults();
        let p = maximize_ee(&n, &s).unwrap();
        assert_eq!(p.mode, Regime::Hybrid);
        assert_eq!(p.mu_star, 1.0);
        assert!(p.alpha_star >= p.alpha_dagger && p.alpha_star <= 1.0);
        let direct = energy_efficiency(&n, &s.with_threshold(p.eps_star), &p.split()).ee;
        assert!((direct - p.ee_max).abs() <= 1e-10 * p.ee_max);
    }

    #[test]
    fn infeasible_detector_is_reported() {
        let (n, _) = defaults();
        let s = SensingParams::from_snr_db(2000, -20.0, 1.0).unwrap();
        assert!(matches!(maximize_ee(&n, &s), Err(Error::Infeasible(_))));
    }
}
