//! Gaussian tail function, its inverse, and the Lambert W pieces used by
//! the closed-form harvesting split.

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("q_function", format!("non-finite input {x}")));
    }
    Ok(q(x))
}

/// Inverse of [`q_function`] on the open unit interval.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("q_inverse", format!("p = {p} not in (0, 1)")));
    }
    Ok(q_inv(p))
}

#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub(crate) fn q_inv(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    // Q^{-1}(p) = -Phi^{-1}(p); refine y = Phi^{-1}(p) against erfc so that
    // both tails keep full relative precision.
    let mut y = acklam_normal_quantile(p);
    for _ in 0..2 {
        let e = 0.5 * libm::erfc(-y * FRAC_1_SQRT_2) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * y * y).exp();
        y -= u / (1.0 + 0.5 * y * u);
    }
    -y
}

/// Rational approximation of the standard normal quantile (relative error
/// about 1.15e-9 before refinement).
fn acklam_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Wright omega function: the positive `w` with `w + ln w = x`, i.e.
/// `W0(exp(x))` without forming `exp(x)`.
pub fn wright_omega(x: f64) -> f64 {
    // Newton on v = ln w: g(v) = e^v + v - x is convex and increasing.
    let mut v = if x > 1.0 { x.ln() } else { x };
    for _ in 0..100 {
        let ev = v.exp();
        let step = (ev + v - x) / (ev + 1.0);
        v -= step;
        if step.abs() <= 1e-16 * v.abs().max(1.0) {
            break;
        }
    }
    v.exp()
}

/// Principal branch of the Lambert W function, defined for `z >= -1/e`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if z.is_nan() || z < branch {
        return Err(Error::domain("lambert_w0", format!("z = {z} < -1/e")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z > 0.0 {
        return Ok(wright_omega(z.ln()));
    }
    let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
    let mut w = if z < -0.3 {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        // ln(1 + z) is a serviceable start on (-0.3, 0).
        (1.0 + z).ln()
    };
    if p == 0.0 {
        return Ok(-1.0);
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w.max(-1.0))
}
