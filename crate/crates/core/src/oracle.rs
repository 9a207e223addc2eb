//! Brute-force references: exhaustive grid search, discrete concavity checks
//! and central differences.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{evaluate, Detection, NetworkParams, SensingParams, TimeSplit};
use crate::optimizer::{optimal_threshold, tau_bracket};

/// Uniform `(tau, alpha, mu)` grid with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub tau_points: usize,
    pub alpha_points: usize,
    pub mu_points: usize,
    pub tau_bounds: (f64, f64),
    pub alpha_bounds: (f64, f64),
    pub mu_bounds: (f64, f64),
}

impl GridSpec {
    /// 100 x 100 x 10 over the admissible sensing times, `alpha` in [0, 1]
    /// and `mu` in {0.1, ..., 1}.
    pub fn standard(n: &NetworkParams, s: &SensingParams) -> Result<Self> {
        Ok(Self {
            tau_points: 100,
            alpha_points: 100,
            mu_points: 10,
            tau_bounds: tau_bracket(n, s, false, true)?,
            alpha_bounds: (0.0, 1.0),
            mu_bounds: (0.1, 1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (field, pts) in [
            ("tau_points", self.tau_points),
            ("alpha_points", self.alpha_points),
            ("mu_points", self.mu_points),
        ] {
            if pts < 2 {
                return Err(Error::param(field, format!("{pts} < 2")));
            }
        }
        let (t0, t1) = self.tau_bounds;
        if !(t0 > 0.0 && t1 < 1.0 && t0 <= t1) {
            return Err(Error::param("tau_bounds", format!("[{t0}, {t1}] not inside (0, 1)")));
        }
        let (a0, a1) = self.alpha_bounds;
        if !(a0 >= 0.0 && a1 <= 1.0 && a0 <= a1) {
            return Err(Error::param("alpha_bounds", format!("[{a0}, {a1}] not inside [0, 1]")));
        }
        let (m0, m1) = self.mu_bounds;
        if !(m0 > 0.0 && m1 <= 1.0 && m0 <= m1) {
            return Err(Error::param("mu_bounds", format!("[{m0}, {m1}] not inside (0, 1]")));
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        linspace(self.tau_bounds, self.tau_points)
    }

    pub fn alphas(&self) -> Vec<f64> {
        linspace(self.alpha_bounds, self.alpha_points)
    }

    pub fn mus(&self) -> Vec<f64> {
        linspace(self.mu_bounds, self.mu_points)
    }
}

pub fn linspace((a, b): (f64, f64), points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![a];
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { b } else { a + (b - a) * i as f64 / last })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: (usize, usize, usize),
    pub tau: f64,
    pub alpha: f64,
    pub mu: f64,
    pub ee: f64,
}

/// Dense EE values, `tau`-major then `alpha` then `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub taus: Vec<f64>,
    pub alphas: Vec<f64>,
    pub mus: Vec<f64>,
    pub values: Vec<f64>,
}

impl Surface {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.alphas.len() + j) * self.mus.len() + k]
    }

    /// `[tau][alpha]` slice at mu index `k`.
    pub fn mu_slice(&self, k: usize) -> Vec<Vec<f64>> {
        (0..self.taus.len())
            .map(|i| (0..self.alphas.len()).map(|j| self.get(i, j, k)).collect())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "alpha", "mu", "ee"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for (i, tau) in self.taus.iter().enumerate() {
            for (j, alpha) in self.alphas.iter().enumerate() {
                for (k, mu) in self.mus.iter().enumerate() {
                    out.write_record([
                        tau.to_string(),
                        alpha.to_string(),
                        mu.to_string(),
                        self.get(i, j, k).to_string(),
                    ])
                    .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: GridPoint,
    pub surface: Surface,
}

impl GridResult {
    /// Largest EE change between the argmax and any cell of its 3x3x3
    /// neighbourhood; how far a grid optimum can sit from the true one.
    pub fn resolution_bound(&self) -> f64 {
        let (bi, bj, bk) = self.best.index;
        let s = &self.surface;
        let around = |c: usize, len: usize| c.saturating_sub(1)..=(c + 1).min(len - 1);
        let mut bound = 0.0f64;
        for i in around(bi, s.taus.len()) {
            for j in around(bj, s.alphas.len()) {
                for k in around(bk, s.mus.len()) {
                    bound = bound.max((s.get(i, j, k) - self.best.ee).abs());
                }
            }
        }
        bound
    }
}

/// Evaluate EE on every grid cell with the detection-constrained threshold
/// at each `tau`. The argmax is the first maximum in index order.
pub fn grid_search_ee(n: &NetworkParams, s_template: &SensingParams, g: &GridSpec) -> Result<GridResult> {
    g.validate()?;
    let taus = g.taus();
    let alphas = g.alphas();
    let mus = g.mus();

    let rows: Vec<Vec<f64>> = taus
        .par_iter()
        .map(|&tau| {
            let eps = optimal_threshold(s_template, tau, n.target_pd)?;
            let det = Detection::from_sensing(&s_template.with_threshold(eps), tau);
            let mut row = Vec::with_capacity(alphas.len() * mus.len());
            for &alpha in &alphas {
                for &mu in &mus {
                    row.push(evaluate(n, det, &TimeSplit { tau, alpha, mu }).ee);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();

    let mut best = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = idx;
        }
    }
    if !(values[best] > 0.0) {
        return Err(Error::EmptyGrid);
    }
    let per_tau = alphas.len() * mus.len();
    let (i, j, k) = (best / per_tau, (best % per_tau) / mus.len(), best % mus.len());
    Ok(GridResult {
        best: GridPoint {
            index: (i, j, k),
            tau: taus[i],
            alpha: alphas[j],
            mu: mus[k],
            ee: values[best],
        },
        surface: Surface {
            taus,
            alphas,
            mus,
            values,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub concave: bool,
    /// Largest second difference; positive values are convex kinks.
    pub max_second_difference: f64,
    pub slack: f64,
}

/// Discrete concavity test on uniformly spaced samples with slack
/// `1e-9 * max|v|`.
pub fn concavity_probe(values: &[f64]) -> Result<ConcavityReport> {
    if values.len() < 3 {
        return Err(Error::domain(
            "concavity_probe",
            format!("need at least 3 samples, got {}", values.len()),
        ));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-9 * scale;
    let max_second_difference = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityReport {
        concave: max_second_difference <= slack,
        max_second_difference,
        slack,
    })
}

/// Central difference `(f(x + h) - f(x - h)) / 2h`.
pub fn finite_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Step used for gradient checks: `max(1e-8, 1e-6 |x|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-8f64.max(1e-6 * x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::q;

    #[test]
    fn probe_cases() {
        let parabola: Vec<f64> = (0..50).map(|i| -((i as f64) / 10.0).powi(2)).collect();
        assert!(concavity_probe(&parabola).unwrap().concave);
        let kinked = [0.0, 1.0, 2.0, 4.0, 5.0];
        assert!(!concavity_probe(&kinked).unwrap().concave);
        assert!(concavity_probe(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn difference_cases() {
        assert!((finite_difference(|x| x, 0.3, 1e-6) - 1.0).abs() < 1e-9);
        let d = finite_difference(q, 0.0, 1e-6);
        assert!((d + 0.398_942_280_401_432_7).abs() < 1e-6);
    }

    #[test]
    fn linspace_ends_exactly() {
        let v = linspace((0.1, 1.0), 10);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[9], 1.0);
        assert!((v[4] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_is_signalled() {
        let n = NetworkParams {
            backscatter_rate: 0.0,
            harvested_power: 1e-6,
            ..NetworkParams::default()
        };
        let s = SensingParams::default();
        let g = GridSpec {
            tau_points: 5,
            alpha_points: 5,
            mu_points: 2,
            tau_bounds: (0.1, 0.5),
            alpha_bounds: (0.0, 1.0),
            mu_bounds: (0.5, 1.0),
        };
        assert!(matches!(grid_search_ee(&n, &s, &g), Err(Error::EmptyGrid)));
    }

    #[test]
    fn grid_rejects_single_point_axis() {
        let n = NetworkParams::default();
        let s = SensingParams::default();
        let mut g = GridSpec::standard(&n, &s).unwrap();
        g.mu_points = 1;
        assert!(grid_search_ee(&n, &s, &g).is_err());
    }
}
