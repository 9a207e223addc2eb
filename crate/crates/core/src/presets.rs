//! Named figure sweeps and the generic config-driven sweep, written as CSV
//! with a comment block that echoes the resolved configuration.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, RawConfig, SweepAxis};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, evaluate, Detection, EeBreakdown, NetworkParams, SensingParams, TimeSplit};
use crate::modes::{AbcOnly, Hybrid, HttOnly, ModeRegistry, NoSensingErrors, OperatingMode};
use crate::optimizer::{maximize_ee, optimal_threshold, tau_bracket, OptimalPoint, TAU_MAX, TAU_MIN};
use crate::oracle::linspace;

/// Switches shared by every sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Report bits/J instead of bits/Hz/J (and bits instead of bits/Hz).
    pub raw_ee: bool,
    /// Let the perfect-knowledge baseline use any sensing time.
    pub baseline_drop_sensing: bool,
    pub seed: u64,
}

impl RunOptions {
    fn baseline(&self) -> NoSensingErrors {
        NoSensingErrors {
            sensing_constraint: !self.baseline_drop_sensing,
        }
    }

    fn ee(&self, b: &EeBreakdown) -> f64 {
        if self.raw_ee {
            b.ee_raw
        } else {
            b.ee
        }
    }

    fn ee_of(&self, p: &OptimalPoint) -> f64 {
        if self.raw_ee {
            p.ee_max_raw
        } else {
            p.ee_max
        }
    }

    fn per_hz(&self, n: &NetworkParams, bits: f64) -> f64 {
        if self.raw_ee {
            bits
        } else {
            bits / n.bandwidth
        }
    }
}

/// Column-oriented numeric output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with `#`-prefixed `comment` lines, one header, `{}` floats.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: &str) -> Result<()> {
        for line in comment.lines() {
            writeln!(w, "# {line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)
            .map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| v.to_string()))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Table plus the configuration that produced it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub config: ExperimentConfig,
    pub options: RunOptions,
    pub table: Table,
}

impl RunOutput {
    pub fn comment(&self) -> String {
        let mut c = format!(
            "sweep: {}\nunits: {}\nseed: {}\nbaseline_drop_sensing: {}\nconfig:\n",
            self.name,
            if self.options.raw_ee { "bits/J" } else { "bits/Hz/J" },
            self.options.seed,
            self.options.baseline_drop_sensing,
        );
        c.push_str(&self.config.to_json_pretty());
        c
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.table.write_csv(w, &self.comment())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;

    /// Figure-specific parameters, applied only where the user left a key
    /// unset.
    fn adjust(&self, _raw: &mut RawConfig) {}

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table>;
}

fn optimum_or_nan(r: Result<OptimalPoint>, opts: &RunOptions) -> Result<f64> {
    match r {
        Ok(p) => Ok(opts.ee_of(&p)),
        Err(Error::Infeasible(_)) | Err(Error::DegenerateSensing { .. }) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

fn mode_or_nan(
    mode: &dyn OperatingMode,
    n: &NetworkParams,
    s: &SensingParams,
    opts: &RunOptions,
) -> Result<f64> {
    match mode.optimize(n, s) {
        Ok(o) => Ok(opts.ee(&o.point.breakdown)),
        Err(Error::Infeasible(_)) | Err(Error::DegenerateSensing { .. }) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Best split at `tau`: hybrid where HTT can be funded and wins, otherwise
/// backscatter only.
fn best_at_tau(n: &NetworkParams, s: &SensingParams, tau: f64) -> Result<(TimeSplit, EeBreakdown)> {
    let abc = AbcOnly::imperfect().evaluate_at(n, s, tau)?;
    Ok(match Hybrid::imperfect().evaluate_at(n, s, tau) {
        Ok(h) if h.breakdown.ee >= abc.breakdown.ee => (h.split, h.breakdown),
        _ => (abc.split, abc.breakdown),
    })
}

fn snr_range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

fn rows_par<T: Sync>(points: &[T], f: impl Fn(&T) -> Result<Vec<Vec<f64>>> + Sync + Send) -> Result<Vec<Vec<f64>>> {
    let parts: Vec<Vec<Vec<f64>>> = points.par_iter().map(f).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// EE surface over `(tau, alpha)` at `mu = 1`.
pub struct Fig2;

impl Preset for Fig2 {
    fn name(&self) -> &'static str {
        "fig2"
    }

    fn description(&self) -> &'static str {
        "EE surface over (tau, alpha), mu = 1, detection-constrained threshold"
    }

    fn adjust(&self, raw: &mut RawConfig) {
        raw.num_samples.get_or_insert(1000);
        raw.sensing_power.get_or_insert(0.3e-3);
        raw.partial_throughput_factor.get_or_insert(0.6);
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let (n, s) = (&cfg.network, &cfg.sensing);
        let bracket = tau_bracket(n, s, false, true)?;
        let taus = linspace(bracket, 50);
        let alphas = linspace((0.0, 1.0), 51);
        let mut table = Table::new(["tau", "alpha", "mu", "ee"]);
        table.rows = rows_par(&taus, |&tau| {
            let eps = optimal_threshold(s, tau, n.target_pd)?;
            let det = Detection::from_sensing(&s.with_threshold(eps), tau);
            Ok(alphas
                .iter()
                .map(|&alpha| {
                    let b = evaluate(n, det, &TimeSplit { tau, alpha, mu: 1.0 });
                    vec![tau, alpha, 1.0, opts.ee(&b)]
                })
                .collect())
        })?;
        Ok(table)
    }
}

/// EE against `tau` at the best split, for three SNRs.
pub struct Fig3;

pub const FIG3_SNR_DB: [f64; 3] = [-12.0, -10.0, -8.0];

impl Preset for Fig3 {
    fn name(&self) -> &'static str {
        "fig3"
    }

    fn description(&self) -> &'static str {
        "EE(tau) at the optimal split for SNR in {-12, -10, -8} dB"
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let taus = linspace((TAU_MIN, TAU_MAX), 200);
        let mut table = Table::new(["snr_db", "tau", "alpha_star", "pf", "ee"]);
        table.rows = rows_par(&FIG3_SNR_DB, |&snr_db| {
            let c = cfg.with_snr_db(snr_db);
            let (n, s) = (&c.network, &c.sensing);
            let (lo, hi) = match tau_bracket(n, s, false, true) {
                Ok(b) => b,
                Err(Error::Infeasible(_)) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            taus.iter()
                .filter(|&&t| t >= lo && t <= hi)
                .map(|&tau| {
                    let (split, b) = best_at_tau(n, s, tau)?;
                    Ok(vec![snr_db, tau, split.alpha, b.pf, opts.ee(&b)])
                })
                .collect()
        })?;
        Ok(table)
    }
}

/// EE against `alpha` for a few sensing times.
pub struct Fig4;

pub const FIG4_TAUS: [f64; 3] = [0.2, 0.4, 0.6];

impl Preset for Fig4 {
    fn name(&self) -> &'static str {
        "fig4"
    }

    fn description(&self) -> &'static str {
        "EE(alpha) for tau in {0.2, 0.4, 0.6}, mu = 1"
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let (n, s) = (&cfg.network, &cfg.sensing);
        let alphas = linspace((0.0, 1.0), 101);
        let mut table = Table::new(["tau", "alpha", "ee", "ee_abc", "ee_htt"]);
        table.rows = rows_par(&FIG4_TAUS, |&tau| {
            let eps = optimal_threshold(s, tau, n.target_pd)?;
            let det = Detection::from_sensing(&s.with_threshold(eps), tau);
            Ok(alphas
                .iter()
                .map(|&alpha| {
                    let b = evaluate(n, det, &TimeSplit { tau, alpha, mu: 1.0 });
                    let scale = opts.ee(&b) / b.ee.max(f64::MIN_POSITIVE);
                    vec![tau, alpha, opts.ee(&b), b.ee_abc() * scale, b.ee_htt() * scale]
                })
                .collect())
        })?;
        Ok(table)
    }
}

/// Optimal EE against SNR for several frame lengths.
pub struct Fig5;

pub const FIG5_NS: [u32; 3] = [500, 1000, 2000];

impl Preset for Fig5 {
    fn name(&self) -> &'static str {
        "fig5"
    }

    fn description(&self) -> &'static str {
        "optimal EE vs SNR for Ns in {500, 1000, 2000}"
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let snrs = snr_range(-8, 0);
        let mut cols = vec!["snr_db".to_string()];
        cols.extend(FIG5_NS.iter().map(|ns| format!("ns_{ns}")));
        let mut table = Table::new(cols);
        table.rows = rows_par(&snrs, |&snr_db| {
            let c = cfg.with_snr_db(snr_db);
            let mut row = vec![snr_db];
            for ns in FIG5_NS {
                let s = SensingParams {
                    num_samples: ns,
                    ..c.sensing
                };
                row.push(optimum_or_nan(maximize_ee(&c.network, &s), opts)?);
            }
            Ok(vec![row])
        })?;
        Ok(table)
    }
}

pub const TARGET_PDS: [f64; 3] = [0.8, 0.9, 0.99];

fn per_target_pd(
    cfg: &ExperimentConfig,
    snr_db: f64,
    f: impl Fn(Result<OptimalPoint>, &NetworkParams) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let c = cfg.with_snr_db(snr_db);
    let mut row = vec![snr_db];
    for pd in TARGET_PDS {
        let n = NetworkParams {
            target_pd: pd,
            ..c.network
        };
        row.extend(f(maximize_ee(&n, &c.sensing), &n)?);
    }
    Ok(row)
}

/// Optimal EE against SNR for several detection targets.
pub struct Fig6;

impl Preset for Fig6 {
    fn name(&self) -> &'static str {
        "fig6"
    }

    fn description(&self) -> &'static str {
        "optimal EE vs SNR for target Pd in {0.8, 0.9, 0.99}"
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let mut cols = vec!["snr_db".to_string()];
        cols.extend(TARGET_PDS.iter().map(|pd| format!("pd_{pd}")));
        let mut table = Table::new(cols);
        table.rows = rows_par(&snr_range(-10, 0), |&snr_db| {
            Ok(vec![per_target_pd(cfg, snr_db, |r, _| Ok(vec![optimum_or_nan(r, opts)?]))?])
        })?;
        Ok(table)
    }
}

/// Throughput and energy at the optimum against SNR.
pub struct Fig7;

impl Preset for Fig7 {
    fn name(&self) -> &'static str {
        "fig7"
    }

    fn description(&self) -> &'static str {
        "throughput and energy at the optimum vs SNR for target Pd in {0.8, 0.9, 0.99}"
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let mut cols = vec!["snr_db".to_string()];
        for pd in TARGET_PDS {
            cols.push(format!("throughput_pd_{pd}"));
            cols.push(format!("energy_pd_{pd}"));
        }
        let mut table = Table::new(cols);
        table.rows = rows_par(&snr_range(-10, 0), |&snr_db| {
            Ok(vec![per_target_pd(cfg, snr_db, |r, n| match r {
                Ok(p) => Ok(vec![
                    opts.per_hz(n, p.throughput_abc + p.throughput_htt),
                    p.energy,
                ]),
                Err(Error::Infeasible(_)) => Ok(vec![f64::NAN, f64::NAN]),
                Err(e) => Err(e),
            })?])
        })?;
        Ok(table)
    }
}

/// Optimal EE per operating mode against the backscatter rate.
pub struct Fig8;

impl Preset for Fig8 {
    fn name(&self) -> &'static str {
        "fig8"
    }

    fn description(&self) -> &'static str {
        "optimal EE vs backscatter rate for abc_only, htt_only and hybrid"
    }

    fn adjust(&self, raw: &mut RawConfig) {
        raw.num_samples.get_or_insert(1000);
        if raw.friis.is_none() {
            raw.harvested_power.get_or_insert(1.0);
        }
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let rates: Vec<f64> = (0..=30).map(|i| 10f64.powf(4.0 + i as f64 / 10.0)).collect();
        let s = &cfg.sensing;
        let mut table = Table::new(["b_b", "abc_only", "htt_only", "hybrid"]);
        table.rows = rows_par(&rates, |&rate| {
            let n = NetworkParams {
                backscatter_rate: rate,
                ..cfg.network
            };
            Ok(vec![vec![
                rate,
                mode_or_nan(&AbcOnly::imperfect(), &n, s, opts)?,
                mode_or_nan(&HttOnly::imperfect(), &n, s, opts)?,
                optimum_or_nan(maximize_ee(&n, s), opts)?,
            ]])
        })?;
        Ok(table)
    }
}

/// Optimal EE with and without sensing errors against SNR.
pub struct Fig9;

impl Preset for Fig9 {
    fn name(&self) -> &'static str {
        "fig9"
    }

    fn description(&self) -> &'static str {
        "optimal EE vs SNR with imperfect sensing and with perfect PU knowledge"
    }

    fn adjust(&self, raw: &mut RawConfig) {
        raw.num_samples.get_or_insert(2000);
        if raw.friis.is_none() {
            raw.harvested_power.get_or_insert(1.0);
        }
    }

    fn run(&self, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Table> {
        let baseline = opts.baseline();
        let mut table = Table::new(["snr_db", "hybrid", "no_sensing_errors"]);
        table.rows = rows_par(&snr_range(-10, 0), |&snr_db| {
            let c = cfg.with_snr_db(snr_db);
            Ok(vec![vec![
                snr_db,
                optimum_or_nan(maximize_ee(&c.network, &c.sensing), opts)?,
                mode_or_nan(&baseline, &c.network, &c.sensing, opts)?,
            ]])
        })?;
        Ok(table)
    }
}

/// Name-keyed set of presets.
pub struct PresetRegistry {
    presets: BTreeMap<&'static str, Box<dyn Preset>>,
}

impl PresetRegistry {
    pub fn builtin() -> Self {
        let mut r = Self {
            presets: BTreeMap::new(),
        };
        let all: [Box<dyn Preset>; 8] = [
            Box::new(Fig2),
            Box::new(Fig3),
            Box::new(Fig4),
            Box::new(Fig5),
            Box::new(Fig6),
            Box::new(Fig7),
            Box::new(Fig8),
            Box::new(Fig9),
        ];
        for p in all {
            r.register(p);
        }
        r
    }

    pub fn register(&mut self, preset: Box<dyn Preset>) {
        self.presets.insert(preset.name(), preset);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Preset> {
        self.presets
            .get(name)
            .map(|p| p.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "preset",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.presets.keys().copied()
    }
}

/// Resolve `raw` with the preset's parameters and run it.
pub fn run_preset(name: &str, raw: &RawConfig, opts: &RunOptions) -> Result<RunOutput> {
    let registry = PresetRegistry::builtin();
    let preset = registry.get(name)?;
    let mut raw = raw.clone();
    preset.adjust(&mut raw);
    let config = raw.resolve()?;
    let table = preset.run(&config, opts)?;
    Ok(RunOutput {
        name: preset.name().to_string(),
        config,
        options: *opts,
        table,
    })
}

/// Run the sweep described in the config.
///
/// `tau` sweeps report each mode's EE at that sensing time; `alpha` sweeps
/// report EE at the configured `tau` (default 0.5) with `mu = 1`; the other
/// axes report each mode's optimum, with `hybrid` meaning the better of
/// hybrid and backscatter-only operation.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "no preset given and the config has no sweep"))?;
    let registry = ModeRegistry::with_baseline(opts.baseline());
    let modes: Vec<&dyn OperatingMode> = cfg
        .modes
        .iter()
        .map(|m| registry.get(m))
        .collect::<Result<_>>()?;

    let table = if sweep.axis == SweepAxis::Alpha {
        let (n, s) = (&cfg.network, &cfg.sensing);
        let tau = cfg.operating_point.tau.unwrap_or(0.5);
        let eps = optimal_threshold(s, tau, n.target_pd)?;
        let det = Detection::from_sensing(&s.with_threshold(eps), tau);
        let mut t = Table::new(["alpha", "ee"]);
        t.rows = sweep
            .values
            .iter()
            .map(|&alpha| {
                let b = evaluate(n, det, &TimeSplit { tau, alpha, mu: 1.0 });
                vec![alpha, opts.ee(&b)]
            })
            .collect();
        t
    } else {
        let mut cols = vec![sweep.axis.name().to_string()];
        cols.extend(cfg.modes.iter().cloned());
        let mut t = Table::new(cols);
        t.rows = rows_par(&sweep.values, |&v| {
            let mut row = vec![v];
            if sweep.axis == SweepAxis::Tau {
                for m in &modes {
                    row.push(match m.evaluate_at(&cfg.network, &cfg.sensing, v) {
                        Ok(p) => opts.ee(&p.breakdown),
                        Err(Error::Infeasible(_)) | Err(Error::DegenerateSensing { .. }) => f64::NAN,
                        Err(e) => return Err(e),
                    });
                }
            } else {
                let c = apply_axis(cfg, sweep.axis, v);
                for m in &modes {
                    row.push(if m.name() == "hybrid" {
                        optimum_or_nan(maximize_ee(&c.network, &c.sensing), opts)?
                    } else {
                        mode_or_nan(*m, &c.network, &c.sensing, opts)?
                    });
                }
            }
            Ok(vec![row])
        })?;
        t
    };
    Ok(RunOutput {
        name: format!("sweep over {}", sweep.axis),
        config: cfg.clone(),
        options: *opts,
        table,
    })
}

fn apply_axis(cfg: &ExperimentConfig, axis: SweepAxis, v: f64) -> ExperimentConfig {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::SnrDb => return cfg.with_snr_db(v),
        SweepAxis::NumSamples => c.sensing.num_samples = v as u32,
        SweepAxis::TargetPd => c.network.target_pd = v,
        SweepAxis::BackscatterRate => c.network.backscatter_rate = v,
        SweepAxis::Tau | SweepAxis::Alpha => {}
    }
    c.sensing.snr = db_to_linear(c.snr_db);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names() {
        let r = PresetRegistry::builtin();
        let names: Vec<_> = r.names().collect();
        assert_eq!(names, ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"]);
        assert!(matches!(r.get("fig10"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn user_values_beat_preset_values() {
        let raw = RawConfig {
            num_samples: Some(3000),
            ..RawConfig::default()
        };
        let out = run_preset("fig8", &raw, &RunOptions::default()).unwrap();
        assert_eq!(out.config.sensing.num_samples, 3000);
        assert_eq!(out.config.network.harvested_power, 1.0);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["a", "b"]);
        t.rows.push(vec![1.0, 0.25]);
        t.rows.push(vec![f64::NAN, 1e-7]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, "line one\nline two").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# line one\n# line two\na,b\n1,0.25\nNaN,0.0000001\n");
    }

    #[test]
    fn alpha_sweep_uses_configured_tau() {
        let raw = RawConfig::parse(r#"{"tau": 0.4, "sweep": {"axis": "alpha", "values": [0.0, 0.5, 1.0]}}"#).unwrap();
        let out = run_sweep(&raw.resolve().unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(out.table.columns, ["alpha", "ee"]);
        assert_eq!(out.table.rows.len(), 3);
    }
}
