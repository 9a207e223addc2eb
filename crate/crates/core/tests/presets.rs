use std::io::Write;

use backscatter_ee::config::{load_config, RawConfig};
use backscatter_ee::presets::{run_preset, run_sweep, PresetRegistry, RunOptions};
use backscatter_ee::Error;

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn stable_headers() {
    let expected = [
        ("fig2", "tau,alpha,mu,ee"),
        ("fig3", "snr_db,tau,alpha_star,pf,ee"),
        ("fig4", "tau,alpha,ee,ee_abc,ee_htt"),
        ("fig5", "snr_db,ns_500,ns_1000,ns_2000"),
        ("fig6", "snr_db,pd_0.8,pd_0.9,pd_0.99"),
        (
            "fig7",
            "snr_db,throughput_pd_0.8,energy_pd_0.8,throughput_pd_0.9,energy_pd_0.9,throughput_pd_0.99,energy_pd_0.99",
        ),
        ("fig8", "b_b,abc_only,htt_only,hybrid"),
        ("fig9", "snr_db,hybrid,no_sensing_errors"),
    ];
    for (name, cols) in expected {
        let out = run_preset(name, &RawConfig::default(), &RunOptions::default()).unwrap();
        let csv = out.to_csv_string().unwrap();
        assert_eq!(header(&csv), cols, "{name}");
        assert!(csv.starts_with(&format!("# sweep: {name}\n")));
    }
}

#[test]
fn comment_block_echoes_resolved_config() {
    let raw = RawConfig::parse(r#"{"bandwidth": 1e6}"#).unwrap();
    let out = run_preset("fig9", &raw, &RunOptions::default()).unwrap();
    let csv = out.to_csv_string().unwrap();
    assert!(csv.contains("#     \"bandwidth\": 1000000.0,"));
    assert!(csv.contains("#     \"harvested_power\": 1.0,"));
    assert!(csv.contains("#     \"num_samples\": 2000,"));
}

#[test]
fn unknown_preset() {
    let err = run_preset("fig1", &RawConfig::default(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Unknown { kind: "preset", .. }));
    assert_eq!(PresetRegistry::builtin().names().count(), 8);
}

#[test]
fn raw_units_scale_by_bandwidth() {
    let raw = RawConfig::default();
    let per_hz = run_preset("fig6", &raw, &RunOptions::default()).unwrap();
    let raw_ee = run_preset(
        "fig6",
        &raw,
        &RunOptions {
            raw_ee: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let w = per_hz.config.network.bandwidth;
    for (a, b) in per_hz.table.rows.iter().zip(&raw_ee.table.rows) {
        for (x, y) in a[1..].iter().zip(&b[1..]) {
            assert!((x * w - y).abs() <= 1e-9 * y.abs());
        }
    }
}

#[test]
fn dropping_sensing_never_hurts_the_baseline() {
    let raw = RawConfig::default();
    let kept = run_preset("fig9", &raw, &RunOptions::default()).unwrap();
    let dropped = run_preset(
        "fig9",
        &raw,
        &RunOptions {
            baseline_drop_sensing: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let (a, b) = (
        kept.table.column("no_sensing_errors").unwrap(),
        dropped.table.column("no_sensing_errors").unwrap(),
    );
    assert!(a.iter().zip(&b).all(|(x, y)| y >= x));
}

#[test]
fn fig4_curves_cover_alpha() {
    let out = run_preset("fig4", &RawConfig::default(), &RunOptions::default()).unwrap();
    assert_eq!(out.table.rows.len(), 3 * 101);
    let ee = out.table.column("ee").unwrap();
    assert!(ee.iter().all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn config_file_sweep() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"sweep": {{"axis": "snr_db", "values": [-10, -5, 0]}}, "modes": ["hybrid", "abc_only"]}}"#
    )
    .unwrap();
    let cfg = load_config(f.path()).unwrap();
    let out = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.table.columns, ["snr_db", "hybrid", "abc_only"]);
    let hybrid = out.table.column("hybrid").unwrap();
    let abc = out.table.column("abc_only").unwrap();
    assert!(hybrid.windows(2).all(|w| w[1] > w[0]));
    assert!(hybrid.iter().zip(&abc).all(|(h, a)| h >= a));
}

#[test]
fn tau_sweep_evaluates_every_point() {
    let raw = RawConfig::parse(r#"{"sweep": {"axis": "tau", "values": [0.2, 0.5, 0.9]}, "modes": ["hybrid"]}"#)
        .unwrap();
    let out = run_sweep(&raw.resolve().unwrap(), &RunOptions::default()).unwrap();
    let ee = out.table.column("hybrid").unwrap();
    assert!(ee[0] > 0.0 && ee[1] > 0.0);
    assert!(ee.iter().all(|v| v.is_finite()));
}

#[test]
fn sweep_without_axis_is_a_config_error() {
    let err = run_sweep(&RawConfig::default().resolve().unwrap(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Config { .. }));
}
