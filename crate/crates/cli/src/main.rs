use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use backscatter_ee::config::{load_raw, ExperimentConfig, RawConfig};
use backscatter_ee::model::{SensingParams, TimeSplit};
use backscatter_ee::optimizer::{maximize_ee, optimal_alpha, optimal_threshold};
use backscatter_ee::presets::{run_preset, run_sweep, RunOptions, RunOutput};
use backscatter_ee::simulator::{simulate, DetectorKind, SimConfig};
use backscatter_ee::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bsee", version, about = "Energy efficiency of backscatter-assisted cognitive radio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset, or the sweep in the config when no preset is given.
    Run {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Baseline without sensing time or sensing energy.
        #[arg(long)]
        baseline_drop_sensing: bool,
        /// Report bits/J instead of bits/Hz/J.
        #[arg(long)]
        raw_ee: bool,
    },
    /// Print the jointly optimal operating point as JSON.
    Optimize {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Monte-Carlo check of the model at the optimum or the configured point.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        frames: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "gaussian_approx")]
        detector: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config { .. } | Error::InvalidParameter { .. } | Error::Unknown { .. }) => 2,
        Some(Error::Infeasible(_) | Error::EmptyGrid | Error::DegenerateSensing { .. }) => 3,
        _ => 1,
    }
}

fn raw_config(path: Option<&Path>) -> anyhow::Result<RawConfig> {
    Ok(match path {
        Some(p) => load_raw(p)?,
        None => RawConfig::default(),
    })
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run {
            preset,
            config,
            out,
            seed,
            baseline_drop_sensing,
            raw_ee,
        } => {
            let raw = raw_config(config.as_deref())?;
            let seed = seed.or(raw.seed).unwrap_or(0);
            let opts = RunOptions {
                raw_ee,
                baseline_drop_sensing,
                seed,
            };
            let output = match preset {
                Some(name) => run_preset(&name, &raw, &opts)?,
                None => run_sweep(&raw.resolve()?, &opts)?,
            };
            write_run(&output, out.or_else(|| output.config.output_path.clone()))
        }
        Command::Optimize { config } => {
            let cfg = raw_config(config.as_deref())?.resolve()?;
            let p = maximize_ee(&cfg.network, &cfg.sensing)?;
            println!("{}", serde_json::to_string_pretty(&p)?);
            Ok(())
        }
        Command::Simulate {
            config,
            frames,
            seed,
            detector,
            format,
        } => {
            let cfg = raw_config(config.as_deref())?.resolve()?;
            let (sensing, split) = sim_point(&cfg)?;
            let sim = SimConfig {
                num_frames: frames,
                seed: seed.unwrap_or(cfg.seed),
                detector_model: DetectorKind::from_name(&detector)?,
            };
            let r = simulate(&cfg.network, &sensing, &split, &sim)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&r)?),
                Format::Csv => r.write_csv(io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

/// Operating point for `simulate`: the configured `tau` with its optimal
/// threshold and harvesting fraction, or the joint optimum; explicit
/// `alpha`/`mu` always win.
fn sim_point(cfg: &ExperimentConfig) -> anyhow::Result<(SensingParams, TimeSplit)> {
    let (n, s) = (&cfg.network, &cfg.sensing);
    let op = cfg.operating_point;
    let (eps, mut split) = match op.tau {
        Some(tau) => {
            let eps = optimal_threshold(s, tau, n.target_pd)?;
            let mu = op.mu.unwrap_or(1.0);
            let probe = TimeSplit { tau, alpha: 1.0, mu };
            let alpha = match op.alpha {
                Some(a) => a,
                None => optimal_alpha(n, &s.with_threshold(eps), &probe)
                    .map(|a| a.alpha)
                    .unwrap_or(0.0),
            };
            (eps, TimeSplit { tau, alpha, mu })
        }
        None => {
            let p = maximize_ee(n, s)?;
            (p.eps_star, p.split())
        }
    };
    if let Some(a) = op.alpha {
        split.alpha = a;
    }
    if let Some(m) = op.mu {
        split.mu = m;
    }
    let split = TimeSplit::new(split.tau, split.alpha, split.mu)?;
    Ok((s.with_threshold(eps), split))
}

fn write_run(output: &RunOutput, path: Option<PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            output.write_csv(&mut w)?;
            w.flush()?;
        }
        None => output.write_csv(io::stdout().lock())?,
    }
    Ok(())
}
