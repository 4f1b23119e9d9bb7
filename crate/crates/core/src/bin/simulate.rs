//! Command-line front end: loads a scenario file, applies overrides, runs
//! the sweep, and writes the CSV report.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use pinch_rsma::baselines::SchemeId;
use pinch_rsma::config::ScenarioConfig;
use pinch_rsma::experiment::{render_csv, run_sweep, write_csv, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "simulate", about = "Average-latency sweeps for the pinched-waveguide downlink")]
struct Args {
    /// Scenario file (TOML). An empty file selects the documented defaults.
    #[arg(long)]
    config: PathBuf,

    /// Sweep one parameter: `param=v1,v2,...` with param one of
    /// power_budget_dbm, zipf_exponent, dx_m, dy_m, num_users.
    #[arg(long)]
    sweep: Option<String>,

    /// Comma-separated scheme subset, overriding the config
    /// (carp_jo, traditional_rsma, noma, fixed_antenna).
    #[arg(long)]
    schemes: Option<String>,

    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Monte Carlo samples per layout, overriding the config.
    #[arg(long)]
    samples: Option<usize>,

    /// Layout count override.
    #[arg(long)]
    layouts: Option<usize>,

    /// Report 0.0 wall time for byte-reproducible output.
    #[arg(long)]
    no_timing: bool,
}

fn run(args: &Args) -> pinch_rsma::Result<()> {
    let mut config = ScenarioConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(samples) = args.samples {
        config.sampling.samples = samples;
    }
    if let Some(layouts) = args.layouts {
        config.layouts = layouts;
    }
    if args.no_timing {
        config.record_timing = false;
    }
    if let Some(list) = &args.schemes {
        config.schemes = list
            .split(',')
            .map(|s| SchemeId::from_str(s.trim()))
            .collect::<pinch_rsma::Result<Vec<_>>>()?;
    }
    config.validate()?;

    let sweep = args.sweep.as_deref().map(SweepSpec::parse).transpose()?;
    let rows = run_sweep(&config, sweep.as_ref())?;

    match &args.out {
        Some(path) => write_csv(&rows, path)?,
        None => print!("{}", render_csv(&rows)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::FAILURE
        }
    }
}
