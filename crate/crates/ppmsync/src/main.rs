use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use ppmsync::config::{ChannelSpec, ExperimentConfig, IdcSpec};
use ppmsync::harness::{run_trials, sweep, verify_cost_equivalence, write_csv, SweepGrid};
use ppmsync_core::codec::compound::CompoundSchemeParams;
use ppmsync_core::codec::dmc::DmcSchemeParams;
use ppmsync_core::codec::gauss::GaussSchemeParams;
use ppmsync_core::info::{
    capacity_per_unit_cost, compound_gaussian_capacity, gaussian_capacity_per_unit_energy, ids_capacity_bounds,
};
use ppmsync_core::{PulseLayout, StreamId};

#[derive(Parser)]
#[command(name = "ppmsync", version, about = "Pulse-position coding over channels with synchronization errors")]
struct Cli {
    /// Worker threads for trial loops (0 = one per core).
    #[arg(long, global = true, env = "PPMSYNC_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity per unit cost of a channel, plus IDC bounds when a drift is given.
    Capacity { channel: PathBuf },
    /// Print the derived constants of a scheme.
    Params(ParamsArgs),
    /// Run the Monte Carlo trials of an experiment.
    Simulate {
        experiment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of experiments and write one CSV row per point.
    Sweep {
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare expected input cost with expected modified output cost.
    VerifyCost {
        experiment: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Dmc,
    Gauss,
    Compound,
}

#[derive(clap::Args)]
struct ParamsArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    messages: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Mean of the IDC states (dmc, gauss).
    #[arg(long)]
    mu: Option<f64>,
    /// Variance of the IDC states (dmc, gauss).
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    eta2: f64,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    sigma2_bound: Option<f64>,
    /// Channel JSON for the dmc scheme.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    x_star: Option<usize>,
    /// Calibrate the dmc threshold with this many windows.
    #[arg(long)]
    calibrate: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Input of the `capacity` subcommand.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityInput {
    channel: ChannelSpec,
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default)]
    idc: Option<IdcSpec>,
    #[serde(default)]
    mu1: Option<f64>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn capacity(path: &Path) -> Result<serde_json::Value> {
    let input: CapacityInput = serde_json::from_str(&read(path)?)?;
    let mu = match (&input.idc, input.mu) {
        (Some(idc), _) => Some(idc.build()?.mu()),
        (None, mu) => mu,
    };
    Ok(match &input.channel {
        ChannelSpec::Gaussian { eta2 } => {
            let mu = mu.unwrap_or(1.0);
            let mut v = json!({
                "mu": mu,
                "eta2": eta2,
                "capacity_per_unit_energy": gaussian_capacity_per_unit_energy(mu, *eta2)?,
            });
            if let Some(mu1) = input.mu1 {
                v["compound_capacity_per_unit_energy"] = json!(compound_gaussian_capacity(mu1, *eta2)?);
            }
            v
        }
        spec => {
            let dmc = spec.dmc()?;
            let mut v = json!({ "dmc": capacity_per_unit_cost(&dmc)? });
            if let Some(mu) = mu {
                v["bounds"] = serde_json::to_value(ids_capacity_bounds(mu, &dmc)?)?;
            }
            v
        }
    })
}

fn region_summary(layout: &dyn PulseLayout) -> serde_json::Value {
    let sizes: Vec<u128> = (1..=layout.messages()).map(|m| layout.region(m).len()).collect();
    json!({
        "region_sizes": sizes,
        "observation_end": layout.observation_end(),
    })
}

fn params(a: &ParamsArgs) -> Result<serde_json::Value> {
    let need = |v: Option<f64>, name: &str| v.with_context(|| format!("--{name} is required for this scheme"));
    Ok(match a.scheme {
        SchemeArg::Dmc => {
            let path = a.channel.as_deref().context("--channel is required for the dmc scheme")?;
            let spec: ChannelSpec = serde_json::from_str(&read(path)?)?;
            let channel = spec.dmc()?;
            let x_star = match a.x_star {
                Some(x) => x,
                None => capacity_per_unit_cost(&channel)?.maximizing_symbol,
            };
            let mut p = DmcSchemeParams::derive_from_moments(
                a.messages,
                a.epsilon,
                a.delta,
                need(a.mu, "mu")?,
                need(a.sigma2, "sigma2")?,
                &channel,
                x_star,
            )?;
            if let Some(n) = a.calibrate {
                let t = p.calibrate_threshold(&channel, n, StreamId::new(a.seed))?;
                p = p.with_threshold(t);
            }
            json!({ "params": p, "block_len": p.block_len(), "layout": region_summary(&p) })
        }
        SchemeArg::Gauss => {
            let p = GaussSchemeParams::derive_from_moments(
                a.messages,
                a.epsilon,
                a.delta,
                need(a.mu, "mu")?,
                need(a.sigma2, "sigma2")?,
                a.eta2,
            )?;
            json!({ "params": p, "energy": p.energy(), "rate": p.rate(), "layout": region_summary(&p) })
        }
        SchemeArg::Compound => {
            let p = CompoundSchemeParams::derive(
                a.messages,
                a.epsilon,
                a.delta,
                need(a.mu1, "mu1")?,
                need(a.mu2, "mu2")?,
                need(a.sigma2_bound, "sigma2-bound")?,
                a.eta2,
            )?;
            let windows: Vec<u128> = (1..=a.messages).map(|m| p.window_len(m)).collect();
            json!({
                "params": p,
                "window_lengths": windows,
                "energy": p.energy(),
                "rate": p.rate(),
                "layout": region_summary(&p),
            })
        }
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    match &cli.command {
        Command::Capacity { channel } => emit(&capacity(channel)?, None),
        Command::Params(args) => emit(&params(args)?, None),
        Command::Simulate { experiment, out } => {
            let config = ExperimentConfig::from_json(&read(experiment)?)?;
            let report = run_trials(&config)?;
            emit(&serde_json::to_value(&report)?, out.as_deref())
        }
        Command::Sweep { grid, out } => {
            let grid: SweepGrid = serde_json::from_str(&read(grid)?).context("parsing sweep grid")?;
            let rows = sweep(&grid);
            match out {
                Some(p) => write_csv(&rows, fs::File::create(p)?)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::VerifyCost { experiment, trials } => {
            let config = ExperimentConfig::from_json(&read(experiment)?)?;
            if *trials == 0 {
                bail!("--trials must be positive");
            }
            let report = verify_cost_equivalence(&config, *trials)?;
            emit(&serde_json::to_value(&report)?, None)
        }
    }
}
