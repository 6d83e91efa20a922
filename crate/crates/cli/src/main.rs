use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use scf_core::engine::run_drop;
use scf_core::harness::{run_sweep, RunConfig, SweepOutcome};
use scf_core::{RappMode, ScenarioConfig};

#[derive(Parser)]
#[command(name = "scf-sim", version, about = "Serving cluster formation simulator for user-centric cell-free massive MIMO")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single drop.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed (default: run.base_seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Serving cluster size (default: control.scs).
        #[arg(long)]
        scs: Option<u32>,
        /// TTIs per drop (default: run.n_tti).
        #[arg(long)]
        n_tti: Option<u32>,
    },
    /// Sweep serving cluster sizes over several seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cluster sizes: inclusive range `1..6` or list `1,2,4`.
        #[arg(long, value_parser = parse_scs_list)]
        scs_list: Option<ScsList>,
        /// Number of seeds, starting at run.base_seed.
        #[arg(long)]
        seeds: Option<u32>,
        #[arg(long)]
        rapp: Option<RappMode>,
        #[arg(long)]
        n_tti: Option<u32>,
    },
    /// Check a configuration file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone)]
struct ScsList(Vec<u32>);

fn parse_scs_list(s: &str) -> Result<ScsList, String> {
    let s = s.trim();
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("'{x}': {e}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse(lo)?;
        let hi = parse(hi.trim_start_matches('='))?;
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(ScsList((lo..=hi).collect()))
    } else {
        s.split(',').map(parse).collect::<Result<_, _>>().map(ScsList)
    }
}

fn load(path: &PathBuf) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "{}: ok ({} RUs, {} UEs, {} RBs)",
                config.display(),
                cfg.topology.radio_units.len(),
                cfg.topology.ue_count,
                cfg.carrier.n_rb
            );
        }
        Command::Run {
            config,
            out,
            seed,
            scs,
            n_tti,
        } => {
            let cfg = load(&config)?;
            let mut rc = RunConfig::from_scenario(cfg);
            let seed = seed.unwrap_or(rc.scenario.run.base_seed);
            let scs = scs.unwrap_or(rc.scenario.control.scs);
            rc.seeds = vec![seed];
            rc.scs_list = vec![scs];
            rc.rapp_mode = RappMode::Fixed;
            if let Some(n) = n_tti {
                rc.n_tti = n;
            }
            rc.out_dir = Some(out.clone());
            rc.validate()?;
            let started = Instant::now();
            let drop = run_drop(&rc.scenario, scs, seed, rc.n_tti)?;
            let outcome = SweepOutcome::from_drops(&rc, vec![drop])?;
            outcome.write_outputs(&rc, &out)?;
            println!(
                "seed {seed} scs {scs}: RAN EE {:.6e} bit/J ({:.1} s) -> {}",
                outcome.mean_ran_ee[&scs],
                started.elapsed().as_secs_f64(),
                out.display()
            );
        }
        Command::Sweep {
            config,
            out,
            scs_list,
            seeds,
            rapp,
            n_tti,
        } => {
            let mut cfg = load(&config)?;
            if let Some(n) = seeds {
                cfg.run.n_seeds = n;
            }
            let mut rc = RunConfig::from_scenario(cfg);
            if let Some(ScsList(list)) = scs_list {
                rc.scs_list = list;
            }
            if let Some(mode) = rapp {
                rc.rapp_mode = mode;
            }
            if let Some(n) = n_tti {
                rc.n_tti = n;
            }
            rc.out_dir = Some(out.clone());
            let started = Instant::now();
            let outcome = run_sweep(&rc)?;
            outcome.write_outputs(&rc, &out)?;
            let s = &outcome.summary;
            for (scs, ee) in &s.mean_ran_ee {
                println!("scs {scs}: mean RAN EE {ee:.6e} bit/J");
            }
            print!("argmax scs {}", s.argmax_scs);
            if let Some(g) = s.gain_over_scs1 {
                print!(", gain over scs 1: {:.1}%", (g - 1.0) * 100.0);
            }
            println!();
            if let Some(p) = &s.chosen_policy {
                println!("rApp selected scs {}", p.scs);
            }
            println!(
                "{} drops in {:.1} s -> {}",
                outcome.drops.len(),
                started.elapsed().as_secs_f64(),
                out.display()
            );
        }
    }
    Ok(())
}
