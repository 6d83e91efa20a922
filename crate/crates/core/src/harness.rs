//! Cluster-size sweeps over many seeds, aggregation and result files.
//!
//! Output directory layout:
//!
//! | file | contents |
//! |------|----------|
//! | `config.toml` | scenario snapshot, `run` section reflecting the executed sweep |
//! | `ran_ee.csv` | `scs,seed,total_bits,total_energy_j,ran_ee` |
//! | `per_user_ee.csv` | `scs,seed,ue_id,throughput_bps,per_user_ee` |
//! | `cdf.csv` | `scs,value,prob` (per-user EE pooled over seeds) |
//! | `o1_kpi.jsonl` | one O1 KPI report per drop |
//! | `e2_cluster_config.jsonl` | one E2 cluster configuration per drop |
//! | `summary.json` | mean RAN EE per scs, argmax, gain over scs 1, rApp choice |

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RappMode, ScenarioConfig};
use crate::engine::{run_seed, DropResult};
use crate::error::{Error, Result};
use crate::power::ecdf;
use crate::ric::{rapp_sweep_select, A1Policy, E2ClusterConfig, O1KpiReport};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub scs_list: Vec<u32>,
    pub seeds: Vec<u64>,
    pub n_tti: u32,
    pub out_dir: Option<PathBuf>,
    pub rapp_mode: RappMode,
}

impl RunConfig {
    /// Sweep described by the scenario's `run` and `control` sections.
    pub fn from_scenario(scenario: ScenarioConfig) -> Self {
        Self {
            scs_list: scenario.run.scs_list.clone(),
            seeds: scenario.run.seeds(),
            n_tti: scenario.run.n_tti,
            rapp_mode: scenario.control.rapp_mode,
            out_dir: None,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.scs_list.is_empty() || self.scs_list.contains(&0) {
            return Err(Error::config("scs_list must be non-empty with every entry >= 1"));
        }
        let unique: BTreeSet<_> = self.scs_list.iter().collect();
        if unique.len() != self.scs_list.len() {
            return Err(Error::config("scs_list contains duplicates"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        let unique: BTreeSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            return Err(Error::config("seed list contains duplicates"));
        }
        if self.n_tti == 0 {
            return Err(Error::config("n_tti must be at least 1"));
        }
        Ok(())
    }

    /// Scenario whose `run` section records this sweep.
    pub fn snapshot(&self) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        s.run.scs_list = self.scs_list.clone();
        s.run.n_tti = self.n_tti;
        s.control.rapp_mode = self.rapp_mode;
        if let Some(&first) = self.seeds.first() {
            let contiguous = self.seeds.iter().enumerate().all(|(i, &x)| x == first + i as u64);
            if contiguous {
                s.run.base_seed = first;
                s.run.n_seeds = self.seeds.len() as u32;
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scs_list: Vec<u32>,
    pub seeds: Vec<u64>,
    pub n_tti: u32,
    pub mean_ran_ee: BTreeMap<u32, f64>,
    pub argmax_scs: u32,
    pub ran_ee_at_argmax: f64,
    /// `mean_ran_ee[argmax] / mean_ran_ee[1]` when scs 1 was simulated.
    pub gain_over_scs1: Option<f64>,
    /// Fraction of (seed, UE) pairs whose per-user EE beats their scs 1 value.
    pub per_user_improvement_over_scs1: BTreeMap<u32, f64>,
    pub rapp_mode: RappMode,
    /// Policy chosen by the sweep-select rApp.
    pub chosen_policy: Option<A1Policy>,
    pub zf_rows_dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Ordered by `scs_list`, then by seed.
    pub drops: Vec<DropResult>,
    pub mean_ran_ee: BTreeMap<u32, f64>,
    /// Per-user EE pooled over seeds (seed order, then UE id).
    pub pooled_per_user_ee: BTreeMap<u32, Vec<f64>>,
    pub summary: SweepSummary,
}

/// Runs every (scs, seed) drop of the sweep. Seeds run in parallel; every
/// reduction happens afterwards in a fixed order.
pub fn run_sweep(run_config: &RunConfig) -> Result<SweepOutcome> {
    run_config.validate()?;
    let per_seed: Vec<Vec<DropResult>> = run_config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(&run_config.scenario, seed, &run_config.scs_list, run_config.n_tti))
        .collect::<Result<_>>()?;

    let mut drops = Vec::with_capacity(run_config.scs_list.len() * run_config.seeds.len());
    for v in 0..run_config.scs_list.len() {
        for seed_drops in &per_seed {
            drops.push(seed_drops[v].clone());
        }
    }
    SweepOutcome::from_drops(run_config, drops)
}

impl SweepOutcome {
    /// Aggregates drops ordered by `scs_list` then seed.
    pub fn from_drops(run_config: &RunConfig, drops: Vec<DropResult>) -> Result<Self> {
        let mut mean_ran_ee = BTreeMap::new();
        let mut pooled_per_user_ee: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for &scs in &run_config.scs_list {
            let of_scs: Vec<&DropResult> = drops.iter().filter(|d| d.scs == scs).collect();
            if of_scs.is_empty() {
                return Err(Error::config(format!("no drops for scs {scs}")));
            }
            let mean = of_scs.iter().map(|d| d.kpi.ran_ee).sum::<f64>() / of_scs.len() as f64;
            mean_ran_ee.insert(scs, mean);
            pooled_per_user_ee.insert(scs, of_scs.iter().flat_map(|d| d.kpi.per_user_ee.iter().copied()).collect());
        }

        let best = rapp_sweep_select(&mean_ran_ee)?;
        let gain_over_scs1 = mean_ran_ee.get(&1).map(|base| mean_ran_ee[&best.scs] / base);
        let per_user_improvement_over_scs1 = match pooled_per_user_ee.get(&1) {
            Some(base) => pooled_per_user_ee
                .iter()
                .map(|(&scs, ee)| {
                    let better = ee.iter().zip(base).filter(|(x, b)| x > b).count();
                    (scs, better as f64 / base.len() as f64)
                })
                .collect(),
            None => BTreeMap::new(),
        };
        let summary = SweepSummary {
            scs_list: run_config.scs_list.clone(),
            seeds: run_config.seeds.clone(),
            n_tti: run_config.n_tti,
            argmax_scs: best.scs,
            ran_ee_at_argmax: mean_ran_ee[&best.scs],
            gain_over_scs1,
            per_user_improvement_over_scs1,
            rapp_mode: run_config.rapp_mode,
            chosen_policy: (run_config.rapp_mode == RappMode::SweepSelect).then_some(best),
            zf_rows_dropped: drops.iter().map(|d| d.audit.zf_rows_dropped).sum(),
            mean_ran_ee: mean_ran_ee.clone(),
        };
        Ok(Self {
            drops,
            mean_ran_ee,
            pooled_per_user_ee,
            summary,
        })
    }

    pub fn write_outputs(&self, run_config: &RunConfig, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), run_config.snapshot().to_toml_string()?)?;

        let mut w = csv_writer(&dir.join("ran_ee.csv"))?;
        for d in &self.drops {
            w.serialize(RanEeRow {
                scs: d.scs,
                seed: d.seed,
                total_bits: d.kpi.total_bits,
                total_energy_j: d.kpi.total_energy_j,
                ran_ee: d.kpi.ran_ee,
            })?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("per_user_ee.csv"))?;
        for d in &self.drops {
            for (ue, (tp, ee)) in d.kpi.ue_throughput_bps.iter().zip(&d.kpi.per_user_ee).enumerate() {
                w.serialize(PerUserRow {
                    scs: d.scs,
                    seed: d.seed,
                    ue_id: ue as u32,
                    throughput_bps: *tp,
                    per_user_ee: *ee,
                })?;
            }
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("cdf.csv"))?;
        for (&scs, values) in &self.pooled_per_user_ee {
            for (value, prob) in ecdf(values)? {
                w.serialize(CdfRow { scs, value, prob })?;
            }
        }
        w.flush()?;

        let mut kpi = fs::File::create(dir.join("o1_kpi.jsonl"))?;
        let mut e2 = fs::File::create(dir.join("e2_cluster_config.jsonl"))?;
        for d in &self.drops {
            serde_json::to_writer(&mut kpi, &KpiLine { seed: d.seed, scs: d.scs, report: &d.kpi })?;
            kpi.write_all(b"\n")?;
            serde_json::to_writer(&mut e2, &E2Line { seed: d.seed, config: &d.e2 })?;
            e2.write_all(b"\n")?;
        }

        let mut summary = serde_json::to_string_pretty(&self.summary)?;
        summary.push('\n');
        fs::write(dir.join("summary.json"), summary)?;
        Ok(())
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

#[derive(Serialize)]
struct RanEeRow {
    scs: u32,
    seed: u64,
    total_bits: f64,
    total_energy_j: f64,
    ran_ee: f64,
}

#[derive(Serialize)]
struct PerUserRow {
    scs: u32,
    seed: u64,
    ue_id: u32,
    throughput_bps: f64,
    per_user_ee: f64,
}

#[derive(Serialize)]
struct CdfRow {
    scs: u32,
    value: f64,
    prob: f64,
}

#[derive(Serialize)]
struct KpiLine<'a> {
    seed: u64,
    scs: u32,
    report: &'a O1KpiReport,
}

#[derive(Serialize)]
struct E2Line<'a> {
    seed: u64,
    config: &'a E2ClusterConfig,
}
