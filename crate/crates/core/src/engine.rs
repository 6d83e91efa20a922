//! Drop execution: deployment, cluster formation and the per-TTI
//! schedule / precode / rate / energy loop.
//!
//! Channel draws depend only on the seed, so one pass over the TTIs of a
//! seed evaluates any number of cluster sizes against the same channels.

use std::rc::Rc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{measure_rsrp, LargeScaleTable, RbChannels, RsrpReport};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::phy::{channel_gram, noise_power_w, power_split, ue_tti_bits, zf_stream_gains, StreamGains};
use crate::power::{ru_consumed_power_w, EnergyLedger, TtiResult};
use crate::ric::{aggregate_o1_kpis, rapp_fixed_policy, xapp_form_clusters, E2ClusterConfig, O1KpiReport};
use crate::rng::{StreamFamily, FADING};
use crate::scheduler::{schedule_with, CandidateSets, TtiSchedule};
use crate::topology::{build_deployment, Deployment};

/// Power-conservation bookkeeping of a drop.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerAudit {
    /// (TTI, RU, RB) slots with at least one served user.
    pub active_rb_slots: u64,
    /// Largest `|sum of stream powers - RB budget| / RB budget` over active slots.
    pub max_rb_power_rel_err: f64,
    /// Largest per-RU ratio of window-average radiated power to the RU budget.
    pub max_radiated_ratio: f64,
    /// Users removed by ZF conditioning.
    pub zf_rows_dropped: u64,
}

impl PowerAudit {
    fn absorb(&mut self, other: &PowerAudit) {
        self.active_rb_slots += other.active_rb_slots;
        self.max_rb_power_rel_err = self.max_rb_power_rel_err.max(other.max_rb_power_rel_err);
        self.max_radiated_ratio = self.max_radiated_ratio.max(other.max_radiated_ratio);
        self.zf_rows_dropped += other.zf_rows_dropped;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropResult {
    pub seed: u64,
    pub scs: u32,
    pub n_tti: u32,
    pub ue_bits: Vec<f64>,
    pub ru_energy_j: Vec<f64>,
    pub ru_radiated_energy_j: Vec<f64>,
    pub kpi: O1KpiReport,
    pub e2: E2ClusterConfig,
    pub audit: PowerAudit,
}

/// Intermediates of one TTI, recorded by [`run_drop_traced`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtiTrace {
    pub schedule: TtiSchedule,
    /// `channels[rb]`
    pub channels: Vec<RbChannels>,
    /// `sinr[ue][rb]`, `None` where the UE has no stream.
    pub sinr: Vec<Vec<Option<f64>>>,
    pub result: TtiResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropTrace {
    pub deployment: Deployment,
    pub large_scale: LargeScaleTable,
    pub rsrp: Vec<RsrpReport>,
    pub e2: E2ClusterConfig,
    pub noise_w: f64,
    pub ttis: Vec<TtiTrace>,
}

struct Variant {
    e2: E2ClusterConfig,
    sets: CandidateSets,
}

struct DropContext<'a> {
    config: &'a ScenarioConfig,
    seed: u64,
    deployment: Deployment,
    table: LargeScaleTable,
    rsrp: Vec<RsrpReport>,
    fading: StreamFamily,
    noise_w: f64,
    rb_budget_w: Vec<f64>,
    variants: Vec<Variant>,
}

struct VariantTti {
    result: TtiResult,
    audit: PowerAudit,
    schedule: Option<TtiSchedule>,
    sinr: Option<Vec<Vec<Option<f64>>>>,
}

struct TtiOutput {
    variants: Vec<VariantTti>,
    channels: Option<Vec<RbChannels>>,
}

impl<'a> DropContext<'a> {
    fn new(config: &'a ScenarioConfig, seed: u64, scs_list: &[u32]) -> Result<Self> {
        let first_scs = scs_list.first().copied().unwrap_or(0);
        let deployment = build_deployment(config, seed).map_err(|e| e.in_drop(seed, first_scs, "deployment"))?;
        let table = LargeScaleTable::build(&deployment, &config.channel, seed);
        let rsrp = measure_rsrp(&deployment, &table, 0);
        let variants = scs_list
            .iter()
            .map(|&scs| {
                let policy = rapp_fixed_policy(scs).map_err(|e| e.in_drop(seed, scs, "policy"))?;
                let clusters = xapp_form_clusters(&rsrp, &policy).map_err(|e| e.in_drop(seed, scs, "clustering"))?;
                let sets = CandidateSets::new(
                    &clusters,
                    &deployment,
                    config.scheduler.l_max,
                    config.scheduler.antennas_per_stream,
                );
                Ok(Variant {
                    e2: E2ClusterConfig {
                        apply_tti: 0,
                        policy,
                        clusters,
                    },
                    sets,
                })
            })
            .collect::<Result<_>>()?;
        let n_rb = deployment.carrier.n_rb;
        Ok(Self {
            config,
            seed,
            noise_w: noise_power_w(&deployment.carrier),
            rb_budget_w: deployment.radio_units.iter().map(|r| r.per_rb_budget_w(n_rb)).collect(),
            fading: StreamFamily::new(seed, FADING),
            deployment,
            table,
            rsrp,
            variants,
        })
    }

    fn simulate_tti(&self, tti: u64, trace: bool) -> Result<TtiOutput> {
        let dep = &self.deployment;
        let carrier = &dep.carrier;
        let (n_ue, n_ru, n_rb) = (dep.n_ue(), dep.n_ru(), carrier.n_rb);

        let schedules: Vec<TtiSchedule> = self.variants.iter().map(|v| schedule_with(&v.sets, n_rb, tti)).collect();
        let mut sinr: Vec<Vec<Vec<Option<f64>>>> = vec![vec![vec![None; n_rb as usize]; n_ue]; self.variants.len()];
        let mut radiated = vec![vec![0.0f64; n_ru]; self.variants.len()];
        let mut audits = vec![PowerAudit::default(); self.variants.len()];
        let mut traced_channels = trace.then(Vec::new);

        let mut signal = vec![0.0f64; n_ue];
        let mut interference = vec![0.0f64; n_ue];
        let mut served = vec![false; n_ue];
        for rb in 0..n_rb {
            let channels = RbChannels::generate(&self.fading, dep, &self.table, tti, rb);
            // Gram matrices are shared by every cluster-size variant.
            let grams: Vec<Option<Vec<_>>> = (0..n_ru)
                .map(|a| {
                    schedules
                        .iter()
                        .any(|s| !s.served(a, rb as usize).is_empty())
                        .then(|| channel_gram(channels.ru_matrix(a), n_ue, channels.n_antennas(a)))
                })
                .collect();
            // Variants often schedule identical sets on an RU; reuse their gains.
            let mut memo: Vec<Vec<(&[u32], Rc<StreamGains>)>> = vec![Vec::new(); n_ru];
            for (v, schedule) in schedules.iter().enumerate() {
                signal.fill(0.0);
                interference.fill(0.0);
                served.fill(false);
                for a in 0..n_ru {
                    let scheduled = schedule.served(a, rb as usize);
                    if scheduled.is_empty() {
                        continue;
                    }
                    let gains = match memo[a].iter().find(|(set, _)| *set == scheduled) {
                        Some((_, g)) => Rc::clone(g),
                        None => {
                            let gram = grams[a].as_ref().expect("gram exists for scheduled RUs");
                            let g = Rc::new(zf_stream_gains(gram, n_ue, scheduled));
                            memo[a].push((scheduled, Rc::clone(&g)));
                            g
                        }
                    };
                    let audit = &mut audits[v];
                    audit.zf_rows_dropped += gains.dropped as u64;
                    let k = gains.n_streams();
                    if k == 0 {
                        continue;
                    }
                    let budget = self.rb_budget_w[a];
                    let p = power_split(budget, k);
                    let allocated: f64 = (0..k).map(|_| p).sum();
                    audit.active_rb_slots += 1;
                    audit.max_rb_power_rel_err = audit.max_rb_power_rel_err.max((allocated - budget).abs() / budget);
                    radiated[v][a] += allocated;
                    for u in 0..n_ue {
                        for (s, &ue) in gains.stream_ue.iter().enumerate() {
                            let rx = p * gains.get(u, s);
                            if ue as usize == u {
                                signal[u] += rx;
                                served[u] = true;
                            } else {
                                interference[u] += rx;
                            }
                        }
                    }
                }
                for u in 0..n_ue {
                    if served[u] {
                        sinr[v][u][rb as usize] = Some(signal[u] / (interference[u] + self.noise_w));
                    }
                }
            }
            if let Some(t) = traced_channels.as_mut() {
                t.push(channels);
            }
        }

        let se_cap = self.config.scheduler.se_cap_bps_hz;
        let mut variants = Vec::with_capacity(self.variants.len());
        for (v, schedule) in schedules.into_iter().enumerate() {
            let ru_consumed_w = dep
                .radio_units
                .iter()
                .zip(&radiated[v])
                .map(|(ru, &r)| ru_consumed_power_w(r, ru, &self.config.power_model))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_drop(self.seed, self.variants[v].e2.policy.scs, format!("tti {tti}")))?;
            let ue_bits = sinr[v].iter().map(|row| ue_tti_bits(row, carrier, se_cap)).collect();
            variants.push(VariantTti {
                result: TtiResult {
                    tti,
                    ue_bits,
                    ru_radiated_w: std::mem::take(&mut radiated[v]),
                    ru_consumed_w,
                },
                audit: std::mem::take(&mut audits[v]),
                schedule: trace.then_some(schedule),
                sinr: trace.then(|| std::mem::take(&mut sinr[v])),
            });
        }
        Ok(TtiOutput {
            variants,
            channels: traced_channels,
        })
    }

    fn run(&self, n_tti: u32, trace: bool) -> Result<(Vec<DropResult>, Vec<TtiOutput>)> {
        let outputs: Vec<TtiOutput> = (0..u64::from(n_tti))
            .into_par_iter()
            .map(|t| self.simulate_tti(t, trace))
            .collect::<Result<_>>()?;

        let dep = &self.deployment;
        let dt = dep.carrier.tti_duration_s;
        let mut drops = Vec::with_capacity(self.variants.len());
        for (v, variant) in self.variants.iter().enumerate() {
            let scs = variant.e2.policy.scs;
            let results: Vec<TtiResult> = outputs.iter().map(|o| o.variants[v].result.clone()).collect();
            let mut audit = PowerAudit::default();
            let mut ledger = EnergyLedger::new(dep.n_ru(), dep.n_ue());
            for (o, r) in outputs.iter().zip(&results) {
                audit.absorb(&o.variants[v].audit);
                ledger.record(r, dt);
            }
            let duration = f64::from(n_tti) * dt;
            for (ru, e) in dep.radio_units.iter().zip(&ledger.ru_radiated_j) {
                audit.max_radiated_ratio = audit.max_radiated_ratio.max(e / duration / ru.max_tx_power_w());
            }
            let kpi = aggregate_o1_kpis(&results, 0..u64::from(n_tti), dep.n_ue(), dt)
                .map_err(|e| e.in_drop(self.seed, scs, "kpi aggregation"))?;
            drops.push(DropResult {
                seed: self.seed,
                scs,
                n_tti,
                ue_bits: ledger.ue_bits,
                ru_energy_j: ledger.ru_consumed_j,
                ru_radiated_energy_j: ledger.ru_radiated_j,
                kpi,
                e2: variant.e2.clone(),
                audit,
            });
        }
        Ok((drops, outputs))
    }
}

/// Runs one seed for every cluster size in `scs_list`, sharing channel draws.
/// Results are in `scs_list` order and identical to separate [`run_drop`]
/// calls.
pub fn run_seed(config: &ScenarioConfig, seed: u64, scs_list: &[u32], n_tti: u32) -> Result<Vec<DropResult>> {
    check_n_tti(n_tti)?;
    let ctx = DropContext::new(config, seed, scs_list)?;
    Ok(ctx.run(n_tti, false)?.0)
}

/// One drop of `n_tti` TTIs with serving cluster size `scs`.
pub fn run_drop(config: &ScenarioConfig, scs: u32, seed: u64, n_tti: u32) -> Result<DropResult> {
    let mut drops = run_seed(config, seed, &[scs], n_tti)?;
    Ok(drops.remove(0))
}

/// [`run_drop`] that also returns every intermediate (channels, schedules,
/// SINRs). Memory grows with `n_tti * n_rb * n_ue * n_antennas`; meant for
/// small instances.
pub fn run_drop_traced(config: &ScenarioConfig, scs: u32, seed: u64, n_tti: u32) -> Result<(DropResult, DropTrace)> {
    check_n_tti(n_tti)?;
    let ctx = DropContext::new(config, seed, &[scs])?;
    let (mut drops, outputs) = ctx.run(n_tti, true)?;
    let ttis = outputs
        .into_iter()
        .map(|mut o| {
            let v = o.variants.remove(0);
            TtiTrace {
                schedule: v.schedule.expect("traced run records schedules"),
                channels: o.channels.expect("traced run records channels"),
                sinr: v.sinr.expect("traced run records SINR"),
                result: v.result,
            }
        })
        .collect();
    let drop = drops.remove(0);
    let trace = DropTrace {
        deployment: ctx.deployment,
        large_scale: ctx.table,
        rsrp: ctx.rsrp,
        e2: drop.e2.clone(),
        noise_w: ctx.noise_w,
        ttis,
    };
    Ok((drop, trace))
}

fn check_n_tti(n_tti: u32) -> Result<()> {
    if n_tti == 0 || u64::from(n_tti) > crate::rng::MAX_TTI {
        return Err(Error::config(format!("n_tti must be in 1..={}", crate::rng::MAX_TTI)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.carrier.n_rb = 6;
        cfg.topology.ue_count = 10;
        cfg
    }

    #[test]
    fn scs_one_is_network_centric() {
        let cfg = small_config();
        let (drop, trace) = run_drop_traced(&cfg, 1, 5, 1).unwrap();
        for r in &trace.rsrp {
            let best = r
                .rsrp_dbm
                .iter()
                .fold((u32::MAX, f64::NEG_INFINITY), |b, (k, v)| if *v > b.1 { (*k, *v) } else { b });
            assert_eq!(drop.e2.clusters.serving(r.ue_id), &[best.0]);
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let cfg = small_config();
        assert_eq!(run_drop(&cfg, 2, 9, 3).unwrap(), run_drop(&cfg, 2, 9, 3).unwrap());
    }

    #[test]
    fn shared_seed_run_matches_single_drops() {
        let cfg = small_config();
        let all = run_seed(&cfg, 4, &[1, 3, 6], 2).unwrap();
        for d in &all {
            assert_eq!(d, &run_drop(&cfg, d.scs, 4, 2).unwrap());
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small_config();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_drop(&cfg, 3, 2, 4).unwrap());
        let b = four.install(|| run_drop(&cfg, 3, 2, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn five_hundred_ttis_span_half_a_second() {
        let mut cfg = small_config();
        cfg.carrier.n_rb = 1;
        cfg.topology.ue_count = 2;
        let d = run_drop(&cfg, 1, 1, 500).unwrap();
        assert!((d.kpi.window_duration_s - 0.5).abs() < 1e-12);
        assert_eq!(d.kpi.window_end_tti, 500);
    }

    #[test]
    fn power_is_conserved() {
        let cfg = small_config();
        for scs in 1..=6 {
            let d = run_drop(&cfg, scs, 3, 2).unwrap();
            assert!(d.audit.active_rb_slots > 0);
            assert!(d.audit.max_rb_power_rel_err <= 1e-9);
            assert!(d.audit.max_radiated_ratio <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn invalid_inputs_carry_context() {
        let cfg = small_config();
        let err = run_drop(&cfg, 0, 11, 1).unwrap_err();
        assert!(matches!(err, Error::Drop { seed: 11, scs: 0, .. }), "{err}");
        assert!(run_drop(&cfg, 1, 1, 0).is_err());
    }
}
