//! Simulated RIC control plane.
//!
//! The rApp issues A1 policies carrying the serving cluster size, the xApp
//! turns E2 RSRP reports into per-UE serving clusters, and O1 KPI reports
//! close the loop. Interfaces are in-process documents, not wire encodings.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::channel::RsrpReport;
use crate::error::{Error, Result};
use crate::power::{per_user_ee, ran_ee, EnergyLedger, TtiResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScfAlgorithm {
    TopNRsrp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct A1Policy {
    pub policy_id: u32,
    /// Serving cluster size.
    pub scs: u32,
    pub algorithm: ScfAlgorithm,
}

/// Serving RUs of every UE, strongest RSRP first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterMap(pub BTreeMap<u32, Vec<u32>>);

impl ClusterMap {
    pub fn serving(&self, ue: u32) -> &[u32] {
        self.0.get(&ue).map_or(&[], Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &[u32])> {
        self.0.iter().map(|(ue, rus)| (*ue, rus.as_slice()))
    }

    pub fn n_ue(&self) -> usize {
        self.0.len()
    }
}

/// Cluster configuration pushed to the E2 node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E2ClusterConfig {
    pub apply_tti: u64,
    pub policy: A1Policy,
    pub clusters: ClusterMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct O1KpiReport {
    pub window_start_tti: u64,
    pub window_end_tti: u64,
    pub window_duration_s: f64,
    pub total_bits: f64,
    pub total_energy_j: f64,
    /// Downlink throughput per UE, bit/s.
    pub ue_throughput_bps: Vec<f64>,
    /// Average consumed power per RU, W.
    pub ru_power_w: Vec<f64>,
    /// bit/J
    pub ran_ee: f64,
    /// bit/J
    pub per_user_ee: Vec<f64>,
}

/// Top-N RSRP cluster formation, ties broken toward the lower RU id.
pub fn xapp_form_clusters(reports: &[RsrpReport], policy: &A1Policy) -> Result<ClusterMap> {
    if policy.scs == 0 {
        return Err(Error::InvalidScs(policy.scs));
    }
    let all_rus: BTreeSet<u32> = reports.iter().flat_map(|r| r.rsrp_dbm.keys().copied()).collect();
    let n = (policy.scs as usize).min(all_rus.len());

    let mut clusters = BTreeMap::new();
    for report in reports {
        if let Some(ru) = all_rus.iter().find(|ru| !report.rsrp_dbm.contains_key(ru)) {
            return Err(Error::MissingRsrp {
                ue: report.ue_id,
                ru: *ru,
            });
        }
        if let Some((ru, _)) = report.rsrp_dbm.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteRsrp {
                ue: report.ue_id,
                ru: *ru,
            });
        }
        let mut ranked: Vec<(u32, f64)> = report.rsrp_dbm.iter().map(|(k, v)| (*k, *v)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let serving = ranked.into_iter().take(n).map(|(ru, _)| ru).collect();
        if clusters.insert(report.ue_id, serving).is_some() {
            return Err(Error::config(format!("duplicate RSRP report for UE {}", report.ue_id)));
        }
    }
    Ok(ClusterMap(clusters))
}

/// Static policy with a fixed cluster size.
pub fn rapp_fixed_policy(n: u32) -> Result<A1Policy> {
    if n < 1 {
        return Err(Error::InvalidScs(n));
    }
    Ok(A1Policy {
        policy_id: n,
        scs: n,
        algorithm: ScfAlgorithm::TopNRsrp,
    })
}

/// Picks the cluster size with the highest observed RAN EE, preferring the
/// smaller size on ties.
pub fn rapp_sweep_select(history: &BTreeMap<u32, f64>) -> Result<A1Policy> {
    let mut best: Option<(u32, f64)> = None;
    for (&scs, &ee) in history {
        if !(ee.is_finite() && ee >= 0.0) {
            return Err(Error::InvalidHistoryValue { scs, value: ee });
        }
        if best.is_none_or(|(_, b)| ee > b) {
            best = Some((scs, ee));
        }
    }
    let (scs, _) = best.ok_or(Error::EmptyHistory)?;
    rapp_fixed_policy(scs)
}

/// Aggregates the TTIs of `window` into an O1 KPI report.
pub fn aggregate_o1_kpis(
    tti_results: &[TtiResult],
    window: Range<u64>,
    n_ue: usize,
    tti_duration_s: f64,
) -> Result<O1KpiReport> {
    let bad_window = || Error::InvalidWindow {
        start: window.start,
        end: window.end,
    };
    if window.is_empty() || n_ue == 0 {
        return Err(bad_window());
    }
    let in_window: Vec<&TtiResult> = tti_results.iter().filter(|t| window.contains(&t.tti)).collect();
    if in_window.len() as u64 != window.end - window.start {
        return Err(bad_window());
    }
    let n_ru = in_window[0].ru_consumed_w.len();
    let mut ledger = EnergyLedger::new(n_ru, n_ue);
    for t in in_window {
        if t.ue_bits.len() != n_ue || t.ru_consumed_w.len() != n_ru {
            return Err(bad_window());
        }
        ledger.record(t, tti_duration_s);
    }
    kpi_report_from_ledger(&ledger, window.start, tti_duration_s)
}

pub(crate) fn kpi_report_from_ledger(
    ledger: &EnergyLedger,
    window_start_tti: u64,
    tti_duration_s: f64,
) -> Result<O1KpiReport> {
    let duration = ledger.n_tti as f64 * tti_duration_s;
    let total_bits = ledger.total_bits();
    let total_energy_j = ledger.total_energy_j();
    let n_ue = ledger.ue_bits.len();
    Ok(O1KpiReport {
        window_start_tti,
        window_end_tti: window_start_tti + ledger.n_tti,
        window_duration_s: duration,
        total_bits,
        total_energy_j,
        ue_throughput_bps: ledger.ue_bits.iter().map(|b| b / duration).collect(),
        ru_power_w: ledger.ru_consumed_j.iter().map(|e| e / duration).collect(),
        ran_ee: ran_ee(total_bits, total_energy_j)?,
        per_user_ee: ledger
            .ue_bits
            .iter()
            .map(|b| per_user_ee(*b, total_energy_j, n_ue))
            .collect::<Result<_>>()?,
    })
}
