//! Per-TTI OFDMA allocation with round-robin user windows per RU.

use serde::{Deserialize, Serialize};

use crate::ric::ClusterMap;
use crate::topology::Deployment;

/// Served UE ids on every (RU, RB) of one TTI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtiSchedule {
    pub tti: u64,
    /// `served[ru][rb]`
    pub served: Vec<Vec<Vec<u32>>>,
}

impl TtiSchedule {
    pub fn served(&self, ru: usize, rb: usize) -> &[u32] {
        &self.served[ru][rb]
    }
}

/// UEs whose cluster contains each RU, sorted by UE id, plus each RU's
/// co-scheduling limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSets {
    candidates: Vec<Vec<u32>>,
    limits: Vec<usize>,
}

/// Co-scheduling limit of an RU: `min(l_max_config, n_antennas / antennas_per_stream)`,
/// never below 1.
pub fn stream_limit(n_antennas: u32, l_max_config: u32, antennas_per_stream: u32) -> usize {
    (n_antennas / antennas_per_stream.max(1)).min(l_max_config).max(1) as usize
}

impl CandidateSets {
    pub fn new(cluster_map: &ClusterMap, deployment: &Deployment, l_max_config: u32, antennas_per_stream: u32) -> Self {
        let mut candidates = vec![Vec::new(); deployment.n_ru()];
        // ClusterMap iterates in ascending UE id order.
        for (ue, rus) in cluster_map.iter() {
            for &ru in rus {
                candidates[ru as usize].push(ue);
            }
        }
        let limits = deployment
            .radio_units
            .iter()
            .map(|ru| stream_limit(ru.n_antennas, l_max_config, antennas_per_stream))
            .collect();
        Self { candidates, limits }
    }

    pub fn candidates(&self, ru: usize) -> &[u32] {
        &self.candidates[ru]
    }

    pub fn limit(&self, ru: usize) -> usize {
        self.limits[ru]
    }

    /// Users served by `ru` on `rb` during `tti`, appended to `out`.
    pub fn served_into(&self, ru: usize, rb: u64, tti: u64, out: &mut Vec<u32>) {
        let cands = &self.candidates[ru];
        let limit = self.limits[ru];
        if cands.len() <= limit {
            out.extend_from_slice(cands);
            return;
        }
        let n = cands.len() as u64;
        let start = ((tti + rb) % n) * (limit as u64 % n) % n;
        for i in 0..limit as u64 {
            out.push(cands[((start + i) % n) as usize]);
        }
    }
}

/// Round-robin schedule: an RU with at most `L_max` candidates serves all of
/// them on every RB; otherwise RB `r` serves the `L_max` candidates starting
/// at circular offset `((tti + r) * L_max) mod |U|`.
///
/// Here `L_max = min(n_antennas, l_max_config)`; see [`CandidateSets::new`]
/// for the antennas-per-stream variant used by the engine.
pub fn schedule_tti(cluster_map: &ClusterMap, deployment: &Deployment, tti: u64, l_max_config: u32) -> TtiSchedule {
    let sets = CandidateSets::new(cluster_map, deployment, l_max_config, 1);
    schedule_with(&sets, deployment.carrier.n_rb, tti)
}

pub fn schedule_with(sets: &CandidateSets, n_rb: u32, tti: u64) -> TtiSchedule {
    let served = (0..sets.candidates.len())
        .map(|ru| {
            (0..u64::from(n_rb))
                .map(|rb| {
                    let mut v = Vec::with_capacity(sets.limit(ru));
                    sets.served_into(ru, rb, tti, &mut v);
                    v
                })
                .collect()
        })
        .collect();
    TtiSchedule { tti, served }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::topology::build_deployment;
    use std::collections::BTreeMap;

    fn deployment(n_rb: u32) -> Deployment {
        let mut cfg = ScenarioConfig::default();
        cfg.carrier.n_rb = n_rb;
        cfg.topology.ue_count = 12;
        build_deployment(&cfg, 1).unwrap()
    }

    fn map_to(ru: u32, ues: impl IntoIterator<Item = u32>, n_ue: u32) -> ClusterMap {
        let mut m: BTreeMap<u32, Vec<u32>> = (0..n_ue).map(|u| (u, vec![0])).collect();
        for u in ues {
            m.insert(u, vec![ru]);
        }
        ClusterMap(m)
    }

    /// Direct enumeration of the circular window.
    fn window(cands: &[u32], limit: usize, tti: u64, rb: u64) -> Vec<u32> {
        let n = cands.len();
        let off = ((tti + rb) as usize * limit) % n;
        (0..limit).map(|i| cands[(off + i) % n]).collect()
    }

    #[test]
    fn under_capacity_serves_everyone() {
        let dep = deployment(4);
        let map = map_to(2, [3, 7], 12);
        let s = schedule_tti(&map, &dep, 5, 8);
        for rb in 0..4 {
            assert_eq!(s.served(2, rb), &[3, 7]);
        }
    }

    #[test]
    fn circular_window_example() {
        let dep = deployment(4);
        let map = map_to(1, 0..10, 12);
        let s = schedule_tti(&map, &dep, 0, 8);
        assert_eq!(s.served(1, 0), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(s.served(1, 1), &[8, 9, 0, 1, 2, 3, 4, 5]);
        for tti in 0..7 {
            let s = schedule_tti(&map, &dep, tti, 8);
            for rb in 0..4 {
                assert_eq!(s.served(1, rb), window(&(0..10).collect::<Vec<_>>(), 8, tti, rb as u64));
            }
        }
    }

    #[test]
    fn unselected_ru_is_silent() {
        let dep = deployment(3);
        let map = map_to(0, 0..12, 12);
        let s = schedule_tti(&map, &dep, 0, 8);
        assert!(s.served[4].iter().all(Vec::is_empty));
    }

    #[test]
    fn served_users_belong_to_cluster_and_respect_limit() {
        let dep = deployment(6);
        let map = ClusterMap((0..12).map(|u| (u, vec![u % 6, (u + 1) % 6, 0])).collect());
        for tti in 0..5 {
            let s = schedule_tti(&map, &dep, tti, 2);
            for ru in 0..dep.n_ru() {
                for rb in 0..6 {
                    let served = s.served(ru, rb);
                    assert!(served.len() <= 2);
                    for ue in served {
                        assert!(map.serving(*ue).contains(&(ru as u32)));
                    }
                }
            }
        }
    }

    #[test]
    fn limits_follow_antenna_budget() {
        assert_eq!(stream_limit(128, 8, 1), 8);
        assert_eq!(stream_limit(2, 8, 1), 2);
        assert_eq!(stream_limit(128, 32, 4), 32);
        assert_eq!(stream_limit(32, 32, 4), 8);
        assert_eq!(stream_limit(2, 32, 4), 1);

        let dep = deployment(2);
        let map = ClusterMap((0..12).map(|u| (u, vec![0, 1])).collect());
        let sets = CandidateSets::new(&map, &dep, 32, 4);
        assert_eq!(sets.limit(0), 32);
        assert_eq!(sets.limit(1), 8);
        let s = schedule_with(&sets, 2, 0);
        assert_eq!(s.served(0, 0).len(), 12);
        assert_eq!(s.served(1, 0).len(), 8);
    }

    #[test]
    fn round_robin_is_fair() {
        for (n_cand, limit, n_rb) in [(10u32, 8u32, 4u32), (20, 8, 3), (11, 3, 5), (9, 2, 133)] {
            let dep = deployment(n_rb);
            let mut cfg_ues: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for u in 0..n_cand {
                cfg_ues.insert(u, vec![1]);
            }
            let map = ClusterMap(cfg_ues);
            let sets = CandidateSets::new(&map, &dep, limit, 1);
            let mut counts = vec![0usize; n_cand as usize];
            for tti in 0..u64::from(n_cand) {
                let s = schedule_with(&sets, n_rb, tti);
                for rb in 0..n_rb as usize {
                    for ue in s.served(1, rb) {
                        counts[*ue as usize] += 1;
                    }
                }
            }
            let lo = *counts.iter().min().unwrap();
            let hi = *counts.iter().max().unwrap();
            assert!(hi - lo <= 1, "{n_cand}/{limit}/{n_rb}: {counts:?}");
        }
    }
}
