use scf_core::config::ScenarioConfig;
use scf_core::engine::run_seed;
use scf_core::{run_drop, run_drop_traced, run_sweep, RappMode, RunConfig};

fn small() -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.carrier.n_rb = 6;
    c.carrier.bandwidth_mhz = 6.0 * 0.18;
    c
}

#[test]
fn shared_seed_pass_matches_single_drops() {
    let c = small();
    let joint = run_seed(&c, 9, &[1, 2, 3], 3).unwrap();
    for d in joint {
        let single = run_drop(&c, d.scs, 9, 3).unwrap();
        assert_eq!(single, d);
    }
}

#[test]
fn traced_run_matches_plain_run() {
    let c = small();
    let (traced, trace) = run_drop_traced(&c, 2, 5, 2).unwrap();
    assert_eq!(traced, run_drop(&c, 2, 5, 2).unwrap());
    assert_eq!(trace.ttis.len(), 2);
    assert_eq!(trace.ttis[0].channels.len(), 6);
    assert_eq!(trace.rsrp.len(), 20);
    for t in &trace.ttis {
        for (u, row) in t.sinr.iter().enumerate() {
            for (rb, s) in row.iter().enumerate() {
                let scheduled = (0..6).any(|a| t.schedule.served(a, rb).contains(&(u as u32)));
                assert_eq!(s.is_some(), scheduled);
            }
        }
    }
}

#[test]
fn kpis_are_consistent() {
    let c = small();
    let d = run_drop(&c, 3, 2, 4).unwrap();
    let bits: f64 = d.ue_bits.iter().sum();
    let energy: f64 = d.ru_energy_j.iter().sum();
    assert!((d.kpi.total_bits - bits).abs() <= 1e-9 * bits);
    assert!((d.kpi.total_energy_j - energy).abs() <= 1e-9 * energy);
    assert!((d.kpi.window_duration_s - 0.004).abs() < 1e-15);
    assert!(d.kpi.ran_ee > 0.0);
    assert_eq!(d.e2.policy.scs, 3);
    assert!(d.e2.clusters.iter().all(|(_, rus)| rus.len() == 3));
}

#[test]
fn sweep_select_picks_best_observed() {
    let mut rc = RunConfig::from_scenario(small());
    rc.scs_list = vec![1, 2, 4];
    rc.seeds = vec![1, 2];
    rc.n_tti = 2;
    rc.rapp_mode = RappMode::SweepSelect;
    let out = run_sweep(&rc).unwrap();
    let chosen = out.summary.chosen_policy.as_ref().unwrap();
    assert_eq!(chosen.scs, out.summary.argmax_scs);
    assert_eq!(out.drops.len(), 6);
}
