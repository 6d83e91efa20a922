//! Propagation: log-distance path loss with log-normal shadowing, i.i.d.
//! Rayleigh block fading, and RSRP measurement.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::ChannelConfig;
use crate::rng::{fading_stream_id, shadowing_stream_id, StreamFamily, SHADOWING};
use crate::topology::{Carrier, Deployment, RadioUnit};

pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 3.0;

/// Log-distance path loss in dB with the default exponent of 3.
///
/// Distances below 1 m are clamped to 1 m.
pub fn path_loss_db(d3d_m: f64, f_ghz: f64) -> f64 {
    log_distance_path_loss_db(d3d_m, f_ghz, DEFAULT_PATH_LOSS_EXPONENT)
}

/// `32.4 + 20 log10(f_GHz) + 10 n log10(d)`, with `d` clamped to at least 1 m.
pub fn log_distance_path_loss_db(d3d_m: f64, f_ghz: f64, exponent: f64) -> f64 {
    let d = d3d_m.max(1.0);
    32.4 + 20.0 * f_ghz.log10() + 10.0 * exponent * d.log10()
}

/// Zero-mean Gaussian shadowing sample in dB.
pub fn draw_shadowing_db<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma_db * z
}

pub fn large_scale_gain_db(pl_db: f64, sf_db: f64) -> f64 {
    -pl_db + sf_db
}

/// `n_ant` i.i.d. CN(0, 1) entries.
pub fn draw_small_scale<R: Rng + ?Sized>(rng: &mut R, n_ant: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_ant);
    fill_small_scale(rng, 1.0, n_ant, &mut out);
    out
}

fn fill_small_scale<R: Rng + ?Sized>(rng: &mut R, amplitude: f64, n_ant: usize, out: &mut Vec<Complex64>) {
    let scale = amplitude * FRAC_1_SQRT_2;
    for _ in 0..n_ant {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        out.push(Complex64::new(scale * re, scale * im));
    }
}

/// Small-scale vector addressed by its `(tti, rb, ru, ue)` key.
pub fn small_scale_vector(
    fading: &StreamFamily,
    tti: u64,
    rb: u32,
    ru: u32,
    ue: u32,
    n_ant: usize,
) -> Vec<Complex64> {
    draw_small_scale(&mut fading.stream(fading_stream_id(tti, rb, ru, ue)), n_ant)
}

/// Per-RB reference signal power through the large-scale gain only.
pub fn rsrp_dbm(ru: &RadioUnit, gain_db: f64, carrier: &Carrier) -> f64 {
    ru.tx_power_dbm - 10.0 * f64::from(carrier.n_rb).log10() + gain_db
}

/// Path loss plus shadowing for every (UE, RU) pair of one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleTable {
    /// `gain_db[ue][ru]`
    pub gain_db: Vec<Vec<f64>>,
}

impl LargeScaleTable {
    pub fn build(deployment: &Deployment, channel: &ChannelConfig, seed: u64) -> Self {
        let shadowing = StreamFamily::new(seed, SHADOWING);
        let f_ghz = deployment.carrier.center_freq_ghz;
        let gain_db = deployment
            .user_terminals
            .iter()
            .map(|ue| {
                deployment
                    .radio_units
                    .iter()
                    .map(|ru| {
                        let d = ue.position.distance(&ru.position);
                        let pl = log_distance_path_loss_db(d, f_ghz, channel.path_loss_exponent);
                        let mut rng = shadowing.stream(shadowing_stream_id(ue.id, ru.id));
                        let sf = draw_shadowing_db(&mut rng, channel.shadowing_sigma_db);
                        large_scale_gain_db(pl, sf)
                    })
                    .collect()
            })
            .collect();
        Self { gain_db }
    }

    pub fn gain_db(&self, ue: usize, ru: usize) -> f64 {
        self.gain_db[ue][ru]
    }

    /// Amplitude factor `sqrt(10^(gain_db / 10))`.
    pub fn amplitude(&self, ue: usize, ru: usize) -> f64 {
        10f64.powf(self.gain_db[ue][ru] / 20.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsrpReport {
    pub ue_id: u32,
    /// RSRP in dBm keyed by RU id.
    pub rsrp_dbm: BTreeMap<u32, f64>,
    pub tti: u64,
}

/// E2-style RSRP reports of every UE, fast-fading free.
pub fn measure_rsrp(deployment: &Deployment, table: &LargeScaleTable, tti: u64) -> Vec<RsrpReport> {
    deployment
        .user_terminals
        .iter()
        .enumerate()
        .map(|(u, ue)| RsrpReport {
            ue_id: ue.id,
            rsrp_dbm: deployment
                .radio_units
                .iter()
                .enumerate()
                .map(|(a, ru)| (ru.id, rsrp_dbm(ru, table.gain_db(u, a), &deployment.carrier)))
                .collect(),
            tti,
        })
        .collect()
}

/// Effective channel vectors (large-scale amplitude times small-scale
/// fading) of every (RU, UE) pair on one resource block of one TTI.
///
/// Vectors of one RU are stored contiguously, UE-major, so the rows of the
/// RU's `n_ue x n_antennas` channel matrix are adjacent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbChannels {
    pub tti: u64,
    pub rb: u32,
    n_ue: usize,
    antennas: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<Complex64>,
}

impl RbChannels {
    pub fn generate(
        fading: &StreamFamily,
        deployment: &Deployment,
        table: &LargeScaleTable,
        tti: u64,
        rb: u32,
    ) -> Self {
        let n_ue = deployment.n_ue();
        let antennas: Vec<usize> = deployment.radio_units.iter().map(|r| r.n_antennas as usize).collect();
        let mut offsets = Vec::with_capacity(antennas.len());
        let mut total = 0;
        for &m in &antennas {
            offsets.push(total);
            total += m * n_ue;
        }
        let mut data = Vec::with_capacity(total);
        for (a, ru) in deployment.radio_units.iter().enumerate() {
            for (u, ue) in deployment.user_terminals.iter().enumerate() {
                let mut rng = fading.stream(fading_stream_id(tti, rb, ru.id, ue.id));
                fill_small_scale(&mut rng, table.amplitude(u, a), antennas[a], &mut data);
            }
        }
        Self {
            tti,
            rb,
            n_ue,
            antennas,
            offsets,
            data,
        }
    }

    /// Builds a block from explicit vectors, `vectors[ru][ue]`.
    pub fn from_vectors(tti: u64, rb: u32, vectors: Vec<Vec<Vec<Complex64>>>) -> Self {
        let n_ue = vectors.first().map_or(0, Vec::len);
        let mut antennas = Vec::new();
        let mut offsets = Vec::new();
        let mut data = Vec::new();
        for per_ru in vectors {
            assert_eq!(per_ru.len(), n_ue, "every RU needs one vector per UE");
            let m = per_ru.first().map_or(0, Vec::len);
            offsets.push(data.len());
            antennas.push(m);
            for v in per_ru {
                assert_eq!(v.len(), m, "vectors of one RU must share a length");
                data.extend(v);
            }
        }
        Self {
            tti,
            rb,
            n_ue,
            antennas,
            offsets,
            data,
        }
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }

    pub fn n_ru(&self) -> usize {
        self.antennas.len()
    }

    pub fn n_antennas(&self, ru: usize) -> usize {
        self.antennas[ru]
    }

    pub fn vector(&self, ru: usize, ue: usize) -> &[Complex64] {
        let m = self.antennas[ru];
        let start = self.offsets[ru] + ue * m;
        &self.data[start..start + m]
    }

    /// Row-major `n_ue x n_antennas` channel matrix of one RU.
    pub fn ru_matrix(&self, ru: usize) -> &[Complex64] {
        let start = self.offsets[ru];
        &self.data[start..start + self.n_ue * self.antennas[ru]]
    }
}
