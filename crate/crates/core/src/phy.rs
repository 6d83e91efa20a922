//! Per-RU zero-forcing precoding, equal power split, non-coherent
//! multi-point SINR and Shannon-rate bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::RbChannels;
use crate::scheduler::TtiSchedule;
use crate::topology::{Carrier, Deployment};

/// Largest accepted 1-norm condition estimate of the ZF Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `sum_m a[m] * conj(b[m])`
#[inline]
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re + x[l].im * y[l].im;
            im[l] += x[l].im * y[l].re - x[l].re * y[l].im;
        }
    }
    let mut r = (re[0] + re[1]) + (re[2] + re[3]);
    let mut i = (im[0] + im[1]) + (im[2] + im[3]);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        r += x.re * y.re + x.im * y.im;
        i += x.im * y.re - x.re * y.im;
    }
    Complex64::new(r, i)
}

/// `h . w` without conjugation (received amplitude of stream `w` at `h`).
#[inline]
pub fn dot(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Inverse of a Hermitian positive-definite `k x k` matrix (row-major) via
/// Cholesky. `None` if a pivot is not strictly positive.
fn hermitian_pd_inverse(g: &[Complex64], k: usize) -> Option<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut l = vec![zero; k * k];
    for i in 0..k {
        let mut d = g[i * k + i].re;
        for p in 0..i {
            d -= l[i * k + p].norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let lii = d.sqrt();
        l[i * k + i] = Complex64::new(lii, 0.0);
        for j in (i + 1)..k {
            let mut s = g[j * k + i];
            for p in 0..i {
                s -= l[j * k + p] * l[i * k + p].conj();
            }
            l[j * k + i] = s / lii;
        }
    }
    // Lower-triangular inverse by forward substitution.
    let mut linv = vec![zero; k * k];
    for c in 0..k {
        linv[c * k + c] = Complex64::new(1.0 / l[c * k + c].re, 0.0);
        for r in (c + 1)..k {
            let mut s = zero;
            for p in c..r {
                s += l[r * k + p] * linv[p * k + c];
            }
            linv[r * k + c] = -s / l[r * k + r].re;
        }
    }
    // G^-1 = L^-H L^-1
    let mut inv = vec![zero; k * k];
    for i in 0..k {
        for j in i..k {
            let mut s = zero;
            for p in j..k {
                s += linv[p * k + i].conj() * linv[p * k + j];
            }
            inv[i * k + j] = s;
            inv[j * k + i] = s.conj();
        }
    }
    Some(inv)
}

fn norm1(m: &[Complex64], k: usize) -> f64 {
    (0..k)
        .map(|j| (0..k).map(|i| m[i * k + j].norm_sqr().sqrt()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest well-conditioned subset of the users behind Gram matrix `gram`
/// (`k x k`), removing the weakest-norm user until the inverse exists and
/// the condition estimate is at most [`MAX_CONDITION`]. Returns kept
/// positions and the inverse of the kept sub-Gram.
fn select_conditioned(gram: &[Complex64], k: usize) -> (Vec<usize>, Vec<Complex64>) {
    let mut kept: Vec<usize> = (0..k).collect();
    loop {
        if kept.is_empty() {
            return (kept, Vec::new());
        }
        let n = kept.len();
        let sub: Vec<Complex64> = kept
            .iter()
            .flat_map(|&i| kept.iter().map(move |&j| gram[i * k + j]))
            .collect();
        if let Some(inv) = hermitian_pd_inverse(&sub, n) {
            let cond = norm1(&sub, n) * norm1(&inv, n);
            if cond.is_finite() && cond <= MAX_CONDITION {
                return (kept, inv);
            }
        }
        let weakest = (0..n)
            .min_by(|&a, &b| {
                gram[kept[a] * k + kept[a]]
                    .re
                    .total_cmp(&gram[kept[b] * k + kept[b]].re)
                    .then(b.cmp(&a))
            })
            .expect("kept is non-empty");
        kept.remove(weakest);
    }
}

/// Zero-forcing precoder of one RU on one RB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZfPrecoder {
    /// Rows of `H` that received a stream, ascending.
    pub kept_rows: Vec<usize>,
    /// `M x kept_rows.len()`, unit-norm columns.
    pub w: CMatrix,
    /// Rows removed to restore conditioning.
    pub dropped: usize,
}

/// Zero-forcing precoding of the `K x M` channel `h`: unit-norm columns of
/// `H^H (H H^H)^-1`. Rank-deficient or ill-conditioned inputs lose their
/// weakest rows first.
pub fn zf_precode(h: &CMatrix) -> ZfPrecoder {
    let (k, m) = (h.rows(), h.cols());
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot_conj(h.row(i), h.row(j));
        }
    }
    let (kept, ginv) = select_conditioned(&gram, k);
    let n = kept.len();
    let mut w = CMatrix::zeros(m, n);
    for c in 0..n {
        for (r, &row) in kept.iter().enumerate() {
            let coef = ginv[r * n + c];
            for (a, x) in h.row(row).iter().enumerate() {
                w[(a, c)] += x.conj() * coef;
            }
        }
        let norm = (0..m).map(|a| w[(a, c)].norm_sqr()).sum::<f64>().sqrt();
        for a in 0..m {
            w[(a, c)] /= norm;
        }
    }
    ZfPrecoder {
        dropped: k - n,
        kept_rows: kept,
        w,
    }
}

/// Hermitian Gram matrix `H H^H` of one RU's channel towards every UE.
/// `ru_matrix` is row-major `n_ue x m`; the result is row-major `n_ue x n_ue`
/// with entry `(u, v) = h_u . conj(h_v)`.
pub fn channel_gram(ru_matrix: &[Complex64], n_ue: usize, m: usize) -> Vec<Complex64> {
    let row = |u: usize| &ru_matrix[u * m..(u + 1) * m];
    let mut gram = vec![Complex64::new(0.0, 0.0); n_ue * n_ue];
    for u in 0..n_ue {
        for v in u..n_ue {
            let g = dot_conj(row(u), row(v));
            gram[u * n_ue + v] = g;
            gram[v * n_ue + u] = g.conj();
        }
    }
    gram
}

/// Received power gains `|h_u . w_s|^2` of every UE for every ZF stream of
/// one RU, derived from the Gram matrix without materializing precoders:
/// with `G` the Gram of the kept users, `h_u . w_s = (h_u H^H G^-1)_s / sqrt((G^-1)_ss)`.
/// A kept user sees only its own stream (ZF nulling is exact).
#[derive(Debug, Clone, Default)]
pub struct StreamGains {
    /// UE id of each stream.
    pub stream_ue: Vec<u32>,
    /// `gain[u * n_streams + s]`
    pub gain: Vec<f64>,
    pub dropped: usize,
}

impl StreamGains {
    pub fn n_streams(&self) -> usize {
        self.stream_ue.len()
    }

    pub fn get(&self, ue: usize, stream: usize) -> f64 {
        self.gain[ue * self.stream_ue.len() + stream]
    }
}

/// `gram` comes from [`channel_gram`]; `served` are the scheduled UE ids.
pub fn zf_stream_gains(gram: &[Complex64], n_ue: usize, served: &[u32]) -> StreamGains {
    let k = served.len();
    if k == 0 {
        return StreamGains::default();
    }
    let mut sub = Vec::with_capacity(k * k);
    for &i in served {
        for &j in served {
            sub.push(gram[i as usize * n_ue + j as usize]);
        }
    }
    let (kept, ginv) = select_conditioned(&sub, k);
    let n = kept.len();
    let stream_ue: Vec<u32> = kept.iter().map(|&j| served[j]).collect();
    let mut own_stream = vec![usize::MAX; n_ue];
    for (c, &ue) in stream_ue.iter().enumerate() {
        own_stream[ue as usize] = c;
    }
    let inv_norm: Vec<f64> = (0..n).map(|c| 1.0 / ginv[c * n + c].re).collect();
    let mut gain = vec![0.0; n_ue * n];
    for u in 0..n_ue {
        let out = &mut gain[u * n..(u + 1) * n];
        if own_stream[u] != usize::MAX {
            out[own_stream[u]] = inv_norm[own_stream[u]];
            continue;
        }
        let cross = &gram[u * n_ue..(u + 1) * n_ue];
        for (c, o) in out.iter_mut().enumerate() {
            let mut a = Complex64::new(0.0, 0.0);
            for (r, &ue) in stream_ue.iter().enumerate() {
                a += cross[ue as usize] * ginv[r * n + c];
            }
            *o = a.norm_sqr() * inv_norm[c];
        }
    }
    StreamGains {
        stream_ue,
        gain,
        dropped: k - n,
    }
}

/// Equal split of an RB's power budget among its co-scheduled users.
pub fn power_split(p_rb_budget_w: f64, k_users: usize) -> f64 {
    assert!(k_users >= 1, "power split needs at least one user");
    p_rb_budget_w / k_users as f64
}

/// Thermal noise power of one RB in W.
pub fn noise_power_w(carrier: &Carrier) -> f64 {
    let dbm = -174.0 + 10.0 * carrier.rb_bandwidth_hz.log10() + carrier.noise_figure_db;
    10f64.powf((dbm - 30.0) / 10.0)
}

/// One ZF stream: the served UE, its unit-norm precoder and power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    pub ue: u32,
    pub w: Vec<Complex64>,
    pub power_w: f64,
}

/// Precoders and powers of every (RU, RB) of one TTI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecodeSet {
    pub tti: u64,
    /// `streams[ru][rb]`
    pub streams: Vec<Vec<Vec<Stream>>>,
    pub dropped_rows: usize,
}

/// ZF-precodes every scheduled (RU, RB) of a TTI. `channels[rb]` holds the
/// effective channels of that RB.
pub fn build_precode_set(schedule: &TtiSchedule, channels: &[RbChannels], deployment: &Deployment) -> PrecodeSet {
    let n_rb = deployment.carrier.n_rb;
    let mut dropped_rows = 0;
    let streams = deployment
        .radio_units
        .iter()
        .enumerate()
        .map(|(a, ru)| {
            let budget = ru.per_rb_budget_w(n_rb);
            channels
                .iter()
                .enumerate()
                .map(|(rb, ch)| {
                    let served = schedule.served(a, rb);
                    if served.is_empty() {
                        return Vec::new();
                    }
                    let rows: Vec<Vec<Complex64>> =
                        served.iter().map(|&u| ch.vector(a, u as usize).to_vec()).collect();
                    let zf = zf_precode(&CMatrix::from_rows(&rows));
                    dropped_rows += zf.dropped;
                    let k = zf.kept_rows.len();
                    zf.kept_rows
                        .iter()
                        .enumerate()
                        .map(|(c, &r)| Stream {
                            ue: served[r],
                            w: zf.w.column(c),
                            power_w: power_split(budget, k),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    PrecodeSet {
        tti: schedule.tti,
        streams,
        dropped_rows,
    }
}

/// Signal and interference power received by `ue` on `rb`, and whether any
/// RU serves it there.
pub fn received_powers(ue: u32, rb: usize, precode_set: &PrecodeSet, channels: &[RbChannels]) -> (f64, f64, bool) {
    let mut signal = 0.0;
    let mut interference = 0.0;
    let mut served = false;
    for (a, per_rb) in precode_set.streams.iter().enumerate() {
        let h = channels[rb].vector(a, ue as usize);
        for s in &per_rb[rb] {
            let p = s.power_w * dot(h, &s.w).norm_sqr();
            if s.ue == ue {
                signal += p;
                served = true;
            } else {
                interference += p;
            }
        }
    }
    (signal, interference, served)
}

/// SINR of `ue` on `rb`: serving-RU powers add non-coherently, every other
/// stream on the RB interferes.
pub fn compute_sinr(ue: u32, rb: usize, precode_set: &PrecodeSet, channels: &[RbChannels], noise_w: f64) -> f64 {
    let (s, i, _) = received_powers(ue, rb, precode_set, channels);
    s / (i + noise_w)
}

pub fn spectral_efficiency(sinr: f64, se_cap: f64) -> f64 {
    (1.0 + sinr).log2().min(se_cap)
}

/// Bits delivered in one TTI. `sinr_row[rb]` is `None` where the UE is not
/// served.
pub fn ue_tti_bits(sinr_row: &[Option<f64>], carrier: &Carrier, se_cap: f64) -> f64 {
    let se: f64 = sinr_row.iter().flatten().map(|&s| spectral_efficiency(s, se_cap)).sum();
    carrier.rb_bandwidth_hz * carrier.tti_duration_s * se
}
