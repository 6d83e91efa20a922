//! Power consumption, energy accounting and energy-efficiency metrics.
//!
//! Units: power W, energy J, throughput bit/s, EE bit/J.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{RadioUnit, RuKind};

/// Static consumption of one RU kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindPower {
    pub p_fixed_w: f64,
    pub p_per_antenna_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerModelParams {
    #[serde(rename = "macro")]
    pub macro_ru: KindPower,
    #[serde(rename = "micro")]
    pub micro_ru: KindPower,
    /// Power-amplifier efficiency in (0, 1].
    pub pa_efficiency: f64,
}

impl Default for PowerModelParams {
    fn default() -> Self {
        Self {
            macro_ru: KindPower {
                p_fixed_w: 30.0,
                p_per_antenna_w: 0.4,
            },
            micro_ru: KindPower {
                p_fixed_w: 5.0,
                p_per_antenna_w: 0.2,
            },
            pa_efficiency: 0.35,
        }
    }
}

impl PowerModelParams {
    pub fn for_kind(&self, kind: RuKind) -> &KindPower {
        match kind {
            RuKind::Macro => &self.macro_ru,
            RuKind::Micro => &self.micro_ru,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("macro", &self.macro_ru), ("micro", &self.micro_ru)] {
            if !(k.p_fixed_w.is_finite() && k.p_fixed_w > 0.0) {
                return Err(Error::config(format!("power_model.{name}.p_fixed_w must be positive")));
            }
            if !(k.p_per_antenna_w.is_finite() && k.p_per_antenna_w > 0.0) {
                return Err(Error::config(format!(
                    "power_model.{name}.p_per_antenna_w must be positive"
                )));
            }
        }
        let eta = self.pa_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::config("power_model.pa_efficiency must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Relative slack allowed when comparing radiated power against the budget.
const BUDGET_TOLERANCE: f64 = 1e-9;

/// `p_fixed + n_antennas * p_per_antenna + radiated / pa_efficiency`.
pub fn ru_consumed_power_w(radiated_avg_w: f64, ru: &RadioUnit, params: &PowerModelParams) -> Result<f64> {
    let max_w = ru.max_tx_power_w();
    if radiated_avg_w.is_nan() || radiated_avg_w < 0.0 || radiated_avg_w > max_w * (1.0 + BUDGET_TOLERANCE) {
        return Err(Error::RadiatedAboveBudget {
            ru: ru.id,
            radiated_w: radiated_avg_w,
            max_w,
        });
    }
    let k = params.for_kind(ru.kind);
    Ok(k.p_fixed_w + f64::from(ru.n_antennas) * k.p_per_antenna_w + radiated_avg_w / params.pa_efficiency)
}

/// Network energy efficiency in bit/J.
pub fn ran_ee(total_bits: f64, total_energy_j: f64) -> Result<f64> {
    if total_energy_j.is_nan() || total_energy_j <= 0.0 {
        return Err(Error::NonPositiveEnergy(total_energy_j));
    }
    Ok(total_bits / total_energy_j)
}

/// Per-user EE with the network energy attributed equally to every UE.
pub fn per_user_ee(user_bits: f64, total_energy_j: f64, n_ue: usize) -> Result<f64> {
    if total_energy_j.is_nan() || total_energy_j <= 0.0 {
        return Err(Error::NonPositiveEnergy(total_energy_j));
    }
    assert!(n_ue >= 1, "per-user EE needs at least one UE");
    Ok(user_bits / (total_energy_j / n_ue as f64))
}

/// Empirical CDF as `(value, P[X <= value])` at each distinct value.
pub fn ecdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = p,
            _ => out.push((v, p)),
        }
    }
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    Ok(out)
}

/// Measurements of one TTI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtiResult {
    pub tti: u64,
    /// Delivered bits per UE.
    pub ue_bits: Vec<f64>,
    /// Radiated power per RU averaged over the TTI (sum over active RBs).
    pub ru_radiated_w: Vec<f64>,
    /// Consumed electrical power per RU.
    pub ru_consumed_w: Vec<f64>,
}

/// Bits and energy accumulated over a window of TTIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub n_tti: u64,
    pub ru_radiated_j: Vec<f64>,
    pub ru_consumed_j: Vec<f64>,
    pub ue_bits: Vec<f64>,
}

impl EnergyLedger {
    pub fn new(n_ru: usize, n_ue: usize) -> Self {
        Self {
            n_tti: 0,
            ru_radiated_j: vec![0.0; n_ru],
            ru_consumed_j: vec![0.0; n_ru],
            ue_bits: vec![0.0; n_ue],
        }
    }

    pub fn record(&mut self, tti: &TtiResult, tti_duration_s: f64) {
        for (acc, p) in self.ru_radiated_j.iter_mut().zip(&tti.ru_radiated_w) {
            *acc += p * tti_duration_s;
        }
        for (acc, p) in self.ru_consumed_j.iter_mut().zip(&tti.ru_consumed_w) {
            *acc += p * tti_duration_s;
        }
        for (acc, b) in self.ue_bits.iter_mut().zip(&tti.ue_bits) {
            *acc += b;
        }
        self.n_tti += 1;
    }

    /// Appends a later window.
    pub fn extend(&mut self, later: &EnergyLedger) {
        for (a, b) in self.ru_radiated_j.iter_mut().zip(&later.ru_radiated_j) {
            *a += b;
        }
        for (a, b) in self.ru_consumed_j.iter_mut().zip(&later.ru_consumed_j) {
            *a += b;
        }
        for (a, b) in self.ue_bits.iter_mut().zip(&later.ue_bits) {
            *a += b;
        }
        self.n_tti += later.n_tti;
    }

    pub fn total_bits(&self) -> f64 {
        self.ue_bits.iter().sum()
    }

    pub fn total_energy_j(&self) -> f64 {
        self.ru_consumed_j.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Position;

    fn ru(kind: RuKind) -> RadioUnit {
        let (p, m) = match kind {
            RuKind::Macro => (46.0, 128),
            RuKind::Micro => (30.0, 32),
        };
        RadioUnit {
            id: 0,
            position: Position::new(0.0, 0.0, 10.0),
            tx_power_dbm: p,
            n_antennas: m,
            kind,
            height_m: 10.0,
        }
    }

    #[test]
    fn consumed_power_reference_values() {
        let params = PowerModelParams::default();
        let idle = ru_consumed_power_w(0.0, &ru(RuKind::Micro), &params).unwrap();
        assert!((idle - 11.4).abs() < 1e-12);

        let m = ru(RuKind::Macro);
        let full = ru_consumed_power_w(m.max_tx_power_w(), &m, &params).unwrap();
        assert!((full - 194.95).abs() < 0.01, "{full}");

        let identity = PowerModelParams {
            macro_ru: KindPower {
                p_fixed_w: 0.0,
                p_per_antenna_w: 0.0,
            },
            micro_ru: KindPower {
                p_fixed_w: 0.0,
                p_per_antenna_w: 0.0,
            },
            pa_efficiency: 1.0,
        };
        assert_eq!(ru_consumed_power_w(3.25, &m, &identity).unwrap(), 3.25);
    }

    #[test]
    fn over_budget_is_an_error() {
        let m = ru(RuKind::Micro);
        let err = ru_consumed_power_w(1.5, &m, &PowerModelParams::default());
        assert!(matches!(err, Err(Error::RadiatedAboveBudget { .. })));
        assert!(ru_consumed_power_w(-0.1, &m, &PowerModelParams::default()).is_err());
    }

    #[test]
    fn ee_arithmetic() {
        assert_eq!(ran_ee(1e6, 0.5).unwrap(), 2e6);
        assert_eq!(ran_ee(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(ran_ee(2e6, 1.0).unwrap(), ran_ee(1e6, 0.5).unwrap());
        assert!(ran_ee(1.0, 0.0).is_err());

        assert!((per_user_ee(1e5, 2.0, 20).unwrap() - 1e6).abs() < 1e-6);
        assert_eq!(per_user_ee(7e5, 3.0, 1).unwrap(), ran_ee(7e5, 3.0).unwrap());
    }

    #[test]
    fn mean_per_user_ee_is_ran_ee() {
        let bits = [1.0e5, 3.3e5, 0.0, 2.2e4, 9.9e5];
        let energy = 4.2;
        let mean: f64 = bits
            .iter()
            .map(|b| per_user_ee(*b, energy, bits.len()).unwrap())
            .sum::<f64>()
            / bits.len() as f64;
        let total = ran_ee(bits.iter().sum(), energy).unwrap();
        assert!((mean / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ecdf_cases() {
        assert_eq!(ecdf(&[2.0, 1.0, 2.0]).unwrap(), vec![(1.0, 1.0 / 3.0), (2.0, 1.0)]);
        assert_eq!(ecdf(&[5.0]).unwrap(), vec![(5.0, 1.0)]);
        assert_eq!(ecdf(&[4.0; 7]).unwrap(), vec![(4.0, 1.0)]);
        assert!(matches!(ecdf(&[]), Err(Error::EmptySample)));
        assert!(ecdf(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ledger_windows_concatenate() {
        let ttis: Vec<TtiResult> = (0..6)
            .map(|t| TtiResult {
                tti: t,
                ue_bits: vec![t as f64 * 10.0, 3.0],
                ru_radiated_w: vec![0.5 * t as f64],
                ru_consumed_w: vec![10.0 + t as f64],
            })
            .collect();
        let mut whole = EnergyLedger::new(1, 2);
        let mut first = EnergyLedger::new(1, 2);
        let mut second = EnergyLedger::new(1, 2);
        for (i, t) in ttis.iter().enumerate() {
            whole.record(t, 1e-3);
            if i < 3 {
                first.record(t, 1e-3);
            } else {
                second.record(t, 1e-3);
            }
        }
        first.extend(&second);
        assert_eq!(first.n_tti, whole.n_tti);
        assert_eq!(first.ue_bits, whole.ue_bits);
        assert!((first.total_energy_j() - whole.total_energy_j()).abs() < 1e-15);
    }
}
