//! Scenario configuration, read from TOML.
//!
//! Sections: `topology`, `carrier`, `channel`, `power_model`, `scheduler`,
//! `control`, `run`. Unknown keys are rejected. Everything except
//! `topology` and `carrier` falls back to built-in defaults when omitted.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::PowerModelParams;
use crate::rng::{MAX_RB, MAX_RU, MAX_TTI, MAX_UE};
use crate::topology::{Area, Carrier, Position, RuKind};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: TopologyConfig,
    pub carrier: Carrier,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub power_model: PowerModelParams,
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub area: Area,
    pub ue_count: u32,
    pub ue_height_m: f64,
    pub radio_units: Vec<RadioUnitConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioUnitConfig {
    pub kind: RuKind,
    /// `[x, y, height]` in meters.
    pub position: Position,
    pub tx_power_dbm: f64,
    pub n_antennas: u32,
}

impl RadioUnitConfig {
    pub fn macro_at(position: Position) -> Self {
        Self {
            kind: RuKind::Macro,
            position,
            tx_power_dbm: 46.0,
            n_antennas: 128,
        }
    }

    pub fn micro_at(position: Position) -> Self {
        Self {
            kind: RuKind::Micro,
            position,
            tx_power_dbm: 30.0,
            n_antennas: 32,
        }
    }
}

impl Default for TopologyConfig {
    /// 400 m x 400 m square, macro at the center (25 m), five micros (10 m)
    /// evenly spaced on a 140 m circle around it, 20 UEs at 1.5 m.
    fn default() -> Self {
        let area = Area::square(400.0);
        let (cx, cy) = area.center();
        let mut radio_units = vec![RadioUnitConfig::macro_at(Position::new(cx, cy, 25.0))];
        for k in 0..5 {
            let angle = TAU * f64::from(k) / 5.0;
            radio_units.push(RadioUnitConfig::micro_at(Position::new(
                cx + 140.0 * angle.cos(),
                cy + 140.0 * angle.sin(),
                10.0,
            )));
        }
        Self {
            area,
            ue_count: 20,
            ue_height_m: 1.5,
            radio_units,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub path_loss_exponent: f64,
    pub shadowing_sigma_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            path_loss_exponent: 3.0,
            shadowing_sigma_db: 7.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchedulerConfig {
    /// Upper bound on co-scheduled users per RU and RB.
    pub l_max: u32,
    /// Antennas reserved per co-scheduled stream; an RU with `M` antennas
    /// serves at most `M / antennas_per_stream` users per RB.
    pub antennas_per_stream: u32,
    /// Spectral-efficiency ceiling in bit/s/Hz.
    pub se_cap_bps_hz: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        // 32 streams on a 128-antenna macro, 8 on a 32-antenna micro.
        Self {
            l_max: 32,
            antennas_per_stream: 4,
            se_cap_bps_hz: 7.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RappMode {
    Fixed,
    SweepSelect,
}

impl std::str::FromStr for RappMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(RappMode::Fixed),
            "sweep_select" => Ok(RappMode::SweepSelect),
            other => Err(Error::config(format!(
                "unknown rApp mode '{other}' (expected fixed or sweep_select)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    /// Serving cluster size used by single-drop runs.
    pub scs: u32,
    pub rapp_mode: RappMode,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            scs: 3,
            rapp_mode: RappMode::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub scs_list: Vec<u32>,
    /// Drops use seeds `base_seed, base_seed + 1, ..., base_seed + n_seeds - 1`.
    pub base_seed: u64,
    pub n_seeds: u32,
    pub n_tti: u32,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            scs_list: (1..=6).collect(),
            base_seed: 1,
            n_seeds: 15,
            n_tti: 500,
        }
    }
}

impl RunSection {
    pub fn seeds(&self) -> Vec<u64> {
        (0..u64::from(self.n_seeds)).map(|i| self.base_seed + i).collect()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let topo = &self.topology;
        let area = &topo.area;
        for (name, v) in [
            ("topology.area.x_min", area.x_min),
            ("topology.area.x_max", area.x_max),
            ("topology.area.y_min", area.y_min),
            ("topology.area.y_max", area.y_max),
        ] {
            finite(name, v)?;
        }
        if area.width() <= 0.0 || area.height() <= 0.0 {
            return Err(Error::config("topology.area must have positive width and height"));
        }
        if topo.ue_count == 0 {
            return Err(Error::config("topology.ue_count must be at least 1"));
        }
        if u64::from(topo.ue_count) > MAX_UE {
            return Err(Error::config(format!("topology.ue_count must not exceed {MAX_UE}")));
        }
        finite("topology.ue_height_m", topo.ue_height_m)?;
        if topo.radio_units.is_empty() {
            return Err(Error::config("topology.radio_units must list at least one radio unit"));
        }
        if topo.radio_units.len() as u64 > MAX_RU {
            return Err(Error::config(format!("at most {MAX_RU} radio units are supported")));
        }
        for (i, ru) in topo.radio_units.iter().enumerate() {
            finite(&format!("radio_units[{i}].tx_power_dbm"), ru.tx_power_dbm)?;
            for (axis, v) in ru.position.0.iter().enumerate() {
                finite(&format!("radio_units[{i}].position[{axis}]"), *v)?;
            }
            if ru.n_antennas == 0 {
                return Err(Error::config(format!("radio_units[{i}].n_antennas must be at least 1")));
            }
        }

        let c = &self.carrier;
        positive("carrier.center_freq_ghz", c.center_freq_ghz)?;
        positive("carrier.bandwidth_mhz", c.bandwidth_mhz)?;
        positive("carrier.rb_bandwidth_hz", c.rb_bandwidth_hz)?;
        positive("carrier.tti_duration_s", c.tti_duration_s)?;
        finite("carrier.noise_figure_db", c.noise_figure_db)?;
        if c.n_rb == 0 || u64::from(c.n_rb) > MAX_RB {
            return Err(Error::config(format!("carrier.n_rb must be in 1..={MAX_RB}")));
        }
        if f64::from(c.n_rb) * c.rb_bandwidth_hz > c.bandwidth_mhz * 1e6 {
            return Err(Error::config(format!(
                "carrier: {} RBs of {} Hz exceed the {} MHz bandwidth",
                c.n_rb, c.rb_bandwidth_hz, c.bandwidth_mhz
            )));
        }

        positive("channel.path_loss_exponent", self.channel.path_loss_exponent)?;
        let sigma = self.channel.shadowing_sigma_db;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::config("channel.shadowing_sigma_db must be finite and non-negative"));
        }

        self.power_model.validate()?;

        if self.scheduler.l_max == 0 {
            return Err(Error::config("scheduler.l_max must be at least 1"));
        }
        if self.scheduler.antennas_per_stream == 0 {
            return Err(Error::config("scheduler.antennas_per_stream must be at least 1"));
        }
        positive("scheduler.se_cap_bps_hz", self.scheduler.se_cap_bps_hz)?;

        if self.control.scs == 0 {
            return Err(Error::config("control.scs must be at least 1"));
        }
        if self.run.scs_list.is_empty() || self.run.scs_list.contains(&0) {
            return Err(Error::config("run.scs_list must be non-empty with every entry >= 1"));
        }
        if self.run.n_seeds == 0 {
            return Err(Error::config("run.n_seeds must be at least 1"));
        }
        if self.run.base_seed.checked_add(u64::from(self.run.n_seeds)).is_none() {
            return Err(Error::config("run.base_seed + run.n_seeds overflows"));
        }
        if self.run.n_tti == 0 || u64::from(self.run.n_tti) > MAX_TTI {
            return Err(Error::config(format!("run.n_tti must be in 1..={MAX_TTI}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn default_layout_geometry() {
        let topo = TopologyConfig::default();
        assert_eq!(topo.radio_units.len(), 6);
        assert_eq!(topo.radio_units[0].position, Position::new(200.0, 200.0, 25.0));
        for ru in &topo.radio_units[1..] {
            let r = ((ru.position.x() - 200.0).powi(2) + (ru.position.y() - 200.0).powi(2)).sqrt();
            assert!((r - 140.0).abs() < 1e-9);
            assert_eq!(ru.position.z(), 10.0);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = ScenarioConfig::default().to_toml_string().unwrap();
        text = text.replace("[scheduler]", "[scheduler]\nbogus = 1");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Toml(_))));
    }

    #[test]
    fn optional_sections_default() {
        let full = ScenarioConfig::default();
        let mut minimal = toml::Table::new();
        minimal.insert("topology".into(), toml::Value::try_from(&full.topology).unwrap());
        minimal.insert("carrier".into(), toml::Value::try_from(&full.carrier).unwrap());
        let text = toml::to_string(&minimal).unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), full);
    }

    #[test]
    fn carrier_overflow_is_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.carrier.n_rb = 200;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("exceed"), "{err}");
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.topology.radio_units[0].tx_power_dbm = f64::NAN;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.topology.radio_units[2].n_antennas = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.run.scs_list = vec![1, 0];
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.power_model.pa_efficiency = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rapp_mode_parses() {
        assert_eq!("fixed".parse::<RappMode>().unwrap(), RappMode::Fixed);
        assert_eq!("sweep_select".parse::<RappMode>().unwrap(), RappMode::SweepSelect);
        assert!("greedy".parse::<RappMode>().is_err());
    }
}
