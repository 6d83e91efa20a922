//! Physical deployment: radio units, randomly dropped user terminals and the
//! OFDMA carrier.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::rng::{StreamFamily, UE_PLACEMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuKind {
    Macro,
    Micro,
}

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub [f64; 3]);

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let dx = self.x() - other.x();
        let dy = self.y() - other.y();
        let dz = self.z() - other.z();
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Axis-aligned rectangle in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub fn square(side_m: f64) -> Self {
        Self {
            x_min: 0.0,
            x_max: side_m,
            y_min: 0.0,
            y_max: side_m,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x() >= self.x_min && p.x() <= self.x_max && p.y() >= self.y_min && p.y() <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioUnit {
    pub id: u32,
    pub position: Position,
    pub tx_power_dbm: f64,
    pub n_antennas: u32,
    pub kind: RuKind,
    pub height_m: f64,
}

impl RadioUnit {
    /// Total transmit power budget in W.
    pub fn max_tx_power_w(&self) -> f64 {
        dbm_to_w(self.tx_power_dbm)
    }

    /// Transmit power available on a single resource block, in W.
    pub fn per_rb_budget_w(&self, n_rb: u32) -> f64 {
        self.max_tx_power_w() / f64::from(n_rb)
    }
}

/// Single-antenna user terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTerminal {
    pub id: u32,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Carrier {
    pub center_freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub n_rb: u32,
    pub rb_bandwidth_hz: f64,
    pub tti_duration_s: f64,
    pub noise_figure_db: f64,
}

impl Default for Carrier {
    /// 25 MHz at 3.6 GHz with 15 kHz numerology (133 RBs of 180 kHz).
    fn default() -> Self {
        Self {
            center_freq_ghz: 3.6,
            bandwidth_mhz: 25.0,
            n_rb: 133,
            rb_bandwidth_hz: 180_000.0,
            tti_duration_s: 0.001,
            noise_figure_db: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub radio_units: Vec<RadioUnit>,
    pub user_terminals: Vec<UserTerminal>,
    pub carrier: Carrier,
    pub area: Area,
}

impl Deployment {
    pub fn n_ru(&self) -> usize {
        self.radio_units.len()
    }

    pub fn n_ue(&self) -> usize {
        self.user_terminals.len()
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Places the configured radio units verbatim and drops `ue_count` terminals
/// uniformly over the area from the `(seed, "ue-placement")` stream.
pub fn build_deployment(config: &ScenarioConfig, seed: u64) -> Result<Deployment> {
    config.validate()?;
    let topo = &config.topology;

    let radio_units = topo
        .radio_units
        .iter()
        .enumerate()
        .map(|(i, ru)| RadioUnit {
            id: i as u32,
            position: ru.position,
            tx_power_dbm: ru.tx_power_dbm,
            n_antennas: ru.n_antennas,
            kind: ru.kind,
            height_m: ru.position.z(),
        })
        .collect();

    let area = topo.area;
    let mut rng = StreamFamily::new(seed, UE_PLACEMENT).stream(0);
    let user_terminals = (0..topo.ue_count)
        .map(|id| {
            let x = area.x_min + rng.random::<f64>() * area.width();
            let y = area.y_min + rng.random::<f64>() * area.height();
            UserTerminal {
                id,
                position: Position::new(x, y, topo.ue_height_m),
            }
        })
        .collect();

    Ok(Deployment {
        radio_units,
        user_terminals,
        carrier: config.carrier.clone(),
        area,
    })
}
