use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("RSRP report for UE {ue} has no entry for RU {ru}")]
    MissingRsrp { ue: u32, ru: u32 },

    #[error("RSRP report for UE {ue} contains a non-finite value for RU {ru}")]
    NonFiniteRsrp { ue: u32, ru: u32 },

    #[error("no RSRP report for UE {0}")]
    MissingReport(u32),

    #[error("serving cluster size must be at least 1, got {0}")]
    InvalidScs(u32),

    #[error("EE history is empty")]
    EmptyHistory,

    #[error("EE history entry for scs {scs} is not a finite non-negative value: {value}")]
    InvalidHistoryValue { scs: u32, value: f64 },

    #[error("KPI window [{start}, {end}) is empty or not covered by the TTI results")]
    InvalidWindow { start: u64, end: u64 },

    #[error("ECDF input is empty")]
    EmptySample,

    #[error("ECDF input contains a non-finite value")]
    NonFiniteSample,

    #[error("total energy must be positive, got {0} J")]
    NonPositiveEnergy(f64),

    #[error("RU {ru} radiates {radiated_w} W, above its {max_w} W budget")]
    RadiatedAboveBudget { ru: u32, radiated_w: f64, max_w: f64 },

    #[error("drop (seed {seed}, scs {scs}, {stage}): {source}")]
    Drop {
        seed: u64,
        scs: u32,
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("config serialization error: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn in_drop(self, seed: u64, scs: u32, stage: impl Into<String>) -> Self {
        match self {
            e @ Error::Drop { .. } => e,
            e => Error::Drop {
                seed,
                scs,
                stage: stage.into(),
                source: Box::new(e),
            },
        }
    }
}
