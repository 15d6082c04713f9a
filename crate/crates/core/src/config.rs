//! Scenario configuration and its TOML file format.
//!
//! Every key is optional; omitted keys take the defaults below, which
//! describe a 32-antenna radio link next to a 3-transmit/4-receive radar.
//!
//! ```toml
//! schema = "coexist-config/1"
//! radio_antennas = 32
//! radar_tx_antennas = 3
//! radar_rx_antennas = 4
//! rf_chains_i_tx = 8
//! rf_chains_i_rx = 8
//! rf_chains_j = 2
//! rf_chains_k = 2
//! ns = 2
//! num_targets = 600
//! max_range_m = 100.0
//! carrier_freq_hz = 60e9
//! element_spacing = 0.5
//! clusters = [1, 6]
//! rays = [1, 10]
//! angle_spread_deg = 5.0
//! snr_rr_db = 40.0
//! # snr_ir_db, snr_ri_db default to snr_rr_db
//! snr_grid_db = [-40.0, -30.0, -20.0, -10.0, 0.0, 10.0]
//! trials = 250
//! base_seed = 0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beamforming::DofParams;
use crate::channel::ClusterParams;

pub const CONFIG_SCHEMA: &str = "coexist-config/1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("unsupported config schema `{0}` (expected `{CONFIG_SCHEMA}`)")]
    Schema(String),
    #[error("invalid `{field}`: {bound}")]
    Invalid { field: &'static str, bound: String },
}

/// Full parameterization of a coexistence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    /// Antennas on every radio array (transmit and receive at `i`, `j`, `k`).
    pub radio_antennas: usize,
    pub radar_tx_antennas: usize,
    pub radar_rx_antennas: usize,
    pub rf_chains_i_tx: usize,
    pub rf_chains_i_rx: usize,
    /// Receive RF chains at `j`.
    pub rf_chains_j: usize,
    /// Transmit RF chains at `k`.
    pub rf_chains_k: usize,
    pub ns: usize,
    pub num_targets: usize,
    pub max_range_m: f64,
    pub carrier_freq_hz: f64,
    pub element_spacing: f64,
    pub clusters: [usize; 2],
    pub rays: [usize; 2],
    pub angle_spread_deg: f64,
    pub snr_rr_db: f64,
    pub snr_ir_db: Option<f64>,
    pub snr_ri_db: Option<f64>,
    /// Desired-link SNRs (`SNR_ij = SNR_ki`) swept in dB.
    pub snr_grid_db: Vec<f64>,
    #[serde(rename = "trials")]
    pub trials_per_point: usize,
    pub base_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.to_string(),
            radio_antennas: 32,
            radar_tx_antennas: 3,
            radar_rx_antennas: 4,
            rf_chains_i_tx: 8,
            rf_chains_i_rx: 8,
            rf_chains_j: 2,
            rf_chains_k: 2,
            ns: 2,
            num_targets: 600,
            max_range_m: 100.0,
            carrier_freq_hz: 60e9,
            element_spacing: 0.5,
            clusters: [1, 6],
            rays: [1, 10],
            angle_spread_deg: 5.0,
            snr_rr_db: 40.0,
            snr_ir_db: None,
            snr_ri_db: None,
            snr_grid_db: vec![-40.0, -30.0, -20.0, -10.0, 0.0, 10.0],
            trials_per_point: 250,
            base_seed: 0,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "schema",
    "radio_antennas",
    "radar_tx_antennas",
    "radar_rx_antennas",
    "rf_chains_i_tx",
    "rf_chains_i_rx",
    "rf_chains_j",
    "rf_chains_k",
    "ns",
    "num_targets",
    "max_range_m",
    "carrier_freq_hz",
    "element_spacing",
    "clusters",
    "rays",
    "angle_spread_deg",
    "snr_rr_db",
    "snr_ir_db",
    "snr_ri_db",
    "snr_grid_db",
    "trials",
    "base_seed",
];

fn invalid(field: &'static str, bound: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        bound: bound.into(),
    }
}

impl ScenarioConfig {
    /// Parses TOML text, filling omitted keys with defaults, and validates.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        let config: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn snr_ir_db(&self) -> f64 {
        self.snr_ir_db.unwrap_or(self.snr_rr_db)
    }

    pub fn snr_ri_db(&self) -> f64 {
        self.snr_ri_db.unwrap_or(self.snr_rr_db)
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            clusters: (self.clusters[0], self.clusters[1]),
            rays: (self.rays[0], self.rays[1]),
            angle_spread: self.angle_spread_deg.to_radians(),
        }
    }

    pub fn dof_params(&self) -> DofParams {
        DofParams {
            rf_chains_tx_i: self.rf_chains_i_tx,
            rf_chains_rx_i: self.rf_chains_i_rx,
            radar_tx_antennas: self.radar_tx_antennas,
            radar_rx_antennas: self.radar_rx_antennas,
            ns: self.ns,
        }
    }

    pub fn total_trials(&self) -> usize {
        self.snr_grid_db.len() * self.trials_per_point
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(ConfigError::Schema(self.schema.clone()));
        }
        let positive: [(&'static str, usize); 9] = [
            ("radio_antennas", self.radio_antennas),
            ("radar_tx_antennas", self.radar_tx_antennas),
            ("radar_rx_antennas", self.radar_rx_antennas),
            ("rf_chains_i_tx", self.rf_chains_i_tx),
            ("rf_chains_i_rx", self.rf_chains_i_rx),
            ("rf_chains_j", self.rf_chains_j),
            ("rf_chains_k", self.rf_chains_k),
            ("ns", self.ns),
            ("trials", self.trials_per_point),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        let rf: [(&'static str, usize); 4] = [
            ("rf_chains_i_tx", self.rf_chains_i_tx),
            ("rf_chains_i_rx", self.rf_chains_i_rx),
            ("rf_chains_j", self.rf_chains_j),
            ("rf_chains_k", self.rf_chains_k),
        ];
        for (field, value) in rf {
            if value > self.radio_antennas {
                return Err(invalid(
                    field,
                    format!("{value} exceeds radio_antennas = {}", self.radio_antennas),
                ));
            }
        }
        // each link carries Ns streams through its narrower RF stage
        let link_ij = self.rf_chains_i_tx.min(self.rf_chains_j);
        let link_ki = self.rf_chains_k.min(self.rf_chains_i_rx);
        if self.ns > link_ij {
            return Err(invalid(
                "ns",
                format!("{} exceeds the {link_ij} RF chains of link i->j", self.ns),
            ));
        }
        if self.ns > link_ki {
            return Err(invalid(
                "ns",
                format!("{} exceeds the {link_ki} RF chains of link k->i", self.ns),
            ));
        }
        let positive_real: [(&'static str, f64); 3] = [
            ("max_range_m", self.max_range_m),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("element_spacing", self.element_spacing),
        ];
        for (field, value) in positive_real {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(field, format!("must be positive and finite, got {value}")));
            }
        }
        if !(self.angle_spread_deg.is_finite() && self.angle_spread_deg >= 0.0) {
            return Err(invalid("angle_spread_deg", "must be non-negative"));
        }
        for (field, range) in [("clusters", self.clusters), ("rays", self.rays)] {
            if range[0] == 0 || range[0] > range[1] {
                return Err(invalid(
                    field,
                    format!("[{}, {}] must satisfy 1 <= min <= max", range[0], range[1]),
                ));
            }
        }
        for (field, value) in [
            ("snr_rr_db", Some(self.snr_rr_db)),
            ("snr_ir_db", self.snr_ir_db),
            ("snr_ri_db", self.snr_ri_db),
        ] {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(invalid(field, "must be finite"));
                }
            }
        }
        if self.snr_grid_db.is_empty() {
            return Err(invalid("snr_grid_db", "must contain at least one SNR"));
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(invalid("snr_grid_db", "entries must be finite"));
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text)
}
