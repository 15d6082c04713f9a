//! JSON dump of one trial's channels and RF beamformers, for comparing
//! implementations.
//!
//! Layout:
//!
//! ```json
//! {
//!   "schema": "coexist-channels/1",
//!   "seed": 0,
//!   "matrices": [
//!     { "name": "h_rr", "kind": "radar", "rows": 4, "cols": 3,
//!       "data": [re00, im00, re01, im01, ...] },
//!     ...
//!   ]
//! }
//! ```
//!
//! `data` is row-major with interleaved real/imaginary parts. Matrices appear
//! in the order `h_rr, h_ij, h_ki, h_ir, h_ri, f_rf_i, w_rf_j, f_rf_k, w_rf_i`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelKind;
use crate::error::{Error, Result};
use crate::sim::{draw_channels, train_rf, Scenario};
use crate::C64;

pub const DUMP_SCHEMA: &str = "coexist-channels/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Radar,
    Communication,
    InterferenceTx,
    InterferenceRx,
    RfPrecoder,
    RfCombiner,
}

impl From<ChannelKind> for MatrixKind {
    fn from(k: ChannelKind) -> Self {
        match k {
            ChannelKind::Radar => Self::Radar,
            ChannelKind::Communication => Self::Communication,
            ChannelKind::InterferenceTx => Self::InterferenceTx,
            ChannelKind::InterferenceRx => Self::InterferenceRx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub name: String,
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn new(name: &str, kind: MatrixKind, m: &DMatrix<C64>) -> Self {
        let mut data = Vec::with_capacity(2 * m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)].re);
                data.push(m[(r, c)].im);
            }
        }
        Self {
            name: name.to_string(),
            kind,
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        if self.data.len() != 2 * self.rows * self.cols {
            return Err(Error::InvalidArgument(format!(
                "matrix `{}` declares {}x{} but carries {} reals",
                self.name,
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |r, c| {
            let k = 2 * (r * self.cols + c);
            C64::new(self.data[k], self.data[k + 1])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    pub schema: String,
    pub seed: u64,
    pub matrices: Vec<MatrixRecord>,
}

impl ChannelDump {
    pub fn get(&self, name: &str) -> Option<&MatrixRecord> {
        self.matrices.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed channel dump: {e}")))?;
        if dump.schema != DUMP_SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported dump schema `{}`",
                dump.schema
            )));
        }
        Ok(dump)
    }
}

/// Draws the channels of trial `seed` and runs beamtraining on them.
pub fn dump_channels(scenario: &Scenario, seed: u64) -> Result<ChannelDump> {
    let ch = draw_channels(scenario, seed)?;
    let rf = train_rf(scenario, &ch)?;
    let channel = |name, c: &crate::channel::ChannelMatrix| MatrixRecord::new(name, c.kind.into(), &c.entries);
    Ok(ChannelDump {
        schema: DUMP_SCHEMA.to_string(),
        seed,
        matrices: vec![
            channel("h_rr", &ch.h_rr),
            channel("h_ij", &ch.h_ij),
            channel("h_ki", &ch.h_ki),
            channel("h_ir", &ch.h_ir),
            channel("h_ri", &ch.h_ri),
            MatrixRecord::new("f_rf_i", MatrixKind::RfPrecoder, &rf.link_ij.rf_precoder),
            MatrixRecord::new("w_rf_j", MatrixKind::RfCombiner, &rf.link_ij.rf_combiner),
            MatrixRecord::new("f_rf_k", MatrixKind::RfPrecoder, &rf.link_ki.rf_precoder),
            MatrixRecord::new("w_rf_i", MatrixKind::RfCombiner, &rf.link_ki.rf_combiner),
        ],
    })
}
