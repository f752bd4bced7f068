//! Cover signals: CSV and WFDB format 212 input, CSV output, blocking into
//! host vectors and byte ↔ symbol packing.

mod message;
mod synth;
mod text;
pub mod wfdb;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use message::{pack_message, symbols_needed, unpack_message, MessageStream};
pub use synth::{synthetic_ecg, synthetic_record};
pub use text::{read_csv, write_csv};
pub use wfdb::{read_wfdb_212, read_wfdb_record, WfdbHeader};

/// Rate assigned to CSV input, which carries no timing information.
pub const CSV_SAMPLE_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Wfdb212,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub file: Option<String>,
    pub format: SourceFormat,
    pub channel: Option<usize>,
}

/// Samples in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub channel_label: String,
    pub source: Provenance,
}

impl SignalBuffer {
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: f64,
        channel_label: impl Into<String>,
        source: Provenance,
    ) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        Ok(SignalBuffer {
            samples,
            sample_rate_hz,
            channel_label: channel_label.into(),
            source,
        })
    }

    /// Buffer for values that did not come from a file.
    pub fn synthetic(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        SignalBuffer::new(
            samples,
            sample_rate_hz,
            "synthetic",
            Provenance {
                file: None,
                format: SourceFormat::Synthetic,
                channel: None,
            },
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub blocks: Vec<Vec<f64>>,
    /// Trailing samples that did not fill a block.
    pub dropped: usize,
}

/// Consecutive non-overlapping blocks of `n` samples; the remainder is
/// dropped rather than padded.
pub fn block_signal(samples: &[f64], n: usize) -> Result<Blocks> {
    if n == 0 {
        return Err(Error::InvalidBlockSize);
    }
    let blocks = samples.chunks_exact(n).map(<[f64]>::to_vec).collect();
    Ok(Blocks {
        blocks,
        dropped: samples.len() % n,
    })
}

/// Inverse of [`block_signal`]: concatenates the blocks and re-appends the
/// untouched tail.
pub fn unblock(blocks: &[Vec<f64>], tail: &[f64]) -> Vec<f64> {
    blocks.iter().flatten().chain(tail).copied().collect()
}
