use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::cell_uniform_hosts;
use crate::coset::NestedCode;
use crate::embed::{Epsilon, Method};
use crate::rng::{self, Stream};
use crate::signal::{block_signal, pack_message, read_csv, read_wfdb_record};
use crate::{CodeSpec, Error, Result};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_ORACLE_TRIALS: usize = 200_000;
/// Coarse cells spanned by the default synthetic host along each basis vector.
pub const DEFAULT_HOST_CELLS: u32 = 32;

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                String::deserialize(d)?
                    .parse()
                    .map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    Qim,
    Mdqim,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Qim => vec![Method::Qim],
            MethodChoice::Mdqim => vec![Method::Mdqim],
            MethodChoice::Both => vec![Method::Qim, Method::Mdqim],
        }
    }

    pub fn single(self) -> Result<Method> {
        match self {
            MethodChoice::Qim => Ok(Method::Qim),
            MethodChoice::Mdqim => Ok(Method::Mdqim),
            MethodChoice::Both => Err(Error::Config("choose one method: qim or mdqim".into())),
        }
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(MethodChoice::Both),
            other => other.parse::<Method>().map(|m| match m {
                Method::Qim => MethodChoice::Qim,
                Method::Mdqim => MethodChoice::Mdqim,
            }),
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Qim => "qim",
            MethodChoice::Mdqim => "mdqim",
            MethodChoice::Both => "both",
        })
    }
}

string_serde!(MethodChoice);

/// Where host samples come from.
///
/// * `csv:<path>`
/// * `wfdb:<record>[,<channel>]`, with `<record>` the header path (the
///   `.hea` suffix may be dropped) and channel 0 by default
/// * `uniform:<lo>,<hi>,<count>`: `count` i.i.d. samples on `[lo, hi)`
/// * `cells:<blocks>[,<cells>]`: blocks uniform over the parallelepiped
///   spanned by `cells` (default 32) copies of each coarse basis vector
#[derive(Debug, Clone, PartialEq)]
pub enum HostSource {
    Csv(PathBuf),
    Wfdb { record: PathBuf, channel: usize },
    Uniform { lo: f64, hi: f64, count: usize },
    Cells { blocks: usize, cells: u32 },
}

impl FromStr for HostSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("bad host source '{s}': {why}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected csv:, wfdb:, uniform: or cells:"))?;
        match kind {
            "csv" if !rest.is_empty() => Ok(HostSource::Csv(rest.into())),
            "wfdb" if !rest.is_empty() => {
                let (record, channel) = match rest.rsplit_once(',') {
                    Some((r, c)) => match c.trim().parse() {
                        Ok(ch) => (r, ch),
                        Err(_) => (rest, 0),
                    },
                    None => (rest, 0),
                };
                Ok(HostSource::Wfdb {
                    record: record.into(),
                    channel,
                })
            }
            "uniform" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                let [lo, hi, count] = parts[..] else {
                    return Err(bad("expected uniform:<lo>,<hi>,<count>"));
                };
                let lo: f64 = lo.parse().map_err(|_| bad("lo"))?;
                let hi: f64 = hi.parse().map_err(|_| bad("hi"))?;
                let count = count.parse().map_err(|_| bad("count"))?;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(bad("need finite lo < hi"));
                }
                Ok(HostSource::Uniform { lo, hi, count })
            }
            "cells" => {
                let (blocks, cells) = match rest.split_once(',') {
                    Some((b, c)) => (b, c.trim().parse().map_err(|_| bad("cells"))?),
                    None => (rest, DEFAULT_HOST_CELLS),
                };
                if cells == 0 {
                    return Err(bad("cells must be >= 1"));
                }
                Ok(HostSource::Cells {
                    blocks: blocks.trim().parse().map_err(|_| bad("blocks"))?,
                    cells,
                })
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

impl fmt::Display for HostSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostSource::Csv(p) => write!(f, "csv:{}", p.display()),
            HostSource::Wfdb { record, channel } => {
                write!(f, "wfdb:{},{}", record.display(), channel)
            }
            HostSource::Uniform { lo, hi, count } => write!(f, "uniform:{lo},{hi},{count}"),
            HostSource::Cells { blocks, cells } => write!(f, "cells:{blocks},{cells}"),
        }
    }
}

string_serde!(HostSource);

/// Host signal cut into code-dimension blocks.
#[derive(Debug, Clone)]
pub struct HostBlocks {
    pub blocks: Vec<Vec<f64>>,
    /// Samples after the last full block, kept verbatim on output.
    pub tail: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl HostSource {
    /// Loads and blocks the host, multiplying every sample by `scale`.
    pub fn load(&self, code: &NestedCode, scale: f64, seed: u64) -> Result<HostBlocks> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "host scale must be positive, got {scale}"
            )));
        }
        let n = code.dim();
        let (samples, rate) = match self {
            HostSource::Csv(path) => {
                let b = read_csv(path)?;
                (b.samples, b.sample_rate_hz)
            }
            HostSource::Wfdb { record, channel } => {
                let b = read_wfdb_record(record, *channel)?;
                (b.samples, b.sample_rate_hz)
            }
            HostSource::Uniform { lo, hi, count } => {
                let mut r = rng::stream(seed, Stream::Hosts);
                let v = (0..*count)
                    .map(|_| lo + (hi - lo) * r.random::<f64>())
                    .collect();
                (v, 1.0)
            }
            HostSource::Cells { blocks, cells } => {
                let v: Vec<f64> = cell_uniform_hosts(code, *cells, *blocks, seed)
                    .into_iter()
                    .flatten()
                    .collect();
                (v, 1.0)
            }
        };
        let samples: Vec<f64> = samples.iter().map(|v| v * scale).collect();
        let split = block_signal(&samples, n)?;
        let tail = samples[samples.len() - split.dropped..].to_vec();
        Ok(HostBlocks {
            blocks: split.blocks,
            tail,
            sample_rate_hz: rate,
        })
    }
}

/// Message symbols: `random:<seed>` draws i.i.d. uniform symbols (or bytes),
/// a bare path reads the payload bytes from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum MessageSource {
    Random(u64),
    File(PathBuf),
}

impl FromStr for MessageSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("random:") {
            Some(seed) => seed
                .trim()
                .parse()
                .map(MessageSource::Random)
                .map_err(|_| Error::Config(format!("bad message seed in '{s}'"))),
            None if s.is_empty() => Err(Error::Config("empty message source".into())),
            None => Ok(MessageSource::File(
                s.strip_prefix("file:").unwrap_or(s).into(),
            )),
        }
    }
}

impl fmt::Display for MessageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageSource::Random(seed) => write!(f, "random:{seed}"),
            MessageSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

string_serde!(MessageSource);

impl MessageSource {
    /// Payload bytes; random payloads have `len` bytes.
    pub fn bytes(&self, len: usize) -> Result<Vec<u8>> {
        match self {
            MessageSource::Random(seed) => {
                let mut r = rng::stream(*seed, Stream::Messages);
                Ok((0..len).map(|_| r.random()).collect())
            }
            MessageSource::File(path) => std::fs::read(path).map_err(|e| Error::io(path, e)),
        }
    }

    /// `count` symbols below the code's payload. Files are packed bit-wise
    /// and must supply at least `count` symbols.
    pub fn symbols(&self, code: &NestedCode, count: usize) -> Result<Vec<usize>> {
        match self {
            MessageSource::Random(seed) => {
                let mut r = rng::stream(*seed, Stream::Messages);
                Ok((0..count)
                    .map(|_| r.random_range(0..code.payload()))
                    .collect())
            }
            MessageSource::File(_) => {
                let k = code
                    .bits_per_block()
                    .ok_or(Error::NotPowerOfTwo(code.payload()))?;
                let mut symbols = pack_message(&self.bytes(0)?, k)?;
                if symbols.len() < count {
                    return Err(Error::Config(format!(
                        "message file yields {} symbols, {count} needed",
                        symbols.len()
                    )));
                }
                symbols.truncate(count);
                Ok(symbols)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Alpha(Vec<u32>),
    Sigma(Vec<f64>),
}

/// Everything a simulation depends on. Serialized verbatim into the report;
/// feeding that echo back reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub method: MethodChoice,
    pub epsilon: Epsilon,
    /// `None` selects `cells:<trials>`.
    pub host: Option<HostSource>,
    /// `None` selects `random:<seed>`.
    pub message: Option<MessageSource>,
    pub host_scale: f64,
    /// AWGN standard deviation for the message error rate.
    pub sigma: f64,
    pub trials: usize,
    pub oracle_trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            code: "Z:2".parse().expect("valid literal"),
            method: MethodChoice::Both,
            epsilon: Epsilon::default(),
            host: None,
            message: None,
            host_scale: 1.0,
            sigma: 0.0,
            trials: DEFAULT_TRIALS,
            oracle_trials: DEFAULT_ORACLE_TRIALS,
            seed: 0,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn host_source(&self) -> HostSource {
        self.host.clone().unwrap_or(HostSource::Cells {
            blocks: self.trials,
            cells: DEFAULT_HOST_CELLS,
        })
    }

    pub fn message_source(&self) -> MessageSource {
        self.message
            .clone()
            .unwrap_or(MessageSource::Random(self.seed))
    }

    /// Fails early on missing files and out-of-range numbers.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let mut files: Vec<PathBuf> = Vec::new();
        match self.host_source() {
            HostSource::Csv(p) => files.push(p),
            HostSource::Wfdb { record, .. } => {
                if record.extension().is_some_and(|e| e == "hea") {
                    files.push(record)
                } else {
                    let mut s = record.into_os_string();
                    s.push(".hea");
                    files.push(s.into());
                }
            }
            _ => {}
        }
        if let MessageSource::File(p) = self.message_source() {
            files.push(p);
        }
        match &self.code.nesting {
            crate::coset::Nesting::Matrix(p) => files.push(p.clone()),
            crate::coset::Nesting::Alpha(_) => {}
        }
        for f in files {
            if !f.exists() {
                return Err(Error::Config(format!("file not found: {}", f.display())));
            }
        }
        Ok(())
    }
}
