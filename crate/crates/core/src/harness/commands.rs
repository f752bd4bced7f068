use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{HostSource, MessageSource};
use super::simulate::{theory_section, CodeSummary, TheorySection};
use crate::analysis::MetricsReport;
use crate::coset::NestedCode;
use crate::embed::{embed_stream, extract_stream, EmbedKind, Epsilon, Method};
use crate::lattice::LatticeGeometry;
use crate::signal::{pack_message, read_csv, unpack_message, write_csv, SignalBuffer};
use crate::{CodeSpec, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub code: String,
    pub fine_lattice: String,
    pub dimension: usize,
    pub fine: LatticeGeometry,
    pub coarse: LatticeGeometry,
    pub payload: usize,
    pub rate: f64,
    pub bits_per_block: Option<u32>,
    pub alpha: Option<u32>,
    pub subsampling: Vec<Vec<i64>>,
    /// Integer coordinates of each coset leader in the fine basis.
    pub labels: Vec<Vec<i64>>,
    pub representatives: Vec<Vec<f64>>,
}

/// Geometry, payload and the coset leaders of a code.
pub fn info_report(spec: &CodeSpec) -> Result<InfoReport> {
    let code = spec.build()?;
    Ok(InfoReport {
        code: spec.to_string(),
        fine_lattice: code.fine().name(),
        dimension: code.dim(),
        fine: code.fine().geometry(),
        coarse: code.coarse().geometry(),
        payload: code.payload(),
        rate: code.rate(),
        bits_per_block: code.bits_per_block(),
        alpha: code.alpha(),
        subsampling: code.subsampling().to_vec(),
        labels: code.labels().to_vec(),
        representatives: code.representatives().to_vec(),
    })
}

/// Cap on representatives listed by [`InfoReport::to_text`].
const TEXT_LISTING_CAP: usize = 64;

impl InfoReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let geometry = |s: &mut String, name: &str, g: &LatticeGeometry| {
            let _ = writeln!(
                s,
                "{name:<7} volume {:.6}  d_min {:.6}  r_pack {:.6}  G {:.6}",
                g.cell_volume, g.min_distance, g.packing_radius, g.second_moment
            );
        };
        let _ = writeln!(s, "code    {}", self.code);
        let _ = writeln!(s, "lattice {} (N = {})", self.fine_lattice, self.dimension);
        geometry(&mut s, "fine", &self.fine);
        geometry(&mut s, "coarse", &self.coarse);
        let _ = writeln!(s, "M = {}  R = {} bits/dim", self.payload, self.rate);
        if let Some(k) = self.bits_per_block {
            let _ = writeln!(s, "bits/block {k}");
        }
        let _ = writeln!(s, "representatives:");
        for (i, rep) in self
            .representatives
            .iter()
            .take(TEXT_LISTING_CAP)
            .enumerate()
        {
            let coords: Vec<String> = rep.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(s, "  {i:>4}  ({})", coords.join(", "));
        }
        if self.representatives.len() > TEXT_LISTING_CAP {
            let _ = writeln!(
                s,
                "  ... {} more",
                self.representatives.len() - TEXT_LISTING_CAP
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub version: String,
    pub code: CodeSummary,
    pub theory: TheorySection,
    pub oracle_trials: usize,
    pub seed: u64,
}

/// QIM MSE, the MD-QIM lower bound and the Monte Carlo oracle side by side.
pub fn bound_report(
    spec: &CodeSpec,
    epsilon: Epsilon,
    oracle_trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    let code = spec.build()?;
    let eps = epsilon.resolve(code.fine());
    Ok(BoundReport {
        version: crate::VERSION.into(),
        code: CodeSummary::new(&spec.to_string(), &code),
        theory: theory_section(&code, eps, oracle_trials, seed)?,
        oracle_trials,
        seed,
    })
}

impl BoundReport {
    pub fn to_text(&self) -> String {
        let t = &self.theory;
        let mut s = String::new();
        let _ = writeln!(s, "code               {}", self.code.spec);
        let _ = writeln!(s, "epsilon            {}", t.epsilon);
        let _ = writeln!(s, "QIM MSE            {:.12}", t.qim_mse);
        let _ = writeln!(s, "MD-QIM lower bound {:.12}", t.mdqim_mse_bound);
        match &t.oracle {
            Some(o) => {
                let _ = writeln!(
                    s,
                    "MD-QIM oracle (MC) {:.12}  ({} trials)",
                    o.mdqim_mse_estimate, o.trials
                );
            }
            None => {
                let _ = writeln!(s, "MD-QIM oracle (MC) n/a");
            }
        }
        if let Some(x) = t.exact_scalar_mdqim_mse {
            let _ = writeln!(s, "MD-QIM exact (1-D) {x:.12}");
        }
        let _ = writeln!(s, "tightness          {}", t.tightness);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedJob {
    pub code: CodeSpec,
    pub method: Method,
    pub epsilon: Epsilon,
    pub host: HostSource,
    pub message: MessageSource,
    /// Payload length for random messages.
    pub message_len: usize,
    pub host_scale: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Defaults to `<out>.json`.
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub qim: usize,
    pub type_i: usize,
    pub type_ii: usize,
}

/// Metadata written next to an embedded signal; extraction needs it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedSidecar {
    pub version: String,
    pub code: CodeSpec,
    pub method: Method,
    pub epsilon_policy: Epsilon,
    pub epsilon: f64,
    pub host: String,
    pub host_scale: f64,
    pub payload_len: usize,
    pub bits_per_block: u32,
    pub blocks_used: usize,
    pub blocks_available: usize,
    /// `blocks_used · N · R`.
    pub embedded_bits: u64,
    pub samples_written: usize,
    pub kinds: KindCounts,
    /// `Σ ‖s_w − s‖²` over the used blocks.
    pub total_distortion: f64,
    /// Over all full host blocks; absent when the host has zero energy.
    pub metrics: Option<MetricsReport>,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn bits_per_block(code: &NestedCode) -> Result<u32> {
    code.bits_per_block()
        .ok_or(Error::NotPowerOfTwo(code.payload()))
}

/// Embeds a byte payload into the leading blocks of the host and writes the
/// result as CSV. Blocks past the payload and any trailing partial block are
/// copied unchanged.
pub fn embed_file(job: &EmbedJob) -> Result<EmbedSidecar> {
    let code = job.code.build()?;
    let k = bits_per_block(&code)?;
    let epsilon = job.epsilon.resolve(code.fine());
    let hosts = job.host.load(&code, job.host_scale, job.seed)?;
    let payload = job.message.bytes(job.message_len)?;
    let symbols = pack_message(&payload, k)?;
    if symbols.len() > hosts.blocks.len() {
        return Err(Error::Capacity {
            required: symbols.len(),
            available: hosts.blocks.len(),
        });
    }
    let used = &hosts.blocks[..symbols.len()];
    let outcomes = embed_stream(&code, used, &symbols, job.method, epsilon)?;

    let mut kinds = KindCounts::default();
    let mut total_distortion = 0.0;
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(hosts.blocks.len());
    for o in outcomes {
        match o.kind {
            EmbedKind::Qim => kinds.qim += 1,
            EmbedKind::MdqimTypeI => kinds.type_i += 1,
            EmbedKind::MdqimTypeII => kinds.type_ii += 1,
        }
        total_distortion += o.distortion * o.distortion;
        blocks.push(o.embedded);
    }
    blocks.extend_from_slice(&hosts.blocks[symbols.len()..]);
    let metrics = match MetricsReport::compute(&hosts.blocks, &blocks) {
        Ok(m) => Some(m),
        Err(Error::ZeroEnergy | Error::EmptyInput) => None,
        Err(e) => return Err(e),
    };
    let samples: Vec<f64> = blocks
        .iter()
        .flatten()
        .chain(&hosts.tail)
        .copied()
        .collect();
    let samples_written = samples.len();
    write_csv(
        &SignalBuffer::synthetic(samples, hosts.sample_rate_hz)?,
        &job.out,
    )?;

    let sidecar = EmbedSidecar {
        version: crate::VERSION.into(),
        code: job.code.clone(),
        method: job.method,
        epsilon_policy: job.epsilon,
        epsilon: if job.method == Method::Mdqim {
            epsilon
        } else {
            0.0
        },
        host: job.host.to_string(),
        host_scale: job.host_scale,
        payload_len: payload.len(),
        bits_per_block: k,
        blocks_used: symbols.len(),
        blocks_available: hosts.blocks.len(),
        embedded_bits: symbols.len() as u64 * k as u64,
        samples_written,
        kinds,
        total_distortion,
        metrics,
    };
    let path = job
        .sidecar
        .clone()
        .unwrap_or_else(|| sidecar_path(&job.out));
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?)
        .map_err(|e| Error::io(&path, e))?;
    Ok(sidecar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractJob {
    pub input: PathBuf,
    /// Defaults to `<input>.json`.
    pub sidecar: Option<PathBuf>,
    /// Overrides the code recorded in the sidecar.
    pub code: Option<CodeSpec>,
    pub out: Option<PathBuf>,
    /// Original payload, for counting symbol errors.
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub code: CodeSpec,
    pub payload_len: usize,
    pub bits_per_block: u32,
    pub blocks_used: usize,
    pub symbol_errors: Option<usize>,
    pub byte_errors: Option<usize>,
    #[serde(skip)]
    pub payload: Vec<u8>,
}

/// Recovers the payload from an embedded CSV signal using its sidecar.
pub fn extract_file(job: &ExtractJob) -> Result<ExtractReport> {
    let sidecar_file = job
        .sidecar
        .clone()
        .unwrap_or_else(|| sidecar_path(&job.input));
    if !sidecar_file.exists() {
        return Err(Error::MissingMetadata(format!(
            "sidecar {} not found; the payload length and code are needed to extract",
            sidecar_file.display()
        )));
    }
    let text = std::fs::read_to_string(&sidecar_file).map_err(|e| Error::io(&sidecar_file, e))?;
    let meta: EmbedSidecar = serde_json::from_str(&text)
        .map_err(|e| Error::MissingMetadata(format!("{}: {e}", sidecar_file.display())))?;
    let spec = job.code.clone().unwrap_or_else(|| meta.code.clone());
    let code = spec.build()?;
    let k = bits_per_block(&code)?;
    let needed = crate::signal::symbols_needed(meta.payload_len, k);

    let signal = read_csv(&job.input)?;
    let blocks = crate::signal::block_signal(&signal.samples, code.dim())?.blocks;
    if blocks.len() < needed {
        return Err(Error::Capacity {
            required: needed,
            available: blocks.len(),
        });
    }
    let symbols = extract_stream(&code, &blocks[..needed])?;
    let payload = unpack_message(&symbols, k, meta.payload_len)?;
    if let Some(out) = &job.out {
        std::fs::write(out, &payload).map_err(|e| Error::io(out, e))?;
    }
    let (symbol_errors, byte_errors) = match &job.reference {
        Some(path) => {
            let reference = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let expected = pack_message(&reference, k)?;
            let sym = symbols
                .iter()
                .zip(&expected)
                .filter(|(a, b)| a != b)
                .count()
                + expected.len().abs_diff(symbols.len());
            let bytes = payload
                .iter()
                .zip(&reference)
                .filter(|(a, b)| a != b)
                .count()
                + reference.len().abs_diff(payload.len());
            (Some(sym), Some(bytes))
        }
        None => (None, None),
    };
    Ok(ExtractReport {
        code: spec,
        payload_len: meta.payload_len,
        bits_per_block: k,
        blocks_used: needed,
        symbol_errors,
        byte_errors,
        payload,
    })
}
