use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Sweep};
use crate::analysis::{
    awgn_attack, distortion_saving_mc, mdqim_mse_exact_scalar, mdqim_mse_lower_bound, AttackModel,
    ErrorRate, MetricsReport, SavingEstimate,
};
use crate::coset::NestedCode;
use crate::embed::{embed_stream, extract_stream, EmbedKind, Method};
use crate::lattice::LatticeKind;
use crate::{Error, Result};

pub const TIGHTNESS_ABOVE: &str = "bound above oracle";
pub const TIGHTNESS_BELOW: &str = "bound at or below oracle";
pub const TIGHTNESS_NO_ORACLE: &str = "no oracle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub spec: String,
    pub fine_lattice: String,
    pub dimension: usize,
    pub payload: usize,
    pub rate: f64,
    pub fine_packing_radius: f64,
    pub fine_min_distance: f64,
    pub coarse_cell_volume: f64,
}

impl CodeSummary {
    pub fn new(spec: &str, code: &NestedCode) -> Self {
        CodeSummary {
            spec: spec.to_string(),
            fine_lattice: code.fine().name(),
            dimension: code.dim(),
            payload: code.payload(),
            rate: code.rate(),
            fine_packing_radius: code.fine().packing_radius(),
            fine_min_distance: code.fine().min_distance(),
            coarse_cell_volume: code.coarse().cell_volume(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostSummary {
    pub source: String,
    pub blocks: usize,
    pub dropped_samples: usize,
    pub sample_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub metrics: MetricsReport,
    /// Mean Euclidean distance between host and embedded block.
    pub mean_block_distortion: f64,
    /// Share of blocks left untouched (minimum-distortion embedding only).
    pub type_i_fraction: Option<f64>,
    pub message_error_rate: ErrorRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    /// Every block satisfies `d(MD-QIM) ≤ d(QIM)` within tolerance.
    pub holds: bool,
    pub violations: usize,
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheorySection {
    pub epsilon: f64,
    /// `G(Λc)·Vol(Λc)^{2/N}`.
    pub qim_mse: f64,
    pub mdqim_mse_bound: f64,
    pub saving_upper_bound: f64,
    pub oracle: Option<SavingEstimate>,
    /// Closed-form MD-QIM MSE in the ε → 0 limit, one-dimensional integer
    /// codes only.
    pub exact_scalar_mdqim_mse: Option<f64>,
    pub tightness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub parameter: String,
    pub value: f64,
    pub qim_mse: Option<f64>,
    pub mdqim_mse: Option<f64>,
    pub qim_mse_theory: f64,
    pub mdqim_mse_bound: f64,
    pub mdqim_mse_oracle: Option<f64>,
    pub qim_mer: Option<f64>,
    pub mdqim_mer: Option<f64>,
    pub type_i_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub code: CodeSummary,
    pub epsilon: f64,
    pub host: HostSummary,
    /// `blocks · log₂ M`.
    pub embedded_bits: f64,
    pub qim: Option<MethodReport>,
    pub mdqim: Option<MethodReport>,
    pub paired_dominance: Option<Dominance>,
    pub theory: TheorySection,
    pub series: Vec<SeriesRow>,
    pub wall_clock_seconds: f64,
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing field zeroed; identical for identical configs.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_clock_seconds = 0.0;
        copy.to_json()
    }

    fn series_row(&self, parameter: &str, value: f64) -> SeriesRow {
        SeriesRow {
            parameter: parameter.into(),
            value,
            qim_mse: self.qim.as_ref().map(|r| r.metrics.mse),
            mdqim_mse: self.mdqim.as_ref().map(|r| r.metrics.mse),
            qim_mse_theory: self.theory.qim_mse,
            mdqim_mse_bound: self.theory.mdqim_mse_bound,
            mdqim_mse_oracle: self.theory.oracle.map(|o| o.mdqim_mse_estimate),
            qim_mer: self.qim.as_ref().map(|r| r.message_error_rate.rate),
            mdqim_mer: self.mdqim.as_ref().map(|r| r.message_error_rate.rate),
            type_i_fraction: self.mdqim.as_ref().and_then(|r| r.type_i_fraction),
        }
    }
}

/// Theory figures for a code at back-off `epsilon`; the Monte Carlo oracle
/// is skipped when `oracle_trials` is zero or `epsilon = r`.
pub fn theory_section(
    code: &NestedCode,
    epsilon: f64,
    oracle_trials: usize,
    seed: u64,
) -> Result<TheorySection> {
    let bound = mdqim_mse_lower_bound(code, epsilon)?;
    let oracle = if oracle_trials > 0 && epsilon < code.fine().packing_radius() {
        Some(distortion_saving_mc(code, epsilon, oracle_trials, seed)?)
    } else {
        None
    };
    let exact_scalar_mdqim_mse = match (code.fine().kind(), code.dim(), code.alpha()) {
        (LatticeKind::Integer, 1, Some(a)) => {
            Some(mdqim_mse_exact_scalar(a)? * code.fine().scale().powi(2))
        }
        _ => None,
    };
    let tightness = match oracle {
        Some(o) if bound.mdqim_mse_bound > o.mdqim_mse_estimate => TIGHTNESS_ABOVE,
        Some(_) => TIGHTNESS_BELOW,
        None => TIGHTNESS_NO_ORACLE,
    };
    Ok(TheorySection {
        epsilon,
        qim_mse: bound.qim_mse,
        mdqim_mse_bound: bound.mdqim_mse_bound,
        saving_upper_bound: bound.saving_upper_bound,
        oracle,
        exact_scalar_mdqim_mse,
        tightness: tightness.into(),
    })
}

/// Runs every selected method on the same hosts, messages and noise, then
/// adds theory figures and, if requested, a parameter sweep.
pub fn simulate(config: &ExperimentConfig) -> Result<SimulationReport> {
    let start = Instant::now();
    config.validate()?;
    let mut report = simulate_once(config)?;
    if let Some(sweep) = &config.sweep {
        let points: Vec<(ExperimentConfig, &str, f64)> = match sweep {
            Sweep::Alpha(values) => values
                .iter()
                .map(|&a| {
                    let cfg = ExperimentConfig {
                        code: config.code.with_alpha(a),
                        sweep: None,
                        ..config.clone()
                    };
                    (cfg, "alpha", a as f64)
                })
                .collect(),
            Sweep::Sigma(values) => values
                .iter()
                .map(|&s| {
                    let cfg = ExperimentConfig {
                        sigma: s,
                        sweep: None,
                        ..config.clone()
                    };
                    (cfg, "sigma", s)
                })
                .collect(),
        };
        for (cfg, name, value) in points {
            let r = simulate_once(&cfg)
                .map_err(|e| Error::Config(format!("sweep {name} = {value}: {e}")))?;
            report.series.push(r.series_row(name, value));
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn simulate_once(config: &ExperimentConfig) -> Result<SimulationReport> {
    config.validate()?;
    let code = config.code.build()?;
    let epsilon = config.epsilon.resolve(code.fine());
    let source = config.host_source();
    let hosts = source.load(&code, config.host_scale, config.seed)?;
    if hosts.blocks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let symbols = config.message_source().symbols(&code, hosts.blocks.len())?;
    let attack = AttackModel::new(config.sigma, config.seed)?;

    let mut distortions: Vec<Vec<f64>> = Vec::new();
    let mut method_reports = Vec::new();
    for method in config.method.methods() {
        let outcomes = embed_stream(&code, &hosts.blocks, &symbols, method, epsilon)?;
        let embedded: Vec<Vec<f64>> = outcomes.iter().map(|o| o.embedded.clone()).collect();
        let metrics = MetricsReport::compute(&hosts.blocks, &embedded)?;
        let per_block: Vec<f64> = outcomes.iter().map(|o| o.distortion).collect();
        let type_i_fraction = (method == Method::Mdqim).then(|| {
            let n = outcomes
                .iter()
                .filter(|o| o.kind == EmbedKind::MdqimTypeI)
                .count();
            n as f64 / outcomes.len() as f64
        });
        let observed = awgn_attack(&embedded, &attack)?;
        let decoded = extract_stream(&code, &observed)?;
        let errors = decoded.iter().zip(&symbols).filter(|(a, b)| a != b).count();
        method_reports.push(MethodReport {
            method,
            metrics,
            mean_block_distortion: per_block.iter().sum::<f64>() / per_block.len() as f64,
            type_i_fraction,
            message_error_rate: ErrorRate::from_counts(errors, symbols.len()),
        });
        distortions.push(per_block);
    }

    let paired_dominance = (distortions.len() == 2).then(|| {
        let tol = code.fine().tolerance();
        let excess: Vec<f64> = distortions[0]
            .iter()
            .zip(&distortions[1])
            .map(|(q, m)| m - q)
            .collect();
        let violations = excess.iter().filter(|&&e| e > tol).count();
        Dominance {
            holds: violations == 0,
            violations,
            max_excess: excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    });
    let theory = theory_section(
        &code,
        epsilon.min(code.fine().packing_radius()),
        config.oracle_trials,
        config.seed,
    )?;
    let mut qim = None;
    let mut mdqim = None;
    for r in method_reports {
        match r.method {
            Method::Qim => qim = Some(r),
            Method::Mdqim => mdqim = Some(r),
        }
    }
    let n = code.dim();
    Ok(SimulationReport {
        version: crate::VERSION.into(),
        config: config.clone(),
        code: CodeSummary::new(&config.code.to_string(), &code),
        epsilon,
        host: HostSummary {
            source: source.to_string(),
            blocks: hosts.blocks.len(),
            dropped_samples: hosts.tail.len(),
            sample_rate_hz: hosts.sample_rate_hz,
        },
        embedded_bits: hosts.blocks.len() as f64 * n as f64 * code.rate(),
        qim,
        mdqim,
        paired_dominance,
        theory,
        series: Vec::new(),
        wall_clock_seconds: 0.0,
    })
}

pub fn write_series(rows: &[SeriesRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
