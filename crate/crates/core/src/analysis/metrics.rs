use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Per-dimension mean squared error.
    pub mse: f64,
    /// +∞ when `mse` is zero; serialized as `null`.
    #[serde(with = "super::finite_or_null")]
    pub psnr_db: f64,
    pub prd_percent: f64,
    pub block_count: usize,
    pub dimension: usize,
}

impl MetricsReport {
    pub fn compute(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> Result<Self> {
        let dimension = check_pair(hosts, embedded)?;
        Ok(MetricsReport {
            mse: mse(hosts, embedded)?,
            psnr_db: psnr(hosts, embedded)?,
            prd_percent: prd(hosts, embedded)?,
            block_count: hosts.len(),
            dimension,
        })
    }
}

fn check_pair(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> Result<usize> {
    if hosts.is_empty() {
        return Err(Error::EmptyInput);
    }
    if hosts.len() != embedded.len() {
        return Err(Error::LengthMismatch {
            left: hosts.len(),
            right: embedded.len(),
        });
    }
    let n = hosts[0].len();
    for (s, w) in hosts.iter().zip(embedded) {
        if s.len() != n || w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if s.len() != n { s.len() } else { w.len() },
            });
        }
    }
    Ok(n)
}

fn residual_energy(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> f64 {
    hosts
        .iter()
        .zip(embedded)
        .flat_map(|(s, w)| s.iter().zip(w).map(|(a, b)| (a - b) * (a - b)))
        .sum()
}

/// `(1 / NM) Σₖ ‖sₖ − s_{w,k}‖²`.
pub fn mse(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> Result<f64> {
    let n = check_pair(hosts, embedded)?;
    Ok(residual_energy(hosts, embedded) / (n * hosts.len()) as f64)
}

/// `20·log₁₀(peak-to-peak / √MSE)` with the peak-to-peak range taken over all
/// host samples.
pub fn psnr(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> Result<f64> {
    let m = mse(hosts, embedded)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (lo, hi) = hosts
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(20.0 * ((hi - lo) / m.sqrt()).log10())
}

/// Residual energy over host energy, as a percentage.
pub fn prd(hosts: &[Vec<f64>], embedded: &[Vec<f64>]) -> Result<f64> {
    check_pair(hosts, embedded)?;
    let energy: f64 = hosts.iter().flatten().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok((residual_energy(hosts, embedded) / energy).sqrt() * 100.0)
}
