use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coset::NestedCode;
use crate::embed::{self, Method};
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackModel {
    /// Per-dimension noise standard deviation.
    pub sigma: f64,
    pub seed: u64,
}

impl AttackModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(AttackModel { sigma, seed })
    }
}

/// Adds i.i.d. N(0, σ²) noise to every coordinate.
pub fn awgn_attack(blocks: &[Vec<f64>], model: &AttackModel) -> Result<Vec<Vec<f64>>> {
    let model = AttackModel::new(model.sigma, model.seed)?;
    if model.sigma == 0.0 {
        return Ok(blocks.to_vec());
    }
    let normal = Normal::new(0.0, model.sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = rng::stream(model.seed, Stream::Noise);
    Ok(blocks
        .iter()
        .map(|b| b.iter().map(|v| v + normal.sample(&mut rng)).collect())
        .collect())
}

/// Hosts drawn uniformly from the parallelepiped spanned by `cells` copies
/// of each coarse basis vector. That region tiles space under `cells·Λc`, so
/// host positions modulo both lattices are exactly uniform.
pub fn cell_uniform_hosts(code: &NestedCode, cells: u32, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = code.dim();
    let mut rng = rng::stream(seed, Stream::Hosts);
    let mut u = vec![0.0; n];
    (0..count)
        .map(|_| {
            u.iter_mut()
                .for_each(|v| *v = cells as f64 * rng.random::<f64>());
            code.coarse().parallelepiped_point(&u)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    pub errors: usize,
    pub trials: usize,
    pub rate: f64,
}

impl ErrorRate {
    pub fn from_counts(errors: usize, trials: usize) -> Self {
        ErrorRate {
            errors,
            trials,
            rate: if trials == 0 {
                0.0
            } else {
                errors as f64 / trials as f64
            },
        }
    }
}

/// Fraction of blocks decoded to the wrong message after AWGN of strength
/// `sigma`, for hosts spread over 32 coarse cells and uniform symbols.
pub fn message_error_rate(
    code: &NestedCode,
    method: Method,
    epsilon: f64,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<ErrorRate> {
    let hosts = cell_uniform_hosts(code, 32, trials, seed);
    let mut sym_rng = rng::stream(seed, Stream::Messages);
    let symbols: Vec<usize> = (0..trials)
        .map(|_| sym_rng.random_range(0..code.payload()))
        .collect();
    let outcomes = embed::embed_stream(code, &hosts, &symbols, method, epsilon)?;
    let embedded: Vec<Vec<f64>> = outcomes.into_iter().map(|o| o.embedded).collect();
    let observed = awgn_attack(&embedded, &AttackModel::new(sigma, seed)?)?;
    let decoded = embed::extract_stream(code, &observed)?;
    let errors = decoded.iter().zip(&symbols).filter(|(a, b)| a != b).count();
    Ok(ErrorRate::from_counts(errors, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn z2() -> NestedCode {
        NestedCode::build_self_similar(&Lattice::integer(1).unwrap(), 2).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let blocks = vec![vec![1.0, 2.0], vec![3.0, -4.0]];
        assert_eq!(
            awgn_attack(
                &blocks,
                &AttackModel {
                    sigma: 0.0,
                    seed: 1
                }
            )
            .unwrap(),
            blocks
        );
        assert!(AttackModel::new(-1.0, 0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let sigma = 0.7;
        let blocks = vec![vec![0.0; 10]; 100_000];
        let noisy = awgn_attack(&blocks, &AttackModel { sigma, seed: 9 }).unwrap();
        let samples: Vec<f64> = noisy.into_iter().flatten().collect();
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.02, "{var}");
        assert!(mean.abs() < 3.0 * sigma / count.sqrt(), "{mean}");
    }

    #[test]
    fn noise_free_error_rate_is_zero() {
        for method in [Method::Qim, Method::Mdqim] {
            let r = message_error_rate(&z2(), method, 1e-6, 0.0, 5_000, 3).unwrap();
            assert_eq!(r.errors, 0);
        }
    }

    #[test]
    fn mdqim_is_less_robust() {
        let q = message_error_rate(&z2(), Method::Qim, 1e-6, 0.25, 50_000, 4).unwrap();
        let m = message_error_rate(&z2(), Method::Mdqim, 1e-6, 0.25, 50_000, 4).unwrap();
        assert!(m.rate >= q.rate, "{q:?} {m:?}");
    }

    #[test]
    fn huge_noise_randomizes_messages() {
        let code = NestedCode::build_self_similar(&Lattice::a2(), 2).unwrap();
        let r = message_error_rate(&code, Method::Qim, 1e-6, 1e3, 40_000, 5).unwrap();
        assert!((r.rate - 0.75).abs() < 0.015, "{r:?}");
    }

    #[test]
    fn cell_hosts_cover_many_cells() {
        let code = z2();
        let hosts = cell_uniform_hosts(&code, 32, 10_000, 1);
        let max = hosts.iter().map(|h| h[0]).fold(f64::MIN, f64::max);
        let min = hosts.iter().map(|h| h[0]).fold(f64::MAX, f64::min);
        assert!(min >= 0.0 && max < 64.0 && max > 60.0);
    }
}
