//! Closed-form embedding distortion under the high-resolution model, the
//! lower bound on minimum-distortion QIM's MSE, and two independent oracles
//! for the latter (exact 1-D integral, Monte Carlo in any dimension).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coset::NestedCode;
use crate::rng::{self, Stream};
use crate::{Error, Result};

const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    /// `G(Λc)·Vol(Λc)^{2/N}`.
    pub qim_mse: f64,
    /// Right-hand side of the MD-QIM lower bound.
    pub mdqim_mse_bound: f64,
    /// `qim_mse − mdqim_mse_bound`: the bound on the distortion saving D.
    pub saving_upper_bound: f64,
    pub epsilon: f64,
}

/// Per-dimension QIM distortion with the host error uniform over the coarse
/// Voronoi cell.
pub fn qim_mse_theoretical(code: &NestedCode) -> f64 {
    let coarse = code.coarse();
    let n = code.dim() as f64;
    coarse.second_moment() * coarse.cell_volume().powf(2.0 / n)
}

/// Evaluates the MD-QIM lower bound term by term, as stated:
///
/// ```text
/// MSE_QIM − (1/N)((M−1)/M)·2(r−ε)·√(N·G(Λc)V_c^{2/N} − N·G(Λf)V_f^{2/N})
///         + (1/N)((M−1)/M)·(r−ε)²
///         − (1/M)·G(Λf)V_f^{2/N}
/// ```
///
/// with `M = |det J|` and `r` the fine packing radius. `ε = r` is accepted
/// and makes the middle terms vanish.
pub fn mdqim_mse_lower_bound(code: &NestedCode, epsilon: f64) -> Result<TheoryReport> {
    let fine = code.fine();
    let r = fine.packing_radius();
    if !(epsilon >= 0.0 && epsilon <= r) {
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            packing_radius: r,
        });
    }
    let n = code.dim() as f64;
    let m = code.payload() as f64;
    let qim = qim_mse_theoretical(code);
    let fine_moment = fine.second_moment() * fine.cell_volume().powf(2.0 / n);
    let weight = (1.0 / n) * ((m - 1.0) / m);
    let reach = r - epsilon;
    let root = (n * qim - n * fine_moment).sqrt();
    let bound = qim - weight * 2.0 * reach * root + weight * reach * reach - fine_moment / m;
    Ok(TheoryReport {
        qim_mse: qim,
        mdqim_mse_bound: bound,
        saving_upper_bound: qim - bound,
        epsilon,
    })
}

/// Exact MD-QIM MSE for the scalar code `Z:α` as ε → 0: the error
/// `p ~ U[−α/2, α/2)` costs `(|p| − ½)²` outside the packing interval, which
/// integrates to `(α−1)³ / (12α)`.
pub fn mdqim_mse_exact_scalar(alpha: u32) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let a = alpha as f64;
    Ok((a - 1.0).powi(3) / (12.0 * a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingEstimate {
    /// Estimated distortion saving `MSE_QIM − MSE_MD-QIM`.
    pub d_estimate: f64,
    pub mdqim_mse_estimate: f64,
    pub qim_mse_estimate: f64,
    /// Empirical probability that `‖p‖ < r_pack(Λf)` (no movement needed).
    pub type_one_probability: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Monte Carlo realisation of the high-resolution model: the difference
/// vector `p` is drawn uniformly over the coarse Voronoi cell (parallelepiped
/// sample folded by `Q_{Λc}`), and the MD-QIM projection rule is applied.
pub fn distortion_saving_mc(
    code: &NestedCode,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<SavingEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials {
            min: MIN_TRIALS,
            got: trials,
        });
    }
    let r = code.fine().packing_radius();
    if !(epsilon >= 0.0 && epsilon < r) {
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            packing_radius: r,
        });
    }
    let coarse = code.coarse();
    let n = code.dim();
    let mut rng = rng::stream(seed, Stream::Oracle);
    let mut u = vec![0.0; n];
    let (mut qim_acc, mut md_acc, mut inside) = (0.0, 0.0, 0usize);
    for _ in 0..trials {
        u.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let x = coarse.parallelepiped_point(&u);
        let q = coarse.nearest_point(&x)?;
        let len2: f64 = x
            .iter()
            .zip(&q.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let len = len2.sqrt();
        qim_acc += len2;
        if len < r {
            inside += 1;
        } else {
            md_acc += (len - (r - epsilon)).powi(2);
        }
    }
    let denom = (trials * n) as f64;
    let qim = qim_acc / denom;
    let md = md_acc / denom;
    Ok(SavingEstimate {
        d_estimate: qim - md,
        mdqim_mse_estimate: md,
        qim_mse_estimate: qim,
        type_one_probability: inside as f64 / trials as f64,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn code(l: Lattice, alpha: u32) -> NestedCode {
        NestedCode::build_self_similar(&l, alpha).unwrap()
    }

    fn z(alpha: u32) -> NestedCode {
        code(Lattice::integer(1).unwrap(), alpha)
    }

    #[test]
    fn qim_plug_in_values() {
        // ∫_{-1}^{1} u² du / 2 = 1/3
        assert!((qim_mse_theoretical(&z(2)) - 1.0 / 3.0).abs() < 1e-15);
        let a2 = qim_mse_theoretical(&code(Lattice::a2().unit_volume(), 2));
        assert!((a2 - 0.32075).abs() < 1e-5, "{a2}");
        let d4 = qim_mse_theoretical(&code(Lattice::d4().unit_volume(), 2));
        assert!((d4 - 0.30641).abs() < 1e-5, "{d4}");
        let e8 = qim_mse_theoretical(&code(Lattice::e8(), 2));
        assert!((e8 - 0.28673).abs() < 1e-5, "{e8}");
    }

    #[test]
    fn bound_scalar_hand_value() {
        // 1/3 − 1/4 + 1/8 − 1/24
        let t = mdqim_mse_lower_bound(&z(2), 0.0).unwrap();
        assert!((t.mdqim_mse_bound - 1.0 / 6.0).abs() < 1e-13);
        assert!((t.saving_upper_bound - (t.qim_mse - t.mdqim_mse_bound)).abs() < 1e-15);
    }

    #[test]
    fn bound_with_full_epsilon() {
        let c = z(2);
        let t = mdqim_mse_lower_bound(&c, 0.5).unwrap();
        assert!((t.mdqim_mse_bound - (1.0 / 3.0 - 0.5 / 12.0)).abs() < 1e-15);
        assert!(mdqim_mse_lower_bound(&c, 0.6).is_err());
        assert!(mdqim_mse_lower_bound(&c, -0.1).is_err());
    }

    #[test]
    fn bound_a2_regression() {
        let c = code(Lattice::a2().unit_volume(), 2);
        let eps = 1e-6 * c.fine().min_distance();
        let t = mdqim_mse_lower_bound(&c, eps).unwrap();
        assert!(t.mdqim_mse_bound.is_finite());
        assert!(t.mdqim_mse_bound < t.qim_mse);
        // Agrees with a hand evaluation to 6 digits.
        assert!(
            (t.mdqim_mse_bound - A2_UNIT_BOUND).abs() < 1e-12,
            "{:.15}",
            t.mdqim_mse_bound
        );
    }

    const A2_UNIT_BOUND: f64 = 0.129448069493237;

    #[test]
    fn exact_scalar_values() {
        assert!((mdqim_mse_exact_scalar(2).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        assert!((mdqim_mse_exact_scalar(4).unwrap() - 27.0 / 48.0).abs() < 1e-15);
        let a = 1000u32;
        let ratio = mdqim_mse_exact_scalar(a).unwrap() / ((a * a) as f64 / 12.0);
        assert!((ratio - 1.0).abs() < 5e-3);
        assert!(mdqim_mse_exact_scalar(1).is_err());
    }

    #[test]
    fn mc_matches_scalar_closed_form() {
        let est = distortion_saving_mc(&z(2), 1e-9, 1_000_000, 11).unwrap();
        let exact = mdqim_mse_exact_scalar(2).unwrap();
        assert!(
            (est.mdqim_mse_estimate / exact - 1.0).abs() < 0.03,
            "{est:?}"
        );
        assert!((est.type_one_probability - 0.5).abs() < 0.01);
        assert!((est.qim_mse_estimate - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn mc_a2_type_one_probability_is_ball_fraction() {
        let c = code(Lattice::a2(), 2);
        let est = distortion_saving_mc(&c, 1e-6, 1_000_000, 3).unwrap();
        // Disc of radius ½ over a coarse cell of area 4·√3/2.
        let ball = std::f64::consts::PI * 0.25 / (4.0 * 3f64.sqrt() / 2.0);
        assert!((est.type_one_probability - ball).abs() < 0.003, "{est:?}");
        assert!(est.type_one_probability <= 1.0 / 4.0);
    }

    #[test]
    fn mc_preconditions() {
        assert!(matches!(
            distortion_saving_mc(&z(2), 0.0, 10, 1),
            Err(Error::TooFewTrials { .. })
        ));
        assert!(distortion_saving_mc(&z(2), 0.5, 20_000, 1).is_err());
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let a = distortion_saving_mc(&z(4), 1e-6, 20_000, 5).unwrap();
        let b = distortion_saving_mc(&z(4), 1e-6, 20_000, 5).unwrap();
        assert_eq!(a, b);
    }
}
