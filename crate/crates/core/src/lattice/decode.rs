//! Closed-form decoders for the named lattices, in unscaled coordinates.

use std::collections::VecDeque;

use super::{Basis, LatticeKind};

/// Nearest point of Dₙ: round every coordinate, and if the sum comes out odd
/// re-round the coordinate with the largest rounding error the other way.
pub(super) fn round_dn(y: &[f64]) -> Vec<f64> {
    let mut f: Vec<f64> = y.iter().map(|v| v.round()).collect();
    let parity: i64 = f.iter().map(|v| *v as i64).sum();
    if parity.rem_euclid(2) != 0 {
        let mut worst = 0;
        let mut worst_err = -1.0;
        for (k, (a, b)) in y.iter().zip(&f).enumerate() {
            let err = (a - b).abs();
            if err > worst_err {
                worst = k;
                worst_err = err;
            }
        }
        f[worst] += if y[worst] >= f[worst] { 1.0 } else { -1.0 };
    }
    f
}

/// Nearest point of E8 = D8 ∪ (D8 + ½): the better of the two coset decodes.
pub(super) fn e8(y: &[f64]) -> Vec<f64> {
    let a = round_dn(y);
    let shifted: Vec<f64> = y.iter().map(|v| v - 0.5).collect();
    let mut b = round_dn(&shifted);
    b.iter_mut().for_each(|v| *v += 0.5);
    if sq_dist(y, &a) <= sq_dist(y, &b) {
        a
    } else {
        b
    }
}

/// Babai rounding in the A2 basis followed by a search over the nine
/// neighbouring offsets.
pub(super) fn a2(basis: &Basis, y: &[f64]) -> Vec<i64> {
    let center = basis.round_solve(y);
    let mut best = center.clone();
    let mut best_d = f64::INFINITY;
    let tol = basis.tol_sq();
    for dz0 in -1..=1 {
        for dz1 in -1..=1 {
            let z = vec![center[0] + dz0, center[1] + dz1];
            let d = basis.dist2(y, &z);
            if d < best_d - tol || (d <= best_d + tol && z < best) {
                best_d = best_d.min(d);
                best = z;
            }
        }
    }
    best
}

/// `min_v (‖e − v‖² − ‖e‖²)` over the Voronoi-relevant vectors `v`, where
/// `e` is the residual to the decoded point. Positive means the decoded
/// point is the unique nearest one; near zero means `y` sits on a facet.
pub(super) fn facet_slack(kind: LatticeKind, basis: &Basis, e: &[f64]) -> f64 {
    match kind {
        LatticeKind::Integer => {
            let m = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            1.0 - 2.0 * m
        }
        LatticeKind::D4 => 2.0 - 2.0 * top_two_abs(e),
        LatticeKind::E8 => {
            let integer_roots = 2.0 - 2.0 * top_two_abs(e);
            // Half roots ½s with an even number of minus signs.
            let sum_abs: f64 = e.iter().map(|v| v.abs()).sum();
            let negatives = e.iter().filter(|v| **v < 0.0).count();
            let min_abs = e.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            let best_dot = if negatives % 2 == 0 {
                sum_abs
            } else {
                sum_abs - 2.0 * min_abs
            };
            integer_roots.min(2.0 - best_dot)
        }
        LatticeKind::A2 => {
            let n = basis.dim;
            basis
                .relevant
                .iter()
                .map(|rz| {
                    let v = basis.apply(rz);
                    let dot: f64 = (0..n).map(|i| e[i] * v[i]).sum();
                    1.0 - 2.0 * dot
                })
                .fold(f64::INFINITY, f64::min)
        }
        LatticeKind::Generic => f64::INFINITY,
    }
}

/// Walks the set of lattice points equidistant (within tolerance) from `y`
/// through the relevant vectors and returns the lexicographically smallest.
/// The equidistant points are the vertices of a Delaunay cell, whose edges
/// are relevant vectors, so the walk reaches all of them.
pub(super) fn resolve_ties(basis: &Basis, y: &[f64], start: Vec<i64>) -> Vec<i64> {
    let d0 = basis.dist2(y, &start);
    let tol = basis.tol_sq();
    let mut seen = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(z) = queue.pop_front() {
        for v in &basis.relevant {
            let cand: Vec<i64> = z.iter().zip(v).map(|(a, b)| a + b).collect();
            if seen.contains(&cand) {
                continue;
            }
            let d = basis.dist2(y, &cand);
            if (d - d0).abs() <= tol {
                seen.push(cand.clone());
                queue.push_back(cand);
            }
        }
    }
    seen.into_iter()
        .min()
        .expect("start point is always present")
}

fn top_two_abs(e: &[f64]) -> f64 {
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for v in e {
        let x = v.abs();
        if x > a {
            b = a;
            a = x;
        } else if x > b {
            b = x;
        }
    }
    a + b
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dn_flips_worst_coordinate() {
        assert_eq!(round_dn(&[0.6, 0.1, 0.0, 0.0]), vec![0.0; 4]);
        assert_eq!(round_dn(&[0.9, 0.2, 0.1, 0.0]), vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            round_dn(&[-0.9, 0.0, 0.0, -0.3]),
            vec![-1.0, 0.0, 0.0, -1.0]
        );
        assert_eq!(round_dn(&[0.4, 0.4, 0.4, 0.4]), vec![0.0; 4]);
    }

    #[test]
    fn top_two() {
        assert_eq!(top_two_abs(&[0.1, -0.7, 0.3, 0.2]), 1.0);
    }
}
