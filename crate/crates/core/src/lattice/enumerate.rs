//! Depth-first enumeration of integer coordinates inside a box, pruned by
//! partial distances in the QR frame (‖y − Gz‖² = ‖Qᵀy − Rz‖²).

use super::Basis;

struct Search<'a> {
    basis: &'a Basis,
    w: Vec<f64>,
    lo: &'a [i64],
    hi: &'a [i64],
    tol: f64,
    skip_zero: bool,
    z: Vec<i64>,
    best: f64,
    best_z: Vec<i64>,
}

impl Search<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        let n = self.basis.dim;
        let r = &self.basis.r;
        let rkk = r[level * n + level];
        let mut t = self.w[level];
        for j in level + 1..n {
            t -= r[level * n + j] * self.z[j] as f64;
        }
        let budget = self.best + self.tol - partial;
        if budget < 0.0 {
            return;
        }
        let s = budget.sqrt();
        let (a, b) = ((t - s) / rkk, (t + s) / rkk);
        let (lo_f, hi_f) = if a <= b { (a, b) } else { (b, a) };
        let lo = self.lo[level].max((lo_f - 1e-9).ceil() as i64);
        let hi = self.hi[level].min((hi_f + 1e-9).floor() as i64);
        for zk in lo..=hi {
            self.z[level] = zk;
            let diff = t - rkk * zk as f64;
            let p = partial + diff * diff;
            if p > self.best + self.tol {
                continue;
            }
            if level == 0 {
                self.leaf(p);
            } else {
                self.descend(level - 1, p);
            }
        }
    }

    fn leaf(&mut self, d: f64) {
        if self.skip_zero && self.z.iter().all(|&v| v == 0) {
            return;
        }
        if d < self.best - self.tol || (d <= self.best + self.tol && self.z < self.best_z) {
            self.best = self.best.min(d);
            self.best_z.clone_from(&self.z);
        }
    }
}

fn qt_times(basis: &Basis, y: &[f64]) -> Vec<f64> {
    let n = basis.dim;
    (0..n)
        .map(|i| {
            basis.qt[i * n..(i + 1) * n]
                .iter()
                .zip(y)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Closest point to `y` among integer vectors in `[lo, hi]`, starting from
/// `start` (which must lie in the box). Ties go to the lexicographically
/// smallest coordinates.
pub(super) fn closest_in_box(
    basis: &Basis,
    y: &[f64],
    lo: &[i64],
    hi: &[i64],
    start: Vec<i64>,
) -> Vec<i64> {
    let n = basis.dim;
    let best = basis.dist2(y, &start);
    let mut search = Search {
        basis,
        w: qt_times(basis, y),
        lo,
        hi,
        tol: basis.tol_sq(),
        skip_zero: false,
        z: vec![0; n],
        best,
        best_z: start,
    };
    search.descend(n - 1, 0.0);
    search.best_z
}

/// Exact nearest point for an arbitrary basis. The box is derived from the
/// rounding solution: any closer point z satisfies
/// `|zⱼ − (G⁻¹y)ⱼ| ≤ ‖row ⱼ of G⁻¹‖ · ‖y − Gz*‖`.
pub(super) fn closest_generic(basis: &Basis, y: &[f64]) -> Vec<i64> {
    let c = basis.solve(y);
    let start: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
    let radius = (basis.dist2(y, &start) + basis.tol_sq()).sqrt();
    let (lo, hi) = bounds(basis, &c, radius);
    closest_in_box(basis, y, &lo, &hi, start)
}

/// Squared length of a shortest nonzero lattice vector (unscaled).
pub(super) fn shortest_vector(basis: &Basis) -> f64 {
    let n = basis.dim;
    let (j_min, best) = (0..n)
        .map(|j| (j, (0..n).map(|i| basis.gen[i * n + j].powi(2)).sum::<f64>()))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let mut start = vec![0; n];
    start[j_min] = 1;
    let origin = vec![0.0; n];
    let (lo, hi) = bounds(basis, &origin, best.sqrt());
    let mut search = Search {
        basis,
        w: vec![0.0; n],
        lo: &lo,
        hi: &hi,
        tol: 0.0,
        skip_zero: true,
        z: vec![0; n],
        best,
        best_z: start,
    };
    search.descend(n - 1, 0.0);
    search.best
}

fn bounds(basis: &Basis, center: &[f64], radius: f64) -> (Vec<i64>, Vec<i64>) {
    center
        .iter()
        .zip(&basis.inv_row_norms)
        .map(|(c, norm)| {
            let b = norm * radius;
            ((c - b - 1e-9).ceil() as i64, (c + b + 1e-9).floor() as i64)
        })
        .unzip()
}
