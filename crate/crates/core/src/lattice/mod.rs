//! Point lattices `Λ = {Gz : z ∈ Zᴺ}` and their nearest-point quantizers.
//!
//! Named lattices (`Zᴺ`, `A2`, `D4`, `E8`) use classic closed-form decoders;
//! anything else goes through a bounded enumeration that is also the test
//! oracle for the fast paths. All decoders break exact ties the same way:
//! among equidistant lattice points the lexicographically smallest integer
//! coordinate vector wins. Lexicographic order is translation invariant, so
//! the quantizer stays covariant under lattice translations even on cell
//! boundaries.

mod decode;
mod enumerate;

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Largest dimension supported by generic lattices and the exhaustive decoder.
pub const MAX_ENUM_DIM: usize = 8;

/// Relative tolerance τ / d_min used for equality comparisons.
pub const REL_TOLERANCE: f64 = 1e-9;

const GENERIC_MOMENT_TRIALS: usize = 200_000;
const GENERIC_MOMENT_SEED: u64 = 0x6d6f_6d65_6e74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LatticeKind {
    /// The integer lattice Zᴺ.
    Integer,
    A2,
    D4,
    E8,
    Generic,
}

/// A point of a lattice together with its coordinates in the basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticePoint {
    pub coords: Vec<f64>,
    pub integer_coords: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub cell_volume: f64,
    pub packing_radius: f64,
    pub min_distance: f64,
    /// Normalized second moment G(Λ); dimensionless and scale invariant.
    pub second_moment: f64,
}

/// Unscaled generator plus everything derived from it once.
#[derive(Debug)]
struct Basis {
    dim: usize,
    /// Row-major N×N; columns are the basis vectors.
    gen: Vec<f64>,
    inv: Vec<f64>,
    /// Qᵀ and R of G = QR, row-major.
    qt: Vec<f64>,
    r: Vec<f64>,
    inv_row_norms: Vec<f64>,
    abs_det: f64,
    min_distance: f64,
    /// Voronoi-relevant vectors in integer coordinates (named kinds only).
    relevant: Vec<Vec<i64>>,
    second_moment: OnceLock<f64>,
}

impl Basis {
    fn new(dim: usize, gen: Vec<f64>) -> Result<Self> {
        if gen.len() != dim * dim || dim == 0 {
            return Err(Error::BadGenerator(format!(
                "expected {dim}x{dim} entries, got {}",
                gen.len()
            )));
        }
        if gen.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadGenerator("non-finite entry".into()));
        }
        let m = DMatrix::from_row_slice(dim, dim, &gen);
        let det = m.determinant();
        let col_scale = (0..dim)
            .map(|j| m.column(j).norm())
            .fold(1.0f64, |acc, n| acc * n.max(f64::MIN_POSITIVE));
        if det.abs() <= 1e-12 * col_scale {
            return Err(Error::BadGenerator(format!("determinant {det}")));
        }
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::BadGenerator("not invertible".into()))?;
        let qr = m.qr();
        let q = qr.q();
        let r = qr.r();
        let mut qt = vec![0.0; dim * dim];
        let mut r_flat = vec![0.0; dim * dim];
        let mut inv_flat = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                qt[i * dim + j] = q[(j, i)];
                r_flat[i * dim + j] = r[(i, j)];
                inv_flat[i * dim + j] = inv[(i, j)];
            }
        }
        let inv_row_norms = (0..dim).map(|i| inv.row(i).norm()).collect::<Vec<_>>();
        Ok(Basis {
            dim,
            gen,
            inv: inv_flat,
            qt,
            r: r_flat,
            inv_row_norms,
            abs_det: det.abs(),
            min_distance: 0.0,
            relevant: Vec::new(),
            second_moment: OnceLock::new(),
        })
    }

    fn apply(&self, z: &[i64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.gen[i * n..(i + 1) * n]
                    .iter()
                    .zip(z)
                    .map(|(g, &k)| g * k as f64)
                    .sum()
            })
            .collect()
    }

    fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.gen[i * n..(i + 1) * n]
                    .iter()
                    .zip(u)
                    .map(|(g, v)| g * v)
                    .sum()
            })
            .collect()
    }

    fn solve(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.inv[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, v)| a * v)
                    .sum()
            })
            .collect()
    }

    fn round_solve(&self, x: &[f64]) -> Vec<i64> {
        self.solve(x).iter().map(|v| v.round() as i64).collect()
    }

    fn dist2(&self, y: &[f64], z: &[i64]) -> f64 {
        let p = self.apply(z);
        y.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Tolerance on squared distances, in unscaled units.
    fn tol_sq(&self) -> f64 {
        REL_TOLERANCE * self.min_distance * self.min_distance
    }

    fn with_relevant_coords(mut self, vectors: &[Vec<f64>], min_distance: f64) -> Self {
        self.min_distance = min_distance;
        self.relevant = vectors.iter().map(|v| self.round_solve(v)).collect();
        self
    }
}

fn canonical(kind: LatticeKind) -> Arc<Basis> {
    static A2: OnceLock<Arc<Basis>> = OnceLock::new();
    static D4: OnceLock<Arc<Basis>> = OnceLock::new();
    static E8: OnceLock<Arc<Basis>> = OnceLock::new();
    match kind {
        LatticeKind::A2 => A2.get_or_init(|| Arc::new(build_a2())).clone(),
        LatticeKind::D4 => D4.get_or_init(|| Arc::new(build_d4())).clone(),
        LatticeKind::E8 => E8.get_or_init(|| Arc::new(build_e8())).clone(),
        _ => unreachable!("no static basis for {kind:?}"),
    }
}

fn build_a2() -> Basis {
    let h = 3f64.sqrt() / 2.0;
    let basis = Basis::new(2, vec![0.0, h, 1.0, 0.5]).expect("A2 basis");
    let g1 = vec![0.0, 1.0];
    let g2 = vec![h, 0.5];
    let g3 = vec![h, -0.5];
    let roots: Vec<Vec<f64>> = [g1, g2, g3]
        .into_iter()
        .flat_map(|v| {
            let neg = v.iter().map(|x| -x).collect::<Vec<_>>();
            [v, neg]
        })
        .collect();
    basis.with_relevant_coords(&roots, 1.0)
}

fn build_d4() -> Basis {
    #[rustfmt::skip]
    let gen = vec![
        -1.0,  1.0,  0.0,  0.0,
        -1.0, -1.0,  1.0,  0.0,
         0.0,  0.0, -1.0,  1.0,
         0.0,  0.0,  0.0, -1.0,
    ];
    let basis = Basis::new(4, gen).expect("D4 basis");
    basis.with_relevant_coords(&dn_roots(4), 2f64.sqrt())
}

fn build_e8() -> Basis {
    let mut gen = vec![0.0; 64];
    gen[0] = 2.0;
    for j in 1..7 {
        gen[(j - 1) * 8 + j] = -1.0;
        gen[j * 8 + j] = 1.0;
    }
    for i in 0..8 {
        gen[i * 8 + 7] = 0.5;
    }
    let basis = Basis::new(8, gen).expect("E8 basis");
    let mut roots = dn_roots(8);
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            roots.push(
                (0..8)
                    .map(|i| if mask >> i & 1 == 1 { -0.5 } else { 0.5 })
                    .collect(),
            );
        }
    }
    basis.with_relevant_coords(&roots, 2f64.sqrt())
}

/// The roots ±eᵢ±eⱼ of Dₙ.
fn dn_roots(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = vec![0.0; n];
                v[i] = si;
                v[j] = sj;
                out.push(v);
            }
        }
    }
    out
}

fn integer_basis(n: usize) -> Basis {
    let mut gen = vec![0.0; n * n];
    for i in 0..n {
        gen[i * n + i] = 1.0;
    }
    let mut basis = Basis::new(n, gen).expect("identity basis");
    basis.min_distance = 1.0;
    for i in 0..n {
        for s in [1, -1] {
            let mut v = vec![0; n];
            v[i] = s;
            basis.relevant.push(v);
        }
    }
    basis
}

#[derive(Debug, Clone)]
pub struct Lattice {
    kind: LatticeKind,
    basis: Arc<Basis>,
    scale: f64,
}

impl Lattice {
    /// Zᴺ with the identity basis.
    pub fn integer(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::BadGenerator(format!("unsupported dimension {n}")));
        }
        Ok(Lattice {
            kind: LatticeKind::Integer,
            basis: Arc::new(integer_basis(n)),
            scale: 1.0,
        })
    }

    /// A2 with basis columns (0, 1) and (√3/2, 1/2); d_min = 1.
    pub fn a2() -> Self {
        Self::named(LatticeKind::A2)
    }

    /// D4 = {x ∈ Z⁴ : Σx even}; d_min = √2, cell volume 2.
    pub fn d4() -> Self {
        Self::named(LatticeKind::D4)
    }

    /// E8 = D8 ∪ (D8 + ½·1); d_min = √2, cell volume 1.
    pub fn e8() -> Self {
        Self::named(LatticeKind::E8)
    }

    fn named(kind: LatticeKind) -> Self {
        Lattice {
            kind,
            basis: canonical(kind),
            scale: 1.0,
        }
    }

    /// A lattice from an explicit generator given as rows (basis vectors are
    /// the columns). Decoded by bounded enumeration, so N ≤ 8.
    pub fn generic(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n > MAX_ENUM_DIM {
            return Err(Error::DimensionTooLarge(n));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadGenerator("generator must be square".into()));
        }
        let mut basis = Basis::new(n, rows.concat())?;
        basis.min_distance = enumerate::shortest_vector(&basis).sqrt();
        Ok(Lattice {
            kind: LatticeKind::Generic,
            basis: Arc::new(basis),
            scale: 1.0,
        })
    }

    /// Parses "Z", "Z<n>", "A2", "D4", "E8" or "generic:<matrix-file>".
    pub fn from_name(name: &str) -> Result<Self> {
        let trimmed = name.trim();
        if let Some(path) = trimmed.strip_prefix("generic:") {
            let rows = read_matrix(Path::new(path))?;
            return Self::generic(&rows);
        }
        match trimmed.to_ascii_uppercase().as_str() {
            "Z" => Self::integer(1),
            "A2" => Ok(Self::a2()),
            "D4" => Ok(Self::d4()),
            "E8" => Ok(Self::e8()),
            other => match other.strip_prefix('Z').map(str::parse::<usize>) {
                Some(Ok(n)) => Self::integer(n),
                _ => Err(Error::Config(format!("unknown lattice '{name}'"))),
            },
        }
    }

    /// The lattice βΛ.
    pub fn scaled(&self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidScale(beta));
        }
        let mut out = self.clone();
        out.scale *= beta;
        Ok(out)
    }

    /// Rescaled so that the Voronoi cell has volume 1.
    pub fn unit_volume(&self) -> Self {
        let n = self.dim() as f64;
        let mut out = self.clone();
        out.scale = self.basis.abs_det.powf(-1.0 / n);
        out
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> String {
        match self.kind {
            LatticeKind::Integer if self.dim() == 1 => "Z".into(),
            LatticeKind::Integer => format!("Z{}", self.dim()),
            LatticeKind::A2 => "A2".into(),
            LatticeKind::D4 => "D4".into(),
            LatticeKind::E8 => "E8".into(),
            LatticeKind::Generic => format!("generic{}", self.dim()),
        }
    }

    /// Generator rows of the scaled lattice.
    pub fn generator(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        self.basis
            .gen
            .chunks(n)
            .map(|row| row.iter().map(|v| v * self.scale).collect())
            .collect()
    }

    pub fn min_distance(&self) -> f64 {
        self.basis.min_distance * self.scale
    }

    pub fn packing_radius(&self) -> f64 {
        self.min_distance() / 2.0
    }

    pub fn cell_volume(&self) -> f64 {
        self.basis.abs_det * self.scale.powi(self.dim() as i32)
    }

    /// τ = 10⁻⁹ · d_min.
    pub fn tolerance(&self) -> f64 {
        REL_TOLERANCE * self.min_distance()
    }

    /// A `radius_hint` for [`Lattice::nearest_point_exhaustive`] that always
    /// contains the true nearest point: `|zⱼ − (G⁻¹x)ⱼ| ≤ ‖row ⱼ of G⁻¹‖·ρ`
    /// with ρ the covering radius (known for named kinds, bounded by half
    /// the sum of basis vector lengths otherwise), plus ½ for rounding.
    pub fn sufficient_radius_hint(&self) -> i64 {
        let n = self.dim();
        let covering = match self.kind {
            LatticeKind::Integer => (n as f64).sqrt() / 2.0,
            LatticeKind::A2 => 1.0 / 3f64.sqrt(),
            LatticeKind::D4 | LatticeKind::E8 => 1.0,
            LatticeKind::Generic => {
                0.5 * (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|i| self.basis.gen[i * n + j].powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .sum::<f64>()
            }
        };
        let worst = self.basis.inv_row_norms.iter().copied().fold(0.0, f64::max);
        (worst * covering + 0.5 - 1e-9).ceil().max(1.0) as i64
    }

    /// Normalized second moment. Closed form for named kinds; generic
    /// lattices get a fixed-seed Monte Carlo estimate computed on first use.
    pub fn second_moment(&self) -> f64 {
        match self.kind {
            LatticeKind::Integer => 1.0 / 12.0,
            LatticeKind::A2 => 5.0 / (36.0 * 3f64.sqrt()),
            LatticeKind::D4 => 13.0 / (120.0 * 2f64.sqrt()),
            LatticeKind::E8 => 929.0 / 12960.0,
            LatticeKind::Generic => *self.basis.second_moment.get_or_init(|| {
                self.estimate_second_moment_mc(GENERIC_MOMENT_TRIALS, GENERIC_MOMENT_SEED)
                    .expect("trial count above minimum")
            }),
        }
    }

    pub fn geometry(&self) -> LatticeGeometry {
        LatticeGeometry {
            cell_volume: self.cell_volume(),
            packing_radius: self.packing_radius(),
            min_distance: self.min_distance(),
            second_moment: self.second_moment(),
        }
    }

    /// The lattice point with integer coordinates `z`.
    pub fn point(&self, z: &[i64]) -> LatticePoint {
        let coords = self
            .basis
            .apply(z)
            .into_iter()
            .map(|v| v * self.scale)
            .collect();
        LatticePoint {
            coords,
            integer_coords: z.to_vec(),
        }
    }

    /// Maps `u` (typically in [0,1)ᴺ) through the scaled generator, i.e. a
    /// point of the fundamental parallelepiped.
    pub fn parallelepiped_point(&self, u: &[f64]) -> Vec<f64> {
        self.basis
            .apply_real(u)
            .into_iter()
            .map(|v| v * self.scale)
            .collect()
    }

    /// Integer coordinates of `coords` if it lies on the lattice, to within
    /// `10⁻⁶ · (d_min + ‖coords‖)`; the looser bound absorbs round-off in
    /// points assembled from several lattice operations.
    pub fn locate(&self, coords: &[f64]) -> Option<Vec<i64>> {
        if coords.len() != self.dim() || coords.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let y: Vec<f64> = coords.iter().map(|v| v / self.scale).collect();
        let z = self.basis.round_solve(&y);
        let d = self.basis.dist2(&y, &z).sqrt() * self.scale;
        let magnitude = coords.iter().map(|v| v * v).sum::<f64>().sqrt();
        (d <= 1e-6 * (self.min_distance() + magnitude)).then_some(z)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Q_Λ(x): the closest lattice point, ties broken towards the
    /// lexicographically smallest integer coordinates.
    pub fn nearest_point(&self, x: &[f64]) -> Result<LatticePoint> {
        self.check_input(x)?;
        let y: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        let z = self.decode_unscaled(&y);
        Ok(self.point(&z))
    }

    fn decode_unscaled(&self, y: &[f64]) -> Vec<i64> {
        let basis = &self.basis;
        let (z, residual) = match self.kind {
            LatticeKind::Integer => {
                let p: Vec<f64> = y.iter().map(|v| v.round()).collect();
                let e = y.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>();
                (p.iter().map(|v| *v as i64).collect(), e)
            }
            LatticeKind::D4 => {
                let p = decode::round_dn(y);
                let e = y.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>();
                (basis.round_solve(&p), e)
            }
            LatticeKind::E8 => {
                let p = decode::e8(y);
                let e = y.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>();
                (basis.round_solve(&p), e)
            }
            LatticeKind::A2 => {
                let z = decode::a2(basis, y);
                let p = basis.apply(&z);
                let e = y.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>();
                (z, e)
            }
            LatticeKind::Generic => return enumerate::closest_generic(basis, y),
        };
        let slack = decode::facet_slack(self.kind, basis, &residual);
        debug_assert!(
            slack >= -1e-6,
            "fast decoder missed a closer point: slack {slack}"
        );
        if slack <= basis.tol_sq() {
            decode::resolve_ties(basis, y, z)
        } else {
            z
        }
    }

    /// Exact argmin by enumerating integer coordinates in the box
    /// `[z* − radius_hint, z* + radius_hint]ᴺ` around the rounding solution
    /// `z* = round(G⁻¹x)`.
    pub fn nearest_point_exhaustive(&self, x: &[f64], radius_hint: i64) -> Result<LatticePoint> {
        if self.dim() > MAX_ENUM_DIM {
            return Err(Error::DimensionTooLarge(self.dim()));
        }
        if radius_hint < 1 {
            return Err(Error::InvalidRadiusHint);
        }
        self.check_input(x)?;
        let y: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        let center = self.basis.round_solve(&y);
        let lo = center.iter().map(|c| c - radius_hint).collect::<Vec<_>>();
        let hi = center.iter().map(|c| c + radius_hint).collect::<Vec<_>>();
        let z = enumerate::closest_in_box(&self.basis, &y, &lo, &hi, center);
        Ok(self.point(&z))
    }

    /// Monte Carlo estimate of G(Λ): sample the fundamental parallelepiped
    /// uniformly, fold into the Voronoi cell with `u − Q(u)` and average the
    /// squared norm.
    pub fn estimate_second_moment_mc(&self, trials: usize, seed: u64) -> Result<f64> {
        const MIN_TRIALS: usize = 10_000;
        if trials < MIN_TRIALS {
            return Err(Error::TooFewTrials {
                min: MIN_TRIALS,
                got: trials,
            });
        }
        let n = self.dim();
        let mut rng = rng::stream(seed, Stream::SecondMoment);
        let mut u = vec![0.0; n];
        let mut acc = 0.0;
        for _ in 0..trials {
            u.iter_mut().for_each(|v| *v = rng.random::<f64>());
            let y = self.basis.apply_real(&u);
            let z = self.decode_unscaled(&y);
            acc += self.basis.dist2(&y, &z);
        }
        // Computed on the unscaled basis; G(Λ) does not depend on scale.
        let mean = acc / trials as f64;
        Ok(mean / (n as f64 * self.basis.abs_det.powf(2.0 / n as f64)))
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if (self.scale - 1.0).abs() < 1e-15 {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}·{}", self.scale, self.name())
        }
    }
}

/// Reads a whitespace-separated matrix, one row per line; `#` starts a comment.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    message: format!("not a number: '{t}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "empty matrix".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn integer_rounding() {
        let z2 = Lattice::integer(2).unwrap();
        let p = z2.nearest_point(&[0.4, -0.6]).unwrap();
        assert_eq!(p.integer_coords, vec![0, -1]);
        assert_eq!(p.coords, vec![0.0, -1.0]);
    }

    #[test]
    fn integer_ties_go_to_smaller_coordinate() {
        let z = Lattice::integer(1).unwrap();
        assert_eq!(z.nearest_point(&[0.5]).unwrap().integer_coords, vec![0]);
        assert_eq!(z.nearest_point(&[-0.5]).unwrap().integer_coords, vec![-1]);
        assert_eq!(z.nearest_point(&[2.5]).unwrap().integer_coords, vec![2]);
        let z2 = Lattice::integer(2).unwrap();
        assert_eq!(
            z2.nearest_point(&[0.5, 0.5]).unwrap().integer_coords,
            vec![0, 0]
        );
    }

    #[test]
    fn a2_example_point() {
        let a2 = Lattice::a2();
        let p = a2.nearest_point(&[0.8, 0.1]).unwrap();
        assert_eq!(p.integer_coords, vec![0, 1]);
        assert!(close(p.coords[0], 3f64.sqrt() / 2.0, 1e-12));
        assert!(close(p.coords[1], 0.5, 1e-12));
    }

    #[test]
    fn e8_prefers_half_integer_coset() {
        let e8 = Lattice::e8();
        let p = e8.nearest_point(&[0.4; 8]).unwrap();
        for c in &p.coords {
            assert!(close(*c, 0.5, 1e-12));
        }
        let q = e8.nearest_point_exhaustive(&[0.4; 8], 2).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn d4_sum_is_even() {
        let d4 = Lattice::d4();
        let p = d4.nearest_point_exhaustive(&[0.6; 4], 2).unwrap();
        assert_eq!(p.coords, vec![1.0; 4]);
        assert_eq!(d4.nearest_point(&[0.6; 4]).unwrap(), p);
    }

    #[test]
    fn d4_tie_between_roots() {
        // (0.7, 0.3, 0, 0) is equidistant from 0 and (1, 1, 0, 0).
        let d4 = Lattice::d4();
        let fast = d4.nearest_point(&[0.7, 0.3, 0.0, 0.0]).unwrap();
        let slow = d4
            .nearest_point_exhaustive(&[0.7, 0.3, 0.0, 0.0], 3)
            .unwrap();
        assert_eq!(fast.integer_coords, slow.integer_coords);
    }

    #[test]
    fn sufficient_hints() {
        assert_eq!(Lattice::integer(1).unwrap().sufficient_radius_hint(), 1);
        assert_eq!(Lattice::a2().sufficient_radius_hint(), 2);
        assert_eq!(Lattice::d4().sufficient_radius_hint(), 2);
        assert_eq!(Lattice::e8().sufficient_radius_hint(), 7);
        assert_eq!(
            Lattice::e8().scaled(3.0).unwrap().sufficient_radius_hint(),
            7
        );
    }

    #[test]
    fn exhaustive_small_examples() {
        let z = Lattice::integer(1).unwrap();
        assert_eq!(
            z.nearest_point_exhaustive(&[0.2], 1).unwrap().coords,
            vec![0.0]
        );
        let a2 = Lattice::a2();
        let p = a2.nearest_point_exhaustive(&[0.8, 0.1], 2).unwrap();
        assert_eq!(p.integer_coords, vec![0, 1]);
    }

    #[test]
    fn exhaustive_rejects_bad_arguments() {
        let z9 = Lattice::integer(9).unwrap();
        assert!(matches!(
            z9.nearest_point_exhaustive(&[0.0; 9], 1),
            Err(Error::DimensionTooLarge(9))
        ));
        let z = Lattice::integer(1).unwrap();
        assert!(matches!(
            z.nearest_point_exhaustive(&[0.0], 0),
            Err(Error::InvalidRadiusHint)
        ));
    }

    #[test]
    fn input_validation() {
        let a2 = Lattice::a2();
        assert!(matches!(
            a2.nearest_point(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            a2.nearest_point(&[f64::NAN, 0.0]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn closed_form_geometry() {
        let a2 = Lattice::a2().geometry();
        assert!(close(a2.packing_radius, 0.5, 1e-15));
        assert!(close(a2.cell_volume, 3f64.sqrt() / 2.0, 1e-12));
        assert!(close(a2.second_moment, 0.080188, 5e-7));
        assert!(close(
            Lattice::integer(1).unwrap().second_moment(),
            0.083333,
            5e-7
        ));
        assert!(close(Lattice::d4().second_moment(), 0.076603, 5e-7));
        assert!(close(Lattice::e8().second_moment(), 0.071682, 5e-7));
        assert!(close(Lattice::d4().cell_volume(), 2.0, 1e-12));
        assert!(close(Lattice::e8().cell_volume(), 1.0, 1e-12));
        let scaled = Lattice::a2().scaled(3.0).unwrap();
        assert_eq!(scaled.second_moment(), Lattice::a2().second_moment());
        assert!(close(scaled.packing_radius(), 1.5, 1e-15));
    }

    #[test]
    fn unit_volume_normalisation() {
        for l in [
            Lattice::a2(),
            Lattice::d4(),
            Lattice::e8(),
            Lattice::integer(3).unwrap(),
        ] {
            assert!(close(l.unit_volume().cell_volume(), 1.0, 1e-12), "{l}");
        }
    }

    #[test]
    fn generic_min_distance_by_enumeration() {
        // A skewed basis of Z²: shortest vector still has length 1.
        let g = Lattice::generic(&[vec![1.0, 5.0], vec![0.0, 1.0]]).unwrap();
        assert!(close(g.min_distance(), 1.0, 1e-12));
        // The A2 basis entered as a generic lattice.
        let h = 3f64.sqrt() / 2.0;
        let a2g = Lattice::generic(&[vec![0.0, h], vec![1.0, 0.5]]).unwrap();
        assert!(close(a2g.packing_radius(), 0.5, 1e-12));
    }

    #[test]
    fn singular_generator_rejected() {
        assert!(matches!(
            Lattice::generic(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(Error::BadGenerator(_))
        ));
        assert!(Lattice::a2().scaled(0.0).is_err());
        assert!(Lattice::a2().scaled(-1.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in ["Z", "Z4", "A2", "D4", "E8"] {
            assert_eq!(Lattice::from_name(name).unwrap().name(), name);
        }
        assert!(Lattice::from_name("B3").is_err());
    }

    #[test]
    fn generic_matches_named_decoder() {
        let a2 = Lattice::a2();
        let a2g = Lattice::generic(&a2.generator()).unwrap();
        for x in [[0.31, -2.2], [4.9, 0.05], [-1.7, 3.3]] {
            assert_eq!(
                a2.nearest_point(&x).unwrap().integer_coords,
                a2g.nearest_point(&x).unwrap().integer_coords
            );
        }
    }

    #[test]
    fn second_moment_estimates() {
        let z = Lattice::integer(1).unwrap();
        let g = z.estimate_second_moment_mc(1_000_000, 7).unwrap();
        assert!(close(g, 1.0 / 12.0, 1e-3), "{g}");
        let e8 = Lattice::e8()
            .estimate_second_moment_mc(1_000_000, 7)
            .unwrap();
        assert!(close(e8, 0.071682, 1e-3), "{e8}");
        let a2 = Lattice::a2().scaled(5.0).unwrap();
        let ga2 = a2.estimate_second_moment_mc(1_000_000, 7).unwrap();
        assert!(close(ga2, 0.0802, 1e-3), "{ga2}");
        assert!(z.estimate_second_moment_mc(10, 1).is_err());
    }
}
