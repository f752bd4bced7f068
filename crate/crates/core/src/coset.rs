//! Nested lattice codes `Λc ⊂ Λf` with `G_c = G_f · J`.
//!
//! The fine lattice splits into `|det J|` cosets `Λc + dᵢ`; coset `i` carries
//! message symbol `i`. Representatives are stored reduced into the coarse
//! Voronoi cell, and lookups from a fine lattice point to its coset index are
//! done exactly in integer coordinates: `z ↦ z − J·⌊J⁻¹z⌋` is a canonical
//! residue modulo `J·Zᴺ`.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lattice::{read_matrix, Lattice, LatticePoint};
use crate::{Error, Result};

/// Default upper bound on `|det J|` for general subsampling matrices.
pub const DEFAULT_PAYLOAD_CAP: u64 = 4096;

/// Self-similar codes store every representative, so `α^N` is bounded too.
const SELF_SIMILAR_CAP: u64 = 1 << 20;

const BOX_SCAN_CAP: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct NestedCode {
    fine: Lattice,
    coarse: Lattice,
    subsampling: Vec<Vec<i64>>,
    alpha: Option<u32>,
    /// Fine integer coordinates each coset was enumerated from.
    labels: Vec<Vec<i64>>,
    /// Fine integer coordinates of the reduced representatives.
    rep_coords: Vec<Vec<i64>>,
    representatives: Vec<Vec<f64>>,
    j_inv: Vec<f64>,
    residues: HashMap<Vec<i64>, usize>,
    rate: f64,
}

impl NestedCode {
    /// `Λc = αΛf`, `J = αI`. Cosets are labelled by `z ∈ {0..α−1}ᴺ` in
    /// mixed-radix order with the last coordinate varying fastest.
    pub fn build_self_similar(fine: &Lattice, alpha: u32) -> Result<Self> {
        if alpha < 2 {
            return Err(Error::InvalidAlpha(alpha));
        }
        let n = fine.dim();
        let payload = (alpha as u64)
            .checked_pow(n as u32)
            .filter(|&m| m <= SELF_SIMILAR_CAP)
            .ok_or(Error::PayloadOverCap {
                payload: (alpha as u64).saturating_pow(n as u32),
                cap: SELF_SIMILAR_CAP,
            })?;
        let coarse = fine.scaled(alpha as f64)?;
        let mut subsampling = vec![vec![0; n]; n];
        for (i, row) in subsampling.iter_mut().enumerate() {
            row[i] = alpha as i64;
        }
        let labels = (0..payload)
            .map(|mut k| {
                let mut z = vec![0i64; n];
                for slot in z.iter_mut().rev() {
                    *slot = (k % alpha as u64) as i64;
                    k /= alpha as u64;
                }
                z
            })
            .collect::<Vec<_>>();
        let mut j_inv = vec![0.0; n * n];
        for i in 0..n {
            j_inv[i * n + i] = 1.0 / alpha as f64;
        }
        let mut code = NestedCode {
            fine: fine.clone(),
            coarse,
            subsampling,
            alpha: Some(alpha),
            labels,
            rep_coords: Vec::new(),
            representatives: Vec::new(),
            j_inv,
            residues: HashMap::new(),
            rate: (alpha as f64).log2(),
        };
        code.reduce_representatives()?;
        Ok(code)
    }

    pub fn build_general(fine: &Lattice, subsampling: &[Vec<i64>]) -> Result<Self> {
        Self::build_general_with_cap(fine, subsampling, DEFAULT_PAYLOAD_CAP)
    }

    /// Arbitrary integer subsampling matrix. Representatives are the
    /// canonical residues in `J·[0,1)ᴺ`, reduced into the coarse Voronoi cell
    /// and ordered by reduced coordinates (the zero coset first).
    pub fn build_general_with_cap(
        fine: &Lattice,
        subsampling: &[Vec<i64>],
        cap: u64,
    ) -> Result<Self> {
        let n = fine.dim();
        if subsampling.len() != n || subsampling.iter().any(|r| r.len() != n) {
            return Err(Error::BadSubsampling(format!("expected a {n}x{n} matrix")));
        }
        let flat: Vec<f64> = subsampling.iter().flatten().map(|&v| v as f64).collect();
        let jm = DMatrix::from_row_slice(n, n, &flat);
        let det = jm.determinant().round();
        if det == 0.0 {
            return Err(Error::BadSubsampling("singular".into()));
        }
        let payload = det.abs() as u64;
        if payload < 2 {
            return Err(Error::PayloadTooSmall(payload));
        }
        if payload > cap {
            return Err(Error::PayloadOverCap { payload, cap });
        }
        let inv = jm
            .try_inverse()
            .ok_or_else(|| Error::BadSubsampling("not invertible".into()))?;
        let mut j_inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                j_inv[i * n + j] = inv[(i, j)];
            }
        }

        let gf = fine.generator();
        let coarse_rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| gf[i][k] * subsampling[k][j] as f64).sum())
                    .collect()
            })
            .collect();
        let coarse = Lattice::generic(&coarse_rows)?;

        let mut code = NestedCode {
            fine: fine.clone(),
            coarse,
            subsampling: subsampling.to_vec(),
            alpha: None,
            labels: Vec::new(),
            rep_coords: Vec::new(),
            representatives: Vec::new(),
            j_inv,
            residues: HashMap::new(),
            rate: (payload as f64).log2() / n as f64,
        };

        // Scan the bounding box of the parallelepiped J·[0,1)ᴺ for residues.
        let lo: Vec<i64> = subsampling
            .iter()
            .map(|r| r.iter().map(|v| v.min(&0)).sum())
            .collect();
        let hi: Vec<i64> = subsampling
            .iter()
            .map(|r| r.iter().map(|v| v.max(&0)).sum())
            .collect();
        let volume = lo
            .iter()
            .zip(&hi)
            .try_fold(1u64, |acc, (l, h)| acc.checked_mul((h - l + 1) as u64))
            .filter(|&v| v <= BOX_SCAN_CAP)
            .ok_or_else(|| Error::BadSubsampling("residue scan box too large".into()))?;
        let mut z = lo.clone();
        for _ in 0..volume {
            if code.residue(&z) == z {
                code.labels.push(z.clone());
            }
            for k in (0..n).rev() {
                z[k] += 1;
                if z[k] <= hi[k] {
                    break;
                }
                z[k] = lo[k];
            }
        }
        if code.labels.len() as u64 != payload {
            return Err(Error::BadSubsampling(format!(
                "found {} residues, expected {payload}",
                code.labels.len()
            )));
        }
        code.reduce_representatives()?;

        let mut order: Vec<usize> = (0..code.labels.len()).collect();
        order.sort_by(|&a, &b| {
            let za = code.rep_coords[a].iter().all(|&v| v == 0);
            let zb = code.rep_coords[b].iter().all(|&v| v == 0);
            zb.cmp(&za).then_with(|| {
                code.representatives[a]
                    .iter()
                    .zip(&code.representatives[b])
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        code.labels = order.iter().map(|&i| code.labels[i].clone()).collect();
        code.rep_coords = order.iter().map(|&i| code.rep_coords[i].clone()).collect();
        code.representatives = order
            .iter()
            .map(|&i| code.representatives[i].clone())
            .collect();
        code.residues = code
            .labels
            .iter()
            .enumerate()
            .map(|(i, z)| (z.clone(), i))
            .collect();
        Ok(code)
    }

    fn reduce_representatives(&mut self) -> Result<()> {
        let mut reps = Vec::with_capacity(self.labels.len());
        let mut rep_coords = Vec::with_capacity(self.labels.len());
        for label in &self.labels {
            let d = self.fine.point(label);
            let c = self.coarse.nearest_point(&d.coords)?;
            let shift = self.coarse_to_fine(&c.integer_coords);
            let z: Vec<i64> = label.iter().zip(&shift).map(|(a, b)| a - b).collect();
            reps.push(self.fine.point(&z).coords);
            rep_coords.push(z);
        }
        self.representatives = reps;
        self.rep_coords = rep_coords;
        Ok(())
    }

    /// Canonical residue of fine integer coordinates modulo `J·Zᴺ`.
    fn residue(&self, z: &[i64]) -> Vec<i64> {
        let n = z.len();
        let q: Vec<i64> = (0..n)
            .map(|i| {
                let w: f64 = (0..n).map(|j| self.j_inv[i * n + j] * z[j] as f64).sum();
                (w + 1e-9).floor() as i64
            })
            .collect();
        let jq = self.coarse_to_fine(&q);
        z.iter().zip(&jq).map(|(a, b)| a - b).collect()
    }

    /// Fine integer coordinates `J·z` of a coarse lattice point with coarse
    /// integer coordinates `z`.
    pub fn coarse_to_fine(&self, z: &[i64]) -> Vec<i64> {
        self.subsampling
            .iter()
            .map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Coset index of a fine lattice point given by integer coordinates.
    pub fn index_of_fine(&self, z: &[i64]) -> usize {
        match self.alpha {
            Some(alpha) => {
                let a = alpha as i64;
                z.iter().fold(0usize, |acc, v| {
                    acc * alpha as usize + v.rem_euclid(a) as usize
                })
            }
            None => self.residues[&self.residue(z)],
        }
    }

    /// The unique `i` with `point ∈ Λc + dᵢ`.
    pub fn rep_to_index(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let z = self.fine.locate(point).ok_or(Error::NotOnLattice)?;
        Ok(self.index_of_fine(&z))
    }

    pub fn fine(&self) -> &Lattice {
        &self.fine
    }

    pub fn coarse(&self) -> &Lattice {
        &self.coarse
    }

    pub fn dim(&self) -> usize {
        self.fine.dim()
    }

    /// M = |det J|.
    pub fn payload(&self) -> usize {
        self.labels.len()
    }

    /// Bits per dimension, `log₂(M) / N`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn alpha(&self) -> Option<u32> {
        self.alpha
    }

    pub fn subsampling(&self) -> &[Vec<i64>] {
        &self.subsampling
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn representatives(&self) -> &[Vec<f64>] {
        &self.representatives
    }

    pub fn representative(&self, index: usize) -> Result<&[f64]> {
        self.representatives
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index,
                payload: self.payload(),
            })
    }

    /// Representative `dᵢ` as a fine lattice point.
    pub fn representative_point(&self, index: usize) -> Result<LatticePoint> {
        let z = self.rep_coords.get(index).ok_or(Error::IndexOutOfRange {
            index,
            payload: self.payload(),
        })?;
        Ok(self.fine.point(z))
    }

    /// Bits carried per block when the payload is a power of two.
    pub fn bits_per_block(&self) -> Option<u32> {
        let m = self.payload();
        m.is_power_of_two().then(|| m.trailing_zeros())
    }
}

/// How the coarse lattice is derived from the fine one.
#[derive(Debug, Clone, PartialEq)]
pub enum Nesting {
    Alpha(u32),
    Matrix(PathBuf),
}

/// Code specification string: `<lattice>:<alpha>` or `<lattice>:J=<file>`,
/// optionally followed by `:unit` to rescale the fine lattice to unit cell
/// volume. Examples: `A2:2`, `E8:2:unit`, `Z2:J=diag23.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub lattice: String,
    pub nesting: Nesting,
    pub unit_volume: bool,
}

impl CodeSpec {
    pub fn with_unit_volume(mut self, unit: bool) -> Self {
        self.unit_volume |= unit;
        self
    }

    pub fn with_alpha(&self, alpha: u32) -> Self {
        CodeSpec {
            nesting: Nesting::Alpha(alpha),
            ..self.clone()
        }
    }

    pub fn fine_lattice(&self) -> Result<Lattice> {
        let lattice = Lattice::from_name(&self.lattice)?;
        Ok(if self.unit_volume {
            lattice.unit_volume()
        } else {
            lattice
        })
    }

    pub fn build(&self) -> Result<NestedCode> {
        let fine = self.fine_lattice()?;
        match &self.nesting {
            Nesting::Alpha(alpha) => NestedCode::build_self_similar(&fine, *alpha),
            Nesting::Matrix(path) => {
                let rows = read_matrix(path)?;
                let ints = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&v| {
                                if v.fract() == 0.0 {
                                    Ok(v as i64)
                                } else {
                                    Err(Error::BadSubsampling(format!("non-integer entry {v}")))
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                NestedCode::build_general(&fine, &ints)
            }
        }
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "bad code spec '{s}' (expected <lattice>:<alpha> or <lattice>:J=<file>)"
            ))
        };
        let (body, unit_volume) = match s.trim().strip_suffix(":unit") {
            Some(rest) => (rest, true),
            None => (s.trim(), false),
        };
        let (lattice, nest) = body.rsplit_once(':').ok_or_else(bad)?;
        if lattice.is_empty() {
            return Err(bad());
        }
        let nesting = match nest.strip_prefix("J=") {
            Some(path) if !path.is_empty() => Nesting::Matrix(PathBuf::from(path)),
            Some(_) => return Err(bad()),
            None => Nesting::Alpha(nest.parse().map_err(|_| bad())?),
        };
        Ok(CodeSpec {
            lattice: lattice.to_string(),
            nesting,
            unit_volume,
        })
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.nesting {
            Nesting::Alpha(a) => write!(f, "{}:{}", self.lattice, a)?,
            Nesting::Matrix(p) => write!(f, "{}:J={}", self.lattice, p.display())?,
        }
        if self.unit_volume {
            f.write_str(":unit")?;
        }
        Ok(())
    }
}

impl Serialize for CodeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_four_cosets_follow_listing_order() {
        let a2 = Lattice::a2();
        let code = NestedCode::build_self_similar(&a2, 2).unwrap();
        assert_eq!(code.payload(), 4);
        assert_eq!(code.rate(), 1.0);
        let listing = [[0, 0], [0, 1], [1, 0], [1, 1]];
        for (i, z) in listing.iter().enumerate() {
            assert_eq!(code.labels()[i], z.to_vec());
            let p = a2.point(z);
            assert_eq!(code.rep_to_index(&p.coords).unwrap(), i);
        }
        assert_eq!(code.representatives()[0], vec![0.0, 0.0]);
    }

    #[test]
    fn reduced_representatives_lie_in_coarse_cell() {
        let code = NestedCode::build_self_similar(&Lattice::a2(), 2).unwrap();
        for d in code.representatives() {
            let q = code.coarse().nearest_point(d).unwrap();
            assert!(q.integer_coords.iter().all(|&v| v == 0), "{d:?}");
        }
    }

    #[test]
    fn scalar_codes() {
        let z = Lattice::integer(1).unwrap();
        let c2 = NestedCode::build_self_similar(&z, 2).unwrap();
        assert_eq!(c2.representatives(), &[vec![0.0], vec![1.0]]);
        assert_eq!(c2.rate(), 1.0);
        assert_eq!(c2.rep_to_index(&[7.0]).unwrap(), 1);
        let c4 = NestedCode::build_self_similar(&z, 4).unwrap();
        assert_eq!(c4.payload(), 4);
        assert_eq!(c4.rate(), 2.0);
        assert!(matches!(
            NestedCode::build_self_similar(&z, 1),
            Err(Error::InvalidAlpha(1))
        ));
    }

    #[test]
    fn a2_index_of_composite_point() {
        let a2 = Lattice::a2();
        let code = NestedCode::build_self_similar(&a2, 2).unwrap();
        // G[1,0] + 2·G[0,1]
        let p = a2.point(&[1, 2]);
        assert_eq!(code.rep_to_index(&p.coords).unwrap(), 2);
    }

    #[test]
    fn general_matches_self_similar_for_2i() {
        let z2 = Lattice::integer(2).unwrap();
        let general = NestedCode::build_general(&z2, &[vec![2, 0], vec![0, 2]]).unwrap();
        let similar = NestedCode::build_self_similar(&z2, 2).unwrap();
        assert_eq!(general.representatives(), similar.representatives());
        assert_eq!(
            general.representatives(),
            &[
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0]
            ]
        );
    }

    #[test]
    fn general_diag_2_3() {
        let z2 = Lattice::integer(2).unwrap();
        let code = NestedCode::build_general(&z2, &[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(code.payload(), 6);
        assert!((code.rate() - 0.5 * 6f64.log2()).abs() < 1e-15);
        // Brute force: (a − b) must not lie in 2Z × 3Z for distinct reps.
        let reps = code.representatives();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let dx = (reps[i][0] - reps[j][0]) as i64;
                let dy = (reps[i][1] - reps[j][1]) as i64;
                assert!(dx.rem_euclid(2) != 0 || dy.rem_euclid(3) != 0);
            }
        }
        for (i, d) in reps.iter().enumerate() {
            assert_eq!(code.rep_to_index(d).unwrap(), i);
        }
    }

    #[test]
    fn degenerate_and_oversized_payloads() {
        let z2 = Lattice::integer(2).unwrap();
        assert!(matches!(
            NestedCode::build_general(&z2, &[vec![1, 0], vec![0, 1]]),
            Err(Error::PayloadTooSmall(1))
        ));
        assert!(matches!(
            NestedCode::build_general(&z2, &[vec![1, 2], vec![2, 4]]),
            Err(Error::BadSubsampling(_))
        ));
        assert!(matches!(
            NestedCode::build_general_with_cap(&z2, &[vec![8, 0], vec![0, 8]], 32),
            Err(Error::PayloadOverCap {
                payload: 64,
                cap: 32
            })
        ));
    }

    #[test]
    fn general_skewed_matrix_on_a2() {
        let a2 = Lattice::a2();
        let code = NestedCode::build_general(&a2, &[vec![2, 1], vec![-1, 2]]).unwrap();
        assert_eq!(code.payload(), 5);
        assert_eq!(code.representatives()[0], vec![0.0, 0.0]);
        // Partition: each fine point in a box belongs to exactly one coset.
        for a in -4..=4 {
            for b in -4..=4 {
                let p = a2.point(&[a, b]);
                let i = code.rep_to_index(&p.coords).unwrap();
                let d = code.representative(i).unwrap();
                let diff: Vec<f64> = p.coords.iter().zip(d).map(|(x, y)| x - y).collect();
                assert!(code.coarse().locate(&diff).is_some());
            }
        }
    }

    #[test]
    fn rep_to_index_rejects_off_lattice_points() {
        let code = NestedCode::build_self_similar(&Lattice::a2(), 2).unwrap();
        assert!(matches!(
            code.rep_to_index(&[0.3, 0.2]),
            Err(Error::NotOnLattice)
        ));
    }

    #[test]
    fn spec_strings() {
        let s: CodeSpec = "A2:2".parse().unwrap();
        assert_eq!(s.lattice, "A2");
        assert_eq!(s.nesting, Nesting::Alpha(2));
        assert!(!s.unit_volume);
        let u: CodeSpec = "E8:4:unit".parse().unwrap();
        assert!(u.unit_volume);
        assert_eq!(u.to_string(), "E8:4:unit");
        let j: CodeSpec = "Z2:J=j.txt".parse().unwrap();
        assert_eq!(j.nesting, Nesting::Matrix("j.txt".into()));
        assert!("A2".parse::<CodeSpec>().is_err());
        assert!("A2:x".parse::<CodeSpec>().is_err());
        let e8 = "E8:2".parse::<CodeSpec>().unwrap().build().unwrap();
        assert_eq!(e8.payload(), 256);
        assert_eq!(e8.rate(), 1.0);
    }
}
