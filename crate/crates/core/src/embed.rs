//! QIM and minimum-distortion QIM embedding, and the closest-coset decoder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coset::NestedCode;
use crate::lattice::{Lattice, LatticePoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Move the host onto the nearest point of the message coset.
    Qim,
    /// Move the host only as far as the packing sphere around that point.
    Mdqim,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qim" => Ok(Method::Qim),
            "mdqim" | "md-qim" => Ok(Method::Mdqim),
            _ => Err(Error::Config(format!("unknown method '{s}' (qim|mdqim)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Qim => "qim",
            Method::Mdqim => "mdqim",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbedKind {
    #[serde(rename = "qim")]
    Qim,
    /// Host already inside the fine packing sphere of the target; untouched.
    #[serde(rename = "type_i")]
    MdqimTypeI,
    /// Host pulled in to distance `r_pack − ε` from the target.
    #[serde(rename = "type_ii")]
    MdqimTypeII,
}

/// Back-off ε from the fine packing sphere boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Absolute(f64),
    /// Multiple of the fine lattice's minimum distance.
    DminMultiple(f64),
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::DminMultiple(1e-6)
    }
}

impl Epsilon {
    pub fn resolve(&self, fine: &Lattice) -> f64 {
        match *self {
            Epsilon::Absolute(v) => v,
            Epsilon::DminMultiple(k) => k * fine.min_distance(),
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// `auto`, `<x>dmin`, or an absolute value.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("bad epsilon '{s}' (auto | <x> | <x>dmin)"));
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Epsilon::default());
        }
        let parsed = match s.strip_suffix("dmin") {
            Some(k) => Epsilon::DminMultiple(k.parse().map_err(|_| bad())?),
            None => Epsilon::Absolute(s.parse().map_err(|_| bad())?),
        };
        match parsed {
            Epsilon::Absolute(v) | Epsilon::DminMultiple(v) if v.is_finite() && v >= 0.0 => {
                Ok(parsed)
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Absolute(v) => write!(f, "{v}"),
            Epsilon::DminMultiple(k) => write!(f, "{k}dmin"),
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedOutcome {
    pub host: Vec<f64>,
    pub embedded: Vec<f64>,
    /// Nearest point of the message coset to the host.
    pub target: LatticePoint,
    /// `target − host`.
    pub difference: Vec<f64>,
    pub kind: EmbedKind,
    pub epsilon: f64,
    /// `‖host − embedded‖`.
    pub distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub index: usize,
    pub fine_point: LatticePoint,
    pub distance: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_block(code: &NestedCode, s: &[f64], index: usize) -> Result<()> {
    if s.len() != code.dim() {
        return Err(Error::DimensionMismatch {
            expected: code.dim(),
            got: s.len(),
        });
    }
    if index >= code.payload() {
        return Err(Error::IndexOutOfRange {
            index,
            payload: code.payload(),
        });
    }
    Ok(())
}

/// `Q_{Λi}(s) = Q_{Λc}(s − dᵢ) + dᵢ` as a fine lattice point.
fn coset_target(code: &NestedCode, s: &[f64], index: usize) -> Result<LatticePoint> {
    check_block(code, s, index)?;
    let rep = code.representative_point(index)?;
    let shifted: Vec<f64> = s.iter().zip(&rep.coords).map(|(a, b)| a - b).collect();
    let c = code.coarse().nearest_point(&shifted)?;
    let z: Vec<i64> = code
        .coarse_to_fine(&c.integer_coords)
        .iter()
        .zip(&rep.integer_coords)
        .map(|(a, b)| a + b)
        .collect();
    Ok(code.fine().point(&z))
}

pub fn qim_embed(code: &NestedCode, s: &[f64], index: usize) -> Result<EmbedOutcome> {
    let target = coset_target(code, s, index)?;
    let difference: Vec<f64> = target.coords.iter().zip(s).map(|(x, h)| x - h).collect();
    Ok(EmbedOutcome {
        host: s.to_vec(),
        embedded: target.coords.clone(),
        distortion: norm(&difference),
        target,
        difference,
        kind: EmbedKind::Qim,
        epsilon: 0.0,
    })
}

/// Minimum-distortion embedding. The host stays put when it is already
/// strictly inside the fine packing sphere of the coset target; otherwise it
/// moves along `p = x − s` to distance `r_pack − ε` from the target. Either
/// way the result still quantizes to the target on the fine lattice.
pub fn mdqim_embed(
    code: &NestedCode,
    s: &[f64],
    index: usize,
    epsilon: f64,
) -> Result<EmbedOutcome> {
    let r = code.fine().packing_radius();
    if !(epsilon > 0.0 && epsilon < r) {
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            packing_radius: r,
        });
    }
    let target = coset_target(code, s, index)?;
    let difference: Vec<f64> = target.coords.iter().zip(s).map(|(x, h)| x - h).collect();
    let len = norm(&difference);
    let (embedded, kind) = if len < r {
        (s.to_vec(), EmbedKind::MdqimTypeI)
    } else {
        let step = (r - epsilon) / len;
        let moved = target
            .coords
            .iter()
            .zip(&difference)
            .map(|(x, p)| x - p * step)
            .collect();
        (moved, EmbedKind::MdqimTypeII)
    };
    let distortion = norm(
        &s.iter()
            .zip(&embedded)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    Ok(EmbedOutcome {
        host: s.to_vec(),
        embedded,
        target,
        difference,
        kind,
        epsilon,
        distortion,
    })
}

pub fn embed(
    code: &NestedCode,
    s: &[f64],
    index: usize,
    method: Method,
    epsilon: f64,
) -> Result<EmbedOutcome> {
    match method {
        Method::Qim => qim_embed(code, s, index),
        Method::Mdqim => mdqim_embed(code, s, index, epsilon),
    }
}

/// Closest-coset decoding via one fine-lattice quantization: the nearest
/// coset is the one containing `Q_{Λf}(y)`.
pub fn decode(code: &NestedCode, y: &[f64]) -> Result<DecodeOutcome> {
    let fine_point = code.fine().nearest_point(y)?;
    let distance = norm(
        &y.iter()
            .zip(&fine_point.coords)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    Ok(DecodeOutcome {
        index: code.index_of_fine(&fine_point.integer_coords),
        fine_point,
        distance,
    })
}

/// `argminᵢ dist(y, Λc + dᵢ)` evaluated coset by coset. Quadratic in the
/// payload; kept as a reference for [`decode`].
pub fn decode_by_coset_search(code: &NestedCode, y: &[f64]) -> Result<usize> {
    let mut best = (f64::INFINITY, 0usize);
    let tol = code.fine().tolerance() * code.fine().min_distance();
    for i in 0..code.payload() {
        let x = coset_target(code, y, i)?;
        let d: f64 = x.coords.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 - tol {
            best = (d, i);
        }
    }
    Ok(best.1)
}

pub fn embed_stream(
    code: &NestedCode,
    hosts: &[Vec<f64>],
    symbols: &[usize],
    method: Method,
    epsilon: f64,
) -> Result<Vec<EmbedOutcome>> {
    if hosts.len() != symbols.len() {
        return Err(Error::LengthMismatch {
            left: hosts.len(),
            right: symbols.len(),
        });
    }
    hosts
        .iter()
        .zip(symbols)
        .enumerate()
        .map(|(k, (s, &i))| embed(code, s, i, method, epsilon).map_err(|e| e.in_block(k)))
        .collect()
}

pub fn extract_stream(code: &NestedCode, observed: &[Vec<f64>]) -> Result<Vec<usize>> {
    observed
        .iter()
        .enumerate()
        .map(|(k, y)| decode(code, y).map(|d| d.index).map_err(|e| e.in_block(k)))
        .collect()
}
