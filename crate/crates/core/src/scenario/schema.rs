//! On-disk JSON layout. Complex numbers are `[re, im]`, the point at infinity
//! is the string `"inf"`, matrices are row-major nested arrays.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeo::{EdgePairing, ExtPoint, MobiusMap};
use crate::linalg::CMatrix;

pub type ComplexPair = [f64; 2];
pub type MatrixRows = Vec<Vec<ComplexPair>>;

pub const INFINITY_TOKEN: &str = "inf";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRepr {
    Token(String),
    Finite(ComplexPair),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingRepr {
    pub partner: usize,
    pub generator: usize,
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsRepr {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_switch: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_edge: usize,
    #[serde(default = "default_max_order")]
    pub max_irregular_order: usize,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_samples() -> usize {
    crate::hypgeo::polygon::DEFAULT_SAMPLES_PER_EDGE
}
fn default_max_order() -> usize {
    crate::connform::DEFAULT_MAX_IRREGULAR_ORDER
}

impl Default for SettingsRepr {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            atol: default_atol(),
            delta: None,
            r_switch: None,
            samples_per_edge: default_samples(),
            max_irregular_order: default_max_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub rank: usize,
    pub genus: usize,
    pub generators: Vec<[ComplexPair; 4]>,
    pub vertices: Vec<PointRepr>,
    pub pairing: Vec<PairingRepr>,
    pub poles: Vec<ComplexPair>,
    pub residues: Vec<MatrixRows>,
    pub irregular: Vec<MatrixRows>,
    pub gluing: Vec<MatrixRows>,
    #[serde(default)]
    pub settings: SettingsRepr,
}

/// Deformation path: waypoint times with pole positions, plus optional
/// snapshot times for the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub times: Vec<f64>,
    pub poles: Vec<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
}

pub fn complex(z: ComplexPair) -> Complex64 {
    Complex64::new(z[0], z[1])
}

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn point(p: &PointRepr) -> Result<ExtPoint> {
    match p {
        PointRepr::Token(s) if s == INFINITY_TOKEN => Ok(ExtPoint::Infinity),
        PointRepr::Token(s) => Err(Error::Parse(format!("unknown point token {s:?}"))),
        PointRepr::Finite(z) => Ok(ExtPoint::Finite(complex(*z))),
    }
}

pub fn point_repr(p: ExtPoint) -> PointRepr {
    match p {
        ExtPoint::Infinity => PointRepr::Token(INFINITY_TOKEN.into()),
        ExtPoint::Finite(z) => PointRepr::Finite(pair(z)),
    }
}

/// Square matrix from nested rows; `None` when the rows are ragged or not `p × p`.
pub fn matrix(rows: &MatrixRows, p: usize) -> Option<CMatrix> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return None;
    }
    Some(CMatrix::from_fn(p, p, |i, j| complex(rows[i][j])))
}

pub fn matrix_repr(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

pub fn mobius(q: &[ComplexPair; 4]) -> Result<MobiusMap> {
    MobiusMap::new(complex(q[0]), complex(q[1]), complex(q[2]), complex(q[3]))
}

pub fn mobius_repr(m: &MobiusMap) -> [ComplexPair; 4] {
    m.coefficients().map(pair)
}

pub fn pairing(p: &PairingRepr) -> EdgePairing {
    EdgePairing {
        partner: p.partner,
        generator: p.generator,
        inverse: p.inverse,
    }
}

pub fn pairing_repr(p: &EdgePairing) -> PairingRepr {
    PairingRepr {
        partner: p.partner,
        generator: p.generator,
        inverse: p.inverse,
    }
}
