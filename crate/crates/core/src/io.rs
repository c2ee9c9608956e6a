//! JSON file formats.
//!
//! Matrices are written as rows of `[re, im]` pairs in the `2i + j` basis
//! ordering. Floating-point numbers are rounded to 12 significant digits on
//! output.

use std::path::Path;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SteerError};
use crate::lhs::{Expectations, MonteCarloReport};
use crate::pauli::{BlochVector, Outcome, QubitOperator, TwoQubitOperator};
use crate::state::{make_state, Assemblage, MeasurementSet, TwoQubitState};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every non-integer number in `value` in place.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_significant(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_rounded_value<T: Serialize>(data: &T) -> Result<Value> {
    let mut v = serde_json::to_value(data)?;
    round_value(&mut v);
    Ok(v)
}

/// Pretty JSON with rounded numbers and a trailing newline.
pub fn to_json_string<T: Serialize>(data: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_rounded_value(data)?)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateFile {
    Family { alpha: f64 },
    Matrix { matrix: Vec<Vec<ComplexPair>> },
}

impl StateFile {
    pub fn to_state(&self) -> Result<TwoQubitState> {
        match self {
            StateFile::Family { alpha } => make_state(*alpha),
            StateFile::Matrix { matrix } => {
                check_square(matrix, 4)?;
                let m = Matrix4::from_fn(|r, c| Complex64::new(matrix[r][c][0], matrix[r][c][1]));
                TwoQubitState::custom(TwoQubitOperator::from_matrix(m)?)
            }
        }
    }
}

fn check_square(matrix: &[Vec<ComplexPair>], n: usize) -> Result<()> {
    if matrix.len() != n {
        return Err(SteerError::Dimension { expected: n, found: matrix.len() });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != n) {
        return Err(SteerError::Dimension { expected: n, found: row.len() });
    }
    if matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(SteerError::domain("matrix entries must be finite"));
    }
    Ok(())
}

pub fn load_state(path: &Path) -> Result<TwoQubitState> {
    read_json::<StateFile>(path)?.to_state()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub directions: Vec<[f64; 3]>,
}

impl MeasurementFile {
    pub fn from_set(set: &MeasurementSet) -> Self {
        MeasurementFile { directions: set.directions().iter().map(|d| d.0).collect() }
    }

    pub fn to_set(&self) -> Result<MeasurementSet> {
        MeasurementSet::new(self.directions.iter().map(|&d| BlochVector(d)).collect())
    }
}

pub fn load_measurements(path: &Path) -> Result<MeasurementSet> {
    read_json::<MeasurementFile>(path)?.to_set()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblageEntry {
    /// 1-based measurement label.
    pub i: usize,
    pub a: i8,
    pub matrix: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblageFile {
    pub members: Vec<AssemblageEntry>,
}

impl AssemblageFile {
    pub fn from_assemblage(asm: &Assemblage) -> Self {
        let mut members = Vec::new();
        for (i, pair) in asm.members.iter().enumerate() {
            for a in Outcome::BOTH {
                let m = pair[a.index()].matrix();
                members.push(AssemblageEntry {
                    i: i + 1,
                    a: a.sign() as i8,
                    matrix: (0..2).map(|r| (0..2).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect(),
                });
            }
        }
        AssemblageFile { members }
    }

    /// Rebuilds the assemblage; every `(i, a)` with `i = 1…m` must occur exactly once.
    pub fn to_assemblage(&self) -> Result<Assemblage> {
        let m = self.members.iter().map(|e| e.i).max().unwrap_or(0);
        if m == 0 || self.members.iter().any(|e| e.i == 0) {
            return Err(SteerError::Invalid("measurement labels start at 1".into()));
        }
        let mut slots: Vec<[Option<QubitOperator>; 2]> = vec![[None, None]; m];
        for e in &self.members {
            let a = match e.a {
                1 => Outcome::Plus,
                -1 => Outcome::Minus,
                other => return Err(SteerError::Invalid(format!("outcome must be ±1, got {other}"))),
            };
            check_square(&e.matrix, 2)?;
            let mat = Matrix2::from_fn(|r, c| Complex64::new(e.matrix[r][c][0], e.matrix[r][c][1]));
            let slot = &mut slots[e.i - 1][a.index()];
            if slot.is_some() {
                return Err(SteerError::Invalid(format!("duplicate entry for i={}, a={}", e.i, e.a)));
            }
            *slot = Some(QubitOperator::from_matrix(&mat)?);
        }
        let members = slots
            .into_iter()
            .enumerate()
            .map(|(i, [p, q])| match (p, q) {
                (Some(p), Some(q)) => Ok([p, q]),
                _ => Err(SteerError::Invalid(format!("missing outcome for i={}", i + 1))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assemblage { members })
    }
}

pub fn load_assemblage(path: &Path) -> Result<Assemblage> {
    read_json::<AssemblageFile>(path)?.to_assemblage()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub x: [f64; 3],
    pub y: [f64; 3],
}

/// Explicit measurement pairs for the simulation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsFile {
    pub pairs: Vec<PairEntry>,
}

impl PairsFile {
    pub fn to_pairs(&self) -> Result<Vec<(BlochVector, BlochVector)>> {
        self.pairs
            .iter()
            .map(|p| {
                let (x, y) = (BlochVector(p.x), BlochVector(p.y));
                x.ensure_unit()?;
                y.ensure_unit()?;
                Ok((x, y))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhsPairRecord {
    pub i: usize,
    pub j: usize,
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub ea: f64,
    pub eb: f64,
    pub eab: f64,
    pub se: Expectations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhsReportFile {
    pub pairs: Vec<LhsPairRecord>,
    pub n: u64,
    pub seed: u64,
}

impl From<&MonteCarloReport> for LhsReportFile {
    fn from(r: &MonteCarloReport) -> Self {
        LhsReportFile {
            pairs: r
                .pairs
                .iter()
                .map(|p| LhsPairRecord {
                    i: p.i + 1,
                    j: p.j + 1,
                    x: p.x.0,
                    y: p.y.0,
                    ea: p.mean.ea,
                    eb: p.mean.eb,
                    eab: p.mean.eab,
                    se: p.se,
                })
                .collect(),
            n: r.n,
            seed: r.seed,
        }
    }
}
