//! JSON file formats for lattices, parameters and spectral functions.
//!
//! Rational entries are written as `"p/q"` strings and floats as JSON numbers
//! in shortest round-trip form, so every file re-parses to the same values.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::green::{SpectralFunction, SpectralTerm};
use crate::lattice::{make_lattice, LatticeBasis};
use crate::scalar::Scalar;
use crate::spectrum::{EigenIndex, ManifoldParams};

/// A lattice basis as stored on disk. Without `is_dual` the rows span the
/// period lattice and are dualized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFile {
    pub dim: usize,
    pub rows: Vec<Vec<Scalar>>,
    #[serde(default)]
    pub is_dual: bool,
}

impl LatticeFile {
    /// The dual lattice described by the file.
    pub fn into_dual_lattice(self) -> Result<LatticeBasis> {
        if self.rows.len() != self.dim {
            return Err(Error::InvalidBasis(format!(
                "dim is {} but {} rows were given",
                self.dim,
                self.rows.len()
            )));
        }
        let basis = make_lattice(self.rows)?;
        if self.is_dual {
            Ok(basis)
        } else {
            basis.dual()
        }
    }
}

/// `"zn"` for the standard integer lattice or an inline lattice description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    Named(String),
    Inline(LatticeFile),
}

/// Manifold parameters as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub d: u32,
    pub c: Scalar,
    pub alpha: Scalar,
    #[serde(alias = "bigL")]
    pub big_l: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_lattice")]
    pub lattice: LatticeSpec,
}

fn default_lattice() -> LatticeSpec {
    LatticeSpec::Named("zn".into())
}

impl ParamsFile {
    pub fn into_params(self) -> Result<ManifoldParams> {
        let lattice = match self.lattice {
            LatticeSpec::Named(name) if name == "zn" => LatticeBasis::integer_lattice(2 * self.d as usize)?,
            LatticeSpec::Named(name) => {
                return Err(Error::param("lattice", format!("unknown lattice name {name:?}, expected \"zn\"")))
            }
            LatticeSpec::Inline(file) => file.into_dual_lattice()?,
        };
        let p = ManifoldParams::new(self.d, self.c, self.alpha.to_f64(), self.big_l, Arc::new(lattice))?;
        match self.epsilon {
            Some(e) => p.with_epsilon(e),
            None => Ok(p),
        }
    }
}

pub fn parse_lattice_file(text: &str) -> Result<LatticeFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("lattice file: {e}")))
}

pub fn parse_params_file(text: &str) -> Result<ParamsFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("parameter file: {e}")))
}

/// One term of a spectral function file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum TermRecord {
    A {
        n: i64,
        j: u64,
        slot: u64,
        re: f64,
        im: f64,
    },
    B {
        #[serde(rename = "normSq")]
        norm_sq: Scalar,
        slot: u64,
        re: f64,
        im: f64,
    },
}

impl From<&SpectralTerm> for TermRecord {
    fn from(t: &SpectralTerm) -> Self {
        let (re, im) = (t.coeff.re, t.coeff.im);
        match &t.index {
            EigenIndex::TypeA { n, j } => TermRecord::A {
                n: *n,
                j: *j,
                slot: t.slot,
                re,
                im,
            },
            EigenIndex::TypeB { norm_sq, .. } => TermRecord::B {
                norm_sq: norm_sq.clone(),
                slot: t.slot,
                re,
                im,
            },
        }
    }
}

impl From<TermRecord> for SpectralTerm {
    fn from(r: TermRecord) -> Self {
        match r {
            TermRecord::A { n, j, slot, re, im } => SpectralTerm {
                index: EigenIndex::TypeA { n, j },
                slot,
                coeff: Complex64::new(re, im),
            },
            TermRecord::B { norm_sq, slot, re, im } => SpectralTerm {
                index: EigenIndex::TypeB { norm_sq, count: 0 },
                slot,
                coeff: Complex64::new(re, im),
            },
        }
    }
}

pub fn function_to_json(f: &SpectralFunction) -> Value {
    let terms: Vec<TermRecord> = f.terms().iter().map(TermRecord::from).collect();
    serde_json::json!({ "terms": terms })
}

/// Parses and validates a spectral function file. Errors name the offending term.
pub fn parse_function(p: &ManifoldParams, text: &str) -> Result<SpectralFunction> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("function file: {e}")))?;
    let terms = doc
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("function file needs a \"terms\" array".into()))?;
    let terms = terms
        .iter()
        .enumerate()
        .map(|(ordinal, v)| {
            TermRecord::deserialize(v)
                .map(SpectralTerm::from)
                .map_err(|e| Error::InvalidTerm {
                    ordinal,
                    reason: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralFunction::new(p, terms)
}
