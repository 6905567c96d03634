//! JSON problem files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "vi_r2",
//!   "space": { "kind": "euclidean", "dim": 2 },
//!   "set": { "kind": "whole_space" },
//!   "bifunction": { "kind": "vi", "matrix": [[1, 0], [0, 1]], "offset": [0, 0] },
//!   "mapping": { "kind": "identity" },
//!   "reference": { "kind": "affine", "origin": [0, 0], "directions": [] },
//!   "initial_point": [2, 0],
//!   "scheme": {
//!     "scheme": "hybrid_ishikawa",
//!     "alpha": { "kind": "constant", "value": 0.5 },
//!     "beta": { "kind": "constant", "value": 0.5 },
//!     "r": { "kind": "constant", "value": 1 }
//!   }
//! }
//! ```
//!
//! `stop`, `tolerances`, `best_effort`, `seed` and `output_dir` are optional.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{Bifunction, ConvexFunction};
use crate::error::{Error, Result};
use crate::geometry::{DualVector, Space, SpaceKind, Vector};
use crate::mappings::Mapping;
use crate::sets::{ConvexSet, HalfSpace};
use crate::solver::{Problem, SchemeConfig, StopRule, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    WholeSpace,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    HalfSpace(HalfSpaceSpec),
    Affine { origin: Vec<f64>, directions: Vec<Vec<f64>> },
    Intersection { base: Box<SetSpec>, cuts: Vec<HalfSpaceSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BifunctionSpec {
    Zero,
    /// `<M x + q, y - x>`; `matrix` is row-major.
    Vi { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// `g(y) - g(x)` with `g(v) = 1/2 v^T H v + b^T v + c`.
    Quadratic {
        hessian: Vec<Vec<f64>>,
        linear: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    /// `g(y) - g(x)` with `g(v) = weight * huber_smoothing(||v - center||)`.
    Huber { center: Vec<f64>, weight: f64, smoothing: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MappingSpec {
    Identity,
    Projection { onto: SetSpec },
    Averaged { theta: f64, inner: Box<MappingSpec> },
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub version: u32,
    pub name: String,
    pub space: SpaceSpec,
    pub set: SetSpec,
    pub bifunction: BifunctionSpec,
    pub mapping: MappingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<SetSpec>,
    pub initial_point: Vec<f64>,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Run bifunctions that cannot be certified monotone instead of
    /// rejecting them.
    #[serde(default)]
    pub best_effort: bool,
    /// Seed for sampled diagnostics.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A spec turned into solver inputs.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub problem: Problem,
    pub config: SchemeConfig,
    pub stop: StopRule,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
}

fn vector(values: &[f64]) -> Vector {
    Vector::from_row_slice(values)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("{what}: rows of unequal length")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space> {
        Space::new(self.kind, self.dim)
    }
}

impl HalfSpaceSpec {
    fn build(&self) -> Result<HalfSpace> {
        HalfSpace::new(DualVector::from_vec(self.normal.clone()), self.offset)
    }
}

impl SetSpec {
    pub fn build(&self) -> Result<ConvexSet> {
        match self {
            SetSpec::WholeSpace => Ok(ConvexSet::WholeSpace),
            SetSpec::Box { lower, upper } => ConvexSet::boxed(vector(lower), vector(upper)),
            SetSpec::Ball { center, radius } => ConvexSet::ball(vector(center), *radius),
            SetSpec::HalfSpace(h) => Ok(ConvexSet::HalfSpace(h.build()?)),
            SetSpec::Affine { origin, directions } => {
                let dirs: Vec<Vector> = directions.iter().map(|d| vector(d)).collect();
                ConvexSet::affine(vector(origin), &dirs)
            }
            SetSpec::Intersection { base, cuts } => {
                ConvexSet::with_cuts(base.build()?, cuts.iter().map(HalfSpaceSpec::build).collect::<Result<_>>()?)
            }
        }
    }
}

impl BifunctionSpec {
    pub fn build(&self) -> Result<Bifunction> {
        match self {
            BifunctionSpec::Zero => Ok(Bifunction::Zero),
            BifunctionSpec::Vi { matrix: m, offset } => Bifunction::vi(matrix(m, "vi matrix")?, vector(offset)),
            BifunctionSpec::Quadratic { hessian, linear, constant } => {
                let h = matrix(hessian, "quadratic hessian")?;
                if h.nrows() != linear.len() || h.ncols() != linear.len() {
                    return Err(Error::DimensionMismatch {
                        expected: linear.len(),
                        found: h.nrows(),
                    });
                }
                Ok(Bifunction::ConvexDifference(ConvexFunction::Quadratic {
                    hessian: h,
                    linear: vector(linear),
                    constant: *constant,
                }))
            }
            BifunctionSpec::Huber { center, weight, smoothing } => Ok(Bifunction::ConvexDifference(ConvexFunction::Huber {
                center: vector(center),
                weight: *weight,
                smoothing: *smoothing,
            })),
        }
    }
}

impl MappingSpec {
    pub fn build(&self) -> Result<Mapping> {
        match self {
            MappingSpec::Identity => Ok(Mapping::Identity),
            MappingSpec::Projection { onto } => Ok(Mapping::projection(onto.build()?)),
            MappingSpec::Averaged { theta, inner } => Mapping::averaged(*theta, inner.build()?),
            MappingSpec::Affine { matrix: m, offset } => Mapping::affine(matrix(m, "affine matrix")?, vector(offset)),
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>, offset: &Vector) -> Self {
        MappingSpec::Affine {
            matrix: matrix_rows(m),
            offset: offset.iter().copied().collect(),
        }
    }
}

impl ProblemSpec {
    /// Builds and validates: shapes, membership of the initial point,
    /// certification of the bifunction (unless `best_effort`) and the
    /// hypotheses of the selected scheme.
    pub fn build(&self) -> Result<BuiltProblem> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Parse(format!("name {:?} is not usable as a file stem", self.name)));
        }
        let space = self.space.build()?;
        let bifunction = self.bifunction.build()?;
        let mut warnings = Vec::new();
        if let Err(e) = bifunction.certify() {
            if !self.best_effort {
                return Err(e);
            }
            warnings.push(format!("bifunction not certified, running anyway: {e}"));
        }
        let mut problem = Problem::new(
            space,
            self.set.build()?,
            bifunction,
            self.mapping.build()?,
            vector(&self.initial_point),
        )?;
        if let Some(r) = &self.reference {
            problem = problem.with_reference(r.build()?)?;
        }
        warnings.extend(self.scheme.validate(&space, self.stop.max_iter)?);
        Ok(BuiltProblem {
            problem,
            config: self.scheme.clone(),
            stop: self.stop,
            tolerances: self.tolerances,
            warnings,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Whether two specs describe the same problem (everything except the
    /// scheme, stop rule, tolerances and bookkeeping fields).
    pub fn same_problem(&self, other: &ProblemSpec) -> bool {
        self.space == other.space
            && self.set == other.set
            && self.bifunction == other.bifunction
            && self.mapping == other.mapping
            && self.reference == other.reference
            && self.initial_point == other.initial_point
    }
}

/// Reads, parses and validates a problem file.
pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let spec = ProblemSpec::from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    spec.build()?;
    Ok(spec)
}
