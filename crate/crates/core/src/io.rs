//! JSON input files. Ball indices are 1-based on disk.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Schedule, StateVector};
use crate::foldings::{FoldingError, HalfSpace, OrbitPolicy};
use crate::geometry::{BallConfiguration, GeometryError, DEFAULT_CONTACT_TOLERANCE};
use crate::lattice::LatticeConfiguration;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Folding(#[from] FoldingError),
    #[error("half-space indices are 1-based; found 0 in the periodic word")]
    ZeroIndex,
    #[error("velocities: expected {expected} vectors of length {d}, found {found}")]
    Velocities { expected: usize, d: usize, found: usize },
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

/// ```json
/// { "dimension": 2, "centers": [[0, 0], [2, 0]], "velocities": [[1, 0], [-1, 0]] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationFile {
    pub dimension: usize,
    pub centers: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_tolerance: Option<f64>,
    /// Initial pseudo-velocities, one per ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Vec<f64>>>,
}

impl ConfigurationFile {
    pub fn configuration(&self) -> Result<BallConfiguration, GeometryError> {
        let c = BallConfiguration::new(self.centers.clone(), self.dimension)?;
        match self.contact_tolerance {
            Some(t) if t != DEFAULT_CONTACT_TOLERANCE => c.with_tolerance(t),
            _ => Ok(c),
        }
    }

    pub fn state(&self) -> Result<Option<StateVector>, IoError> {
        let Some(v) = &self.velocities else {
            return Ok(None);
        };
        let n = self.centers.len();
        if v.len() != n || v.iter().any(|x| x.len() != self.dimension) {
            return Err(IoError::Velocities { expected: n, d: self.dimension, found: v.len() });
        }
        Ok(Some(StateVector::from_vec(n, self.dimension, v.concat())))
    }

    pub fn from_parts(config: &BallConfiguration, state: Option<&StateVector>) -> Self {
        Self {
            dimension: config.dimension(),
            centers: config.centers().to_vec(),
            contact_tolerance: Some(config.contact_tolerance()),
            velocities: state.map(|s| s.to_balls()),
        }
    }
}

/// ```json
/// { "kind": "explicit", "edges": [[1, 2], [2, 3]] }
/// ```
/// or a rule: `round-robin`, `lexicographic-greedy`, `seeded-random` (with
/// `"seed"`), each carrying its `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    #[serde(flatten)]
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

/// ```json
/// { "normals": [[0, 1], [-0.1, -1]], "start": [0, -1], "witness": [-1, 0.05],
///   "policy": { "kind": "periodic", "word": [1, 2, 2] } }
/// ```
/// Indices in a periodic word are 1-based, like ball indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceFamilyFile {
    pub normals: Vec<Vec<f64>>,
    pub start: Vec<f64>,
    pub witness: Vec<f64>,
    #[serde(default = "default_policy")]
    pub policy: OrbitPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

fn default_policy() -> OrbitPolicy {
    OrbitPolicy::RoundRobin
}

impl HalfSpaceFamilyFile {
    pub fn halfspaces(&self) -> Result<Vec<HalfSpace>, FoldingError> {
        self.normals.iter().map(|h| HalfSpace::new(h.clone())).collect()
    }

    /// The policy with 0-based indices.
    pub fn policy(&self) -> Result<OrbitPolicy, IoError> {
        match &self.policy {
            OrbitPolicy::Periodic { word } => {
                if word.contains(&0) {
                    return Err(IoError::ZeroIndex);
                }
                Ok(OrbitPolicy::Periodic { word: word.iter().map(|i| i - 1).collect() })
            }
            p => Ok(p.clone()),
        }
    }
}

/// ```json
/// { "points": [[0, 0], [2, 0], [1, 1]] }
/// ```
/// Each pair `[a, b]` is the point `(a, b√3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub points: LatticeConfiguration,
}
