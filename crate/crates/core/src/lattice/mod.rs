//! Exact arithmetic for configurations on the triangular lattice.
//!
//! Lattice points are `(a, b√3)` with `a ≡ b (mod 2)`; adjacent points are at
//! distance 2, so unit discs centered there touch. Collision directions of
//! such configurations have entries in `Z[√3]` once the `2^{−3/2}` scale is
//! removed, which lets distances to spans be bounded below exactly.

mod certificate;
mod convergents;
mod determinant;
mod quadratic;

pub use certificate::*;
pub use convergents::*;
pub use determinant::*;
pub use quadratic::QuadraticInteger;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BallConfiguration, Edge, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("({a}, {b}√3) is not a lattice point: a and b must have equal parity")]
    NotOnLattice { a: i64, b: i64 },
    #[error("lattice points {i} and {j} are closer than 2")]
    Overlap { i: usize, j: usize },
    #[error("lattice configuration is empty")]
    Empty,
    #[error("balls {} and {} do not touch", .0.lo() + 1, .0.hi() + 1)]
    NotTouching(Edge),
    #[error("edge {0} is not in the edge set")]
    EdgeNotInSet(Edge),
    #[error("basis extension failed: {0}")]
    Extension(&'static str),
    #[error("certificate check failed: {0}")]
    CertificateCheck(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The point `(a, b√3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct LatticePoint {
    a: i64,
    b: i64,
}

impl LatticePoint {
    pub fn new(a: i64, b: i64) -> Result<Self, LatticeError> {
        if (a - b).rem_euclid(2) != 0 {
            return Err(LatticeError::NotOnLattice { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn is_member(a: i64, b: i64) -> bool {
        (a - b).rem_euclid(2) == 0
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// `a² + 3b²`.
    pub fn norm_squared(&self) -> i64 {
        self.a * self.a + 3 * self.b * self.b
    }

    pub fn distance_squared(&self, other: &Self) -> i64 {
        let (da, db) = (self.a - other.a, self.b - other.b);
        da * da + 3 * db * db
    }

    pub fn touches(&self, other: &Self) -> bool {
        self.distance_squared(other) == 4
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.a as f64, self.b as f64 * 3f64.sqrt()]
    }

    pub fn offset(&self, da: i64, db: i64) -> Self {
        Self::new(self.a + da, self.b + db).expect("offset preserves parity when (da, db) does")
    }

    /// The six lattice neighbours, in counter-clockwise order from `(2, 0)`.
    pub fn neighbours(&self) -> [LatticePoint; 6] {
        NEIGHBOUR_OFFSETS.map(|(da, db)| Self { a: self.a + da, b: self.b + db })
    }
}

pub const NEIGHBOUR_OFFSETS: [(i64, i64); 6] = [(2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1)];

impl TryFrom<(i64, i64)> for LatticePoint {
    type Error = LatticeError;
    fn try_from((a, b): (i64, i64)) -> Result<Self, LatticeError> {
        Self::new(a, b)
    }
}

impl From<LatticePoint> for (i64, i64) {
    fn from(p: LatticePoint) -> Self {
        (p.a, p.b)
    }
}

/// All lattice points with Euclidean norm at most `radius`.
pub fn lattice_points_in_radius(radius: f64) -> Vec<LatticePoint> {
    assert!(radius >= 0.0, "radius must be non-negative");
    let r2 = radius * radius;
    let amax = radius.floor() as i64;
    let bmax = (radius / 3f64.sqrt()).floor() as i64;
    let mut out = Vec::new();
    for b in -bmax..=bmax {
        for a in -amax..=amax {
            if LatticePoint::is_member(a, b) && ((a * a + 3 * b * b) as f64) <= r2 {
                out.push(LatticePoint { a, b });
            }
        }
    }
    out
}

/// Non-overlapping discs centered on lattice points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LatticePoint>", into = "Vec<LatticePoint>")]
pub struct LatticeConfiguration {
    points: Vec<LatticePoint>,
}

impl LatticeConfiguration {
    pub fn new(points: Vec<LatticePoint>) -> Result<Self, LatticeError> {
        if points.is_empty() {
            return Err(LatticeError::Empty);
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].distance_squared(&points[j]) < 4 {
                    return Err(LatticeError::Overlap { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self, LatticeError> {
        Self::new(pairs.iter().map(|&p| LatticePoint::try_from(p)).collect::<Result<_, _>>()?)
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Touching pairs, decided exactly.
    pub fn contact_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if self.points[i].touches(&self.points[j]) {
                    out.push(Edge::new(i, j).expect("i < j"));
                }
            }
        }
        out
    }

    pub fn to_ball_configuration(&self) -> Result<BallConfiguration, GeometryError> {
        BallConfiguration::new(self.points.iter().map(|p| p.to_f64().to_vec()).collect(), 2)
    }

    /// `z̃_e`: `x_j − x_k` in block `j`, `x_k − x_j` in block `k`, as a
    /// vector in `Z[√3]^{2n}`.
    pub fn tilde_direction(&self, edge: Edge) -> Result<Vec<QuadraticInteger>, LatticeError> {
        let (j, k) = (edge.lo(), edge.hi());
        if k >= self.points.len() {
            return Err(GeometryError::IndexOutOfRange { index: k, n: self.points.len() }.into());
        }
        let (pj, pk) = (self.points[j], self.points[k]);
        if !pj.touches(&pk) {
            return Err(LatticeError::NotTouching(edge));
        }
        let mut z = vec![QuadraticInteger::zero(); 2 * self.points.len()];
        let (da, db) = (pj.a - pk.a, pj.b - pk.b);
        z[2 * j] = QuadraticInteger::integer(da);
        z[2 * j + 1] = QuadraticInteger::new(0, db);
        z[2 * k] = QuadraticInteger::integer(-da);
        z[2 * k + 1] = QuadraticInteger::new(0, -db);
        Ok(z)
    }
}

impl TryFrom<Vec<LatticePoint>> for LatticeConfiguration {
    type Error = LatticeError;
    fn try_from(points: Vec<LatticePoint>) -> Result<Self, LatticeError> {
        Self::new(points)
    }
}

impl From<LatticeConfiguration> for Vec<LatticePoint> {
    fn from(c: LatticeConfiguration) -> Self {
        c.points
    }
}

/// `log2` of `(√3/432)·4^{−4n}·n^{−1/2}`.
pub fn lattice_alpha_lower_bound_log2(n: usize) -> f64 {
    assert!(n >= 1, "n must be positive");
    0.5 * 3f64.log2() - 432f64.log2() - 8.0 * n as f64 - 0.5 * (n as f64).log2()
}

/// `(√3/432)·4^{−4n}·n^{−1/2}`; underflows to 0 for `n` beyond about 125.
pub fn lattice_alpha_lower_bound(n: usize) -> f64 {
    lattice_alpha_lower_bound_log2(n).exp2()
}
