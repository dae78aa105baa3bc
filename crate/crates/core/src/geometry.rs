//! Ball configurations, contact graphs and collision directions.
//!
//! Balls are indexed from 0 internally. Everything that crosses a file or
//! terminal boundary uses 1-based indices, see [`Edge`]'s serde impls.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dynamics::StateVector;

pub const DEFAULT_CONTACT_TOLERANCE: f64 = 1e-9;

/// Norm of an unnormalized collision direction for two touching unit balls.
pub const RAW_DIRECTION_NORM: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Tolerance on `Σx = 0`, `Σv = 0` and unit energy.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("configuration has no balls")]
    Empty,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("center {} has {found} coordinates, expected {expected}", .index + 1)]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite coordinate in center {}", .index + 1)]
    NonFinite { index: usize },
    #[error("contact tolerance must be finite and non-negative, got {0}")]
    BadTolerance(f64),
    #[error("balls {} and {} overlap: center distance {distance} < 2", .i + 1, .j + 1)]
    Overlap { i: usize, j: usize, distance: f64 },
    #[error("balls {} and {} do not touch", .0.lo() + 1, .0.hi() + 1)]
    NotTouching(Edge),
    #[error("ball index {} out of range for {n} balls", .index + 1)]
    IndexOutOfRange { index: usize, n: usize },
    #[error("a ball cannot collide with itself ({})", .0 + 1)]
    SelfPair(usize),
    #[error("state has length {found}, expected {expected}")]
    StateShape { expected: usize, found: usize },
    #[error("total energy vanishes after removing the mean velocity")]
    ZeroEnergy,
    #[error("full contact graph is disconnected")]
    Disconnected,
}

/// An unordered pair of ball indices, stored as `(min, max)`.
///
/// The derived ordering is lexicographic on the canonical pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Result<Self, GeometryError> {
        if a == b {
            return Err(GeometryError::SelfPair(a));
        }
        Ok(Edge {
            lo: a.min(b),
            hi: a.max(b),
        })
    }

    /// Builds an edge from 1-based indices as they appear in files.
    pub fn from_one_based(a: usize, b: usize) -> Result<Self, GeometryError> {
        if a == 0 || b == 0 {
            return Err(GeometryError::IndexOutOfRange { index: 0, n: 0 });
        }
        Edge::new(a - 1, b - 1)
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn one_based(&self) -> [usize; 2] {
        [self.lo + 1, self.hi + 1]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo + 1, self.hi + 1)
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Edge::from_one_based(a, b).map_err(serde::de::Error::custom)
    }
}

/// Fixed unit-ball centers in `R^d` with the tolerance used to decide contact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallConfiguration {
    dimension: usize,
    centers: Vec<Vec<f64>>,
    contact_tolerance: f64,
    #[serde(skip)]
    touching: Vec<Edge>,
}

impl BallConfiguration {
    pub fn new(centers: Vec<Vec<f64>>, dimension: usize) -> Result<Self, GeometryError> {
        validate_configuration(centers, dimension, DEFAULT_CONTACT_TOLERANCE)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i]
    }

    pub fn contact_tolerance(&self) -> f64 {
        self.contact_tolerance
    }

    /// Pairs found touching during validation, in lexicographic order.
    pub fn touching_pairs(&self) -> &[Edge] {
        &self.touching
    }

    pub fn state_len(&self) -> usize {
        self.dimension * self.centers.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(&self.centers[i], &self.centers[j])
    }

    pub fn touches(&self, i: usize, j: usize) -> bool {
        i != j && (self.distance(i, j) - 2.0).abs() <= self.contact_tolerance
    }

    pub fn check_index(&self, index: usize) -> Result<(), GeometryError> {
        if index < self.len() {
            Ok(())
        } else {
            Err(GeometryError::IndexOutOfRange {
                index,
                n: self.len(),
            })
        }
    }

    /// Stacked center vector `x = (x_1, …, x_n) ∈ R^{nd}`.
    pub fn stacked(&self) -> Vec<f64> {
        self.centers.iter().flatten().copied().collect()
    }

    pub fn is_centered(&self) -> bool {
        let d = self.dimension;
        (0..d).all(|c| {
            let s: f64 = self.centers.iter().map(|x| x[c]).sum();
            s.abs() <= NORMALIZATION_TOLERANCE * (1.0 + self.len() as f64)
        })
    }

    /// Same centers translated by `shift`. Contacts are unchanged.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let centers = self
            .centers
            .iter()
            .map(|x| x.iter().zip(shift).map(|(a, s)| a + s).collect())
            .collect();
        BallConfiguration {
            dimension: self.dimension,
            centers,
            contact_tolerance: self.contact_tolerance,
            touching: self.touching.clone(),
        }
    }

    pub fn with_tolerance(&self, tol: f64) -> Result<Self, GeometryError> {
        validate_configuration(self.centers.clone(), self.dimension, tol)
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn validate_configuration(
    centers: Vec<Vec<f64>>,
    dimension: usize,
    contact_tolerance: f64,
) -> Result<BallConfiguration, GeometryError> {
    if dimension == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if centers.is_empty() {
        return Err(GeometryError::Empty);
    }
    if !(contact_tolerance.is_finite() && contact_tolerance >= 0.0) {
        return Err(GeometryError::BadTolerance(contact_tolerance));
    }
    for (index, c) in centers.iter().enumerate() {
        if c.len() != dimension {
            return Err(GeometryError::DimensionMismatch {
                index,
                expected: dimension,
                found: c.len(),
            });
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
    }
    let mut touching = Vec::new();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let dist = distance(&centers[i], &centers[j]);
            if dist < 2.0 - contact_tolerance {
                return Err(GeometryError::Overlap {
                    i,
                    j,
                    distance: dist,
                });
            }
            if (dist - 2.0).abs() <= contact_tolerance {
                touching.push(Edge { lo: i, hi: j });
            }
        }
    }
    Ok(BallConfiguration {
        dimension,
        centers,
        contact_tolerance,
        touching,
    })
}

/// A set of touching pairs over `n` balls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContactGraph {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl ContactGraph {
    /// A subgraph of the full graph. Every edge must be a touching pair.
    pub fn from_edges(
        config: &BallConfiguration,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GeometryError> {
        let mut set = BTreeSet::new();
        for e in edges {
            config.check_index(e.hi)?;
            if !config.touches(e.lo, e.hi) {
                return Err(GeometryError::NotTouching(e));
            }
            set.insert(e);
        }
        Ok(ContactGraph {
            n: config.len(),
            edges: set,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_vec(&self) -> Vec<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn is_subgraph_of(&self, other: &ContactGraph) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    /// Connected-component label for every vertex, numbered by first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.lo), find(&mut parent, e.hi));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut out = vec![0; self.n];
        for (v, slot) in out.iter_mut().enumerate() {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            *slot = label[r];
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.edges.len() == self.n - 1 && self.is_connected()
    }
}

pub fn full_contact_graph(config: &BallConfiguration) -> ContactGraph {
    ContactGraph {
        n: config.len(),
        edges: config.touching.iter().copied().collect(),
    }
}

/// The unit vector `z_jk ∈ R^{nd}` whose half-space realizes a collision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionDirection {
    pub edge: Edge,
    pub z: Vec<f64>,
}

/// Unnormalized `z̃_jk`: `x_j − x_k` in block `j`, `x_k − x_j` in block `k`.
pub fn raw_collision_direction(config: &BallConfiguration, edge: Edge) -> Vec<f64> {
    let d = config.dimension;
    let (j, k) = (edge.lo, edge.hi);
    let mut z = vec![0.0; config.state_len()];
    for c in 0..d {
        let diff = config.centers[j][c] - config.centers[k][c];
        z[j * d + c] = diff;
        z[k * d + c] = -diff;
    }
    z
}

pub fn collision_direction(
    config: &BallConfiguration,
    edge: Edge,
) -> Result<CollisionDirection, GeometryError> {
    config.check_index(edge.hi)?;
    if !config.touches(edge.lo, edge.hi) {
        return Err(GeometryError::NotTouching(edge));
    }
    let mut z = raw_collision_direction(config, edge);
    let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    z.iter_mut().for_each(|x| *x /= norm);
    Ok(CollisionDirection { edge, z })
}

/// Unit collision directions for every edge of `graph`, in edge order.
pub fn collision_directions(config: &BallConfiguration, graph: &ContactGraph) -> Vec<Vec<f64>> {
    graph
        .edges()
        .map(|e| {
            collision_direction(config, e)
                .expect("contact graph edges touch")
                .z
        })
        .collect()
}

/// Moves the center of mass to 0, removes total momentum and rescales to unit
/// energy. None of these change which collisions happen.
pub fn normalize_system(
    config: &BallConfiguration,
    state: &StateVector,
) -> Result<(BallConfiguration, StateVector), GeometryError> {
    let n = config.len();
    let d = config.dimension;
    if state.len() != n * d {
        return Err(GeometryError::StateShape {
            expected: n * d,
            found: state.len(),
        });
    }
    let mut mean_x = vec![0.0; d];
    let mut mean_v = vec![0.0; d];
    for i in 0..n {
        for c in 0..d {
            mean_x[c] += config.centers[i][c] / n as f64;
            mean_v[c] += state.ball(i)[c] / n as f64;
        }
    }
    let shift: Vec<f64> = mean_x.iter().map(|m| -m).collect();
    let centered = config.translated(&shift);

    let mut v: Vec<f64> = state.as_slice().to_vec();
    for i in 0..n {
        for c in 0..d {
            v[i * d + c] -= mean_v[c];
        }
    }
    let energy: f64 = v.iter().map(|x| x * x).sum();
    if energy == 0.0 {
        return Err(GeometryError::ZeroEnergy);
    }
    let scale = energy.sqrt();
    v.iter_mut().for_each(|x| *x /= scale);
    Ok((centered, StateVector::from_vec(n, d, v)))
}

/// The state `w_k = c (x_k − x_1)` scaled to unit norm, together with its
/// smallest margin `w · z_jk` over the edges of `graph`.
///
/// When the full graph is connected the margin is at least
/// `2^{-3/2} / (n (n-1)^2)`, which makes `w` an interior point of every
/// collision half-space at once.
pub fn interior_witness(
    config: &BallConfiguration,
    graph: &ContactGraph,
) -> Result<(StateVector, f64), GeometryError> {
    if !full_contact_graph(config).is_connected() {
        return Err(GeometryError::Disconnected);
    }
    let n = config.len();
    let d = config.dimension;
    let x0 = &config.centers[0];
    let mut w = Vec::with_capacity(n * d);
    for x in &config.centers {
        w.extend(x.iter().zip(x0).map(|(a, b)| a - b));
    }
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|x| *x /= norm);
    }
    let state = StateVector::from_vec(n, d, w);
    let margin = graph
        .edges()
        .map(|e| {
            let z = collision_direction(config, e).expect("graph edges touch");
            state.dot(&z.z)
        })
        .fold(f64::INFINITY, f64::min);
    Ok((state, margin))
}

/// `2^{-3/2} / (n (n-1)^2)`, the guaranteed interior-witness margin.
pub fn witness_margin_floor(n: usize) -> f64 {
    let n = n as f64;
    2f64.powf(-1.5) / (n * (n - 1.0) * (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(centers: &[&[f64]]) -> BallConfiguration {
        let d = centers[0].len();
        BallConfiguration::new(centers.iter().map(|c| c.to_vec()).collect(), d).unwrap()
    }

    fn e(a: usize, b: usize) -> Edge {
        Edge::from_one_based(a, b).unwrap()
    }

    #[test]
    fn two_touching_in_line() {
        let c = cfg(&[&[0.0], &[2.0]]);
        assert_eq!(c.touching_pairs(), &[e(1, 2)]);
    }

    #[test]
    fn overlap_names_pair() {
        let err = BallConfiguration::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 2).unwrap_err();
        assert_eq!(
            err,
            GeometryError::Overlap {
                i: 0,
                j: 1,
                distance: 1.0
            }
        );
        assert!(err.to_string().contains("balls 1 and 2"));
    }

    #[test]
    fn triangle_touches_everywhere() {
        let s3 = 3f64.sqrt();
        let c = cfg(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, s3]]);
        let g = full_contact_graph(&c);
        assert_eq!(g.edge_vec(), vec![e(1, 2), e(1, 3), e(2, 3)]);
    }

    #[test]
    fn full_graph_examples() {
        let c = cfg(&[&[0.0], &[2.0], &[4.0]]);
        assert_eq!(full_contact_graph(&c).edge_vec(), vec![e(1, 2), e(2, 3)]);
        let c = cfg(&[&[0.0], &[2.0], &[5.0]]);
        assert_eq!(full_contact_graph(&c).edge_vec(), vec![e(1, 2)]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = validate_configuration(vec![vec![0.0], vec![2.0, 0.0]], 1, 1e-9).unwrap_err();
        assert!(matches!(err, GeometryError::DimensionMismatch { index: 1, .. }));
    }

    #[test]
    fn edge_is_unordered() {
        assert_eq!(Edge::new(1, 0).unwrap(), Edge::new(0, 1).unwrap());
        assert!(Edge::new(2, 2).is_err());
        let json = serde_json::to_string(&e(2, 5)).unwrap();
        assert_eq!(json, "[2,5]");
        let back: Edge = serde_json::from_str("[5,2]").unwrap();
        assert_eq!(back, e(2, 5));
    }

    #[test]
    fn collision_direction_values() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = cfg(&[&[0.0], &[2.0]]);
        let z = collision_direction(&c, e(1, 2)).unwrap();
        assert!((z.z[0] + h).abs() < 1e-15 && (z.z[1] - h).abs() < 1e-15);
        let z21 = collision_direction(&c, e(2, 1)).unwrap();
        assert_eq!(z.z, z21.z);

        let c = cfg(&[&[0.0], &[2.0], &[4.0]]);
        let z = collision_direction(&c, e(2, 3)).unwrap();
        assert_eq!(z.z[0], 0.0);
        assert!((z.z[1] + h).abs() < 1e-15 && (z.z[2] - h).abs() < 1e-15);
        assert_eq!(
            collision_direction(&c, e(1, 3)).unwrap_err(),
            GeometryError::NotTouching(e(1, 3))
        );
    }

    #[test]
    fn raw_direction_norm() {
        let s3 = 3f64.sqrt();
        let c = cfg(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, s3]]);
        for edge in full_contact_graph(&c).edges() {
            let z = raw_collision_direction(&c, edge);
            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - RAW_DIRECTION_NORM).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_two_balls() {
        let c = cfg(&[&[0.0], &[2.0]]);
        let v = StateVector::from_vec(2, 1, vec![1.0, -1.0]);
        let (c2, v2) = normalize_system(&c, &v).unwrap();
        assert_eq!(c2.centers(), &[vec![-1.0], vec![1.0]]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v2.as_slice()[0] - h).abs() < 1e-15);
        assert!((v2.as_slice()[1] + h).abs() < 1e-15);

        let (c3, v3) = normalize_system(&c2, &v2).unwrap();
        assert_eq!(c3.centers(), c2.centers());
        for (a, b) in v3.as_slice().iter().zip(v2.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_uniform_motion() {
        let c = cfg(&[&[0.0], &[2.0]]);
        let v = StateVector::from_vec(2, 1, vec![3.0, 3.0]);
        assert_eq!(normalize_system(&c, &v).unwrap_err(), GeometryError::ZeroEnergy);
    }

    #[test]
    fn witness_two_balls() {
        let c = cfg(&[&[0.0], &[2.0]]);
        let g = full_contact_graph(&c);
        let (w, margin) = interior_witness(&c, &g).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 1.0]);
        assert!((margin - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(margin >= witness_margin_floor(2));
    }

    #[test]
    fn witness_collinear_three() {
        let c = cfg(&[&[0.0], &[2.0], &[4.0]]);
        let (_, margin) = interior_witness(&c, &full_contact_graph(&c)).unwrap();
        assert!(margin >= 2f64.powf(-1.5) / 12.0);
    }

    #[test]
    fn witness_requires_connected_full_graph() {
        let c = cfg(&[&[0.0], &[2.0], &[10.0], &[12.0]]);
        assert_eq!(
            interior_witness(&c, &full_contact_graph(&c)).unwrap_err(),
            GeometryError::Disconnected
        );
    }

    #[test]
    fn tree_and_components() {
        let c = cfg(&[&[0.0], &[2.0], &[4.0], &[10.0]]);
        let g = full_contact_graph(&c);
        assert_eq!(g.components(), vec![0, 0, 0, 1]);
        assert!(!g.is_tree());
        let c = cfg(&[&[0.0], &[2.0], &[4.0]]);
        assert!(full_contact_graph(&c).is_tree());
    }
}
