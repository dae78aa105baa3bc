//! The index of approximate rigidity.
//!
//! For a graph `G_1` associated with a configuration and an edge `e ∈ G_1`,
//! `α_*(G_1, e)` is the distance from `z_e` to the span of the other
//! collision directions of `G_1`. `α(F)` is the smallest strictly positive
//! `α_*` over every subgraph of the full contact graph and every edge of it.
//! Zero values mark infinitesimally rigid edge sets: there is a stress with
//! unit weight on `e` that balances at every vertex.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::StateVector;
use crate::geometry::{
    collision_direction, full_contact_graph, raw_collision_direction, BallConfiguration, ContactGraph, Edge, GeometryError,
};
use crate::linalg::{self, dot, norm, IncrementalBasis};

pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_EDGES: usize = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("edge {0} is not in the edge set")]
    EdgeNotInSet(Edge),
    #[error("{count} contact edges exceed the enumeration limit of {limit}")]
    TooManyEdges { count: usize, limit: usize },
    #[error("configuration has no touching pairs")]
    NoEdges,
    #[error("every candidate distance is classified as zero")]
    AllZero,
    #[error("input vectors are linearly dependent or the excluded vector lies in their span")]
    DependentInput,
    #[error("collision directions of the chosen edges are linearly dependent")]
    DependentEdges,
    #[error("state is not in the span of the graph's collision directions")]
    NotInSpan,
}

fn directions(config: &BallConfiguration, edges: &[Edge]) -> Result<Vec<Vec<f64>>, RigidityError> {
    edges
        .iter()
        .map(|&e| Ok(collision_direction(config, e)?.z))
        .collect()
}

/// Distance from `z_edge` to the span of `z_f`, `f ∈ edge_set \ {edge}`.
pub fn alpha_star(
    config: &BallConfiguration,
    edge_set: &[Edge],
    edge: Edge,
) -> Result<f64, RigidityError> {
    if !edge_set.contains(&edge) {
        return Err(RigidityError::EdgeNotInSet(edge));
    }
    collision_direction(config, edge)?;
    let raw = raw_collision_direction(config, edge);
    let others: Vec<Edge> = edge_set.iter().copied().filter(|&f| f != edge).collect();
    let span = directions(config, &others)?;
    Ok(linalg::distance_to_span(&span, &raw) / norm(&raw))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOptions {
    pub zero_tolerance: f64,
    pub max_edges: usize,
    /// Keep every candidate in the report.
    pub keep_table: bool,
    /// Skip supersets of zero-classified spans; they are zero as well.
    pub prune_zero: bool,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        AlphaOptions {
            zero_tolerance: DEFAULT_ZERO_TOLERANCE,
            max_edges: DEFAULT_MAX_EDGES,
            keep_table: false,
            prune_zero: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCandidate {
    pub edge: Edge,
    /// `E_1 \ {edge}`.
    pub others: Vec<Edge>,
    pub alpha_star: f64,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaReport {
    pub alpha: f64,
    pub argmin_edge: Edge,
    /// Edge set `E_1` attaining the minimum, including `argmin_edge`.
    pub argmin_edge_set: Vec<Edge>,
    pub candidates: u64,
    pub positive: u64,
    pub zero: u64,
    pub zero_tolerance: f64,
    pub full_graph: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<AlphaCandidate>>,
}

struct EdgeScan {
    best: Option<(f64, Vec<usize>)>,
    positive: u64,
    zero: u64,
    table: Vec<AlphaCandidate>,
}

/// Unit directions for the spans and raw (unnormalized) targets. Measuring
/// the raw target and dividing by its norm keeps `α_* = 1` exact when the
/// span is empty.
struct Directions {
    unit: Vec<Vec<f64>>,
    raw: Vec<Vec<f64>>,
    raw_norm: Vec<f64>,
}

impl Directions {
    fn distance(&self, basis: &IncrementalBasis, i: usize) -> f64 {
        basis.distance(&self.raw[i]) / self.raw_norm[i]
    }
}

fn scan_chosen_edge(
    chosen: usize,
    edges: &[Edge],
    zs: &Directions,
    opts: &AlphaOptions,
) -> EdgeScan {
    let rest: Vec<usize> = (0..edges.len()).filter(|&i| i != chosen).collect();
    let mut scan = EdgeScan {
        best: None,
        positive: 0,
        zero: 0,
        table: Vec::new(),
    };
    let mut basis = IncrementalBasis::new();
    let mut picked = Vec::new();
    visit(0, &rest, chosen, edges, zs, opts, &mut basis, &mut picked, &mut scan);
    scan
}

#[allow(clippy::too_many_arguments)]
fn visit(
    depth: usize,
    rest: &[usize],
    chosen: usize,
    edges: &[Edge],
    zs: &Directions,
    opts: &AlphaOptions,
    basis: &mut IncrementalBasis,
    picked: &mut Vec<usize>,
    scan: &mut EdgeScan,
) {
    if opts.prune_zero && depth < rest.len() {
        let value = zs.distance(basis, chosen);
        if value <= opts.zero_tolerance {
            scan.zero += 1u64 << (rest.len() - depth);
            return;
        }
    }
    if depth == rest.len() {
        let value = zs.distance(basis, chosen);
        let zero = value <= opts.zero_tolerance;
        if zero {
            scan.zero += 1;
        } else {
            scan.positive += 1;
            if scan.best.as_ref().is_none_or(|(b, _)| value < *b) {
                scan.best = Some((value, picked.clone()));
            }
        }
        if opts.keep_table {
            scan.table.push(AlphaCandidate {
                edge: edges[chosen],
                others: picked.iter().map(|&i| edges[i]).collect(),
                alpha_star: value,
                zero,
            });
        }
        return;
    }
    visit(depth + 1, rest, chosen, edges, zs, opts, basis, picked, scan);
    let idx = rest[depth];
    let pushed = basis.push(&zs.unit[idx]);
    picked.push(idx);
    visit(depth + 1, rest, chosen, edges, zs, opts, basis, picked, scan);
    picked.pop();
    if pushed {
        basis.pop();
    }
}

/// Exhaustive evaluation of `α(F)` over all `(E_1, edge)` pairs.
pub fn alpha(config: &BallConfiguration, opts: &AlphaOptions) -> Result<AlphaReport, RigidityError> {
    let edges = full_contact_graph(config).edge_vec();
    if edges.is_empty() {
        return Err(RigidityError::NoEdges);
    }
    if edges.len() > opts.max_edges {
        return Err(RigidityError::TooManyEdges {
            count: edges.len(),
            limit: opts.max_edges,
        });
    }
    let raw: Vec<Vec<f64>> = edges.iter().map(|&e| raw_collision_direction(config, e)).collect();
    let zs = Directions {
        unit: directions(config, &edges)?,
        raw_norm: raw.iter().map(|r| norm(r)).collect(),
        raw,
    };
    let scans: Vec<EdgeScan> = (0..edges.len())
        .into_par_iter()
        .map(|chosen| scan_chosen_edge(chosen, &edges, &zs, opts))
        .collect();

    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    let (mut positive, mut zero) = (0, 0);
    let mut table = Vec::new();
    for (chosen, scan) in scans.into_iter().enumerate() {
        positive += scan.positive;
        zero += scan.zero;
        if let Some((v, set)) = scan.best {
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, chosen, set));
            }
        }
        table.extend(scan.table);
    }
    let (value, chosen, set) = best.ok_or(RigidityError::AllZero)?;
    let mut argmin_edge_set: Vec<Edge> = set.iter().map(|&i| edges[i]).collect();
    argmin_edge_set.push(edges[chosen]);
    argmin_edge_set.sort();
    Ok(AlphaReport {
        alpha: value,
        argmin_edge: edges[chosen],
        argmin_edge_set,
        candidates: positive + zero,
        positive,
        zero,
        zero_tolerance: opts.zero_tolerance,
        full_graph: edges,
        table: opts.keep_table.then_some(table),
    })
}

/// Lower bound on `α(F)` for tree contact graphs, `√2 / n`.
pub fn tree_alpha_floor(n: usize) -> f64 {
    std::f64::consts::SQRT_2 / n as f64
}

/// The tree constant `4 / n` as printed for unnormalized directions.
pub fn tree_alpha_floor_unnormalized(n: usize) -> f64 {
    4.0 / n as f64
}

/// Weights `a_e` with `a_edge = 1` that come closest to balancing
/// `Σ a_jk (x_j − x_k)` at every vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressCertificate {
    pub edge: Edge,
    pub coefficients: Vec<(Edge, f64)>,
    /// Norm of the unbalanced force at each vertex.
    pub residuals: Vec<f64>,
    /// Euclidean norm of all vertex residuals together.
    pub total_residual: f64,
}

impl StressCertificate {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// The total residual equals `2^{3/2} α_*`, so this is the stress tolerance
/// matching an `α_*` zero tolerance.
pub fn stress_tolerance(zero_tolerance: f64) -> f64 {
    2f64.powf(1.5) * zero_tolerance
}

pub fn stress_certificate(
    config: &BallConfiguration,
    edge_set: &[Edge],
    edge: Edge,
) -> Result<StressCertificate, RigidityError> {
    if !edge_set.contains(&edge) {
        return Err(RigidityError::EdgeNotInSet(edge));
    }
    for &e in edge_set {
        config.check_index(e.hi())?;
        if !config.touches(e.lo(), e.hi()) {
            return Err(GeometryError::NotTouching(e).into());
        }
    }
    let d = config.dimension();
    let n = config.len();
    // Column for edge (j,k): force x_k − x_j on j and x_j − x_k on k.
    let force_column = |e: Edge| -> Vec<f64> {
        let mut col = vec![0.0; n * d];
        let (j, k) = (e.lo(), e.hi());
        for c in 0..d {
            let diff = config.center(k)[c] - config.center(j)[c];
            col[j * d + c] = diff;
            col[k * d + c] = -diff;
        }
        col
    };
    let mut others: Vec<Edge> = edge_set.iter().copied().filter(|&f| f != edge).collect();
    others.sort();
    others.dedup();
    let fixed = force_column(edge);
    let cols: Vec<Vec<f64>> = others.iter().map(|&e| force_column(e)).collect();
    let rhs: Vec<f64> = fixed.iter().map(|x| -x).collect();
    let weights = linalg::least_squares(&cols, &rhs);

    let mut coefficients: Vec<(Edge, f64)> = vec![(edge, 1.0)];
    coefficients.extend(others.iter().copied().zip(weights));
    coefficients.sort_by_key(|(e, _)| *e);

    let mut forces = vec![vec![0.0; d]; n];
    for &(e, a) in &coefficients {
        let (j, k) = (e.lo(), e.hi());
        // Vertex k receives a (x_j − x_k); vertex j receives a (x_k − x_j).
        for (c, (xj, xk)) in config.center(j).iter().zip(config.center(k)).enumerate() {
            forces[k][c] += a * (xj - xk);
            forces[j][c] -= a * (xj - xk);
        }
    }
    let residuals: Vec<f64> = forces.iter().map(|f| norm(f)).collect();
    let total_residual = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(StressCertificate {
        edge,
        coefficients,
        residuals,
        total_residual,
    })
}

/// Lowest-index-first choice of standard basis vectors `e_i` (returned as
/// 0-based indices) that extends the independent set `w_vectors` to an
/// `(m−1)`-dimensional subspace still excluding `excluded`.
pub fn extend_basis(
    w_vectors: &[Vec<f64>],
    excluded: &[f64],
    m: usize,
) -> Result<Vec<usize>, RigidityError> {
    let rank = |vs: &[Vec<f64>]| -> usize {
        if vs.is_empty() {
            return 0;
        }
        linalg::rank(vs, m)
    };
    if w_vectors.iter().any(|w| w.len() != m) || excluded.len() != m {
        return Err(RigidityError::DependentInput);
    }
    let mut current: Vec<Vec<f64>> = w_vectors.to_vec();
    if rank(&current) != current.len() || current.len() >= m {
        return Err(RigidityError::DependentInput);
    }
    let with_excluded = |vs: &[Vec<f64>]| {
        let mut all = vs.to_vec();
        all.push(excluded.to_vec());
        all
    };
    if rank(&with_excluded(&current)) != current.len() + 1 {
        return Err(RigidityError::DependentInput);
    }
    let mut chosen = Vec::new();
    for i in 0..m {
        if current.len() == m - 1 {
            break;
        }
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        current.push(e);
        let k = current.len();
        if rank(&current) == k && rank(&with_excluded(&current)) == k + 1 {
            chosen.push(i);
        } else {
            current.pop();
        }
    }
    debug_assert_eq!(current.len(), m - 1);
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDistance {
    /// Edge whose direction was left out to form the vertex.
    pub vertex_edge: Edge,
    /// Facet whose hyperplane is farthest from the vertex.
    pub facet_edge: Edge,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexCheckReport {
    pub alpha: f64,
    pub vertices: Vec<VertexDistance>,
    pub vertices_ok: bool,
    pub samples: usize,
    /// Smallest over samples of `max_e v·z_e`.
    pub min_sample_margin: f64,
    /// `α / (n d)`.
    pub sample_floor: f64,
    /// `α / dim H^G`, the sharper floor before `dim H^G ≤ nd` is used.
    pub span_floor: f64,
    pub samples_ok: bool,
    pub tolerance: f64,
}

impl VertexCheckReport {
    pub fn passed(&self) -> bool {
        self.vertices_ok && self.samples_ok
    }
}

/// `w_k = c (x_k − x_root(k))`, rooted per connected component of the full
/// graph, projected onto `span{z_e : e ∈ graph}`. Strictly inside every
/// collision half-space of `graph`.
pub fn spanned_witness(config: &BallConfiguration, graph: &ContactGraph) -> Vec<f64> {
    let comps = full_contact_graph(config).components();
    let d = config.dimension();
    let mut root = vec![usize::MAX; config.len()];
    let mut w = vec![0.0; config.state_len()];
    for (k, &c) in comps.iter().enumerate() {
        if root[c] == usize::MAX {
            root[c] = k;
        }
        for i in 0..d {
            w[k * d + i] = config.center(k)[i] - config.center(root[c])[i];
        }
    }
    let zs = crate::geometry::collision_directions(config, graph);
    let wg = linalg::project(&zs, &w);
    let s = norm(&wg);
    if s > 0.0 {
        wg.into_iter().map(|x| x / s).collect()
    } else {
        wg
    }
}

/// Random points of `S ∩ H^G_*`: pushes the witness toward a random
/// direction of `H^G`, stopping anywhere before the cone boundary.
pub fn sample_cone_points(
    config: &BallConfiguration,
    graph: &ContactGraph,
    samples: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let zs = crate::geometry::collision_directions(config, graph);
    let basis = linalg::span_basis(&zs, config.state_len());
    if basis.is_empty() {
        return Vec::new();
    }
    let witness = spanned_witness(config, graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let mut dir = vec![0.0; config.state_len()];
        for q in &basis {
            let g: f64 = StandardNormal.sample(&mut rng);
            dir.iter_mut().zip(q).for_each(|(a, b)| *a += g * b);
        }
        let mut t_max = f64::INFINITY;
        for z in &zs {
            let rate = dot(&dir, z);
            if rate < 0.0 {
                t_max = t_max.min(-dot(&witness, z) / rate);
            }
        }
        let u: f64 = rand::Rng::gen(&mut rng);
        // Biased toward the boundary, where the floor is tightest.
        let frac = 1.0 - u * u * u;
        let t = if t_max.is_finite() { frac * t_max } else { 10.0 * u };
        let p: Vec<f64> = witness.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
        let s = norm(&p);
        if s > 0.0 {
            out.push(p.into_iter().map(|x| x / s).collect());
        }
    }
    out
}

/// Checks the vertex directions built from an independent edge subset and
/// the floor `α/(nd)` on sampled points of `S ∩ H^G_*`.
pub fn spherical_vertex_check(
    config: &BallConfiguration,
    graph: &ContactGraph,
    independent: &[Edge],
    alpha: f64,
    samples: usize,
    seed: u64,
) -> Result<VertexCheckReport, RigidityError> {
    const TOL: f64 = 1e-9;
    let zs = directions(config, independent)?;
    let dim = config.state_len();
    if linalg::rank(&zs, dim) != zs.len() {
        return Err(RigidityError::DependentEdges);
    }
    let mut vertices = Vec::new();
    for (k, &ek) in independent.iter().enumerate() {
        let others: Vec<Vec<f64>> = zs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, z)| z.clone())
            .collect();
        let p = linalg::project(&others, &zs[k]);
        let raw: Vec<f64> = zs[k].iter().zip(&p).map(|(a, b)| a - b).collect();
        let s = norm(&raw);
        let wk: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let (facet, dist) = independent
            .iter()
            .zip(&zs)
            .map(|(&e, z)| (e, dot(&wk, z).abs()))
            .fold((ek, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        vertices.push(VertexDistance {
            vertex_edge: ek,
            facet_edge: facet,
            distance: dist,
        });
    }
    let vertices_ok = vertices.iter().all(|v| v.distance >= alpha - TOL);

    let graph_zs = crate::geometry::collision_directions(config, graph);
    let span_dim = linalg::rank(&graph_zs, dim).max(1);
    let sample_floor = alpha / dim as f64;
    let span_floor = alpha / span_dim as f64;
    let points = sample_cone_points(config, graph, samples, seed);
    let min_sample_margin = points
        .iter()
        .map(|p| graph_zs.iter().map(|z| dot(p, z)).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    let samples_ok = points.is_empty() || min_sample_margin >= sample_floor - TOL;
    Ok(VertexCheckReport {
        alpha,
        vertices,
        vertices_ok,
        samples: points.len(),
        min_sample_margin,
        sample_floor,
        span_floor,
        samples_ok,
        tolerance: TOL,
    })
}

/// The construction that moves a nearly admissible unit state `u ∈ H^G` into
/// `S ∩ H^G_*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPath {
    /// `max(0, −min_e u·z_e)`.
    pub delta: f64,
    /// Boundary point on the segment from `u` to the witness.
    pub boundary_point: Vec<f64>,
    /// `boundary_point` rescaled to the unit sphere.
    pub projected: Vec<f64>,
    pub distance: f64,
    /// `2^{7/2} δ n (n−1)²`.
    pub bound: f64,
}

pub fn witness_path(
    config: &BallConfiguration,
    graph: &ContactGraph,
    u: &StateVector,
) -> Result<WitnessPath, RigidityError> {
    if !full_contact_graph(config).is_connected() {
        return Err(GeometryError::Disconnected.into());
    }
    let zs = crate::geometry::collision_directions(config, graph);
    let u = u.as_slice();
    let pu = linalg::project(&zs, u);
    if linalg::max_abs_diff(&pu, u) > 1e-9 {
        return Err(RigidityError::NotInSpan);
    }
    let n = config.len() as f64;
    let margins: Vec<f64> = zs.iter().map(|z| dot(u, z)).collect();
    let delta = margins.iter().copied().fold(0.0, |acc: f64, m| acc.max(-m));
    let bound = 2f64.powf(3.5) * delta * n * (n - 1.0) * (n - 1.0);
    if delta == 0.0 {
        return Ok(WitnessPath {
            delta,
            boundary_point: u.to_vec(),
            projected: u.to_vec(),
            distance: 0.0,
            bound,
        });
    }
    let v = spanned_witness(config, graph);
    let mut t = 0.0f64;
    for (z, &mu) in zs.iter().zip(&margins) {
        if mu < 0.0 {
            let mv = dot(&v, z);
            t = t.max(-mu / (mv - mu));
        }
    }
    let y1: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + t * (b - a)).collect();
    let s = norm(&y1);
    let y4: Vec<f64> = y1.iter().map(|x| x / s).collect();
    let distance = norm(&u.iter().zip(&y4).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(WitnessPath {
        delta,
        boundary_point: y1,
        projected: y4,
        distance,
        bound,
    })
}
