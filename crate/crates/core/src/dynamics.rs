//! Pseudo-collisions, schedules and traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foldings::{fold_in_place, HalfSpace};
use crate::geometry::{collision_direction, BallConfiguration, ContactGraph, Edge};
use crate::linalg::{self, max_abs_diff};

/// Max-norm difference below which two states count as equal.
pub const CHANGE_TOLERANCE: f64 = 1e-14;

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("schedule edge {0} is not an edge of the contact graph")]
    EdgeNotInGraph(Edge),
    #[error("centers are not centered at the origin")]
    NotNormalized,
    #[error("state has length {found}, expected {expected}")]
    StateShape { expected: usize, found: usize },
}

/// Stacked pseudo-velocities `v = (v_1, …, v_n) ∈ R^{nd}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl StateVector {
    pub fn from_vec(n: usize, d: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * d, "state length must be n·d");
        StateVector { n, d, data }
    }

    /// Stacks per-ball velocities.
    pub fn from_balls(velocities: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        let n = velocities.len();
        let d = velocities.first().map_or(0, Vec::len);
        if velocities.iter().any(|v| v.len() != d) {
            return Err(DynamicsError::StateShape {
                expected: n * d,
                found: velocities.iter().map(Vec::len).sum(),
            });
        }
        Ok(StateVector {
            n,
            d,
            data: velocities.iter().flatten().copied().collect(),
        })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        StateVector::from_vec(n, d, vec![0.0; n * d])
    }

    pub fn balls(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn ball(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn to_balls(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.d.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        linalg::dot(&self.data, other)
    }

    /// `Σ |v_i|²`.
    pub fn energy(&self) -> f64 {
        self.dot(&self.data)
    }

    /// `Σ v_i`.
    pub fn momentum(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.d];
        for i in 0..self.n {
            p.iter_mut().zip(self.ball(i)).for_each(|(a, b)| *a += b);
        }
        p
    }

    pub fn differs_from(&self, other: &StateVector) -> bool {
        max_abs_diff(&self.data, &other.data) > CHANGE_TOLERANCE
    }

    fn check(&self, config: &BallConfiguration) -> Result<(), DynamicsError> {
        if self.data.len() != config.state_len() {
            return Err(DynamicsError::StateShape {
                expected: config.state_len(),
                found: self.data.len(),
            });
        }
        Ok(())
    }
}

/// `(v_i − v_j)·(x_i − x_j)`; negative when the pair approaches.
pub fn approach_rate(config: &BallConfiguration, state: &StateVector, edge: Edge) -> f64 {
    let (i, j) = (edge.lo(), edge.hi());
    let (xi, xj) = (config.center(i), config.center(j));
    let (vi, vj) = (state.ball(i), state.ball(j));
    (0..config.dimension())
        .map(|c| (vi[c] - vj[c]) * (xi[c] - xj[c]))
        .sum()
}

/// Pairwise exchange with exact comparison at zero.
pub fn collide(config: &BallConfiguration, state: &StateVector, edge: Edge) -> StateVector {
    collide_with_threshold(config, state, edge, 0.0)
}

/// Exchange of the velocity components along the line of centers, applied
/// only if the balls touch and `(v_i − v_j)·(x_i − x_j) < −eps`.
pub fn collide_with_threshold(
    config: &BallConfiguration,
    state: &StateVector,
    edge: Edge,
    eps: f64,
) -> StateVector {
    let (i, j) = (edge.lo(), edge.hi());
    if !config.touches(i, j) || approach_rate(config, state, edge) >= -eps {
        return state.clone();
    }
    let d = config.dimension();
    let dist = config.distance(i, j);
    let u: Vec<f64> = (0..d)
        .map(|c| (config.center(i)[c] - config.center(j)[c]) / dist)
        .collect();
    let vi_u = linalg::dot(state.ball(i), &u);
    let vj_u = linalg::dot(state.ball(j), &u);
    let mut out = state.clone();
    for (c, uc) in u.iter().enumerate() {
        out.data[i * d + c] += (vj_u - vi_u) * uc;
        out.data[j * d + c] += (vi_u - vj_u) * uc;
    }
    out
}

/// The same map computed as the folding across `∂H_ij` in `R^{nd}`.
pub fn collide_as_folding(config: &BallConfiguration, state: &StateVector, edge: Edge) -> StateVector {
    let Ok(dir) = collision_direction(config, edge) else {
        return state.clone();
    };
    let hs = HalfSpace::new(dir.z).expect("collision directions are unit vectors");
    let mut out = state.clone();
    fold_in_place(&mut out.data, &hs);
    out
}

/// `Σ_{i,j} (v_j − v_i)·(x_j − x_i)`, evaluated as `2n x·v − 2 (Σx)·(Σv)`.
pub fn functional_value(config: &BallConfiguration, state: &StateVector) -> f64 {
    let n = config.len() as f64;
    let x = config.stacked();
    let sx: Vec<f64> = (0..config.dimension())
        .map(|c| config.centers().iter().map(|p| p[c]).sum())
        .collect();
    2.0 * n * state.dot(&x) - 2.0 * linalg::dot(&sx, &state.momentum())
}

/// `F = 2n x·v` for a configuration centered at the origin.
pub fn monotone_functional(config: &BallConfiguration, state: &StateVector) -> Result<f64, DynamicsError> {
    state.check(config)?;
    if !config.is_centered() {
        return Err(DynamicsError::NotNormalized);
    }
    Ok(2.0 * config.len() as f64 * state.dot(&config.stacked()))
}

/// Splits `v` into its component orthogonal to every `z_jk` of `graph` and its
/// projection onto their span: returns `(v^{∩G}, v^G)`.
pub fn decompose_state(
    config: &BallConfiguration,
    graph: &ContactGraph,
    state: &StateVector,
) -> (StateVector, StateVector) {
    let zs = crate::geometry::collision_directions(config, graph);
    let vg = linalg::project(&zs, state.as_slice());
    let cap: Vec<f64> = state.as_slice().iter().zip(&vg).map(|(a, b)| a - b).collect();
    let (n, d) = (state.n, state.d);
    (StateVector::from_vec(n, d, cap), StateVector::from_vec(n, d, vg))
}

/// An ordered list of edges, or a rule generating one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Explicit { edges: Vec<Edge> },
    /// Cycles through the edges forever.
    RoundRobin { edges: Vec<Edge> },
    /// Always the first approaching edge in lexicographic order.
    LexicographicGreedy { edges: Vec<Edge> },
    /// Uniform random edges from a seeded generator.
    SeededRandom { edges: Vec<Edge>, seed: u64 },
}

impl Schedule {
    pub fn edges(&self) -> &[Edge] {
        match self {
            Schedule::Explicit { edges }
            | Schedule::RoundRobin { edges }
            | Schedule::LexicographicGreedy { edges }
            | Schedule::SeededRandom { edges, .. } => edges,
        }
    }

    /// Rejects schedules that mention an edge outside `graph`.
    pub fn validate(&self, graph: &ContactGraph) -> Result<(), DynamicsError> {
        match self.edges().iter().find(|e| !graph.contains(**e)) {
            Some(&e) => Err(DynamicsError::EdgeNotInGraph(e)),
            None => Ok(()),
        }
    }

    fn is_finite(&self) -> bool {
        matches!(self, Schedule::Explicit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub edge: Edge,
    pub changed: bool,
    #[serde(rename = "F")]
    pub functional: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    /// `v(0), v(1), …`; empty when states were not recorded.
    pub states: Vec<StateVector>,
    pub steps: Vec<TraceStep>,
    pub initial_functional: f64,
    pub initial_energy: f64,
    pub final_state: StateVector,
    /// Number of steps that changed the state.
    pub collisions: usize,
    /// No edge of the schedule can change the final state.
    pub stable: bool,
}

impl SimulationTrace {
    pub fn functional_values(&self) -> Vec<f64> {
        std::iter::once(self.initial_functional)
            .chain(self.steps.iter().map(|s| s.functional))
            .collect()
    }

    pub fn schedule(&self) -> Vec<Edge> {
        self.steps.iter().map(|s| s.edge).collect()
    }

    pub fn to_json_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("trace steps serialize") + "\n")
            .collect()
    }
}

fn is_stable(config: &BallConfiguration, state: &StateVector, edges: &[Edge]) -> bool {
    edges
        .iter()
        .all(|&e| !collide(config, state, e).differs_from(state))
}

/// Runs the schedule for at most `max_steps` steps and records every state.
///
/// Rule-based schedules stop as soon as no edge can change the state.
pub fn run_schedule(
    config: &BallConfiguration,
    state0: &StateVector,
    schedule: &Schedule,
    max_steps: usize,
) -> SimulationTrace {
    run(config, state0, schedule, max_steps, true)
}

/// As [`run_schedule`] but without storing intermediate states.
pub fn run_schedule_lean(
    config: &BallConfiguration,
    state0: &StateVector,
    schedule: &Schedule,
    max_steps: usize,
) -> SimulationTrace {
    run(config, state0, schedule, max_steps, false)
}

fn run(
    config: &BallConfiguration,
    state0: &StateVector,
    schedule: &Schedule,
    max_steps: usize,
    record: bool,
) -> SimulationTrace {
    let edges = schedule.edges();
    let mut state = state0.clone();
    let mut trace = SimulationTrace {
        states: if record { vec![state.clone()] } else { Vec::new() },
        steps: Vec::new(),
        initial_functional: functional_value(config, &state),
        initial_energy: state.energy(),
        final_state: state.clone(),
        collisions: 0,
        stable: false,
    };
    let mut stable = edges.is_empty() || is_stable(config, &state, edges);
    let mut rng = match schedule {
        Schedule::SeededRandom { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    for t in 1..=max_steps {
        if stable && !schedule.is_finite() {
            break;
        }
        let edge = match schedule {
            Schedule::Explicit { edges } => match edges.get(t - 1) {
                Some(&e) => e,
                None => break,
            },
            Schedule::RoundRobin { edges } => edges[(t - 1) % edges.len()],
            Schedule::LexicographicGreedy { edges } => {
                let mut sorted = edges.clone();
                sorted.sort();
                match sorted
                    .into_iter()
                    .find(|&e| collide(config, &state, e).differs_from(&state))
                {
                    Some(e) => e,
                    None => break,
                }
            }
            Schedule::SeededRandom { edges, .. } => {
                let rng = rng.as_mut().expect("seeded schedule has a generator");
                edges[rng.gen_range(0..edges.len())]
            }
        };
        let next = collide(config, &state, edge);
        let changed = next.differs_from(&state);
        state = next;
        if changed {
            trace.collisions += 1;
            stable = is_stable(config, &state, edges);
        }
        trace.steps.push(TraceStep {
            t,
            edge,
            changed,
            functional: functional_value(config, &state),
            energy: state.energy(),
        });
        if record {
            trace.states.push(state.clone());
        }
    }
    trace.stable = stable;
    trace.final_state = state;
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{full_contact_graph, normalize_system};

    fn e(a: usize, b: usize) -> Edge {
        Edge::from_one_based(a, b).unwrap()
    }

    fn line(xs: &[f64]) -> BallConfiguration {
        BallConfiguration::new(xs.iter().map(|&x| vec![x]).collect(), 1).unwrap()
    }

    fn sv(n: usize, d: usize, v: &[f64]) -> StateVector {
        StateVector::from_vec(n, d, v.to_vec())
    }

    /// Direct double sum over all ordered pairs.
    fn functional_double_sum(config: &BallConfiguration, v: &StateVector) -> f64 {
        let n = config.len();
        let mut f = 0.0;
        for i in 0..n {
            for j in 0..n {
                for c in 0..config.dimension() {
                    f += (v.ball(j)[c] - v.ball(i)[c]) * (config.center(j)[c] - config.center(i)[c]);
                }
            }
        }
        f
    }

    #[test]
    fn head_on_exchange() {
        let c = line(&[0.0, 2.0]);
        let v = sv(2, 1, &[1.0, -1.0]);
        assert_eq!(collide(&c, &v, e(1, 2)).as_slice(), &[-1.0, 1.0]);
        let sep = sv(2, 1, &[-1.0, 1.0]);
        assert_eq!(collide(&c, &sep, e(1, 2)), sep);
    }

    #[test]
    fn oblique_exchange() {
        let c = BallConfiguration::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]], 2).unwrap();
        let v = sv(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(collide(&c, &v, e(1, 2)).as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn folding_path_matches_examples() {
        let c = line(&[0.0, 2.0]);
        for v in [sv(2, 1, &[1.0, -1.0]), sv(2, 1, &[-1.0, 1.0])] {
            let a = collide(&c, &v, e(1, 2));
            let b = collide_as_folding(&c, &v, e(1, 2));
            assert!(max_abs_diff(a.as_slice(), b.as_slice()) < 1e-15);
        }
        let c = BallConfiguration::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]], 2).unwrap();
        let v = sv(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = collide_as_folding(&c, &v, e(1, 2));
        assert!(max_abs_diff(b.as_slice(), &[0.0, 1.0, 1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn boundary_state_is_fixed_by_both_paths() {
        let c = line(&[0.0, 2.0]);
        let v = sv(2, 1, &[0.5, 0.5]);
        assert_eq!(collide(&c, &v, e(1, 2)), v);
        assert_eq!(collide_as_folding(&c, &v, e(1, 2)), v);
    }

    #[test]
    fn non_touching_pair_is_noop() {
        let c = line(&[0.0, 3.0]);
        let v = sv(2, 1, &[1.0, -1.0]);
        assert_eq!(collide(&c, &v, e(1, 2)), v);
        assert_eq!(collide_as_folding(&c, &v, e(1, 2)), v);
    }

    #[test]
    fn threshold_suppresses_slow_approach() {
        let c = line(&[0.0, 2.0]);
        let v = sv(2, 1, &[1e-6, 0.0]);
        assert_ne!(collide(&c, &v, e(1, 2)), v);
        assert_eq!(collide_with_threshold(&c, &v, e(1, 2), 1e-3), v);
    }

    #[test]
    fn repeated_pair_collides_once() {
        let c = line(&[0.0, 2.0]);
        let v = sv(2, 1, &[1.0, -1.0]);
        let s = Schedule::Explicit {
            edges: vec![e(1, 2), e(1, 2)],
        };
        let t = run_schedule(&c, &v, &s, 10);
        assert_eq!(t.collisions, 1);
        assert_eq!(t.states.len(), 3);
        assert_eq!(t.steps.iter().map(|s| s.changed).collect::<Vec<_>>(), vec![true, false]);
    }

    #[test]
    fn empty_schedule_has_no_collisions() {
        let c = line(&[0.0, 2.0]);
        let t = run_schedule(&c, &sv(2, 1, &[1.0, -1.0]), &Schedule::Explicit { edges: vec![] }, 10);
        assert_eq!(t.collisions, 0);
        assert!(t.steps.is_empty());
    }

    #[test]
    fn explicit_schedule_respects_max_steps() {
        let c = line(&[0.0, 2.0]);
        let s = Schedule::Explicit {
            edges: vec![e(1, 2); 5],
        };
        assert_eq!(run_schedule(&c, &sv(2, 1, &[1.0, -1.0]), &s, 3).steps.len(), 3);
    }

    #[test]
    fn greedy_collinear_three() {
        // v = (1, 0, −1): (1,2) exchanges, then (2,3), then (1,2) again.
        let c = line(&[0.0, 2.0, 4.0]);
        let g = full_contact_graph(&c);
        let s = Schedule::LexicographicGreedy { edges: g.edge_vec() };
        let t = run_schedule(&c, &sv(3, 1, &[1.0, 0.0, -1.0]), &s, 100);
        assert_eq!(t.collisions, 3);
        assert!(t.stable);
        assert_eq!(t.final_state.as_slice(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn schedule_validation() {
        let c = line(&[0.0, 2.0, 5.0]);
        let g = full_contact_graph(&c);
        let ok = Schedule::Explicit { edges: vec![e(1, 2)] };
        assert!(ok.validate(&g).is_ok());
        let bad = Schedule::Explicit { edges: vec![e(2, 3)] };
        assert_eq!(bad.validate(&g), Err(DynamicsError::EdgeNotInGraph(e(2, 3))));
    }

    #[test]
    fn functional_two_balls() {
        let c = line(&[-1.0, 1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = sv(2, 1, &[h, -h]);
        let f = monotone_functional(&c, &v).unwrap();
        assert!((f + 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((f - functional_double_sum(&c, &v)).abs() < 1e-12);
        assert_eq!(monotone_functional(&c, &StateVector::zeros(2, 1)).unwrap(), 0.0);
        assert_eq!(
            monotone_functional(&line(&[0.0, 2.0]), &v),
            Err(DynamicsError::NotNormalized)
        );
    }

    #[test]
    fn functional_general_form_matches_double_sum() {
        let c = BallConfiguration::new(vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![5.0, 0.0]], 2).unwrap();
        let v = sv(3, 2, &[0.3, -1.0, 0.7, 0.2, -0.1, 0.4]);
        assert!((functional_value(&c, &v) - functional_double_sum(&c, &v)).abs() < 1e-12);
    }

    #[test]
    fn functional_bounded_by_four_n_squared() {
        let c = line(&[0.0, 2.0, 4.0]);
        let (c, v) = normalize_system(&c, &sv(3, 1, &[1.0, 0.0, -1.0])).unwrap();
        let f = monotone_functional(&c, &v).unwrap();
        assert!(f.abs() <= 4.0 * 9.0);
    }

    #[test]
    fn decomposition_examples() {
        let c = line(&[0.0, 2.0, 4.0]);
        let g = full_contact_graph(&c);
        let z = collision_direction(&c, e(1, 2)).unwrap().z;
        let (cap, vg) = decompose_state(&c, &g, &sv(3, 1, &z));
        assert!(max_abs_diff(vg.as_slice(), &z) < 1e-12);
        assert!(cap.as_slice().iter().all(|x| x.abs() < 1e-12));

        // Uniform translation is orthogonal to every collision direction.
        let (cap, vg) = decompose_state(&c, &g, &sv(3, 1, &[1.0, 1.0, 1.0]));
        assert!(vg.as_slice().iter().all(|x| x.abs() < 1e-12));
        assert!(max_abs_diff(cap.as_slice(), &[1.0, 1.0, 1.0]) < 1e-12);
    }

    #[test]
    fn trace_json_lines() {
        let c = line(&[0.0, 2.0]);
        let s = Schedule::Explicit { edges: vec![e(1, 2)] };
        let t = run_schedule(&c, &sv(2, 1, &[1.0, -1.0]), &s, 10);
        let line = t.to_json_lines();
        let rec: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(rec["t"], 1);
        assert_eq!(rec["edge"], serde_json::json!([1, 2]));
        assert_eq!(rec["changed"], true);
        assert!(rec["F"].is_number() && rec["energy"].is_number());
    }
}
