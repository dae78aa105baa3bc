//! Greedy and exhaustive exploration of collision orders.
//!
//! A step only counts when it changes the state, and every such step strictly
//! increases the monotone functional, so the search graph over states is
//! acyclic. The exhaustive search caches each visited state (quantized) with
//! the longest continuation found below it.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, AlphaSource, TauChoice};
use crate::dynamics::{collide, run_schedule_lean, Schedule, StateVector, DEFAULT_MAX_STEPS};
use crate::generate::random_unit_state;
use crate::geometry::{full_contact_graph, BallConfiguration, Edge};
use crate::rigidity::{self, AlphaOptions};

pub const DEFAULT_DEPTH_CAP: usize = 20;
pub const DEFAULT_MAX_BRANCHING: usize = 6;
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;
/// Grid used to identify states in the exhaustive search cache.
pub const STATE_QUANTUM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("{count} contact edges exceed the branching limit of {limit}")]
    TooManyEdges { count: usize, limit: usize },
    #[error("node budget of {budget} exhausted; best so far {}", .best.best)]
    BudgetExceeded { budget: u64, best: Box<SearchResult> },
    #[error("state has length {found}, expected {expected}")]
    StateShape { expected: usize, found: usize },
    #[error("at least one sample is required")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exhaustive,
    Greedy,
    RandomRestart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GreedyPolicy {
    /// First approaching pair in lexicographic order.
    Lexicographic,
    SeededRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub alpha: f64,
    pub tau: u128,
    pub log2_best: f64,
    pub log2_bound: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicReference {
    pub target: f64,
    pub attained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub method: SearchMethod,
    /// Largest number of state-changing steps found.
    pub best: usize,
    pub witness: Vec<Edge>,
    pub nodes: u64,
    /// The search was not cut short by its depth cap or step budget.
    pub complete: bool,
    pub depth_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cubic_reference: Option<CubicReference>,
}

impl SearchResult {
    /// Replays the witness and checks that every step changes the state and
    /// the count matches.
    pub fn replays(&self, config: &BallConfiguration, state0: &StateVector) -> bool {
        let schedule = Schedule::Explicit { edges: self.witness.clone() };
        let trace = run_schedule_lean(config, state0, &schedule, self.witness.len());
        trace.collisions == self.best && trace.steps.iter().all(|s| s.changed)
    }
}

fn check_state(config: &BallConfiguration, state: &StateVector) -> Result<(), SearchError> {
    if state.len() != config.state_len() {
        return Err(SearchError::StateShape { expected: config.state_len(), found: state.len() });
    }
    Ok(())
}

/// Edges whose exchange changes `state`, in lexicographic order.
pub fn active_edges(config: &BallConfiguration, state: &StateVector, edges: &[Edge]) -> Vec<(Edge, StateVector)> {
    edges
        .iter()
        .filter_map(|&e| {
            let next = collide(config, state, e);
            next.differs_from(state).then_some((e, next))
        })
        .collect()
}

pub fn greedy_schedule(
    config: &BallConfiguration,
    state0: &StateVector,
    policy: GreedyPolicy,
    max_steps: usize,
) -> Result<SearchResult, SearchError> {
    check_state(config, state0)?;
    let edges = full_contact_graph(config).edge_vec();
    let mut rng = match policy {
        GreedyPolicy::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        GreedyPolicy::Lexicographic => None,
    };
    let mut state = state0.clone();
    let mut witness = Vec::new();
    let mut nodes = 0;
    let mut complete = false;
    while witness.len() < max_steps {
        nodes += 1;
        let mut active = active_edges(config, &state, &edges);
        if active.is_empty() {
            complete = true;
            break;
        }
        let pick = match rng.as_mut() {
            Some(r) => r.gen_range(0..active.len()),
            None => 0,
        };
        let (e, next) = active.swap_remove(pick);
        witness.push(e);
        state = next;
    }
    if !complete {
        complete = active_edges(config, &state, &edges).is_empty();
    }
    Ok(SearchResult {
        method: SearchMethod::Greedy,
        best: witness.len(),
        witness,
        nodes,
        complete,
        depth_cap: None,
        bound: None,
        cubic_reference: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub depth_cap: usize,
    pub max_branching: usize,
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            depth_cap: DEFAULT_DEPTH_CAP,
            max_branching: DEFAULT_MAX_BRANCHING,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone)]
struct Cached {
    value: usize,
    /// The continuation was not limited by the depth cap.
    exact: bool,
    path: Vec<Edge>,
}

struct Dfs<'a> {
    config: &'a BallConfiguration,
    edges: &'a [Edge],
    memo: HashMap<Vec<i64>, Cached>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

fn quantize(state: &StateVector) -> Vec<i64> {
    state.as_slice().iter().map(|x| (x / STATE_QUANTUM).round() as i64).collect()
}

impl Dfs<'_> {
    /// Longest run of changing steps from `state` using at most `remaining`
    /// steps; `exact` when no branch hit the cap.
    fn visit(&mut self, state: &StateVector, remaining: usize) -> Cached {
        let key = quantize(state);
        if let Some(c) = self.memo.get(&key) {
            if c.exact {
                let value = c.value.min(remaining);
                return Cached { value, exact: c.value <= remaining, path: c.path[..value].to_vec() };
            }
            if remaining <= c.value {
                return Cached { value: remaining, exact: false, path: c.path[..remaining].to_vec() };
            }
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return Cached { value: 0, exact: false, path: Vec::new() };
        }
        let active = active_edges(self.config, state, self.edges);
        let result = if active.is_empty() {
            Cached { value: 0, exact: true, path: Vec::new() }
        } else if remaining == 0 {
            Cached { value: 0, exact: false, path: Vec::new() }
        } else {
            let mut best: Option<Cached> = None;
            let mut exact = true;
            for (e, next) in active {
                let sub = self.visit(&next, remaining - 1);
                if self.exhausted {
                    return best.unwrap_or(Cached { value: 0, exact: false, path: Vec::new() });
                }
                exact &= sub.exact;
                if best.as_ref().is_none_or(|b| sub.value + 1 > b.value) {
                    let mut path = Vec::with_capacity(sub.path.len() + 1);
                    path.push(e);
                    path.extend(sub.path);
                    best = Some(Cached { value: sub.value + 1, exact: false, path });
                }
            }
            let mut b = best.expect("at least one active edge");
            b.exact = exact;
            b
        };
        self.memo.insert(key, result.clone());
        result
    }
}

/// Maximum number of changing steps from `state0` over all orders of length
/// at most `depth_cap`. The first step is split across worker threads.
pub fn exhaustive_max_collisions(
    config: &BallConfiguration,
    state0: &StateVector,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    check_state(config, state0)?;
    let edges = full_contact_graph(config).edge_vec();
    if edges.len() > opts.max_branching {
        return Err(SearchError::TooManyEdges { count: edges.len(), limit: opts.max_branching });
    }
    let root = active_edges(config, state0, &edges);
    let finish = |best: usize, witness: Vec<Edge>, nodes: u64, complete: bool| SearchResult {
        method: SearchMethod::Exhaustive,
        best,
        witness,
        nodes,
        complete,
        depth_cap: Some(opts.depth_cap),
        bound: None,
        cubic_reference: None,
    };
    if root.is_empty() || opts.depth_cap == 0 {
        return Ok(finish(0, Vec::new(), 1, root.is_empty()));
    }
    let per_branch = opts.node_budget / root.len() as u64;
    let branches: Vec<(Edge, Cached, u64, bool)> = root
        .into_par_iter()
        .map(|(e, next)| {
            let mut dfs = Dfs {
                config,
                edges: &edges,
                memo: HashMap::new(),
                nodes: 0,
                budget: per_branch.max(1),
                exhausted: false,
            };
            let sub = dfs.visit(&next, opts.depth_cap - 1);
            (e, sub, dfs.nodes, dfs.exhausted)
        })
        .collect();
    let mut nodes = 1;
    let mut exhausted = false;
    let mut complete = true;
    let mut best: Option<(usize, Vec<Edge>)> = None;
    for (e, sub, n, ex) in branches {
        nodes += n;
        exhausted |= ex;
        complete &= sub.exact;
        if best.as_ref().is_none_or(|(b, _)| sub.value + 1 > *b) {
            let mut path = vec![e];
            path.extend(sub.path);
            best = Some((sub.value + 1, path));
        }
    }
    let (value, witness) = best.expect("root had active edges");
    let result = finish(value, witness, nodes, complete && !exhausted);
    if exhausted {
        return Err(SearchError::BudgetExceeded { budget: opts.node_budget, best: Box::new(result) });
    }
    Ok(result)
}

/// Compares `result.best` with the main bound evaluated at the exhaustive
/// `α` of `config`. Returns `None` when `α` is undefined (no contacts, or
/// every candidate distance is zero).
pub fn compare_with_bound(config: &BallConfiguration, best: usize) -> Option<BoundComparison> {
    let report = rigidity::alpha(config, &AlphaOptions::default()).ok()?;
    let bound = bounds::max_collisions_bound(
        config.len(),
        config.dimension(),
        report.alpha.min(1.0),
        AlphaSource::Exhaustive,
        TauChoice::Exact,
    )
    .ok()?;
    let log2_best = (best as f64).log2();
    Some(BoundComparison {
        alpha: report.alpha,
        tau: bound.tau.expect("general bound records tau"),
        log2_best,
        log2_bound: bound.log2,
        within: best == 0 || log2_best <= bound.log2,
    })
}

/// `n³/27` attainment record for `n ≥ 3`, `d ≥ 2`.
pub fn cubic_reference(config: &BallConfiguration, best: usize) -> Option<CubicReference> {
    if config.dimension() < 2 {
        return None;
    }
    let target = bounds::lower_bound_reference(config.len()).ok()?;
    Some(CubicReference { target, attained: best as f64 >= target })
}

/// Attaches the bound comparison and the cubic reference to a result.
pub fn annotate(config: &BallConfiguration, mut result: SearchResult) -> SearchResult {
    result.bound = compare_with_bound(config, result.best);
    result.cubic_reference = cubic_reference(config, result.best);
    result
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sample: usize,
    pub state: Vec<f64>,
    pub best: usize,
    pub complete: bool,
    /// Largest count over samples `0..=sample`.
    pub running_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub best: SearchResult,
    pub best_state: Vec<f64>,
}

/// Exhaustive search from `samples` random unit-energy states drawn from a
/// seeded stream; sample `k` is the same for every sample count.
pub fn velocity_sweep(
    config: &BallConfiguration,
    samples: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SweepReport, SearchError> {
    if samples == 0 {
        return Err(SearchError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<StateVector> = (0..samples)
        .map(|_| random_unit_state(&mut rng, config.len(), config.dimension()))
        .collect();
    let mut rows = Vec::with_capacity(samples);
    let mut best: Option<(SearchResult, Vec<f64>)> = None;
    let mut running = 0;
    for (k, s) in states.iter().enumerate() {
        let r = match exhaustive_max_collisions(config, s, opts) {
            Ok(r) => r,
            Err(SearchError::BudgetExceeded { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        running = running.max(r.best);
        rows.push(SweepRow {
            sample: k,
            state: s.as_slice().to_vec(),
            best: r.best,
            complete: r.complete,
            running_max: running,
        });
        if best.as_ref().is_none_or(|(b, _)| r.best > b.best) {
            best = Some((r, s.as_slice().to_vec()));
        }
    }
    let (mut best, best_state) = best.expect("samples >= 1");
    best.method = SearchMethod::RandomRestart;
    Ok(SweepReport { seed, rows, best, best_state })
}

/// Default step budget for greedy runs.
pub fn default_greedy_budget() -> usize {
    DEFAULT_MAX_STEPS
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> BallConfiguration {
        BallConfiguration::new(xs.iter().map(|&x| vec![x]).collect(), 1).unwrap()
    }

    fn sv(n: usize, d: usize, v: &[f64]) -> StateVector {
        StateVector::from_vec(n, d, v.to_vec())
    }

    #[test]
    fn two_balls() {
        let c = line(&[0.0, 2.0]);
        let s = sv(2, 1, &[1.0, -1.0]);
        let g = greedy_schedule(&c, &s, GreedyPolicy::Lexicographic, 100).unwrap();
        assert_eq!(g.best, 1);
        assert!(g.complete);
        let x = exhaustive_max_collisions(&c, &s, &SearchOptions::default()).unwrap();
        assert_eq!(x.best, 1);
        assert!(x.replays(&c, &s));
    }

    #[test]
    fn separating_state_has_no_collisions() {
        let c = line(&[0.0, 2.0, 4.0]);
        let s = sv(3, 1, &[-1.0, 0.0, 1.0]);
        assert_eq!(greedy_schedule(&c, &s, GreedyPolicy::Lexicographic, 100).unwrap().best, 0);
        assert_eq!(exhaustive_max_collisions(&c, &s, &SearchOptions::default()).unwrap().best, 0);
    }

    #[test]
    fn collinear_three_regression() {
        let c = line(&[0.0, 2.0, 4.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = sv(3, 1, &[h, 0.0, -h]);
        let g = greedy_schedule(&c, &s, GreedyPolicy::Lexicographic, 100).unwrap();
        let x = exhaustive_max_collisions(&c, &s, &SearchOptions::default()).unwrap();
        // equal masses on a line: the velocities get fully reversed in 3 exchanges
        assert_eq!(x.best, 3);
        assert_eq!(g.best, x.best);
        assert!(x.complete && x.replays(&c, &s) && g.replays(&c, &s));
        let annotated = annotate(&c, x);
        assert!(annotated.bound.unwrap().within);
        assert!(annotated.cubic_reference.is_none());
    }

    #[test]
    fn depth_cap_truncates() {
        let c = line(&[0.0, 2.0, 4.0]);
        let s = sv(3, 1, &[1.0, 0.0, -1.0]);
        let opts = SearchOptions { depth_cap: 2, ..Default::default() };
        let x = exhaustive_max_collisions(&c, &s, &opts).unwrap();
        assert_eq!(x.best, 2);
        assert!(!x.complete);
    }

    #[test]
    fn budget_error_keeps_best() {
        let c = line(&[0.0, 2.0, 4.0, 6.0]);
        let s = sv(4, 1, &[3.0, 1.0, -1.0, -3.0]);
        let opts = SearchOptions { node_budget: 2, ..Default::default() };
        match exhaustive_max_collisions(&c, &s, &opts) {
            Err(SearchError::BudgetExceeded { best, .. }) => assert!(best.replays(&c, &s)),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn too_many_edges() {
        let c = line(&[0.0, 2.0, 4.0, 6.0]);
        let s = sv(4, 1, &[1.0, 0.0, 0.0, -1.0]);
        let opts = SearchOptions { max_branching: 2, ..Default::default() };
        assert!(matches!(
            exhaustive_max_collisions(&c, &s, &opts),
            Err(SearchError::TooManyEdges { count: 3, limit: 2 })
        ));
    }

    #[test]
    fn sweep_is_monotone_and_contains_single_run() {
        let c = line(&[0.0, 2.0, 4.0]);
        let opts = SearchOptions::default();
        let one = velocity_sweep(&c, 1, 5, &opts).unwrap();
        let s0 = StateVector::from_vec(3, 1, one.rows[0].state.clone());
        assert_eq!(one.best.best, exhaustive_max_collisions(&c, &s0, &opts).unwrap().best);
        let many = velocity_sweep(&c, 20, 5, &opts).unwrap();
        assert_eq!(many.rows[0].state, one.rows[0].state);
        assert!(many.rows.windows(2).all(|w| w[0].running_max <= w[1].running_max));
        let g = greedy_schedule(&c, &s0, GreedyPolicy::Lexicographic, 100).unwrap();
        assert!(many.best.best >= g.best);
    }

    #[test]
    fn random_greedy_is_reproducible() {
        let c = line(&[0.0, 2.0, 4.0, 6.0]);
        let s = sv(4, 1, &[3.0, 1.0, -1.0, -3.0]);
        let a = greedy_schedule(&c, &s, GreedyPolicy::SeededRandom { seed: 9 }, 1000).unwrap();
        let b = greedy_schedule(&c, &s, GreedyPolicy::SeededRandom { seed: 9 }, 1000).unwrap();
        assert_eq!(a, b);
        assert!(a.replays(&c, &s));
    }
}
