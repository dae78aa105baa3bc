//! Foldings of `R^m` and the orbits they generate.
//!
//! A folding is the identity on a closed half-space `H = {v : v·h ≥ 0}` and
//! the reflection in `∂H` on its complement. Sequences of foldings over a
//! finite family whose intersection has interior always stabilize, but the
//! number of distinct points visited is not bounded by the family size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm};

/// Slack allowed when deciding that a point already lies in a half-space.
pub const STABILITY_SLACK: f64 = 1e-12;

pub const DEFAULT_ORBIT_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoldingError {
    #[error("half-space normal must be non-zero and finite")]
    ZeroNormal,
    #[error("normal has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no half-spaces given")]
    EmptyFamily,
    #[error("witness margin {margin} is not positive; the intersection may have empty interior")]
    NoInteriorWitness { margin: f64 },
    #[error("policy refers to half-space {index} of {count}")]
    BadPolicyIndex { index: usize, count: usize },
    #[error("orbit did not stabilize within {budget} steps")]
    BudgetExhausted { budget: usize, partial: OrbitResult },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    normal: Vec<f64>,
}

impl HalfSpace {
    /// Normalizes `h` to unit length.
    pub fn new(h: Vec<f64>) -> Result<Self, FoldingError> {
        let n = norm(&h);
        if !(n.is_finite() && n > 0.0) {
            return Err(FoldingError::ZeroNormal);
        }
        Ok(HalfSpace {
            normal: h.into_iter().map(|x| x / n).collect(),
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn dimension(&self) -> usize {
        self.normal.len()
    }

    /// Signed distance `v·h` from `∂H`; non-negative inside.
    pub fn margin(&self, v: &[f64]) -> f64 {
        dot(v, &self.normal)
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        self.margin(v) >= 0.0
    }
}

pub fn fold(point: &[f64], hs: &HalfSpace) -> Vec<f64> {
    let mut out = point.to_vec();
    fold_in_place(&mut out, hs);
    out
}

/// Folds in place and reports whether the point moved.
pub fn fold_in_place(point: &mut [f64], hs: &HalfSpace) -> bool {
    let m = hs.margin(point);
    if m >= 0.0 {
        return false;
    }
    point
        .iter_mut()
        .zip(&hs.normal)
        .for_each(|(p, h)| *p -= 2.0 * m * h);
    true
}

/// A finite description of an infinite sequence of half-space indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrbitPolicy {
    /// `0, 1, …, k−1, 0, 1, …`
    RoundRobin,
    /// The word repeated forever.
    Periodic { word: Vec<usize> },
    /// Independent uniform choices from a seeded generator.
    SeededRandom { seed: u64 },
}

impl OrbitPolicy {
    /// Indices the policy applies infinitely often.
    fn support(&self, count: usize) -> Result<Vec<usize>, FoldingError> {
        match self {
            OrbitPolicy::RoundRobin | OrbitPolicy::SeededRandom { .. } => Ok((0..count).collect()),
            OrbitPolicy::Periodic { word } => {
                if word.is_empty() {
                    return Err(FoldingError::EmptyFamily);
                }
                if let Some(&index) = word.iter().find(|&&i| i >= count) {
                    return Err(FoldingError::BadPolicyIndex { index, count });
                }
                let mut s = word.clone();
                s.sort_unstable();
                s.dedup();
                Ok(s)
            }
        }
    }

    fn sequence(&self, count: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match self {
            OrbitPolicy::RoundRobin => Box::new((0..count).cycle()),
            OrbitPolicy::Periodic { word } => Box::new(word.iter().copied().cycle()),
            OrbitPolicy::SeededRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Box::new(std::iter::repeat_with(move || rng.gen_range(0..count)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitResult {
    /// Distinct points in visiting order, starting with the start point.
    pub points: Vec<Vec<f64>>,
    /// Index of the step after which the point never moves again.
    pub stabilized_at: Option<usize>,
    pub steps: usize,
    /// Half-space index that produced each point after the first.
    pub folds: Vec<usize>,
}

impl OrbitResult {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn final_point(&self) -> &[f64] {
        self.points.last().expect("orbit holds the start point")
    }

    pub fn is_stable(&self) -> bool {
        self.stabilized_at.is_some()
    }
}

/// Smallest margin of `witness` over the family; positive means interior.
pub fn witness_margin(halfspaces: &[HalfSpace], witness: &[f64]) -> f64 {
    let scale = norm(witness);
    if scale == 0.0 {
        return 0.0;
    }
    halfspaces
        .iter()
        .map(|h| h.margin(witness) / scale)
        .fold(f64::INFINITY, f64::min)
}

fn in_all(halfspaces: &[HalfSpace], support: &[usize], p: &[f64]) -> bool {
    let scale = 1.0 + norm(p);
    support
        .iter()
        .all(|&i| halfspaces[i].margin(p) >= -STABILITY_SLACK * scale)
}

/// Iterates `v_j = F_{H_{i_j}}(v_{j−1})` until the point lies in every
/// half-space the policy can still apply, or the budget runs out.
pub fn orbit(
    start: &[f64],
    halfspaces: &[HalfSpace],
    policy: &OrbitPolicy,
    witness: &[f64],
    budget: usize,
) -> Result<OrbitResult, FoldingError> {
    if halfspaces.is_empty() {
        return Err(FoldingError::EmptyFamily);
    }
    let dim = halfspaces[0].dimension();
    for v in halfspaces
        .iter()
        .map(HalfSpace::normal)
        .chain([start, witness])
    {
        if v.len() != dim {
            return Err(FoldingError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let margin = witness_margin(halfspaces, witness);
    if margin.is_nan() || margin <= STABILITY_SLACK {
        return Err(FoldingError::NoInteriorWitness { margin });
    }
    let support = policy.support(halfspaces.len())?;

    let mut current = start.to_vec();
    let mut result = OrbitResult {
        points: vec![current.clone()],
        stabilized_at: None,
        steps: 0,
        folds: Vec::new(),
    };
    if in_all(halfspaces, &support, &current) {
        result.stabilized_at = Some(0);
        return Ok(result);
    }
    for (step, idx) in policy.sequence(halfspaces.len()).take(budget).enumerate() {
        result.steps = step + 1;
        if fold_in_place(&mut current, &halfspaces[idx]) {
            result.points.push(current.clone());
            result.folds.push(idx);
            if in_all(halfspaces, &support, &current) {
                result.stabilized_at = Some(step + 1);
                return Ok(result);
            }
        }
    }
    Err(FoldingError::BudgetExhausted {
        budget,
        partial: result,
    })
}

/// Two half-planes whose normals are almost opposite, with an alternating
/// schedule and a start point whose orbit has more than `target` points.
#[derive(Debug, Clone, Serialize)]
pub struct AdversarialFamily {
    pub halfspaces: Vec<HalfSpace>,
    pub start: Vec<f64>,
    pub policy: OrbitPolicy,
    pub witness: Vec<f64>,
    /// Angular gap `|(θ1 − θ2) − π|`.
    pub epsilon: f64,
    pub orbit_size: usize,
}

fn two_halfplanes(epsilon: f64) -> (Vec<HalfSpace>, Vec<f64>) {
    let theta2 = std::f64::consts::PI - epsilon;
    let h1 = HalfSpace::new(vec![1.0, 0.0]).expect("unit normal");
    let h2 = HalfSpace::new(vec![theta2.cos(), theta2.sin()]).expect("unit normal");
    // The wedge {x ≥ 0, y ≥ x·cot ε} has opening angle ε around direction
    // π/2 − ε/2.
    let mid = std::f64::consts::FRAC_PI_2 - epsilon / 2.0;
    (vec![h1, h2], vec![mid.cos(), mid.sin()])
}

pub fn adversarial_two_halfplanes(target: usize) -> AdversarialFamily {
    let target = target.max(1);
    let start = vec![0.0, -1.0];
    let policy = OrbitPolicy::RoundRobin;
    let mut epsilon = std::f64::consts::PI / (2.0 * target as f64);
    loop {
        let (halfspaces, witness) = two_halfplanes(epsilon);
        let budget = (64.0 * std::f64::consts::PI / epsilon) as usize + 16;
        if let Ok(orbit) = orbit(&start, &halfspaces, &policy, &witness, budget) {
            if orbit.size() > target {
                return AdversarialFamily {
                    halfspaces,
                    start,
                    policy,
                    witness,
                    epsilon,
                    orbit_size: orbit.size(),
                };
            }
        }
        epsilon /= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(v: &[f64]) -> HalfSpace {
        HalfSpace::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fold_examples() {
        let h = hs(&[0.6, 0.8]);
        assert_eq!(fold(&[0.6, 0.8], &h), vec![0.6, 0.8]);
        let r = fold(&[-0.6, -0.8], &h);
        assert!((r[0] - 0.6).abs() < 1e-15 && (r[1] - 0.8).abs() < 1e-15);
        assert_eq!(fold(&[3.0, -2.0], &hs(&[0.0, 1.0])), vec![3.0, 2.0]);
    }

    #[test]
    fn zero_normal_rejected() {
        assert_eq!(HalfSpace::new(vec![0.0, 0.0]), Err(FoldingError::ZeroNormal));
    }

    #[test]
    fn start_inside_is_fixed() {
        let fam = vec![hs(&[1.0, 0.0]), hs(&[0.0, 1.0])];
        let o = orbit(&[1.0, 2.0], &fam, &OrbitPolicy::RoundRobin, &[1.0, 1.0], 10).unwrap();
        assert_eq!(o.size(), 1);
        assert_eq!(o.stabilized_at, Some(0));
    }

    #[test]
    fn single_halfspace_folds_once() {
        let fam = vec![hs(&[0.0, 1.0])];
        let o = orbit(&[1.0, -1.0], &fam, &OrbitPolicy::RoundRobin, &[0.0, 1.0], 10).unwrap();
        assert_eq!(o.size(), 2);
        assert_eq!(o.stabilized_at, Some(1));
        assert_eq!(o.final_point(), &[1.0, 1.0]);
    }

    #[test]
    fn right_angle_orbits_are_short() {
        let fam = vec![hs(&[1.0, 0.0]), hs(&[0.0, 1.0])];
        for k in 0..64 {
            let a = k as f64 * std::f64::consts::TAU / 64.0 + 0.01;
            let start = [a.cos(), a.sin()];
            let o = orbit(&start, &fam, &OrbitPolicy::RoundRobin, &[1.0, 1.0], 100).unwrap();
            assert!(o.size() <= 4, "orbit of size {}", o.size());
        }
    }

    #[test]
    fn witness_validated() {
        // Opposite half-planes intersect in a line only.
        let fam = vec![hs(&[1.0, 0.0]), hs(&[-1.0, 0.0])];
        let err = orbit(&[1.0, 1.0], &fam, &OrbitPolicy::RoundRobin, &[0.0, 1.0], 10).unwrap_err();
        assert!(matches!(err, FoldingError::NoInteriorWitness { .. }));
    }

    #[test]
    fn periodic_word_limits_support() {
        // H2 is never applied, so the orbit stops once inside H1 alone.
        let fam = vec![hs(&[1.0, 0.0]), hs(&[0.0, 1.0])];
        let policy = OrbitPolicy::Periodic { word: vec![0] };
        let o = orbit(&[-1.0, -1.0], &fam, &policy, &[1.0, 1.0], 10).unwrap();
        assert_eq!(o.final_point(), &[1.0, -1.0]);
        let bad = OrbitPolicy::Periodic { word: vec![2] };
        assert!(matches!(
            orbit(&[-1.0, -1.0], &fam, &bad, &[1.0, 1.0], 10),
            Err(FoldingError::BadPolicyIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn budget_exhaustion_keeps_partial_orbit() {
        let fam = adversarial_two_halfplanes(50);
        let err = orbit(&fam.start, &fam.halfspaces, &fam.policy, &fam.witness, 5).unwrap_err();
        match err {
            FoldingError::BudgetExhausted { budget, partial } => {
                assert_eq!(budget, 5);
                assert_eq!(partial.steps, 5);
                assert!(partial.size() > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adversarial_orbits_grow() {
        for m in [1, 10, 100] {
            let fam = adversarial_two_halfplanes(m);
            let o = orbit(&fam.start, &fam.halfspaces, &fam.policy, &fam.witness, 10_000_000)
                .unwrap();
            assert_eq!(o.size(), fam.orbit_size);
            assert!(o.size() > m);
        }
    }
}
