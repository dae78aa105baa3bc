//! Random and exhaustive generators for configurations, states and
//! half-space families. All randomness flows from a caller-supplied RNG.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::StateVector;
use crate::foldings::HalfSpace;
use crate::geometry::{full_contact_graph, BallConfiguration};
use crate::lattice::{LatticeConfiguration, NEIGHBOUR_OFFSETS};
use crate::linalg::{dot, norm};

/// Non-touching pairs are kept at least this far beyond contact.
pub const SEPARATION_GAP: f64 = 1e-3;

const MAX_ATTEMPTS: usize = 10_000;

pub fn gaussian_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, len);
        let n = norm(&v);
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize, d: usize) -> StateVector {
    StateVector::from_vec(n, d, gaussian_vector(rng, n * d))
}

/// Uniform on the unit sphere of `R^{nd}`.
pub fn random_unit_state<R: Rng>(rng: &mut R, n: usize, d: usize) -> StateVector {
    StateVector::from_vec(n, d, random_unit_vector(rng, n * d))
}

/// Zero total momentum and unit energy.
pub fn random_normalized_state<R: Rng>(rng: &mut R, n: usize, d: usize) -> StateVector {
    loop {
        let mut v = gaussian_vector(rng, n * d);
        for c in 0..d {
            let mean = (0..n).map(|i| v[i * d + c]).sum::<f64>() / n as f64;
            (0..n).for_each(|i| v[i * d + c] -= mean);
        }
        let e = norm(&v);
        if e > 1e-9 {
            v.iter_mut().for_each(|x| *x /= e);
            return StateVector::from_vec(n, d, v);
        }
    }
}

fn clear_of(centers: &[Vec<f64>], p: &[f64], skip: usize) -> bool {
    centers.iter().enumerate().all(|(k, c)| {
        k == skip || {
            let d2: f64 = c.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= 2.0 + SEPARATION_GAP
        }
    })
}

/// Random configuration whose full contact graph is a spanning tree. Each
/// new ball touches one earlier ball and keeps a gap from all others.
pub fn random_tree_configuration<R: Rng>(rng: &mut R, n: usize, d: usize) -> BallConfiguration {
    assert!(n >= 1 && d >= 1);
    'restart: loop {
        let mut centers = vec![vec![0.0; d]];
        while centers.len() < n {
            let mut placed = false;
            for _ in 0..MAX_ATTEMPTS {
                let parent = rng.gen_range(0..centers.len());
                let u = random_unit_vector(rng, d);
                let p: Vec<f64> = centers[parent].iter().zip(&u).map(|(c, x)| c + 2.0 * x).collect();
                if clear_of(&centers, &p, parent) {
                    centers.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'restart;
            }
        }
        let config = BallConfiguration::new(centers, d).expect("construction avoids overlap");
        if full_contact_graph(&config).is_tree() {
            return config;
        }
    }
}

/// `n` balls on a line, consecutive centers `2 + gaps[k]` apart.
pub fn chain_1d(n: usize, gaps: &[f64]) -> BallConfiguration {
    let mut x = 0.0;
    let mut centers = vec![vec![0.0]];
    for k in 1..n {
        x += 2.0 + gaps.get(k - 1).copied().unwrap_or(0.0);
        centers.push(vec![x]);
    }
    BallConfiguration::new(centers, 1).expect("chain gaps are non-negative")
}

/// Connected sets of `n` triangular-lattice points up to translation, each
/// translated so its smallest point (in `(b, a)` order) is the origin.
pub fn lattice_animals(n: usize) -> Vec<LatticeConfiguration> {
    assert!(n >= 1);
    let mut level: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
    level.insert(vec![(0, 0)]);
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for animal in &level {
            let members: BTreeSet<(i64, i64)> = animal.iter().copied().collect();
            for &(a, b) in animal {
                for (da, db) in NEIGHBOUR_OFFSETS {
                    let p = (a + da, b + db);
                    if members.contains(&p) {
                        continue;
                    }
                    let mut grown: Vec<(i64, i64)> = animal.clone();
                    grown.push(p);
                    next.insert(canonical_translate(grown));
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|pts| LatticeConfiguration::from_pairs(&pts).expect("animals are valid lattice configurations"))
        .collect()
}

fn canonical_translate(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    let &(a0, b0) = pts.iter().min_by_key(|&&(a, b)| (b, a)).expect("non-empty");
    for p in pts.iter_mut() {
        *p = (p.0 - a0, p.1 - b0);
    }
    pts.sort_by_key(|&(a, b)| (b, a));
    pts
}

/// Random connected lattice configuration grown from the origin.
pub fn random_lattice_animal<R: Rng>(rng: &mut R, n: usize) -> LatticeConfiguration {
    let mut pts = vec![(0i64, 0i64)];
    while pts.len() < n {
        let &(a, b) = pts.choose(rng).expect("non-empty");
        let (da, db) = *NEIGHBOUR_OFFSETS.choose(rng).expect("six offsets");
        let p = (a + da, b + db);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    LatticeConfiguration::from_pairs(&pts).expect("grown on the lattice")
}

/// Random lattice animal, rotated by a random angle and placed in a random
/// 2-plane of `R^d` (`d ≥ 2`). Contact graphs are rich in triangles.
pub fn random_contact_rich_configuration<R: Rng>(rng: &mut R, n: usize, d: usize) -> BallConfiguration {
    assert!(d >= 2, "contact-rich configurations need d >= 2");
    let animal = random_lattice_animal(rng, n);
    let e1 = random_unit_vector(rng, d);
    let e2 = loop {
        let g = gaussian_vector(rng, d);
        let p = dot(&g, &e1);
        let r: Vec<f64> = g.iter().zip(&e1).map(|(x, y)| x - p * y).collect();
        let rn = norm(&r);
        if rn > 1e-6 {
            break r.into_iter().map(|x| x / rn).collect::<Vec<f64>>();
        }
    };
    let centers = animal
        .points()
        .iter()
        .map(|p| {
            let [x, y] = p.to_f64();
            (0..d).map(|c| x * e1[c] + y * e2[c]).collect()
        })
        .collect();
    BallConfiguration::new(centers, d).expect("rigid motion of a lattice configuration")
}

/// A random configuration with at least one contact: a tree, a chain, or a
/// contact-rich one, depending on `d` and a coin flip.
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize, d: usize) -> BallConfiguration {
    if d >= 2 && n >= 3 && rng.gen_bool(0.5) {
        random_contact_rich_configuration(rng, n, d)
    } else {
        random_tree_configuration(rng, n, d)
    }
}

/// `m` half-spaces in `R^d` sharing an interior point, with that witness
/// (unit norm) and a random start point. Each normal makes a margin of at
/// least `min_margin` with the witness.
pub fn random_halfspace_family<R: Rng>(
    rng: &mut R,
    m: usize,
    d: usize,
    min_margin: f64,
) -> (Vec<HalfSpace>, Vec<f64>, Vec<f64>) {
    let w = random_unit_vector(rng, d);
    let family = (0..m)
        .map(|_| {
            let mut h = random_unit_vector(rng, d);
            let p = dot(&h, &w);
            if p < 0.0 {
                h.iter_mut().for_each(|x| *x = -*x);
            }
            let p = p.abs();
            if p < min_margin {
                h.iter_mut().zip(&w).for_each(|(x, y)| *x += (min_margin - p) * 2.0 * y);
            }
            HalfSpace::new(h).expect("non-zero normal")
        })
        .collect();
    let start: Vec<f64> = gaussian_vector(rng, d).into_iter().map(|x| 10.0 * x).collect();
    (family, w, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foldings::witness_margin;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn animal_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| lattice_animals(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 11, 44, 186]);
    }

    #[test]
    fn animals_are_connected() {
        for c in lattice_animals(4) {
            let cfg = c.to_ball_configuration().unwrap();
            assert!(full_contact_graph(&cfg).is_connected());
        }
    }

    #[test]
    fn trees_are_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=8 {
            for d in 1..=3 {
                let c = random_tree_configuration(&mut rng, n, d);
                assert_eq!(c.len(), n);
                assert!(full_contact_graph(&c).is_tree());
            }
        }
    }

    #[test]
    fn contact_rich_keeps_lattice_contacts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=4 {
            let c = random_contact_rich_configuration(&mut rng, 6, d);
            assert!(full_contact_graph(&c).is_connected());
        }
    }

    #[test]
    fn normalized_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_normalized_state(&mut rng, 4, 2);
        assert!((s.energy() - 1.0).abs() < 1e-12);
        assert!(s.momentum().iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn halfspace_families_have_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let m = rng.gen_range(1..=5);
            let d = rng.gen_range(1..=4);
            let (hs, w, _) = random_halfspace_family(&mut rng, m, d, 0.05);
            assert!(witness_margin(&hs, &w) > 0.0);
        }
    }
}
