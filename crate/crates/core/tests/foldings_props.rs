use pinned_core::foldings::{fold, orbit, witness_margin, HalfSpace, OrbitPolicy, DEFAULT_ORBIT_BUDGET};
use pinned_core::generate::{gaussian_vector, random_halfspace_family};
use pinned_core::linalg::{max_abs_diff, norm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn folding_is_non_expansive_and_idempotent(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HalfSpace::new(gaussian_vector(&mut rng, d)).unwrap();
        let (x, y) = (gaussian_vector(&mut rng, d), gaussian_vector(&mut rng, d));
        let (fx, fy) = (fold(&x, &h), fold(&y, &h));
        prop_assert!(dist(&fx, &fy) <= dist(&x, &y) + 1e-12);
        prop_assert!(max_abs_diff(&fold(&fx, &h), &fx) <= 1e-12);
        prop_assert!(h.margin(&fx) >= -1e-12);
        prop_assert!((norm(&fx) - norm(&x)).abs() <= 1e-12);
    }

    #[test]
    fn every_policy_stabilizes(seed in any::<u64>(), m in 1usize..6, d in 1usize..5, policy_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (hs, w, start) = random_halfspace_family(&mut rng, m, d, 0.05);
        prop_assert!(witness_margin(&hs, &w) > 0.0);
        for policy in [OrbitPolicy::RoundRobin, OrbitPolicy::SeededRandom { seed: policy_seed }] {
            let o = orbit(&start, &hs, &policy, &w, DEFAULT_ORBIT_BUDGET).unwrap();
            prop_assert!(o.is_stable());
            prop_assert!(o.points.iter().all(|p| (norm(p) - norm(&start)).abs() <= 1e-9));
        }
    }
}
