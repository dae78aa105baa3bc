use pinned_core::generate::{random_normalized_state, random_tree_configuration};
use pinned_core::search::{exhaustive_max_collisions, greedy_schedule, GreedyPolicy, SearchOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn greedy_never_beats_a_complete_exhaustive_search(seed in any::<u64>(), n in 2usize..5, d in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_tree_configuration(&mut rng, n, d);
        let v = random_normalized_state(&mut rng, n, d);
        let ex = exhaustive_max_collisions(&c, &v, &SearchOptions::default()).unwrap();
        prop_assert!(ex.replays(&c, &v));
        for policy in [GreedyPolicy::Lexicographic, GreedyPolicy::SeededRandom { seed }] {
            let g = greedy_schedule(&c, &v, policy, 1000).unwrap();
            prop_assert!(g.replays(&c, &v));
            if ex.complete && g.best <= 20 {
                prop_assert!(g.best <= ex.best);
            }
        }
    }
}
