use pinned_core::bounds::{lattice_bound, max_collisions_bound, per_edge_bound, AlphaSource, TauChoice};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bound_is_monotone(n in 2usize..60, d in 1usize..9, a in 1e-6f64..1.0) {
        let b = |n, d, a| max_collisions_bound(n, d, a, AlphaSource::Given, TauChoice::Exact).unwrap().log2;
        prop_assert!(b(n + 1, d, a) > b(n, d, a));
        prop_assert!(b(n, d, a / 2.0) > b(n, d, a));
        let r = max_collisions_bound(n, d, a, AlphaSource::Given, TauChoice::Exact).unwrap();
        prop_assert!(r.log2_integer_exponent >= r.log2);
        prop_assert!((r.log2 - r.exponent * r.base_log2).abs() <= 1e-9 * r.log2.abs().max(1.0));
    }

    #[test]
    fn per_edge_bound_is_below_general_for_few_edges(n in 2usize..30, a in 1e-3f64..1.0) {
        // any graph has at most τ n / 2 edges
        let general = max_collisions_bound(n, 2, a, AlphaSource::Given, TauChoice::Exact).unwrap();
        let edges = 3 * n;
        let per_edge = per_edge_bound(edges, n, 2, a).unwrap();
        prop_assert!(per_edge.log2 <= general.log2 + 1e-9);
    }

    #[test]
    fn lattice_exact_below_rounded(n in 1usize..500) {
        let r = lattice_bound(n).unwrap();
        prop_assert!(r.exact_below_rounded && r.exact_below_rounded_integer);
    }
}
