use pinned_core::generate::random_lattice_animal;
use pinned_core::lattice::{
    bareiss_determinant, cofactor_determinant, exact_alpha_certificate, random_conforming_matrix, verify_det_bound,
    QuadraticInteger,
};
use pinned_core::rigidity::alpha_star;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn determinant_routes_agree(seed in any::<u64>(), m in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = random_conforming_matrix(&mut rng, m);
        prop_assert_eq!(cofactor_determinant(&mat), bareiss_determinant(&mat));
        prop_assert!(verify_det_bound(&mat).unwrap().passed());
    }

    #[test]
    fn conjugate_is_multiplicative(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000, d in -1000i64..1000) {
        let x = QuadraticInteger::new(a, b);
        let y = QuadraticInteger::new(c, d);
        prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
        prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn certificate_is_a_lower_bound(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let animal = random_lattice_animal(&mut rng, n);
        let config = animal.to_ball_configuration().unwrap();
        let mut edges = animal.contact_edges();
        edges.shuffle(&mut rng);
        let k = 1 + (seed as usize) % edges.len();
        let set = &edges[..k];
        let e = set[0];
        let cert = exact_alpha_certificate(&animal, set, e).unwrap();
        let float = alpha_star(&config, set, e).unwrap();
        prop_assert!(cert.lower_bound <= float + 1e-9);
        prop_assert_eq!(cert.in_span, float <= 1e-8);
        prop_assert_eq!(&cert.determinant.is_zero(), &cert.in_span);
    }
}
