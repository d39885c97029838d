use genus_core::arith::is_prime;
use genus_core::{
    build_matrix_caserule, build_matrix_hilbert, genus_number, genus_via_formula, search, PlaceSets, ProblemInstance,
    SearchSpec,
};
use proptest::prelude::*;

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn instance() -> impl Strategy<Value = Option<ProblemInstance>> {
    (
        -20_000i64..20_000,
        prop::sample::subsequence(SMALL_PRIMES.to_vec(), 0..=3),
        any::<bool>(),
        prop::sample::subsequence(vec![41u64, 43, 47, 53, 59, 61], 0..=2),
    )
        .prop_map(|(d, s0, s_inf, t)| {
            let places = PlaceSets::new(s0, s_inf, t).ok()?;
            ProblemInstance::new(d, places).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn both_pipelines_agree(inst in instance()) {
        let Some(inst) = inst else { return Ok(()) };
        let r = genus_number(&inst).unwrap();
        prop_assert_eq!(r.g, genus_via_formula(&inst).unwrap());
        prop_assert_eq!(build_matrix_caserule(&inst).unwrap(), build_matrix_hilbert(&inst).unwrap());
    }

    #[test]
    fn report_is_consistent(inst in instance()) {
        let Some(inst) = inst else { return Ok(()) };
        let r = genus_number(&inst).unwrap();
        let n = r.matrix.ncols();
        prop_assert_eq!(r.g, 1u64 << r.log2_g);
        prop_assert_eq!(r.log2_g as usize + r.rank, n);
        prop_assert!(r.rank <= r.wt_dim);
        prop_assert_eq!(r.kernel_basis.len(), r.log2_g as usize);
        prop_assert_eq!(2 * r.g_star, r.g * r.ray_class_order);
        prop_assert_eq!(r.sigma.len() <= n, true);
    }

    #[test]
    fn enlarging_t_never_grows_the_row_space(inst in instance(), extra in prop::sample::select(vec![67u64, 71, 73, 79])) {
        let Some(inst) = inst else { return Ok(()) };
        let p = inst.places();
        let mut t = p.t().to_vec();
        t.push(extra);
        let Ok(bigger) = PlaceSets::new(p.s0().to_vec(), p.s_inf(), t) else { return Ok(()) };
        let Ok(bigger) = ProblemInstance::new(inst.d(), bigger) else { return Ok(()) };
        let small = genus_number(&inst).unwrap();
        let big = genus_number(&bigger).unwrap();
        prop_assert!(big.wt_dim <= small.wt_dim);
        prop_assert!(big.log2_g >= small.log2_g);
    }

    #[test]
    fn search_meets_its_target(s0 in prop::sample::subsequence(vec![2u64, 3, 5, 7, 11], 0..=2), m in 1usize..6, k in 1usize..6) {
        let Ok(spec) = SearchSpec::new(PlaceSets::new(s0, true, vec![]).unwrap(), m, k, 100_000) else { return Ok(()) };
        let r = search(&spec).unwrap();
        prop_assert_eq!(r.report.g, 1u64 << k);
        prop_assert_eq!(r.sigma.len(), m);
        prop_assert!(r.sigma.iter().all(|&p| is_prime(p)));
        prop_assert!(r.d > 0 && r.d % 4 == 1);
        prop_assert_eq!(search(&spec).unwrap(), r);
    }
}
