use num_bigint::BigInt;
use num_rational::BigRational;
use ppcount_core::endo::{HermEnd, IsogenyConfig};
use ppcount_core::period::{
    degree_checks, endo_pair_from, endo_residual, rosati_analytic, rosati_rational, run_suite,
    verify_hermitian_criterion, PeriodConfig, CONSTRUCTION_TOL, DET_REL_TOL, IDENTITY_TOL,
};
use proptest::prelude::*;

fn chain() -> impl Strategy<Value = (PeriodConfig, IsogenyConfig)> {
    let degrees = prop_oneof![
        Just(vec![1u64]),
        (2u64..=6).prop_map(|d| vec![1, d]),
        Just(vec![1, 2, 4]),
        Just(vec![1, 3, 3]),
    ];
    (degrees, -9i64..=9, 1i64..=9, 1i64..=9, 1i64..=9).prop_map(|(d, pn, pd, qn, qd)| {
        let p = BigRational::new(BigInt::from(pn), BigInt::from(pd));
        let q = BigRational::new(BigInt::from(qn), BigInt::from(qd));
        (PeriodConfig::chain(p, q, &d).unwrap(), IsogenyConfig::new(&d).unwrap())
    })
}

fn endo(c: &IsogenyConfig, coeffs: &[i64]) -> HermEnd {
    let n = c.n();
    HermEnd::new(c, coeffs[..n * n].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructed_pairs_satisfy_the_invariants(
        (cfg, c) in chain(),
        coeffs in prop::collection::vec(-5i64..=5, 9),
    ) {
        let h = endo(&c, &coeffs);
        let pair = endo_pair_from(&h, &cfg).unwrap();
        prop_assert!(endo_residual(&pair, &cfg).unwrap() <= CONSTRUCTION_TOL);
        let rr = rosati_rational(&pair.r).unwrap();
        prop_assert_eq!(rosati_rational(&rr).unwrap(), pair.r.clone());
        let twice = rosati_analytic(&rosati_analytic(&pair.a, &cfg), &cfg);
        let gap = (&twice - &pair.a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(gap <= IDENTITY_TOL);
        prop_assert!(degree_checks(&pair, DET_REL_TOL).pass);
        let fixed = verify_hermitian_criterion(&pair, &cfg, IDENTITY_TOL).unwrap();
        prop_assert_eq!(fixed, h.is_hermitian());
    }

    #[test]
    fn rosati_images_correspond((cfg, c) in chain(), coeffs in prop::collection::vec(-5i64..=5, 9)) {
        let h = endo(&c, &coeffs);
        let pair = endo_pair_from(&h, &cfg).unwrap();
        let dual = endo_pair_from(&h.conj_transpose(), &cfg).unwrap();
        prop_assert_eq!(rosati_rational(&pair.r).unwrap(), dual.r.clone());
        let gap = (&rosati_analytic(&pair.a, &cfg) - &dual.a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(gap <= IDENTITY_TOL);
    }
}

#[test]
fn suites_pass_on_standard_chains() {
    for degrees in [vec![1], vec![1, 2], vec![1, 3], vec![1, 2, 4], vec![1, 1, 1]] {
        let report = run_suite(&degrees, 20, 11, None).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.checks.len(), 6);
    }
}

#[test]
fn suite_is_reproducible() {
    let a = run_suite(&[1, 2, 4], 10, 5, None).unwrap();
    let b = run_suite(&[1, 2, 4], 10, 5, None).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
