use num_bigint::BigInt;
use ppcount_core::endo::{phi_forward, phi_surjective_lift};
use ppcount_core::forms::{class_number_tilde, enumerate_reduced, BinaryForm, Unimodular2};
use proptest::prelude::*;

fn unimodular() -> impl Strategy<Value = Unimodular2> {
    prop::array::uniform4(-6i64..=6)
        .prop_filter_map("det ±1", |[p, q, r, s]| Unimodular2::from_i64([[p, q], [r, s]]).ok())
}

fn positive_form() -> impl Strategy<Value = BinaryForm> {
    (1i64..40, -40i64..40, 1i64..40)
        .prop_filter("positive definite", |&(a, b, c)| a * c - b * b > 0)
        .prop_map(|(a, b, c)| BinaryForm::new(a, b, c))
}

proptest! {
    #[test]
    fn reduction_lands_in_the_domain(f in positive_form()) {
        let (r, t) = f.reduce().unwrap();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(f.transform(&t), r.clone());
        prop_assert_eq!(r.det(), f.det());
        prop_assert_eq!(r.reduce().unwrap().0, r);
    }

    #[test]
    fn reduction_is_a_class_invariant(f in positive_form(), t in unimodular()) {
        let g = f.transform(&t);
        prop_assert_eq!(g.reduce().unwrap().0, f.reduce().unwrap().0);
        let w = f.is_equivalent(&g).unwrap().expect("equivalent");
        prop_assert_eq!(f.transform(&w), g);
    }

    #[test]
    fn transform_composes(f in positive_form(), s in unimodular(), t in unimodular()) {
        prop_assert_eq!(f.transform(&s).transform(&t), f.transform(&s.mul(&t)));
        prop_assert_eq!(f.transform(&t).transform(&t.inverse()), f);
    }

    #[test]
    fn lift_round_trip(d in 1u64..200, pick in any::<prop::sample::Index>()) {
        let reps = enumerate_reduced(&BigInt::from(d), true);
        let b = pick.get(&reps);
        let (a, t) = phi_surjective_lift(b, d).unwrap();
        prop_assert!(a.is_polarization_rep());
        let back = phi_forward(&a).unwrap();
        prop_assert_eq!(b.transform(&t), back.clone());
        prop_assert!(back.is_equivalent(b).unwrap().is_some());
    }
}

#[test]
fn reduced_representatives_are_pairwise_inequivalent() {
    for d in 1..=60 {
        let reps = enumerate_reduced(&BigInt::from(d), false);
        for (i, f) in reps.iter().enumerate() {
            assert!(f.is_reduced() && f.det() == BigInt::from(d));
            for g in &reps[i + 1..] {
                assert!(f.is_equivalent(g).unwrap().is_none(), "{f:?} ~ {g:?}");
            }
        }
    }
}

#[test]
fn small_class_numbers() {
    // primitive classes of ac - b² = d under GL₂(ℤ), counted by hand
    let expected = [1, 1, 2, 1, 2, 2, 2, 2, 2, 2];
    for (d, &h) in (1..=10).zip(&expected) {
        assert_eq!(class_number_tilde(&BigInt::from(d)), h, "d = {d}");
    }
}
