use operad_forge::coderivation::{
    basis_words, coderivation_identity_holds, coproduct, first_d_squared_failure, first_relation_failure,
    gerstenhaber_sign_check, linear_seed, mixed_parity_example, perturb, random_valid_structure, sl2_matrix_example,
    suspension_identity_holds, transport, untransport, GradedMap, ShiftedTensor,
};
use operad_forge::signed::all_permutations;
use operad_forge::{check_equivalence, rat, GradedSpace, MapKind, Structure};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matrix_action_example_satisfies_both_checks() {
    let s = sl2_matrix_example();
    s.validate().unwrap();
    let report = check_equivalence(&s, 4).unwrap();
    assert!(report.d_squared_zero && report.relations_hold, "{:?}", report.to_json());
    assert!(report.equivalent());
}

#[test]
fn constructed_families_pass_and_perturbed_families_fail_both_checks() {
    for seed in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geo = random_valid_structure(&mut rng, 4).unwrap();
        geo.validate().unwrap();
        let ok = check_equivalence(&geo, 4).unwrap();
        assert!(ok.d_squared_zero && ok.relations_hold, "seed {seed}");
        let bad = perturb(&mut rng, &geo, 4).unwrap().expect("a breaking perturbation exists");
        let report = check_equivalence(&bad, 4).unwrap();
        assert!(!report.d_squared_zero && !report.relations_hold, "seed {seed}");
        assert!(report.equivalent());
        let failure = report.first_relation_failure.unwrap();
        assert!(failure.n + failure.m <= 4);
        assert!(report.first_d_squared_failure.unwrap().len() <= 4);
    }
}

#[test]
fn perturbing_the_product_is_caught() {
    let mut s = sl2_matrix_example();
    let l_degrees = s.l.degrees.clone();
    s.map_mut(MapKind::N, 0, 2).add_symmetric(&[0, 0], 0, rat(5), &l_degrees);
    assert!(first_relation_failure(&s, 4).unwrap().is_some());
    assert!(first_d_squared_failure(&transport(&s).unwrap(), 4).unwrap().is_some());
}

#[test]
fn transport_round_trips() {
    let geo = sl2_matrix_example();
    assert_eq!(untransport(&transport(&geo).unwrap()).unwrap(), geo);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let geo = random_valid_structure(&mut rng, 3).unwrap();
    assert_eq!(untransport(&transport(&geo).unwrap()).unwrap(), geo);
}

#[test]
fn square_zero_coderivations_are_coderivations() {
    let s = transport(&sl2_matrix_example()).unwrap();
    let words = basis_words(&s.l, &s.a, 3);
    assert!(!words.is_empty());
    for w in words.iter().take(400) {
        assert!(coderivation_identity_holds(&s, w), "{w:?}");
    }
    let seed = linear_seed();
    for w in basis_words(&seed.l, &seed.a, 3) {
        let pieces = coproduct(&w, &seed.l, &seed.a);
        // Reduced: no unit pieces, and every word of length two or more splits.
        assert!(pieces.keys().all(|(a, b)| !a.is_empty() && !b.is_empty()));
        assert!(pieces.keys().all(|(a, b)| a.len() + b.len() == w.len()));
        assert_eq!(pieces.is_empty(), w.len() < 2, "{w:?}");
        assert!(coderivation_identity_holds(&seed, &w));
    }
}

#[test]
fn structures_round_trip_through_json() {
    let s = sl2_matrix_example();
    let back = Structure::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = random_valid_structure(&mut rng, 3).unwrap();
    assert_eq!(Structure::from_json(&r.to_json()).unwrap(), r);
}

#[test]
fn malformed_structures_are_rejected() {
    assert!(GradedSpace::new(&[("x", 0), ("x", 1)]).is_err());
    assert!(Structure::from_json(&serde_json::json!({"l": []})).is_err());
    let mut s = sl2_matrix_example();
    // A constant of the wrong degree breaks homogeneity.
    let degree = s.expected_degree(MapKind::N, 0, 2) + 1;
    s.maps.insert((MapKind::N, 0, 2), GradedMap::new(MapKind::N, 0, 2, degree));
    assert!(s.validate().is_err());
}

#[test]
fn shifts_compose_to_the_expected_sign() {
    for n in 1..=6usize {
        let degrees: Vec<i64> = (0..n as i64).map(|k| k % 3 - 1).collect();
        let x = ShiftedTensor::new(&degrees);
        let round = x.down().up();
        assert_eq!(round.letters, x.letters);
        assert_eq!(round.sign, if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 });
    }
}

#[test]
fn suspension_identity_for_every_permutation_of_four() {
    for perm in all_permutations(4) {
        for degrees in [[0, 0, 0, 0], [1, 0, -1, 2], [1, 1, 1, 1], [-3, 2, 0, 1]] {
            assert!(suspension_identity_holds(&degrees, &perm), "{perm:?} on {degrees:?}");
        }
    }
}

#[test]
fn gerstenhaber_signs_on_the_mixed_parity_example() {
    let (space, l2) = mixed_parity_example();
    let twisted = gerstenhaber_sign_check(&space, &l2, true);
    assert!(twisted.passed(), "{:?}", twisted.failures);
    let plain = gerstenhaber_sign_check(&space, &l2, false);
    assert!(!plain.antisymmetry);
    assert!(!plain.passed());
    // The zero product passes either way.
    let zero = GradedMap::new(MapKind::L, 2, 0, 1);
    assert!(gerstenhaber_sign_check(&space, &zero, false).passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn suspension_identity_on_random_words(
        degrees in prop::collection::vec(-3i64..4, 1..=6),
        seed in any::<u64>(),
    ) {
        let mut perm: Vec<usize> = (0..degrees.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(suspension_identity_holds(&degrees, &perm));
    }

    #[test]
    fn symmetric_actions_compose(degrees in prop::collection::vec(-2i64..3, 2..=5), seed in any::<u64>()) {
        let n = degrees.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s: Vec<usize> = (0..n).collect();
        let mut t: Vec<usize> = (0..n).collect();
        s.shuffle(&mut rng);
        t.shuffle(&mut rng);
        let x = ShiftedTensor::new(&degrees);
        let two_steps = x.symmetric_action(&s).symmetric_action(&t);
        let composed: Vec<usize> = t.iter().map(|&k| s[k]).collect();
        prop_assert_eq!(two_steps, x.symmetric_action(&composed));
    }
}
