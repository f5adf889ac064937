mod common;

use std::collections::HashMap;

use ergolab_core::f2::{
    disjoint, search_best, translate, verify_rokhlin_family, CylinderPatternSet, Letter, ReducedWord,
};
use ergolab_core::Measure;
use proptest::prelude::*;

fn word() -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec(0usize..4, 0..6).prop_map(|v| ReducedWord::reduce(v.into_iter().map(|i| Letter::ALL[i])))
}

fn pattern_set(max_window: usize) -> impl Strategy<Value = CylinderPatternSet> {
    prop::collection::btree_set(word(), 1..=max_window).prop_flat_map(|window| {
        let size = window.len();
        prop::collection::vec(0u32..(1 << size), 0..12)
            .prop_map(move |masks| CylinderPatternSet::new(window.iter().cloned().collect(), masks).unwrap())
    })
}

fn naive_product(u: &ReducedWord, v: &ReducedWord) -> ReducedWord {
    ReducedWord::reduce(u.letters().iter().chain(v.letters()).copied())
}

proptest! {
    #[test]
    fn multiplication_is_associative_with_inverses(u in word(), v in word(), w in word()) {
        prop_assert_eq!(u.multiply(&v), naive_product(&u, &v));
        prop_assert_eq!(u.multiply(&v).multiply(&w), u.multiply(&v.multiply(&w)));
        prop_assert!(u.multiply(&u.inverse()).is_identity());
        prop_assert_eq!(u.to_string().parse::<ReducedWord>().unwrap(), u);
    }

    #[test]
    fn translation_is_a_measure_preserving_action(b in pattern_set(6), g in word(), h in word()) {
        let gb = translate(&b, &g);
        prop_assert_eq!(gb.measure(), b.measure());
        prop_assert_eq!(translate(&gb, &h), translate(&b, &h.multiply(&g)));
        prop_assert_eq!(translate(&gb, &g.inverse()), b);
    }

    #[test]
    fn disjointness_matches_enumeration(b1 in pattern_set(7), b2 in pattern_set(7)) {
        prop_assert_eq!(disjoint(&b1, &b2).unwrap(), common::brute_disjoint(&b1, &b2));
    }

    #[test]
    fn union_is_additive_on_disjoint_sets(b1 in pattern_set(5), b2 in pattern_set(5)) {
        let u = b1.union(&b2).unwrap();
        if disjoint(&b1, &b2).unwrap() {
            prop_assert_eq!(u.measure(), b1.measure() + b2.measure());
        } else {
            prop_assert!(u.measure() < b1.measure() + b2.measure());
        }
    }
}

/// Forced values of a single-assignment cylinder, word by word.
fn forced(set: &CylinderPatternSet) -> HashMap<ReducedWord, bool> {
    assert_eq!(set.assignments().len(), 1);
    let mask = set.assignments()[0];
    set.window().iter().enumerate().map(|(i, w)| (w.clone(), mask >> i & 1 == 1)).collect()
}

#[test]
fn peak_pairs_disagree_on_a_shared_word() {
    let peak = CylinderPatternSet::local_peak(2).unwrap();
    let cert = verify_rokhlin_family(&peak).unwrap();
    assert!(cert.verdict);
    assert_eq!(cert.measure, Measure::new(1, 1 << 17));
    for pair in &cert.pairs {
        let fa = forced(&translate(&peak, &pair.g));
        let fb = forced(&translate(&peak, &pair.h));
        assert!(fa.iter().any(|(w, v)| fb.get(w).is_some_and(|u| u != v)), "{} vs {}", pair.g, pair.h);
        assert!(pair.disjoint);
    }
}

#[test]
fn cross_translates_of_a_radius_one_peak_intersect_by_enumeration() {
    let peak = CylinderPatternSet::local_peak(1).unwrap();
    let a = translate(&peak, &"a".parse().unwrap());
    let b = translate(&peak, &"b".parse().unwrap());
    assert!(!common::brute_disjoint(&a, &b));
    assert!(!verify_rokhlin_family(&peak).unwrap().verdict);
}

#[test]
fn search_results_verify_independently() {
    for seed in 0..3 {
        let r = search_best(2, 3000, seed).unwrap();
        let again = verify_rokhlin_family(&r.certificate.set).unwrap();
        assert!(again.verdict);
        assert!(r.certificate.measure * 5 <= Measure::from_integer(1));
        assert!(r.certificate.measure >= Measure::new(1, 1 << 17));
    }
}
