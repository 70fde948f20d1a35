use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use bairesum::bench::{enumerate_window, run_scenario, Params, Window};
use bairesum::escape::{miller_meager_escape, silver_nwd_escape, WordCode};
use bairesum::ideals::MeagerWitness;
use bairesum::seq::{Center, FreeSet};
use bairesum::trees::{make_full, make_silver, truncate, SilverSpec};
use bairesum::words::{enum_cmp, enum_index, enum_word, zigzag_rank, zigzag_value, Word};

fn word(max_len: usize, b: i64) -> impl Strategy<Value = Word> {
    prop::collection::vec(-b..=b, 0..=max_len).prop_map(Word::new)
}

fn pair(max_len: usize) -> impl Strategy<Value = (Word, Word)> {
    (0..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(-1000i64..=1000, n).prop_map(Word::new),
            prop::collection::vec(-1000i64..=1000, n).prop_map(Word::new),
        )
    })
}

proptest! {
    #[test]
    fn add_sub_round_trip((u, v) in pair(12)) {
        let s = u.add(&v).unwrap();
        prop_assert_eq!(s.sub(&v).unwrap(), u.clone());
        prop_assert_eq!(s, v.add(&u).unwrap());
    }

    #[test]
    fn add_overflow_is_an_error(n in 1usize..6) {
        let big = Word::repeat(i64::MAX, n);
        prop_assert!(big.add(&Word::repeat(1, n)).is_err());
    }

    #[test]
    fn restrict_commutes_with_add((u, v) in pair(10), k in 0usize..10) {
        let k = k.min(u.len());
        prop_assert_eq!(
            u.add(&v).unwrap().restrict(k),
            u.restrict(k).add(&v.restrict(k)).unwrap()
        );
    }

    #[test]
    fn zigzag_round_trip(v in -100_000i64..100_000) {
        prop_assert_eq!(zigzag_value(zigzag_rank(v)), Some(v));
    }

    #[test]
    fn enumeration_round_trip(w in word(5, 6)) {
        prop_assert_eq!(enum_word(&enum_index(&w)), w);
    }

    #[test]
    fn enumeration_is_order_preserving(a in word(4, 5), b in word(4, 5)) {
        prop_assert_eq!(enum_cmp(&a, &b), enum_index(&a).cmp(&enum_index(&b)));
    }

    #[test]
    fn enumeration_is_onto_an_initial_segment(n in 0u64..5000) {
        let w = enum_word(&BigUint::from(n));
        prop_assert_eq!(enum_index(&w), BigUint::from(n));
    }

    #[test]
    fn window_enumeration_is_exhaustive(b in 1u32..3, d in 1usize..5) {
        let w = Window::new(b, d, 2, 0);
        let words: Vec<Word> = enumerate_window(&w).unwrap().collect();
        let distinct: BTreeSet<&Word> = words.iter().collect();
        prop_assert_eq!(words.len() as u128, (2 * b as u128 + 1).pow(d as u32));
        prop_assert_eq!(distinct.len(), words.len());
        let bound = b as i64;
        prop_assert!(words.iter().all(|x| x.len() == d && x.entries().iter().all(|v| v.abs() <= bound)));
    }

    #[test]
    fn truncation_is_prefix_closed(depth in 0usize..5, budget in 1usize..4) {
        let tr = truncate(&make_full(), depth, budget);
        prop_assert!(tr.nodes.iter().all(|w| tr.nodes.contains(&w.restrict(w.len().saturating_sub(1)))));
        prop_assert_eq!(tr.body_at_depth().len(), budget.pow(depth as u32));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scenarios_are_seed_deterministic(seed in any::<u64>(), pick in 0usize..3) {
        let name = ["laver-full-sum", "m-not-mminus", "silver-sum-translate"][pick];
        let w = Window::new(2, 5, 2, 0);
        let p = Params { steps: Some(3), n_fold: None, count: Some(3), seed };
        let a = run_scenario(name, &w, &p).unwrap();
        let b = run_scenario(name, &w, &p).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.all_pass());
    }

    #[test]
    fn silver_escape_prefixes_are_stable(steps in 1usize..5, v in 1i64..4) {
        let spec = SilverSpec::new(FreeSet::evens(), Center::zero()).unwrap();
        let h = MeagerWitness::constant(Word::from([v, -v]));
        let short = silver_nwd_escape(&spec, &h, steps).unwrap();
        let long = silver_nwd_escape(&spec, &h, steps + 1).unwrap();
        prop_assert!(short.x_prefix.is_prefix_of(&long.x_prefix));
        prop_assert!(short.t_prefix.is_prefix_of(&long.t_prefix));
    }

    #[test]
    fn miller_escape_prefixes_are_stable(steps in 1usize..4, v in 1i64..4) {
        let tp = bairesum::escape::make_alpha_tree(WordCode::ZigzagIndex, 2, 3).unwrap();
        let h = MeagerWitness::constant(Word::from([v]));
        let short = miller_meager_escape(&tp, &h, steps).unwrap();
        let long = miller_meager_escape(&tp, &h, steps + 1).unwrap();
        prop_assert!(short.x_prefix.is_prefix_of(&long.x_prefix));
        prop_assert!(short.ledger.all_pass() && long.ledger.all_pass());
    }

    #[test]
    fn silver_truncations_are_perfect(shift in prop::collection::vec(-3i64..=3, 2)) {
        let spec = SilverSpec::new(FreeSet::evens(), Center::periodic(vec![], shift)).unwrap();
        let t = make_silver(spec);
        let tr = truncate(&t, 4, 3);
        prop_assert!(tr.is_perfect(1));
        prop_assert_eq!(tr.body_at_depth().len(), 9);
    }
}
