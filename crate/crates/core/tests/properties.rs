mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use ufbd_core::dialogue::{
    replay, run_dialogue, FeedbackStrategy, Move, Polarity, PresentationStrategy, ProtocolConfig, ProtocolKind, Simulator,
};
use ufbd_core::fixtures;
use ufbd_core::graph::{canonical_key, compose, find_embedding, is_isomorphic, sent_of, verify_embedding, FormulaGraph};
use ufbd_core::logic::parse_formula;
use ufbd_core::semantics::{logically_implies, valid_in};

fn pools() -> Vec<(ufbd_core::hypothesis::CandidatePool, Option<usize>)> {
    vec![(fixtures::prop_h_pool(), None), (fixtures::four_item_pool(), Some(2)), (fixtures::plant_pool(), None)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn embeddings_carry_checkable_witnesses(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let h = common::random_graph(&mut rng, &a, 3);
        let g = common::embedded_part(&mut rng, &a, &h);
        let w = find_embedding(&g, &h);
        prop_assert!(w.is_some());
        prop_assert!(verify_embedding(&g, &h, w.as_ref().unwrap()));
    }

    #[test]
    fn embeddings_compose(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let k = common::random_graph(&mut rng, &a, 3);
        let h = common::embedded_part(&mut rng, &a, &k);
        let g = common::embedded_part(&mut rng, &a, &h);
        let first = find_embedding(&g, &h).unwrap();
        let second = find_embedding(&h, &k).unwrap();
        prop_assert!(verify_embedding(&g, &k, &compose(&g, &first, &second)));
    }

    #[test]
    fn canonical_key_ignores_variable_names(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let g = common::random_graph(&mut rng, &a, 3);
        let r = common::fresh_renaming(&mut rng, &g);
        prop_assert_eq!(canonical_key(&g), canonical_key(&r));
        prop_assert!(is_isomorphic(&g, &r));
    }

    #[test]
    fn equal_keys_mean_isomorphic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let g = common::random_graph(&mut rng, &a, 2);
        let h = common::random_graph(&mut rng, &a, 2);
        prop_assert_eq!(canonical_key(&g) == canonical_key(&h), common::brute_isomorphic(&g, &h));
    }

    #[test]
    fn graph_files_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let g = common::random_graph(&mut rng, &a, 3);
        let text = serde_json::to_string(&g.to_file()).unwrap();
        prop_assert_eq!(FormulaGraph::from_json(&a, &text).unwrap(), g);
    }

    #[test]
    fn printed_sentences_parse_back(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let g = common::random_graph(&mut rng, &a, 3);
        let s = sent_of(&g, &a);
        prop_assert_eq!(&parse_formula(&s.to_string(), &a).unwrap(), s.formula());
    }

    #[test]
    fn sentences_of_embedded_parts_are_implied(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::plant_like_alphabet(&mut rng);
        let h = common::random_graph(&mut rng, &a, 3);
        let g = common::embedded_part(&mut rng, &a, &h);
        let class = common::random_class(&mut rng, &a, &h);
        let (sh, sg) = (sent_of(&h, &a).into_formula(), sent_of(&g, &a).into_formula());
        prop_assert!(logically_implies(&[sh.clone()], &[sg.clone()], &class).unwrap());
        for m in class.structures() {
            prop_assert!(!valid_in(m, &sh).unwrap() || valid_in(m, &sg).unwrap());
        }
    }

    #[test]
    fn random_dialogues_validate(seed in any::<u64>(), which in 0usize..3, kind in 0usize..4) {
        let (pool, bound) = pools().swap_remove(which);
        let kinds = [ProtocolKind::Basic, ProtocolKind::Simple, ProtocolKind::SimpleXBasicF, ProtocolKind::BasicXSimpleF];
        let target = BTreeSet::from([seed as usize % pool.len()]);
        let cfg = ProtocolConfig::new(kinds[kind], pool, bound, Some(target)).unwrap();
        let mut sim = Simulator::new(PresentationStrategy::Random, FeedbackStrategy::Random, seed);
        let (state, _) = run_dialogue(&cfg, &mut sim, 200).unwrap();
        let turns = state.turns(&cfg);
        prop_assert_eq!(replay(&cfg, &turns).unwrap(), state.clone());
        // Under a single target the towards rule never asks for neutral.
        for mv in state.history() {
            if let Move::Feedback(f) = mv {
                prop_assert!(f.iter().all(|fb| fb.polarity != Polarity::Neutral));
            }
        }
    }
}
