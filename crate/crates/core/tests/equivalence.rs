mod common;

use std::collections::BTreeSet;

use common::{all_models, fixture, model, naive_bml_bisim};
use modal_core::equivalence::{
    bisimilar, bml_partition_refinement, conditions_for, parse_witness, serialize_witness, simulated_by,
    verify_relation, Config,
};
use modal_core::gen::{random_formula, random_model_for, suite_signature};
use modal_core::rng::Prng;
use modal_core::semantics::check;
use modal_core::syntax::{parse_formula_unchecked, LogicSpec, DIALECT_NAMES};
use proptest::prelude::*;

fn spec(name: &str) -> LogicSpec {
    LogicSpec::by_name(name).unwrap()
}

fn pair(a: &str, b: &str) -> (Config, Config) {
    (Config::new(Vec::<String>::new(), a), Config::new(Vec::<String>::new(), b))
}

#[test]
fn bisimilar_figure_is_related_with_the_drawn_pairs() {
    let (m1, m2) = (fixture("bisimilar_left.kripke"), fixture("bisimilar_right.kripke"));
    let out = bisimilar(&spec("bml"), &m1, "a", &m2, "u").unwrap();
    assert!(out.related);
    let witness = out.witness.unwrap();
    for expected in [pair("a", "u"), pair("b", "u"), pair("c", "x"), pair("d", "x")] {
        assert!(witness.contains(&expected), "missing {expected:?}");
    }
    verify_relation(&conditions_for(&spec("bml")), &m1, &m2, &witness).unwrap();
}

#[test]
fn similar_figure_is_similar_but_not_bisimilar() {
    let (m1, m2) = (fixture("similar_left.kripke"), fixture("similar_right.kripke"));
    let bml = spec("bml");
    let forward = simulated_by(&bml, &m1, "w0", &m2, "v0").unwrap();
    assert!(forward.related);
    verify_relation(&conditions_for(&bml).directed(), &m1, &m2, &forward.witness.unwrap()).unwrap();
    assert!(!simulated_by(&bml, &m2, "v0", &m1, "w0").unwrap().related);
    let both = bisimilar(&bml, &m1, "w0", &m2, "v0").unwrap();
    assert!(!both.related);
    let f = both.distinguisher.unwrap();
    assert_eq!(f, parse_formula_unchecked("<r>r_prop").unwrap());
    assert!(check(&m2, "v0", &f).unwrap());
    assert!(!check(&m1, "w0", &f).unwrap());
}

#[test]
fn memory_distinguishes_reflexive_point_from_two_cycle() {
    let (refl, cycle) = (fixture("reflexive.kripke"), fixture("two_cycle.kripke"));
    assert!(bisimilar(&spec("bml"), &refl, "c", &cycle, "a").unwrap().related);
    let out = bisimilar(&spec("ml-diamond"), &refl, "c", &cycle, "a").unwrap();
    assert!(!out.related);
    let f = out.distinguisher.unwrap();
    assert_ne!(check(&refl, "c", &f).unwrap(), check(&cycle, "a", &f).unwrap());
}

#[test]
fn identity_pairs_are_related_in_every_dialect() {
    let m = model("worlds: a b c\nrel r: a->b b->c c->a a->a\nval p: b\nval q: a c\nmem: b\nnom i: c\nnom j: a");
    for name in DIALECT_NAMES {
        for w in ["a", "b", "c"] {
            let out = bisimilar(&spec(name), &m, w, &m, w).unwrap();
            assert!(out.related, "{name} {w}");
            assert!(simulated_by(&spec(name), &m, w, &m, w).unwrap().related);
        }
    }
}

#[test]
fn partition_refinement_on_the_figure() {
    let blocks = bml_partition_refinement(&fixture("bisimilar_left.kripke"));
    let expected: Vec<BTreeSet<String>> = vec![
        ["a", "b"].into_iter().map(String::from).collect(),
        ["c", "d"].into_iter().map(String::from).collect(),
    ];
    assert_eq!(blocks, expected);
    let distinct = model("worlds: a b c\nval p: a\nval q: b\nrel r:");
    assert_eq!(bml_partition_refinement(&distinct).len(), 3);
}

#[test]
fn engines_agree_on_all_two_world_models() {
    let bml = spec("bml");
    let models: Vec<_> = (1..=2).flat_map(all_models).collect();
    for m in &models {
        let blocks = bml_partition_refinement(m);
        let naive = naive_bml_bisim(m, m);
        for a in 0..m.len() {
            for b in 0..m.len() {
                let (wa, wb) = (m.name(a), m.name(b));
                let related = bisimilar(&bml, m, wa, m, wb).unwrap().related;
                let same_block = blocks.iter().any(|bl| bl.contains(wa) && bl.contains(wb));
                assert_eq!(related, same_block);
                assert_eq!(related, naive.contains(&(a, b)));
            }
        }
    }
    for m in &models {
        for n in &models {
            let naive = naive_bml_bisim(m, n);
            for a in 0..m.len() {
                for b in 0..n.len() {
                    let out = bisimilar(&bml, m, m.name(a), n, n.name(b)).unwrap();
                    assert_eq!(out.related, naive.contains(&(a, b)));
                }
            }
        }
    }
}

#[test]
fn maximality_against_hand_built_relations() {
    let (m1, m2) = (fixture("bisimilar_left.kripke"), fixture("bisimilar_right.kripke"));
    let conds = conditions_for(&spec("bml"));
    let hand = vec![pair("a", "u"), pair("b", "u"), pair("c", "x"), pair("d", "x")];
    verify_relation(&conds, &m1, &m2, &hand).unwrap();
    let witness = bisimilar(&spec("bml"), &m1, "a", &m2, "u").unwrap().witness.unwrap();
    assert!(hand.iter().all(|p| witness.contains(p)));
    let broken = vec![pair("a", "u"), pair("c", "x")];
    assert!(verify_relation(&conds, &m1, &m2, &broken).is_err());
}

#[test]
fn witness_serialization_round_trips() {
    let (m1, m2) = (fixture("reflexive.kripke"), fixture("two_cycle.kripke"));
    let out = bisimilar(&spec("bml"), &m1, "c", &m2, "a").unwrap();
    let witness = out.witness.unwrap();
    let text = serialize_witness(&witness);
    assert_eq!(text, "((|c),(|a))\n((|c),(|b))\n");
    assert_eq!(parse_witness(&text).unwrap(), witness);
}

fn random_pair(name: &str, seed: u64) -> (LogicSpec, modal_core::kripke::KripkeModel, modal_core::kripke::KripkeModel) {
    let spec = spec(name);
    let sig = suite_signature(&spec);
    let mut rng = Prng::new(seed);
    let m = random_model_for(&spec, &sig, 4, &mut rng);
    let n = random_model_for(&spec, &sig, 4, &mut rng);
    (spec, m, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_pass_the_independent_checker(seed in any::<u64>(), which in 0usize..DIALECT_NAMES.len()) {
        let (spec, m, n) = random_pair(DIALECT_NAMES[which], seed);
        for directed in [false, true] {
            let conds = if directed { conditions_for(&spec).directed() } else { conditions_for(&spec) };
            let (w, v) = (m.name(0), n.name(0));
            let out = if directed { simulated_by(&spec, &m, w, &n, v) } else { bisimilar(&spec, &m, w, &n, v) }.unwrap();
            if let Some(witness) = out.witness {
                prop_assert!(verify_relation(&conds, &m, &n, &witness).is_ok());
            }
        }
    }

    #[test]
    fn related_points_agree_and_distinguishers_separate(seed in any::<u64>(), which in 0usize..DIALECT_NAMES.len()) {
        let (spec, m, n) = random_pair(DIALECT_NAMES[which], seed);
        let sig = suite_signature(&spec);
        let mut rng = Prng::new(seed ^ 0xabcdef);
        for w in m.worlds() {
            for v in n.worlds() {
                let out = bisimilar(&spec, &m, w, &n, v).unwrap();
                if out.related {
                    for _ in 0..20 {
                        let f = random_formula(&spec, &sig, 4, 12, &mut rng);
                        let (a, b) = (check(&m, w, &f).unwrap(), check(&n, v, &f).unwrap());
                        if spec.has_negation() {
                            prop_assert_eq!(a, b, "{}", f);
                        } else {
                            prop_assert!(!a || b, "{}", f);
                        }
                    }
                } else if let Some(f) = out.distinguisher {
                    prop_assert!(f.validate(&sig, &spec).is_ok());
                    prop_assert_ne!(check(&m, w, &f).unwrap(), check(&n, v, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn symmetric_for_dialects_with_negation(seed in any::<u64>(), which in 0usize..DIALECT_NAMES.len()) {
        let (spec, m, n) = random_pair(DIALECT_NAMES[which], seed);
        prop_assume!(spec.has_negation());
        for w in m.worlds() {
            for v in n.worlds() {
                prop_assert_eq!(
                    bisimilar(&spec, &m, w, &n, v).unwrap().related,
                    bisimilar(&spec, &n, v, &m, w).unwrap().related
                );
            }
        }
    }
}

#[test]
fn distinguishers_exist_for_every_unrelated_bml_pair() {
    let bml = spec("bml");
    let models: Vec<_> = (1..=2).flat_map(all_models).collect();
    for m in &models {
        for n in &models {
            for w in m.worlds() {
                for v in n.worlds() {
                    let out = bisimilar(&bml, m, w, n, v).unwrap();
                    if !out.related {
                        let f = out.distinguisher.expect("distinguisher");
                        assert_ne!(check(m, w, &f).unwrap(), check(n, v, &f).unwrap());
                    }
                }
            }
        }
    }
}
