use std::collections::BTreeSet;

use modal_core::gen::{random_model_for, suite_signature};
use modal_core::kripke::{load_model, random_model, save_model, GenParams, KripkeModel};
use modal_core::rng::Prng;
use modal_core::syntax::{LogicSpec, Signature};
use proptest::prelude::*;

fn random_memory_model(seed: u64) -> KripkeModel {
    let spec = LogicSpec::by_name("ml-full").unwrap();
    let sig = Signature::new(["p", "q"], ["r", "s"], ["i"]).unwrap();
    let mut m = random_model_for(&spec, &sig, 5, &mut Prng::new(seed));
    if seed.is_multiple_of(2) {
        m = m.with_memory(BTreeSet::new());
    }
    m
}

fn same_except_memory(a: &KripkeModel, b: &KripkeModel) -> bool {
    a.worlds() == b.worlds() && a.rels() == b.rels() && a.val() == b.val() && a.noms() == b.noms()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn memory_updates_touch_only_the_memory(seed in any::<u64>(), pick in 0usize..5) {
        let m = random_memory_model(seed);
        let w = m.name(pick % m.len()).to_string();
        let i = m.index(&w).unwrap();
        let added = m.mem_add(&w).unwrap();
        prop_assert!(same_except_memory(&m, &added));
        prop_assert!(added.mem().contains(&i));
        prop_assert!(m.mem().iter().all(|x| added.mem().contains(x)));
        let removed = m.mem_remove(&w).unwrap();
        prop_assert!(same_except_memory(&m, &removed));
        prop_assert!(!removed.mem().contains(&i));
        let wiped = m.mem_wipe();
        prop_assert!(same_except_memory(&m, &wiped));
        prop_assert!(wiped.mem().is_empty());
    }

    #[test]
    fn save_then_load_is_the_identity(seed in any::<u64>()) {
        let m = random_memory_model(seed);
        let point = m.name(0).to_string();
        let (back, p) = load_model(&save_model(&m, Some(&point))).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(p, Some(point));
        let (back, p) = load_model(&save_model(&m, None)).unwrap();
        prop_assert_eq!(back, m);
        prop_assert_eq!(p, None);
    }

    #[test]
    fn random_models_are_deterministic(seed in any::<u64>(), n in 1usize..7) {
        let sig = suite_signature(&LogicSpec::by_name("hl").unwrap());
        let params = GenParams::new(n, 0.3, 0.5, seed, sig);
        let a = save_model(&random_model(&params), None);
        let b = save_model(&random_model(&params.clone()), None);
        prop_assert_eq!(a, b);
    }
}
