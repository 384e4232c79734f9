use modal_core::fo::{fo_check, x_assignment, FoFormula, X};
use modal_core::gen::{random_formula, random_model_for, suite_signature};
use modal_core::rng::Prng;
use modal_core::semantics::check;
use modal_core::syntax::{Formula, LogicSpec, DIALECT_NAMES};
use modal_core::translation::{translate_formula, translate_model, untranslate_model, untranslate_model_in};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn translation_preserves_truth(seed in any::<u64>(), dialect in 0usize..DIALECT_NAMES.len()) {
        let spec = LogicSpec::by_name(DIALECT_NAMES[dialect]).unwrap();
        let sig = suite_signature(&spec);
        let mut rng = Prng::new(seed);
        let m = random_model_for(&spec, &sig, 5, &mut rng);
        let f = random_formula(&spec, &sig, 4, 20, &mut rng);
        let t = translate_formula(&f, &spec).unwrap();
        prop_assert!(t.free_vars().iter().all(|v| v == X));
        for w in m.worlds() {
            let (a, g) = translate_model(&m, w).unwrap();
            prop_assert_eq!(check(&m, w, &f).unwrap(), fo_check(&a, &x_assignment(g), &t).unwrap(), "{}", f);
        }
    }

    #[test]
    fn translation_commutes_with_connectives(seed in any::<u64>(), dialect in 0usize..DIALECT_NAMES.len()) {
        let spec = LogicSpec::by_name(DIALECT_NAMES[dialect]).unwrap();
        let sig = suite_signature(&spec);
        let mut rng = Prng::new(seed);
        let f = random_formula(&spec, &sig, 3, 12, &mut rng);
        let g = random_formula(&spec, &sig, 3, 12, &mut rng);
        let full = LogicSpec::full();
        let tr = |h: &Formula| translate_formula(h, &full).unwrap();
        prop_assert_eq!(tr(&Formula::and(f.clone(), g.clone())), FoFormula::and(tr(&f), tr(&g)));
        prop_assert_eq!(tr(&Formula::or(f.clone(), g.clone())), FoFormula::or(tr(&f), tr(&g)));
        prop_assert_eq!(tr(&Formula::not(f.clone())), FoFormula::not(tr(&f)));
    }

    #[test]
    fn untranslating_a_translated_model_gives_it_back(seed in any::<u64>(), dialect in 0usize..DIALECT_NAMES.len()) {
        let spec = LogicSpec::by_name(DIALECT_NAMES[dialect]).unwrap();
        let sig = suite_signature(&spec);
        let m = random_model_for(&spec, &sig, 6, &mut Prng::new(seed));
        for w in m.worlds() {
            let (a, g) = translate_model(&m, w).unwrap();
            let back = untranslate_model(&a, g).unwrap();
            prop_assert_eq!(&back.model, &m);
            prop_assert_eq!(back.point_name(), w.as_str());
            let within = untranslate_model_in(&a, g, &m.signature().unwrap()).unwrap();
            prop_assert_eq!(&within.model, &m);
        }
    }
}
