use modal_core::gen::{random_formula, suite_signature};
use modal_core::rng::Prng;
use modal_core::syntax::{parse_formula, parse_formula_unchecked, print_formula, LogicSpec, SyntaxError, DIALECT_NAMES};
use proptest::prelude::*;

fn spec(name: &str) -> LogicSpec {
    LogicSpec::by_name(name).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_the_identity(seed in any::<u64>(), which in 0usize..DIALECT_NAMES.len(), depth in 0usize..5) {
        let spec = spec(DIALECT_NAMES[which]);
        let sig = suite_signature(&spec);
        let f = random_formula(&spec, &sig, depth, 24, &mut Prng::new(seed));
        let text = print_formula(&f);
        prop_assert_eq!(parse_formula(&text, &sig, &spec).unwrap(), f.clone());
        prop_assert_eq!(parse_formula_unchecked(&text).unwrap(), f);
    }

    #[test]
    fn formulas_outside_a_dialect_are_rejected(seed in any::<u64>(), a in 0usize..DIALECT_NAMES.len(), b in 0usize..DIALECT_NAMES.len()) {
        let (from, to) = (spec(DIALECT_NAMES[a]), spec(DIALECT_NAMES[b]));
        let sig = suite_signature(&LogicSpec::full());
        let f = random_formula(&from, &suite_signature(&from), 3, 16, &mut Prng::new(seed));
        let foreign = f.operators().into_iter().any(|op| !to.allows(op));
        let result = f.validate(&sig, &to);
        prop_assert_eq!(result.is_err(), foreign);
        if foreign {
            prop_assert!(matches!(result, Err(SyntaxError::OperatorNotInDialect(_))));
            prop_assert!(parse_formula(&print_formula(&f), &sig, &to).is_err());
        }
    }

    #[test]
    fn parser_is_total_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..40)) {
        let text = String::from_utf8_lossy(&bytes);
        match parse_formula_unchecked(&text) {
            Ok(f) => prop_assert_eq!(parse_formula_unchecked(&print_formula(&f)).unwrap(), f),
            Err(SyntaxError::Syntax { position, .. }) => prop_assert!(position <= text.len()),
            Err(_) => {}
        }
    }

    #[test]
    fn parser_is_total_on_formula_like_strings(s in "[pqr<>\\[\\]()&|~'@ -]{0,24}") {
        let _ = parse_formula_unchecked(&s);
    }
}
