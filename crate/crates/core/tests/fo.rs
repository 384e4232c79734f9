mod common;

use std::collections::BTreeSet;

use common::all_models;
use modal_core::fo::{back_and_forth, fo_check, x_assignment, FoFormula, FoStructure, Term, XAssignment, X};
use modal_core::kripke::KripkeModel;
use modal_core::translation::translate_model;
use proptest::prelude::*;

fn structure(m: &KripkeModel, w: usize) -> (FoStructure, XAssignment) {
    let (mut a, g) = translate_model(m, m.name(w)).unwrap();
    a.unary.remove("K");
    (a, g)
}

fn pointed_structures(max: usize) -> Vec<(FoStructure, XAssignment)> {
    (1..=max).flat_map(all_models).flat_map(|m| (0..m.len()).map(move |w| structure(&m, w))).collect()
}

/// Every formula over `p`/`r` with at most `size` nodes and rank at most
/// `rank`, whose free variables are among `x` and the bound ones.
fn enumerate(size: usize, rank: usize, scope: &[String]) -> Vec<FoFormula> {
    let mut by_size: Vec<Vec<FoFormula>> = vec![Vec::new(); size + 1];
    if size == 0 {
        return Vec::new();
    }
    for s in 1..=size {
        let mut out = Vec::new();
        if s == 1 {
            for a in scope {
                out.push(FoFormula::pred("p", Term::var(a)));
                for b in scope {
                    out.push(FoFormula::rel("r", Term::var(a), Term::var(b)));
                    if a < b {
                        out.push(FoFormula::Eq(Term::var(a), Term::var(b)));
                    }
                }
            }
        } else {
            for f in &by_size[s - 1] {
                out.push(FoFormula::not(f.clone()));
            }
            for i in 1..s - 1 {
                for f in &by_size[i] {
                    for g in &by_size[s - 1 - i] {
                        out.push(FoFormula::and(f.clone(), g.clone()));
                    }
                }
            }
            if rank > 0 {
                let v = format!("y{}", scope.len());
                let mut inner_scope = scope.to_vec();
                inner_scope.push(v.clone());
                for f in enumerate(s - 1, rank - 1, &inner_scope) {
                    if f.quantifier_rank() < rank && enumerate_size(&f) == s - 1 && f.free_vars().contains(&v) {
                        out.push(FoFormula::exists(v.clone(), f));
                    }
                }
            }
        }
        by_size[s] = out;
    }
    by_size.into_iter().flatten().collect()
}

fn enumerate_size(f: &FoFormula) -> usize {
    match f {
        FoFormula::Not(a) | FoFormula::Exists(_, a) | FoFormula::Forall(_, a) => 1 + enumerate_size(a),
        FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) | FoFormula::Iff(a, b) => {
            1 + enumerate_size(a) + enumerate_size(b)
        }
        _ => 1,
    }
}

#[test]
fn back_and_forth_is_monotone_in_rounds() {
    let corpus = pointed_structures(2);
    for (a, g) in &corpus {
        for (b, h) in &corpus {
            let wins: Vec<bool> = (0..4).map(|n| back_and_forth(a, *g, b, *h, n)).collect();
            for n in 0..3 {
                assert!(!wins[n + 1] || wins[n]);
            }
        }
    }
}

#[test]
fn back_and_forth_rounds_are_sound_for_formulas_of_that_rank() {
    let corpus = pointed_structures(2);
    let scope = vec![X.to_string()];
    for rank in 0..=2 {
        let formulas: Vec<FoFormula> =
            enumerate(6, rank, &scope).into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        assert!(formulas.iter().all(|f| f.quantifier_rank() <= rank && f.free_vars().iter().all(|v| v == X)));
        let truth: Vec<Vec<bool>> = corpus
            .iter()
            .map(|(a, g)| formulas.iter().map(|f| fo_check(a, &x_assignment(*g), f).unwrap()).collect())
            .collect();
        for i in 0..corpus.len() {
            for j in 0..corpus.len() {
                let (a, g) = &corpus[i];
                let (b, h) = &corpus[j];
                if back_and_forth(a, *g, b, *h, rank) {
                    assert_eq!(truth[i], truth[j], "rank {rank}");
                }
            }
        }
    }
}

fn random_fo(seed: u64, depth: usize, scope: &mut Vec<String>) -> FoFormula {
    let mut rng = modal_core::rng::Prng::new(seed);
    gen_fo(&mut rng, depth, scope)
}

fn gen_fo(rng: &mut modal_core::rng::Prng, depth: usize, scope: &mut Vec<String>) -> FoFormula {
    let pick = |rng: &mut modal_core::rng::Prng, scope: &[String]| Term::var(scope[rng.below(scope.len())].clone());
    match if depth == 0 { rng.below(3) } else { rng.below(8) } {
        0 => FoFormula::pred("p", pick(rng, scope)),
        1 => FoFormula::rel("r", pick(rng, scope), pick(rng, scope)),
        2 => FoFormula::Eq(pick(rng, scope), pick(rng, scope)),
        3 => FoFormula::not(gen_fo(rng, depth - 1, scope)),
        4 => FoFormula::and(gen_fo(rng, depth - 1, scope), gen_fo(rng, depth - 1, scope)),
        5 => FoFormula::or(gen_fo(rng, depth - 1, scope), gen_fo(rng, depth - 1, scope)),
        6 | 7 => {
            let v = format!("y{}", scope.len());
            scope.push(v.clone());
            let body = gen_fo(rng, depth - 1, scope);
            scope.pop();
            if rng.coin(0.5) { FoFormula::exists(v, body) } else { FoFormula::forall(v, body) }
        }
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_respects_boolean_identities(seed in any::<u64>(), model_index in 0usize..68, w in 0usize..2) {
        let models: Vec<KripkeModel> = (1..=2).flat_map(all_models).collect();
        let m = &models[model_index];
        let (a, g) = structure(m, w % m.len());
        let env = x_assignment(g);
        let mut scope = vec![X.to_string()];
        let f = random_fo(seed, 3, &mut scope);
        let h = random_fo(seed ^ 0x55, 3, &mut scope);
        let val = |x: &FoFormula| fo_check(&a, &env, x).unwrap();
        prop_assert_eq!(val(&FoFormula::not(FoFormula::and(f.clone(), h.clone()))),
            val(&FoFormula::or(FoFormula::not(f.clone()), FoFormula::not(h.clone()))));
        prop_assert_eq!(val(&FoFormula::not(FoFormula::or(f.clone(), h.clone()))),
            val(&FoFormula::and(FoFormula::not(f.clone()), FoFormula::not(h.clone()))));
        prop_assert_eq!(val(&FoFormula::not(FoFormula::not(f.clone()))), val(&f));
        prop_assert_eq!(val(&FoFormula::implies(f.clone(), h.clone())), !val(&f) || val(&h));
        prop_assert_eq!(val(&FoFormula::iff(f.clone(), h.clone())), val(&f) == val(&h));
        prop_assert_eq!(val(&FoFormula::exists("z", f.clone())), val(&f));
        let body = FoFormula::rel("r", Term::var(X), Term::var("z"));
        prop_assert_eq!(val(&FoFormula::not(FoFormula::exists("z", body.clone()))),
            val(&FoFormula::forall("z", FoFormula::not(body))));
    }
}
