//! Seeded random formulas for property suites.

use crate::kripke::{random_model, GenParams, KripkeModel};
use crate::rng::Prng;
use crate::syntax::{Formula, LogicSpec, Operator, Signature};

#[derive(Clone, Copy)]
enum Node {
    True,
    False,
    Prop,
    Nom,
    Known,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Diamond,
    Box,
    DDiamond,
    DBox,
    Remember,
    Forget,
    Erase,
    At,
}

/// Draws a formula valid for `spec` over `sig` with modal depth at most
/// `max_depth` and at most `max_size` nodes (roughly).
pub fn random_formula(spec: &LogicSpec, sig: &Signature, max_depth: usize, max_size: usize, rng: &mut Prng) -> Formula {
    let mut budget = max_size.max(1);
    gen(spec, sig, max_depth, &mut budget, rng)
}

fn atoms(spec: &LogicSpec, sig: &Signature) -> Vec<Node> {
    let mut out = vec![Node::True, Node::False];
    if !sig.props().is_empty() {
        out.extend([Node::Prop, Node::Prop, Node::Prop]);
    }
    if spec.allows(Operator::Known) {
        out.extend([Node::Known, Node::Known]);
    }
    if spec.allows(Operator::Nominal) && !sig.noms().is_empty() {
        out.extend([Node::Nom, Node::Nom]);
    }
    out
}

fn gen(spec: &LogicSpec, sig: &Signature, depth: usize, budget: &mut usize, rng: &mut Prng) -> Formula {
    let mut choices = atoms(spec, sig);
    if *budget > 1 {
        choices.extend([Node::And, Node::Or]);
        if spec.has_negation() {
            choices.extend([Node::Not, Node::Not, Node::Implies, Node::Iff]);
        }
        let have_rels = !sig.rels().is_empty();
        if depth > 0 && have_rels {
            for (op, node) in [
                (Operator::Diamond, Node::Diamond),
                (Operator::Box, Node::Box),
                (Operator::DDiamond, Node::DDiamond),
                (Operator::DBox, Node::DBox),
            ] {
                if spec.allows(op) {
                    choices.extend([node, node, node]);
                }
            }
        }
        for (op, node) in [(Operator::Remember, Node::Remember), (Operator::Forget, Node::Forget), (Operator::Erase, Node::Erase)] {
            if spec.allows(op) {
                choices.extend([node, node]);
            }
        }
        if spec.allows(Operator::At) && !sig.noms().is_empty() {
            choices.extend([Node::At, Node::At]);
        }
    }
    let node = choices[rng.below(choices.len())];
    *budget = budget.saturating_sub(1);
    let pick = |names: &[String], rng: &mut Prng| names[rng.below(names.len())].clone();
    match node {
        Node::True => Formula::True,
        Node::False => Formula::False,
        Node::Prop => Formula::Prop(pick(sig.props(), rng)),
        Node::Nom => Formula::Nom(pick(sig.noms(), rng)),
        Node::Known => Formula::Known,
        Node::Not => Formula::not(gen(spec, sig, depth, budget, rng)),
        Node::And | Node::Or | Node::Implies | Node::Iff => {
            let a = gen(spec, sig, depth, budget, rng);
            let b = gen(spec, sig, depth, budget, rng);
            match node {
                Node::And => Formula::and(a, b),
                Node::Or => Formula::or(a, b),
                Node::Implies => Formula::implies(a, b),
                _ => Formula::iff(a, b),
            }
        }
        Node::Diamond | Node::Box | Node::DDiamond | Node::DBox => {
            let r = pick(sig.rels(), rng);
            let body = gen(spec, sig, depth - 1, budget, rng);
            match node {
                Node::Diamond => Formula::diamond(r, body),
                Node::Box => Formula::boxed(r, body),
                Node::DDiamond => Formula::ddiamond(r, body),
                _ => Formula::dbox(r, body),
            }
        }
        Node::Remember => Formula::remember(gen(spec, sig, depth, budget, rng)),
        Node::Forget => Formula::forget(gen(spec, sig, depth, budget, rng)),
        Node::Erase => Formula::erase(gen(spec, sig, depth, budget, rng)),
        Node::At => {
            let i = pick(sig.noms(), rng);
            Formula::at(i, gen(spec, sig, depth, budget, rng))
        }
    }
}

/// The signature used by the suites for a dialect: two propositions, one
/// relation, and two nominals when the dialect has them.
pub fn suite_signature(spec: &LogicSpec) -> Signature {
    let noms: &[&str] = if spec.allows(Operator::Nominal) { &["i", "j"] } else { &[] };
    Signature::new(["p", "q"], ["r"], noms.iter().copied()).expect("fixed signature is valid")
}

/// A random model for `spec`: memory dialects get a random memory.
pub fn random_model_for(spec: &LogicSpec, sig: &Signature, max_worlds: usize, rng: &mut Prng) -> KripkeModel {
    let n = 1 + rng.below(max_worlds.max(1));
    let edge_prob = [0.2, 0.35, 0.5][rng.below(3)];
    let seed = rng.next_u64();
    let mut m = random_model(&GenParams::new(n, edge_prob, 0.5, seed, sig.clone()));
    if spec.is_memory() {
        let mem = (0..n).filter(|_| rng.coin(0.3)).collect();
        m = m.with_memory(mem);
    }
    m
}
