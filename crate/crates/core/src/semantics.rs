//! Model checking for the full operator family.
//!
//! The memory is threaded through the recursion as a bit set instead of
//! materializing `M[+w]`, `M[-w]` and `M[*]`; the results coincide with the
//! mutate-and-recurse definition (see the tests).

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::kripke::KripkeModel;
use crate::syntax::{Formula, LogicSpec, Signature, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("nominal `{0}` is not assigned in the model")]
    UnassignedNominal(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// The dialect and signature formulas are validated against before evaluation.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub spec: LogicSpec,
    pub sig: Signature,
}

impl EvalConfig {
    pub fn new(spec: LogicSpec, sig: Signature) -> Self {
        EvalConfig { spec, sig }
    }

    pub fn check(&self, m: &KripkeModel, w: &str, f: &Formula) -> Result<bool, EvalError> {
        f.validate(&self.sig, &self.spec)?;
        check(m, w, f)
    }

    pub fn check_global(&self, m: &KripkeModel, f: &Formula) -> Result<bool, EvalError> {
        f.validate(&self.sig, &self.spec)?;
        check_global(m, f)
    }

    pub fn satisfying_set(&self, m: &KripkeModel, f: &Formula) -> Result<BTreeSet<String>, EvalError> {
        f.validate(&self.sig, &self.spec)?;
        satisfying_set(m, f)
    }
}

/// Errors for nominals the model does not assign.
pub fn check_nominals(m: &KripkeModel, f: &Formula) -> Result<(), EvalError> {
    match f.nominals().into_iter().find(|i| m.nom(i).is_none()) {
        Some(i) => Err(EvalError::UnassignedNominal(i)),
        None => Ok(()),
    }
}

/// The model's memory as a bit set.
pub fn memory_bits(m: &KripkeModel) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(m.len());
    for &w in m.mem() {
        bits.insert(w);
    }
    bits
}

/// `M, w |= f`.
pub fn check(m: &KripkeModel, w: &str, f: &Formula) -> Result<bool, EvalError> {
    let wi = m.index(w).ok_or_else(|| EvalError::UnknownWorld(w.to_string()))?;
    check_nominals(m, f)?;
    Ok(eval(m, &memory_bits(m), wi, f))
}

/// Truth at every world.
pub fn check_global(m: &KripkeModel, f: &Formula) -> Result<bool, EvalError> {
    check_nominals(m, f)?;
    let mem = memory_bits(m);
    Ok((0..m.len()).all(|w| eval(m, &mem, w, f)))
}

/// Worlds where `f` holds.
pub fn satisfying_set(m: &KripkeModel, f: &Formula) -> Result<BTreeSet<String>, EvalError> {
    check_nominals(m, f)?;
    let mem = memory_bits(m);
    Ok((0..m.len()).filter(|&w| eval(m, &mem, w, f)).map(|w| m.name(w).to_string()).collect())
}

/// Evaluates `f` at world index `w` with memory `mem` in place of the
/// model's own. Nominals must be assigned (see [`check_nominals`]).
pub fn eval(m: &KripkeModel, mem: &FixedBitSet, w: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Prop(p) => m.holds(p, w),
        Formula::Nom(i) => m.nom(i) == Some(w),
        Formula::Known => mem.contains(w),
        Formula::Not(a) => !eval(m, mem, w, a),
        Formula::And(a, b) => eval(m, mem, w, a) && eval(m, mem, w, b),
        Formula::Or(a, b) => eval(m, mem, w, a) || eval(m, mem, w, b),
        Formula::Implies(a, b) => !eval(m, mem, w, a) || eval(m, mem, w, b),
        Formula::Iff(a, b) => eval(m, mem, w, a) == eval(m, mem, w, b),
        Formula::Diamond(r, a) => m.successors(r, w).any(|v| eval(m, mem, v, a)),
        Formula::Box(r, a) => m.successors(r, w).all(|v| eval(m, mem, v, a)),
        Formula::DDiamond(r, a) => {
            let mem = with_bit(mem, w, true);
            m.successors(r, w).any(|v| eval(m, &mem, v, a))
        }
        Formula::DBox(r, a) => {
            let mem = with_bit(mem, w, true);
            m.successors(r, w).all(|v| eval(m, &mem, v, a))
        }
        Formula::Remember(a) => eval(m, &with_bit(mem, w, true), w, a),
        Formula::Forget(a) => eval(m, &with_bit(mem, w, false), w, a),
        Formula::Erase(a) => eval(m, &FixedBitSet::with_capacity(m.len()), w, a),
        Formula::At(i, a) => match m.nom(i) {
            Some(target) => eval(m, mem, target, a),
            None => panic!("unassigned nominal `{i}`; call check_nominals first"),
        },
    }
}

fn with_bit(mem: &FixedBitSet, w: usize, on: bool) -> FixedBitSet {
    let mut out = mem.clone();
    out.set(w, on);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::load_model;
    use crate::syntax::parse_formula_unchecked;

    fn f(s: &str) -> Formula {
        parse_formula_unchecked(s).unwrap()
    }

    fn sim_right() -> KripkeModel {
        load_model("worlds: v0 t1 t2 t3\nrel r: v0->t1 v0->t2 v0->t3\nval p: t1 t2 t3\nval q: t2\nval r_prop: t3\n")
            .unwrap()
            .0
    }

    fn sim_left() -> KripkeModel {
        load_model("worlds: w0 s1 s2\nrel r: w0->s1 w0->s2\nval p: s1 s2\nval q: s2\nval r_prop:\n").unwrap().0
    }

    #[test]
    fn diamond_r_separates_the_simulation_figure() {
        assert!(check(&sim_right(), "v0", &f("<r>r_prop")).unwrap());
        assert!(!check(&sim_left(), "w0", &f("<r>r_prop")).unwrap());
    }

    #[test]
    fn forced_truths() {
        let m = sim_right();
        for w in m.worlds() {
            assert!(check(&m, w, &f("rem known")).unwrap());
        }
        let h = load_model("worlds: a b\nnom i: b\nrel r: a->b").unwrap().0;
        assert!(check(&h, "a", &f("@i 'i")).unwrap());
        assert!(check(&h, "b", &f("'i")).unwrap());
        assert!(!check(&h, "a", &f("'i")).unwrap());
    }

    #[test]
    fn global_truth() {
        let m = sim_right();
        assert!(check_global(&m, &Formula::True).unwrap());
        assert!(!check_global(&m, &f("<r>r_prop")).unwrap());
        let endpoint = load_model("worlds: a e\nrel r: a->e").unwrap().0;
        assert!(check_global(&endpoint, &f("<r>true -> <r>[r]false")).unwrap());
    }

    #[test]
    fn satisfying_sets() {
        let m = sim_right();
        assert_eq!(satisfying_set(&m, &Formula::True).unwrap().len(), 4);
        let p: BTreeSet<String> = ["t1", "t2", "t3"].into_iter().map(String::from).collect();
        assert_eq!(satisfying_set(&m, &f("p")).unwrap(), p);
    }

    #[test]
    fn errors() {
        let m = sim_right();
        assert_eq!(check(&m, "nope", &Formula::True), Err(EvalError::UnknownWorld("nope".into())));
        assert_eq!(check(&m, "v0", &f("@j p")), Err(EvalError::UnassignedNominal("j".into())));
        let cfg = EvalConfig::new(LogicSpec::bml(), m.signature().unwrap());
        assert!(matches!(cfg.check(&m, "v0", &f("rem p")), Err(EvalError::Syntax(SyntaxError::OperatorNotInDialect(_)))));
        assert!(cfg.check(&m, "v0", &f("<r>p")).unwrap());
    }

    #[test]
    fn memory_clauses() {
        // a <-> b 2-cycle vs reflexive point
        let cycle = load_model("worlds: a b\nrel r: a->b b->a").unwrap().0;
        let refl = load_model("worlds: c\nrel r: c->c").unwrap().0;
        let phi = f("rem <r>~known");
        assert!(check(&cycle, "a", &phi).unwrap());
        assert!(!check(&refl, "c", &phi).unwrap());
        assert!(!check(&cycle, "a", &f("rem <r>known")).unwrap());
        assert!(check(&cycle, "a", &f("rem <r><r>known")).unwrap());
        assert!(check(&cycle, "a", &f("rem <r>forg <r>known")).unwrap());
        assert!(!check(&cycle, "a", &f("rem forg known")).unwrap());
        assert!(check(&cycle, "a", &f("<<r>><r>known")).unwrap());
        assert!(!check(&cycle, "a", &f("rem erase <r><r>known")).unwrap());
        let stored = cycle.mem_add("a").unwrap();
        assert!(check(&stored, "a", &f("known")).unwrap());
        assert!(!check(&stored.mem_wipe(), "a", &f("known")).unwrap());
    }
}
