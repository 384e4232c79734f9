//! Translation of modal formulas and models into first-order logic with
//! equality, and the inverse model translation.
//!
//! Bound variables are named after their quantifier nesting depth (`y0`,
//! `y1`, ...), so both sides of a binary connective translate independently
//! and the translation commutes with the connectives structurally.
//!
//! Memory operators are encoded with a [`MemTrail`]: `rem`, `forg`, `erase`
//! and the memorizing modalities record what happened to which term, and
//! `known` becomes a case distinction over that record that falls back to
//! the memory predicate `K`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fo::{FoFormula, FoStructure, Term, XAssignment, X};
use crate::kripke::{is_world_id, KripkeModel, ModelError, PointedModel};
use crate::syntax::{is_ident, Formula, LogicSpec, Signature, SyntaxError};

/// The unary predicate holding the memory.
pub const MEMORY_PREDICATE: &str = "K";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("`{0}` is reserved for the memory predicate")]
    ReservedName(String),
    #[error("structure does not have the shape of a translated model: {0}")]
    ShapeMismatch(String),
}

/// The FO constant naming nominal `i`.
pub fn nominal_constant(i: &str) -> String {
    format!("c_{i}")
}

fn bound_var(depth: usize) -> String {
    format!("y{depth}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrailEntry {
    Added(Term),
    Deleted(Term),
    Barrier,
}

/// What the enclosing memory operators did, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemTrail {
    entries: Vec<TrailEntry>,
}

impl MemTrail {
    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn pushed(&self, entry: TrailEntry) -> MemTrail {
        let mut entries = self.entries.clone();
        entries.push(entry);
        MemTrail { entries }
    }

    /// The translation of `known` evaluated at `cur`.
    pub fn known(&self, cur: &Term) -> FoFormula {
        known_from(&self.entries, cur)
    }
}

fn known_from(entries: &[TrailEntry], cur: &Term) -> FoFormula {
    let Some((last, rest)) = entries.split_last() else {
        return FoFormula::pred(MEMORY_PREDICATE, cur.clone());
    };
    match last {
        TrailEntry::Barrier => FoFormula::False,
        TrailEntry::Added(t) if t == cur => FoFormula::True,
        TrailEntry::Deleted(t) if t == cur => FoFormula::False,
        TrailEntry::Added(t) => FoFormula::or(FoFormula::Eq(cur.clone(), t.clone()), known_from(rest, cur)),
        TrailEntry::Deleted(t) => {
            FoFormula::and(FoFormula::not(FoFormula::Eq(cur.clone(), t.clone())), known_from(rest, cur))
        }
    }
}

/// Translates `f` into a first-order formula with free variable `x`.
pub fn translate_formula(f: &Formula, spec: &LogicSpec) -> Result<FoFormula, TranslateError> {
    if let Some(op) = f.operators().into_iter().find(|&op| !spec.allows(op)) {
        return Err(SyntaxError::OperatorNotInDialect(op).into());
    }
    Ok(translate_at(f, &Term::var(X), 0, &MemTrail::default()))
}

/// Translates `f` at term `cur`, with `depth` enclosing quantifiers.
pub fn translate_at(f: &Formula, cur: &Term, depth: usize, trail: &MemTrail) -> FoFormula {
    let tr = |g: &Formula| translate_at(g, cur, depth, trail);
    let step = |r: &str, g: &Formula, exists: bool, trail: &MemTrail| {
        let y = bound_var(depth);
        let edge = FoFormula::rel(r, cur.clone(), Term::var(&y));
        let body = translate_at(g, &Term::var(&y), depth + 1, trail);
        if exists {
            FoFormula::exists(y, FoFormula::and(edge, body))
        } else {
            FoFormula::forall(y, FoFormula::implies(edge, body))
        }
    };
    match f {
        Formula::True => FoFormula::True,
        Formula::False => FoFormula::False,
        Formula::Prop(p) => FoFormula::pred(p, cur.clone()),
        Formula::Nom(i) => FoFormula::Eq(cur.clone(), Term::constant(nominal_constant(i))),
        Formula::Known => trail.known(cur),
        Formula::Not(a) => FoFormula::not(tr(a)),
        Formula::And(a, b) => FoFormula::and(tr(a), tr(b)),
        Formula::Or(a, b) => FoFormula::or(tr(a), tr(b)),
        Formula::Implies(a, b) => FoFormula::implies(tr(a), tr(b)),
        Formula::Iff(a, b) => FoFormula::iff(tr(a), tr(b)),
        Formula::Diamond(r, a) => step(r, a, true, trail),
        Formula::Box(r, a) => step(r, a, false, trail),
        Formula::DDiamond(r, a) => step(r, a, true, &trail.pushed(TrailEntry::Added(cur.clone()))),
        Formula::DBox(r, a) => step(r, a, false, &trail.pushed(TrailEntry::Added(cur.clone()))),
        Formula::Remember(a) => translate_at(a, cur, depth, &trail.pushed(TrailEntry::Added(cur.clone()))),
        Formula::Forget(a) => translate_at(a, cur, depth, &trail.pushed(TrailEntry::Deleted(cur.clone()))),
        Formula::Erase(a) => translate_at(a, cur, depth, &trail.pushed(TrailEntry::Barrier)),
        Formula::At(i, a) => translate_at(a, &Term::constant(nominal_constant(i)), depth, trail),
    }
}

/// The structure corresponding to `m`, with `x` bound to `w`.
pub fn translate_model(m: &KripkeModel, w: &str) -> Result<(FoStructure, XAssignment), TranslateError> {
    let point = m.index(w).ok_or_else(|| TranslateError::UnknownWorld(w.to_string()))?;
    if m.val().contains_key(MEMORY_PREDICATE) {
        return Err(TranslateError::ReservedName(MEMORY_PREDICATE.to_string()));
    }
    let mut unary = m.val().clone();
    unary.insert(MEMORY_PREDICATE.to_string(), m.mem().clone());
    let structure = FoStructure {
        domain: m.worlds().to_vec(),
        unary,
        binary: m.rels().clone(),
        consts: m.noms().iter().map(|(i, &v)| (nominal_constant(i), v)).collect(),
    };
    Ok((structure, XAssignment(point)))
}

fn shape(reason: impl Into<String>) -> TranslateError {
    TranslateError::ShapeMismatch(reason.into())
}

/// The pointed model a translated structure came from.
pub fn untranslate_model(a: &FoStructure, g: XAssignment) -> Result<PointedModel, TranslateError> {
    a.validate().map_err(|e| shape(e.to_string()))?;
    if g.0 >= a.domain.len() {
        return Err(shape("x is bound outside the domain"));
    }
    if let Some(bad) = a.domain.iter().find(|d| !is_world_id(d)) {
        return Err(shape(format!("`{bad}` is not a valid world id")));
    }
    if a.domain.windows(2).any(|w| w[0] >= w[1]) {
        return Err(shape("domain is not strictly sorted"));
    }
    let Some(memory) = a.unary.get(MEMORY_PREDICATE) else {
        return Err(shape("missing memory predicate K"));
    };
    if let Some(bad) = a.unary.keys().chain(a.binary.keys()).find(|n| !is_ident(n)) {
        return Err(shape(format!("`{bad}` is not a valid predicate name")));
    }
    if let Some(both) = a.binary.keys().find(|r| a.unary.contains_key(*r)) {
        return Err(shape(format!("`{both}` is both unary and binary")));
    }
    let mut noms = BTreeMap::new();
    for (c, &v) in &a.consts {
        match c.strip_prefix("c_") {
            Some(i) if is_ident(i) => {
                noms.insert(i.to_string(), v);
            }
            _ => return Err(shape(format!("constant `{c}` does not name a nominal"))),
        }
    }
    let mut m = KripkeModel::new(a.domain.iter().cloned()).map_err(model_shape)?;
    for (p, ext) in a.unary.iter().filter(|(p, _)| *p != MEMORY_PREDICATE) {
        m = m.declare_prop(p).map_err(model_shape)?;
        for &v in ext {
            m = m.with_prop(p, &a.domain[v]).map_err(model_shape)?;
        }
    }
    for (r, edges) in &a.binary {
        m = m.declare_rel(r).map_err(model_shape)?;
        for &(u, v) in edges {
            m = m.with_edge(r, &a.domain[u], &a.domain[v]).map_err(model_shape)?;
        }
    }
    for (i, v) in noms {
        m = m.with_nom(&i, &a.domain[v]).map_err(model_shape)?;
    }
    let m = m.with_memory(memory.clone());
    PointedModel::new(m, &a.domain[g.0]).map_err(model_shape)
}

/// [`untranslate_model`] restricted to structures over `sig`: predicates and
/// relations must be declared there and constants must be exactly its nominals.
pub fn untranslate_model_in(a: &FoStructure, g: XAssignment, sig: &Signature) -> Result<PointedModel, TranslateError> {
    if let Some(p) = a.unary.keys().find(|p| *p != MEMORY_PREDICATE && !sig.props().contains(p)) {
        return Err(shape(format!("undeclared predicate `{p}`")));
    }
    if let Some(r) = a.binary.keys().find(|r| !sig.rels().contains(r)) {
        return Err(shape(format!("undeclared relation `{r}`")));
    }
    let expected: BTreeSet<String> = sig.noms().iter().map(|i| nominal_constant(i)).collect();
    if a.consts.keys().cloned().collect::<BTreeSet<_>>() != expected {
        return Err(shape("constants differ from the declared nominals"));
    }
    untranslate_model(a, g)
}

fn model_shape(e: ModelError) -> TranslateError {
    shape(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::{fo_check, x_assignment};
    use crate::kripke::load_model;
    use crate::semantics::check;
    use crate::syntax::parse_formula_unchecked;

    fn tr(s: &str) -> FoFormula {
        translate_formula(&parse_formula_unchecked(s).unwrap(), &LogicSpec::full()).unwrap()
    }

    #[test]
    fn standard_clauses() {
        assert_eq!(tr("p").to_lisp(), "(p x)");
        assert_eq!(tr("<r>p").to_lisp(), "(exists y0 (and (r x y0) (p y0)))");
        assert_eq!(tr("[r]<r>p").to_lisp(), "(forall y0 (implies (r x y0) (exists y1 (and (r y0 y1) (p y1)))))");
        assert_eq!(tr("known").to_lisp(), "(K x)");
        assert_eq!(tr("@i p").to_lisp(), "(p c_i)");
        assert_eq!(tr("'i").to_lisp(), "(= x c_i)");
    }

    #[test]
    fn memory_trail() {
        assert_eq!(tr("rem known"), FoFormula::True);
        assert_eq!(tr("forg known"), FoFormula::False);
        assert_eq!(tr("erase known"), FoFormula::False);
        assert_eq!(tr("rem <r>known").to_lisp(), "(exists y0 (and (r x y0) (or (= y0 x) (K y0))))");
        assert_eq!(tr("<<r>>known").to_lisp(), "(exists y0 (and (r x y0) (or (= y0 x) (K y0))))");
    }

    #[test]
    fn operators_are_checked() {
        let f = parse_formula_unchecked("rem p").unwrap();
        assert!(matches!(translate_formula(&f, &LogicSpec::bml()), Err(TranslateError::Syntax(_))));
    }

    #[test]
    fn model_translation() {
        let (m, _) = load_model("worlds: a b\nrel r: a->b\nval p: b\nmem: a\nnom i1: b").unwrap();
        let (s, g) = translate_model(&m, "a").unwrap();
        assert_eq!(g, XAssignment(0));
        assert_eq!(s.unary["K"], BTreeSet::from([0]));
        assert_eq!(s.consts["c_i1"], 1);
        let back = untranslate_model(&s, g).unwrap();
        assert_eq!(back.model, m);
        assert_eq!(back.point_name(), "a");
        assert!(matches!(translate_model(&m, "z"), Err(TranslateError::UnknownWorld(_))));
        let reserved = load_model("worlds: a\nval K: a").unwrap().0;
        assert!(matches!(translate_model(&reserved, "a"), Err(TranslateError::ReservedName(_))));
    }

    #[test]
    fn shape_checks() {
        let (m, _) = load_model("worlds: a\nrel r:").unwrap();
        let (mut s, g) = translate_model(&m, "a").unwrap();
        let sig = m.signature().unwrap();
        assert!(untranslate_model_in(&s, g, &sig).is_ok());
        s.binary.insert("extra".into(), BTreeSet::new());
        assert!(matches!(untranslate_model_in(&s, g, &sig), Err(TranslateError::ShapeMismatch(_))));
        s.unary.remove("K");
        assert!(matches!(untranslate_model(&s, g), Err(TranslateError::ShapeMismatch(_))));
    }

    #[test]
    fn preserves_truth_on_a_memory_example() {
        let (m, _) = load_model("worlds: a b\nrel r: a->b b->a").unwrap();
        for text in ["rem <r>~known", "rem <r><r>known", "rem <r>forg <r>known", "<<r>><r>known", "rem erase <r><r>known"] {
            let f = parse_formula_unchecked(text).unwrap();
            let (s, g) = translate_model(&m, "a").unwrap();
            let fo = translate_formula(&f, &LogicSpec::full()).unwrap();
            assert_eq!(fo_check(&s, &x_assignment(g), &fo).unwrap(), check(&m, "a", &f).unwrap(), "{text}");
        }
    }
}
