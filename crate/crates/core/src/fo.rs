//! Finite first-order structures, formulas with equality, a Tarskian
//! evaluator, and the bounded back-and-forth game.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
}

/// The distinguished free variable.
pub const X: &str = "x";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FoFormula {
    True,
    False,
    Pred(String, Term),
    Rel(String, Term, Term),
    Eq(Term, Term),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Iff(Box<FoFormula>, Box<FoFormula>),
    Exists(String, Box<FoFormula>),
    Forall(String, Box<FoFormula>),
}

impl FoFormula {
    pub fn pred(p: impl Into<String>, t: Term) -> Self {
        FoFormula::Pred(p.into(), t)
    }

    pub fn rel(r: impl Into<String>, a: Term, b: Term) -> Self {
        FoFormula::Rel(r.into(), a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: FoFormula) -> Self {
        FoFormula::Not(Box::new(a))
    }

    pub fn and(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, a: FoFormula) -> Self {
        FoFormula::Exists(v.into(), Box::new(a))
    }

    pub fn forall(v: impl Into<String>, a: FoFormula) -> Self {
        FoFormula::Forall(v.into(), Box::new(a))
    }

    pub fn quantifier_rank(&self) -> usize {
        match self {
            FoFormula::True | FoFormula::False | FoFormula::Pred(..) | FoFormula::Rel(..) | FoFormula::Eq(..) => 0,
            FoFormula::Not(a) => a.quantifier_rank(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) | FoFormula::Iff(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            FoFormula::Exists(_, a) | FoFormula::Forall(_, a) => 1 + a.quantifier_rank(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            FoFormula::True | FoFormula::False => {}
            FoFormula::Pred(_, t) => term(t, bound),
            FoFormula::Rel(_, a, b) | FoFormula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            FoFormula::Not(a) => a.collect_free(bound, out),
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) | FoFormula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FoFormula::Exists(v, a) | FoFormula::Forall(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn symbols(&self, preds: &mut BTreeSet<String>, rels: &mut BTreeSet<String>, consts: &mut BTreeSet<String>) {
        let mut term = |t: &Term| {
            if let Term::Const(c) = t {
                consts.insert(c.clone());
            }
        };
        match self {
            FoFormula::True | FoFormula::False => {}
            FoFormula::Pred(p, t) => {
                preds.insert(p.clone());
                term(t);
            }
            FoFormula::Rel(r, a, b) => {
                rels.insert(r.clone());
                term(a);
                term(b);
            }
            FoFormula::Eq(a, b) => {
                term(a);
                term(b);
            }
            FoFormula::Not(a) | FoFormula::Exists(_, a) | FoFormula::Forall(_, a) => a.symbols(preds, rels, consts),
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) | FoFormula::Iff(a, b) => {
                a.symbols(preds, rels, consts);
                b.symbols(preds, rels, consts);
            }
        }
    }

    /// Lisp-like normal form, e.g. `(exists y0 (and (r x y0) (p y0)))`.
    pub fn to_lisp(&self) -> String {
        let mut out = String::new();
        self.write_lisp(&mut out);
        out
    }

    fn write_lisp(&self, out: &mut String) {
        match self {
            FoFormula::True => out.push_str("true"),
            FoFormula::False => out.push_str("false"),
            FoFormula::Pred(p, t) => out.push_str(&format!("({p} {t})")),
            FoFormula::Rel(r, a, b) => out.push_str(&format!("({r} {a} {b})")),
            FoFormula::Eq(a, b) => out.push_str(&format!("(= {a} {b})")),
            FoFormula::Not(a) => {
                out.push_str("(not ");
                a.write_lisp(out);
                out.push(')');
            }
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) | FoFormula::Iff(a, b) => {
                let head = match self {
                    FoFormula::And(..) => "and",
                    FoFormula::Or(..) => "or",
                    FoFormula::Implies(..) => "implies",
                    _ => "iff",
                };
                out.push('(');
                out.push_str(head);
                out.push(' ');
                a.write_lisp(out);
                out.push(' ');
                b.write_lisp(out);
                out.push(')');
            }
            FoFormula::Exists(v, a) | FoFormula::Forall(v, a) => {
                let head = if matches!(self, FoFormula::Exists(..)) { "exists" } else { "forall" };
                out.push_str(&format!("({head} {v} "));
                a.write_lisp(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lisp())
    }
}

/// A finite structure: domain, unary and binary predicates, constants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FoStructure {
    pub domain: Vec<String>,
    pub unary: BTreeMap<String, BTreeSet<usize>>,
    pub binary: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub consts: BTreeMap<String, usize>,
}

impl FoStructure {
    pub fn validate(&self) -> Result<(), FoError> {
        let n = self.domain.len();
        if n == 0 {
            return Err(FoError::InvalidStructure("empty domain".into()));
        }
        let bad = self.unary.values().flatten().any(|&a| a >= n)
            || self.binary.values().flatten().any(|&(a, b)| a >= n || b >= n)
            || self.consts.values().any(|&a| a >= n);
        if bad {
            return Err(FoError::InvalidStructure("element outside the domain".into()));
        }
        Ok(())
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == name)
    }

    fn has_pred(&self, p: &str, a: usize) -> bool {
        self.unary.get(p).is_some_and(|s| s.contains(&a))
    }

    fn has_rel(&self, r: &str, a: usize, b: usize) -> bool {
        self.binary.get(r).is_some_and(|s| s.contains(&(a, b)))
    }
}

/// Binding of the distinguished variable `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XAssignment(pub usize);

/// A full variable assignment.
pub type Assignment = BTreeMap<String, usize>;

pub fn x_assignment(g: XAssignment) -> Assignment {
    Assignment::from([(X.to_string(), g.0)])
}

/// Tarskian truth of `f` in `a` under `g`.
pub fn fo_check(a: &FoStructure, g: &Assignment, f: &FoFormula) -> Result<bool, FoError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !g.contains_key(v)) {
        return Err(FoError::UnboundVariable(v));
    }
    let (mut preds, mut rels, mut consts) = Default::default();
    f.symbols(&mut preds, &mut rels, &mut consts);
    let missing = preds
        .iter()
        .find(|p| !a.unary.contains_key(*p))
        .or_else(|| rels.iter().find(|r| !a.binary.contains_key(*r)))
        .or_else(|| consts.iter().find(|c| !a.consts.contains_key(*c)));
    if let Some(s) = missing {
        return Err(FoError::UnknownSymbol(s.clone()));
    }
    if let Some((v, _)) = g.iter().find(|(_, &e)| e >= a.domain.len()) {
        return Err(FoError::InvalidStructure(format!("`{v}` is bound outside the domain")));
    }
    let mut env: Vec<(&str, usize)> = g.iter().map(|(k, &v)| (k.as_str(), v)).collect();
    Ok(eval(a, &mut env, f))
}

fn lookup(a: &FoStructure, env: &[(&str, usize)], t: &Term) -> usize {
    match t {
        Term::Var(v) => env.iter().rev().find(|(k, _)| k == v).map(|&(_, e)| e).expect("checked free variables"),
        Term::Const(c) => a.consts[c],
    }
}

fn eval<'f>(a: &FoStructure, env: &mut Vec<(&'f str, usize)>, f: &'f FoFormula) -> bool {
    match f {
        FoFormula::True => true,
        FoFormula::False => false,
        FoFormula::Pred(p, t) => a.has_pred(p, lookup(a, env, t)),
        FoFormula::Rel(r, s, t) => a.has_rel(r, lookup(a, env, s), lookup(a, env, t)),
        FoFormula::Eq(s, t) => lookup(a, env, s) == lookup(a, env, t),
        FoFormula::Not(x) => !eval(a, env, x),
        FoFormula::And(x, y) => eval(a, env, x) && eval(a, env, y),
        FoFormula::Or(x, y) => eval(a, env, x) || eval(a, env, y),
        FoFormula::Implies(x, y) => !eval(a, env, x) || eval(a, env, y),
        FoFormula::Iff(x, y) => eval(a, env, x) == eval(a, env, y),
        FoFormula::Exists(v, x) | FoFormula::Forall(v, x) => {
            let exists = matches!(f, FoFormula::Exists(..));
            let mut result = !exists;
            for e in 0..a.domain.len() {
                env.push((v.as_str(), e));
                let r = eval(a, env, x);
                env.pop();
                if r == exists {
                    result = exists;
                    break;
                }
            }
            result
        }
    }
}

/// Whether Duplicator survives `rounds` rounds of the back-and-forth game
/// started from `<g(x)>` and `<h(x)>`; constants are part of every position.
pub fn back_and_forth(a: &FoStructure, g: XAssignment, b: &FoStructure, h: XAssignment, rounds: usize) -> bool {
    if a.consts.keys().ne(b.consts.keys()) {
        return false;
    }
    let mut game = BackAndForth { a, b, memo: HashMap::new() };
    let start: Vec<(usize, usize)> =
        std::iter::once((g.0, h.0)).chain(a.consts.iter().map(|(c, &x)| (x, b.consts[c]))).collect();
    game.survives(canonical(start), rounds)
}

/// [`back_and_forth`] with `|A|·|B|` rounds, a cap standing in for the
/// unbounded game on finite structures.
pub fn potentially_isomorphic(a: &FoStructure, g: XAssignment, b: &FoStructure, h: XAssignment) -> bool {
    back_and_forth(a, g, b, h, a.domain.len() * b.domain.len())
}

fn canonical(mut pairs: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

struct BackAndForth<'s> {
    a: &'s FoStructure,
    b: &'s FoStructure,
    memo: HashMap<(Vec<(usize, usize)>, usize), bool>,
}

impl BackAndForth<'_> {
    fn atomic_agree(&self, pairs: &[(usize, usize)]) -> bool {
        let (a, b) = (self.a, self.b);
        let preds: BTreeSet<&String> = a.unary.keys().chain(b.unary.keys()).collect();
        let rels: BTreeSet<&String> = a.binary.keys().chain(b.binary.keys()).collect();
        pairs.iter().all(|&(x, y)| {
            preds.iter().all(|p| a.has_pred(p, x) == b.has_pred(p, y))
                && pairs.iter().all(|&(x2, y2)| {
                    (x == x2) == (y == y2) && rels.iter().all(|r| a.has_rel(r, x, x2) == b.has_rel(r, y, y2))
                })
        })
    }

    fn survives(&mut self, pairs: Vec<(usize, usize)>, rounds: usize) -> bool {
        if let Some(&v) = self.memo.get(&(pairs.clone(), rounds)) {
            return v;
        }
        let result = self.atomic_agree(&pairs)
            && (rounds == 0 || {
                let forth = (0..self.a.domain.len()).all(|c| {
                    (0..self.b.domain.len()).any(|d| {
                        let mut next = pairs.clone();
                        next.push((c, d));
                        self.survives(canonical(next), rounds - 1)
                    })
                });
                forth
                    && (0..self.b.domain.len()).all(|d| {
                        (0..self.a.domain.len()).any(|c| {
                            let mut next = pairs.clone();
                            next.push((c, d));
                            self.survives(canonical(next), rounds - 1)
                        })
                    })
            });
        self.memo.insert((pairs, rounds), result);
        result
    }
}
