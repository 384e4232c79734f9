//! Formula syntax shared by every dialect: signatures, dialect descriptors,
//! the formula AST, and its surface parser/printer.

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use parse::{parse_formula, parse_formula_unchecked};
pub use print::print_formula;

/// Which kind of name an identifier was expected to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    Prop,
    Rel,
    Nom,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Prop => "proposition",
            NameKind::Rel => "relation",
            NameKind::Nom => "nominal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { name: String, kind: NameKind },
    #[error("operator `{0}` is not part of the dialect")]
    OperatorNotInDialect(Operator),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid dialect: {0}")]
    InvalidSpec(String),
}

/// Returns true for `[a-zA-Z][a-zA-Z0-9_]*`.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

const KEYWORDS: [&str; 6] = ["true", "false", "rem", "forg", "erase", "known"];

/// Proposition, relation and nominal names available to formulas.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    props: Vec<String>,
    rels: Vec<String>,
    noms: Vec<String>,
}

impl Signature {
    pub fn new<P, R, N>(props: P, rels: R, noms: N) -> Result<Self, SyntaxError>
    where
        P: IntoIterator,
        P::Item: Into<String>,
        R: IntoIterator,
        R::Item: Into<String>,
        N: IntoIterator,
        N::Item: Into<String>,
    {
        let sig = Signature {
            props: props.into_iter().map(Into::into).collect(),
            rels: rels.into_iter().map(Into::into).collect(),
            noms: noms.into_iter().map(Into::into).collect(),
        };
        sig.validate()?;
        Ok(sig)
    }

    fn validate(&self) -> Result<(), SyntaxError> {
        let mut seen = BTreeSet::new();
        for name in self.props.iter().chain(&self.rels).chain(&self.noms) {
            if !is_ident(name) {
                return Err(SyntaxError::InvalidSignature(format!("`{name}` is not an identifier")));
            }
            if self.props.contains(name) && KEYWORDS.contains(&name.as_str()) {
                return Err(SyntaxError::InvalidSignature(format!("`{name}` is a reserved word")));
            }
            if !seen.insert(name.as_str()) {
                return Err(SyntaxError::InvalidSignature(format!("`{name}` declared twice")));
            }
        }
        Ok(())
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn rels(&self) -> &[String] {
        &self.rels
    }

    pub fn noms(&self) -> &[String] {
        &self.noms
    }

    pub fn has(&self, kind: NameKind, name: &str) -> bool {
        let list = match kind {
            NameKind::Prop => &self.props,
            NameKind::Rel => &self.rels,
            NameKind::Nom => &self.noms,
        };
        list.iter().any(|n| n == name)
    }

    /// Union of two signatures, keeping first-seen order.
    pub fn merge(&self, other: &Signature) -> Result<Signature, SyntaxError> {
        fn join(a: &[String], b: &[String]) -> Vec<String> {
            let mut out = a.to_vec();
            for n in b {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            out
        }
        let sig = Signature {
            props: join(&self.props, &other.props),
            rels: join(&self.rels, &other.rels),
            noms: join(&self.noms, &other.noms),
        };
        sig.validate()?;
        Ok(sig)
    }
}

/// Operators a dialect may enable. Booleans other than negation are always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    Diamond,
    Box,
    DDiamond,
    DBox,
    Known,
    Remember,
    Forget,
    Erase,
    Nominal,
    At,
    Negation,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Diamond => "diamond",
            Operator::Box => "box",
            Operator::DDiamond => "ddiamond",
            Operator::DBox => "dbox",
            Operator::Known => "known",
            Operator::Remember => "remember",
            Operator::Forget => "forget",
            Operator::Erase => "erase",
            Operator::Nominal => "nominal",
            Operator::At => "at",
            Operator::Negation => "negation",
        })
    }
}

/// A dialect: the set of enabled operators plus whether negation is available.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogicSpec {
    name: String,
    operators: BTreeSet<Operator>,
    has_negation: bool,
}

/// Names accepted by [`LogicSpec::by_name`].
pub const DIALECT_NAMES: [&str; 9] = [
    "bml",
    "bml-minus",
    "hl",
    "hl-at",
    "ml-diamond",
    "ml-ddiamond",
    "ml-forget",
    "ml-erase",
    "ml-full",
];

impl LogicSpec {
    pub fn new(
        name: impl Into<String>,
        operators: impl IntoIterator<Item = Operator>,
        has_negation: bool,
    ) -> Result<Self, SyntaxError> {
        let operators: BTreeSet<Operator> =
            operators.into_iter().filter(|op| *op != Operator::Negation).collect();
        let memory = [Operator::Known, Operator::Remember, Operator::Forget, Operator::Erase, Operator::DDiamond, Operator::DBox];
        if memory.iter().any(|op| operators.contains(op))
            && !(operators.contains(&Operator::Remember) && operators.contains(&Operator::Known))
        {
            return Err(SyntaxError::InvalidSpec("memory dialects need both remember and known".into()));
        }
        if operators.contains(&Operator::At) && !operators.contains(&Operator::Nominal) {
            return Err(SyntaxError::InvalidSpec("@ requires nominals".into()));
        }
        Ok(LogicSpec { name: name.into(), operators, has_negation })
    }

    /// The fixed dialects addressable from the command line.
    pub fn by_name(name: &str) -> Option<LogicSpec> {
        use Operator::*;
        let (ops, neg): (&[Operator], bool) = match name {
            "bml" => (&[Diamond, Box], true),
            "bml-minus" => (&[Diamond], false),
            "hl" => (&[Diamond, Box, Nominal], true),
            "hl-at" => (&[Diamond, Box, Nominal, At], true),
            "ml-diamond" => (&[Remember, Known, Diamond, Box], true),
            "ml-ddiamond" => (&[Remember, Known, DDiamond, DBox], true),
            "ml-forget" => (&[Remember, Known, Forget, Diamond, Box], true),
            "ml-erase" => (&[Remember, Known, Erase, Diamond, Box], true),
            "ml-full" => (&[Remember, Known, Forget, Erase, Diamond, Box, DDiamond, DBox], true),
            _ => return None,
        };
        Some(LogicSpec::new(name, ops.iter().copied(), neg).expect("built-in dialects are valid"))
    }

    pub fn bml() -> LogicSpec {
        LogicSpec::by_name("bml").unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operators(&self) -> &BTreeSet<Operator> {
        &self.operators
    }

    pub fn has_negation(&self) -> bool {
        self.has_negation
    }

    pub fn allows(&self, op: Operator) -> bool {
        if op == Operator::Negation {
            self.has_negation
        } else {
            self.operators.contains(&op)
        }
    }

    /// True when any memory operator is enabled.
    pub fn is_memory(&self) -> bool {
        self.operators.contains(&Operator::Remember)
    }

    /// A dialect with every operator and negation; used when no restriction applies.
    pub fn full() -> LogicSpec {
        use Operator::*;
        LogicSpec::new(
            "all",
            [Diamond, Box, DDiamond, DBox, Known, Remember, Forget, Erase, Nominal, At],
            true,
        )
        .unwrap()
    }
}

impl fmt::Display for LogicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Formula AST over the union of all dialects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Nom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Diamond(String, Box<Formula>),
    Box(String, Box<Formula>),
    DDiamond(String, Box<Formula>),
    DBox(String, Box<Formula>),
    Known,
    Remember(Box<Formula>),
    Forget(Box<Formula>),
    Erase(Box<Formula>),
    At(String, Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn nom(name: impl Into<String>) -> Formula {
        Formula::Nom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn diamond(rel: impl Into<String>, f: Formula) -> Formula {
        Formula::Diamond(rel.into(), Box::new(f))
    }

    pub fn boxed(rel: impl Into<String>, f: Formula) -> Formula {
        Formula::Box(rel.into(), Box::new(f))
    }

    pub fn ddiamond(rel: impl Into<String>, f: Formula) -> Formula {
        Formula::DDiamond(rel.into(), Box::new(f))
    }

    pub fn dbox(rel: impl Into<String>, f: Formula) -> Formula {
        Formula::DBox(rel.into(), Box::new(f))
    }

    pub fn remember(f: Formula) -> Formula {
        Formula::Remember(Box::new(f))
    }

    pub fn forget(f: Formula) -> Formula {
        Formula::Forget(Box::new(f))
    }

    pub fn erase(f: Formula) -> Formula {
        Formula::Erase(Box::new(f))
    }

    pub fn at(nom: impl Into<String>, f: Formula) -> Formula {
        Formula::At(nom.into(), Box::new(f))
    }

    /// Conjunction of a list; the empty conjunction is `true`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Nesting depth of relational modalities. Memory operators, `@` and
    /// booleans do not count.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::Nom(_) | Formula::Known => 0,
            Formula::Not(f) | Formula::Remember(f) | Formula::Forget(f) | Formula::Erase(f) | Formula::At(_, f) => {
                f.modal_depth()
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Diamond(_, f) | Formula::Box(_, f) | Formula::DDiamond(_, f) | Formula::DBox(_, f) => {
                1 + f.modal_depth()
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::Nom(_) | Formula::Known => 1,
            Formula::Not(f)
            | Formula::Remember(f)
            | Formula::Forget(f)
            | Formula::Erase(f)
            | Formula::At(_, f)
            | Formula::Diamond(_, f)
            | Formula::Box(_, f)
            | Formula::DDiamond(_, f)
            | Formula::DBox(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// The operators this node and its children need from a dialect.
    pub fn operators(&self) -> BTreeSet<Operator> {
        let mut out = BTreeSet::new();
        self.collect_operators(&mut out);
        out
    }

    fn collect_operators(&self, out: &mut BTreeSet<Operator>) {
        out.extend(self.own_operator());
        self.for_each_child(|c| c.collect_operators(out));
    }

    fn own_operator(&self) -> Option<Operator> {
        match self {
            Formula::Nom(_) => Some(Operator::Nominal),
            Formula::Not(_) | Formula::Implies(..) | Formula::Iff(..) => Some(Operator::Negation),
            Formula::Diamond(..) => Some(Operator::Diamond),
            Formula::Box(..) => Some(Operator::Box),
            Formula::DDiamond(..) => Some(Operator::DDiamond),
            Formula::DBox(..) => Some(Operator::DBox),
            Formula::Known => Some(Operator::Known),
            Formula::Remember(_) => Some(Operator::Remember),
            Formula::Forget(_) => Some(Operator::Forget),
            Formula::Erase(_) => Some(Operator::Erase),
            Formula::At(..) => Some(Operator::At),
            _ => None,
        }
    }

    fn for_each_child(&self, mut f: impl FnMut(&Formula)) {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::Nom(_) | Formula::Known => {}
            Formula::Not(a)
            | Formula::Remember(a)
            | Formula::Forget(a)
            | Formula::Erase(a)
            | Formula::At(_, a)
            | Formula::Diamond(_, a)
            | Formula::Box(_, a)
            | Formula::DDiamond(_, a)
            | Formula::DBox(_, a) => f(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                f(a);
                f(b);
            }
        }
    }

    /// Checks names against `sig` and operators against `spec`.
    ///
    /// Negation is required for `~`, `->` and `<->`; `false` is accepted in
    /// every dialect.
    pub fn validate(&self, sig: &Signature, spec: &LogicSpec) -> Result<(), SyntaxError> {
        let mut err = None;
        self.walk(&mut |node| {
            if err.is_some() {
                return;
            }
            let name_check = match node {
                Formula::Prop(p) => Some((NameKind::Prop, p)),
                Formula::Nom(n) | Formula::At(n, _) => Some((NameKind::Nom, n)),
                Formula::Diamond(r, _) | Formula::Box(r, _) | Formula::DDiamond(r, _) | Formula::DBox(r, _) => {
                    Some((NameKind::Rel, r))
                }
                _ => None,
            };
            if let Some((kind, name)) = name_check {
                if !sig.has(kind, name) {
                    err = Some(SyntaxError::UnknownName { name: name.clone(), kind });
                    return;
                }
            }
            if let Some(op) = node.own_operator().filter(|op| !spec.allows(*op)) {
                err = Some(SyntaxError::OperatorNotInDialect(op));
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        self.for_each_child(|c| c.walk(f));
    }

    /// Nominals mentioned anywhere in the formula.
    pub fn nominals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |n| {
            if let Formula::Nom(i) | Formula::At(i, _) = n {
                out.insert(i.clone());
            }
        });
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}
