//! Model theory at desk scale: minimization, bounded theories, bounded
//! equivalence, invariance probing for first-order properties and a
//! definability harness over finite universes of pointed models.
//!
//! Formula enumeration (bounded theories and synthesis) is ordered by
//! `(modal depth, size, printed form)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::configspace::{ClosureKind, ConfigSpace, SpaceError, SpaceOps, DEFAULT_LIMIT};
use crate::equivalence::{
    bisimilar, bml_partition_refinement, conditions_for, simulated_by, ConfigPair, EquivError, Refinement,
    SimConditions,
};
use crate::fo::{fo_check, x_assignment, FoFormula, X};
use crate::kripke::{random_model, save_model, GenParams, KripkeModel, ModelError, PointedModel};
use crate::rng::Prng;
use crate::semantics::check;
use crate::syntax::{print_formula, Formula, LogicSpec, Operator};
use crate::translation::translate_model;

/// Default bound on the number of enumerated formulas.
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unsupported features: {0}")]
    UnsupportedFeatures(String),
    #[error("enumeration budget exceeded after {0} formulas")]
    BudgetExceeded(usize),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("state space exceeds the configured bound of {0}")]
    StateSpaceExceeded(usize),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<EquivError> for AnalysisError {
    fn from(e: EquivError) -> Self {
        match e {
            EquivError::UnknownWorld(w) => AnalysisError::UnknownWorld(w),
            EquivError::StateSpaceExceeded(n) => AnalysisError::StateSpaceExceeded(n),
        }
    }
}

impl From<SpaceError> for AnalysisError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::StateSpaceExceeded(n) => AnalysisError::StateSpaceExceeded(n),
        }
    }
}

fn point_index(m: &KripkeModel, w: &str) -> Result<usize, AnalysisError> {
    m.index(w).ok_or_else(|| AnalysisError::UnknownWorld(w.to_string()))
}

/// Enumeration order: modal depth, then size, then printed form.
pub fn formula_order_key(f: &Formula) -> (usize, usize, String) {
    (f.modal_depth(), f.size(), print_formula(f))
}

// ---------------------------------------------------------------------------
// Minimization

/// Quotient of `m` by `blocks`; each block is represented by its least world.
fn quotient(m: &KripkeModel, blocks: &[BTreeSet<String>]) -> Result<(KripkeModel, BTreeMap<String, String>), ModelError> {
    let mut map = BTreeMap::new();
    for block in blocks {
        let rep = block.iter().next().expect("blocks are nonempty");
        for w in block {
            map.insert(w.clone(), rep.clone());
        }
    }
    let rep = |i: usize| map[m.name(i)].as_str();
    let mut q = KripkeModel::new(blocks.iter().map(|b| b.iter().next().unwrap().clone()))?;
    for (r, edges) in m.rels() {
        q = q.declare_rel(r)?;
        for &(a, b) in edges {
            q = q.with_edge(r, rep(a), rep(b))?;
        }
    }
    for (p, set) in m.val() {
        q = q.declare_prop(p)?;
        for &a in set {
            q = q.with_prop(p, rep(a))?;
        }
    }
    for &a in m.mem() {
        q = q.with_mem(rep(a))?;
    }
    for (i, &a) in m.noms() {
        q = q.with_nom(i, rep(a))?;
    }
    Ok((q, map))
}

/// The BML bisimulation quotient of `m` and the map from each world to its
/// representative.
pub fn minimize(m: &KripkeModel) -> Result<(KripkeModel, BTreeMap<String, String>), AnalysisError> {
    if !m.mem().is_empty() {
        return Err(AnalysisError::UnsupportedFeatures("the model has a nonempty memory".into()));
    }
    if !m.noms().is_empty() {
        return Err(AnalysisError::UnsupportedFeatures("the model assigns nominals".into()));
    }
    Ok(quotient(m, &bml_partition_refinement(m))?)
}

/// Partition refinement that also separates worlds by memory membership and
/// by the nominals they carry.
fn labeled_partition(m: &KripkeModel) -> Vec<BTreeSet<String>> {
    let n = m.len();
    let labels: Vec<(Vec<&str>, bool, Vec<&String>)> = (0..n)
        .map(|w| {
            let noms = m.noms().iter().filter(|(_, &t)| t == w).map(|(i, _)| i).collect();
            (m.props_at(w).collect(), m.mem().contains(&w), noms)
        })
        .collect();
    let mut block = renumber(&labels);
    loop {
        let sigs: Vec<(usize, Vec<BTreeSet<usize>>)> = (0..n)
            .map(|w| (block[w], m.rels().keys().map(|r| m.successors(r, w).map(|v| block[v]).collect()).collect()))
            .collect();
        let next = renumber(&sigs);
        let count = |b: &[usize]| b.iter().collect::<BTreeSet<_>>().len();
        let done = count(&next) == count(&block);
        block = next;
        if done {
            break;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for w in 0..n {
        groups.entry(block[w]).or_default().insert(m.name(w).to_string());
    }
    groups.into_values().collect()
}

fn renumber<T: Ord>(items: &[T]) -> Vec<usize> {
    let ids: BTreeMap<&T, usize> =
        items.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    items.iter().map(|s| ids[s]).collect()
}

// ---------------------------------------------------------------------------
// Conjunction-free generators

/// The operators a generator level applies, derived from a dialect and the
/// symbols of the models at hand.
struct GeneratorGrammar {
    literals: Vec<Formula>,
    prefixes: Vec<Vec<ClosureKind>>,
    modal: Vec<(String, ModalKind)>,
}

#[derive(Debug, Clone, Copy)]
enum ModalKind {
    Diamond,
    Box,
    DDiamond,
    DBox,
}

impl ModalKind {
    fn wrap(self, rel: &str, f: Formula) -> Formula {
        match self {
            ModalKind::Diamond => Formula::diamond(rel, f),
            ModalKind::Box => Formula::boxed(rel, f),
            ModalKind::DDiamond => Formula::ddiamond(rel, f),
            ModalKind::DBox => Formula::dbox(rel, f),
        }
    }

    fn image(self, space: &ConfigSpace, rel: &str, body: &FixedBitSet) -> FixedBitSet {
        let memorizing = matches!(self, ModalKind::DDiamond | ModalKind::DBox);
        let exists = matches!(self, ModalKind::Diamond | ModalKind::DDiamond);
        space.modal_image(space.rel_index(rel), memorizing, exists, body)
    }
}

fn modal_kinds(spec: &LogicSpec) -> Vec<ModalKind> {
    [
        (Operator::Diamond, ModalKind::Diamond),
        (Operator::Box, ModalKind::Box),
        (Operator::DDiamond, ModalKind::DDiamond),
        (Operator::DBox, ModalKind::DBox),
    ]
    .into_iter()
    .filter(|(op, _)| spec.allows(*op))
    .map(|(_, k)| k)
    .collect()
}

struct Symbols {
    props: BTreeSet<String>,
    rels: BTreeSet<String>,
    noms: BTreeSet<String>,
}

impl Symbols {
    fn of(models: &[&KripkeModel]) -> Symbols {
        let mut s = Symbols { props: BTreeSet::new(), rels: BTreeSet::new(), noms: BTreeSet::new() };
        for m in models {
            s.props.extend(m.val().keys().cloned());
            s.rels.extend(m.rels().keys().cloned());
            s.noms.extend(m.noms().keys().cloned());
        }
        s
    }

    /// Nominals assigned in every model; only these can be evaluated everywhere.
    fn common_noms(models: &[&KripkeModel]) -> BTreeSet<String> {
        let mut out: Option<BTreeSet<String>> = None;
        for m in models {
            let here: BTreeSet<String> = m.noms().keys().cloned().collect();
            out = Some(match out {
                None => here,
                Some(acc) => acc.intersection(&here).cloned().collect(),
            });
        }
        out.unwrap_or_default()
    }
}

impl GeneratorGrammar {
    fn new(spec: &LogicSpec, sym: &Symbols, closures: &[ClosureKind]) -> Self {
        let neg = spec.has_negation();
        let mut literals = vec![Formula::True, Formula::False];
        let mut atoms: Vec<Formula> = sym.props.iter().map(Formula::prop).collect();
        if spec.allows(Operator::Known) {
            atoms.push(Formula::Known);
        }
        if spec.allows(Operator::Nominal) {
            atoms.extend(sym.noms.iter().map(Formula::nom));
        }
        for a in atoms {
            literals.push(a.clone());
            if neg {
                literals.push(Formula::not(a));
            }
        }
        let mut prefixes = vec![vec![]];
        for a in closures {
            prefixes.push(vec![a.clone()]);
        }
        for a in closures {
            for b in closures {
                prefixes.push(vec![a.clone(), b.clone()]);
            }
        }
        let modal = sym
            .rels
            .iter()
            .flat_map(|r| modal_kinds(spec).into_iter().map(move |k| (r.clone(), k)))
            .collect();
        GeneratorGrammar { literals, prefixes, modal }
    }

    fn prefixed(&self, base: &Formula) -> impl Iterator<Item = Formula> + '_ {
        let base = base.clone();
        self.prefixes.iter().map(move |p| p.iter().rev().fold(base.clone(), |f, k| k.wrap(f)))
    }

    fn prefixed_bits(&self, space: &ConfigSpace, bits: &FixedBitSet) -> Vec<Option<FixedBitSet>> {
        self.prefixes
            .iter()
            .map(|p| {
                p.iter().rev().try_fold(bits.clone(), |b, k| space.closure_image(k, &b))
            })
            .collect()
    }
}

fn sort_formulas(fs: &mut [Formula]) {
    fs.sort_by_cached_key(formula_order_key);
}

/// All true formulas at `(m, w)` among the conjunction-free generators of
/// modal depth at most `depth`, sorted by `(depth, size, print)`.
///
/// Generators of depth 0 are literals (`⊤`, `⊥`, atoms and, when negation is
/// available, their negations); depth `k` adds `π M g` for every generator
/// `g` of depth `k-1`, every modal operator `M` and every prefix `π` of at
/// most two closure operators (memory operations and `@i`).
pub fn bounded_theory(spec: &LogicSpec, m: &KripkeModel, w: &str, depth: usize) -> Result<Vec<Formula>, AnalysisError> {
    bounded_theory_with_budget(spec, m, w, depth, DEFAULT_BUDGET)
}

pub fn bounded_theory_with_budget(
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    depth: usize,
    budget: usize,
) -> Result<Vec<Formula>, AnalysisError> {
    let wi = point_index(m, w)?;
    let sym = Symbols::of(&[m]);
    let ops = SpaceOps::for_spec(spec, &sym.rels, &sym.noms);
    let space = ConfigSpace::build(&[m], ops.clone(), DEFAULT_LIMIT)?;
    let grammar = GeneratorGrammar::new(spec, &sym, &ops.closures);
    let start = space.initial(0, wi);

    let mut seen: HashSet<Formula> = HashSet::new();
    let mut theory = Vec::new();
    let mut frontier: Vec<(Formula, FixedBitSet)> = Vec::new();
    let mut admit = |f: Formula, bits: FixedBitSet, frontier: &mut Vec<(Formula, FixedBitSet)>| {
        if seen.insert(f.clone()) {
            if seen.len() > budget {
                return Err(AnalysisError::BudgetExceeded(seen.len()));
            }
            if bits.contains(start) {
                theory.push(f.clone());
            }
            frontier.push((f, bits));
        }
        Ok(())
    };
    for lit in &grammar.literals {
        let bits = space.denotation(lit).expect("literals evaluate in their own space");
        for (f, b) in grammar.prefixed(lit).zip(grammar.prefixed_bits(&space, &bits)) {
            if let Some(b) = b {
                admit(f, b, &mut frontier)?;
            }
        }
    }
    for _ in 0..depth {
        let previous = std::mem::take(&mut frontier);
        for (g, gbits) in &previous {
            for (rel, kind) in &grammar.modal {
                let body = kind.wrap(rel, g.clone());
                let bits = kind.image(&space, rel, gbits);
                for (f, b) in grammar.prefixed(&body).zip(grammar.prefixed_bits(&space, &bits)) {
                    if let Some(b) = b {
                        admit(f, b, &mut frontier)?;
                    }
                }
            }
        }
    }
    sort_formulas(&mut theory);
    Ok(theory)
}

/// Compares the depth-`depth` generator theories of `(m, w)` and `(n, v)`
/// without materializing them: generators are deduplicated by their truth
/// set over the joint configuration space, which preserves every truth value
/// at both points. Returns the first generator (in level order) whose truth
/// differs, or `None` when the theories agree.
pub fn bounded_theories_agree(
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    n: &KripkeModel,
    v: &str,
    depth: usize,
) -> Result<Option<Formula>, AnalysisError> {
    let (wi, vi) = (point_index(m, w)?, point_index(n, v)?);
    let sym = Symbols::of(&[m, n]);
    let noms = Symbols::common_noms(&[m, n]);
    let sym = Symbols { noms, ..sym };
    let ops = SpaceOps::for_spec(spec, &sym.rels, &sym.noms);
    let space = ConfigSpace::build(&[m, n], ops.clone(), DEFAULT_LIMIT)?;
    let grammar = GeneratorGrammar::new(spec, &sym, &ops.closures);
    let (a, b) = (space.initial(0, wi), space.initial(1, vi));

    let mut reps: HashSet<FixedBitSet> = HashSet::new();
    let mut level: Vec<(Formula, FixedBitSet)> = Vec::new();
    for lit in &grammar.literals {
        let bits = space.denotation(lit).expect("literals evaluate in the joint space");
        for (f, bb) in grammar.prefixed(lit).zip(grammar.prefixed_bits(&space, &bits)) {
            if let Some(bb) = bb {
                level.push((f, bb));
            }
        }
    }
    for d in 0..=depth {
        let mut fresh: Vec<(Formula, FixedBitSet)> = Vec::new();
        let mut differing: Vec<Formula> = Vec::new();
        for (f, bits) in level.drain(..) {
            if bits.contains(a) != bits.contains(b) {
                differing.push(f.clone());
            }
            if reps.insert(bits.clone()) {
                if reps.len() > DEFAULT_BUDGET {
                    return Err(AnalysisError::BudgetExceeded(reps.len()));
                }
                fresh.push((f, bits));
            }
        }
        if !differing.is_empty() {
            sort_formulas(&mut differing);
            return Ok(differing.into_iter().next());
        }
        if d == depth {
            break;
        }
        for (g, gbits) in &fresh {
            for (rel, kind) in &grammar.modal {
                let body = kind.wrap(rel, g.clone());
                let bits = kind.image(&space, rel, gbits);
                for (f, bb) in grammar.prefixed(&body).zip(grammar.prefixed_bits(&space, &bits)) {
                    if let Some(bb) = bb {
                        level.push((f, bb));
                    }
                }
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Bounded equivalence

/// Whether `(m, w)` and `(n, v)` agree on every formula of `spec` with modal
/// depth at most `depth`; when they do not, a formula of minimal depth true
/// on exactly one side (confirmed by the model checker).
///
/// For dialects without negation agreement is checked as simulation in both
/// directions up to `depth` rounds.
pub fn equivalent_up_to(
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    n: &KripkeModel,
    v: &str,
    depth: usize,
) -> Result<(bool, Option<Formula>), AnalysisError> {
    let (wi, vi) = (point_index(m, w)?, point_index(n, v)?);
    let conds = conditions_for(spec);
    let depth = u32::try_from(depth).unwrap_or(u32::MAX);
    let directions: Vec<(&KripkeModel, usize, &KripkeModel, usize)> =
        if spec.has_negation() { vec![(m, wi, n, vi)] } else { vec![(m, wi, n, vi), (n, vi, m, wi)] };
    for (x, xi, y, yi) in directions {
        let mut refinement = Refinement::new(conds, x, y, DEFAULT_LIMIT)?.with_spec(spec);
        refinement.run(Some(depth));
        let (c, d) = refinement.initial(xi, yi);
        if !refinement.in_level(c, d, depth) {
            let witness = refinement.explain(c, d).map(|(f, _)| f).filter(|f| {
                matches!((check(m, w, f), check(n, v, f)), (Ok(p), Ok(q)) if p != q)
            });
            return Ok((false, witness));
        }
    }
    Ok((true, None))
}

// ---------------------------------------------------------------------------
// Related pairs and invariance probing

/// Perturbations that turn a pointed model into a bisimilar one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Construction {
    /// Quotient by bisimilarity (memory and nominals kept as labels).
    Quotient,
    /// One world duplicated with the same label and successors.
    Duplicate,
    /// Two copies of every world, each edge crossing between the copies.
    DoubleCover,
    /// An isomorphic copy under fresh world names.
    Rename,
    /// Disjoint union with an unrelated random model.
    GarbageUnion,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::Quotient,
        Construction::Duplicate,
        Construction::DoubleCover,
        Construction::Rename,
        Construction::GarbageUnion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::Quotient => "quotient",
            Construction::Duplicate => "duplicate",
            Construction::DoubleCover => "double-cover",
            Construction::Rename => "rename",
            Construction::GarbageUnion => "garbage-union",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A pair of pointed models produced by a [`Construction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatedPair {
    pub construction: Construction,
    pub left: PointedModel,
    pub right: PointedModel,
}

/// Applies `kind` to `(m, w)`. Returns `None` when the construction does not
/// apply (a double cover of a model with nominals, or a duplicate of a
/// world that carries a nominal).
pub fn construct_related(
    kind: Construction,
    m: &KripkeModel,
    w: &str,
    rng: &mut Prng,
) -> Result<Option<RelatedPair>, AnalysisError> {
    let wi = point_index(m, w)?;
    let (right, point) = match kind {
        Construction::Quotient => {
            let (q, map) = quotient(m, &labeled_partition(m))?;
            let p = map[w].clone();
            (q, p)
        }
        Construction::Duplicate => {
            let u = rng.below(m.len());
            if m.noms().values().any(|&t| t == u) {
                return Ok(None);
            }
            let copy = format!("{}_dup", m.name(u));
            if m.index(&copy).is_some() {
                return Ok(None);
            }
            let mut out = KripkeModel::new(m.worlds().iter().cloned().chain([copy.clone()]))?;
            for (r, edges) in m.rels() {
                out = out.declare_rel(r)?;
                for &(a, b) in edges {
                    out = out.with_edge(r, m.name(a), m.name(b))?;
                    if a == u {
                        out = out.with_edge(r, &copy, m.name(b))?;
                    }
                    if b == u && rng.coin(0.5) {
                        out = out.with_edge(r, m.name(a), &copy)?;
                    }
                    if a == u && b == u {
                        out = out.with_edge(r, &copy, &copy)?;
                    }
                }
            }
            for (p, set) in m.val() {
                out = out.declare_prop(p)?;
                if set.contains(&u) {
                    out = out.with_prop(p, &copy)?;
                }
                for &a in set {
                    out = out.with_prop(p, m.name(a))?;
                }
            }
            for &a in m.mem() {
                out = out.with_mem(m.name(a))?;
            }
            if m.mem().contains(&u) {
                out = out.with_mem(&copy)?;
            }
            for (i, &a) in m.noms() {
                out = out.with_nom(i, m.name(a))?;
            }
            (out, w.to_string())
        }
        Construction::DoubleCover => {
            if !m.noms().is_empty() {
                return Ok(None);
            }
            let name = |x: &str, k: usize| format!("{x}_{k}");
            let mut out = KripkeModel::new(m.worlds().iter().flat_map(|x| [name(x, 0), name(x, 1)]))?;
            for (r, edges) in m.rels() {
                out = out.declare_rel(r)?;
                for &(a, b) in edges {
                    for k in 0..2 {
                        out = out.with_edge(r, &name(m.name(a), k), &name(m.name(b), 1 - k))?;
                    }
                }
            }
            for (p, set) in m.val() {
                out = out.declare_prop(p)?;
                for &a in set {
                    for k in 0..2 {
                        out = out.with_prop(p, &name(m.name(a), k))?;
                    }
                }
            }
            for &a in m.mem() {
                for k in 0..2 {
                    out = out.with_mem(&name(m.name(a), k))?;
                }
            }
            (out, name(w, 0))
        }
        Construction::Rename => {
            let mut order: Vec<usize> = (0..m.len()).collect();
            for i in (1..order.len()).rev() {
                let j = rng.below(i + 1);
                order.swap(i, j);
            }
            let fresh: BTreeMap<&str, String> =
                (0..m.len()).map(|i| (m.name(i), format!("z{}", order[i]))).collect();
            let out = m.rename(|x| fresh[x].clone())?;
            (out, fresh[w].clone())
        }
        Construction::GarbageUnion => {
            let sig = m.signature().map_err(|e| AnalysisError::InvalidUniverse(e.to_string()))?;
            let n = 1 + rng.below(3);
            let params = GenParams::new(n, 0.4, 0.5, rng.next_u64(), sig);
            let garbage = random_model(&params).mem_wipe();
            let mut junk = KripkeModel::new(garbage.worlds().iter().cloned())?;
            for (r, edges) in garbage.rels() {
                junk = junk.declare_rel(r)?;
                for &(a, b) in edges {
                    junk = junk.with_edge(r, garbage.name(a), garbage.name(b))?;
                }
            }
            for (p, set) in garbage.val() {
                junk = junk.declare_prop(p)?;
                for &a in set {
                    junk = junk.with_prop(p, garbage.name(a))?;
                }
            }
            (m.disjoint_union(&junk, "g_")?, w.to_string())
        }
    };
    let left = PointedModel { model: m.clone(), point: wi };
    let right = PointedModel::new(right, &point)?;
    Ok(Some(RelatedPair { construction: kind, left, right }))
}

/// Whether the solver relates the two sides of `pair` under `spec`, in both
/// directions for dialects without negation.
pub fn confirm_related(spec: &LogicSpec, pair: &RelatedPair) -> Result<bool, AnalysisError> {
    let (m, w) = (&pair.left.model, pair.left.point_name());
    let (n, v) = (&pair.right.model, pair.right.point_name());
    if spec.has_negation() {
        Ok(bisimilar(spec, m, w, n, v)?.related)
    } else {
        Ok(simulated_by(spec, m, w, n, v)?.related && simulated_by(spec, n, v, m, w)?.related)
    }
}

/// Pairs found by [`invariance_probe`] on which the property differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeViolation {
    pub trial: usize,
    pub construction: Construction,
    pub left: String,
    pub right: String,
    pub left_value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub trials: usize,
    pub samples: usize,
    pub violations: Vec<ProbeViolation>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: trial {} via {} (left {}, right {})", v.trial, v.construction, v.left_value, !v.left_value)?;
            writeln!(f, "--- left")?;
            write!(f, "{}", v.left)?;
            writeln!(f, "--- right")?;
            write!(f, "{}", v.right)?;
        }
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "violations: {}", self.violations.len())?;
        writeln!(f, "invariant: {}", self.violations.is_empty())
    }
}

/// Samples `trials` related pairs and reports those on which `alpha`
/// (one free variable `x`) takes different values on the translations of
/// the two sides.
///
/// Trial `t` draws a random model from `gen` with seed
/// `Prng::derive(gen.seed, t)`, a point and one of the [`Construction`]s in
/// rotation. Pairs the solver does not confirm as related under `spec` are
/// skipped, so `samples` may be smaller than `trials`.
pub fn invariance_probe(
    alpha: &FoFormula,
    spec: &LogicSpec,
    trials: usize,
    gen: &GenParams,
) -> Result<ProbeReport, AnalysisError> {
    if let Some(bad) = alpha.free_vars().into_iter().find(|v| v != X) {
        return Err(AnalysisError::InvalidFormula(format!("free variable `{bad}` other than `{X}`")));
    }
    let mut report = ProbeReport { trials, samples: 0, violations: Vec::new() };
    for t in 0..trials {
        let seed = Prng::derive(gen.seed, t as u64);
        let mut rng = Prng::new(seed);
        let params = GenParams { seed: rng.next_u64(), ..gen.clone() };
        let m = random_model(&params);
        let w = m.name(rng.below(m.len())).to_string();
        let kind = Construction::ALL[t % Construction::ALL.len()];
        let Some(pair) = construct_related(kind, &m, &w, &mut rng)? else { continue };
        if !confirm_related(spec, &pair)? {
            continue;
        }
        report.samples += 1;
        let value = |p: &PointedModel| -> Result<bool, AnalysisError> {
            let (a, g) = translate_model(&p.model, p.point_name())
                .map_err(|e| AnalysisError::InvalidFormula(e.to_string()))?;
            fo_check(&a, &x_assignment(g), alpha).map_err(|e| AnalysisError::InvalidFormula(e.to_string()))
        };
        let (l, r) = (value(&pair.left)?, value(&pair.right)?);
        if l != r {
            report.violations.push(ProbeViolation {
                trial: t,
                construction: kind,
                left: save_model(&pair.left.model, Some(pair.left.point_name())),
                right: save_model(&pair.right.model, Some(pair.right.point_name())),
                left_value: l,
            });
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Definability

/// A finite class of pointed models over one signature, each with an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    entries: Vec<(String, PointedModel)>,
}

impl Universe {
    /// Builds a universe; later structurally equal entries are dropped.
    pub fn new(entries: impl IntoIterator<Item = (String, PointedModel)>) -> Result<Self, AnalysisError> {
        let mut out: Vec<(String, PointedModel)> = Vec::new();
        let mut seen: HashSet<PointedModel> = HashSet::new();
        let mut ids: HashSet<String> = HashSet::new();
        for (id, p) in entries {
            if !ids.insert(id.clone()) {
                return Err(AnalysisError::InvalidUniverse(format!("duplicate id `{id}`")));
            }
            if seen.insert(p.clone()) {
                out.push((id, p));
            }
        }
        let Some((_, first)) = out.first() else {
            return Err(AnalysisError::InvalidUniverse("the universe is empty".into()));
        };
        let sig = first.model.signature().map_err(|e| AnalysisError::InvalidUniverse(e.to_string()))?;
        for (id, p) in &out {
            if p.model.signature().ok().as_ref() != Some(&sig) {
                return Err(AnalysisError::InvalidUniverse(format!("`{id}` has a different signature")));
            }
        }
        Ok(Universe { entries: out })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn point(&self, i: usize) -> &PointedModel {
        &self.entries[i].1
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|(x, _)| x == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PointedModel)> {
        self.entries.iter().map(|(id, p)| (id.as_str(), p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefinabilityVerdict {
    /// The first formula in enumeration order true exactly on the target.
    Defined(Formula),
    /// `inside` (in the target) is related to `outside` (not in it) by
    /// `relation`, so no formula of the dialect separates them.
    NotClosed { inside: usize, outside: usize, relation: Vec<ConfigPair>, directed: bool },
    /// No defining formula up to the given depth and size.
    ExhaustedSearch { depth: usize, size: usize },
}

/// Report header stating what a verdict does and does not establish.
pub const DEFINABILITY_HEADER: &str = "# closure check: only the necessary condition \
(closure of the target under the dialect's (bi)simulations inside the universe) is checked; \
closure under ultraproducts and ultrapowers is not checkable on finite universes";

/// The conditions the closure check uses for `spec`.
pub fn closure_conditions(spec: &LogicSpec) -> SimConditions {
    if spec.has_negation() {
        conditions_for(spec)
    } else {
        conditions_for(spec).directed()
    }
}

/// Decides whether `target` (indices into `u`) is definable in `spec` by a
/// formula of modal depth at most `depth` and size at most `size`.
pub fn definability_check(
    spec: &LogicSpec,
    u: &Universe,
    target: &BTreeSet<usize>,
    depth: usize,
    size: usize,
) -> Result<DefinabilityVerdict, AnalysisError> {
    definability_check_with_budget(spec, u, target, depth, size, DEFAULT_BUDGET)
}

pub fn definability_check_with_budget(
    spec: &LogicSpec,
    u: &Universe,
    target: &BTreeSet<usize>,
    depth: usize,
    size: usize,
    budget: usize,
) -> Result<DefinabilityVerdict, AnalysisError> {
    if let Some(&bad) = target.iter().find(|&&i| i >= u.len()) {
        return Err(AnalysisError::InvalidUniverse(format!("target index {bad} is outside the universe")));
    }
    for &a in target {
        for b in (0..u.len()).filter(|b| !target.contains(b)) {
            let (pa, pb) = (u.point(a), u.point(b));
            let (m, w, n, v) = (&pa.model, pa.point_name(), &pb.model, pb.point_name());
            let out = if spec.has_negation() { bisimilar(spec, m, w, n, v)? } else { simulated_by(spec, m, w, n, v)? };
            if out.related {
                return Ok(DefinabilityVerdict::NotClosed {
                    inside: a,
                    outside: b,
                    relation: out.witness.unwrap_or_default(),
                    directed: !spec.has_negation(),
                });
            }
        }
    }
    match synthesize(spec, u, target, depth, size, budget)? {
        Some(f) => Ok(DefinabilityVerdict::Defined(f)),
        None => Ok(DefinabilityVerdict::ExhaustedSearch { depth, size }),
    }
}

struct Rep {
    formula: Formula,
    bits: FixedBitSet,
    depth: usize,
}

/// Bottom-up search for the least `(depth, size, print)` formula whose truth
/// set over the universe points is `target`. Formulas are built from atoms,
/// negation (when available), `∧`, `∨`, closures and modal operators;
/// candidates with the same truth set over the whole configuration space as
/// an earlier one of no greater depth are discarded.
fn synthesize(
    spec: &LogicSpec,
    u: &Universe,
    target: &BTreeSet<usize>,
    max_depth: usize,
    max_size: usize,
    budget: usize,
) -> Result<Option<Formula>, AnalysisError> {
    let mut models: Vec<&KripkeModel> = Vec::new();
    let mut model_index: HashMap<&KripkeModel, usize> = HashMap::new();
    let mut starts = Vec::new();
    for (_, p) in u.iter() {
        let mi = *model_index.entry(&p.model).or_insert_with(|| {
            models.push(&p.model);
            models.len() - 1
        });
        starts.push((mi, p.point));
    }
    let sym = Symbols::of(&models);
    let sym = Symbols { noms: Symbols::common_noms(&models), ..sym };
    let ops = SpaceOps::for_spec(spec, &sym.rels, &sym.noms);
    let space = ConfigSpace::build(&models, ops.clone(), DEFAULT_LIMIT)?;
    let starts: Vec<usize> = starts.into_iter().map(|(mi, w)| space.initial(mi, w)).collect();
    let defines = |bits: &FixedBitSet| starts.iter().enumerate().all(|(i, &c)| bits.contains(c) == target.contains(&i));

    let mut atoms = vec![Formula::True, Formula::False];
    atoms.extend(sym.props.iter().map(Formula::prop));
    if spec.allows(Operator::Known) {
        atoms.push(Formula::Known);
    }
    if spec.allows(Operator::Nominal) {
        atoms.extend(sym.noms.iter().map(Formula::nom));
    }
    let modal: Vec<(String, ModalKind)> =
        sym.rels.iter().flat_map(|r| modal_kinds(spec).into_iter().map(move |k| (r.clone(), k))).collect();

    for depth_bound in 0..=max_depth {
        let mut by_size: Vec<Vec<Rep>> = (0..=max_size).map(|_| Vec::new()).collect();
        let mut best_depth: HashMap<FixedBitSet, usize> = HashMap::new();
        let mut total = 0usize;
        for s in 1..=max_size {
            let mut cands: Vec<(Formula, FixedBitSet, usize)> = Vec::new();
            if s == 1 {
                for a in &atoms {
                    cands.push((a.clone(), space.denotation(a).expect("atoms evaluate"), 0));
                }
            } else {
                for r in &by_size[s - 1] {
                    if spec.has_negation() {
                        let mut b = r.bits.clone();
                        b.toggle_range(..);
                        cands.push((Formula::not(r.formula.clone()), b, r.depth));
                    }
                    for k in &ops.closures {
                        if let Some(b) = space.closure_image(k, &r.bits) {
                            cands.push((k.wrap(r.formula.clone()), b, r.depth));
                        }
                    }
                    if r.depth < depth_bound {
                        for (rel, kind) in &modal {
                            cands.push((kind.wrap(rel, r.formula.clone()), kind.image(&space, rel, &r.bits), r.depth + 1));
                        }
                    }
                }
                for i in 1..s - 1 {
                    let j = s - 1 - i;
                    for x in &by_size[i] {
                        for y in &by_size[j] {
                            let d = x.depth.max(y.depth);
                            let mut and = x.bits.clone();
                            and.intersect_with(&y.bits);
                            cands.push((Formula::and(x.formula.clone(), y.formula.clone()), and, d));
                            let mut or = x.bits.clone();
                            or.union_with(&y.bits);
                            cands.push((Formula::or(x.formula.clone(), y.formula.clone()), or, d));
                        }
                    }
                }
            }
            total += cands.len();
            if total > budget {
                return Err(AnalysisError::BudgetExceeded(total));
            }
            let mut keyed: Vec<(usize, String, Formula, FixedBitSet)> =
                cands.into_iter().map(|(f, b, d)| (d, print_formula(&f), f, b)).collect();
            keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            if let Some((_, _, f, _)) = keyed.iter().find(|(_, _, _, b)| defines(b)) {
                return Ok(Some(f.clone()));
            }
            for (d, _, f, b) in keyed {
                let keep = best_depth.get(&b).is_none_or(|&old| d < old);
                if keep {
                    best_depth.insert(b.clone(), d);
                    by_size[s].push(Rep { formula: f, bits: b, depth: d });
                }
            }
        }
    }
    Ok(None)
}
