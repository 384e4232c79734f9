//! Simulations and bisimulations assembled from per-operator conditions.
//!
//! The decision procedure works on pairs of configurations (memory, world)
//! and computes the decreasing chain `W_0 ⊇ W_1 ⊇ ...` where `W_n` holds the
//! pairs on which Duplicator survives `n` modal rounds: atomic agreement,
//! modal conditions against `W_{n-1}`, and closure conditions (remember,
//! forget, erase, @) as a greatest fixpoint inside each level. The limit is
//! the largest simulation. Every removed pair records when it was removed,
//! which is enough to trace a distinguishing formula of minimal modal depth.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::configspace::{ClosureKind, ConfigSpace, SpaceError, SpaceOps, DEFAULT_LIMIT};
use crate::kripke::KripkeModel;
use crate::semantics::{check, eval};
use crate::syntax::{Formula, LogicSpec, Operator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("state space exceeds the configured bound of {0}")]
    StateSpaceExceeded(usize),
}

impl From<SpaceError> for EquivError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::StateSpaceExceeded(n) => EquivError::StateSpaceExceeded(n),
        }
    }
}

/// The structural conditions a relation must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConditions {
    pub agree: bool,
    pub kagree: bool,
    pub remember: bool,
    pub forget: bool,
    pub erase: bool,
    pub forth: bool,
    pub back: bool,
    pub mforth: bool,
    pub mback: bool,
    pub nagree: bool,
    pub nom: bool,
    pub atomic_one_directional: bool,
}

/// The union of the per-operator conditions of `spec`.
pub fn conditions_for(spec: &LogicSpec) -> SimConditions {
    let neg = spec.has_negation();
    SimConditions {
        agree: true,
        kagree: spec.allows(Operator::Known),
        remember: spec.allows(Operator::Remember),
        forget: spec.allows(Operator::Forget),
        erase: spec.allows(Operator::Erase),
        forth: spec.allows(Operator::Diamond) || spec.allows(Operator::Box),
        back: spec.allows(Operator::Box) || (neg && spec.allows(Operator::Diamond)),
        mforth: spec.allows(Operator::DDiamond) || spec.allows(Operator::DBox),
        mback: spec.allows(Operator::DBox) || (neg && spec.allows(Operator::DDiamond)),
        nagree: spec.allows(Operator::Nominal),
        nom: spec.allows(Operator::At),
        atomic_one_directional: !neg,
    }
}

impl SimConditions {
    /// The one-directional variant: no back conditions, atomic inclusion.
    pub fn directed(self) -> Self {
        SimConditions { back: false, mback: false, atomic_one_directional: true, ..self }
    }

    pub fn closures(&self, noms: &BTreeSet<String>) -> Vec<ClosureKind> {
        let mut out = Vec::new();
        if self.remember {
            out.push(ClosureKind::Remember);
        }
        if self.forget {
            out.push(ClosureKind::Forget);
        }
        if self.erase {
            out.push(ClosureKind::Erase);
        }
        if self.nom {
            out.extend(noms.iter().cloned().map(ClosureKind::At));
        }
        out
    }

    pub fn space_ops(&self, rels: &BTreeSet<String>, noms: &BTreeSet<String>) -> SpaceOps {
        SpaceOps {
            rels: rels.iter().cloned().collect(),
            plain: self.forth || self.back,
            memorizing: self.mforth || self.mback,
            closures: self.closures(noms),
        }
    }
}

/// A position: a memory and a world, by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub memory: BTreeSet<String>,
    pub point: String,
}

impl Config {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(memory: I, point: impl Into<String>) -> Self {
        Config { memory: memory.into_iter().map(Into::into).collect(), point: point.into() }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mem: Vec<&str> = self.memory.iter().map(String::as_str).collect();
        write!(f, "({}|{})", mem.join(","), self.point)
    }
}

pub type ConfigPair = (Config, Config);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub related: bool,
    /// The largest relation found, sorted, when `related`.
    pub witness: Option<Vec<ConfigPair>>,
    /// A formula true on exactly one side, when not `related`.
    pub distinguisher: Option<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivOptions {
    /// Bound on configurations and on configuration pairs.
    pub limit: usize,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { limit: DEFAULT_LIMIT }
    }
}

/// Which side of a pair a formula is true on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

const ALIVE: (u32, u32) = (u32::MAX, u32::MAX);

/// The refinement chain over the pairs of two models' configurations.
pub struct Refinement<'m> {
    pub space: ConfigSpace<'m>,
    pub conds: SimConditions,
    spec: Option<LogicSpec>,
    props: Vec<String>,
    noms: Vec<String>,
    left: std::ops::Range<usize>,
    right: std::ops::Range<usize>,
    key: Vec<(u32, u32)>,
    computed: u32,
    stable: bool,
}

impl<'m> Refinement<'m> {
    pub fn new(conds: SimConditions, m: &'m KripkeModel, n: &'m KripkeModel, limit: usize) -> Result<Self, EquivError> {
        let rels: BTreeSet<String> = m.rels().keys().chain(n.rels().keys()).cloned().collect();
        let noms: BTreeSet<String> = m.noms().keys().chain(n.noms().keys()).cloned().collect();
        let props: Vec<String> =
            m.val().keys().chain(n.val().keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let space = ConfigSpace::build(&[m, n], conds.space_ops(&rels, &noms), limit)?;
        let (left, right) = (space.range(0), space.range(1));
        let pairs = left.len().checked_mul(right.len()).filter(|&p| p <= limit);
        let Some(pairs) = pairs else {
            return Err(EquivError::StateSpaceExceeded(limit));
        };
        Ok(Refinement {
            space,
            conds,
            spec: None,
            props,
            noms: noms.into_iter().collect(),
            left,
            right,
            key: vec![ALIVE; pairs],
            computed: 0,
            stable: false,
        })
    }

    /// Restricts traced formulas to the operators of `spec`.
    pub fn with_spec(mut self, spec: &LogicSpec) -> Self {
        self.spec = Some(spec.clone());
        self
    }

    fn idx(&self, c: usize, d: usize) -> usize {
        (c - self.left.start) * self.right.len() + (d - self.right.start)
    }

    fn pair_of(&self, i: usize) -> (usize, usize) {
        (self.left.start + i / self.right.len(), self.right.start + i % self.right.len())
    }

    pub fn key(&self, c: usize, d: usize) -> (u32, u32) {
        self.key[self.idx(c, d)]
    }

    /// Config ids of the left and right pointed models.
    pub fn initial(&self, w: usize, v: usize) -> (usize, usize) {
        (self.space.initial(0, w), self.space.initial(1, v))
    }

    /// Whether `(c, d)` survives `n` modal rounds; needs levels up to `n`.
    pub fn in_level(&self, c: usize, d: usize, n: u32) -> bool {
        assert!(self.stable || n < self.computed, "level {n} not computed");
        self.key(c, d).0 > n
    }

    /// Whether `(c, d)` is in the largest relation; needs [`Self::run`] to the end.
    pub fn related(&self, c: usize, d: usize) -> bool {
        assert!(self.stable, "refinement not run to stability");
        self.key(c, d) == ALIVE
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// Number of modal rounds Duplicator survives from `(c, d)`, `None` for all.
    pub fn rank(&self, c: usize, d: usize) -> Option<u32> {
        let k = self.key(c, d);
        (k != ALIVE).then_some(k.0)
    }

    pub fn atomic_agree(&self, c: usize, d: usize) -> bool {
        self.atomic_difference(c, d).is_none()
    }

    fn atomic_difference(&self, c: usize, d: usize) -> Option<(Formula, Side)> {
        let s = &self.space;
        let one_way = self.conds.atomic_one_directional;
        let differs = |a: bool, b: bool| -> Option<Side> {
            if a && !b {
                Some(Side::Left)
            } else if b && !a && !one_way {
                Some(Side::Right)
            } else {
                None
            }
        };
        if self.conds.agree {
            for p in &self.props {
                if let Some(side) = differs(s.holds(p, c), s.holds(p, d)) {
                    return Some((Formula::prop(p.clone()), side));
                }
            }
        }
        if self.conds.kagree {
            if let Some(side) = differs(s.known(c), s.known(d)) {
                return Some((Formula::Known, side));
            }
        }
        if self.conds.nagree {
            for i in &self.noms {
                if let Some(side) = differs(s.is_nominal(i, c), s.is_nominal(i, d)) {
                    return Some((Formula::nom(i.clone()), side));
                }
            }
        }
        None
    }

    fn member_at(&self, c: usize, d: usize, bound: (u32, u32)) -> bool {
        self.key(c, d) > bound
    }

    /// Modal conditions of `(c, d)` against `W_{n-1}`.
    fn modal_ok(&self, c: usize, d: usize, n: u32) -> bool {
        self.modal_failure(c, d, n).is_none()
    }

    pub(crate) fn modal_failure(&self, c: usize, d: usize, n: u32) -> Option<ModalFailure> {
        let s = &self.space;
        let bound = (n - 1, u32::MAX);
        let member = |a: usize, b: usize| self.member_at(a, b, bound);
        let checks = [
            (self.conds.forth, false, Side::Left),
            (self.conds.back, false, Side::Right),
            (self.conds.mforth, true, Side::Left),
            (self.conds.mback, true, Side::Right),
        ];
        for (active, memorizing, side) in checks {
            if !active {
                continue;
            }
            for r in 0..s.ops.rels.len() {
                let table = if memorizing { &s.msucc } else { &s.succ };
                let (mine, theirs) = match side {
                    Side::Left => (&table[c][r], &table[d][r]),
                    Side::Right => (&table[d][r], &table[c][r]),
                };
                for &x in mine {
                    let matched = theirs.iter().any(|&y| match side {
                        Side::Left => member(x, y),
                        Side::Right => member(y, x),
                    });
                    if !matched {
                        return Some(ModalFailure { rel: r, memorizing, side, moved: x });
                    }
                }
            }
        }
        None
    }

    pub(crate) fn closure_failure(&self, c: usize, d: usize, bound: (u32, u32)) -> Option<(usize, usize, usize)> {
        let s = &self.space;
        (0..s.ops.closures.len()).find_map(|k| match (s.closures[c][k], s.closures[d][k]) {
            (Some(t1), Some(t2)) if !self.member_at(t1, t2, bound) => Some((k, t1, t2)),
            _ => None,
        })
    }

    /// Computes levels until stable or until `W_max` is known.
    pub fn run(&mut self, max: Option<u32>) {
        while !self.stable && max.is_none_or(|m| self.computed <= m) {
            self.step();
        }
    }

    fn step(&mut self) {
        let n = self.computed;
        let pairs = self.key.len();
        let mut removed = Vec::new();
        if n == 0 {
            for i in 0..pairs {
                let (c, d) = self.pair_of(i);
                if !self.atomic_agree(c, d) {
                    self.key[i] = (0, 0);
                    removed.push(i);
                }
            }
            let all: Vec<usize> = (0..pairs).filter(|&i| self.key[i] == ALIVE).collect();
            removed.extend(self.closure_fixpoint(0, all));
        } else {
            let candidates: Vec<usize> = if n == 1 {
                (0..pairs).filter(|&i| self.key[i] == ALIVE).collect()
            } else {
                let last: Vec<usize> = (0..pairs).filter(|&i| self.key[i].0 == n - 1).collect();
                self.dependents(&last, false)
            };
            for i in candidates {
                let (c, d) = self.pair_of(i);
                if self.key[i] == ALIVE && !self.modal_ok(c, d, n) {
                    self.key[i] = (n, 0);
                    removed.push(i);
                }
            }
            let next = self.dependents(&removed, true);
            removed.extend(self.closure_fixpoint(n, next));
            if removed.is_empty() {
                self.stable = true;
            }
        }
        self.computed = n + 1;
    }

    fn closure_fixpoint(&mut self, n: u32, mut candidates: Vec<usize>) -> Vec<usize> {
        let mut all = Vec::new();
        if self.space.ops.closures.is_empty() {
            return all;
        }
        let mut j = 1;
        while !candidates.is_empty() {
            let mut removed = Vec::new();
            for i in candidates {
                let (c, d) = self.pair_of(i);
                if self.key[i] == ALIVE && self.closure_failure(c, d, (n, j - 1)).is_some() {
                    self.key[i] = (n, j);
                    removed.push(i);
                }
            }
            candidates = self.dependents(&removed, true);
            all.extend(removed);
            j += 1;
        }
        all
    }

    fn dependents(&self, removed: &[usize], closure: bool) -> Vec<usize> {
        let preds = if closure { &self.space.closure_preds } else { &self.space.modal_preds };
        let mut seen = FixedBitSet::with_capacity(self.key.len());
        let mut out = Vec::new();
        for &i in removed {
            let (c2, d2) = self.pair_of(i);
            for &c in &preds[c2] {
                for &d in &preds[d2] {
                    let j = self.idx(c, d);
                    if self.key[j] == ALIVE && !seen.put(j) {
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All pairs in the largest relation, as named configurations.
    pub fn relation(&self) -> Vec<ConfigPair> {
        let mut out: Vec<ConfigPair> = (0..self.key.len())
            .filter(|&i| self.key[i] == ALIVE)
            .map(|i| {
                let (c, d) = self.pair_of(i);
                (self.config(c), self.config(d))
            })
            .collect();
        out.sort();
        out
    }

    pub fn config(&self, c: usize) -> Config {
        Config { memory: self.space.memory_names(c), point: self.space.point_name(c).to_string() }
    }

    fn allows(&self, op: Operator) -> bool {
        match &self.spec {
            Some(spec) => spec.allows(op),
            None => match op {
                Operator::Negation => !self.conds.atomic_one_directional,
                Operator::Diamond | Operator::Box => self.conds.forth || self.conds.back,
                Operator::DDiamond | Operator::DBox => self.conds.mforth || self.conds.mback,
                _ => true,
            },
        }
    }

    /// A formula separating `(c, d)`, with the side it is true on.
    pub fn explain(&self, c: usize, d: usize) -> Option<(Formula, Side)> {
        let mut memo = HashMap::new();
        self.explain_memo(c, d, &mut memo)
    }

    fn explain_memo(
        &self,
        c: usize,
        d: usize,
        memo: &mut HashMap<(usize, usize), Option<(Formula, Side)>>,
    ) -> Option<(Formula, Side)> {
        if let Some(hit) = memo.get(&(c, d)) {
            return hit.clone();
        }
        let key = self.key(c, d);
        let result = if key == ALIVE {
            None
        } else if key == (0, 0) {
            self.atomic_difference(c, d)
        } else if key.1 == 0 {
            self.modal_failure(c, d, key.0).and_then(|fail| self.explain_modal(c, d, key.0, fail, memo))
        } else {
            self.closure_failure(c, d, (key.0, key.1 - 1)).and_then(|(k, t1, t2)| {
                let (f, side) = self.explain_memo(t1, t2, memo)?;
                Some((self.space.ops.closures[k].wrap(f), side))
            })
        };
        memo.insert((c, d), result.clone());
        result
    }

    fn orient(&self, found: Option<(Formula, Side)>, want: Side) -> Option<Formula> {
        let (f, side) = found?;
        if side == want {
            Some(f)
        } else if self.allows(Operator::Negation) {
            Some(match f {
                Formula::Not(inner) => *inner,
                other => Formula::not(other),
            })
        } else {
            None
        }
    }

    fn diamond(&self, rel: &str, memorizing: bool, body: Formula) -> Option<Formula> {
        let (dia, bx) = if memorizing { (Operator::DDiamond, Operator::DBox) } else { (Operator::Diamond, Operator::Box) };
        if self.allows(dia) {
            Some(if memorizing { Formula::ddiamond(rel, body) } else { Formula::diamond(rel, body) })
        } else if self.allows(bx) && self.allows(Operator::Negation) {
            let inner = Formula::not(body);
            Some(Formula::not(if memorizing { Formula::dbox(rel, inner) } else { Formula::boxed(rel, inner) }))
        } else {
            None
        }
    }

    fn boxed(&self, rel: &str, memorizing: bool, body: Formula) -> Option<Formula> {
        let (dia, bx) = if memorizing { (Operator::DDiamond, Operator::DBox) } else { (Operator::Diamond, Operator::Box) };
        if self.allows(bx) {
            Some(if memorizing { Formula::dbox(rel, body) } else { Formula::boxed(rel, body) })
        } else if self.allows(dia) && self.allows(Operator::Negation) {
            let inner = Formula::not(body);
            Some(Formula::not(if memorizing { Formula::ddiamond(rel, inner) } else { Formula::diamond(rel, inner) }))
        } else {
            None
        }
    }

    fn explain_modal(
        &self,
        c: usize,
        d: usize,
        n: u32,
        fail: ModalFailure,
        memo: &mut HashMap<(usize, usize), Option<(Formula, Side)>>,
    ) -> Option<(Formula, Side)> {
        let s = &self.space;
        let rel = s.ops.rels[fail.rel].clone();
        let table = if fail.memorizing { &s.msucc } else { &s.succ };
        let others: Vec<usize> = match fail.side {
            Side::Left => table[d][fail.rel].clone(),
            Side::Right => table[c][fail.rel].clone(),
        };
        debug_assert!(n >= 1);
        let pair = |o: usize| match fail.side {
            Side::Left => (fail.moved, o),
            Side::Right => (o, fail.moved),
        };
        // the mover's side gets a diamond over a conjunction
        let mut conj = Vec::new();
        let mut ok = true;
        for &o in &others {
            let (a, b) = pair(o);
            let found = self.explain_memo(a, b, memo);
            match self.orient(found, fail.side) {
                Some(f) => conj.push((f, o)),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let body = Formula::conj(self.prune(conj, false));
            if let Some(f) = self.diamond(&rel, fail.memorizing, body) {
                return Some((f, fail.side));
            }
        }
        // the other side gets a box over a disjunction
        let mut disj = Vec::new();
        for &o in &others {
            let (a, b) = pair(o);
            let found = self.explain_memo(a, b, memo);
            disj.push((self.orient(found, fail.side.other())?, o));
        }
        let kept = self.prune(disj, true);
        let body = kept.into_iter().reduce(Formula::or).unwrap_or(Formula::False);
        self.boxed(&rel, fail.memorizing, body).map(|f| (f, fail.side.other()))
    }

    /// Drops items while every target still has one kept item evaluating to `cover`.
    fn prune(&self, items: Vec<(Formula, usize)>, cover: bool) -> Vec<Formula> {
        let mut uniq: Vec<Formula> = Vec::new();
        for (f, _) in &items {
            if !uniq.contains(f) {
                uniq.push(f.clone());
            }
        }
        let targets: Vec<usize> = items.iter().map(|&(_, t)| t).collect();
        let truth: Vec<Vec<bool>> = uniq
            .iter()
            .map(|f| {
                targets
                    .iter()
                    .map(|&t| {
                        let node = &self.space.nodes[t];
                        eval(self.space.model_of(t), &node.mem, node.point, f) == cover
                    })
                    .collect()
            })
            .collect();
        let mut keep = vec![true; uniq.len()];
        for i in 0..uniq.len() {
            keep[i] = false;
            let covered = (0..targets.len()).all(|t| (0..uniq.len()).any(|j| keep[j] && truth[j][t]));
            if !covered {
                keep[i] = true;
            }
        }
        uniq.into_iter().zip(keep).filter_map(|(f, k)| k.then_some(f)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ModalFailure {
    pub rel: usize,
    pub memorizing: bool,
    pub side: Side,
    pub moved: usize,
}

fn point_index(m: &KripkeModel, w: &str) -> Result<usize, EquivError> {
    m.index(w).ok_or_else(|| EquivError::UnknownWorld(w.to_string()))
}

/// Decides `conds`-relatedness of `(m, w)` and `(n, v)`; traced formulas use
/// the operators of `spec`.
pub fn decide(
    conds: SimConditions,
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    n: &KripkeModel,
    v: &str,
    opts: &EquivOptions,
) -> Result<SimulationOutcome, EquivError> {
    let (wi, vi) = (point_index(m, w)?, point_index(n, v)?);
    let mut refinement = Refinement::new(conds, m, n, opts.limit)?.with_spec(spec);
    refinement.run(None);
    let (c, d) = refinement.initial(wi, vi);
    if refinement.related(c, d) {
        return Ok(SimulationOutcome { related: true, witness: Some(refinement.relation()), distinguisher: None });
    }
    let distinguisher = refinement
        .explain(c, d)
        .map(|(f, _)| f)
        .filter(|f| matches!((check(m, w, f), check(n, v, f)), (Ok(a), Ok(b)) if a != b));
    Ok(SimulationOutcome { related: false, witness: None, distinguisher })
}

pub fn bisimilar(spec: &LogicSpec, m: &KripkeModel, w: &str, n: &KripkeModel, v: &str) -> Result<SimulationOutcome, EquivError> {
    decide(conditions_for(spec), spec, m, w, n, v, &EquivOptions::default())
}

pub fn simulated_by(spec: &LogicSpec, m: &KripkeModel, w: &str, n: &KripkeModel, v: &str) -> Result<SimulationOutcome, EquivError> {
    decide(conditions_for(spec).directed(), spec, m, w, n, v, &EquivOptions::default())
}

/// Checks `relation` against `conds` directly on the models, independently
/// of the refinement engine. Returns the first violated condition.
pub fn verify_relation(
    conds: &SimConditions,
    m: &KripkeModel,
    n: &KripkeModel,
    relation: &[ConfigPair],
) -> Result<(), String> {
    if relation.is_empty() {
        return Err("relation is empty".into());
    }
    let z: HashSet<&ConfigPair> = relation.iter().collect();
    let has = |a: &Config, b: &Config| z.contains(&(a.clone(), b.clone()));
    let props: BTreeSet<&String> = m.val().keys().chain(n.val().keys()).collect();
    let noms: BTreeSet<&String> = m.noms().keys().chain(n.noms().keys()).collect();
    let rels: BTreeSet<&String> = m.rels().keys().chain(n.rels().keys()).collect();
    let implies = |a: bool, b: bool| if conds.atomic_one_directional { !a || b } else { a == b };
    let succ = |model: &KripkeModel, cfg: &Config, r: &str| -> Vec<String> {
        let w = model.index(&cfg.point).expect("checked");
        model.successors(r, w).map(|x| model.name(x).to_string()).collect()
    };
    for (a, b) in relation {
        let describe = |what: &str| format!("{what} fails at ({a}, {b})");
        let (Some(wa), Some(wb)) = (m.index(&a.point), n.index(&b.point)) else {
            return Err(describe("world lookup"));
        };
        if a.memory.iter().any(|x| m.index(x).is_none()) || b.memory.iter().any(|x| n.index(x).is_none()) {
            return Err(describe("memory lookup"));
        }
        if conds.agree && !props.iter().all(|p| implies(m.holds(p, wa), n.holds(p, wb))) {
            return Err(describe("agree"));
        }
        if conds.kagree && !implies(a.memory.contains(&a.point), b.memory.contains(&b.point)) {
            return Err(describe("kagree"));
        }
        if conds.nagree && !noms.iter().all(|i| implies(m.nom(i) == Some(wa), n.nom(i) == Some(wb))) {
            return Err(describe("nagree"));
        }
        let with = |cfg: &Config, on: bool| {
            let mut mem = cfg.memory.clone();
            if on {
                mem.insert(cfg.point.clone());
            } else {
                mem.remove(&cfg.point);
            }
            Config { memory: mem, point: cfg.point.clone() }
        };
        if conds.remember && !has(&with(a, true), &with(b, true)) {
            return Err(describe("remember"));
        }
        if conds.forget && !has(&with(a, false), &with(b, false)) {
            return Err(describe("forget"));
        }
        let erased = |cfg: &Config| Config { memory: BTreeSet::new(), point: cfg.point.clone() };
        if conds.erase && !has(&erased(a), &erased(b)) {
            return Err(describe("erase"));
        }
        if conds.nom {
            for i in &noms {
                if let (Some(x), Some(y)) = (m.nom(i), n.nom(i)) {
                    let ta = Config { memory: a.memory.clone(), point: m.name(x).to_string() };
                    let tb = Config { memory: b.memory.clone(), point: n.name(y).to_string() };
                    if !has(&ta, &tb) {
                        return Err(describe("nom"));
                    }
                }
            }
        }
        for r in &rels {
            let (sa, sb) = (succ(m, a, r), succ(n, b, r));
            let moved = |cfg: &Config, to: &str, memorize: bool| {
                let mut mem = cfg.memory.clone();
                if memorize {
                    mem.insert(cfg.point.clone());
                }
                Config { memory: mem, point: to.to_string() }
            };
            for (active, memorize, name) in [(conds.forth, false, "forth"), (conds.mforth, true, "mforth")] {
                if active && !sa.iter().all(|x| sb.iter().any(|y| has(&moved(a, x, memorize), &moved(b, y, memorize)))) {
                    return Err(describe(name));
                }
            }
            for (active, memorize, name) in [(conds.back, false, "back"), (conds.mback, true, "mback")] {
                if active && !sb.iter().all(|y| sa.iter().any(|x| has(&moved(a, x, memorize), &moved(b, y, memorize)))) {
                    return Err(describe(name));
                }
            }
        }
    }
    Ok(())
}

/// One line per pair: `((mem1|w1),(mem2|w2))`.
pub fn serialize_witness(pairs: &[ConfigPair]) -> String {
    pairs.iter().map(|(a, b)| format!("({a},{b})\n")).collect()
}

/// Inverse of [`serialize_witness`].
pub fn parse_witness(text: &str) -> Result<Vec<ConfigPair>, String> {
    let parse_config = |s: &str| -> Result<Config, String> {
        let inner = s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| format!("bad config `{s}`"))?;
        let (mem, point) = inner.split_once('|').ok_or_else(|| format!("bad config `{s}`"))?;
        let memory = mem.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect();
        Ok(Config { memory, point: point.to_string() })
    };
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let inner = line.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| format!("bad pair `{line}`"))?;
        let split = inner.find(")(").or_else(|| inner.find("),(")).ok_or_else(|| format!("bad pair `{line}`"))?;
        let left = &inner[..=split];
        let right = inner[split + 1..].trim_start_matches(',');
        out.push((parse_config(left)?, parse_config(right)?));
    }
    Ok(out)
}

/// The coarsest partition of `m`'s worlds into BML-bisimilarity classes,
/// computed by signature refinement. Blocks are sorted by their least world.
pub fn bml_partition_refinement(m: &KripkeModel) -> Vec<BTreeSet<String>> {
    let n = m.len();
    let props: Vec<Vec<&str>> = (0..n).map(|w| m.props_at(w).collect()).collect();
    let mut block = renumber(&props);
    loop {
        let signatures: Vec<(usize, Vec<(&String, BTreeSet<usize>)>)> = (0..n)
            .map(|w| {
                let succ = m.rels().keys().map(|r| (r, m.successors(r, w).map(|v| block[v]).collect())).collect();
                (block[w], succ)
            })
            .collect();
        let next = renumber(&signatures);
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
    let mut out: Vec<BTreeSet<String>> = groups.into_values().collect();
    out.sort();
    out
}

fn renumber<T: Ord>(sigs: &[T]) -> Vec<usize> {
    let distinct: BTreeMap<&T, usize> =
        sigs.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    sigs.iter().map(|s| distinct[s]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::load_model;
    use crate::syntax::parse_formula_unchecked;

    fn model(text: &str) -> KripkeModel {
        load_model(text).unwrap().0
    }

    fn spec(name: &str) -> LogicSpec {
        LogicSpec::by_name(name).unwrap()
    }

    #[test]
    fn condition_tables() {
        let bml = conditions_for(&spec("bml"));
        assert!(bml.agree && bml.forth && bml.back && !bml.atomic_one_directional);
        assert!(!bml.kagree && !bml.remember && !bml.mforth && !bml.nagree);
        let minus = conditions_for(&spec("bml-minus"));
        assert!(minus.forth && !minus.back && minus.atomic_one_directional);
        let ml = conditions_for(&spec("ml-diamond"));
        assert!(ml.kagree && ml.remember && ml.forth && ml.back && !ml.forget && !ml.erase);
    }

    #[test]
    fn reflexive_point_and_two_cycle() {
        let refl = model("worlds: c\nrel r: c->c");
        let cycle = model("worlds: a b\nrel r: a->b b->a");
        assert!(bisimilar(&spec("bml"), &refl, "c", &cycle, "a").unwrap().related);
        let out = bisimilar(&spec("ml-diamond"), &refl, "c", &cycle, "a").unwrap();
        assert!(!out.related);
        let f = out.distinguisher.unwrap();
        assert_ne!(check(&refl, "c", &f).unwrap(), check(&cycle, "a", &f).unwrap());
        assert_eq!(f.modal_depth(), 1);
        assert!(check(&cycle, "a", &parse_formula_unchecked("rem <r>~known").unwrap()).unwrap());
    }

    #[test]
    fn witness_round_trip() {
        let pairs = vec![(Config::new(["a", "b"], "a"), Config::new(Vec::<String>::new(), "u"))];
        let text = serialize_witness(&pairs);
        assert_eq!(text, "((a,b|a),(|u))\n");
        assert_eq!(parse_witness(&text).unwrap(), pairs);
    }

    #[test]
    fn partition_of_a_clique() {
        let m = model("worlds: a b c\nrel r: a->b a->c b->a b->c c->a c->b a->a b->b c->c");
        assert_eq!(bml_partition_refinement(&m).len(), 1);
    }

    #[test]
    fn limits() {
        let m = model("worlds: a b c\nrel r: a->b b->c c->a");
        let err = decide(conditions_for(&spec("ml-full")), &spec("ml-full"), &m, "a", &m, "a", &EquivOptions { limit: 10 });
        assert_eq!(err.unwrap_err(), EquivError::StateSpaceExceeded(10));
    }
}
