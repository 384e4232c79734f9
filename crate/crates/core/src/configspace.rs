//! Configuration spaces: the (memory, world) positions reachable in one or
//! more models under a chosen set of operators, with per-config transition
//! tables and compositional evaluation of formulas over all configs at once.

use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::kripke::KripkeModel;
use crate::semantics::memory_bits;
use crate::syntax::{Formula, LogicSpec, Operator};

/// Default bound on configurations and configuration pairs.
pub const DEFAULT_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("state space exceeds the configured bound of {0}")]
    StateSpaceExceeded(usize),
}

/// Operations that move between configurations without a modal step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClosureKind {
    Remember,
    Forget,
    Erase,
    At(String),
}

impl ClosureKind {
    pub fn keyword(&self) -> String {
        match self {
            ClosureKind::Remember => "rem".into(),
            ClosureKind::Forget => "forg".into(),
            ClosureKind::Erase => "erase".into(),
            ClosureKind::At(i) => format!("@{i}"),
        }
    }

    pub fn wrap(&self, f: Formula) -> Formula {
        match self {
            ClosureKind::Remember => Formula::remember(f),
            ClosureKind::Forget => Formula::forget(f),
            ClosureKind::Erase => Formula::erase(f),
            ClosureKind::At(i) => Formula::at(i.clone(), f),
        }
    }
}

/// Which transitions a space materializes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceOps {
    pub rels: Vec<String>,
    pub plain: bool,
    pub memorizing: bool,
    pub closures: Vec<ClosureKind>,
}

impl SpaceOps {
    /// Every transition `spec` can express over the given relations and nominals.
    pub fn for_spec(spec: &LogicSpec, rels: &BTreeSet<String>, noms: &BTreeSet<String>) -> Self {
        let mut closures = Vec::new();
        if spec.allows(Operator::Remember) {
            closures.push(ClosureKind::Remember);
        }
        if spec.allows(Operator::Forget) {
            closures.push(ClosureKind::Forget);
        }
        if spec.allows(Operator::Erase) {
            closures.push(ClosureKind::Erase);
        }
        if spec.allows(Operator::At) {
            closures.extend(noms.iter().cloned().map(ClosureKind::At));
        }
        SpaceOps {
            rels: rels.iter().cloned().collect(),
            plain: spec.allows(Operator::Diamond) || spec.allows(Operator::Box),
            memorizing: spec.allows(Operator::DDiamond) || spec.allows(Operator::DBox),
            closures,
        }
    }

    pub fn closure_index(&self, kind: &ClosureKind) -> Option<usize> {
        self.closures.iter().position(|k| k == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigNode {
    pub model: usize,
    pub mem: FixedBitSet,
    pub point: usize,
}

/// Configurations of several models closed under the chosen operations,
/// starting from every world of every model under its own memory.
#[derive(Debug, Clone)]
pub struct ConfigSpace<'m> {
    pub models: Vec<&'m KripkeModel>,
    pub ops: SpaceOps,
    pub nodes: Vec<ConfigNode>,
    /// `[config][closure]`; `None` when the closure is undefined there.
    pub closures: Vec<Vec<Option<usize>>>,
    /// `[config][rel]`.
    pub succ: Vec<Vec<Vec<usize>>>,
    /// `[config][rel]`, successors with the current world memorized.
    pub msucc: Vec<Vec<Vec<usize>>>,
    /// Configs with a closure edge into the key.
    pub closure_preds: Vec<Vec<usize>>,
    /// Configs with a modal edge into the key.
    pub modal_preds: Vec<Vec<usize>>,
    index: HashMap<ConfigNode, usize>,
    ranges: Vec<(usize, usize)>,
}

impl<'m> ConfigSpace<'m> {
    pub fn build(models: &[&'m KripkeModel], ops: SpaceOps, limit: usize) -> Result<Self, SpaceError> {
        let mut space = ConfigSpace {
            models: models.to_vec(),
            ops,
            nodes: Vec::new(),
            closures: Vec::new(),
            succ: Vec::new(),
            msucc: Vec::new(),
            closure_preds: Vec::new(),
            modal_preds: Vec::new(),
            index: HashMap::new(),
            ranges: Vec::new(),
        };
        for (mi, m) in models.iter().enumerate() {
            let start = space.nodes.len();
            let mut queue = VecDeque::new();
            let mem = memory_bits(m);
            for w in 0..m.len() {
                let node = ConfigNode { model: mi, mem: mem.clone(), point: w };
                queue.push_back(space.intern(node, limit)?);
            }
            while let Some(c) = queue.pop_front() {
                space.expand(c, &mut queue, limit)?;
            }
            space.ranges.push((start, space.nodes.len()));
        }
        let n = space.nodes.len();
        space.closure_preds = vec![Vec::new(); n];
        space.modal_preds = vec![Vec::new(); n];
        for c in 0..n {
            for &t in space.closures[c].iter().flatten() {
                space.closure_preds[t].push(c);
            }
            for &t in space.succ[c].iter().chain(&space.msucc[c]).flatten() {
                space.modal_preds[t].push(c);
            }
        }
        for preds in space.closure_preds.iter_mut().chain(space.modal_preds.iter_mut()) {
            preds.sort_unstable();
            preds.dedup();
        }
        Ok(space)
    }

    fn intern(&mut self, node: ConfigNode, limit: usize) -> Result<usize, SpaceError> {
        if let Some(&i) = self.index.get(&node) {
            return Ok(i);
        }
        if self.nodes.len() >= limit {
            return Err(SpaceError::StateSpaceExceeded(limit));
        }
        let i = self.nodes.len();
        self.index.insert(node.clone(), i);
        self.nodes.push(node);
        self.closures.push(Vec::new());
        self.succ.push(Vec::new());
        self.msucc.push(Vec::new());
        Ok(i)
    }

    fn intern_queued(&mut self, node: ConfigNode, queue: &mut VecDeque<usize>, limit: usize) -> Result<usize, SpaceError> {
        let before = self.nodes.len();
        let i = self.intern(node, limit)?;
        if i == before {
            queue.push_back(i);
        }
        Ok(i)
    }

    fn expand(&mut self, c: usize, queue: &mut VecDeque<usize>, limit: usize) -> Result<(), SpaceError> {
        let ConfigNode { model: mi, mem, point } = self.nodes[c].clone();
        let m = self.models[mi];
        let mut closures = Vec::new();
        for kind in self.ops.closures.clone() {
            let target = match &kind {
                ClosureKind::Remember => Some((with_bit(&mem, point, true), point)),
                ClosureKind::Forget => Some((with_bit(&mem, point, false), point)),
                ClosureKind::Erase => Some((FixedBitSet::with_capacity(m.len()), point)),
                ClosureKind::At(i) => m.nom(i).map(|t| (mem.clone(), t)),
            };
            let id = match target {
                Some((mem, point)) => Some(self.intern_queued(ConfigNode { model: mi, mem, point }, queue, limit)?),
                None => None,
            };
            closures.push(id);
        }
        let mut succ = Vec::new();
        let mut msucc = Vec::new();
        let remembered = with_bit(&mem, point, true);
        for r in self.ops.rels.clone() {
            let targets: Vec<usize> = m.successors(&r, point).collect();
            let mut plain = Vec::new();
            let mut memo = Vec::new();
            for &t in &targets {
                if self.ops.plain {
                    plain.push(self.intern_queued(ConfigNode { model: mi, mem: mem.clone(), point: t }, queue, limit)?);
                }
                if self.ops.memorizing {
                    memo.push(self.intern_queued(ConfigNode { model: mi, mem: remembered.clone(), point: t }, queue, limit)?);
                }
            }
            succ.push(plain);
            msucc.push(memo);
        }
        self.closures[c] = closures;
        self.succ[c] = succ;
        self.msucc[c] = msucc;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Config ids belonging to model `mi`.
    pub fn range(&self, mi: usize) -> std::ops::Range<usize> {
        let (a, b) = self.ranges[mi];
        a..b
    }

    /// The configuration of world `w` of model `mi` under the model's memory.
    pub fn initial(&self, mi: usize, w: usize) -> usize {
        let node = ConfigNode { model: mi, mem: memory_bits(self.models[mi]), point: w };
        self.index[&node]
    }

    pub fn find(&self, node: &ConfigNode) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn model_of(&self, c: usize) -> &'m KripkeModel {
        self.models[self.nodes[c].model]
    }

    pub fn holds(&self, prop: &str, c: usize) -> bool {
        self.model_of(c).holds(prop, self.nodes[c].point)
    }

    pub fn known(&self, c: usize) -> bool {
        self.nodes[c].mem.contains(self.nodes[c].point)
    }

    pub fn is_nominal(&self, i: &str, c: usize) -> bool {
        self.model_of(c).nom(i) == Some(self.nodes[c].point)
    }

    pub fn rel_index(&self, r: &str) -> Option<usize> {
        self.ops.rels.iter().position(|x| x == r)
    }

    /// Memory as world names.
    pub fn memory_names(&self, c: usize) -> BTreeSet<String> {
        let m = self.model_of(c);
        self.nodes[c].mem.ones().map(|w| m.name(w).to_string()).collect()
    }

    pub fn point_name(&self, c: usize) -> &str {
        self.model_of(c).name(self.nodes[c].point)
    }

    /// The set of configurations where `f` holds, or `None` when `f` uses a
    /// transition this space does not materialize.
    pub fn denotation(&self, f: &Formula) -> Option<FixedBitSet> {
        let n = self.len();
        let all = || {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert_range(..);
            b
        };
        let filter = |pred: &dyn Fn(usize) -> bool| {
            let mut b = FixedBitSet::with_capacity(n);
            for c in 0..n {
                b.set(c, pred(c));
            }
            b
        };
        Some(match f {
            Formula::True => all(),
            Formula::False => FixedBitSet::with_capacity(n),
            Formula::Prop(p) => filter(&|c| self.holds(p, c)),
            Formula::Nom(i) => filter(&|c| self.is_nominal(i, c)),
            Formula::Known => filter(&|c| self.known(c)),
            Formula::Not(a) => {
                let mut b = self.denotation(a)?;
                b.toggle_range(..);
                b
            }
            Formula::And(a, b) => {
                let mut x = self.denotation(a)?;
                x.intersect_with(&self.denotation(b)?);
                x
            }
            Formula::Or(a, b) => {
                let mut x = self.denotation(a)?;
                x.union_with(&self.denotation(b)?);
                x
            }
            Formula::Implies(a, b) => {
                let mut x = self.denotation(a)?;
                x.toggle_range(..);
                x.union_with(&self.denotation(b)?);
                x
            }
            Formula::Iff(a, b) => {
                let x = self.denotation(a)?;
                let y = self.denotation(b)?;
                filter(&|c| x.contains(c) == y.contains(c))
            }
            Formula::Diamond(r, a) | Formula::Box(r, a) | Formula::DDiamond(r, a) | Formula::DBox(r, a) => {
                let memorizing = matches!(f, Formula::DDiamond(..) | Formula::DBox(..));
                if (memorizing && !self.ops.memorizing) || (!memorizing && !self.ops.plain) {
                    return None;
                }
                let body = self.denotation(a)?;
                self.modal_image(self.rel_index(r), memorizing, matches!(f, Formula::Diamond(..) | Formula::DDiamond(..)), &body)
            }
            Formula::Remember(a) => self.closure_image(&ClosureKind::Remember, &self.denotation(a)?)?,
            Formula::Forget(a) => self.closure_image(&ClosureKind::Forget, &self.denotation(a)?)?,
            Formula::Erase(a) => self.closure_image(&ClosureKind::Erase, &self.denotation(a)?)?,
            Formula::At(i, a) => self.closure_image(&ClosureKind::At(i.clone()), &self.denotation(a)?)?,
        })
    }

    /// Configs where some (`exists`) or every successor lies in `body`.
    pub fn modal_image(&self, rel: Option<usize>, memorizing: bool, exists: bool, body: &FixedBitSet) -> FixedBitSet {
        let n = self.len();
        let mut out = FixedBitSet::with_capacity(n);
        for c in 0..n {
            let targets: &[usize] = match rel {
                Some(r) if memorizing => &self.msucc[c][r],
                Some(r) => &self.succ[c][r],
                None => &[],
            };
            let v = if exists { targets.iter().any(|&t| body.contains(t)) } else { targets.iter().all(|&t| body.contains(t)) };
            out.set(c, v);
        }
        out
    }

    /// Configs whose closure target lies in `body`; `None` if the closure is
    /// not materialized or undefined somewhere.
    pub fn closure_image(&self, kind: &ClosureKind, body: &FixedBitSet) -> Option<FixedBitSet> {
        let k = self.ops.closure_index(kind)?;
        let mut out = FixedBitSet::with_capacity(self.len());
        for c in 0..self.len() {
            out.set(c, body.contains(self.closures[c][k]?));
        }
        Some(out)
    }
}

fn with_bit(mem: &FixedBitSet, w: usize, on: bool) -> FixedBitSet {
    let mut out = mem.clone();
    out.set(w, on);
    out
}
