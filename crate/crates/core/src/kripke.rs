//! Finite Kripke models extended with a memory set and a nominal assignment.
//!
//! Worlds are named by strings and kept in lexicographic order; every other
//! component refers to worlds by their index in that order. Propositions not
//! listed in the valuation are false everywhere.
//!
//! # Model files
//!
//! ```text
//! worlds: w1 w2 w3
//! rel r1: w1->w2 w2->w1
//! val p: w1 w3
//! mem: w2
//! nom i1: w3
//! point: w1        # optional distinguished point
//! ```
//!
//! # Random models
//!
//! [`random_model`] draws from [`Prng`] in a fixed order: for every relation
//! of the signature (in signature order), for every source world, for every
//! target world, one `coin(edge_prob)`; then for every proposition, for
//! every world, one `coin(prop_prob)`. Worlds are `w0..w{n-1}`, zero padded
//! to a common width. Nominal `k` names world `k mod n`; memory is empty.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::rng::Prng;
use crate::syntax::{is_ident, Signature, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("invalid model: {0}")]
    InvariantViolation(String),
}

/// World ids: nonempty runs of ASCII letters, digits and underscores.
pub fn is_world_id(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KripkeModel {
    worlds: Vec<String>,
    rels: BTreeMap<String, BTreeSet<(usize, usize)>>,
    val: BTreeMap<String, BTreeSet<usize>>,
    mem: BTreeSet<usize>,
    noms: BTreeMap<String, usize>,
}

impl KripkeModel {
    /// A model with the given worlds and nothing else.
    pub fn new<I>(worlds: I) -> Result<Self, ModelError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
    {
        let mut names: Vec<String> = worlds.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ModelError::InvariantViolation("a model needs at least one world".into()));
        }
        if let Some(bad) = names.iter().find(|w| !is_world_id(w)) {
            return Err(ModelError::InvariantViolation(format!("`{bad}` is not a valid world id")));
        }
        names.sort();
        let before = names.len();
        names.dedup();
        if names.len() != before {
            return Err(ModelError::InvariantViolation("duplicate world id".into()));
        }
        Ok(KripkeModel {
            worlds: names,
            rels: BTreeMap::new(),
            val: BTreeMap::new(),
            mem: BTreeSet::new(),
            noms: BTreeMap::new(),
        })
    }

    fn require(&self, w: &str) -> Result<usize, ModelError> {
        self.index(w).ok_or_else(|| ModelError::UnknownWorld(w.to_string()))
    }

    fn require_name(kind: &str, name: &str) -> Result<(), ModelError> {
        if is_ident(name) {
            Ok(())
        } else {
            Err(ModelError::InvariantViolation(format!("`{name}` is not a valid {kind} name")))
        }
    }

    /// Declares a relation (possibly empty).
    pub fn declare_rel(mut self, rel: &str) -> Result<Self, ModelError> {
        Self::require_name("relation", rel)?;
        self.rels.entry(rel.to_string()).or_default();
        Ok(self)
    }

    /// Declares a proposition (possibly false everywhere).
    pub fn declare_prop(mut self, prop: &str) -> Result<Self, ModelError> {
        Self::require_name("proposition", prop)?;
        self.val.entry(prop.to_string()).or_default();
        Ok(self)
    }

    pub fn with_edge(mut self, rel: &str, from: &str, to: &str) -> Result<Self, ModelError> {
        Self::require_name("relation", rel)?;
        let pair = (self.require(from)?, self.require(to)?);
        self.rels.entry(rel.to_string()).or_default().insert(pair);
        Ok(self)
    }

    pub fn with_prop(mut self, prop: &str, w: &str) -> Result<Self, ModelError> {
        Self::require_name("proposition", prop)?;
        let i = self.require(w)?;
        self.val.entry(prop.to_string()).or_default().insert(i);
        Ok(self)
    }

    pub fn with_mem(mut self, w: &str) -> Result<Self, ModelError> {
        let i = self.require(w)?;
        self.mem.insert(i);
        Ok(self)
    }

    pub fn with_nom(mut self, nom: &str, w: &str) -> Result<Self, ModelError> {
        Self::require_name("nominal", nom)?;
        let i = self.require(w)?;
        if self.noms.insert(nom.to_string(), i).is_some_and(|old| old != i) {
            return Err(ModelError::InvariantViolation(format!("nominal `{nom}` names two worlds")));
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn index(&self, w: &str) -> Option<usize> {
        self.worlds.binary_search_by(|x| x.as_str().cmp(w)).ok()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.worlds[i]
    }

    pub fn rels(&self) -> &BTreeMap<String, BTreeSet<(usize, usize)>> {
        &self.rels
    }

    pub fn val(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.val
    }

    pub fn mem(&self) -> &BTreeSet<usize> {
        &self.mem
    }

    pub fn noms(&self) -> &BTreeMap<String, usize> {
        &self.noms
    }

    pub fn nom(&self, i: &str) -> Option<usize> {
        self.noms.get(i).copied()
    }

    pub fn edge(&self, rel: &str, from: usize, to: usize) -> bool {
        self.rels.get(rel).is_some_and(|r| r.contains(&(from, to)))
    }

    /// Successors of `w` along `rel`, ascending. Unknown relations have none.
    pub fn successors<'a>(&'a self, rel: &str, w: usize) -> impl Iterator<Item = usize> + 'a {
        self.rels
            .get(rel)
            .into_iter()
            .flat_map(move |pairs| pairs.range((w, 0)..(w + 1, 0)).map(|&(_, t)| t))
    }

    pub fn holds(&self, prop: &str, w: usize) -> bool {
        self.val.get(prop).is_some_and(|s| s.contains(&w))
    }

    /// Propositions true at `w`.
    pub fn props_at(&self, w: usize) -> impl Iterator<Item = &str> {
        self.val.iter().filter(move |(_, s)| s.contains(&w)).map(|(p, _)| p.as_str())
    }

    /// The names this model declares.
    pub fn signature(&self) -> Result<Signature, SyntaxError> {
        Signature::new(self.val.keys().cloned(), self.rels.keys().cloned(), self.noms.keys().cloned())
    }

    /// `M[+w]`: add `w` to the memory.
    pub fn mem_add(&self, w: &str) -> Result<KripkeModel, ModelError> {
        let i = self.require(w)?;
        let mut m = self.clone();
        m.mem.insert(i);
        Ok(m)
    }

    /// `M[-w]`: remove `w` from the memory.
    pub fn mem_remove(&self, w: &str) -> Result<KripkeModel, ModelError> {
        let i = self.require(w)?;
        let mut m = self.clone();
        m.mem.remove(&i);
        Ok(m)
    }

    /// `M[*]`: empty the memory.
    pub fn mem_wipe(&self) -> KripkeModel {
        let mut m = self.clone();
        m.mem.clear();
        m
    }

    /// Replaces the memory by the given worlds.
    pub fn with_memory(&self, mem: BTreeSet<usize>) -> KripkeModel {
        assert!(mem.iter().all(|&w| w < self.len()));
        let mut m = self.clone();
        m.mem = mem;
        m
    }

    /// Renames every world through `f`; `f` must be injective on this model.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<KripkeModel, ModelError> {
        let mut out = KripkeModel::new(self.worlds.iter().map(|w| f(w)))?;
        let map: Vec<usize> = self.worlds.iter().map(|w| out.index(&f(w)).unwrap()).collect();
        for (r, pairs) in &self.rels {
            out.rels.insert(r.clone(), pairs.iter().map(|&(a, b)| (map[a], map[b])).collect());
        }
        for (p, s) in &self.val {
            out.val.insert(p.clone(), s.iter().map(|&a| map[a]).collect());
        }
        out.mem = self.mem.iter().map(|&a| map[a]).collect();
        out.noms = self.noms.iter().map(|(i, &a)| (i.clone(), map[a])).collect();
        Ok(out)
    }

    /// Disjoint union; worlds of `other` are prefixed by `prefix`. Nominals
    /// are taken from `self` only.
    pub fn disjoint_union(&self, other: &KripkeModel, prefix: &str) -> Result<KripkeModel, ModelError> {
        let renamed = other.rename(|w| format!("{prefix}{w}"))?;
        let mut out = KripkeModel::new(self.worlds.iter().chain(renamed.worlds.iter()).cloned())?;
        for (src, keep_noms) in [(self, true), (&renamed, false)] {
            let map: Vec<usize> = src.worlds.iter().map(|w| out.index(w).unwrap()).collect();
            for (r, pairs) in &src.rels {
                out.rels.entry(r.clone()).or_default().extend(pairs.iter().map(|&(a, b)| (map[a], map[b])));
            }
            for (p, s) in &src.val {
                out.val.entry(p.clone()).or_default().extend(s.iter().map(|&a| map[a]));
            }
            out.mem.extend(src.mem.iter().map(|&a| map[a]));
            if keep_noms {
                out.noms.extend(src.noms.iter().map(|(i, &a)| (i.clone(), map[a])));
            }
        }
        Ok(out)
    }

    /// Brute-force isomorphism test (worlds, relations, valuation, memory,
    /// nominals). Intended for small models.
    pub fn is_isomorphic(&self, other: &KripkeModel) -> bool {
        if self.len() != other.len()
            || self.rels.keys().ne(other.rels.keys())
            || self.val.keys().ne(other.val.keys())
            || self.noms.keys().ne(other.noms.keys())
            || self.mem.len() != other.mem.len()
        {
            return false;
        }
        let n = self.len();
        let mut perm: Vec<usize> = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.extend_iso(other, &mut perm, &mut used)
    }

    fn extend_iso(&self, other: &KripkeModel, perm: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let a = perm.len();
        if a == self.len() {
            return true;
        }
        for b in 0..other.len() {
            if used[b] {
                continue;
            }
            let local_ok = self.val.iter().all(|(p, s)| s.contains(&a) == other.holds(p, b))
                && self.mem.contains(&a) == other.mem.contains(&b)
                && self.noms.iter().all(|(i, &t)| (t == a) == (other.nom(i) == Some(b)))
                && self.rels.iter().all(|(r, pairs)| {
                    (0..=a).all(|x| {
                        let y = if x == a { b } else { perm[x] };
                        pairs.contains(&(a, x)) == other.edge(r, b, y)
                            && pairs.contains(&(x, a)) == other.edge(r, y, b)
                    })
                });
            if !local_ok {
                continue;
            }
            perm.push(b);
            used[b] = true;
            if self.extend_iso(other, perm, used) {
                return true;
            }
            perm.pop();
            used[b] = false;
        }
        false
    }
}

/// A model with a distinguished evaluation world.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: usize,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: &str) -> Result<Self, ModelError> {
        let point = model.index(point).ok_or_else(|| ModelError::UnknownWorld(point.to_string()))?;
        Ok(PointedModel { model, point })
    }

    pub fn point_name(&self) -> &str {
        self.model.name(self.point)
    }
}

fn format_err(line: usize, reason: impl Into<String>) -> ModelError {
    ModelError::Format { line, reason: reason.into() }
}

/// Parses a model file; returns the model and the optional `point:` world.
pub fn load_model(text: &str) -> Result<(KripkeModel, Option<String>), ModelError> {
    let mut worlds: Option<(usize, Vec<String>)> = None;
    let mut rels: Vec<(usize, String, Vec<(String, String)>)> = Vec::new();
    let mut vals: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut mem: Vec<(usize, String)> = Vec::new();
    let mut noms: Vec<(usize, String, String)> = Vec::new();
    let mut point: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, body) = line.split_once(':').ok_or_else(|| format_err(line_no, "expected `key: values`"))?;
        let mut head_words = head.split_whitespace();
        let key = head_words.next().ok_or_else(|| format_err(line_no, "missing key"))?;
        let name = head_words.next();
        if head_words.next().is_some() {
            return Err(format_err(line_no, "too many words before `:`"));
        }
        let items: Vec<&str> = body.split_whitespace().collect();
        let named = |what: &str| -> Result<String, ModelError> {
            let n = name.ok_or_else(|| format_err(line_no, format!("`{key}` needs a {what} name")))?;
            if !is_ident(n) {
                return Err(format_err(line_no, format!("`{n}` is not a valid {what} name")));
            }
            Ok(n.to_string())
        };
        let unnamed = || -> Result<(), ModelError> {
            match name {
                Some(n) => Err(format_err(line_no, format!("unexpected name `{n}` after `{key}`"))),
                None => Ok(()),
            }
        };
        let world = |w: &str| -> Result<String, ModelError> {
            if is_world_id(w) {
                Ok(w.to_string())
            } else {
                Err(format_err(line_no, format!("`{w}` is not a valid world id")))
            }
        };
        match key {
            "worlds" => {
                unnamed()?;
                if worlds.is_some() {
                    return Err(format_err(line_no, "duplicate `worlds` line"));
                }
                worlds = Some((line_no, items.iter().map(|w| world(w)).collect::<Result<_, _>>()?));
            }
            "rel" => {
                let r = named("relation")?;
                let mut edges = Vec::new();
                for item in &items {
                    let (a, b) = item
                        .split_once("->")
                        .ok_or_else(|| format_err(line_no, format!("expected `a->b`, found `{item}`")))?;
                    edges.push((world(a)?, world(b)?));
                }
                rels.push((line_no, r, edges));
            }
            "val" => {
                let p = named("proposition")?;
                vals.push((line_no, p, items.iter().map(|w| world(w)).collect::<Result<_, _>>()?));
            }
            "mem" => {
                unnamed()?;
                for w in &items {
                    mem.push((line_no, world(w)?));
                }
            }
            "nom" => {
                let i = named("nominal")?;
                match items.as_slice() {
                    [w] => noms.push((line_no, i, world(w)?)),
                    _ => return Err(format_err(line_no, "a nominal names exactly one world")),
                }
            }
            "point" => {
                unnamed()?;
                if point.is_some() {
                    return Err(format_err(line_no, "duplicate `point` line"));
                }
                match items.as_slice() {
                    [w] => point = Some((line_no, world(w)?)),
                    _ => return Err(format_err(line_no, "`point` takes exactly one world")),
                }
            }
            other => return Err(format_err(line_no, format!("unknown key `{other}`"))),
        }
    }

    let (wline, world_list) = worlds.ok_or_else(|| format_err(0, "missing `worlds` line"))?;
    let mut m = KripkeModel::new(world_list).map_err(|e| match e {
        ModelError::InvariantViolation(r) => format_err(wline, r),
        other => other,
    })?;
    let unknown = |line: usize, w: &str| ModelError::InvariantViolation(format!("line {line}: unknown world `{w}`"));
    for (line, r, edges) in rels {
        m = m.declare_rel(&r)?;
        for (a, b) in edges {
            let missing = if m.index(&a).is_none() { &a } else { &b };
            let err = unknown(line, missing);
            m = m.with_edge(&r, &a, &b).map_err(|_| err)?;
        }
    }
    for (line, p, ws) in vals {
        m = m.declare_prop(&p)?;
        for w in ws {
            m = m.with_prop(&p, &w).map_err(|_| unknown(line, &w))?;
        }
    }
    for (line, w) in mem {
        m = m.with_mem(&w).map_err(|_| unknown(line, &w))?;
    }
    for (line, i, w) in noms {
        if m.noms.contains_key(&i) {
            return Err(ModelError::InvariantViolation(format!("line {line}: nominal `{i}` assigned twice")));
        }
        m = m.with_nom(&i, &w).map_err(|_| unknown(line, &w))?;
    }
    let point = match point {
        Some((line, w)) => {
            if m.index(&w).is_none() {
                return Err(unknown(line, &w));
            }
            Some(w)
        }
        None => None,
    };
    m.signature().map_err(|e| ModelError::InvariantViolation(e.to_string()))?;
    Ok((m, point))
}

/// Serializes a model in the line format read by [`load_model`].
pub fn save_model(m: &KripkeModel, point: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "worlds: {}", m.worlds.join(" "));
    for (r, pairs) in &m.rels {
        let _ = write!(out, "rel {r}:");
        for &(a, b) in pairs {
            let _ = write!(out, " {}->{}", m.name(a), m.name(b));
        }
        out.push('\n');
    }
    for (p, s) in &m.val {
        let _ = write!(out, "val {p}:");
        for &a in s {
            let _ = write!(out, " {}", m.name(a));
        }
        out.push('\n');
    }
    if !m.mem.is_empty() {
        out.push_str("mem:");
        for &a in &m.mem {
            let _ = write!(out, " {}", m.name(a));
        }
        out.push('\n');
    }
    for (i, &a) in &m.noms {
        let _ = writeln!(out, "nom {i}: {}", m.name(a));
    }
    if let Some(p) = point {
        let _ = writeln!(out, "point: {p}");
    }
    out
}

/// Parameters for [`random_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_worlds: usize,
    pub edge_prob: f64,
    pub prop_prob: f64,
    pub seed: u64,
    pub sig: Signature,
}

impl GenParams {
    pub fn new(n_worlds: usize, edge_prob: f64, prop_prob: f64, seed: u64, sig: Signature) -> Self {
        GenParams { n_worlds, edge_prob, prop_prob, seed, sig }
    }
}

/// World names used by [`random_model`].
pub fn generated_world_names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("w{i:0width$}")).collect()
}

/// Deterministic random model; see the module documentation for the draw order.
pub fn random_model(p: &GenParams) -> KripkeModel {
    assert!(p.n_worlds >= 1, "n_worlds must be positive");
    let names = generated_world_names(p.n_worlds);
    let mut m = KripkeModel::new(names).expect("generated names are valid");
    let mut rng = Prng::new(p.seed);
    let n = p.n_worlds;
    for r in p.sig.rels() {
        let edges = m.rels.entry(r.clone()).or_default();
        for a in 0..n {
            for b in 0..n {
                if rng.coin(p.edge_prob) {
                    edges.insert((a, b));
                }
            }
        }
    }
    for prop in p.sig.props() {
        let set = m.val.entry(prop.clone()).or_default();
        for a in 0..n {
            if rng.coin(p.prop_prob) {
                set.insert(a);
            }
        }
    }
    for (k, i) in p.sig.noms().iter().enumerate() {
        m.noms.insert(i.clone(), k % n);
    }
    m
}
