#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use modal_core::kripke::{load_model, KripkeModel};

pub fn fixture(name: &str) -> KripkeModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    load_model(&text).unwrap().0
}

pub fn model(text: &str) -> KripkeModel {
    load_model(text).unwrap().0
}

/// Every model on `n` worlds named `w0..` with one relation `r` and one
/// proposition `p`.
pub fn all_models(n: usize) -> Vec<KripkeModel> {
    let worlds: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for edges in 0u32..(1 << pairs.len()) {
        for vals in 0u32..(1 << n) {
            let mut m = KripkeModel::new(worlds.clone()).unwrap().declare_rel("r").unwrap().declare_prop("p").unwrap();
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if edges >> k & 1 == 1 {
                    m = m.with_edge("r", &worlds[i], &worlds[j]).unwrap();
                }
            }
            for (i, w) in worlds.iter().enumerate() {
                if vals >> i & 1 == 1 {
                    m = m.with_prop("p", w).unwrap();
                }
            }
            out.push(m);
        }
    }
    out
}

/// Every pointed model on at most `max` worlds (one relation, one proposition).
pub fn all_pointed(max: usize) -> Vec<(KripkeModel, String)> {
    let mut out = Vec::new();
    for n in 1..=max {
        for m in all_models(n) {
            for w in m.worlds().to_vec() {
                out.push((m.clone(), w));
            }
        }
    }
    out
}

/// Naive greatest fixpoint of BML bisimilarity between the worlds of two models.
pub fn naive_bml_bisim(m: &KripkeModel, n: &KripkeModel) -> BTreeSet<(usize, usize)> {
    let props: BTreeSet<&String> = m.val().keys().chain(n.val().keys()).collect();
    let rels: BTreeSet<&String> = m.rels().keys().chain(n.rels().keys()).collect();
    let mut z: BTreeSet<(usize, usize)> = (0..m.len())
        .flat_map(|a| (0..n.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| props.iter().all(|p| m.holds(p, a) == n.holds(p, b)))
        .collect();
    loop {
        let keep: BTreeSet<(usize, usize)> = z
            .iter()
            .copied()
            .filter(|&(a, b)| {
                rels.iter().all(|r| {
                    m.successors(r, a).all(|a2| n.successors(r, b).any(|b2| z.contains(&(a2, b2))))
                        && n.successors(r, b).all(|b2| m.successors(r, a).any(|a2| z.contains(&(a2, b2))))
                })
            })
            .collect();
        if keep.len() == z.len() {
            return z;
        }
        z = keep;
    }
}
