//! Seeded property suites: translation preservation, invariance of truth
//! under the solver's relation, finite Hennessy-Milner and agreement between
//! games and the relation.
//!
//! The modal checker is a parameter so that a deliberately broken checker
//! can be run through the same suites.

use std::fmt::{self, Write as _};

use crate::analysis::equivalent_up_to;
use crate::equivalence::{bisimilar, bml_partition_refinement, simulated_by};
use crate::fo::{fo_check, x_assignment};
use crate::games::{solve_game, Player};
use crate::gen::{random_formula, random_model_for, suite_signature};
use crate::kripke::{save_model, KripkeModel};
use crate::rng::Prng;
use crate::semantics::{check, EvalError};
use crate::syntax::{print_formula, Formula, LogicSpec, DIALECT_NAMES};
use crate::translation::{translate_formula, translate_model};

/// A modal model checker: `(model, world, formula) -> truth`.
pub type Checker = dyn Fn(&KripkeModel, &str, &Formula) -> Result<bool, EvalError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_worlds: usize,
    pub max_depth: usize,
    pub dialects: Vec<LogicSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 100,
            seed: 0,
            max_worlds: 4,
            max_depth: 3,
            dialects: DIALECT_NAMES.iter().map(|d| LogicSpec::by_name(d).unwrap()).collect(),
        }
    }
}

impl SuiteConfig {
    /// Builds a configuration from dialect names, checking every bound.
    pub fn new(trials: usize, seed: u64, max_worlds: usize, max_depth: usize, dialects: &[&str]) -> Result<Self, String> {
        if trials == 0 || max_worlds == 0 || max_depth == 0 {
            return Err("trials, max-worlds and depth must be positive".into());
        }
        let dialects = dialects
            .iter()
            .map(|d| LogicSpec::by_name(d).ok_or_else(|| format!("unknown dialect `{d}`")))
            .collect::<Result<Vec<_>, _>>()?;
        if dialects.is_empty() {
            return Err("no dialects selected".into());
        }
        Ok(SuiteConfig { trials, seed, max_worlds, max_depth, dialects })
    }
}

/// The suites, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Translation,
    Invariance,
    HennessyMilner,
    Games,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Translation, Suite::Invariance, Suite::HennessyMilner, Suite::Games];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Translation => "translation",
            Suite::Invariance => "invariance",
            Suite::HennessyMilner => "hennessy-milner",
            Suite::Games => "games",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub suite: Suite,
    pub dialect: String,
    pub trial: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub dialect: String,
    pub trials: usize,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub seed: u64,
    pub results: Vec<SuiteResult>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.results.iter().map(|r| r.counterexamples.len()).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} {}: {} trials, {} violations", r.suite.name(), r.dialect, r.trials, r.counterexamples.len())?;
        }
        for r in &self.results {
            for c in r.counterexamples.iter().take(MAX_COUNTEREXAMPLES) {
                writeln!(f, "counterexample {} {} trial {}:", c.suite.name(), c.dialect, c.trial)?;
                for line in c.detail.lines() {
                    writeln!(f, "  {line}")?;
                }
            }
        }
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "trials: {}", self.results.iter().map(|r| r.trials).sum::<usize>())?;
        writeln!(f, "violations: {}", self.violations())?;
        writeln!(f, "status: {}", if self.passed() { "pass" } else { "fail" })
    }
}

/// Counterexamples printed per suite and dialect.
const MAX_COUNTEREXAMPLES: usize = 3;

fn trial_rng(seed: u64, suite: Suite, dialect: usize, trial: usize) -> Prng {
    let tag = ((suite as u64) << 56) ^ ((dialect as u64) << 40) ^ trial as u64;
    Prng::new(Prng::derive(seed, tag))
}

fn describe(m: &KripkeModel, w: &str) -> String {
    save_model(m, Some(w))
}

/// Runs every suite over every configured dialect with `checker`.
pub fn run_suites(cfg: &SuiteConfig, checker: &Checker) -> SuiteReport {
    let mut results = Vec::new();
    for suite in Suite::ALL {
        for (di, spec) in cfg.dialects.iter().enumerate() {
            if suite == Suite::HennessyMilner && spec.name() != "bml" {
                continue;
            }
            results.push(run_suite(suite, cfg, di, spec, checker));
        }
    }
    SuiteReport { seed: cfg.seed, results }
}

/// Runs one suite for one dialect; `dialect_index` only feeds seed derivation.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig, dialect_index: usize, spec: &LogicSpec, checker: &Checker) -> SuiteResult {
    let mut counterexamples = Vec::new();
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, suite, dialect_index, trial);
        let found = match suite {
            Suite::Translation => translation_trial(spec, cfg, &mut rng, checker),
            Suite::Invariance => invariance_trial(spec, cfg, &mut rng, checker),
            Suite::HennessyMilner => hennessy_milner_trial(cfg, &mut rng, checker),
            Suite::Games => game_trial(spec, cfg, &mut rng),
        };
        if let Some(detail) = found {
            counterexamples.push(Counterexample { suite, dialect: spec.name().to_string(), trial, detail });
        }
    }
    SuiteResult { suite, dialect: spec.name().to_string(), trials: cfg.trials, counterexamples }
}

/// Modal truth versus first-order truth of the translation on a random
/// model, world and formula.
pub fn translation_trial(spec: &LogicSpec, cfg: &SuiteConfig, rng: &mut Prng, checker: &Checker) -> Option<String> {
    let sig = suite_signature(spec);
    let m = random_model_for(spec, &sig, cfg.max_worlds, rng);
    let w = m.name(rng.below(m.len())).to_string();
    let f = random_formula(spec, &sig, cfg.max_depth, 4 * cfg.max_depth + 4, rng);
    let modal = checker(&m, &w, &f);
    let fo = translate_formula(&f, spec).map_err(|e| e.to_string()).and_then(|t| {
        let (a, g) = translate_model(&m, &w).map_err(|e| e.to_string())?;
        fo_check(&a, &x_assignment(g), &t).map_err(|e| e.to_string())
    });
    match (modal, fo) {
        (Ok(a), Ok(b)) if a == b => None,
        (modal, fo) => Some(format!(
            "formula: {}\nmodal: {modal:?}\nfirst-order: {fo:?}\n{}",
            print_formula(&f),
            describe(&m, &w)
        )),
    }
}

/// Related pairs (as decided by the solver) must agree on random formulas;
/// without negation, truth must transfer from left to right.
pub fn invariance_trial(spec: &LogicSpec, cfg: &SuiteConfig, rng: &mut Prng, checker: &Checker) -> Option<String> {
    let sig = suite_signature(spec);
    let m = random_model_for(spec, &sig, cfg.max_worlds, rng);
    let n = random_model_for(spec, &sig, cfg.max_worlds, rng);
    let (w, v) = (m.name(rng.below(m.len())).to_string(), n.name(rng.below(n.len())).to_string());
    let related = if spec.has_negation() { bisimilar(spec, &m, &w, &n, &v) } else { simulated_by(spec, &m, &w, &n, &v) };
    let related = match related {
        Ok(out) => out.related,
        Err(e) => return Some(format!("solver error: {e}")),
    };
    if !related {
        return None;
    }
    for _ in 0..8 {
        let f = random_formula(spec, &sig, cfg.max_depth, 4 * cfg.max_depth + 4, rng);
        let (a, b) = (checker(&m, &w, &f), checker(&n, &v, &f));
        let ok = match (&a, &b) {
            (Ok(a), Ok(b)) => if spec.has_negation() { a == b } else { !a || *b },
            _ => false,
        };
        if !ok {
            return Some(format!(
                "formula: {}\nleft: {a:?}\nright: {b:?}\n--- left\n{}--- right\n{}",
                print_formula(&f),
                describe(&m, &w),
                describe(&n, &v)
            ));
        }
    }
    None
}

/// On BML pairs, the partition-refinement verdict must equal equivalence up
/// to depth `|W1|·|W2|`, and a reported witness must separate the points.
pub fn hennessy_milner_trial(cfg: &SuiteConfig, rng: &mut Prng, checker: &Checker) -> Option<String> {
    let bml = LogicSpec::bml();
    let sig = suite_signature(&bml);
    let m = random_model_for(&bml, &sig, cfg.max_worlds, rng);
    let n = random_model_for(&bml, &sig, cfg.max_worlds, rng);
    let (w, v) = (m.name(rng.below(m.len())).to_string(), n.name(rng.below(n.len())).to_string());
    let (verdict, witness) = match hennessy_milner_verdicts(&m, &w, &n, &v) {
        Ok(x) => x,
        Err(e) => return Some(e),
    };
    let equivalent = witness.is_none();
    let separates = witness.as_ref().is_none_or(|f| match (checker(&m, &w, f), checker(&n, &v, f)) {
        (Ok(a), Ok(b)) => a != b,
        _ => false,
    });
    if verdict == equivalent && separates {
        None
    } else {
        Some(format!(
            "partition: {verdict}\nequivalent: {equivalent}\nwitness: {}\n--- left\n{}--- right\n{}",
            witness.as_ref().map(print_formula).unwrap_or_default(),
            describe(&m, &w),
            describe(&n, &v)
        ))
    }
}

/// The partition-refinement verdict on the disjoint union, and the witness
/// from `equivalent_up_to` at depth `|W1|·|W2|` (none when equivalent).
pub fn hennessy_milner_verdicts(m: &KripkeModel, w: &str, n: &KripkeModel, v: &str) -> Result<(bool, Option<Formula>), String> {
    let union = m.disjoint_union(n, "r_").map_err(|e| e.to_string())?;
    let right = format!("r_{v}");
    let verdict = bml_partition_refinement(&union).iter().any(|b| b.contains(w) && b.contains(&right));
    let (eq, witness) = equivalent_up_to(&LogicSpec::bml(), m, w, n, v, m.len() * n.len()).map_err(|e| e.to_string())?;
    if eq != witness.is_none() {
        return Err(format!("equivalent_up_to returned {eq} with witness {witness:?}"));
    }
    Ok((verdict, witness))
}

/// The unbounded game winner must match the relation.
pub fn game_trial(spec: &LogicSpec, cfg: &SuiteConfig, rng: &mut Prng) -> Option<String> {
    let sig = suite_signature(spec);
    let worlds = cfg.max_worlds.min(3);
    let m = random_model_for(spec, &sig, worlds, rng);
    let n = random_model_for(spec, &sig, worlds, rng);
    let (w, v) = (m.name(rng.below(m.len())).to_string(), n.name(rng.below(n.len())).to_string());
    let game = solve_game(spec, &m, &w, &n, &v, None).map_err(|e| e.to_string());
    let rel = bisimilar(spec, &m, &w, &n, &v).map_err(|e| e.to_string());
    match (game, rel) {
        (Ok(g), Ok(r)) if (g.winner == Player::Duplicator) == r.related => None,
        (g, r) => {
            let mut s = String::new();
            let _ = writeln!(s, "game: {:?}", g.map(|g| g.winner));
            let _ = writeln!(s, "related: {:?}", r.map(|r| r.related));
            let _ = write!(s, "--- left\n{}--- right\n{}", describe(&m, &w), describe(&n, &v));
            Some(s)
        }
    }
}

/// The reference checker.
pub fn reference_checker() -> Box<Checker> {
    Box::new(check)
}

/// A checker with a broken `◇` clause (evaluated as `□`), for smoke-testing
/// that the suites detect faults.
pub fn mutant_checker() -> Box<Checker> {
    Box::new(|m, w, f| check(m, w, &diamond_as_box(f)))
}

fn diamond_as_box(f: &Formula) -> Formula {
    let b = |x: &Formula| Box::new(diamond_as_box(x));
    match f {
        Formula::Diamond(r, a) => Formula::Box(r.clone(), b(a)),
        Formula::True | Formula::False | Formula::Prop(_) | Formula::Nom(_) | Formula::Known => f.clone(),
        Formula::Not(a) => Formula::Not(b(a)),
        Formula::And(x, y) => Formula::And(b(x), b(y)),
        Formula::Or(x, y) => Formula::Or(b(x), b(y)),
        Formula::Implies(x, y) => Formula::Implies(b(x), b(y)),
        Formula::Iff(x, y) => Formula::Iff(b(x), b(y)),
        Formula::Box(r, a) => Formula::Box(r.clone(), b(a)),
        Formula::DDiamond(r, a) => Formula::DDiamond(r.clone(), b(a)),
        Formula::DBox(r, a) => Formula::DBox(r.clone(), b(a)),
        Formula::Remember(a) => Formula::Remember(b(a)),
        Formula::Forget(a) => Formula::Forget(b(a)),
        Formula::Erase(a) => Formula::Erase(b(a)),
        Formula::At(i, a) => Formula::At(i.clone(), b(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dialects: &[&str]) -> SuiteConfig {
        SuiteConfig::new(20, 7, 3, 2, dialects).unwrap()
    }

    #[test]
    fn reference_checker_passes() {
        let report = run_suites(&small(&DIALECT_NAMES), &*reference_checker());
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn mutant_is_caught_with_a_counterexample() {
        let report = run_suites(&small(&["bml"]), &*mutant_checker());
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.contains("counterexample translation bml"));
        assert!(text.ends_with("status: fail\n"));
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(&["bml", "ml-full"]);
        assert_eq!(run_suites(&cfg, &*reference_checker()).to_string(), run_suites(&cfg, &*reference_checker()).to_string());
    }

    #[test]
    fn configuration_errors() {
        assert!(SuiteConfig::new(0, 0, 3, 2, &["bml"]).is_err());
        assert!(SuiteConfig::new(1, 0, 3, 2, &["nope"]).is_err());
        assert!(SuiteConfig::new(1, 0, 3, 2, &[]).is_err());
    }
}
