use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use modal_core::analysis::{
    closure_conditions, definability_check, minimize, DefinabilityVerdict, Universe, DEFINABILITY_HEADER,
};
use modal_core::equivalence::{bisimilar, serialize_witness, simulated_by};
use modal_core::games::{Game, GameState, Move, Player};
use modal_core::gen::{random_formula, random_model_for, suite_signature};
use modal_core::kripke::{load_model, save_model, KripkeModel, PointedModel};
use modal_core::rng::Prng;
use modal_core::semantics::check;
use modal_core::suite::{mutant_checker, reference_checker, run_suites, SuiteConfig};
use modal_core::syntax::{parse_formula, parse_formula_unchecked, print_formula, Formula, LogicSpec, DIALECT_NAMES};
use modal_core::translation::translate_formula;

const DIALECT_HELP: &str = "\
Dialects:
  bml          <r>, [r] and negation
  bml-minus    <r> only, no negation
  hl           bml plus nominals 'i
  hl-at        hl plus @i
  ml-diamond   bml plus rem and known
  ml-ddiamond  <<r>>, [[r]], rem, known and negation
  ml-forget    ml-diamond plus forg
  ml-erase     ml-diamond plus erase
  ml-full      all memory operators with <r>, [r], <<r>>, [[r]]

Exit status: 0 for true/related/defined, 1 for false/unrelated/undefined, 2 on errors.";

#[derive(Parser)]
#[command(name = "modal", version, about = "Model checking, translation, bisimulation and games for modal logics", after_help = DIALECT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it in canonical form
    Parse(ParseArgs),
    /// Evaluate a formula at a world of a model
    Check(CheckArgs),
    /// Print the first-order translation of a formula
    Translate(TranslateArgs),
    /// Decide bisimilarity (or simulation) of two pointed models
    Bisim(BisimArgs),
    /// Solve or replay the bisimulation game on two pointed models
    Game(GameArgs),
    /// Print the bisimulation quotient of a model
    Minimize(MinimizeArgs),
    /// Check whether a class of pointed models is definable
    Define(DefineArgs),
    /// Run the seeded property suites
    Suite(SuiteArgs),
    /// Print a seeded random model or formula
    Random(RandomArgs),
}

#[derive(Args)]
struct DialectArg {
    /// Dialect name (see the list below)
    #[arg(long, default_value = "bml")]
    dialect: String,
}

impl DialectArg {
    fn spec(&self) -> Result<LogicSpec> {
        LogicSpec::by_name(&self.dialect)
            .ok_or_else(|| anyhow!("unknown dialect `{}` (expected one of {})", self.dialect, DIALECT_NAMES.join(", ")))
    }
}

#[derive(Args)]
struct PairArgs {
    /// Model files, left then right
    #[arg(long = "model", num_args = 1, required = true)]
    models: Vec<PathBuf>,
    /// Worlds, left then right; defaults to each file's `point:`
    #[arg(long = "world", num_args = 1)]
    worlds: Vec<String>,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[arg(long)]
    formula: String,
    /// Check symbols against this model's signature
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    world: Option<String>,
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[arg(long)]
    formula: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Both,
    LeftToRight,
}

#[derive(Args)]
struct BisimArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, value_enum, default_value = "both")]
    direction: Direction,
    /// Print the largest relation when related
    #[arg(long)]
    emit_witness: bool,
    /// Print a distinguishing formula when unrelated
    #[arg(long)]
    emit_distinguisher: bool,
}

#[derive(Args)]
struct GameArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[command(flatten)]
    pair: PairArgs,
    /// Bound on modal rounds; unbounded when absent
    #[arg(long)]
    rounds: Option<usize>,
    /// Replay moves from a file, one per line
    #[arg(long)]
    script: Option<PathBuf>,
    /// Play interactively on standard input
    #[arg(long, conflicts_with = "script")]
    interactive: bool,
    /// The player you control with --interactive
    #[arg(long, value_enum, default_value = "spoiler")]
    play: PlayerArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlayerArg {
    Spoiler,
    Duplicator,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct DefineArgs {
    #[command(flatten)]
    dialect: DialectArg,
    /// Directory of model files
    #[arg(long)]
    universe: PathBuf,
    /// File listing the ids of the target class, one per line
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 6)]
    size: usize,
}

#[derive(Args)]
struct SuiteArgs {
    /// Dialects to test (repeatable); all when absent
    #[arg(long = "dialect", num_args = 1)]
    dialects: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    max_worlds: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, hide = true)]
    mutant: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RandomKind {
    Model,
    Formula,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    dialect: DialectArg,
    #[arg(long, value_enum, default_value = "model")]
    kind: RandomKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    max_worlds: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> Result<bool> {
    match command {
        Command::Parse(a) => cmd_parse(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Translate(a) => cmd_translate(a, out),
        Command::Bisim(a) => cmd_bisim(a, out),
        Command::Game(a) => cmd_game(a, out),
        Command::Minimize(a) => cmd_minimize(a, out),
        Command::Define(a) => cmd_define(a, out),
        Command::Suite(a) => cmd_suite(a, out),
        Command::Random(a) => cmd_random(a, out),
    }
}

fn read_model(path: &Path) -> Result<(KripkeModel, Option<String>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_model(&text).with_context(|| format!("loading {}", path.display()))
}

fn pointed(path: &Path, world: Option<&String>) -> Result<(KripkeModel, String)> {
    let (m, point) = read_model(path)?;
    let w = world
        .cloned()
        .or(point)
        .ok_or_else(|| anyhow!("{}: no --world given and the file has no `point:`", path.display()))?;
    if m.index(&w).is_none() {
        bail!("{}: unknown world `{w}`", path.display());
    }
    Ok((m, w))
}

fn pair(p: &PairArgs) -> Result<[(KripkeModel, String); 2]> {
    if p.models.len() != 2 {
        bail!("expected exactly two --model arguments, got {}", p.models.len());
    }
    if p.worlds.len() > 2 {
        bail!("at most two --world arguments");
    }
    Ok([pointed(&p.models[0], p.worlds.first())?, pointed(&p.models[1], p.worlds.get(1))?])
}

fn formula_for(text: &str, spec: &LogicSpec, m: &KripkeModel) -> Result<Formula> {
    let sig = m.signature()?;
    Ok(parse_formula(text, &sig, spec)?)
}

fn cmd_parse(a: ParseArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let f = match &a.model {
        Some(path) => formula_for(&a.formula, &spec, &read_model(path)?.0)?,
        None => {
            let f = parse_formula_unchecked(&a.formula)?;
            if let Some(op) = f.operators().into_iter().find(|&op| !spec.allows(op)) {
                bail!("operator `{op}` is not part of the dialect");
            }
            f
        }
    };
    writeln!(out, "{}", print_formula(&f))?;
    writeln!(out, "depth: {}", f.modal_depth())?;
    writeln!(out, "size: {}", f.size())?;
    Ok(true)
}

fn cmd_check(a: CheckArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let (m, w) = pointed(&a.model, a.world.as_ref())?;
    let f = formula_for(&a.formula, &spec, &m)?;
    let value = check(&m, &w, &f)?;
    writeln!(out, "{value}")?;
    Ok(value)
}

fn cmd_translate(a: TranslateArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let f = parse_formula_unchecked(&a.formula)?;
    writeln!(out, "{}", translate_formula(&f, &spec)?.to_lisp())?;
    Ok(true)
}

fn cmd_bisim(a: BisimArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let [(m, w), (n, v)] = pair(&a.pair)?;
    let outcome = match a.direction {
        Direction::Both => bisimilar(&spec, &m, &w, &n, &v)?,
        Direction::LeftToRight => simulated_by(&spec, &m, &w, &n, &v)?,
    };
    writeln!(out, "{}", if outcome.related { "related" } else { "unrelated" })?;
    if a.emit_witness {
        if let Some(witness) = &outcome.witness {
            writeln!(out, "witness:")?;
            write!(out, "{}", serialize_witness(witness))?;
        }
    }
    if a.emit_distinguisher && !outcome.related {
        match &outcome.distinguisher {
            Some(f) => {
                writeln!(out, "distinguisher: {}", print_formula(f))?;
                writeln!(out, "left: {}", check(&m, &w, f)?)?;
                writeln!(out, "right: {}", check(&n, &v, f)?)?;
            }
            None => writeln!(out, "distinguisher: none")?,
        }
    }
    Ok(outcome.related)
}

fn cmd_game(a: GameArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let [(m, w), (n, v)] = pair(&a.pair)?;
    let game = Game::new(&spec, &m, &w, &n, &v, a.rounds)?;
    if let Some(path) = &a.script {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut state = game.initial_state();
        let mut moves = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mv = game
                .parse_move(&state, line)
                .ok_or_else(|| anyhow!("{}:{}: cannot read move `{line}`", path.display(), i + 1))?;
            state = game.apply(&state, &mv).unwrap_or(state);
            moves.push(mv);
        }
        for line in game.replay(&moves)? {
            writeln!(out, "{line}")?;
        }
        return Ok(game.solve()?.winner == Player::Duplicator);
    }
    if a.interactive {
        let human = match a.play {
            PlayerArg::Spoiler => Player::Spoiler,
            PlayerArg::Duplicator => Player::Duplicator,
        };
        return play_interactive(&game, human, out);
    }
    let solution = game.solve()?;
    writeln!(out, "winner: {}", solution.winner)?;
    for line in game.principal_play() {
        writeln!(out, "{line}")?;
    }
    Ok(solution.winner == Player::Duplicator)
}

fn play_interactive(game: &Game, human: Player, out: &mut impl Write) -> Result<bool> {
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut state: GameState = game.initial_state();
    writeln!(out, "START left {} right {}", state.left, state.right)?;
    loop {
        if let Some((winner, reason)) = game.terminal(&state) {
            writeln!(out, "WINNER: {winner} ({reason})")?;
            return Ok(winner == Player::Duplicator);
        }
        let mv: Move = if state.turn == human {
            let legal = game.legal_moves(&state);
            let mut err = io::stderr();
            writeln!(err, "position: left {} right {}", state.left, state.right)?;
            for mv in &legal {
                writeln!(err, "  {}", game.format_move(&state, mv))?;
            }
            write!(err, "{human}> ")?;
            err.flush()?;
            let Some(line) = lines.next() else { bail!("input ended before the game did") };
            let line = line?;
            match game.parse_move(&state, &line).filter(|mv| legal.contains(mv)) {
                Some(mv) => mv,
                None => {
                    writeln!(err, "not a legal move: {}", line.trim())?;
                    continue;
                }
            }
        } else {
            game.winning_move(&state)
                .or_else(|| game.legal_moves(&state).into_iter().next())
                .expect("non-terminal positions have moves")
        };
        writeln!(out, "{}", game.format_move(&state, &mv))?;
        state = game.apply(&state, &mv).expect("chosen moves are legal");
    }
}

fn cmd_minimize(a: MinimizeArgs, out: &mut impl Write) -> Result<bool> {
    let (m, point) = read_model(&a.model)?;
    let (q, map) = minimize(&m)?;
    let rep = point.as_ref().map(|p| map[p].as_str());
    write!(out, "{}", save_model(&q, rep))?;
    for (w, r) in &map {
        writeln!(out, "# {w} -> {r}")?;
    }
    Ok(true)
}

/// Loads every `*.kripke` file in `dir`: a file with a `point:` line is one
/// entry named after the file stem, any other file contributes one entry
/// `stem:world` per world.
fn load_universe(dir: &Path) -> Result<Universe> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "kripke"));
    paths.sort();
    let mut entries = Vec::new();
    for path in paths {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let (m, point) = read_model(&path)?;
        match point {
            Some(p) => entries.push((stem, PointedModel::new(m, &p)?)),
            None => {
                for w in m.worlds().to_vec() {
                    entries.push((format!("{stem}:{w}"), PointedModel::new(m.clone(), &w)?));
                }
            }
        }
    }
    Ok(Universe::new(entries)?)
}

fn cmd_define(a: DefineArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    let u = load_universe(&a.universe)?;
    let text = fs::read_to_string(&a.target).with_context(|| format!("reading {}", a.target.display()))?;
    let mut target = BTreeSet::new();
    for line in text.lines() {
        let id = line.split('#').next().unwrap_or("").trim();
        if id.is_empty() {
            continue;
        }
        target.insert(u.position(id).ok_or_else(|| anyhow!("target id `{id}` is not in the universe"))?);
    }
    writeln!(out, "{DEFINABILITY_HEADER}")?;
    let verdict = definability_check(&spec, &u, &target, a.depth, a.size)?;
    let defined = matches!(verdict, DefinabilityVerdict::Defined(_));
    match verdict {
        DefinabilityVerdict::Defined(f) => {
            writeln!(out, "defined: {}", print_formula(&f))?;
        }
        DefinabilityVerdict::NotClosed { inside, outside, relation, directed } => {
            writeln!(out, "not closed: {} {} {}", u.id(inside), if directed { "is simulated by" } else { "is bisimilar to" }, u.id(outside))?;
            let (pa, pb) = (u.point(inside), u.point(outside));
            let verified = modal_core::equivalence::verify_relation(&closure_conditions(&spec), &pa.model, &pb.model, &relation);
            writeln!(out, "relation:")?;
            write!(out, "{}", serialize_witness(&relation))?;
            writeln!(out, "verified: {}", verified.is_ok())?;
        }
        DefinabilityVerdict::ExhaustedSearch { depth, size } => {
            writeln!(out, "exhausted: no formula up to depth {depth} and size {size}")?;
        }
    }
    writeln!(out, "universe: {}", u.len())?;
    writeln!(out, "target: {}", target.len())?;
    Ok(defined)
}

fn cmd_suite(a: SuiteArgs, out: &mut impl Write) -> Result<bool> {
    let names: Vec<&str> =
        if a.dialects.is_empty() { DIALECT_NAMES.to_vec() } else { a.dialects.iter().map(String::as_str).collect() };
    let cfg = SuiteConfig::new(a.trials, a.seed, a.max_worlds, a.depth, &names).map_err(|e| anyhow!(e))?;
    let checker = if a.mutant { mutant_checker() } else { reference_checker() };
    let report = run_suites(&cfg, &*checker);
    write!(out, "{report}")?;
    Ok(report.passed())
}

fn cmd_random(a: RandomArgs, out: &mut impl Write) -> Result<bool> {
    let spec = a.dialect.spec()?;
    if a.max_worlds == 0 {
        bail!("--max-worlds must be positive");
    }
    let sig = suite_signature(&spec);
    let mut rng = Prng::new(a.seed);
    match a.kind {
        RandomKind::Model => {
            let m = random_model_for(&spec, &sig, a.max_worlds, &mut rng);
            let point = m.name(0).to_string();
            write!(out, "{}", save_model(&m, Some(&point)))?;
        }
        RandomKind::Formula => {
            let f = random_formula(&spec, &sig, a.depth, 4 * a.depth + 4, &mut rng);
            writeln!(out, "{}", print_formula(&f))?;
        }
    }
    Ok(true)
}
