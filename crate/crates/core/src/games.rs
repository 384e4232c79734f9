//! Ehrenfeucht–Fraïssé style games between two pointed models.
//!
//! Spoiler moves a pebble along a relation on one side (both sides when
//! the dialect has back conditions) and Duplicator must answer along the
//! same relation on the other side. Remember, forget, erase and @ are
//! Spoiler moves applied to both sides at once and do not use up a round.
//! Spoiler wins as soon as the pebbles disagree atomically or Duplicator
//! cannot answer; Duplicator wins when Spoiler cannot move and on every
//! infinite play.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::configspace::{ClosureKind, ConfigNode, DEFAULT_LIMIT};
use crate::equivalence::{conditions_for, Config, EquivError, Refinement, Side};
use crate::kripke::KripkeModel;
use crate::syntax::LogicSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("state space exceeds the configured bound of {0}")]
    StateSpaceExceeded(usize),
    #[error("move {index}: {reason}")]
    IllegalMove { index: usize, reason: String },
}

impl From<EquivError> for GameError {
    fn from(e: EquivError) -> Self {
        match e {
            EquivError::UnknownWorld(w) => GameError::UnknownWorld(w),
            EquivError::StateSpaceExceeded(n) => GameError::StateSpaceExceeded(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Spoiler => "spoiler",
            Player::Duplicator => "duplicator",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    /// Spoiler moves the pebble on `side` along `rel`.
    Step { side: GameSide, rel: String, memorizing: bool, target: String },
    /// Spoiler applies a memory operation or @ on both sides.
    Closure(ClosureKind),
    /// Duplicator answers the pending step on the other side.
    Answer { target: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GameSide {
    Left,
    Right,
}

impl GameSide {
    fn other(self) -> GameSide {
        match self {
            GameSide::Left => GameSide::Right,
            GameSide::Right => GameSide::Left,
        }
    }

    fn word(self) -> &'static str {
        match self {
            GameSide::Left => "left",
            GameSide::Right => "right",
        }
    }
}

impl From<Side> for GameSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => GameSide::Left,
            Side::Right => GameSide::Right,
        }
    }
}

/// A Spoiler step waiting for Duplicator's answer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pending {
    pub side: GameSide,
    pub rel: String,
    pub memorizing: bool,
    pub chosen: Config,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GameState {
    pub left: Config,
    pub right: Config,
    pub turn: Player,
    pub pending: Option<Pending>,
    /// Modal rounds Spoiler may still start; `None` for the unbounded game.
    pub rounds_left: Option<usize>,
}

/// Winning moves for one player, for every state reachable when that
/// player follows them against all opponent moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub player: Player,
    pub moves: BTreeMap<GameState, Move>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSolution {
    pub winner: Player,
    pub initial: GameState,
    pub strategy: Strategy,
}

/// Internal position: config ids plus the pending step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Pos {
    c: usize,
    d: usize,
    pending: Option<(GameSide, usize, bool, usize)>,
    rounds: Option<usize>,
}

/// A game between `(m, w)` and `(n, v)` under a dialect.
pub struct Game<'m> {
    refinement: Refinement<'m>,
    rounds: Option<usize>,
    start: (usize, usize),
    limit: usize,
}

impl<'m> Game<'m> {
    pub fn new(
        spec: &LogicSpec,
        m: &'m KripkeModel,
        w: &str,
        n: &'m KripkeModel,
        v: &str,
        rounds: Option<usize>,
    ) -> Result<Self, GameError> {
        Self::with_limit(spec, m, w, n, v, rounds, DEFAULT_LIMIT)
    }

    pub fn with_limit(
        spec: &LogicSpec,
        m: &'m KripkeModel,
        w: &str,
        n: &'m KripkeModel,
        v: &str,
        rounds: Option<usize>,
        limit: usize,
    ) -> Result<Self, GameError> {
        let wi = m.index(w).ok_or_else(|| GameError::UnknownWorld(w.to_string()))?;
        let vi = n.index(v).ok_or_else(|| GameError::UnknownWorld(v.to_string()))?;
        let mut refinement = Refinement::new(conditions_for(spec), m, n, limit)?.with_spec(spec);
        refinement.run(rounds.map(|r| u32::try_from(r).unwrap_or(u32::MAX)));
        let start = refinement.initial(wi, vi);
        Ok(Game { refinement, rounds, start, limit })
    }

    fn space(&self) -> &crate::configspace::ConfigSpace<'m> {
        &self.refinement.space
    }

    pub fn initial_state(&self) -> GameState {
        self.state_of(&self.initial_pos())
    }

    fn initial_pos(&self) -> Pos {
        Pos { c: self.start.0, d: self.start.1, pending: None, rounds: self.rounds }
    }

    fn state_of(&self, p: &Pos) -> GameState {
        GameState {
            left: self.refinement.config(p.c),
            right: self.refinement.config(p.d),
            turn: if p.pending.is_some() { Player::Duplicator } else { Player::Spoiler },
            pending: p.pending.map(|(side, rel, memorizing, chosen)| Pending {
                side,
                rel: self.space().ops.rels[rel].clone(),
                memorizing,
                chosen: self.refinement.config(chosen),
            }),
            rounds_left: p.rounds,
        }
    }

    fn config_id(&self, model: usize, cfg: &Config) -> Option<usize> {
        let space = self.space();
        let m = space.models[model];
        let point = m.index(&cfg.point)?;
        let mut mem = fixedbitset::FixedBitSet::with_capacity(m.len());
        for w in &cfg.memory {
            mem.insert(m.index(w)?);
        }
        space.find(&ConfigNode { model, mem, point })
    }

    fn pos_of(&self, s: &GameState) -> Option<Pos> {
        let c = self.config_id(0, &s.left)?;
        let d = self.config_id(1, &s.right)?;
        let pending = match &s.pending {
            None => None,
            Some(p) => {
                let model = if p.side == GameSide::Left { 0 } else { 1 };
                Some((p.side, self.space().rel_index(&p.rel)?, p.memorizing, self.config_id(model, &p.chosen)?))
            }
        };
        if pending.is_some() != (s.turn == Player::Duplicator) {
            return None;
        }
        Some(Pos { c, d, pending, rounds: s.rounds_left })
    }

    fn targets(&self, c: usize, rel: usize, memorizing: bool) -> &[usize] {
        if memorizing {
            &self.space().msucc[c][rel]
        } else {
            &self.space().succ[c][rel]
        }
    }

    fn moves_at(&self, p: &Pos) -> Vec<(Move, Pos)> {
        let space = self.space();
        let conds = &self.refinement.conds;
        let mut out = Vec::new();
        match p.pending {
            Some((side, rel, memorizing, chosen)) => {
                let from = if side == GameSide::Left { p.d } else { p.c };
                for &t in self.targets(from, rel, memorizing) {
                    let (c, d) = if side == GameSide::Left { (chosen, t) } else { (t, chosen) };
                    if self.refinement.atomic_agree(c, d) {
                        let target = space.point_name(t).to_string();
                        out.push((Move::Answer { target }, Pos { c, d, pending: None, rounds: p.rounds }));
                    }
                }
            }
            None => {
                if !self.refinement.atomic_agree(p.c, p.d) {
                    return out;
                }
                for (k, kind) in space.ops.closures.iter().enumerate() {
                    if let (Some(c), Some(d)) = (space.closures[p.c][k], space.closures[p.d][k]) {
                        out.push((Move::Closure(kind.clone()), Pos { c, d, pending: None, rounds: p.rounds }));
                    }
                }
                if p.rounds == Some(0) {
                    return out;
                }
                let rounds = p.rounds.map(|r| r - 1);
                let kinds = [
                    (conds.forth, GameSide::Left, false),
                    (conds.back, GameSide::Right, false),
                    (conds.mforth, GameSide::Left, true),
                    (conds.mback, GameSide::Right, true),
                ];
                for (active, side, memorizing) in kinds {
                    if !active {
                        continue;
                    }
                    let from = if side == GameSide::Left { p.c } else { p.d };
                    for rel in 0..space.ops.rels.len() {
                        for &t in self.targets(from, rel, memorizing) {
                            let mv = Move::Step {
                                side,
                                rel: space.ops.rels[rel].clone(),
                                memorizing,
                                target: space.point_name(t).to_string(),
                            };
                            out.push((mv, Pos { c: p.c, d: p.d, pending: Some((side, rel, memorizing, t)), rounds }));
                        }
                    }
                }
            }
        }
        out
    }

    /// Legal moves in `s`; empty for unknown states.
    pub fn legal_moves(&self, s: &GameState) -> Vec<Move> {
        self.pos_of(s).map(|p| self.moves_at(&p).into_iter().map(|(m, _)| m).collect()).unwrap_or_default()
    }

    /// The state after `mv`, if legal.
    pub fn apply(&self, s: &GameState, mv: &Move) -> Option<GameState> {
        let p = self.pos_of(s)?;
        self.moves_at(&p).into_iter().find(|(m, _)| m == mv).map(|(_, next)| self.state_of(&next))
    }

    /// The winner of a state with no moves, and why.
    pub fn terminal(&self, s: &GameState) -> Option<(Player, &'static str)> {
        let p = self.pos_of(s)?;
        if p.pending.is_none() && !self.refinement.atomic_agree(p.c, p.d) {
            return Some((Player::Spoiler, "atomic disagreement"));
        }
        if !self.moves_at(&p).is_empty() {
            return None;
        }
        Some(match p.pending {
            Some(_) => (Player::Spoiler, "duplicator cannot answer"),
            None => (Player::Duplicator, "spoiler cannot move"),
        })
    }

    fn duplicator_wins(&self, c: usize, d: usize, rounds: Option<usize>) -> bool {
        match rounds {
            Some(r) => self.refinement.in_level(c, d, u32::try_from(r).unwrap_or(u32::MAX)),
            None => self.refinement.related(c, d),
        }
    }

    /// Who wins from `s` with optimal play.
    pub fn winner_at(&self, s: &GameState) -> Option<Player> {
        let p = self.pos_of(s)?;
        Some(self.winner_pos(&p))
    }

    fn winner_pos(&self, p: &Pos) -> Player {
        let wins = match p.pending {
            None => self.duplicator_wins(p.c, p.d, p.rounds),
            Some(_) => self.moves_at(p).iter().any(|(_, next)| self.duplicator_wins(next.c, next.d, next.rounds)),
        };
        if wins {
            Player::Duplicator
        } else {
            Player::Spoiler
        }
    }

    fn best_move(&self, p: &Pos) -> Option<(Move, Pos)> {
        let moves = self.moves_at(p);
        match p.pending {
            Some(_) => moves.into_iter().find(|(_, next)| self.duplicator_wins(next.c, next.d, next.rounds)),
            None => {
                if self.duplicator_wins(p.c, p.d, p.rounds) {
                    return None;
                }
                let key = self.refinement.key(p.c, p.d);
                if key == (0, 0) {
                    None
                } else if key.1 == 0 {
                    let fail = self.refinement.modal_failure(p.c, p.d, key.0)?;
                    let side = GameSide::from(fail.side);
                    let rel = self.space().ops.rels[fail.rel].clone();
                    let target = self.space().point_name(fail.moved).to_string();
                    let want = Move::Step { side, rel, memorizing: fail.memorizing, target };
                    moves.into_iter().find(|(m, next)| *m == want && next.pending.map(|q| q.3) == Some(fail.moved))
                } else {
                    let (k, _, _) = self.refinement.closure_failure(p.c, p.d, (key.0, key.1 - 1))?;
                    let want = Move::Closure(self.space().ops.closures[k].clone());
                    moves.into_iter().find(|(m, _)| *m == want)
                }
            }
        }
    }

    /// A winning move for the player to move in `s`, if that player wins.
    pub fn winning_move(&self, s: &GameState) -> Option<Move> {
        let p = self.pos_of(s)?;
        let mover = if p.pending.is_some() { Player::Duplicator } else { Player::Spoiler };
        if self.winner_pos(&p) != mover {
            return None;
        }
        self.best_move(&p).map(|(m, _)| m)
    }

    pub fn solve(&self) -> Result<GameSolution, GameError> {
        let start = self.initial_pos();
        let winner = self.winner_pos(&start);
        let mut moves = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            if !seen.insert(p) {
                continue;
            }
            if seen.len() > self.limit {
                return Err(GameError::StateSpaceExceeded(self.limit));
            }
            let mover = if p.pending.is_some() { Player::Duplicator } else { Player::Spoiler };
            if mover == winner {
                if let Some((mv, next)) = self.best_move(&p) {
                    moves.insert(self.state_of(&p), mv);
                    queue.push_back(next);
                }
            } else if p.pending.is_some() || self.refinement.atomic_agree(p.c, p.d) {
                queue.extend(self.moves_at(&p).into_iter().map(|(_, next)| next));
            }
        }
        Ok(GameSolution { winner, initial: self.state_of(&start), strategy: Strategy { player: winner, moves } })
    }

    fn arrow(memorizing: bool) -> &'static str {
        if memorizing {
            "=>"
        } else {
            "->"
        }
    }

    fn rel_prefix(&self, rel: &str) -> String {
        if self.space().ops.rels.len() > 1 {
            format!("{rel}:")
        } else {
            String::new()
        }
    }

    /// One transcript line for `mv` played in `s`.
    pub fn format_move(&self, s: &GameState, mv: &Move) -> String {
        match mv {
            Move::Step { side, rel, memorizing, target } => {
                let from = if *side == GameSide::Left { &s.left.point } else { &s.right.point };
                format!("SPOILER {} {}{from}{}{target}", side.word(), self.rel_prefix(rel), Self::arrow(*memorizing))
            }
            Move::Closure(kind) => format!("SPOILER {}", kind.keyword()),
            Move::Answer { target } => match &s.pending {
                Some(p) => {
                    let side = p.side.other();
                    let from = if side == GameSide::Left { &s.left.point } else { &s.right.point };
                    format!(
                        "DUPLICATOR {} {}{from}{}{target}",
                        side.word(),
                        self.rel_prefix(&p.rel),
                        Self::arrow(p.memorizing)
                    )
                }
                None => format!("DUPLICATOR {target}"),
            },
        }
    }

    /// Reads a move written as by [`Self::format_move`], with or without the
    /// player word; a player word naming the wrong player is rejected.
    pub fn parse_move(&self, s: &GameState, line: &str) -> Option<Move> {
        let mut words: Vec<&str> = line.split_whitespace().collect();
        let named = match words.first().map(|w| w.to_ascii_uppercase()).as_deref() {
            Some("SPOILER") => Some(Player::Spoiler),
            Some("DUPLICATOR") => Some(Player::Duplicator),
            _ => None,
        };
        if let Some(player) = named {
            if player != s.turn {
                return None;
            }
            words.remove(0);
        }
        match words.as_slice() {
            [op] if !op.contains("->") && !op.contains("=>") => {
                self.space().ops.closures.iter().find(|k| k.keyword() == *op).cloned().map(Move::Closure)
            }
            [side, step] => {
                let side = match *side {
                    "left" => GameSide::Left,
                    "right" => GameSide::Right,
                    _ => return None,
                };
                let (rel, step) = match step.split_once(':') {
                    Some((r, rest)) => (r.to_string(), rest),
                    None if self.space().ops.rels.len() == 1 => (self.space().ops.rels[0].clone(), *step),
                    None => return None,
                };
                let (memorizing, (_, target)) = match (step.split_once("=>"), step.split_once("->")) {
                    (Some(parts), _) => (true, parts),
                    (None, Some(parts)) => (false, parts),
                    _ => return None,
                };
                let target = target.to_string();
                match &s.pending {
                    Some(p) if p.side.other() == side && p.rel == rel && p.memorizing == memorizing => {
                        Some(Move::Answer { target })
                    }
                    Some(_) => None,
                    None => Some(Move::Step { side, rel, memorizing, target }),
                }
            }
            _ => None,
        }
    }
}

fn start_line(s: &GameState) -> String {
    format!("START left {} right {}", s.left, s.right)
}

fn winner_line(winner: Player, reason: &str) -> String {
    format!("WINNER: {winner} ({reason})")
}

/// Solves the game; `rounds = None` is the unbounded game.
pub fn solve_game(
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    n: &KripkeModel,
    v: &str,
    rounds: Option<usize>,
) -> Result<GameSolution, GameError> {
    Game::new(spec, m, w, n, v, rounds)?.solve()
}

/// Legal moves in `s` of the game between `(m, s.left)` and `(n, s.right)`.
pub fn legal_moves(spec: &LogicSpec, m: &KripkeModel, n: &KripkeModel, s: &GameState) -> Result<Vec<Move>, GameError> {
    let game = Game::new(spec, m, &s.left.point, n, &s.right.point, s.rounds_left)?;
    Ok(game.legal_moves(s))
}

impl Game<'_> {
    /// Plays `script` from the initial state and returns the transcript.
    pub fn replay(&self, script: &[Move]) -> Result<Vec<String>, GameError> {
        let mut state = self.initial_state();
        let mut lines = vec![start_line(&state)];
        for (index, mv) in script.iter().enumerate() {
            if let Some((winner, reason)) = self.terminal(&state) {
                return Err(GameError::IllegalMove { index, reason: format!("game is over ({winner} won: {reason})") });
            }
            let Some(next) = self.apply(&state, mv) else {
                let who = if state.turn == Player::Spoiler { "spoiler" } else { "duplicator" };
                return Err(GameError::IllegalMove { index, reason: format!("not a legal {who} move") });
            };
            lines.push(self.format_move(&state, mv));
            state = next;
        }
        if let Some((winner, reason)) = self.terminal(&state) {
            lines.push(winner_line(winner, reason));
        }
        Ok(lines)
    }

    /// A complete play where both players use winning moves when they have
    /// them and otherwise the first legal move.
    pub fn principal_play(&self) -> Vec<String> {
        let mut state = self.initial_state();
        let mut lines = vec![start_line(&state)];
        let mut visited = BTreeSet::new();
        loop {
            if let Some((winner, reason)) = self.terminal(&state) {
                lines.push(winner_line(winner, reason));
                return lines;
            }
            if !visited.insert(state.clone()) {
                lines.push(winner_line(Player::Duplicator, "position repeats, infinite play"));
                return lines;
            }
            let mv = self.winning_move(&state).or_else(|| self.legal_moves(&state).into_iter().next()).expect("non-terminal state has moves");
            lines.push(self.format_move(&state, &mv));
            state = self.apply(&state, &mv).expect("legal");
        }
    }
}

/// Replays `script` in the game between `(m, w)` and `(n, v)`.
pub fn replay(
    spec: &LogicSpec,
    m: &KripkeModel,
    w: &str,
    n: &KripkeModel,
    v: &str,
    rounds: Option<usize>,
    script: &[Move],
) -> Result<Vec<String>, GameError> {
    Game::new(spec, m, w, n, v, rounds)?.replay(script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::load_model;

    fn model(text: &str) -> KripkeModel {
        load_model(text).unwrap().0
    }

    #[test]
    fn leaf_against_leaf() {
        let m = model("worlds: a");
        let game = Game::new(&LogicSpec::bml(), &m, "a", &m, "a", None).unwrap();
        let s = game.initial_state();
        assert!(game.legal_moves(&s).is_empty());
        assert_eq!(game.terminal(&s), Some((Player::Duplicator, "spoiler cannot move")));
    }

    #[test]
    fn move_counts_by_direction() {
        let m = model("worlds: a b\nrel r: a->b");
        let both = Game::new(&LogicSpec::bml(), &m, "a", &m, "a", None).unwrap();
        assert_eq!(both.legal_moves(&both.initial_state()).len(), 2);
        let minus = LogicSpec::by_name("bml-minus").unwrap();
        let directed = Game::new(&minus, &m, "a", &m, "a", None).unwrap();
        assert_eq!(directed.legal_moves(&directed.initial_state()).len(), 1);
    }

    #[test]
    fn atomic_disagreement_loses_at_once() {
        let m = model("worlds: a b\nval p: a");
        let sol = solve_game(&LogicSpec::bml(), &m, "a", &m, "b", Some(0)).unwrap();
        assert_eq!(sol.winner, Player::Spoiler);
        let transcript = replay(&LogicSpec::bml(), &m, "a", &m, "b", Some(0), &[]).unwrap();
        assert_eq!(transcript, vec!["START left (|a) right (|b)", "WINNER: spoiler (atomic disagreement)"]);
    }
}
