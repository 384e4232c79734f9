mod common;

use std::collections::{BTreeSet, HashSet};

use common::{all_pointed, fixture, model};
use modal_core::equivalence::bisimilar;
use modal_core::games::{replay, solve_game, Game, GameError, GameSide, GameState, Move, Player};
use modal_core::gen::{random_model_for, suite_signature};
use modal_core::rng::Prng;
use modal_core::syntax::{LogicSpec, DIALECT_NAMES};
use proptest::prelude::*;

fn spec(name: &str) -> LogicSpec {
    LogicSpec::by_name(name).unwrap()
}

/// Follows the winner's strategy against every opponent move and checks
/// that no play reaches a position the winner loses.
fn strategy_is_winning(game: &Game, winner: Player, strategy: &std::collections::BTreeMap<GameState, Move>) -> bool {
    let start = game.initial_state();
    let mut stack = vec![(start, Vec::<GameState>::new())];
    let mut done = HashSet::new();
    while let Some((state, path)) = stack.pop() {
        if let Some((w, _)) = game.terminal(&state) {
            if w != winner {
                return false;
            }
            continue;
        }
        if winner == Player::Spoiler && path.contains(&state) {
            return false;
        }
        if winner == Player::Duplicator && !done.insert(state.clone()) {
            continue;
        }
        let mut path = path.clone();
        path.push(state.clone());
        if state.turn == winner {
            let Some(mv) = strategy.get(&state) else { return false };
            let Some(next) = game.apply(&state, mv) else { return false };
            stack.push((next, path));
        } else {
            for mv in game.legal_moves(&state) {
                stack.push((game.apply(&state, &mv).unwrap(), path.clone()));
            }
        }
    }
    true
}

#[test]
fn game_agrees_with_bisimilarity_on_all_small_pairs() {
    let bml = spec("bml");
    let points = all_pointed(2);
    let mut checked = 0;
    for (m, w) in &points {
        for (n, v) in &points {
            let sol = solve_game(&bml, m, w, n, v, None).unwrap();
            let related = bisimilar(&bml, m, w, n, v).unwrap().related;
            assert_eq!(sol.winner == Player::Duplicator, related);
            checked += 1;
        }
    }
    assert_eq!(checked, points.len() * points.len());
}

#[test]
fn figure_games() {
    let bml = spec("bml");
    let (m1, m2) = (fixture("bisimilar_left.kripke"), fixture("bisimilar_right.kripke"));
    assert_eq!(solve_game(&bml, &m1, "a", &m2, "u", None).unwrap().winner, Player::Duplicator);
    let (s1, s2) = (fixture("similar_left.kripke"), fixture("similar_right.kripke"));
    let sol = solve_game(&bml, &s1, "w0", &s2, "v0", None).unwrap();
    assert_eq!(sol.winner, Player::Spoiler);
    let first = &sol.strategy.moves[&sol.initial];
    assert_eq!(
        *first,
        Move::Step { side: GameSide::Right, rel: "r".into(), memorizing: false, target: "t3".into() }
    );
}

#[test]
fn scripted_spoiler_win_on_the_similarity_figure() {
    let bml = spec("bml");
    let (s1, s2) = (fixture("similar_left.kripke"), fixture("similar_right.kripke"));
    let script = [Move::Step { side: GameSide::Right, rel: "r".into(), memorizing: false, target: "t3".into() }];
    let transcript = replay(&bml, &s1, "w0", &s2, "v0", None, &script).unwrap();
    assert_eq!(
        transcript,
        vec![
            "START left (|w0) right (|v0)",
            "SPOILER right v0->t3",
            "WINNER: spoiler (duplicator cannot answer)",
        ]
    );
    assert_eq!(replay(&bml, &s1, "w0", &s2, "v0", None, &[]).unwrap(), vec!["START left (|w0) right (|v0)"]);
    let bad = [Move::Answer { target: "s1".into() }];
    assert!(matches!(
        replay(&bml, &s1, "w0", &s2, "v0", None, &bad),
        Err(GameError::IllegalMove { index: 0, .. })
    ));
}

#[test]
fn memory_game_transcript() {
    let ml = spec("ml-diamond");
    let (refl, cycle) = (fixture("reflexive.kripke"), fixture("two_cycle.kripke"));
    let game = Game::new(&ml, &refl, "c", &cycle, "a", None).unwrap();
    let play = game.principal_play();
    assert_eq!(play.first().unwrap(), "START left (|c) right (|a)");
    assert_eq!(play[1], "SPOILER rem");
    assert_eq!(play.last().unwrap(), "WINNER: spoiler (duplicator cannot answer)");
    let s = game.initial_state();
    assert_eq!(game.parse_move(&s, "SPOILER rem"), Some(Move::Closure(modal_core::configspace::ClosureKind::Remember)));
    assert_eq!(
        game.parse_move(&s, "left c->c"),
        Some(Move::Step { side: GameSide::Left, rel: "r".into(), memorizing: false, target: "c".into() })
    );
}

#[test]
fn strategies_win_against_every_opponent() {
    let points = all_pointed(2);
    let bml = spec("bml");
    for (i, (m, w)) in points.iter().enumerate().step_by(3) {
        for (n, v) in points.iter().skip(i % 5).step_by(7) {
            for rounds in [None, Some(1), Some(2)] {
                let game = Game::new(&bml, m, w, n, v, rounds).unwrap();
                let sol = game.solve().unwrap();
                assert!(strategy_is_winning(&game, sol.winner, &sol.strategy.moves));
            }
        }
    }
}

#[test]
fn leaf_moves() {
    let m = model("worlds: a");
    let game = Game::new(&spec("bml"), &m, "a", &m, "a", None).unwrap();
    assert!(game.legal_moves(&game.initial_state()).is_empty());
}

fn random_pair(name: &str, seed: u64) -> (LogicSpec, modal_core::kripke::KripkeModel, modal_core::kripke::KripkeModel) {
    let spec = spec(name);
    let sig = suite_signature(&spec);
    let mut rng = Prng::new(seed);
    let m = random_model_for(&spec, &sig, 3, &mut rng);
    let n = random_model_for(&spec, &sig, 3, &mut rng);
    (spec, m, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn agreement_and_monotonicity_in_every_dialect(seed in any::<u64>(), which in 0usize..DIALECT_NAMES.len()) {
        let (spec, m, n) = random_pair(DIALECT_NAMES[which], seed);
        let (w, v) = (m.name(0).to_string(), n.name(0).to_string());
        let unbounded = solve_game(&spec, &m, &w, &n, &v, None).unwrap();
        let related = bisimilar(&spec, &m, &w, &n, &v).unwrap().related;
        prop_assert_eq!(unbounded.winner == Player::Duplicator, related);
        let game = Game::new(&spec, &m, &w, &n, &v, None).unwrap();
        prop_assert!(strategy_is_winning(&game, unbounded.winner, &unbounded.strategy.moves));
        let wins: Vec<bool> = (0..5)
            .map(|r| solve_game(&spec, &m, &w, &n, &v, Some(r)).unwrap().winner == Player::Duplicator)
            .collect();
        for r in 0..4 {
            prop_assert!(!wins[r + 1] || wins[r]);
        }
        if related {
            prop_assert!(wins.iter().all(|&x| x));
        }
    }
}

#[test]
fn transcripts_are_deterministic() {
    let bml = spec("bml");
    let (s1, s2) = (fixture("similar_left.kripke"), fixture("similar_right.kripke"));
    let runs: BTreeSet<Vec<String>> =
        (0..3).map(|_| Game::new(&bml, &s1, "w0", &s2, "v0", None).unwrap().principal_play()).collect();
    assert_eq!(runs.len(), 1);
}
