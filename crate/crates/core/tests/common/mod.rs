#![allow(dead_code)]

use std::sync::Arc;

use pandemic_core::map::{CardSet, CityId, CityMap};
use pandemic_core::rules::{GameConfig, GameState, Phase, PlayerCard, PlayerDeck};
use pandemic_core::seed::GameRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn world() -> Arc<CityMap> {
    Arc::new(CityMap::world())
}

pub fn fresh(players: usize, epidemics: u8, seed: u64) -> GameState {
    GameState::new_game(
        world(),
        &GameConfig::standard(players, epidemics, seed),
        &mut GameRng::seed_from_u64(seed),
    )
    .unwrap()
}

/// One uniformly random legal action, or the end-of-turn steps.
pub fn random_step<R: Rng>(s: &mut GameState, rng: &mut R) {
    match s.phase {
        Phase::Actions => {
            let legal = s.legal_actions().unwrap();
            let a = *legal.choose(rng).unwrap();
            s.apply_action(a).unwrap();
        }
        _ => s.end_turn(rng).unwrap(),
    }
}

/// A mid-game state reached by random play, in the action phase of an
/// ongoing game. Returns `None` if the game ended first.
pub fn random_midgame(players: usize, epidemics: u8, seed: u64, steps: usize) -> Option<GameState> {
    let mut s = fresh(players, epidemics, seed);
    let mut rng = GameRng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..steps {
        if s.status.is_over() {
            return None;
        }
        random_step(&mut s, &mut rng);
    }
    while !s.status.is_over() && s.phase != Phase::Actions {
        s.end_turn(&mut rng).unwrap();
    }
    (!s.status.is_over()).then_some(s)
}

/// Replaces a player's hand with `cards`, taking them from wherever they
/// are and discarding the old hand, so card conservation still holds.
pub fn force_hand(s: &mut GameState, seat: usize, cards: &[CityId]) {
    let wanted: CardSet = cards.iter().copied().collect();
    let old = s.players[seat].hand;
    for p in s.players.iter_mut() {
        p.hand = p.hand.minus(wanted);
    }
    s.player_discard = s.player_discard.minus(wanted).union(old.minus(wanted));
    let stacks: Vec<Vec<PlayerCard>> = s
        .player_deck
        .stacks_top_first()
        .into_iter()
        .map(|st| st.into_iter().filter(|c| !matches!(c, PlayerCard::City(x) if wanted.contains(*x))).collect())
        .collect();
    s.player_deck = PlayerDeck::from_stacks_top_first(&stacks);
    s.players[seat].hand = wanted;
}
