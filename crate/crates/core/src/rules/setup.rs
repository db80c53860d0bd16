use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    GameState, InfectionDeck, Phase, PlayerCard, PlayerDeck, PlayerState, Role, Status,
    ACTIONS_PER_TURN, CUBES_PER_COLOR,
};
use crate::error::RuleError;
use crate::map::{CardSet, CityId, CityMap};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameConfig {
    pub player_count: usize,
    pub epidemic_count: u8,
    /// Seating order; length must equal `player_count`.
    pub roles: Vec<Role>,
    pub seed: u64,
}

impl GameConfig {
    /// Roles taken in the fixed testbed order (Operations Expert, Medic,
    /// Researcher, Scientist), truncated to the player count.
    pub fn standard(player_count: usize, epidemic_count: u8, seed: u64) -> GameConfig {
        GameConfig {
            player_count,
            epidemic_count,
            roles: Role::ALL.iter().copied().take(player_count).collect(),
            seed,
        }
    }

    /// Roles drawn uniformly without repetition, in random seating order.
    pub fn random_roles<R: Rng + ?Sized>(
        player_count: usize,
        epidemic_count: u8,
        seed: u64,
        rng: &mut R,
    ) -> GameConfig {
        let mut roles = Role::ALL.to_vec();
        roles.shuffle(rng);
        roles.truncate(player_count);
        GameConfig { player_count, epidemic_count, roles, seed }
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        if !(2..=4).contains(&self.player_count) {
            return Err(RuleError::Config(alloc::format!(
                "player count {} not in 2..=4",
                self.player_count
            )));
        }
        if !(4..=6).contains(&self.epidemic_count) {
            return Err(RuleError::Config(alloc::format!(
                "epidemic count {} not in 4..=6",
                self.epidemic_count
            )));
        }
        if self.roles.len() != self.player_count {
            return Err(RuleError::Config("role list length differs from player count".into()));
        }
        for (i, r) in self.roles.iter().enumerate() {
            if self.roles[..i].contains(r) {
                return Err(RuleError::Config(alloc::format!("role {r} repeated")));
            }
        }
        Ok(())
    }
}

pub(crate) fn initial_hand_size(players: usize) -> usize {
    match players {
        2 => 4,
        3 => 3,
        _ => 2,
    }
}

impl GameState {
    /// Runs the full setup: nine seeded infections (3/3/3, 2/2/2, 1/1/1 cubes
    /// in draw order), pawns and one station on the start city, initial
    /// hands, and the split-shuffle-stack player deck.
    pub fn new_game<R: Rng + ?Sized>(
        map: Arc<CityMap>,
        config: &GameConfig,
        rng: &mut R,
    ) -> Result<GameState, RuleError> {
        config.validate()?;
        let n = map.len();
        if n < 9 + initial_hand_size(config.player_count) * config.player_count {
            return Err(RuleError::Config("map too small for setup".into()));
        }

        let mut infection: Vec<CityId> = map.ids().collect();
        infection.shuffle(rng);
        let mut cubes = alloc::vec![[0u8; 4]; n];
        let mut supply = [CUBES_PER_COLOR; 4];
        let mut discard = Vec::with_capacity(9);
        for (i, count) in [3u8, 3, 3, 2, 2, 2, 1, 1, 1].into_iter().enumerate() {
            // top of the deck is the end of the vector
            let city = infection[n - 1 - i];
            let color = map.color(city).index();
            cubes[city.index()][color] = count;
            supply[color] -= count;
            discard.push(city);
        }
        infection.truncate(n - 9);
        let infection_deck = InfectionDeck::from_stacks_top_first(
            &[infection.iter().rev().copied().collect::<Vec<_>>()],
            discard,
        );

        let mut city_cards: Vec<CityId> = map.ids().collect();
        city_cards.shuffle(rng);
        let hand_size = initial_hand_size(config.player_count);
        let mut players = Vec::with_capacity(config.player_count);
        for &role in &config.roles {
            let mut hand = CardSet::EMPTY;
            for _ in 0..hand_size {
                hand.insert(city_cards.pop().expect("enough cards"));
            }
            players.push(PlayerState { role, location: map.start(), hand });
        }

        let player_deck = build_player_deck(&city_cards, config.epidemic_count as usize, rng);

        Ok(GameState {
            cubes,
            stations: CardSet::single(map.start()),
            players,
            current: 0,
            actions_remaining: ACTIONS_PER_TURN,
            cured: [false; 4],
            supply,
            outbreaks: 0,
            epidemics_drawn: 0,
            epidemic_count: config.epidemic_count,
            player_deck,
            player_discard: CardSet::EMPTY,
            infection_deck,
            ops_flight_used: false,
            phase: Phase::Actions,
            status: Status::Ongoing,
            turn: 1,
            map,
        })
    }
}

/// Splits `cards` into `epidemics` near-equal piles (larger piles on top),
/// adds one epidemic to each, shuffles each pile and stacks them.
pub(crate) fn build_player_deck<R: Rng + ?Sized>(
    cards: &[CityId],
    epidemics: usize,
    rng: &mut R,
) -> PlayerDeck {
    let base = cards.len() / epidemics;
    let extra = cards.len() % epidemics;
    let mut stacks = Vec::with_capacity(epidemics);
    let mut offset = 0;
    for i in 0..epidemics {
        let size = base + usize::from(i < extra);
        let mut stack: Vec<PlayerCard> =
            cards[offset..offset + size].iter().map(|&c| PlayerCard::City(c)).collect();
        offset += size;
        stack.push(PlayerCard::Epidemic);
        stack.shuffle(rng);
        stacks.push(stack);
    }
    PlayerDeck::from_stacks_top_first(&stacks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::GameRng;
    use rand::SeedableRng;

    fn world() -> Arc<CityMap> {
        Arc::new(CityMap::world())
    }

    #[test]
    fn four_players_four_epidemics() {
        let mut rng = GameRng::seed_from_u64(1);
        let s = GameState::new_game(world(), &GameConfig::standard(4, 4, 1), &mut rng).unwrap();
        let board: u32 = s.cubes.iter().flat_map(|c| c.iter()).map(|&n| n as u32).sum();
        assert_eq!(board, 18);
        assert_eq!(s.player_deck.len(), 44);
        assert_eq!(s.player_deck.stack_sizes_top_first(), alloc::vec![11, 11, 11, 11]);
        assert!(s.players.iter().all(|p| p.hand.len() == 2 && p.location == s.map.start()));
        assert_eq!(s.infection_deck.discard.len(), 9);
        assert_eq!(s.phase, Phase::Actions);
        assert_eq!(s.actions_remaining, 4);
        assert_eq!(s.turn_bound(), 23);
        s.check_invariants().unwrap();
    }

    #[test]
    fn two_players_six_epidemics() {
        let mut rng = GameRng::seed_from_u64(2);
        let s = GameState::new_game(world(), &GameConfig::standard(2, 6, 2), &mut rng).unwrap();
        assert!(s.players.iter().all(|p| p.hand.len() == 4));
        assert_eq!(s.player_deck.len(), 46);
        let sizes = s.player_deck.stack_sizes_top_first();
        assert_eq!(sizes.len(), 6);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for stack in s.player_deck.stacks_top_first() {
            assert_eq!(stack.iter().filter(|c| **c == PlayerCard::Epidemic).count(), 1);
        }
    }

    #[test]
    fn initial_infection_counts_follow_draw_order() {
        let mut rng = GameRng::seed_from_u64(3);
        let s = GameState::new_game(world(), &GameConfig::standard(3, 5, 3), &mut rng).unwrap();
        let counts: Vec<u8> = s
            .infection_deck
            .discard
            .iter()
            .map(|&c| s.cubes[c.index()][s.map.color(c).index()])
            .collect();
        assert_eq!(counts, [3, 3, 3, 2, 2, 2, 1, 1, 1]);
    }

    #[test]
    fn same_seed_same_state() {
        let cfg = GameConfig::standard(4, 5, 9);
        let a = GameState::new_game(world(), &cfg, &mut GameRng::seed_from_u64(9)).unwrap();
        let b = GameState::new_game(world(), &cfg, &mut GameRng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut rng = GameRng::seed_from_u64(0);
        let bad = [
            GameConfig::standard(4, 3, 0),
            GameConfig { roles: alloc::vec![Role::Medic, Role::Medic], ..GameConfig::standard(2, 4, 0) },
            GameConfig { player_count: 5, ..GameConfig::standard(4, 4, 0) },
            GameConfig { roles: alloc::vec![Role::Medic], ..GameConfig::standard(2, 4, 0) },
        ];
        for cfg in bad {
            assert!(matches!(GameState::new_game(world(), &cfg, &mut rng), Err(RuleError::Config(_))));
        }
    }
}
