use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    GameState, LossCause, Phase, PlayerCard, ACTIONS_PER_TURN, HAND_LIMIT, MAX_OUTBREAKS,
};
use crate::error::RuleError;
use crate::map::{CardSet, CityId, CityMap, Color};
use crate::planner;

/// Infection cards drawn per infect step: 2 for 0-2 epidemics, 3 for 3-4, 4 beyond.
#[inline]
pub fn infection_rate(epidemics_drawn: u8) -> usize {
    match epidemics_drawn {
        0..=2 => 2,
        3..=4 => 3,
        _ => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfectionOutcome {
    Resolved,
    Lost(LossCause),
}

/// Places `count` cubes of `color` on `origin` and resolves the outbreak
/// chain breadth-first. A city outbreaks at most once per call; cubes that
/// would land on an already outbroken city are dropped.
pub fn resolve_infection(
    map: &CityMap,
    cubes: &mut [[u8; 4]],
    supply: &mut [u8; 4],
    outbreaks: &mut u8,
    origin: CityId,
    color: Color,
    count: u8,
) -> InfectionOutcome {
    let ci = color.index();
    let mut outbroken = CardSet::EMPTY;
    let mut queue: Vec<CityId> = Vec::with_capacity(16);
    queue.extend(core::iter::repeat(origin).take(count as usize));
    let mut head = 0;
    while head < queue.len() {
        let city = queue[head];
        head += 1;
        if outbroken.contains(city) {
            continue;
        }
        let slot = &mut cubes[city.index()][ci];
        if *slot < 3 {
            if supply[ci] == 0 {
                return InfectionOutcome::Lost(LossCause::Cubes);
            }
            *slot += 1;
            supply[ci] -= 1;
        } else {
            *outbreaks += 1;
            outbroken.insert(city);
            if *outbreaks >= MAX_OUTBREAKS {
                return InfectionOutcome::Lost(LossCause::Outbreaks);
            }
            queue.extend_from_slice(map.neighbors(city));
        }
    }
    InfectionOutcome::Resolved
}

impl GameState {
    fn infect(&mut self, city: CityId, count: u8) -> InfectionOutcome {
        let color = self.map.color(city);
        let outcome = resolve_infection(
            &self.map,
            &mut self.cubes,
            &mut self.supply,
            &mut self.outbreaks,
            city,
            color,
            count,
        );
        if let InfectionOutcome::Lost(cause) = outcome {
            self.lose(cause);
        }
        outcome
    }

    /// Moves the shuffled infection discard onto the deck as a new top sub-stack.
    fn recycle_infection_discard<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut pile = core::mem::take(&mut self.infection_deck.discard);
        pile.shuffle(rng);
        self.infection_deck.push_stack(&pile);
    }

    fn resolve_epidemic<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.epidemics_drawn += 1;
        if self.infection_deck.is_empty() {
            self.recycle_infection_discard(rng);
        }
        let Some(bottom) = self.infection_deck.draw_bottom() else {
            return;
        };
        let outcome = self.infect(bottom, 3);
        self.infection_deck.discard.push(bottom);
        if outcome == InfectionOutcome::Resolved {
            self.recycle_infection_discard(rng);
        }
    }

    /// Draw step: two player cards, epidemics resolved in draw order, then
    /// hand overflow discarded by the cure-ability metric.
    pub fn draw_phase<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), RuleError> {
        self.require_phase(Phase::Draw)?;
        if self.player_deck.len() < 2 {
            self.lose(LossCause::PlayerCards);
            return Ok(());
        }
        let drawn = [self.player_deck.draw(), self.player_deck.draw()];
        let seat = self.current;
        for card in drawn.into_iter().flatten() {
            match card {
                PlayerCard::City(c) => self.players[seat].hand.insert(c),
                PlayerCard::Epidemic => {
                    if self.status.is_over() {
                        // the game already ended; remaining epidemic is still counted as drawn
                        self.epidemics_drawn += 1;
                    } else {
                        self.resolve_epidemic(rng);
                    }
                }
            }
        }
        self.discard_overflow(seat);
        if !self.status.is_over() {
            self.phase = Phase::Infect;
        }
        Ok(())
    }

    pub(crate) fn discard_overflow(&mut self, seat: usize) {
        let excess = self.players[seat].hand.len().saturating_sub(HAND_LIMIT);
        if excess == 0 {
            return;
        }
        let chosen = planner::select_discards(self, seat, excess)
            .expect("excess never exceeds hand size");
        self.players[seat].hand = self.players[seat].hand.minus(chosen);
        self.player_discard = self.player_discard.union(chosen);
    }

    /// Infect step; on survival hands the turn to the next seat.
    pub fn infection_phase<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), RuleError> {
        self.require_phase(Phase::Infect)?;
        for _ in 0..self.infection_rate() {
            if self.infection_deck.is_empty() {
                self.recycle_infection_discard(rng);
            }
            let Some(card) = self.infection_deck.draw_top() else {
                break;
            };
            let outcome = self.infect(card, 1);
            self.infection_deck.discard.push(card);
            if outcome != InfectionOutcome::Resolved {
                return Ok(());
            }
        }
        self.current = (self.current + 1) % self.players.len();
        self.actions_remaining = ACTIONS_PER_TURN;
        self.ops_flight_used = false;
        self.phase = Phase::Actions;
        self.turn += 1;
        Ok(())
    }

    /// Runs draw and infect steps back to back.
    pub fn end_turn<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), RuleError> {
        self.draw_phase(rng)?;
        if self.status.is_over() {
            return Ok(());
        }
        self.infection_phase(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::City;
    use crate::rules::{GameConfig, InfectionDeck, PlayerDeck, Status};
    use crate::seed::GameRng;
    use alloc::sync::Arc;
    use alloc::vec;
    use rand::SeedableRng;

    fn fresh(seed: u64) -> GameState {
        let mut rng = GameRng::seed_from_u64(seed);
        GameState::new_game(Arc::new(CityMap::world()), &GameConfig::standard(4, 4, seed), &mut rng)
            .unwrap()
    }

    fn star_map() -> CityMap {
        // 0 is the hub with neighbours 1, 2, 3; 3 also touches 4
        let cities = (0..5)
            .map(|i| City { name: alloc::format!("c{i}"), color: Color::Blue })
            .collect();
        let edges = [(0, 1), (0, 2), (0, 3), (3, 4)].map(|(a, b)| (CityId(a), CityId(b)));
        CityMap::from_parts(cities, &edges, CityId(0)).unwrap()
    }

    #[test]
    fn infect_empty_city_adds_one_cube() {
        let map = star_map();
        let mut cubes = vec![[0u8; 4]; 5];
        let mut supply = [24u8; 4];
        let mut outbreaks = 0;
        let r = resolve_infection(&map, &mut cubes, &mut supply, &mut outbreaks, CityId(1), Color::Blue, 1);
        assert_eq!(r, InfectionOutcome::Resolved);
        assert_eq!(cubes[1][0], 1);
        assert_eq!(supply[0], 23);
        assert_eq!(outbreaks, 0);
    }

    #[test]
    fn chain_outbreak_skips_outbroken_cities() {
        // hub at 3, neighbours 1/2/3 at 0/1/3, city 4 at 0
        let map = star_map();
        let mut cubes = vec![[0u8; 4]; 5];
        cubes[0][0] = 3;
        cubes[2][0] = 1;
        cubes[3][0] = 3;
        let mut supply = [24 - 7u8, 24, 24, 24];
        let mut outbreaks = 0;
        let r = resolve_infection(&map, &mut cubes, &mut supply, &mut outbreaks, CityId(0), Color::Blue, 1);
        assert_eq!(r, InfectionOutcome::Resolved);
        assert_eq!(outbreaks, 2);
        let counts: Vec<u8> = cubes.iter().map(|c| c[0]).collect();
        assert_eq!(counts, [3, 1, 2, 3, 1]);
        assert_eq!(supply[0] as u32 + counts.iter().map(|&c| c as u32).sum::<u32>(), 24);
    }

    #[test]
    fn supply_underflow_loses_on_second_placement() {
        let mut s = fresh(5);
        let targets: Vec<CityId> = s
            .infection_deck
            .cards()
            .iter()
            .copied()
            .filter(|&c| s.map.color(c) == Color::Blue && s.cubes[c.index()][0] == 0)
            .take(2)
            .collect();
        assert_eq!(targets.len(), 2);
        // park supply cubes elsewhere so that exactly one blue cube is left
        let mut to_park = s.supply[0] - 1;
        for c in s.map.ids().filter(|&c| s.map.color(c) == Color::Blue && !targets.contains(&c)) {
            while to_park > 0 && s.cubes[c.index()][0] < 3 {
                s.cubes[c.index()][0] += 1;
                to_park -= 1;
            }
        }
        assert_eq!(to_park, 0);
        s.supply[0] = 1;
        let mut top_first: Vec<CityId> = targets.clone();
        top_first.extend(s.infection_deck.cards().iter().rev().filter(|c| !targets.contains(c)));
        let discard = s.infection_deck.discard.clone();
        s.infection_deck = InfectionDeck::from_stacks_top_first(&[top_first], discard);
        s.check_invariants().unwrap();
        s.phase = Phase::Infect;
        s.infection_phase(&mut GameRng::seed_from_u64(0)).unwrap();
        assert_eq!(s.status, Status::Lost(LossCause::Cubes));
        assert_eq!(s.cubes[targets[0].index()][0], 1);
        assert_eq!(s.cubes[targets[1].index()][0], 0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn deck_with_one_card_loses() {
        let mut s = fresh(6);
        let mut stacks = s.player_deck.stacks_top_first();
        let keep = stacks[0][0];
        for stack in stacks.iter_mut() {
            for card in stack.drain(..) {
                if let PlayerCard::City(c) = card {
                    s.player_discard.insert(c);
                }
            }
        }
        if let PlayerCard::City(c) = keep {
            s.player_discard.remove(c);
        }
        s.player_deck = PlayerDeck::from_stacks_top_first(&[vec![keep]]);
        s.phase = Phase::Draw;
        s.draw_phase(&mut GameRng::seed_from_u64(0)).unwrap();
        assert_eq!(s.status, Status::Lost(LossCause::PlayerCards));
    }

    #[test]
    fn third_epidemic_raises_rate_and_recycles_discard() {
        let mut s = fresh(7);
        // pretend two epidemics were already drawn
        s.epidemic_count = 6;
        s.epidemics_drawn = 2;
        let mut stacks = s.player_deck.stacks_top_first();
        let pos = stacks[0].iter().position(|c| *c == PlayerCard::Epidemic).unwrap();
        let epidemic = stacks[0].remove(pos);
        stacks[0].insert(0, epidemic);
        if stacks[0][1] == PlayerCard::Epidemic {
            unreachable!("one epidemic per sub-stack");
        }
        s.player_deck = PlayerDeck::from_stacks_top_first(&stacks);
        s.check_invariants().unwrap();
        let bottom = s.infection_deck.cards()[0];
        let before = s.infection_deck.discard.len();
        s.phase = Phase::Draw;
        s.draw_phase(&mut GameRng::seed_from_u64(1)).unwrap();
        assert_eq!(s.epidemics_drawn, 3);
        assert_eq!(s.infection_rate(), 3);
        assert_eq!(s.cubes[bottom.index()][s.map.color(bottom).index()], 3);
        assert!(s.infection_deck.discard.is_empty());
        let top = &s.infection_deck.stacks_top_first()[0];
        assert_eq!(top.len(), before + 1);
        assert!(top.contains(&bottom));
        s.check_invariants().unwrap();
    }

    #[test]
    fn epidemic_on_two_cube_city_outbreaks() {
        let mut s = fresh(8);
        let bottom = s.infection_deck.cards()[0];
        let color = s.map.color(bottom).index();
        s.cubes[bottom.index()][color] = 2;
        s.supply[color] -= 2;
        let before = s.outbreaks;
        s.resolve_epidemic(&mut GameRng::seed_from_u64(2));
        assert_eq!(s.cubes[bottom.index()][color], 3);
        assert!(s.outbreaks > before);
        for &n in s.map.neighbors(bottom) {
            assert!(s.cubes[n.index()][color] >= 1);
        }
    }

    #[test]
    fn infection_phase_advances_seat() {
        let mut s = fresh(9);
        s.phase = Phase::Infect;
        s.actions_remaining = 0;
        s.ops_flight_used = true;
        s.infection_phase(&mut GameRng::seed_from_u64(0)).unwrap();
        assert_eq!(s.current, 1);
        assert_eq!(s.actions_remaining, 4);
        assert!(!s.ops_flight_used);
        assert_eq!(s.phase, Phase::Actions);
        assert_eq!(s.turn, 2);
    }

    #[test]
    fn wrong_phase_is_an_error() {
        let mut s = fresh(10);
        assert!(matches!(
            s.draw_phase(&mut GameRng::seed_from_u64(0)),
            Err(RuleError::Phase { .. })
        ));
    }
}
