use alloc::vec::Vec;

use super::{
    Action, GameState, Phase, Role, ShareKind, Status, HAND_LIMIT, MAX_STATIONS,
};
use crate::error::RuleError;
use crate::map::{CardSet, CityId, Color};

impl GameState {
    /// Every single action the current player may take right now, role
    /// modifiers included. Discards never appear here: hand overflow is
    /// resolved automatically when it happens.
    pub fn legal_actions(&self) -> Result<Vec<Action>, RuleError> {
        self.require_phase(Phase::Actions)?;
        let mut out = Vec::with_capacity(64);
        let p = self.current_player();
        let here = p.location;
        let map = &*self.map;

        for &n in map.neighbors(here) {
            out.push(Action::DriveFerry(n));
        }
        for c in p.hand.iter() {
            if c != here {
                out.push(Action::DirectFlight(c));
            }
        }
        if p.hand.contains(here) {
            for to in map.ids().filter(|&to| to != here) {
                out.push(Action::CharterFlight(to));
            }
        }
        if self.has_station(here) {
            for s in self.stations.iter().filter(|&s| s != here) {
                out.push(Action::ShuttleFlight(s));
            }
            if p.role == Role::OperationsExpert && !self.ops_flight_used {
                for card in p.hand.iter() {
                    for to in map.ids().filter(|&to| to != here) {
                        out.push(Action::OpsExpertFlight { card, to });
                    }
                }
            }
        }
        if !self.has_station(here) && (p.role == Role::OperationsExpert || p.hand.contains(here)) {
            out.push(Action::BuildStation);
        }
        for color in Color::ALL {
            if self.cubes[here.index()][color.index()] > 0 {
                out.push(Action::TreatDisease(color));
            }
        }
        for (qi, q) in self.players.iter().enumerate() {
            if qi == self.current {
                continue;
            }
            for card in p.hand.iter() {
                if self.can_give(self.current, qi, card) {
                    out.push(Action::ShareKnowledge { kind: ShareKind::Give, card, other: qi as u8 });
                }
            }
            for card in q.hand.iter() {
                if self.can_take(self.current, qi, card) {
                    out.push(Action::ShareKnowledge { kind: ShareKind::Take, card, other: qi as u8 });
                }
            }
        }
        if self.has_station(here) {
            for color in Color::ALL {
                if self.is_cured(color) {
                    continue;
                }
                let pool = p.hand.intersect(map.color_mask(color));
                let need = p.role.cure_threshold() as usize;
                if pool.len() >= need {
                    let cards: Vec<CityId> = pool.iter().collect();
                    for_each_subset(&cards, need, &mut |set| {
                        out.push(Action::CureDisease { color, cards: set });
                    });
                }
            }
        }
        out.push(Action::Wait);
        Ok(out)
    }

    /// Whether `giver` may hand `card` to `receiver` (Researcher gives at a distance).
    pub fn can_give(&self, giver: usize, receiver: usize, card: CityId) -> bool {
        let g = &self.players[giver];
        let r = &self.players[receiver];
        if giver == receiver || !g.hand.contains(card) || r.location != card {
            return false;
        }
        g.role == Role::Researcher || g.location == card
    }

    /// Whether `taker` may take `card` from `holder`; both must stand on the card's city.
    pub fn can_take(&self, taker: usize, holder: usize, card: CityId) -> bool {
        let t = &self.players[taker];
        let h = &self.players[holder];
        taker != holder && h.hand.contains(card) && t.location == card && h.location == card
    }

    pub fn is_legal(&self, action: &Action) -> bool {
        self.check_legal(action).is_ok()
    }

    fn check_legal(&self, action: &Action) -> Result<(), RuleError> {
        self.require_phase(Phase::Actions)?;
        let p = self.current_player();
        let here = p.location;
        let n = self.map.len();
        let in_range = |c: CityId| c.index() < n;
        let ok = match *action {
            Action::DriveFerry(to) => self.map.neighbors(here).contains(&to),
            Action::DirectFlight(to) => to != here && p.hand.contains(to),
            Action::CharterFlight(to) => in_range(to) && to != here && p.hand.contains(here),
            Action::ShuttleFlight(to) => {
                to != here && self.has_station(here) && self.has_station(to)
            }
            Action::OpsExpertFlight { card, to } => {
                p.role == Role::OperationsExpert
                    && !self.ops_flight_used
                    && self.has_station(here)
                    && p.hand.contains(card)
                    && in_range(to)
                    && to != here
            }
            Action::BuildStation => {
                !self.has_station(here)
                    && (p.role == Role::OperationsExpert || p.hand.contains(here))
            }
            Action::TreatDisease(color) => self.cubes[here.index()][color.index()] > 0,
            Action::ShareKnowledge { kind, card, other } => {
                let other = other as usize;
                other < self.players.len()
                    && match kind {
                        ShareKind::Give => self.can_give(self.current, other, card),
                        ShareKind::Take => self.can_take(self.current, other, card),
                    }
            }
            Action::CureDisease { color, cards } => {
                self.has_station(here)
                    && !self.is_cured(color)
                    && cards.is_subset(p.hand)
                    && cards.is_subset(self.map.color_mask(color))
                    && cards.len() == p.role.cure_threshold() as usize
            }
            Action::Wait => true,
            Action::Discard(card) => p.hand.len() > HAND_LIMIT && p.hand.contains(card),
        };
        if ok {
            Ok(())
        } else {
            Err(RuleError::IllegalAction(alloc::format!("{action:?}")))
        }
    }

    /// Applies one action of the current player. Illegal actions are rejected
    /// without modifying the state.
    pub fn apply_action(&mut self, action: Action) -> Result<(), RuleError> {
        self.check_legal(&action)?;
        let seat = self.current;
        let here = self.players[seat].location;
        match action {
            Action::DriveFerry(to) | Action::ShuttleFlight(to) => self.move_to(seat, to),
            Action::DirectFlight(to) => {
                self.spend(seat, to);
                self.move_to(seat, to);
            }
            Action::CharterFlight(to) => {
                self.spend(seat, here);
                self.move_to(seat, to);
            }
            Action::OpsExpertFlight { card, to } => {
                self.spend(seat, card);
                self.ops_flight_used = true;
                self.move_to(seat, to);
            }
            Action::BuildStation => {
                if self.players[seat].role != Role::OperationsExpert {
                    self.spend(seat, here);
                }
                if self.stations.len() >= MAX_STATIONS {
                    let victim = self.farthest_station();
                    self.stations.remove(victim);
                }
                self.stations.insert(here);
            }
            Action::TreatDisease(color) => {
                let ci = color.index();
                let slot = &mut self.cubes[here.index()][ci];
                let removed = if self.cured[ci] || self.players[seat].role == Role::Medic {
                    *slot
                } else {
                    1
                };
                *slot -= removed;
                self.supply[ci] += removed;
            }
            Action::ShareKnowledge { kind, card, other } => {
                let other = other as usize;
                let (from, to) = match kind {
                    ShareKind::Give => (seat, other),
                    ShareKind::Take => (other, seat),
                };
                self.players[from].hand.remove(card);
                self.players[to].hand.insert(card);
                self.discard_overflow(to);
            }
            Action::CureDisease { color, cards } => {
                let hand = &mut self.players[seat].hand;
                *hand = hand.minus(cards);
                self.player_discard = self.player_discard.union(cards);
                self.cured[color.index()] = true;
                for i in 0..self.players.len() {
                    if self.players[i].role == Role::Medic {
                        self.medic_sweep(i);
                    }
                }
                if self.cured_count() == 4 {
                    self.status = Status::Won;
                }
            }
            Action::Wait => {}
            Action::Discard(card) => {
                self.spend(seat, card);
                return Ok(());
            }
        }
        self.actions_remaining -= 1;
        if self.actions_remaining == 0 && !self.status.is_over() {
            self.phase = Phase::Draw;
        }
        Ok(())
    }

    fn spend(&mut self, seat: usize, card: CityId) {
        self.players[seat].hand.remove(card);
        self.player_discard.insert(card);
    }

    fn move_to(&mut self, seat: usize, to: CityId) {
        self.players[seat].location = to;
        if self.players[seat].role == Role::Medic {
            self.medic_sweep(seat);
        }
    }

    /// Removes cubes of cured colors from the Medic's city.
    fn medic_sweep(&mut self, seat: usize) {
        let city = self.players[seat].location.index();
        for ci in 0..4 {
            if self.cured[ci] && self.cubes[city][ci] > 0 {
                self.supply[ci] += self.cubes[city][ci];
                self.cubes[city][ci] = 0;
            }
        }
    }

    /// Station to relocate when all tokens are in use: the one whose nearest
    /// pawn is farthest away by drive distance; lowest id on ties.
    pub fn farthest_station(&self) -> CityId {
        let mut best: Option<(u8, CityId)> = None;
        for s in self.stations.iter() {
            let nearest = self
                .players
                .iter()
                .map(|p| self.map.drive_distance(s, p.location))
                .min()
                .unwrap_or(0);
            if best.map_or(true, |(d, _)| nearest > d) {
                best = Some((nearest, s));
            }
        }
        best.expect("at least one station").1
    }
}

/// Calls `f` for every `k`-subset of `items`, in lexicographic order.
fn for_each_subset(items: &[CityId], k: usize, f: &mut dyn FnMut(CardSet)) {
    fn rec(items: &[CityId], k: usize, start: usize, acc: CardSet, f: &mut dyn FnMut(CardSet)) {
        if acc.len() == k {
            f(acc);
            return;
        }
        let missing = k - acc.len();
        for i in start..=items.len().saturating_sub(missing) {
            if i >= items.len() {
                break;
            }
            let mut next = acc;
            next.insert(items[i]);
            rec(items, k, i + 1, next, f);
        }
    }
    rec(items, k, 0, CardSet::EMPTY, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::CityMap;
    use crate::rules::{GameConfig, PlayerDeck};
    use crate::seed::GameRng;
    use alloc::sync::Arc;
    use rand::SeedableRng;

    fn fresh(roles: &[Role]) -> GameState {
        let cfg = GameConfig {
            player_count: roles.len(),
            epidemic_count: 4,
            roles: roles.to_vec(),
            seed: 0,
        };
        GameState::new_game(Arc::new(CityMap::world()), &cfg, &mut GameRng::seed_from_u64(11)).unwrap()
    }

    /// Clears the board and hands; returned cards go back to the deck, cubes to supply.
    fn blank(mut s: GameState) -> GameState {
        for c in s.cubes.iter_mut() {
            *c = [0; 4];
        }
        s.supply = [24; 4];
        let mut pile = s.player_deck.city_cards();
        for p in s.players.iter_mut() {
            pile = pile.union(p.hand);
            p.hand = CardSet::EMPTY;
        }
        s.player_discard = s.map.all().minus(pile);
        s.player_deck = PlayerDeck::from_stacks_top_first(&[pile
            .iter()
            .map(crate::rules::PlayerCard::City)
            .chain(core::iter::repeat(crate::rules::PlayerCard::Epidemic).take(4))
            .collect()]);
        s
    }

    fn give_hand(s: &mut GameState, seat: usize, names: &[&str]) {
        for name in names {
            let c = s.map.find(name).unwrap();
            let mut stacks = s.player_deck.stacks_top_first();
            for st in stacks.iter_mut() {
                st.retain(|x| *x != crate::rules::PlayerCard::City(c));
            }
            s.player_deck = PlayerDeck::from_stacks_top_first(&stacks);
            s.player_discard.remove(c);
            s.players[seat].hand.insert(c);
        }
    }

    #[test]
    fn bare_atlanta_offers_drives_and_wait() {
        let s = blank(fresh(&[Role::Medic, Role::Scientist]));
        s.check_invariants().unwrap();
        let acts = s.legal_actions().unwrap();
        let atlanta = s.map.start();
        let mut expected: Vec<Action> =
            s.map.neighbors(atlanta).iter().map(|&c| Action::DriveFerry(c)).collect();
        expected.push(Action::Wait);
        assert_eq!(acts, expected);
    }

    #[test]
    fn scientist_cures_with_four() {
        let mut s = blank(fresh(&[Role::Scientist, Role::Medic]));
        give_hand(&mut s, 0, &["Chicago", "Paris", "London", "Madrid"]);
        let acts = s.legal_actions().unwrap();
        assert!(acts.iter().any(|a| matches!(a, Action::CureDisease { color: Color::Blue, .. })));
    }

    #[test]
    fn ops_expert_flight_reaches_every_other_city() {
        let mut s = blank(fresh(&[Role::OperationsExpert, Role::Medic]));
        give_hand(&mut s, 0, &["Lima"]);
        let n = s
            .legal_actions()
            .unwrap()
            .iter()
            .filter(|a| matches!(a, Action::OpsExpertFlight { .. }))
            .count();
        assert_eq!(n, 47);
        s.apply_action(Action::OpsExpertFlight { card: s.map.find("Lima").unwrap(), to: s.map.find("Tokyo").unwrap() })
            .unwrap();
        assert!(s.ops_flight_used);
        assert!(s.player_discard.contains(s.map.find("Lima").unwrap()));
    }

    #[test]
    fn treat_removes_one_or_all() {
        let mut s = blank(fresh(&[Role::Scientist, Role::Researcher]));
        let atl = s.map.start();
        s.cubes[atl.index()][0] = 2;
        s.supply[0] = 22;
        s.apply_action(Action::TreatDisease(Color::Blue)).unwrap();
        assert_eq!(s.cubes[atl.index()][0], 1);
        assert_eq!(s.supply[0], 23);
        s.cubes[atl.index()][0] = 2;
        s.supply[0] = 22;
        s.cured[0] = true;
        s.apply_action(Action::TreatDisease(Color::Blue)).unwrap();
        assert_eq!(s.cubes[atl.index()][0], 0);
        assert_eq!(s.supply[0], 24);
    }

    #[test]
    fn cure_with_five_discards_cards() {
        let mut s = blank(fresh(&[Role::Researcher, Role::Medic]));
        give_hand(&mut s, 0, &["Beijing", "Seoul", "Tokyo", "Osaka", "Manila"]);
        let cards = s.players[0].hand;
        s.apply_action(Action::CureDisease { color: Color::Red, cards }).unwrap();
        assert!(s.is_cured(Color::Red));
        assert!(s.players[0].hand.is_empty());
        assert_eq!(s.player_discard.intersect(cards), cards);
        s.check_invariants().unwrap();
    }

    #[test]
    fn medic_clears_cured_cubes_on_entry() {
        let mut s = blank(fresh(&[Role::Medic, Role::Scientist]));
        let chicago = s.map.find("Chicago").unwrap();
        s.cubes[chicago.index()][0] = 3;
        s.supply[0] = 21;
        s.cured[0] = true;
        s.apply_action(Action::DriveFerry(chicago)).unwrap();
        assert_eq!(s.cubes[chicago.index()][0], 0);
        assert_eq!(s.supply[0], 24);
    }

    #[test]
    fn researcher_gives_at_a_distance() {
        let mut s = blank(fresh(&[Role::Researcher, Role::Scientist]));
        let paris = s.map.find("Paris").unwrap();
        give_hand(&mut s, 0, &["Paris"]);
        s.players[1].location = paris;
        let give = Action::ShareKnowledge { kind: ShareKind::Give, card: paris, other: 1 };
        assert!(s.is_legal(&give));
        s.apply_action(give).unwrap();
        assert!(s.players[1].hand.contains(paris));
    }

    #[test]
    fn share_overflow_discards_down_to_seven() {
        let mut s = blank(fresh(&[Role::Medic, Role::Scientist]));
        let atl = s.map.start();
        give_hand(&mut s, 0, &["Atlanta"]);
        give_hand(&mut s, 1, &["Paris", "London", "Lima", "Tokyo", "Cairo", "Delhi", "Osaka"]);
        let give = Action::ShareKnowledge { kind: ShareKind::Give, card: atl, other: 1 };
        s.apply_action(give).unwrap();
        assert_eq!(s.players[1].hand.len(), 7);
        s.check_invariants().unwrap();
    }

    #[test]
    fn illegal_actions_are_rejected_untouched() {
        let mut s = blank(fresh(&[Role::Medic, Role::Scientist]));
        let before = s.clone();
        let far = s.map.find("Sydney").unwrap();
        assert!(matches!(s.apply_action(Action::DriveFerry(far)), Err(RuleError::IllegalAction(_))));
        assert!(s.apply_action(Action::BuildStation).is_err());
        assert!(s.apply_action(Action::TreatDisease(Color::Red)).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn four_actions_move_to_draw() {
        let mut s = blank(fresh(&[Role::Medic, Role::Scientist]));
        for _ in 0..4 {
            s.apply_action(Action::Wait).unwrap();
        }
        assert_eq!(s.phase, Phase::Draw);
        assert!(matches!(s.legal_actions(), Err(RuleError::Phase { .. })));
    }

    #[test]
    fn seventh_station_relocates_farthest() {
        let mut s = blank(fresh(&[Role::OperationsExpert, Role::Medic]));
        for name in ["Paris", "Tokyo", "Lima", "Cairo", "Sydney"] {
            s.stations.insert(s.map.find(name).unwrap());
        }
        let chicago = s.map.find("Chicago").unwrap();
        s.apply_action(Action::DriveFerry(chicago)).unwrap();
        s.apply_action(Action::BuildStation).unwrap();
        assert_eq!(s.station_count(), 6);
        assert!(s.has_station(chicago));
        // Medic still in Atlanta; Chicago is adjacent. The farthest station from
        // both pawns is removed.
        assert!(!s.has_station(s.map.find("Sydney").unwrap()) || !s.has_station(s.map.find("Cairo").unwrap()));
    }

    #[test]
    fn subsets_enumerate_binomial_count() {
        let items: Vec<CityId> = (0..7).map(CityId).collect();
        let mut n = 0;
        for_each_subset(&items, 5, &mut |s| {
            assert_eq!(s.len(), 5);
            n += 1;
        });
        assert_eq!(n, 21);
    }
}
