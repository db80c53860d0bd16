//! Macro-action composition: shortest movement plans, the cure-ability card
//! metric, and the five macro families (treat, cure, build, share, walk away).

use alloc::vec::Vec;

use crate::error::RuleError;
use crate::map::{CardSet, CityId, Color};
use crate::rules::{Action, GameState, Role, ShareKind};

/// Cure-ability values are exact multiples of 1/20 (thresholds are 4 or 5).
const UNITS: u32 = 20;

#[inline]
fn units(cards: u32, threshold: u32) -> u32 {
    if cards >= threshold {
        UNITS
    } else {
        cards * UNITS / threshold
    }
}

/// Per-color cure ability across the team and per player.
#[derive(Debug, Clone, PartialEq)]
pub struct CureAbility {
    pub team: [f64; 4],
    pub per_player: Vec<[f64; 4]>,
}

impl CureAbility {
    pub fn total(&self) -> f64 {
        self.team.iter().sum()
    }
}

/// Team ability for one color, in 1/20 units, with `hands` standing in for
/// the players' hands.
fn team_units(state: &GameState, hands: &[CardSet], color: Color) -> u32 {
    if state.is_cured(color) {
        return UNITS;
    }
    state
        .players
        .iter()
        .zip(hands)
        .map(|(p, &h)| units(state.map.count_color(h, color), p.role.cure_threshold()))
        .max()
        .unwrap_or(0)
}

fn hands_of(state: &GameState) -> Vec<CardSet> {
    state.players.iter().map(|p| p.hand).collect()
}

/// Per-color team ability and per-player ability for the current hands.
pub fn cure_ability(state: &GameState) -> CureAbility {
    let mut per_player = Vec::with_capacity(state.players.len());
    for p in &state.players {
        let mut row = [0.0; 4];
        for color in Color::ALL {
            let u = units(state.map.count_color(p.hand, color), p.role.cure_threshold());
            row[color.index()] = u as f64 / UNITS as f64;
        }
        per_player.push(row);
    }
    let hands = hands_of(state);
    let mut team = [0.0; 4];
    for color in Color::ALL {
        team[color.index()] = team_units(state, &hands, color) as f64 / UNITS as f64;
    }
    CureAbility { team, per_player }
}

/// Team ability summed over colors, in 1/20 units.
fn total_units(state: &GameState, hands: &[CardSet]) -> u32 {
    Color::ALL.iter().map(|&c| team_units(state, hands, c)).sum()
}

/// How many cards of each color `seat` can give up without lowering the
/// team's ability for that color.
pub fn removable_counts(state: &GameState, seat: usize) -> [u32; 4] {
    let mut out = [0u32; 4];
    let hands = hands_of(state);
    let p = &state.players[seat];
    for color in Color::ALL {
        let held = state.map.count_color(p.hand, color);
        if state.is_cured(color) {
            out[color.index()] = held;
            continue;
        }
        let before = team_units(state, &hands, color);
        let others = state
            .players
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != seat)
            .map(|(_, q)| units(state.map.count_color(q.hand, color), q.role.cure_threshold()))
            .max()
            .unwrap_or(0);
        let mut k = 0;
        while k < held && others.max(units(held - k - 1, p.role.cure_threshold())) == before {
            k += 1;
        }
        out[color.index()] = k;
    }
    out
}

/// Cards `seat` may spend on flights: those whose color still has spare
/// copies under [`removable_counts`].
pub fn spendable_cards(state: &GameState, seat: usize) -> CardSet {
    let removable = removable_counts(state, seat);
    let hand = state.players[seat].hand;
    let mut out = CardSet::EMPTY;
    for color in Color::ALL {
        if removable[color.index()] > 0 {
            out = out.union(hand.intersect(state.map.color_mask(color)));
        }
    }
    out
}

/// A shortest movement sequence from a player's position to `destination`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MovePlan {
    pub destination: CityId,
    pub steps: Vec<Action>,
    pub cards_spent: CardSet,
}

impl MovePlan {
    pub fn stay(city: CityId) -> MovePlan {
        MovePlan { destination: city, steps: Vec::new(), cards_spent: CardSet::EMPTY }
    }

    #[inline]
    pub fn cost(&self) -> u8 {
        self.steps.len() as u8
    }
}

#[derive(Debug, Clone, Copy)]
struct SearchOptions {
    /// Stop expanding past this many moves.
    limit: u8,
    /// Cards that must not be spent.
    reserved: CardSet,
    /// Ignore the cure-ability restriction (walk-away plans).
    any_cards: bool,
}

const UNSEEN: u8 = u8::MAX;

/// Breadth-first search over (city, spent cards, ops flight used).
struct MoveSearch {
    n_cities: usize,
    cards: Vec<CityId>,
    card_colors: Vec<usize>,
    removable: [u32; 4],
    dist: Vec<u8>,
    parent: Vec<(u32, Action)>,
    /// Best state per city: (cost, cards spent, discovery order, state id).
    best: Vec<Option<(u8, u8, u32, u32)>>,
}

impl MoveSearch {
    fn run(state: &GameState, seat: usize, opts: SearchOptions) -> MoveSearch {
        let map = &*state.map;
        let p = &state.players[seat];
        let (pool, removable) = if opts.any_cards {
            (p.hand, [u32::MAX; 4])
        } else {
            (spendable_cards(state, seat), removable_counts(state, seat))
        };
        let pool = pool.minus(opts.reserved);
        let cards: Vec<CityId> = pool.iter().collect();
        let card_colors: Vec<usize> = cards.iter().map(|&c| map.color(c).index()).collect();
        let k = cards.len();
        let n = map.len();
        let masks = 1usize << k;
        let total = n * masks * 2;
        let mut search = MoveSearch {
            n_cities: n,
            cards,
            card_colors,
            removable,
            dist: alloc::vec![UNSEEN; total],
            parent: alloc::vec![(u32::MAX, Action::Wait); total],
            best: alloc::vec![None; n],
        };
        let ops_available = p.role == Role::OperationsExpert
            && !(seat == state.current && state.ops_flight_used);
        let start = search.id(p.location.index(), 0, false);
        search.dist[start] = 0;
        let mut queue: Vec<u32> = Vec::with_capacity(256);
        queue.push(start as u32);
        let mut head = 0;
        while head < queue.len() {
            let sid = queue[head] as usize;
            let order = head as u32;
            head += 1;
            let (city, mask, ops) = search.decode(sid);
            let d = search.dist[sid];
            let spent = mask.count_ones() as u8;
            let entry = &mut search.best[city];
            if entry.map_or(true, |(bd, bc, _, _)| (d, spent) < (bd, bc)) {
                *entry = Some((d, spent, order, sid as u32));
            }
            if d >= opts.limit {
                continue;
            }
            let here = CityId(city as u8);
            let mut push = |search: &mut MoveSearch, to: usize, mask: usize, ops: bool, a: Action| {
                let nid = search.id(to, mask, ops);
                if search.dist[nid] == UNSEEN {
                    search.dist[nid] = d + 1;
                    search.parent[nid] = (sid as u32, a);
                    queue.push(nid as u32);
                }
            };
            for &nb in map.neighbors(here) {
                push(&mut search, nb.index(), mask, ops, Action::DriveFerry(nb));
            }
            let at_station = state.has_station(here);
            if at_station {
                for s in state.stations.iter() {
                    if s != here {
                        push(&mut search, s.index(), mask, ops, Action::ShuttleFlight(s));
                    }
                }
            }
            for i in 0..k {
                if mask & (1 << i) != 0 || !search.may_spend(mask, i) {
                    continue;
                }
                let card = search.cards[i];
                let next = mask | (1 << i);
                if card != here {
                    push(&mut search, card.index(), next, ops, Action::DirectFlight(card));
                } else {
                    for to in 0..n {
                        if to != city {
                            push(&mut search, to, next, ops, Action::CharterFlight(CityId(to as u8)));
                        }
                    }
                }
                if ops_available && !ops && at_station {
                    for to in 0..n {
                        if to != city {
                            let a = Action::OpsExpertFlight { card, to: CityId(to as u8) };
                            push(&mut search, to, next, true, a);
                        }
                    }
                }
            }
        }
        search
    }

    #[inline]
    fn id(&self, city: usize, mask: usize, ops: bool) -> usize {
        ((city << self.cards.len()) | mask) * 2 + ops as usize
    }

    #[inline]
    fn decode(&self, id: usize) -> (usize, usize, bool) {
        let ops = id & 1 == 1;
        let rest = id >> 1;
        let mask = rest & ((1 << self.cards.len()) - 1);
        (rest >> self.cards.len(), mask, ops)
    }

    fn may_spend(&self, mask: usize, i: usize) -> bool {
        let color = self.card_colors[i];
        let already = (0..self.cards.len())
            .filter(|&j| mask & (1 << j) != 0 && self.card_colors[j] == color)
            .count() as u32;
        already < self.removable[color]
    }

    fn cost(&self, city: CityId) -> Option<u8> {
        self.best[city.index()].map(|(d, _, _, _)| d)
    }

    fn plan(&self, city: CityId) -> Option<MovePlan> {
        let (_, _, _, sid) = self.best[city.index()]?;
        let mut steps = Vec::new();
        let mut spent = CardSet::EMPTY;
        let mut cur = sid as usize;
        while self.parent[cur].0 != u32::MAX {
            let (prev, action) = self.parent[cur];
            steps.push(action);
            cur = prev as usize;
        }
        steps.reverse();
        let (_, mask, _) = self.decode(sid as usize);
        for (i, &c) in self.cards.iter().enumerate() {
            if mask & (1 << i) != 0 {
                spent.insert(c);
            }
        }
        Some(MovePlan { destination: city, steps, cards_spent: spent })
    }

    fn cities(&self) -> impl Iterator<Item = CityId> + '_ {
        (0..self.n_cities).map(|i| CityId(i as u8))
    }
}

/// Minimum-cost plan to every city for `seat`, using drive/ferry, shuttle
/// flights, and direct/charter/operations flights that spend only cards the
/// team can spare. Ties go to fewer cards spent, then to the plan found
/// first by a search that expands destinations in ascending city id.
pub fn movement_costs(state: &GameState, seat: usize) -> Vec<MovePlan> {
    let search = MoveSearch::run(
        state,
        seat,
        SearchOptions { limit: u8::MAX - 1, reserved: CardSet::EMPTY, any_cards: false },
    );
    search.cities().map(|c| search.plan(c).expect("map is connected")).collect()
}

/// Cheapest permitted plan to one city within `limit` moves.
pub fn plan_to(state: &GameState, seat: usize, to: CityId, limit: u8, reserved: CardSet) -> Option<MovePlan> {
    let search =
        MoveSearch::run(state, seat, SearchOptions { limit, reserved, any_cards: false });
    search.plan(to)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShareMode {
    Give,
    Take,
    Wait,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MacroFamily {
    /// Treat at a city holding `cubes` cubes of the treated color.
    Treat { cubes: u8 },
    Cure,
    Build,
    Share(ShareMode),
    WalkAway,
    /// Padding for turns with nothing planned.
    Pass,
}

/// Movement prefix plus one purposeful action (or waits), sized to the turn.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroAction {
    pub family: MacroFamily,
    pub plan: MovePlan,
    pub terminal: Option<Action>,
    pub waits: u8,
}

impl MacroAction {
    pub fn pass(location: CityId, actions: u8) -> MacroAction {
        MacroAction {
            family: MacroFamily::Pass,
            plan: MovePlan::stay(location),
            terminal: None,
            waits: actions,
        }
    }

    #[inline]
    pub fn cost(&self) -> u8 {
        self.plan.cost() + self.terminal.is_some() as u8 + self.waits
    }

    /// The rules-level actions in execution order.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.plan
            .steps
            .iter()
            .copied()
            .chain(self.terminal)
            .chain(core::iter::repeat(Action::Wait).take(self.waits as usize))
    }

    pub fn is_share_exchange(&self) -> bool {
        matches!(self.family, MacroFamily::Share(ShareMode::Give | ShareMode::Take))
    }
}

/// Whether moving `card` from `from` to `to` strictly raises the team's
/// ability for the card's color.
fn exchange_helps(state: &GameState, from: usize, to: usize, card: CityId) -> bool {
    let color = state.map.color(card);
    if state.is_cured(color) {
        return false;
    }
    let mut hands = hands_of(state);
    let before = team_units(state, &hands, color);
    hands[from].remove(card);
    hands[to].insert(card);
    team_units(state, &hands, color) > before
}

/// Cards `seat` would discard to cure `color`: the lowest ids of that color.
pub fn cure_cards(state: &GameState, seat: usize, color: Color) -> Option<CardSet> {
    let p = &state.players[seat];
    let need = p.role.cure_threshold() as usize;
    let pool = p.hand.intersect(state.map.color_mask(color));
    if state.is_cured(color) || pool.len() < need {
        return None;
    }
    Some(pool.iter().take(need).collect())
}

/// All macro-actions for `seat` that fit in `budget` actions.
pub fn generate_macros(state: &GameState, seat: usize, budget: u8) -> Vec<MacroAction> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    let p = &state.players[seat];
    let here = p.location;
    let map = &*state.map;
    let base = MoveSearch::run(
        state,
        seat,
        SearchOptions { limit: budget, reserved: CardSet::EMPTY, any_cards: false },
    );
    let reach = |to: CityId, limit: u8, reserved: CardSet| -> Option<MovePlan> {
        let plan = base.plan(to)?;
        if plan.cost() > limit {
            return None;
        }
        if plan.cards_spent.intersect(reserved).is_empty() {
            return Some(plan);
        }
        plan_to(state, seat, to, limit, reserved)
    };

    // treat
    for city in map.ids() {
        let cubes = state.cubes[city.index()];
        if cubes == [0; 4] {
            continue;
        }
        let Some(cost) = base.cost(city) else { continue };
        if cost + 1 > budget {
            continue;
        }
        let plan = base.plan(city).expect("cost known");
        for color in Color::ALL {
            let n = cubes[color.index()];
            if n == 0 || (p.role == Role::Medic && state.is_cured(color) && city != here) {
                continue;
            }
            out.push(MacroAction {
                family: MacroFamily::Treat { cubes: n },
                plan: plan.clone(),
                terminal: Some(Action::TreatDisease(color)),
                waits: 0,
            });
        }
    }

    // cure: nearest station, lowest id on ties
    for color in Color::ALL {
        let Some(cards) = cure_cards(state, seat, color) else { continue };
        let search = MoveSearch::run(
            state,
            seat,
            SearchOptions { limit: budget - 1, reserved: cards, any_cards: false },
        );
        let nearest = state
            .stations
            .iter()
            .filter_map(|s| search.cost(s).map(|c| (c, s)))
            .min();
        if let Some((_, station)) = nearest {
            out.push(MacroAction {
                family: MacroFamily::Cure,
                plan: search.plan(station).expect("reachable"),
                terminal: Some(Action::CureDisease { color, cards }),
                waits: 0,
            });
        }
    }

    // build
    let candidates = if p.role == Role::OperationsExpert {
        map.all().minus(state.stations)
    } else {
        p.hand.minus(state.stations)
    };
    for city in candidates.iter() {
        let reserved = if p.role == Role::OperationsExpert { CardSet::EMPTY } else { CardSet::single(city) };
        if let Some(plan) = reach(city, budget - 1, reserved) {
            out.push(MacroAction {
                family: MacroFamily::Build,
                plan,
                terminal: Some(Action::BuildStation),
                waits: 0,
            });
        }
    }

    // share
    for (qi, q) in state.players.iter().enumerate() {
        if qi == seat {
            continue;
        }
        for card in p.hand.iter() {
            if !exchange_helps(state, seat, qi, card) {
                continue;
            }
            let give = Action::ShareKnowledge { kind: ShareKind::Give, card, other: qi as u8 };
            if p.role == Role::Researcher {
                if q.location == card {
                    out.push(MacroAction {
                        family: MacroFamily::Share(ShareMode::Give),
                        plan: MovePlan::stay(here),
                        terminal: Some(give),
                        waits: 0,
                    });
                }
                continue;
            }
            let reserved = CardSet::single(card);
            if q.location == card {
                if let Some(plan) = reach(card, budget - 1, reserved) {
                    out.push(MacroAction {
                        family: MacroFamily::Share(ShareMode::Give),
                        plan,
                        terminal: Some(give),
                        waits: 0,
                    });
                }
            } else if let Some(plan) = reach(card, budget, reserved) {
                let waits = budget - plan.cost();
                out.push(MacroAction { family: MacroFamily::Share(ShareMode::Wait), plan, terminal: None, waits });
            }
        }
        for card in q.hand.iter() {
            if !exchange_helps(state, qi, seat, card) {
                continue;
            }
            let take = Action::ShareKnowledge { kind: ShareKind::Take, card, other: qi as u8 };
            if q.location == card {
                if let Some(plan) = reach(card, budget - 1, CardSet::EMPTY) {
                    out.push(MacroAction {
                        family: MacroFamily::Share(ShareMode::Take),
                        plan,
                        terminal: Some(take),
                        waits: 0,
                    });
                }
            } else if let Some(plan) = reach(card, budget, CardSet::EMPTY) {
                let waits = budget - plan.cost();
                out.push(MacroAction { family: MacroFamily::Share(ShareMode::Wait), plan, terminal: None, waits });
            }
        }
    }

    out.extend(walk_away_macros(state, seat, budget));

    let mut unique: Vec<MacroAction> = Vec::with_capacity(out.len());
    for m in out {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    unique
}

/// Pure movement using the whole budget, cards spent freely. Targets are the
/// cities whose shortest plan costs exactly `budget`; when every city is
/// closer than that, the farthest ones are used and the rest padded with waits.
pub fn walk_away_macros(state: &GameState, seat: usize, budget: u8) -> Vec<MacroAction> {
    let search = MoveSearch::run(
        state,
        seat,
        SearchOptions { limit: budget, reserved: CardSet::EMPTY, any_cards: true },
    );
    let here = state.players[seat].location;
    let farthest = search
        .cities()
        .filter(|&c| c != here)
        .filter_map(|c| search.cost(c))
        .max()
        .unwrap_or(0);
    if farthest == 0 {
        return alloc::vec![MacroAction::pass(here, budget)];
    }
    search
        .cities()
        .filter(|&c| c != here && search.cost(c) == Some(farthest))
        .map(|c| MacroAction {
            family: MacroFamily::WalkAway,
            plan: search.plan(c).expect("reached"),
            terminal: None,
            waits: budget - farthest,
        })
        .collect()
}

/// The `count` cards of `seat` whose removal costs the least total cure
/// ability; ties go to the color held most, then to card name.
pub fn select_discards(state: &GameState, seat: usize, count: usize) -> Result<CardSet, RuleError> {
    let hand = state.players[seat].hand;
    if count > hand.len() {
        return Err(RuleError::Contract(alloc::format!(
            "cannot discard {count} from a hand of {}",
            hand.len()
        )));
    }
    if count == 0 {
        return Ok(CardSet::EMPTY);
    }
    let map = &*state.map;
    let cards: Vec<CityId> = hand.iter().collect();
    let mut hands = hands_of(state);
    // per-card tie key: more copies of the color first, then name
    let key = |c: CityId| (core::cmp::Reverse(map.count_color(hand, map.color(c))), map.name(c));
    let mut best: Option<(u32, Vec<(core::cmp::Reverse<u32>, &str)>, CardSet)> = None;
    let mut idx: Vec<usize> = (0..count).collect();
    loop {
        let set: CardSet = idx.iter().map(|&i| cards[i]).collect();
        hands[seat] = hand.minus(set);
        let value = total_units(state, &hands);
        let mut keys: Vec<_> = set.iter().map(key).collect();
        keys.sort();
        let better = match &best {
            None => true,
            Some((bv, bk, _)) => value > *bv || (value == *bv && keys < *bk),
        };
        if better {
            best = Some((value, keys, set));
        }
        // next combination
        let mut i = count;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one subset").2);
            }
            i -= 1;
            if idx[i] < cards.len() - count + i {
                idx[i] += 1;
                for j in i + 1..count {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
