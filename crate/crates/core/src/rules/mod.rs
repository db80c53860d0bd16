//! Rules of the simplified Pandemic variant: setup, actions, turn loop,
//! infection mechanics and end conditions.
//!
//! [`GameState`] is a plain value. Every operation either mutates a state
//! in place (the `*_mut` style methods) or is a pure read; none share
//! interior mutability, so states can be cloned freely across threads.

mod actions;
mod deck;
mod phases;
mod setup;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use deck::{InfectionDeck, PlayerCard, PlayerDeck};
pub use phases::{infection_rate, resolve_infection, InfectionOutcome};
pub use setup::GameConfig;

use crate::error::RuleError;
use crate::map::{CardSet, CityId, CityMap, Color};

/// Hand limit enforced outside the draw step.
pub const HAND_LIMIT: usize = 7;
/// Cubes per disease color.
pub const CUBES_PER_COLOR: u8 = 24;
/// Outbreak count at which the game is lost.
pub const MAX_OUTBREAKS: u8 = 8;
/// Research station tokens.
pub const MAX_STATIONS: usize = 6;
/// Actions per player turn.
pub const ACTIONS_PER_TURN: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    OperationsExpert,
    Medic,
    Researcher,
    Scientist,
}

impl Role {
    pub const ALL: [Role; 4] =
        [Role::OperationsExpert, Role::Medic, Role::Researcher, Role::Scientist];

    /// Cards of one color needed to cure.
    #[inline]
    pub fn cure_threshold(self) -> u32 {
        match self {
            Role::Scientist => 4,
            _ => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::OperationsExpert => "OperationsExpert",
            Role::Medic => "Medic",
            Role::Researcher => "Researcher",
            Role::Scientist => "Scientist",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RuleError::Config(alloc::format!("unknown role `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Actions,
    Draw,
    Infect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LossCause {
    Outbreaks,
    Cubes,
    PlayerCards,
}

impl LossCause {
    pub fn name(self) -> &'static str {
        match self {
            LossCause::Outbreaks => "outbreaks",
            LossCause::Cubes => "cubes",
            LossCause::PlayerCards => "player-cards",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ongoing,
    Won,
    Lost(LossCause),
}

impl Status {
    #[inline]
    pub fn is_over(self) -> bool {
        !matches!(self, Status::Ongoing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShareKind {
    Give,
    Take,
}

/// A single rules-level action of the current player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    DriveFerry(CityId),
    DirectFlight(CityId),
    CharterFlight(CityId),
    ShuttleFlight(CityId),
    OpsExpertFlight { card: CityId, to: CityId },
    BuildStation,
    TreatDisease(Color),
    ShareKnowledge { kind: ShareKind, card: CityId, other: u8 },
    CureDisease { color: Color, cards: CardSet },
    Wait,
    Discard(CityId),
}

/// Coarse action categories used for usage statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    DriveFerry,
    DirectFlight,
    CharterFlight,
    ShuttleFlight,
    OpsExpertFlight,
    BuildStation,
    TreatDisease,
    ShareKnowledge,
    CureDisease,
    Wait,
    Discard,
}

impl ActionKind {
    pub const ALL: [ActionKind; 11] = [
        ActionKind::DriveFerry,
        ActionKind::DirectFlight,
        ActionKind::CharterFlight,
        ActionKind::ShuttleFlight,
        ActionKind::OpsExpertFlight,
        ActionKind::BuildStation,
        ActionKind::TreatDisease,
        ActionKind::ShareKnowledge,
        ActionKind::CureDisease,
        ActionKind::Wait,
        ActionKind::Discard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::DriveFerry => "drive_ferry",
            ActionKind::DirectFlight => "direct_flight",
            ActionKind::CharterFlight => "charter_flight",
            ActionKind::ShuttleFlight => "shuttle_flight",
            ActionKind::OpsExpertFlight => "ops_expert_flight",
            ActionKind::BuildStation => "build_station",
            ActionKind::TreatDisease => "treat_disease",
            ActionKind::ShareKnowledge => "share_knowledge",
            ActionKind::CureDisease => "cure_disease",
            ActionKind::Wait => "wait",
            ActionKind::Discard => "discard",
        }
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::DriveFerry(_) => ActionKind::DriveFerry,
            Action::DirectFlight(_) => ActionKind::DirectFlight,
            Action::CharterFlight(_) => ActionKind::CharterFlight,
            Action::ShuttleFlight(_) => ActionKind::ShuttleFlight,
            Action::OpsExpertFlight { .. } => ActionKind::OpsExpertFlight,
            Action::BuildStation => ActionKind::BuildStation,
            Action::TreatDisease(_) => ActionKind::TreatDisease,
            Action::ShareKnowledge { .. } => ActionKind::ShareKnowledge,
            Action::CureDisease { .. } => ActionKind::CureDisease,
            Action::Wait => ActionKind::Wait,
            Action::Discard(_) => ActionKind::Discard,
        }
    }

    #[inline]
    pub fn is_move(&self) -> bool {
        matches!(
            self,
            Action::DriveFerry(_)
                | Action::DirectFlight(_)
                | Action::CharterFlight(_)
                | Action::ShuttleFlight(_)
                | Action::OpsExpertFlight { .. }
        )
    }

    /// Destination of a movement action.
    pub fn destination(&self) -> Option<CityId> {
        match *self {
            Action::DriveFerry(c)
            | Action::DirectFlight(c)
            | Action::CharterFlight(c)
            | Action::ShuttleFlight(c) => Some(c),
            Action::OpsExpertFlight { to, .. } => Some(to),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlayerState {
    pub role: Role,
    pub location: CityId,
    pub hand: CardSet,
}

/// Complete game situation, observable and hidden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub map: Arc<CityMap>,
    /// Per-city cube counts indexed by [`Color::index`].
    pub cubes: Vec<[u8; 4]>,
    pub stations: CardSet,
    pub players: Vec<PlayerState>,
    pub current: usize,
    pub actions_remaining: u8,
    pub cured: [bool; 4],
    pub supply: [u8; 4],
    pub outbreaks: u8,
    pub epidemics_drawn: u8,
    pub epidemic_count: u8,
    pub player_deck: PlayerDeck,
    pub player_discard: CardSet,
    pub infection_deck: InfectionDeck,
    pub ops_flight_used: bool,
    pub phase: Phase,
    pub status: Status,
    /// 1-based index of the player turn in progress.
    pub turn: u32,
}

impl GameState {
    #[inline]
    pub fn current_player(&self) -> &PlayerState {
        &self.players[self.current]
    }

    #[inline]
    pub fn status(&self) -> Status {
        self.status
    }

    #[inline]
    pub fn is_cured(&self, color: Color) -> bool {
        self.cured[color.index()]
    }

    pub fn cured_count(&self) -> usize {
        self.cured.iter().filter(|&&c| c).count()
    }

    /// Cards drawn per infect step at the current epidemic count.
    pub fn infection_rate(&self) -> usize {
        infection_rate(self.epidemics_drawn)
    }

    #[inline]
    pub fn has_station(&self, city: CityId) -> bool {
        self.stations.contains(city)
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn cubes_on_board(&self, color: Color) -> u32 {
        self.cubes.iter().map(|c| c[color.index()] as u32).sum()
    }

    /// Upper bound on player turns: one per two-card draw, plus the failing turn.
    pub fn turn_bound(&self) -> u32 {
        let initial_deck = self.map.len() as u32 - self.initial_hand_total() + self.epidemic_count as u32;
        initial_deck / 2 + 1
    }

    fn initial_hand_total(&self) -> u32 {
        setup::initial_hand_size(self.players.len()) as u32 * self.players.len() as u32
    }

    /// Checks cube and card conservation and the range invariants.
    pub fn check_invariants(&self) -> Result<(), RuleError> {
        let err = |m: alloc::string::String| Err(RuleError::Contract(m));
        for color in Color::ALL {
            let on_board = self.cubes_on_board(color);
            if on_board + self.supply[color.index()] as u32 != CUBES_PER_COLOR as u32 {
                return err(alloc::format!(
                    "cube conservation broken for {color}: board {on_board} supply {}",
                    self.supply[color.index()]
                ));
            }
        }
        if self.cubes.iter().any(|c| c.iter().any(|&n| n > 3)) {
            return err("a city holds more than 3 cubes of a color".into());
        }
        let mut seen = CardSet::EMPTY;
        let mut total = 0usize;
        let mut add = |set: CardSet| {
            total += set.len();
            seen = seen.union(set);
        };
        for p in &self.players {
            add(p.hand);
        }
        add(self.player_discard);
        add(self.player_deck.city_cards());
        if total != self.map.len() || seen != self.map.all() {
            return err(alloc::format!("player card conservation broken: {total} cards"));
        }
        let deck_epidemics = self.player_deck.epidemics_remaining();
        if deck_epidemics + self.epidemics_drawn as usize != self.epidemic_count as usize {
            return err("epidemic count mismatch".into());
        }
        let mut inf = CardSet::EMPTY;
        let mut inf_total = 0usize;
        for &c in self.infection_deck.cards().iter().chain(self.infection_deck.discard.iter()) {
            inf.insert(c);
            inf_total += 1;
        }
        if inf_total != self.map.len() || inf != self.map.all() {
            return err(alloc::format!("infection card conservation broken: {inf_total} cards"));
        }
        if self.outbreaks > MAX_OUTBREAKS {
            return err("outbreak counter out of range".into());
        }
        if self.stations.len() > MAX_STATIONS {
            return err("too many research stations".into());
        }
        if self.actions_remaining > ACTIONS_PER_TURN {
            return err("too many actions remaining".into());
        }
        if self.phase == Phase::Actions && self.status == Status::Ongoing {
            if let Some(p) = self.players.iter().find(|p| p.hand.len() > HAND_LIMIT) {
                return err(alloc::format!("{} holds more than {HAND_LIMIT} cards", p.role));
            }
        }
        let won = self.cured_count() == 4;
        if won != (self.status == Status::Won) {
            return err("win status disagrees with cured set".into());
        }
        Ok(())
    }

    pub(crate) fn lose(&mut self, cause: LossCause) {
        if self.status == Status::Ongoing {
            self.status = Status::Lost(cause);
        }
    }

    pub(crate) fn require_phase(&self, expected: Phase) -> Result<(), RuleError> {
        if self.status.is_over() {
            return Err(RuleError::GameOver);
        }
        if self.phase != expected {
            return Err(RuleError::Phase { expected, actual: self.phase });
        }
        Ok(())
    }

    /// Index of the seat `offset` turns after the current one.
    pub fn seat_after(&self, offset: usize) -> usize {
        (self.current + offset) % self.players.len()
    }
}
