//! Human-readable JSON snapshots of complete game states, hidden decks
//! included, so a setup can be replayed exactly by any agent.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, ensure, Result};
use pandemic_core::map::{CardSet, CityId, CityMap, Color};
use pandemic_core::rules::{
    GameState, InfectionDeck, LossCause, Phase, PlayerCard, PlayerDeck, PlayerState, Role, Status,
    CUBES_PER_COLOR,
};
use serde::{Deserialize, Serialize};

pub const SNAPSHOT_VERSION: u32 = 1;
const EPIDEMIC: &str = "EPIDEMIC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSnapshot {
    pub role: String,
    pub location: String,
    pub hand: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub version: u32,
    pub map_checksum: String,
    pub players: Vec<PlayerSnapshot>,
    pub current: usize,
    pub actions_remaining: u8,
    pub phase: String,
    pub status: String,
    pub turn: u32,
    pub ops_flight_used: bool,
    pub cured: Vec<String>,
    pub outbreaks: u8,
    pub epidemic_count: u8,
    pub epidemics_drawn: u8,
    /// Non-zero cube counts by city, then color.
    pub cubes: BTreeMap<String, BTreeMap<String, u8>>,
    pub stations: Vec<String>,
    /// Sub-stacks listed top-first, each top-first.
    pub player_deck: Vec<Vec<String>>,
    pub player_discard: Vec<String>,
    /// Sub-stacks listed top-first, each top-first.
    pub infection_deck: Vec<Vec<String>>,
    /// Oldest first.
    pub infection_discard: Vec<String>,
}

fn names(map: &CityMap, set: CardSet) -> Vec<String> {
    set.iter().map(|c| map.name(c).to_string()).collect()
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Actions => "actions",
        Phase::Draw => "draw",
        Phase::Infect => "infect",
    }
}

pub fn status_name(s: Status) -> String {
    match s {
        Status::Ongoing => "ongoing".into(),
        Status::Won => "won".into(),
        Status::Lost(c) => format!("lost:{}", c.name()),
    }
}

pub fn parse_status(s: &str) -> Result<Status> {
    Ok(match s {
        "ongoing" => Status::Ongoing,
        "won" => Status::Won,
        "lost:outbreaks" => Status::Lost(LossCause::Outbreaks),
        "lost:cubes" => Status::Lost(LossCause::Cubes),
        "lost:player-cards" => Status::Lost(LossCause::PlayerCards),
        other => bail!("unknown status `{other}`"),
    })
}

impl Snapshot {
    pub fn capture(state: &GameState, map_checksum: &str) -> Snapshot {
        let map = &*state.map;
        let city = |c: CityId| map.name(c).to_string();
        let mut cubes = BTreeMap::new();
        for id in map.ids() {
            let row: BTreeMap<String, u8> = Color::ALL
                .iter()
                .filter(|c| state.cubes[id.index()][c.index()] > 0)
                .map(|c| (c.name().to_string(), state.cubes[id.index()][c.index()]))
                .collect();
            if !row.is_empty() {
                cubes.insert(city(id), row);
            }
        }
        let card_name = |c: &PlayerCard| match c {
            PlayerCard::City(id) => city(*id),
            PlayerCard::Epidemic => EPIDEMIC.to_string(),
        };
        Snapshot {
            version: SNAPSHOT_VERSION,
            map_checksum: map_checksum.to_string(),
            players: state
                .players
                .iter()
                .map(|p| PlayerSnapshot {
                    role: p.role.name().to_string(),
                    location: city(p.location),
                    hand: names(map, p.hand),
                })
                .collect(),
            current: state.current,
            actions_remaining: state.actions_remaining,
            phase: phase_name(state.phase).into(),
            status: status_name(state.status),
            turn: state.turn,
            ops_flight_used: state.ops_flight_used,
            cured: Color::ALL.iter().filter(|c| state.is_cured(**c)).map(|c| c.name().to_string()).collect(),
            outbreaks: state.outbreaks,
            epidemic_count: state.epidemic_count,
            epidemics_drawn: state.epidemics_drawn,
            cubes,
            stations: names(map, state.stations),
            player_deck: state
                .player_deck
                .stacks_top_first()
                .iter()
                .map(|st| st.iter().map(card_name).collect())
                .collect(),
            player_discard: names(map, state.player_discard),
            infection_deck: state
                .infection_deck
                .stacks_top_first()
                .iter()
                .map(|st| st.iter().map(|&c| city(c)).collect())
                .collect(),
            infection_discard: state.infection_deck.discard.iter().map(|&c| city(c)).collect(),
        }
    }

    /// Rebuilds the state on `map`, rejecting snapshots taken on another map
    /// or breaking conservation.
    pub fn restore(&self, map: Arc<CityMap>, map_checksum: &str) -> Result<GameState> {
        ensure!(self.version == SNAPSHOT_VERSION, "unsupported snapshot version {}", self.version);
        ensure!(
            self.map_checksum == map_checksum,
            "snapshot was taken on map {} but {} is loaded",
            self.map_checksum,
            map_checksum
        );
        let m = &*map;
        let city = |n: &str| m.find(n).ok_or_else(|| anyhow!("unknown city `{n}`"));
        let set = |ns: &[String]| -> Result<CardSet> { ns.iter().map(|n| city(n)).collect() };
        let color = |n: &str| n.parse::<Color>().map_err(|e| anyhow!("{e}"));

        let mut players = Vec::new();
        for p in &self.players {
            players.push(PlayerState {
                role: p.role.parse::<Role>()?,
                location: city(&p.location)?,
                hand: set(&p.hand)?,
            });
        }
        let mut cubes = vec![[0u8; 4]; m.len()];
        for (name, row) in &self.cubes {
            let id = city(name)?;
            for (cn, &n) in row {
                cubes[id.index()][color(cn)?.index()] = n;
            }
        }
        let mut supply = [CUBES_PER_COLOR; 4];
        for row in &cubes {
            for (i, &n) in row.iter().enumerate() {
                supply[i] = supply[i]
                    .checked_sub(n)
                    .ok_or_else(|| anyhow!("more than {CUBES_PER_COLOR} cubes of one color"))?;
            }
        }
        let mut cured = [false; 4];
        for c in &self.cured {
            cured[color(c)?.index()] = true;
        }
        let mut deck = Vec::new();
        for st in &self.player_deck {
            let mut stack = Vec::new();
            for n in st {
                stack.push(if n == EPIDEMIC { PlayerCard::Epidemic } else { PlayerCard::City(city(n)?) });
            }
            deck.push(stack);
        }
        let mut inf = Vec::new();
        for st in &self.infection_deck {
            inf.push(st.iter().map(|n| city(n)).collect::<Result<Vec<_>>>()?);
        }
        let discard = self.infection_discard.iter().map(|n| city(n)).collect::<Result<Vec<_>>>()?;
        let phase = match self.phase.as_str() {
            "actions" => Phase::Actions,
            "draw" => Phase::Draw,
            "infect" => Phase::Infect,
            other => bail!("unknown phase `{other}`"),
        };
        ensure!(self.current < players.len(), "current seat out of range");
        let state = GameState {
            map: map.clone(),
            cubes,
            stations: set(&self.stations)?,
            players,
            current: self.current,
            actions_remaining: self.actions_remaining,
            cured,
            supply,
            outbreaks: self.outbreaks,
            epidemics_drawn: self.epidemics_drawn,
            epidemic_count: self.epidemic_count,
            player_deck: PlayerDeck::from_stacks_top_first(&deck),
            player_discard: set(&self.player_discard)?,
            infection_deck: InfectionDeck::from_stacks_top_first(&inf, discard),
            ops_flight_used: self.ops_flight_used,
            phase,
            status: parse_status(&self.status)?,
            turn: self.turn,
        };
        state.check_invariants()?;
        Ok(state)
    }
}
