//! Decision makers that control every seat of a game, and the loop that
//! plays a game to the end with one of them.

pub mod fitness;
pub mod policy;
pub mod rhea;

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::RuleError;
use crate::hidden::execute_macro;
use crate::planner::MacroAction;
use crate::rules::{Action, ActionKind, GameState, Phase, Status, ACTIONS_PER_TURN};
use crate::seed::GameRng;

pub use fitness::{evaluate_state, BaseFitness, FitnessSpec, Wrapper};
pub use policy::{hpa_next, rpa_next};
pub use rhea::{
    evaluate_genome, mutate, mutate_traced, rhea_decide, rhea_search, seed_genome, MutationEvent,
    RheaOutcome, RheaParams,
};

/// One player turn worth of macro-actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gene {
    pub macros: Vec<MacroAction>,
}

impl Gene {
    pub fn cost(&self) -> u8 {
        self.macros.iter().map(MacroAction::cost).sum()
    }
}

/// A plan over consecutive turns; gene `i` belongs to the seat `i` places
/// after the one to move.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    pub genes: Vec<Gene>,
}

impl Genome {
    /// Checks that the first gene spends exactly the actions left in the
    /// current turn and every later gene a full turn.
    pub fn check_budgets(&self, first_budget: u8) -> Result<(), RuleError> {
        if self.genes.is_empty() {
            return Err(RuleError::Contract("genome has no genes".into()));
        }
        for (i, g) in self.genes.iter().enumerate() {
            let want = if i == 0 { first_budget } else { ACTIONS_PER_TURN };
            if g.cost() != want || g.macros.is_empty() {
                return Err(RuleError::Contract(alloc::format!(
                    "gene {i} spends {} actions, expected {want}",
                    g.cost()
                )));
            }
        }
        Ok(())
    }
}

/// Chooses the next macro-action for whoever is to move.
pub trait Agent {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError>;
}

impl<A: Agent + ?Sized> Agent for &mut A {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        (**self).decide(state)
    }
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        (**self).decide(state)
    }
}

pub struct HpaAgent {
    pub rng: GameRng,
}

impl Agent for HpaAgent {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        Ok(hpa_next(state, &mut self.rng))
    }
}

pub struct RpaAgent {
    pub rng: GameRng,
}

impl Agent for RpaAgent {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        Ok(rpa_next(state, &mut self.rng))
    }
}

pub struct RheaAgent {
    pub params: RheaParams,
    pub rng: GameRng,
}

impl Agent for RheaAgent {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        rhea_decide(state, &self.params, &mut self.rng)
    }
}

/// How a finished game went.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSummary {
    pub status: Status,
    /// Player turns started, including the one in which the game ended.
    pub turns: u32,
    /// Applied actions per [`ActionKind`], in `ActionKind::ALL` order.
    pub action_counts: [u32; 11],
    pub decisions: u32,
    pub wasted_actions: u32,
}

/// Plays `state` to the end with `agent` choosing for every seat.
/// `rng` drives the face-down reshuffles of the real game.
pub fn play_game<A: Agent + ?Sized, R: Rng + ?Sized>(
    state: &mut GameState,
    agent: &mut A,
    rng: &mut R,
) -> Result<GameSummary, RuleError> {
    let mut counts = [0u32; 11];
    let mut decisions = 0;
    let mut wasted = 0;
    let cap = state.turn_bound() + 1;
    while !state.status.is_over() {
        if state.turn > cap {
            return Err(RuleError::Contract("game exceeded its turn bound".into()));
        }
        match state.phase {
            Phase::Actions => {
                let m = agent.decide(state)?;
                decisions += 1;
                let before = state.actions_remaining;
                execute_macro(state, &m, &mut |a: &Action, w| {
                    if w {
                        wasted += 1;
                    }
                    let k = ActionKind::ALL.iter().position(|k| *k == a.kind()).expect("known kind");
                    counts[k] += 1;
                });
                if state.phase == Phase::Actions && state.actions_remaining == before {
                    // a zero-cost macro would stall the loop
                    state.apply_action(Action::Wait)?;
                    counts[9] += 1;
                    wasted += 1;
                }
            }
            _ => state.end_turn(rng)?,
        }
    }
    Ok(GameSummary {
        status: state.status,
        turns: state.turn,
        action_counts: counts,
        decisions,
        wasted_actions: wasted,
    })
}
