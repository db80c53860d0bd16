//! Determinized forward model: resampling the face-down decks while keeping
//! their known structure, and executing plans against one sampled future.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agents::Genome;
use crate::error::RuleError;
use crate::map::CardSet;
use crate::planner::{self, cure_cards, MacroAction};
use crate::rules::{Action, GameState, Phase, PlayerCard};

/// Reshuffles hidden deck orders in place.
///
/// Player deck: every city card still in the deck is shuffled globally and
/// dealt back into sub-stacks of the same sizes; a sub-stack that still held
/// an epidemic gets it back at a uniform position. Infection deck: each
/// sub-stack is shuffled on its own and the stacking order is kept.
pub fn determinize_in_place<R: Rng + ?Sized>(state: &mut GameState, rng: &mut R) {
    let (cards, sizes) = state.player_deck.raw_mut();
    let mut cities: alloc::vec::Vec<PlayerCard> =
        cards.iter().copied().filter(|c| *c != PlayerCard::Epidemic).collect();
    let mut epidemic_flags = alloc::vec::Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in sizes.iter() {
        let end = start + size as usize;
        epidemic_flags.push(cards[start..end].contains(&PlayerCard::Epidemic));
        start = end;
    }
    cities.shuffle(rng);
    let mut next_city = cities.into_iter();
    let mut start = 0;
    for (&size, &has_epidemic) in sizes.iter().zip(&epidemic_flags) {
        let size = size as usize;
        let stack = &mut cards[start..start + size];
        let epidemic_at = if has_epidemic { Some(rng.gen_range(0..size)) } else { None };
        for (i, slot) in stack.iter_mut().enumerate() {
            *slot = if Some(i) == epidemic_at {
                PlayerCard::Epidemic
            } else {
                next_city.next().expect("card counts preserved")
            };
        }
        start += size;
    }

    let (cards, sizes) = state.infection_deck.raw_mut();
    let mut start = 0;
    for &size in sizes.iter() {
        let end = start + size as usize;
        cards[start..end].shuffle(rng);
        start = end;
    }
}

/// A copy of `state` with resampled hidden deck orders.
pub fn determinize<R: Rng + ?Sized>(state: &GameState, rng: &mut R) -> GameState {
    let mut copy = state.clone();
    determinize_in_place(&mut copy, rng);
    copy
}

/// What happened when a macro was executed against a possibly diverged state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Execution {
    pub applied: u8,
    pub wasted: u8,
    pub rerouted: bool,
}

/// Executes a macro-action, absorbing anything the current state no longer
/// allows. The macro always consumes its planned action points (capped by the
/// turn): an unreachable or inapplicable step becomes a wasted Wait, a broken
/// movement leg is replaced by the cheapest re-route that fits in the macro's
/// remaining move points, and a cure adapts to whichever same-color cards the
/// player holds.
pub fn execute_macro(
    state: &mut GameState,
    macro_action: &MacroAction,
    on_action: &mut dyn FnMut(&Action, bool),
) -> Execution {
    let mut run = Run { report: Execution::default(), left: 0, on_action };
    if state.status.is_over() || state.phase != Phase::Actions {
        return run.report;
    }
    let seat = state.current;
    run.left = macro_action.cost().min(state.actions_remaining);
    let reserved = match macro_action.terminal {
        Some(Action::CureDisease { cards, .. }) => cards,
        Some(Action::BuildStation) => CardSet::single(macro_action.plan.destination),
        Some(Action::ShareKnowledge { card, .. }) => CardSet::single(card),
        _ => CardSet::EMPTY,
    };

    let steps = &macro_action.plan.steps;
    let mut move_points = (steps.len() as u8).min(run.left);
    let mut i = 0;
    while move_points > 0 {
        if run.try_apply(state, steps[i]) {
            i += 1;
            move_points -= 1;
            continue;
        }
        let dest = macro_action.plan.destination;
        let Some(plan) = planner::plan_to(state, seat, dest, move_points, reserved) else {
            // destination unreachable: the rest of the macro is lost
            let all = run.left;
            run.burn(state, all);
            return run.report;
        };
        run.report.rerouted = true;
        for a in plan.steps {
            if !run.try_apply(state, a) {
                break;
            }
            move_points -= 1;
        }
        run.burn(state, move_points);
        move_points = 0;
    }

    if let Some(terminal) = macro_action.terminal {
        if run.left > 0 && run.active(state) {
            let adapted = match terminal {
                Action::CureDisease { color, .. } if !state.is_legal(&terminal) => {
                    cure_cards(state, seat, color)
                        .map(|cards| Action::CureDisease { color, cards })
                        .unwrap_or(terminal)
                }
                other => other,
            };
            if !run.try_apply(state, adapted) {
                run.burn(state, 1);
            }
        }
    }
    for _ in 0..macro_action.waits {
        if run.left == 0 || !run.active(state) {
            break;
        }
        run.try_apply(state, Action::Wait);
    }
    let rest = run.left;
    run.burn(state, rest);
    run.report
}

struct Run<'a> {
    report: Execution,
    left: u8,
    on_action: &'a mut dyn FnMut(&Action, bool),
}

impl Run<'_> {
    fn active(&self, state: &GameState) -> bool {
        !state.status.is_over() && state.phase == Phase::Actions
    }

    fn try_apply(&mut self, state: &mut GameState, action: Action) -> bool {
        if self.left == 0 || state.apply_action(action).is_err() {
            return false;
        }
        self.left -= 1;
        self.report.applied += 1;
        (self.on_action)(&action, false);
        true
    }

    /// Spends `n` points as wasted waits.
    fn burn(&mut self, state: &mut GameState, n: u8) {
        for _ in 0..n {
            if self.left == 0 || !self.active(state) {
                return;
            }
            state.apply_action(Action::Wait).expect("wait is always legal");
            self.left -= 1;
            self.report.wasted += 1;
            (self.on_action)(&Action::Wait, true);
        }
    }
}

/// Plays `genome` forward on one determinization of `state`: each gene is
/// one player turn followed by the draw and infect steps. Stops early when
/// the game ends and returns the final state.
pub fn rollout<R: Rng + ?Sized>(
    state: &GameState,
    genome: &Genome,
    rng: &mut R,
) -> Result<GameState, RuleError> {
    if state.status.is_over() {
        return Ok(state.clone());
    }
    if state.phase != Phase::Actions {
        return Err(RuleError::Phase { expected: Phase::Actions, actual: state.phase });
    }
    genome.check_budgets(state.actions_remaining)?;
    let mut sim = determinize(state, rng);
    play_genes(&mut sim, genome.genes.iter().map(|g| g.macros.as_slice()), rng);
    Ok(sim)
}

/// Executes whole turns from `genes` on `sim` (already determinized).
pub(crate) fn play_genes<'a, R: Rng + ?Sized>(
    sim: &mut GameState,
    genes: impl Iterator<Item = &'a [MacroAction]>,
    rng: &mut R,
) {
    for gene in genes {
        if sim.status.is_over() {
            return;
        }
        play_turn_actions(sim, gene);
        if sim.status.is_over() {
            return;
        }
        sim.end_turn(rng).expect("turn ends in draw phase");
    }
}

/// Executes one gene's macros and pads any leftover actions with waits.
pub(crate) fn play_turn_actions(sim: &mut GameState, macros: &[MacroAction]) {
    for m in macros {
        if sim.status.is_over() || sim.phase != Phase::Actions {
            break;
        }
        execute_macro(sim, m, &mut |_, _| {});
    }
    while sim.phase == Phase::Actions && !sim.status.is_over() {
        sim.apply_action(Action::Wait).expect("wait is always legal");
    }
}
