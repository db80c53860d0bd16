//! The 1+1 rolling horizon evolutionary agent.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::fitness::{evaluate_state, FitnessSpec};
use super::policy::{hpa_next, rpa_next};
use super::{Gene, Genome};
use crate::error::RuleError;
use crate::hidden::{determinize, execute_macro, play_genes, rollout};
use crate::planner::MacroAction;
use crate::rules::{GameState, Phase, ACTIONS_PER_TURN};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RheaParams {
    /// Look-ahead in player turns.
    pub horizon: usize,
    pub generations: usize,
    /// Rollouts averaged per evaluation.
    pub repetitions: usize,
    pub mutation_start: f64,
    pub mutation_end: f64,
    pub fitness: FitnessSpec,
    pub seed: u64,
}

impl RheaParams {
    /// Horizon 3, 100 generations, 10 rollouts, mutation 100% down to 50%.
    pub fn tuned(seed: u64) -> RheaParams {
        RheaParams {
            horizon: 3,
            generations: 100,
            repetitions: 10,
            mutation_start: 1.0,
            mutation_end: 0.5,
            fitness: FitnessSpec::tuned(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        let bad = |m: &str| Err(RuleError::Config(m.into()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        for r in [self.mutation_start, self.mutation_end] {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation rates must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// Mutation rate at generation `gen`, moving linearly from start to end.
    pub fn mutation_rate(&self, gen: usize) -> f64 {
        if self.generations <= 1 {
            return self.mutation_start;
        }
        let t = gen as f64 / (self.generations - 1) as f64;
        self.mutation_start + (self.mutation_end - self.mutation_start) * t
    }
}

/// Plays macros chosen by `choose` on `sim` until the turn is spent, and
/// returns them. If the game ends first the remainder becomes one pass.
fn fill_turn<R: Rng + ?Sized>(
    sim: &mut GameState,
    mut left: u8,
    rng: &mut R,
    mut choose: impl FnMut(&GameState, &mut R) -> MacroAction,
) -> Vec<MacroAction> {
    let mut out = Vec::new();
    while left > 0 {
        if sim.status.is_over() || sim.phase != Phase::Actions {
            let here = sim.players[sim.current].location;
            out.push(MacroAction::pass(here, left));
            break;
        }
        let m = choose(sim, rng);
        let cost = m.cost().min(left);
        execute_macro(sim, &m, &mut |_, _| {});
        left -= cost;
        out.push(m);
    }
    out
}

fn finish_turn<R: Rng + ?Sized>(sim: &mut GameState, rng: &mut R) {
    if !sim.status.is_over() {
        sim.end_turn(rng).expect("macros spend the whole turn");
    }
}

fn gene_budget(state: &GameState, index: usize) -> u8 {
    if index == 0 {
        state.actions_remaining
    } else {
        ACTIONS_PER_TURN
    }
}

/// A genome built by the hierarchical policy on one determinization,
/// `horizon` turns deep.
pub fn seed_genome<R: Rng + ?Sized>(state: &GameState, horizon: usize, rng: &mut R) -> Genome {
    let mut sim = determinize(state, rng);
    let mut genes = Vec::with_capacity(horizon);
    for i in 0..horizon {
        let macros = fill_turn(&mut sim, gene_budget(state, i), rng, |s, r| hpa_next(s, r));
        genes.push(Gene { macros });
        finish_turn(&mut sim, rng);
    }
    Genome { genes }
}

/// Destruction points chosen by one mutation: (gene, macro index).
pub type MutationEvent = (usize, usize);

/// Partial destruction and stochastic repair. Each gene is hit with
/// probability `rate` (one uniform gene if none is); a hit gene loses a
/// uniformly chosen macro and everything after it, and is refilled on a
/// fresh determinization by one random-order macro followed by the
/// hierarchical policy.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, state: &GameState, rate: f64, rng: &mut R) -> Genome {
    mutate_traced(genome, state, rate, rng).0
}

pub fn mutate_traced<R: Rng + ?Sized>(
    genome: &Genome,
    state: &GameState,
    rate: f64,
    rng: &mut R,
) -> (Genome, Vec<MutationEvent>) {
    let h = genome.genes.len();
    let mut hit: Vec<bool> = (0..h).map(|_| rng.gen_bool(rate)).collect();
    if !hit.contains(&true) && h > 0 {
        hit[rng.gen_range(0..h)] = true;
    }
    let mut out = genome.clone();
    let mut events = Vec::new();
    for g in (0..h).filter(|&g| hit[g]) {
        let cut = rng.gen_range(0..out.genes[g].macros.len());
        events.push((g, cut));
        out.genes[g].macros.truncate(cut);

        let mut sim = determinize(state, rng);
        play_genes(&mut sim, out.genes[..g].iter().map(|x| x.macros.as_slice()), rng);
        let budget = gene_budget(state, g);
        let mut left = budget;
        for m in &out.genes[g].macros {
            if !sim.status.is_over() {
                execute_macro(&mut sim, m, &mut |_, _| {});
            }
            left -= m.cost();
        }
        let mut first = true;
        let repaired = fill_turn(&mut sim, left, rng, |s, r| {
            if core::mem::take(&mut first) {
                rpa_next(s, r)
            } else {
                hpa_next(s, r)
            }
        });
        out.genes[g].macros.extend(repaired);
    }
    (out, events)
}

/// Mean fitness over `repetitions` rollouts, each on its own determinization.
pub fn evaluate_genome<R: Rng + ?Sized>(
    state: &GameState,
    genome: &Genome,
    spec: &FitnessSpec,
    repetitions: usize,
    rng: &mut R,
) -> Result<f64, RuleError> {
    let mut total = 0.0;
    for _ in 0..repetitions {
        let end = rollout(state, genome, rng)?;
        total += evaluate_state(&end, spec);
    }
    Ok(total / repetitions.max(1) as f64)
}

/// Result of one decision with its search history.
#[derive(Debug, Clone)]
pub struct RheaOutcome {
    pub choice: MacroAction,
    pub incumbent: Genome,
    /// Incumbent fitness after seeding and after each generation.
    pub incumbent_fitness: Vec<f64>,
    pub offspring_accepted: usize,
}

/// Runs the evolutionary search from `state` and reports its history.
pub fn rhea_search<R: RngCore + ?Sized>(
    state: &GameState,
    params: &RheaParams,
    rng: &mut R,
) -> Result<RheaOutcome, RuleError> {
    params.validate()?;
    if state.status.is_over() {
        return Err(RuleError::GameOver);
    }
    if state.phase != Phase::Actions {
        return Err(RuleError::Phase { expected: Phase::Actions, actual: state.phase });
    }
    let decision = rng.next_u64();
    let mut seed_rng = seed::stream(&[decision, 0]);
    let mut incumbent = seed_genome(state, params.horizon, &mut seed_rng);
    let mut best = evaluate_genome(
        state,
        &incumbent,
        &params.fitness,
        params.repetitions,
        &mut seed::stream(&[decision, 1]),
    )?;
    let mut history = Vec::with_capacity(params.generations + 1);
    history.push(best);
    let mut accepted = 0;
    for gen in 0..params.generations {
        let tag = gen as u64 + 2;
        let rate = params.mutation_rate(gen);
        let child = mutate(&incumbent, state, rate, &mut seed::stream(&[decision, tag, 0]));
        let f = evaluate_genome(
            state,
            &child,
            &params.fitness,
            params.repetitions,
            &mut seed::stream(&[decision, tag, 1]),
        )?;
        if f >= best {
            incumbent = child;
            best = f;
            accepted += 1;
        }
        history.push(best);
    }
    let choice = incumbent.genes[0].macros[0].clone();
    Ok(RheaOutcome { choice, incumbent, incumbent_fitness: history, offspring_accepted: accepted })
}

/// The first macro of the best plan found from `state`.
pub fn rhea_decide<R: RngCore + ?Sized>(
    state: &GameState,
    params: &RheaParams,
    rng: &mut R,
) -> Result<MacroAction, RuleError> {
    rhea_search(state, params, rng).map(|o| o.choice)
}
