//! Batch play: every setup is played `trials` times, games run on a worker
//! pool, and records are streamed to disk in game-index order.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use pandemic_core::agents::{play_game, Agent, GameSummary, HpaAgent, RheaAgent, RpaAgent};
use pandemic_core::planner::MacroAction;
use pandemic_core::rules::{ActionKind, GameConfig, GameState, Status};
use pandemic_core::seed::{derive_seed, stream};
use pandemic_core::RuleError;

use crate::config::{AgentKind, AgentSection, ExperimentConfig, RoleAssignment, SetupSource};
use crate::mapfile::{self, LoadedMap};
use crate::pool::run_ordered;
use crate::records::{build_fingerprint, GameRecord, Header, Outcome, RecordWriter, Timing, RECORDS_VERSION};
use crate::setups::SetupLibrary;

/// Seed-path tag separating random setup generation from game seeds.
const SETUP_STREAM: u64 = 0x5e70_5e70;

/// A named starting position.
#[derive(Debug, Clone)]
pub struct SetupCase {
    pub id: String,
    pub state: GameState,
}

/// Seed of game `index` under `master`; independent of scheduling.
pub fn game_seed(master: u64, index: usize) -> u64 {
    derive_seed(&[master, index as u64])
}

/// A freshly dealt game for random setup `index` under `master`.
pub fn random_setup(
    map: &LoadedMap,
    players: usize,
    epidemics: u8,
    roles: RoleAssignment,
    master: u64,
    index: usize,
) -> Result<GameState> {
    let seed = derive_seed(&[master, SETUP_STREAM, index as u64]);
    let config = match roles {
        RoleAssignment::Fixed => GameConfig::standard(players, epidemics, seed),
        RoleAssignment::Random => GameConfig::random_roles(players, epidemics, seed, &mut stream(&[seed, 1])),
    };
    Ok(GameState::new_game(map.map.clone(), &config, &mut stream(&[seed]))?)
}

/// The setups an experiment plays, in order.
pub fn resolve_setups(cfg: &ExperimentConfig, map: &LoadedMap) -> Result<Vec<SetupCase>> {
    match cfg.game.source {
        SetupSource::Random => (0..cfg.game.random_setups)
            .map(|i| {
                let state = random_setup(map, cfg.game.players, cfg.game.epidemic_count, cfg.game.roles, cfg.run.seed, i)?;
                Ok(SetupCase { id: format!("r{i}"), state })
            })
            .collect(),
        SetupSource::Library => {
            let path = cfg.game.library.as_ref().ok_or_else(|| anyhow!("no library path"))?;
            let lib = SetupLibrary::load(path)?;
            let cases = lib.cases(map, cfg.game.medoids_only)?;
            anyhow::ensure!(!cases.is_empty(), "{} has no setups to play", path.display());
            Ok(cases)
        }
    }
}

/// Wraps an agent and records the wall time of every decision.
pub struct TimedAgent<A> {
    pub inner: A,
    pub seconds: Vec<f64>,
}

impl<A: Agent> TimedAgent<A> {
    pub fn new(inner: A) -> TimedAgent<A> {
        TimedAgent { inner, seconds: Vec::new() }
    }
}

impl<A: Agent> Agent for TimedAgent<A> {
    fn decide(&mut self, state: &GameState) -> Result<MacroAction, RuleError> {
        let t = Instant::now();
        let out = self.inner.decide(state);
        self.seconds.push(t.elapsed().as_secs_f64());
        out
    }
}

/// The configured agent, seeded for one game.
pub fn make_agent(section: &AgentSection, seed: u64) -> Result<Box<dyn Agent + Send>> {
    let rng = stream(&[seed, 1]);
    Ok(match section.kind {
        AgentKind::Hpa => Box::new(HpaAgent { rng }),
        AgentKind::Rpa => Box::new(RpaAgent { rng }),
        AgentKind::Rhea => Box::new(RheaAgent { params: section.rhea_params(seed)?, rng }),
    })
}

/// Plays one game from `setup` with the given per-game seed.
pub fn play_from(setup: &GameState, section: &AgentSection, seed: u64) -> Result<(GameSummary, Timing)> {
    let mut agent = TimedAgent::new(make_agent(section, seed)?);
    let mut state = setup.clone();
    let start = Instant::now();
    let summary = play_game(&mut state, &mut agent, &mut stream(&[seed, 2]))?;
    let timing = Timing { decision_seconds: agent.seconds, game_seconds: start.elapsed().as_secs_f64() };
    Ok((summary, timing))
}

fn record_of(
    index: usize,
    case: &SetupCase,
    seed: u64,
    agent: &str,
    checksum: &str,
    result: Result<Result<(GameSummary, Timing)>, String>,
) -> GameRecord {
    let mut r = GameRecord {
        game_index: index,
        setup_id: case.id.clone(),
        seed,
        outcome: Outcome::Failed,
        loss_cause: None,
        turns: 0,
        action_counts: Default::default(),
        decisions: 0,
        wasted_actions: 0,
        agent: agent.to_string(),
        map_checksum: checksum.to_string(),
        error: None,
        timing: Timing::default(),
    };
    match result {
        Ok(Ok((s, timing))) => {
            match s.status {
                Status::Won => r.outcome = Outcome::Won,
                Status::Lost(c) => {
                    r.outcome = Outcome::Lost;
                    r.loss_cause = Some(c.name().to_string());
                }
                Status::Ongoing => r.error = Some("game ended while ongoing".into()),
            }
            r.turns = s.turns;
            r.action_counts =
                ActionKind::ALL.iter().zip(s.action_counts).map(|(k, n)| (k.name().to_string(), n)).collect();
            r.decisions = s.decisions;
            r.wasted_actions = s.wasted_actions;
            r.timing = timing;
        }
        Ok(Err(e)) => r.error = Some(format!("{e:#}")),
        Err(panic) => r.error = Some(format!("panic: {panic}")),
    }
    r
}

/// Where and how an experiment writes its records.
#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    pub out: Option<&'a Path>,
    /// Overrides `run.jobs` when set.
    pub jobs: Option<usize>,
    pub resume: bool,
}

/// Plays every game of `cfg` and returns all records, including any
/// already present in a resumed file.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<GameRecord>> {
    cfg.validate()?;
    let map = mapfile::load(cfg.game.map.as_deref())?;
    let setups = resolve_setups(cfg, &map)?;
    let trials = cfg.run.trials;
    let total = setups.len() * trials;
    let agent = cfg.agent.fingerprint();
    let header = Header {
        records_version: RECORDS_VERSION,
        map_checksum: map.checksum.clone(),
        build: build_fingerprint(),
        agent: agent.clone(),
        total_games: total,
        config: cfg.to_toml(),
    };
    let (mut writer, mut records) = match (opts.out, opts.resume) {
        (Some(p), true) if p.exists() => {
            let (w, done) = RecordWriter::resume(p, &header)?;
            log::info!("resuming {} after {} of {total} games", p.display(), done.len());
            (Some(w), done)
        }
        (Some(p), _) => (Some(RecordWriter::create(p, &header)?), Vec::new()),
        (None, _) => (None, Vec::new()),
    };
    let todo: Vec<usize> = (records.len()..total).collect();
    let jobs = opts.jobs.unwrap_or(cfg.run.jobs);
    let master = cfg.run.seed;
    let t0 = Instant::now();
    run_ordered(
        &todo,
        jobs,
        |&g| {
            let seed = game_seed(master, g);
            play_from(&setups[g / trials].state, &cfg.agent, seed)
        },
        |&g, out| -> Result<()> {
            let seed = game_seed(master, g);
            let r = record_of(g, &setups[g / trials], seed, &agent, &map.checksum, out);
            if let Some(e) = &r.error {
                log::error!("game {g} failed: {e}");
            }
            if let Some(w) = writer.as_mut() {
                w.write(&r).with_context(|| format!("writing game {g}"))?;
            }
            records.push(r);
            let done = records.len();
            if done % 100 == 0 || done == total {
                log::info!("{done}/{total} games, {:.1}s", t0.elapsed().as_secs_f64());
            }
            Ok(())
        },
    )?;
    Ok(records)
}
