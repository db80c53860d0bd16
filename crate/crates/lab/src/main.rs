use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pandemic_core::agents::Agent;
use pandemic_core::hidden::execute_macro;
use pandemic_core::map::CityMap;
use pandemic_core::rules::{Action, GameState, Phase, ShareKind};
use pandemic_core::seed::stream;

use pandemic_lab::config::{AgentKind, AgentSection, ExperimentConfig, RoleAssignment};
use pandemic_lab::experiment::{make_agent, random_setup, run_experiment, RunOptions};
use pandemic_lab::mapfile;
use pandemic_lab::records;
use pandemic_lab::report::Report;
use pandemic_lab::setups::{build_setup_library, LibraryParams, SetupLibrary};

#[derive(Parser)]
#[command(name = "pandemic", version, about = "Play and benchmark cooperative Pandemic agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print every action.
    Play {
        #[arg(long, value_enum, default_value = "hpa")]
        agent: AgentChoice,
        #[arg(long, default_value_t = 2)]
        players: usize,
        #[arg(long, default_value_t = 4)]
        epidemics: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Play this library setup instead of a random deal.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        setup: Option<String>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
    },
    /// Rank random setups with the hierarchical policy and cluster the easiest.
    GenSetups {
        #[arg(long, default_value_t = 10_000)]
        candidates: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 4)]
        epidemics: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of candidates kept, easiest first.
        #[arg(long, default_value_t = 0.1)]
        keep: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Continue an interrupted run in the same output file.
        #[arg(long)]
        resume: bool,
    },
    /// Summarize one or more records files.
    Report {
        #[arg(long = "in", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentChoice {
    Hpa,
    Rpa,
    Rhea,
}

fn describe(map: &CityMap, a: &Action) -> String {
    let n = |c| map.name(c);
    match *a {
        Action::DriveFerry(c) => format!("drive to {}", n(c)),
        Action::DirectFlight(c) => format!("direct flight to {}", n(c)),
        Action::CharterFlight(c) => format!("charter flight to {}", n(c)),
        Action::ShuttleFlight(c) => format!("shuttle to {}", n(c)),
        Action::OpsExpertFlight { card, to } => format!("station flight to {} discarding {}", n(to), n(card)),
        Action::BuildStation => "build station".into(),
        Action::TreatDisease(c) => format!("treat {c}"),
        Action::ShareKnowledge { kind, card, other } => match kind {
            ShareKind::Give => format!("give {} to player {}", n(card), other + 1),
            ShareKind::Take => format!("take {} from player {}", n(card), other + 1),
        },
        Action::CureDisease { color, .. } => format!("cure {color}"),
        Action::Wait => "wait".into(),
        Action::Discard(c) => format!("discard {}", n(c)),
    }
}

fn play_verbose(mut state: GameState, agent: &mut dyn Agent, seed: u64) -> Result<()> {
    let map = state.map.clone();
    let mut rng = stream(&[seed, 2]);
    let mut last_turn = 0;
    while !state.status.is_over() {
        if state.phase != Phase::Actions {
            let before = (state.outbreaks, state.epidemics_drawn);
            state.end_turn(&mut rng)?;
            if state.epidemics_drawn > before.1 {
                println!("    epidemic ({} so far)", state.epidemics_drawn);
            }
            if state.outbreaks > before.0 {
                println!("    outbreaks now {}", state.outbreaks);
            }
            continue;
        }
        if state.turn != last_turn {
            last_turn = state.turn;
            let p = state.current_player();
            println!(
                "turn {} player {} ({}) at {}, hand {}",
                state.turn,
                state.current + 1,
                p.role,
                map.name(p.location),
                p.hand.iter().map(|c| map.name(c)).collect::<Vec<_>>().join(", ")
            );
        }
        let m = agent.decide(&state)?;
        let before = state.actions_remaining;
        execute_macro(&mut state, &m, &mut |a, wasted| {
            println!("  {}{}", describe(&map, a), if wasted { " (wasted)" } else { "" });
        });
        if state.phase == Phase::Actions && state.actions_remaining == before {
            state.apply_action(Action::Wait)?;
        }
    }
    println!(
        "result: {} after {} turns, {} cures, {} outbreaks",
        pandemic_lab::snapshot::status_name(state.status),
        state.turn,
        state.cured_count(),
        state.outbreaks
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Play { agent, players, epidemics, seed, library, setup, map, generations, repetitions, horizon } => {
            let loaded = mapfile::load(map.as_deref())?;
            let state = match library {
                Some(path) => {
                    let lib = SetupLibrary::load(&path)?;
                    let cases = lib.cases(&loaded, false)?;
                    let case = match setup {
                        Some(id) => cases.into_iter().find(|c| c.id == id),
                        None => cases.into_iter().next(),
                    };
                    match case {
                        Some(c) => c.state,
                        None => bail!("setup not found in {}", path.display()),
                    }
                }
                None => random_setup(&loaded, players, epidemics, RoleAssignment::Fixed, seed, 0)?,
            };
            let mut section = AgentSection::of_kind(match agent {
                AgentChoice::Hpa => AgentKind::Hpa,
                AgentChoice::Rpa => AgentKind::Rpa,
                AgentChoice::Rhea => AgentKind::Rhea,
            });
            section.generations = generations;
            section.repetitions = repetitions;
            section.horizon = horizon;
            let mut a = make_agent(&section, seed)?;
            play_verbose(state, &mut *a, seed)
        }
        Command::GenSetups { candidates, trials, k, players, epidemics, seed, keep, jobs, map, out } => {
            let loaded = mapfile::load(map.as_deref())?;
            let mut p = LibraryParams::new(candidates, trials, k, seed);
            p.players = players;
            p.epidemic_count = epidemics;
            p.keep_fraction = keep;
            p.jobs = jobs;
            let lib = build_setup_library(&loaded, &p)?;
            lib.save(&out)?;
            println!(
                "kept {} of {} setups; medoid mean win ratio {:.4}",
                lib.setups.len(),
                lib.candidates,
                lib.medoid_mean_win_ratio()
            );
            for m in lib.medoids() {
                println!("  {:<8} win ratio {:.3}  mean turns {:.1}", m.id, m.win_ratio, m.mean_turns);
            }
            Ok(())
        }
        Command::Experiment { config, out, jobs, resume } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.or_else(|| cfg.run.out.clone());
            let recs = run_experiment(&cfg, &RunOptions { out: out.as_deref(), jobs, resume })?;
            print!("{}", Report::build(&recs).to_text());
            Ok(())
        }
        Command::Report { input, format } => {
            let mut all = Vec::new();
            for p in &input {
                all.extend(records::read(p)?.records);
            }
            let r = Report::build(&all);
            match format {
                Format::Text => print!("{}", r.to_text()),
                Format::Machine => print!("{}", r.to_json()),
            }
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
