use std::fs;
use std::path::Path;
use std::process::Command;

use pandemic_lab::config::{AgentKind, AgentSection, ExperimentConfig, GameSection, RoleAssignment, RunSection, SetupSource};
use pandemic_lab::experiment::{run_experiment, RunOptions};
use pandemic_lab::records::{self, Outcome};
use pandemic_lab::report::Report;

fn config(kind: AgentKind, setups: usize, trials: usize, seed: u64) -> ExperimentConfig {
    let mut agent = AgentSection::of_kind(kind);
    agent.generations = 3;
    agent.repetitions = 2;
    ExperimentConfig {
        game: GameSection {
            source: SetupSource::Random,
            library: None,
            medoids_only: true,
            random_setups: setups,
            players: 2,
            epidemic_count: 4,
            roles: RoleAssignment::Fixed,
            map: None,
        },
        agent,
        run: RunSection { trials, seed, jobs: 1, out: None },
    }
}

/// Every line of a records file with the timing field removed.
fn stripped(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            v.to_string()
        })
        .collect()
}

#[test]
fn parallel_and_serial_runs_write_the_same_records() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    let cfg = config(AgentKind::Hpa, 4, 3, 11);
    run_experiment(&cfg, &RunOptions { out: Some(&a), jobs: Some(1), resume: false }).unwrap();
    run_experiment(&cfg, &RunOptions { out: Some(&b), jobs: Some(3), resume: false }).unwrap();
    let (la, lb) = (stripped(&a), stripped(&b));
    assert_eq!(la.len(), 13);
    assert_eq!(la, lb);
}

#[test]
fn rhea_records_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    let cfg = config(AgentKind::Rhea, 2, 1, 3);
    run_experiment(&cfg, &RunOptions { out: Some(&a), ..Default::default() }).unwrap();
    run_experiment(&cfg, &RunOptions { out: Some(&b), ..Default::default() }).unwrap();
    assert_eq!(stripped(&a), stripped(&b));
    let recs = records::read(&a).unwrap().records;
    assert!(recs.iter().all(|r| r.error.is_none() && r.outcome != Outcome::Failed));
    assert!(recs.iter().all(|r| r.timing.decision_seconds.len() == r.decisions as usize));
}

#[test]
fn resume_completes_an_interrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let (full, cut) = (dir.path().join("full.jsonl"), dir.path().join("cut.jsonl"));
    let cfg = config(AgentKind::Rpa, 3, 2, 21);
    let all = run_experiment(&cfg, &RunOptions { out: Some(&full), ..Default::default() }).unwrap();
    let text = fs::read_to_string(&full).unwrap();
    let keep: Vec<&str> = text.lines().take(3).collect();
    // header, two records and half of the third
    let torn = format!("{}\n{}", keep.join("\n"), &text.lines().nth(3).unwrap()[..20]);
    fs::write(&cut, torn).unwrap();
    let resumed = run_experiment(&cfg, &RunOptions { out: Some(&cut), resume: true, ..Default::default() }).unwrap();
    assert_eq!(resumed.len(), all.len());
    assert_eq!(stripped(&cut), stripped(&full));
}

#[test]
fn resume_refuses_a_different_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.jsonl");
    run_experiment(&config(AgentKind::Hpa, 1, 1, 1), &RunOptions { out: Some(&p), ..Default::default() }).unwrap();
    let other = config(AgentKind::Hpa, 1, 1, 2);
    assert!(run_experiment(&other, &RunOptions { out: Some(&p), resume: true, ..Default::default() }).is_err());
}

#[test]
fn reported_win_ratio_is_the_won_fraction() {
    let recs = run_experiment(&config(AgentKind::Hpa, 10, 5, 8), &RunOptions::default()).unwrap();
    let won = recs.iter().filter(|r| r.outcome == Outcome::Won).count();
    let report = Report::build(&recs);
    assert_eq!(report.by_agent[0].win_ratio, won as f64 / recs.len() as f64);
    assert_eq!(report.by_setup.len(), 10);
    for r in &recs {
        assert!(r.turns >= 1 && r.turns <= 24, "turns {}", r.turns);
        assert_eq!(r.outcome == Outcome::Lost, r.loss_cause.is_some());
    }
}

#[test]
fn library_source_needs_a_readable_file() {
    let mut cfg = config(AgentKind::Hpa, 1, 1, 1);
    cfg.game.source = SetupSource::Library;
    cfg.game.library = Some("/nonexistent/library.json".into());
    assert!(run_experiment(&cfg, &RunOptions::default()).is_err());
}

#[test]
fn command_line_round_trip() {
    let exe = env!("CARGO_BIN_EXE_pandemic");
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("lib.json");
    let out = Command::new(exe)
        .args(["gen-setups", "--candidates", "12", "--trials", "2", "--k", "2", "--keep", "0.5", "--seed", "4", "--out"])
        .arg(&lib)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "[game]\nsource = \"library\"\nlibrary = \"lib.json\"\n\n[agent]\nkind = \"hpa\"\n\n[run]\ntrials = 3\nseed = 9\n",
    )
    .unwrap();
    let recs = dir.path().join("recs.jsonl");
    let out = Command::new(exe).args(["experiment", "--config"]).arg(&cfg).arg("--out").arg(&recs).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = records::read(&recs).unwrap();
    assert_eq!(file.records.len(), 6);
    assert_eq!(file.header.total_games, 6);

    let out = Command::new(exe).args(["report", "--format", "machine", "--in"]).arg(&recs).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["by_agent"][0]["games"], 6);
    assert_eq!(v["by_setup"].as_array().unwrap().len(), 2);

    let out = Command::new(exe).args(["play", "--seed", "3"]).output().unwrap();
    assert!(out.status.success());
    let log = String::from_utf8_lossy(&out.stdout);
    assert!(log.contains("turn 1 player 1"));
    assert!(log.lines().last().unwrap().starts_with("result: "));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[game]\nsource = \"random\"\nbogus = 1\n[agent]\nkind = \"hpa\"\n[run]\ntrials = 1\nseed = 1\n").unwrap();
    let out = Command::new(exe).args(["experiment", "--config"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
}
