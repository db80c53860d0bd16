//! Summaries of records files, as aligned text tables or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::records::{GameRecord, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Percentiles {
    pub count: usize,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl Percentiles {
    /// Nearest-rank percentiles; `None` for no samples.
    pub fn of(samples: &[f64]) -> Option<Percentiles> {
        if samples.is_empty() {
            return None;
        }
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Percentiles {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            p50: rank(0.5),
            p90: rank(0.9),
            p99: rank(0.99),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub agent: String,
    /// `None` for the agent-wide row.
    pub setup: Option<String>,
    pub games: usize,
    pub won: usize,
    pub lost: usize,
    pub failed: usize,
    pub win_ratio: f64,
    /// Share of lost games per cause.
    pub loss_causes: BTreeMap<String, f64>,
    pub mean_turns_won: Option<f64>,
    pub mean_turns_lost: Option<f64>,
    /// Applied actions of each kind per player turn.
    pub actions_per_turn: BTreeMap<String, f64>,
    pub decision_seconds: Option<Percentiles>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

pub fn summarize(agent: &str, setup: Option<&str>, records: &[&GameRecord]) -> Summary {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
    let (won, lost, failed) = (count(Outcome::Won), count(Outcome::Lost), count(Outcome::Failed));
    let mut causes: BTreeMap<String, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.outcome == Outcome::Lost) {
        *causes.entry(r.loss_cause.clone().unwrap_or_else(|| "unknown".into())).or_default() += 1;
    }
    let finished: Vec<&&GameRecord> = records.iter().filter(|r| r.outcome != Outcome::Failed).collect();
    let turns: u64 = finished.iter().map(|r| r.turns as u64).sum();
    let mut actions: BTreeMap<String, u64> = BTreeMap::new();
    for r in &finished {
        for (k, n) in &r.action_counts {
            *actions.entry(k.clone()).or_default() += *n as u64;
        }
    }
    let times: Vec<f64> = records.iter().flat_map(|r| r.timing.decision_seconds.iter().copied()).collect();
    let turns_of = |o: Outcome| mean(records.iter().filter(|r| r.outcome == o).map(|r| r.turns as f64));
    Summary {
        agent: agent.to_string(),
        setup: setup.map(str::to_string),
        games: records.len(),
        won,
        lost,
        failed,
        win_ratio: if records.is_empty() { 0.0 } else { won as f64 / records.len() as f64 },
        loss_causes: causes.into_iter().map(|(k, n)| (k, n as f64 / lost as f64)).collect(),
        mean_turns_won: turns_of(Outcome::Won),
        mean_turns_lost: turns_of(Outcome::Lost),
        actions_per_turn: actions
            .into_iter()
            .map(|(k, n)| (k, if turns == 0 { 0.0 } else { n as f64 / turns as f64 }))
            .collect(),
        decision_seconds: Percentiles::of(&times),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    /// One row per agent over all of its games.
    pub by_agent: Vec<Summary>,
    /// One row per agent and setup.
    pub by_setup: Vec<Summary>,
}

impl Report {
    pub fn build(records: &[GameRecord]) -> Report {
        let mut groups: BTreeMap<&str, BTreeMap<&str, Vec<&GameRecord>>> = BTreeMap::new();
        for r in records {
            groups.entry(&r.agent).or_default().entry(&r.setup_id).or_default().push(r);
        }
        let mut by_agent = Vec::new();
        let mut by_setup = Vec::new();
        for (agent, setups) in &groups {
            let all: Vec<&GameRecord> = setups.values().flatten().copied().collect();
            by_agent.push(summarize(agent, None, &all));
            for (setup, rs) in setups {
                by_setup.push(summarize(agent, Some(setup), rs));
            }
        }
        Report { by_agent, by_setup }
    }

    pub fn is_empty(&self) -> bool {
        self.by_agent.is_empty()
    }

    pub fn to_json(&self) -> String {
        if self.is_empty() {
            return "{\"empty\":true,\"by_agent\":[],\"by_setup\":[]}\n".into();
        }
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        if self.is_empty() {
            return "empty report: no game records\n".into();
        }
        let mut out = String::new();
        for a in &self.by_agent {
            let _ = writeln!(out, "agent: {}", a.agent);
            let _ = writeln!(
                out,
                "  games {}  won {}  lost {}  failed {}  win ratio {:.4}",
                a.games, a.won, a.lost, a.failed, a.win_ratio
            );
            let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(out, "  mean turns: won {}  lost {}", opt(a.mean_turns_won), opt(a.mean_turns_lost));
            if !a.loss_causes.is_empty() {
                let causes: Vec<String> = a.loss_causes.iter().map(|(k, v)| format!("{k} {:.1}%", v * 100.0)).collect();
                let _ = writeln!(out, "  loss causes: {}", causes.join(", "));
            }
            let _ = writeln!(out, "  actions per turn:");
            for (k, v) in &a.actions_per_turn {
                let _ = writeln!(out, "    {k:<18} {v:>7.3}");
            }
            if let Some(p) = &a.decision_seconds {
                let _ = writeln!(
                    out,
                    "  decision seconds: n {}  mean {:.4}  p50 {:.4}  p90 {:.4}  p99 {:.4}  max {:.4}",
                    p.count, p.mean, p.p50, p.p90, p.p99, p.max
                );
            }
            let _ = writeln!(out, "  {:<12} {:>6} {:>6} {:>8} {:>9} {:>9}", "setup", "games", "won", "ratio", "turns won", "turns lost");
            for s in self.by_setup.iter().filter(|s| s.agent == a.agent) {
                let _ = writeln!(
                    out,
                    "  {:<12} {:>6} {:>6} {:>8.4} {:>9} {:>9}",
                    s.setup.as_deref().unwrap_or(""),
                    s.games,
                    s.won,
                    s.win_ratio,
                    opt(s.mean_turns_won),
                    opt(s.mean_turns_lost)
                );
            }
        }
        out
    }
}
