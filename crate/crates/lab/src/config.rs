//! Experiment configuration files.
//!
//! ```toml
//! [game]
//! source = "random"
//! random_setups = 100
//! players = 2
//! epidemic_count = 4
//!
//! [agent]
//! kind = "rhea"
//! fitness = "p(mean(f_oa,f_cm))"
//!
//! [run]
//! trials = 1
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, ensure, Context, Result};
use pandemic_core::agents::{FitnessSpec, RheaParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetupSource {
    Library,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleAssignment {
    /// Operations Expert, Medic, Researcher, Scientist, truncated.
    Fixed,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Hpa,
    Rpa,
    Rhea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub source: SetupSource,
    /// Setup library file, required when `source = "library"`.
    #[serde(default)]
    pub library: Option<PathBuf>,
    /// Play only the medoids of the library.
    #[serde(default = "yes")]
    pub medoids_only: bool,
    /// Number of setups generated when `source = "random"`.
    #[serde(default = "one")]
    pub random_setups: usize,
    #[serde(default = "two")]
    pub players: usize,
    #[serde(default = "four")]
    pub epidemic_count: u8,
    #[serde(default = "fixed")]
    pub roles: RoleAssignment,
    /// Map file; the built-in map when absent.
    #[serde(default)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub kind: AgentKind,
    #[serde(default = "d_horizon")]
    pub horizon: usize,
    #[serde(default = "d_generations")]
    pub generations: usize,
    #[serde(default = "d_repetitions")]
    pub repetitions: usize,
    #[serde(default = "d_mutation_start")]
    pub mutation_start: f64,
    #[serde(default = "d_mutation_end")]
    pub mutation_end: f64,
    #[serde(default = "d_fitness")]
    pub fitness: String,
    #[serde(default = "d_c_p")]
    pub c_p: f64,
    #[serde(default)]
    pub literal_oa: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub jobs: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSection,
    pub agent: AgentSection,
    pub run: RunSection,
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn four() -> u8 {
    4
}
fn fixed() -> RoleAssignment {
    RoleAssignment::Fixed
}
fn d_horizon() -> usize {
    3
}
fn d_generations() -> usize {
    100
}
fn d_repetitions() -> usize {
    10
}
fn d_mutation_start() -> f64 {
    1.0
}
fn d_mutation_end() -> f64 {
    0.5
}
fn d_fitness() -> String {
    FitnessSpec::tuned().to_string()
}
fn d_c_p() -> f64 {
    0.1
}

impl AgentSection {
    pub fn of_kind(kind: AgentKind) -> AgentSection {
        AgentSection {
            kind,
            horizon: d_horizon(),
            generations: d_generations(),
            repetitions: d_repetitions(),
            mutation_start: d_mutation_start(),
            mutation_end: d_mutation_end(),
            fitness: d_fitness(),
            c_p: d_c_p(),
            literal_oa: false,
        }
    }

    pub fn fitness_spec(&self) -> Result<FitnessSpec> {
        let mut spec: FitnessSpec = self.fitness.parse().map_err(|e: String| anyhow!("fitness: {e}"))?;
        spec.c_p = self.c_p;
        spec.literal_oa = self.literal_oa;
        Ok(spec)
    }

    /// Search parameters with the given decision seed.
    pub fn rhea_params(&self, seed: u64) -> Result<RheaParams> {
        let p = RheaParams {
            horizon: self.horizon,
            generations: self.generations,
            repetitions: self.repetitions,
            mutation_start: self.mutation_start,
            mutation_end: self.mutation_end,
            fitness: self.fitness_spec()?,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    /// Short stable description of the agent, stored with every record.
    pub fn fingerprint(&self) -> String {
        match self.kind {
            AgentKind::Hpa => "hpa".into(),
            AgentKind::Rpa => "rpa".into(),
            AgentKind::Rhea => format!(
                "rhea h={} g={} r={} mr={}->{} f={} cp={}{}",
                self.horizon,
                self.generations,
                self.repetitions,
                self.mutation_start,
                self.mutation_end,
                self.fitness,
                self.c_p,
                if self.literal_oa { " literal_oa" } else { "" }
            ),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative library and map paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.game.library, &mut cfg.game.map].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.run.trials >= 1, "run.trials must be at least 1");
        ensure!(self.run.jobs >= 1, "run.jobs must be at least 1");
        match self.game.source {
            SetupSource::Library => ensure!(self.game.library.is_some(), "game.library is required for a library source"),
            SetupSource::Random => {
                ensure!(self.game.random_setups >= 1, "game.random_setups must be at least 1");
                ensure!((2..=4).contains(&self.game.players), "game.players must be 2, 3 or 4");
                ensure!((4..=6).contains(&self.game.epidemic_count), "game.epidemic_count must be 4, 5 or 6");
            }
        }
        if self.agent.kind == AgentKind::Rhea {
            self.agent.rhea_params(0)?;
        } else {
            self.agent.fitness_spec()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[game]\nsource = \"random\"\n[agent]\nkind = \"rhea\"\n[run]\ntrials = 2\nseed = 5\n";

    #[test]
    fn defaults_are_the_tuned_agent() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        let p = c.agent.rhea_params(1).unwrap();
        let tuned = RheaParams::tuned(1);
        assert_eq!(p.horizon, tuned.horizon);
        assert_eq!(p.generations, tuned.generations);
        assert_eq!(p.repetitions, tuned.repetitions);
        assert_eq!(p.fitness, tuned.fitness);
        assert_eq!(c.game.players, 2);
        assert_eq!(c.run.jobs, 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("seed = 5", "seed = 5\nspeed = 3");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = MINIMAL.replace("kind = \"rhea\"", "kind = \"rhea\"\nhorizn = 2");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(ExperimentConfig::parse(&MINIMAL.replace("trials = 2", "trials = 0")).is_err());
    }

    #[test]
    fn library_source_needs_a_path() {
        assert!(ExperimentConfig::parse(&MINIMAL.replace("\"random\"", "\"library\"")).is_err());
    }

    #[test]
    fn bad_fitness_is_rejected() {
        let bad = MINIMAL.replace("kind = \"rhea\"", "kind = \"rhea\"\nfitness = \"q(f_od)\"");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
