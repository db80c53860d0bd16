//! Setup libraries: random deals ranked by how often the hierarchical
//! policy wins them, with the easiest ones clustered to pick a small,
//! representative testbed.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use pandemic_core::agents::GameSummary;
use pandemic_core::rules::Status;
use pandemic_core::seed::{derive_seed, stream};
use serde::{Deserialize, Serialize};

use crate::config::{AgentKind, AgentSection, RoleAssignment};
use crate::experiment::{play_from, random_setup, SetupCase};
use crate::kmedoids::pam;
use crate::mapfile::LoadedMap;
use crate::pool::run_ordered;
use crate::snapshot::Snapshot;

pub const LIBRARY_VERSION: u32 = 1;
/// Maximum game length in player turns used to normalize durations.
pub const DURATION_SCALE: f64 = 23.0;
pub const PAM_RESTARTS: usize = 50;
const PAM_STREAM: u64 = 0x9a3_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupEntry {
    /// Stable name, `c<candidate index>`.
    pub id: String,
    pub candidate: usize,
    pub win_ratio: f64,
    pub mean_turns: f64,
    /// Mean turns divided by [`DURATION_SCALE`].
    pub normalized_duration: f64,
    pub medoid: bool,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupLibrary {
    pub version: u32,
    pub map_checksum: String,
    pub players: usize,
    pub epidemic_count: u8,
    pub candidates: usize,
    pub trials: usize,
    pub keep_fraction: f64,
    pub k: usize,
    pub seed: u64,
    /// Total distance of the kept setups to their medoids.
    pub clustering_cost: f64,
    /// Win ratio of every candidate, by candidate index.
    pub candidate_win_ratios: Vec<f64>,
    /// The kept setups, by candidate index.
    pub setups: Vec<SetupEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryParams {
    pub candidates: usize,
    pub trials: usize,
    pub k: usize,
    pub keep_fraction: f64,
    pub players: usize,
    pub epidemic_count: u8,
    pub roles: RoleAssignment,
    pub seed: u64,
    pub jobs: usize,
}

impl LibraryParams {
    /// 4 epidemics, four players in the fixed role order, top 10% kept.
    pub fn new(candidates: usize, trials: usize, k: usize, seed: u64) -> LibraryParams {
        LibraryParams {
            candidates,
            trials,
            k,
            keep_fraction: 0.1,
            players: 4,
            epidemic_count: 4,
            roles: RoleAssignment::Fixed,
            seed,
            jobs: 1,
        }
    }
}

/// Hierarchical-policy results on one candidate setup.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub candidate: usize,
    pub wins: usize,
    pub trials: usize,
    pub mean_turns: f64,
    pub snapshot: Snapshot,
}

impl CandidateResult {
    pub fn win_ratio(&self) -> f64 {
        self.wins as f64 / self.trials as f64
    }
}

/// Deals candidate `index` and plays it `trials` times with the
/// hierarchical policy.
pub fn evaluate_candidate(map: &LoadedMap, p: &LibraryParams, index: usize) -> Result<CandidateResult> {
    let state = random_setup(map, p.players, p.epidemic_count, p.roles, p.seed, index)?;
    let hpa = AgentSection::of_kind(AgentKind::Hpa);
    let mut wins = 0;
    let mut turns = 0u64;
    for t in 0..p.trials {
        let seed = derive_seed(&[p.seed, index as u64, t as u64]);
        let (GameSummary { status, turns: n, .. }, _) = play_from(&state, &hpa, seed)?;
        wins += usize::from(status == Status::Won);
        turns += n as u64;
    }
    Ok(CandidateResult {
        candidate: index,
        wins,
        trials: p.trials,
        mean_turns: turns as f64 / p.trials.max(1) as f64,
        snapshot: Snapshot::capture(&state, &map.checksum),
    })
}

/// Keeps the easiest candidates and marks `k` medoids among them. The
/// result does not depend on the order of `results`.
pub fn select(mut results: Vec<CandidateResult>, map: &LoadedMap, p: &LibraryParams) -> Result<SetupLibrary> {
    ensure!(p.k >= 1 && p.k <= results.len(), "k = {} must lie in 1..={}", p.k, results.len());
    ensure!(p.keep_fraction > 0.0 && p.keep_fraction <= 1.0, "keep fraction must lie in (0, 1]");
    results.sort_by_key(|r| r.candidate);
    let candidate_win_ratios = results.iter().map(CandidateResult::win_ratio).collect();
    let keep = ((results.len() as f64 * p.keep_fraction).ceil() as usize).clamp(p.k, results.len());
    let mut ranked: Vec<&CandidateResult> = results.iter().collect();
    // stable sort keeps candidate order among equal win ratios
    ranked.sort_by(|a, b| b.win_ratio().total_cmp(&a.win_ratio()));
    let mut kept: Vec<&CandidateResult> = ranked[..keep].to_vec();
    kept.sort_by_key(|r| r.candidate);

    let points: Vec<Vec<f64>> = kept.iter().map(|r| vec![r.win_ratio(), r.mean_turns / DURATION_SCALE]).collect();
    let clustering = pam(&points, p.k, PAM_RESTARTS, &mut stream(&[p.seed, PAM_STREAM]));
    let medoids: Vec<usize> = if clustering.degenerate {
        log::warn!("setup points are degenerate; using the first {} kept setups", p.k);
        (0..p.k).collect()
    } else {
        clustering.medoids.clone()
    };
    let setups = kept
        .iter()
        .enumerate()
        .map(|(i, r)| SetupEntry {
            id: format!("c{}", r.candidate),
            candidate: r.candidate,
            win_ratio: r.win_ratio(),
            mean_turns: r.mean_turns,
            normalized_duration: r.mean_turns / DURATION_SCALE,
            medoid: medoids.contains(&i),
            snapshot: r.snapshot.clone(),
        })
        .collect();
    Ok(SetupLibrary {
        version: LIBRARY_VERSION,
        map_checksum: map.checksum.clone(),
        players: p.players,
        epidemic_count: p.epidemic_count,
        candidates: results.len(),
        trials: p.trials,
        keep_fraction: p.keep_fraction,
        k: p.k,
        seed: p.seed,
        clustering_cost: clustering.cost,
        candidate_win_ratios,
        setups,
    })
}

/// Generates, ranks and clusters `p.candidates` random setups.
pub fn build_setup_library(map: &LoadedMap, p: &LibraryParams) -> Result<SetupLibrary> {
    ensure!(p.trials >= 1, "trials must be at least 1");
    ensure!(p.k >= 1 && p.k <= p.candidates, "k must lie in 1..=candidates");
    let indices: Vec<usize> = (0..p.candidates).collect();
    let mut results = Vec::with_capacity(p.candidates);
    run_ordered(
        &indices,
        p.jobs,
        |&i| evaluate_candidate(map, p, i),
        |&i, out| -> Result<()> {
            let r = out.map_err(|e| anyhow::anyhow!("candidate {i} panicked: {e}"))??;
            results.push(r);
            if results.len() % 500 == 0 {
                log::info!("{} of {} candidates ranked", results.len(), p.candidates);
            }
            Ok(())
        },
    )?;
    select(results, map, p)
}

impl SetupLibrary {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<SetupLibrary> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lib: SetupLibrary =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        ensure!(lib.version == LIBRARY_VERSION, "unsupported library version {}", lib.version);
        Ok(lib)
    }

    pub fn medoids(&self) -> impl Iterator<Item = &SetupEntry> {
        self.setups.iter().filter(|s| s.medoid)
    }

    /// Mean recorded win ratio of the medoids.
    pub fn medoid_mean_win_ratio(&self) -> f64 {
        let (n, sum) = self.medoids().fold((0usize, 0.0), |(n, s), e| (n + 1, s + e.win_ratio));
        sum / n.max(1) as f64
    }

    /// The playable states, all setups or only the medoids.
    pub fn cases(&self, map: &LoadedMap, medoids_only: bool) -> Result<Vec<SetupCase>> {
        ensure!(
            self.map_checksum == map.checksum,
            "library was built on map {} but {} is loaded",
            self.map_checksum,
            map.checksum
        );
        self.setups
            .iter()
            .filter(|s| s.medoid || !medoids_only)
            .map(|s| Ok(SetupCase { id: s.id.clone(), state: s.snapshot.restore(map.map.clone(), &map.checksum)? }))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapfile;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn fake(map: &LoadedMap, candidate: usize, wins: usize, turns: f64) -> CandidateResult {
        let state = random_setup(map, 4, 4, RoleAssignment::Fixed, 1, 0).unwrap();
        CandidateResult { candidate, wins, trials: 10, mean_turns: turns, snapshot: Snapshot::capture(&state, &map.checksum) }
    }

    #[test]
    fn keeps_the_easiest_and_is_order_independent() {
        let map = mapfile::builtin();
        let results: Vec<CandidateResult> =
            (0..40).map(|i| fake(&map, i, (i * 7) % 11, 12.0 + (i % 9) as f64)).collect();
        let mut p = LibraryParams::new(40, 10, 3, 9);
        p.keep_fraction = 0.25;
        let lib = select(results.clone(), &map, &p).unwrap();
        assert_eq!(lib.setups.len(), 10);
        assert_eq!(lib.medoids().count(), 3);
        let worst_kept = lib.setups.iter().map(|s| s.win_ratio).fold(1.0, f64::min);
        let kept: Vec<usize> = lib.setups.iter().map(|s| s.candidate).collect();
        for (i, w) in lib.candidate_win_ratios.iter().enumerate() {
            if !kept.contains(&i) {
                assert!(*w <= worst_kept);
            }
        }
        let mut shuffled = results;
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(4));
        assert_eq!(select(shuffled, &map, &p).unwrap(), lib);
    }

    #[test]
    fn k_equal_to_kept_makes_everything_a_medoid() {
        let map = mapfile::builtin();
        let results: Vec<CandidateResult> = (0..5).map(|i| fake(&map, i, i, 15.0 + i as f64)).collect();
        let mut p = LibraryParams::new(5, 10, 5, 2);
        p.keep_fraction = 1.0;
        let lib = select(results, &map, &p).unwrap();
        assert!(lib.setups.iter().all(|s| s.medoid));
    }

    #[test]
    fn identical_points_fall_back_to_the_first_setups() {
        let map = mapfile::builtin();
        let results: Vec<CandidateResult> = (0..6).map(|i| fake(&map, i, 3, 17.0)).collect();
        let mut p = LibraryParams::new(6, 10, 2, 2);
        p.keep_fraction = 1.0;
        let lib = select(results.clone(), &map, &p).unwrap();
        let m: Vec<&str> = lib.medoids().map(|s| s.id.as_str()).collect();
        assert_eq!(m, ["c0", "c1"]);
        p.k = 1;
        let lib = select(results, &map, &p).unwrap();
        assert_eq!(lib.medoids().count(), 1);
    }

    #[test]
    fn small_library_round_trips_and_replays() {
        let map = mapfile::builtin();
        let mut p = LibraryParams::new(6, 2, 2, 5);
        p.keep_fraction = 0.5;
        let lib = build_setup_library(&map, &p).unwrap();
        assert_eq!(lib.setups.len(), 3);
        for s in &lib.setups {
            assert!((0.0..=1.0).contains(&s.win_ratio));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.json");
        lib.save(&path).unwrap();
        let back = SetupLibrary::load(&path).unwrap();
        assert_eq!(back, lib);
        let cases = back.cases(&map, true).unwrap();
        assert_eq!(cases.len(), 2);
        let again = evaluate_candidate(&map, &p, lib.setups[0].candidate).unwrap();
        assert_eq!(again.snapshot, lib.setups[0].snapshot);
        assert_eq!(again.win_ratio(), lib.setups[0].win_ratio);
    }
}
