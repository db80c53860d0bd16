//! Hand-written macro policies: a fixed priority list and a shuffled one.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::planner::{generate_macros, MacroAction, MacroFamily, ShareMode};
use crate::rules::{GameState, MAX_STATIONS};

/// The macro families of one decision point, grouped the way the policies
/// consult them.
#[derive(Debug, Default)]
pub struct Buckets {
    pub cure: Vec<MacroAction>,
    /// Indexed by cube count minus one.
    pub treat: [Vec<MacroAction>; 3],
    pub share_now: Vec<MacroAction>,
    pub share_wait: Vec<MacroAction>,
    pub build: Vec<MacroAction>,
    pub walk: Vec<MacroAction>,
}

impl Buckets {
    pub fn of(state: &GameState) -> Buckets {
        let mut b = Buckets::default();
        let stations_left = state.station_count() < MAX_STATIONS;
        for m in generate_macros(state, state.current, state.actions_remaining) {
            match m.family {
                MacroFamily::Cure => b.cure.push(m),
                MacroFamily::Treat { cubes } => {
                    let i = (cubes.clamp(1, 3) - 1) as usize;
                    b.treat[i].push(m);
                }
                MacroFamily::Share(ShareMode::Wait) => b.share_wait.push(m),
                MacroFamily::Share(_) => b.share_now.push(m),
                MacroFamily::Build => {
                    if stations_left {
                        b.build.push(m)
                    }
                }
                MacroFamily::WalkAway | MacroFamily::Pass => b.walk.push(m),
            }
        }
        b
    }

    fn treat_any(&self) -> &[MacroAction] {
        self.treat.iter().rev().find(|v| !v.is_empty()).map_or(&[], |v| v.as_slice())
    }

    fn share_any(&self) -> &[MacroAction] {
        if self.share_now.is_empty() {
            &self.share_wait
        } else {
            &self.share_now
        }
    }

    /// Levels in the hierarchical policy's order.
    pub fn hierarchy(&self) -> [&[MacroAction]; 7] {
        [
            &self.cure,
            &self.treat[2],
            self.share_any(),
            &self.build,
            &self.treat[1],
            &self.treat[0],
            &self.walk,
        ]
    }
}

fn pick<R: Rng + ?Sized>(options: &[MacroAction], rng: &mut R) -> Option<MacroAction> {
    options.choose(rng).cloned()
}

/// The hierarchical policy: a uniformly random macro from the first
/// non-empty level of cure, treat 3, share, build, treat 2, treat 1, walk.
pub fn hpa_next<R: Rng + ?Sized>(state: &GameState, rng: &mut R) -> MacroAction {
    let buckets = Buckets::of(state);
    buckets
        .hierarchy()
        .iter()
        .find_map(|level| pick(level, rng))
        .expect("walk-away level is never empty")
}

/// The random-order policy: cure, treat (3, then 2, then 1 cubes), share and
/// build are consulted in a fresh random order; walking away is the fallback.
pub fn rpa_next<R: Rng + ?Sized>(state: &GameState, rng: &mut R) -> MacroAction {
    let b = Buckets::of(state);
    let mut order: [&[MacroAction]; 4] = [&b.cure, b.treat_any(), b.share_any(), &b.build];
    order.shuffle(rng);
    order
        .iter()
        .find_map(|cat| pick(cat, rng))
        .or_else(|| pick(&b.walk, rng))
        .expect("walk-away macros are never empty")
}
