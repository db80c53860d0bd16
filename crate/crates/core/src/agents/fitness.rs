//! State evaluation: six base measures, pairwise means and the won/lost
//! wrappers. Every value lies in `[0, 1]`, higher is better.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::map::Color;
use crate::planner::cure_ability;
use crate::rules::{GameState, Status, CUBES_PER_COLOR, MAX_OUTBREAKS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFitness {
    /// Share of diseases cured.
    CuresDone,
    /// Mean cure ability plus a bonus for diseases already cured.
    CureAbility,
    /// Mean share of cubes left in the supply.
    CubesMean,
    /// Smallest share of cubes left in the supply.
    CubesMin,
    /// Product of the per-color supply shares.
    CubesProduct,
    /// Outbreak headroom.
    Outbreaks,
}

impl BaseFitness {
    pub const ALL: [BaseFitness; 6] = [
        BaseFitness::CuresDone,
        BaseFitness::CureAbility,
        BaseFitness::CubesMean,
        BaseFitness::CubesMin,
        BaseFitness::CubesProduct,
        BaseFitness::Outbreaks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFitness::CuresDone => "f_od",
            BaseFitness::CureAbility => "f_oa",
            BaseFitness::CubesMean => "f_ca",
            BaseFitness::CubesMin => "f_cm",
            BaseFitness::CubesProduct => "f_cp",
            BaseFitness::Outbreaks => "f_b",
        }
    }

    /// Raw value. `literal_oa` drops the division of the cure bonus by four,
    /// which lets [`BaseFitness::CureAbility`] exceed 1.
    pub fn value(self, state: &GameState, literal_oa: bool) -> f64 {
        let supply_share =
            |c: Color| state.supply[c.index()] as f64 / CUBES_PER_COLOR as f64;
        match self {
            BaseFitness::CuresDone => state.cured_count() as f64 / 4.0,
            BaseFitness::CureAbility => {
                let mean = cure_ability(state).team.iter().sum::<f64>() / 4.0;
                let cured = state.cured_count() as f64;
                let bonus = if literal_oa { 0.3 * cured } else { 0.3 * cured / 4.0 };
                (mean + bonus) / 1.3
            }
            BaseFitness::CubesMean => Color::ALL.iter().map(|&c| supply_share(c)).sum::<f64>() / 4.0,
            BaseFitness::CubesMin => {
                Color::ALL.iter().map(|&c| supply_share(c)).fold(f64::INFINITY, f64::min)
            }
            BaseFitness::CubesProduct => Color::ALL.iter().map(|&c| supply_share(c)).product(),
            BaseFitness::Outbreaks => {
                1.0 - state.outbreaks.min(MAX_OUTBREAKS) as f64 / MAX_OUTBREAKS as f64
            }
        }
    }
}

impl FromStr for BaseFitness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BaseFitness::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| alloc::format!("unknown fitness `{}`", s.trim()))
    }
}

/// How the end of the game is folded into the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wrapper {
    Raw,
    /// 1 when won, 0 when lost.
    WinLose,
    /// 1 when won, a fraction of the score when lost.
    Penalty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessSpec {
    /// One or two measures; two are averaged.
    pub base: Vec<BaseFitness>,
    pub wrapper: Wrapper,
    /// Fraction of the score kept by [`Wrapper::Penalty`] on a loss.
    pub c_p: f64,
    pub literal_oa: bool,
}

impl FitnessSpec {
    pub fn new(base: &[BaseFitness], wrapper: Wrapper) -> FitnessSpec {
        FitnessSpec { base: base.to_vec(), wrapper, c_p: 0.1, literal_oa: false }
    }

    /// `p(mean(f_oa,f_cm))`
    pub fn tuned() -> FitnessSpec {
        FitnessSpec::new(&[BaseFitness::CureAbility, BaseFitness::CubesMin], Wrapper::Penalty)
    }

    pub fn base_value(&self, state: &GameState) -> f64 {
        let sum: f64 = self.base.iter().map(|b| b.value(state, self.literal_oa)).sum();
        sum / self.base.len().max(1) as f64
    }

    pub fn wrap(&self, status: Status, f: f64) -> f64 {
        match (self.wrapper, status) {
            (Wrapper::Raw, _) | (_, Status::Ongoing) => f,
            (_, Status::Won) => 1.0,
            (Wrapper::WinLose, Status::Lost(_)) => 0.0,
            (Wrapper::Penalty, Status::Lost(_)) => self.c_p * f,
        }
    }
}

pub fn evaluate_state(state: &GameState, spec: &FitnessSpec) -> f64 {
    spec.wrap(state.status, spec.base_value(state))
}

impl fmt::Display for FitnessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = match self.base.as_slice() {
            [one] => one.name().to_string(),
            many => {
                let names: Vec<&str> = many.iter().map(|b| b.name()).collect();
                alloc::format!("mean({})", names.join(","))
            }
        };
        match self.wrapper {
            Wrapper::Raw => f.write_str(&inner),
            Wrapper::WinLose => write!(f, "w({inner})"),
            Wrapper::Penalty => write!(f, "p({inner})"),
        }
    }
}

fn strip_call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

impl FromStr for FitnessSpec {
    type Err = String;

    /// Accepts `f_xx`, `mean(f_xx,f_yy)`, each optionally inside `w(..)` or `p(..)`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (wrapper, inner) = if let Some(rest) = strip_call(s, "w") {
            (Wrapper::WinLose, rest.trim())
        } else if let Some(rest) = strip_call(s, "p") {
            (Wrapper::Penalty, rest.trim())
        } else {
            (Wrapper::Raw, s)
        };
        let base: Vec<BaseFitness> = if let Some(args) = strip_call(inner, "mean") {
            args.split(',').map(str::parse).collect::<Result<_, _>>()?
        } else {
            alloc::vec![inner.parse()?]
        };
        if base.is_empty() || base.len() > 2 {
            return Err(alloc::format!("expected one or two measures in `{s}`"));
        }
        Ok(FitnessSpec::new(&base, wrapper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::CityMap;
    use crate::rules::{GameConfig, LossCause};
    use crate::seed::GameRng;
    use alloc::sync::Arc;
    use rand::SeedableRng;

    fn fresh() -> GameState {
        GameState::new_game(
            Arc::new(CityMap::world()),
            &GameConfig::standard(4, 4, 9),
            &mut GameRng::seed_from_u64(9),
        )
        .unwrap()
    }

    #[test]
    fn two_cures_is_half() {
        let mut s = fresh();
        s.cured = [true, false, true, false];
        let spec: FitnessSpec = "f_od".parse().unwrap();
        assert_eq!(evaluate_state(&s, &spec), 0.5);
    }

    #[test]
    fn empty_board_has_full_supply() {
        let mut s = fresh();
        for c in s.cubes.iter_mut() {
            *c = [0; 4];
        }
        s.supply = [24; 4];
        assert_eq!(evaluate_state(&s, &"f_cm".parse().unwrap()), 1.0);
    }

    #[test]
    fn penalty_keeps_a_tenth() {
        let spec = FitnessSpec::new(&[BaseFitness::CubesProduct], Wrapper::Penalty);
        let v = spec.wrap(Status::Lost(LossCause::Cubes), 0.6);
        assert!((v - 0.06).abs() < 1e-12);
        let w = FitnessSpec::new(&[BaseFitness::CubesMean], Wrapper::WinLose);
        assert_eq!(w.wrap(Status::Won, 0.2), 1.0);
        assert_eq!(w.wrap(Status::Lost(LossCause::Outbreaks), 0.9), 0.0);
        assert_eq!(w.wrap(Status::Ongoing, 0.3), 0.3);
    }

    #[test]
    fn cure_ability_all_cured_is_one() {
        let mut s = fresh();
        s.cured = [true; 4];
        let v = BaseFitness::CureAbility.value(&s, false);
        assert!((v - 1.0).abs() < 1e-12);
        assert!(BaseFitness::CureAbility.value(&s, true) > 1.0);
    }

    #[test]
    fn names_round_trip() {
        for text in ["f_od", "w(f_cp)", "p(mean(f_oa,f_cm))", "mean(f_ca,f_b)"] {
            let spec: FitnessSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!(FitnessSpec::tuned().to_string(), "p(mean(f_oa,f_cm))");
        assert!("q(f_od)".parse::<FitnessSpec>().is_err());
        assert!("mean(f_od,f_oa,f_b)".parse::<FitnessSpec>().is_err());
        assert!("p( mean( f_oa , f_cm ) )".parse::<FitnessSpec>().is_ok());
    }
}
