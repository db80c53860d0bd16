//! Rules engine and rolling-horizon agents for a simplified, four-role
//! variant of the cooperative board game Pandemic.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of a [`rules::GameState`] value and an explicit random stream;
//! file formats, the CLI and batch experiments live in `pandemic-lab`.
//!
//! * [`rules`]: setup, legal actions, draw/infect steps, end conditions.
//! * [`hidden`]: determinization of the face-down decks and plan rollouts.
//! * [`planner`]: movement plans, cure ability, macro-action families.
//! * [`agents`]: hierarchical and random-order policies, the 1+1 rolling
//!   horizon evolutionary agent, and state evaluation functions.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod error;
pub mod hidden;
pub mod map;
pub mod planner;
pub mod rules;
pub mod seed;

/// Crate version, recorded in experiment files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{MapError, RuleError};
pub use map::{CardSet, CityId, CityMap, Color};
pub use rules::{Action, GameConfig, GameState, LossCause, Phase, Role, Status};
