//! Loading city maps from disk and fingerprinting them.

use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use pandemic_core::map::{CityMap, WORLD_MAP_V1};
use sha2::{Digest, Sha256};

/// A parsed map together with the checksum of its source text.
#[derive(Debug, Clone)]
pub struct LoadedMap {
    pub map: Arc<CityMap>,
    pub checksum: String,
}

pub fn checksum(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// The built-in world map.
pub fn builtin() -> LoadedMap {
    from_text(WORLD_MAP_V1).expect("built-in map is valid")
}

pub fn from_text(text: &str) -> Result<LoadedMap> {
    let map = CityMap::parse(text)?;
    map.validate_standard()?;
    Ok(LoadedMap { map: Arc::new(map), checksum: checksum(text) })
}

/// Loads `path`, or the built-in map when `path` is `None`.
pub fn load(path: Option<&Path>) -> Result<LoadedMap> {
    match path {
        None => Ok(builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading map {}", p.display()))?;
            from_text(&text).with_context(|| format!("parsing map {}", p.display()))
        }
    }
}
