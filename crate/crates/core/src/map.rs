//! City graph, disease colors and compact card sets.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::MapError;

/// The bundled world board in the line-oriented map format.
pub const WORLD_MAP_V1: &str = include_str!("../data/world_map_v1.txt");

/// Maximum number of cities a [`CardSet`] can address.
pub const MAX_CITIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Blue,
    Yellow,
    Black,
    Red,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Blue, Color::Yellow, Color::Black, Color::Red];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Color {
        Color::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Yellow => "yellow",
            Color::Black => "black",
            Color::Red => "red",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blue" => Ok(Color::Blue),
            "yellow" => Ok(Color::Yellow),
            "black" => Ok(Color::Black),
            "red" => Ok(Color::Red),
            other => Err(MapError::Parse(alloc::format!("unknown color `{other}`"))),
        }
    }
}

/// Index of a city on the board. Also identifies its city card and infection card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CityId(pub u8);

impl CityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of city cards (or cities) as a bitmask over city ids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CardSet(pub u64);

impl CardSet {
    pub const EMPTY: CardSet = CardSet(0);

    #[inline]
    pub fn single(city: CityId) -> CardSet {
        CardSet(1u64 << city.0)
    }

    #[inline]
    pub fn contains(self, city: CityId) -> bool {
        self.0 & (1u64 << city.0) != 0
    }

    #[inline]
    pub fn insert(&mut self, city: CityId) {
        self.0 |= 1u64 << city.0;
    }

    #[inline]
    pub fn remove(&mut self, city: CityId) {
        self.0 &= !(1u64 << city.0);
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersect(self, other: CardSet) -> CardSet {
        CardSet(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: CardSet) -> CardSet {
        CardSet(self.0 | other.0)
    }

    #[inline]
    pub fn minus(self, other: CardSet) -> CardSet {
        CardSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: CardSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Cards in ascending id order.
    pub fn iter(self) -> CardIter {
        CardIter(self.0)
    }
}

impl FromIterator<CityId> for CardSet {
    fn from_iter<I: IntoIterator<Item = CityId>>(iter: I) -> Self {
        let mut set = CardSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

pub struct CardIter(u64);

impl Iterator for CardIter {
    type Item = CityId;

    #[inline]
    fn next(&mut self) -> Option<CityId> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(CityId(bit as u8))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct City {
    pub name: String,
    pub color: Color,
}

/// Undirected city graph with per-color card masks and all-pairs drive distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CityMap {
    cities: Vec<City>,
    adjacency: Vec<Vec<CityId>>,
    color_masks: [CardSet; 4],
    drive_distance: Vec<u8>,
    start: CityId,
}

impl CityMap {
    /// Builds a graph from explicit parts. Only structural checks are applied
    /// (ids in range, symmetric adjacency, no self-loops); use
    /// [`CityMap::validate_standard`] for the full-board invariants.
    pub fn from_parts(
        cities: Vec<City>,
        edges: &[(CityId, CityId)],
        start: CityId,
    ) -> Result<CityMap, MapError> {
        let n = cities.len();
        if n == 0 || n > MAX_CITIES {
            return Err(MapError::Invalid(alloc::format!("city count {n} out of range")));
        }
        if start.index() >= n {
            return Err(MapError::Invalid("start city out of range".to_string()));
        }
        let mut adjacency = alloc::vec![Vec::new(); n];
        for &(a, b) in edges {
            if a.index() >= n || b.index() >= n {
                return Err(MapError::Invalid(alloc::format!("edge {a}-{b} out of range")));
            }
            if a == b {
                return Err(MapError::Invalid(alloc::format!("self-loop at {a}")));
            }
            if adjacency[a.index()].contains(&b) {
                return Err(MapError::Invalid(alloc::format!(
                    "duplicate edge {}-{}",
                    cities[a.index()].name,
                    cities[b.index()].name
                )));
            }
            adjacency[a.index()].push(b);
            adjacency[b.index()].push(a);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        let mut color_masks = [CardSet::EMPTY; 4];
        for (i, c) in cities.iter().enumerate() {
            color_masks[c.color.index()].insert(CityId(i as u8));
        }
        let drive_distance = all_pairs_bfs(&adjacency);
        Ok(CityMap { cities, adjacency, color_masks, drive_distance, start })
    }

    /// Parses the line-oriented map format (`[cities]` rows `id,name,color`,
    /// `[edges]` rows `name,name`). The start city is Atlanta.
    pub fn parse(text: &str) -> Result<CityMap, MapError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Cities,
            Edges,
        }
        let mut section = Section::None;
        let mut cities: Vec<(usize, City)> = Vec::new();
        let mut edge_names: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[cities]" => {
                    section = Section::Cities;
                    continue;
                }
                "[edges]" => {
                    section = Section::Edges;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match section {
                Section::Cities => {
                    if fields.len() != 3 {
                        return Err(MapError::Parse(alloc::format!(
                            "line {}: expected `id,name,color`",
                            lineno + 1
                        )));
                    }
                    let id: usize = fields[0].parse().map_err(|_| {
                        MapError::Parse(alloc::format!("line {}: bad city id", lineno + 1))
                    })?;
                    let color = fields[2].parse()?;
                    cities.push((id, City { name: fields[1].to_string(), color }));
                }
                Section::Edges => {
                    if fields.len() != 2 {
                        return Err(MapError::Parse(alloc::format!(
                            "line {}: expected `name,name`",
                            lineno + 1
                        )));
                    }
                    edge_names.push((fields[0].to_string(), fields[1].to_string()));
                }
                Section::None => {
                    return Err(MapError::Parse(alloc::format!(
                        "line {}: data outside a section",
                        lineno + 1
                    )));
                }
            }
        }
        cities.sort_by_key(|(id, _)| *id);
        for (expected, (id, _)) in cities.iter().enumerate() {
            if *id != expected {
                return Err(MapError::Parse(alloc::format!(
                    "city ids must be dense from 0; found {id} at position {expected}"
                )));
            }
        }
        let cities: Vec<City> = cities.into_iter().map(|(_, c)| c).collect();
        let lookup = |name: &str| -> Result<CityId, MapError> {
            cities
                .iter()
                .position(|c| c.name == name)
                .map(|i| CityId(i as u8))
                .ok_or_else(|| MapError::Parse(alloc::format!("unknown city `{name}` in edge list")))
        };
        let mut edges = Vec::with_capacity(edge_names.len());
        for (a, b) in &edge_names {
            edges.push((lookup(a)?, lookup(b)?));
        }
        let start = lookup("Atlanta")?;
        CityMap::from_parts(cities, &edges, start)
    }

    /// The bundled 48-city world board.
    pub fn world() -> CityMap {
        CityMap::parse(WORLD_MAP_V1).expect("bundled map is valid")
    }

    /// Full-board invariants: 48 cities, 12 per color, connected graph, start city present.
    pub fn validate_standard(&self) -> Result<(), MapError> {
        if self.cities.len() != 48 {
            return Err(MapError::Invalid(alloc::format!(
                "expected 48 cities, found {}",
                self.cities.len()
            )));
        }
        for color in Color::ALL {
            let n = self.color_masks[color.index()].len();
            if n != 12 {
                return Err(MapError::Invalid(alloc::format!("{color} has {n} cities, expected 12")));
            }
        }
        if !self.is_connected() {
            return Err(MapError::Invalid("city graph is not connected".to_string()));
        }
        for (i, list) in self.adjacency.iter().enumerate() {
            for n in list {
                if !self.adjacency[n.index()].contains(&CityId(i as u8)) {
                    return Err(MapError::Invalid("adjacency is not symmetric".to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        self.drive_distance.iter().all(|&d| d != u8::MAX)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cities.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    pub fn start(&self) -> CityId {
        self.start
    }

    pub fn city(&self, id: CityId) -> &City {
        &self.cities[id.index()]
    }

    pub fn cities(&self) -> &[City] {
        &self.cities
    }

    pub fn name(&self, id: CityId) -> &str {
        &self.cities[id.index()].name
    }

    #[inline]
    pub fn color(&self, id: CityId) -> Color {
        self.cities[id.index()].color
    }

    #[inline]
    pub fn neighbors(&self, id: CityId) -> &[CityId] {
        &self.adjacency[id.index()]
    }

    #[inline]
    pub fn color_mask(&self, color: Color) -> CardSet {
        self.color_masks[color.index()]
    }

    /// All cities as a set.
    pub fn all(&self) -> CardSet {
        if self.cities.len() == 64 {
            CardSet(u64::MAX)
        } else {
            CardSet((1u64 << self.cities.len()) - 1)
        }
    }

    /// Number of drive/ferry moves between two cities.
    #[inline]
    pub fn drive_distance(&self, a: CityId, b: CityId) -> u8 {
        self.drive_distance[a.index() * self.cities.len() + b.index()]
    }

    pub fn find(&self, name: &str) -> Option<CityId> {
        self.cities.iter().position(|c| c.name == name).map(|i| CityId(i as u8))
    }

    pub fn ids(&self) -> impl Iterator<Item = CityId> + '_ {
        (0..self.cities.len()).map(|i| CityId(i as u8))
    }

    /// Undirected edges with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(CityId, CityId)> {
        let mut out = Vec::new();
        for (i, list) in self.adjacency.iter().enumerate() {
            for &n in list {
                if (i as u8) < n.0 {
                    out.push((CityId(i as u8), n));
                }
            }
        }
        out
    }

    /// Hand count of `color` cards in `hand`.
    #[inline]
    pub fn count_color(&self, hand: CardSet, color: Color) -> u32 {
        hand.intersect(self.color_masks[color.index()]).0.count_ones()
    }
}

fn all_pairs_bfs(adjacency: &[Vec<CityId>]) -> Vec<u8> {
    let n = adjacency.len();
    let mut dist = alloc::vec![u8::MAX; n * n];
    let mut queue = Vec::with_capacity(n);
    for src in 0..n {
        let row = &mut dist[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push(src);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for v in &adjacency[u] {
                if row[v.index()] == u8::MAX {
                    row[v.index()] = row[u] + 1;
                    queue.push(v.index());
                }
            }
        }
    }
    dist
}
