//! The synthetic city: points of interest and their pairwise travel matrices.

mod generate;
mod io;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Bucket, MINUTES_PER_DAY};

pub use generate::{generate_map, GenerationConfig, OpeningHours, PopularityProfile};
pub use io::{load_map, map_hash, save_map, to_canonical_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PoiId(pub u32);

impl PoiId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PoiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Apartment,
    Company,
    Charging,
    Cafe,
    Gym,
    Market,
    Restaurant,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Apartment,
        Category::Company,
        Category::Charging,
        Category::Cafe,
        Category::Gym,
        Category::Market,
        Category::Restaurant,
    ];

    /// Categories with a stay duration; the only ones that can be errands.
    pub const DWELL_BEARING: [Category; 5] = [
        Category::Charging,
        Category::Cafe,
        Category::Gym,
        Category::Market,
        Category::Restaurant,
    ];

    /// Base stay in minutes at zero popularity.
    pub const fn base_dwell(self) -> Option<u32> {
        match self {
            Category::Apartment | Category::Company => None,
            Category::Charging => Some(30),
            Category::Cafe => Some(5),
            Category::Gym => Some(25),
            Category::Market => Some(20),
            Category::Restaurant => Some(60),
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Category::Apartment => "apartment",
            Category::Company => "company",
            Category::Charging => "charging",
            Category::Cafe => "cafe",
            Category::Gym => "gym",
            Category::Market => "market",
            Category::Restaurant => "restaurant",
        }
    }

    /// Human phrasing used in question text.
    pub const fn noun(self) -> &'static str {
        match self {
            Category::Apartment => "apartment",
            Category::Company => "company",
            Category::Charging => "charging station",
            Category::Cafe => "café",
            Category::Gym => "gym",
            Category::Market => "market",
            Category::Restaurant => "restaurant",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poi {
    pub id: PoiId,
    pub name: String,
    pub category: Category,
    pub x_km: f64,
    pub y_km: f64,
    pub brand: Option<String>,
    pub price_level: u8,
    pub open_minute: u16,
    pub close_minute: u16,
    pub base_dwell: Option<u32>,
    pub popularity: [u8; 24],
}

impl Poi {
    pub fn always_open(&self) -> bool {
        self.open_minute == 0 && self.close_minute == MINUTES_PER_DAY
    }

    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(format!("poi {} ({}): {msg}", self.id, self.name)));
        if self.name.trim().is_empty() {
            return fail("empty name".into());
        }
        if self.base_dwell != self.category.base_dwell() {
            return fail(format!(
                "base dwell {:?} does not match category {} ({:?})",
                self.base_dwell,
                self.category,
                self.category.base_dwell()
            ));
        }
        if !(1..=3).contains(&self.price_level) {
            return fail(format!("price level {} outside 1..3", self.price_level));
        }
        if self.open_minute >= self.close_minute || self.close_minute > MINUTES_PER_DAY {
            return fail(format!(
                "opening hours {}..{} are not a window within one day",
                self.open_minute, self.close_minute
            ));
        }
        if let Some((hour, p)) = self.popularity.iter().enumerate().find(|(_, &p)| p > 100) {
            return fail(format!("popularity[{hour}] = {p} outside 0..100"));
        }
        if !self.x_km.is_finite() || !self.y_km.is_finite() {
            return fail("non-finite coordinates".into());
        }
        Ok(())
    }
}

/// Pairwise travel data, stored row-major by POI id.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    n: usize,
    drive: [Vec<u32>; 4],
    walk: Vec<u32>,
    distance: Vec<f64>,
}

impl TravelMatrix {
    /// Builds a matrix from flat row-major arrays; lengths must equal `n * n`.
    pub fn from_parts(n: usize, drive: [Vec<u32>; 4], walk: Vec<u32>, distance: Vec<f64>) -> Result<Self> {
        let cells = n * n;
        for (b, rows) in drive.iter().enumerate() {
            if rows.len() != cells {
                return Err(Error::Validation(format!(
                    "drive_minutes[{b}] has {} cells, expected {cells}",
                    rows.len()
                )));
            }
        }
        if walk.len() != cells || distance.len() != cells {
            return Err(Error::Validation(format!(
                "walk/distance matrices must have {cells} cells"
            )));
        }
        let matrix = TravelMatrix {
            n,
            drive,
            walk,
            distance,
        };
        matrix.check_structure()?;
        Ok(matrix)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn drive(&self, bucket: Bucket, from: PoiId, to: PoiId) -> u32 {
        self.drive[bucket.index()][from.index() * self.n + to.index()]
    }

    #[inline]
    pub fn walk(&self, from: PoiId, to: PoiId) -> u32 {
        self.walk[from.index() * self.n + to.index()]
    }

    #[inline]
    pub fn distance(&self, from: PoiId, to: PoiId) -> f64 {
        self.distance[from.index() * self.n + to.index()]
    }

    pub(crate) fn drive_rows(&self, bucket: Bucket) -> &[u32] {
        &self.drive[bucket.index()]
    }

    pub(crate) fn walk_rows(&self) -> &[u32] {
        &self.walk
    }

    pub(crate) fn distance_rows(&self) -> &[f64] {
        &self.distance
    }

    fn check_structure(&self) -> Result<()> {
        for i in 0..self.n {
            let d = i * self.n + i;
            for b in Bucket::ALL {
                if self.drive[b.index()][d] != 0 {
                    return Err(Error::Validation(format!(
                        "drive_minutes[{}][{i}][{i}] must be 0",
                        b.label()
                    )));
                }
            }
            if self.walk[d] != 0 || self.distance[d] != 0.0 {
                return Err(Error::Validation(format!("walk/distance diagonal at {i} must be 0")));
            }
        }
        if let Some(bad) = self.distance.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Validation(format!(
                "distance_km[{}][{}] must be a non-negative number",
                bad / self.n,
                bad % self.n
            )));
        }
        Ok(())
    }

    /// Cells where the congestion or walking-speed relations fail.
    ///
    /// Generated maps never have any. Maps built from external data are
    /// allowed to, so loading does not reject them.
    pub fn congestion_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let free = &self.drive[Bucket::B00.index()];
        for (cell, &free_flow) in free.iter().enumerate() {
            let (i, j) = (cell / self.n, cell % self.n);
            for rush in [Bucket::B09, Bucket::B18] {
                if self.drive[rush.index()][cell] < free_flow {
                    out.push(format!("drive[{}][{i}][{j}] < drive[00:00][{i}][{j}]", rush.label()));
                }
            }
            if self.distance[cell] > 0.5 && self.walk[cell] < free_flow {
                out.push(format!("walk[{i}][{j}] < drive[00:00][{i}][{j}]"));
            }
        }
        out
    }
}

/// The complete, immutable city used by every other module.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub pois: Vec<Poi>,
    pub matrix: TravelMatrix,
    pub seed: u64,
    /// Unordered category pairs that may not appear in the same query.
    /// Kept as strings because they may name categories absent from the map.
    pub exclusions: Vec<(String, String)>,
}

impl WorldMap {
    pub fn new(pois: Vec<Poi>, matrix: TravelMatrix, seed: u64, exclusions: Vec<(String, String)>) -> Result<Self> {
        let map = WorldMap {
            pois,
            matrix,
            seed,
            exclusions,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.pois.len() != self.matrix.len() {
            return Err(Error::Validation(format!(
                "{} POIs but travel matrices are {}x{}",
                self.pois.len(),
                self.matrix.len(),
                self.matrix.len()
            )));
        }
        let mut names = HashSet::new();
        for (index, poi) in self.pois.iter().enumerate() {
            if poi.id.index() != index {
                return Err(Error::Validation(format!(
                    "poi at position {index} has id {}; ids must be dense and ordered",
                    poi.id
                )));
            }
            poi.check()?;
            if !names.insert(poi.name.as_str()) {
                return Err(Error::Validation(format!("duplicate POI name `{}`", poi.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pois.is_empty()
    }

    pub fn poi(&self, id: PoiId) -> Result<&Poi> {
        self.pois.get(id.index()).ok_or(Error::UnknownPoi(id))
    }

    pub fn poi_by_name(&self, name: &str) -> Option<&Poi> {
        self.pois.iter().find(|p| p.name == name)
    }

    pub fn pois_of(&self, category: Category) -> impl Iterator<Item = &Poi> + '_ {
        self.pois.iter().filter(move |p| p.category == category)
    }

    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut counts = BTreeMap::new();
        for poi in &self.pois {
            *counts.entry(poi.category).or_insert(0) += 1;
        }
        counts
    }

    /// Road distance between two POIs in kilometers.
    pub fn distance_km(&self, from: PoiId, to: PoiId) -> Result<f64> {
        self.poi(from)?;
        self.poi(to)?;
        Ok(self.matrix.distance(from, to))
    }

    pub fn is_excluded(&self, a: &str, b: &str) -> bool {
        self.exclusions
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// First excluded pair found among `categories`, if any.
    pub fn excluded_pair<'a>(&self, categories: &'a [Category]) -> Option<(&'a Category, &'a Category)> {
        categories.iter().enumerate().find_map(|(i, a)| {
            categories[i + 1..]
                .iter()
                .find(|b| self.is_excluded(a.as_str(), b.as_str()))
                .map(|b| (a, b))
        })
    }
}
