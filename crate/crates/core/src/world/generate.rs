use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Category, Poi, PoiId, TravelMatrix, WorldMap};
use crate::error::{Error, Result};
use crate::time::{Bucket, MINUTES_PER_DAY};

/// Hourly crowd profile: a flat baseline plus Gaussian bumps at peak hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityProfile {
    pub base: f64,
    /// `(hour, amplitude)` pairs.
    #[serde(default)]
    pub peaks: Vec<(u8, f64)>,
    #[serde(default = "default_peak_width")]
    pub width_hours: f64,
}

fn default_peak_width() -> f64 {
    1.5
}

impl PopularityProfile {
    fn flat(base: f64) -> Self {
        PopularityProfile {
            base,
            peaks: Vec::new(),
            width_hours: default_peak_width(),
        }
    }

    fn peaked(base: f64, peaks: &[(u8, f64)], width_hours: f64) -> Self {
        PopularityProfile {
            base,
            peaks: peaks.to_vec(),
            width_hours,
        }
    }

    /// Profile value at `hour`, before per-POI jitter.
    pub fn at(&self, hour: usize) -> f64 {
        let two_var = 2.0 * self.width_hours * self.width_hours;
        self.peaks.iter().fold(self.base, |acc, &(peak, amp)| {
            let d = (hour as f64 - peak as f64).abs();
            let d = d.min(24.0 - d);
            acc + amp * (-(d * d) / two_var).exp()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningHours {
    pub open_minute: u16,
    pub close_minute: u16,
}

impl OpeningHours {
    pub const ALWAYS: OpeningHours = OpeningHours {
        open_minute: 0,
        close_minute: MINUTES_PER_DAY,
    };

    const fn hours(open: u16, close: u16) -> Self {
        OpeningHours {
            open_minute: open * 60,
            close_minute: close * 60,
        }
    }
}

/// Every tunable constant of the synthetic city.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub counts: BTreeMap<Category, usize>,
    /// Side of the square city in kilometers.
    pub extent_km: f64,
    /// Road distance over straight-line distance.
    pub circuity: f64,
    /// Free-flow driving speeds, in [`Bucket::ALL`] order (00:00, 09:00, 12:00, 18:00).
    pub speeds_kmh: [f64; 4],
    /// Per-edge multiplicative noise on drive times, shared by all buckets.
    pub jitter: (f64, f64),
    pub walk_kmh: f64,
    pub popularity: BTreeMap<Category, PopularityProfile>,
    /// Per-POI offset added to the category profile, drawn from `-j..=j`.
    pub popularity_jitter: i32,
    /// Brands are handed out round-robin within each listed category.
    pub brands: BTreeMap<Category, Vec<String>>,
    pub hours: BTreeMap<Category, OpeningHours>,
    pub exclusions: Vec<(String, String)>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        use Category::*;
        let counts = [
            (Apartment, 6),
            (Company, 5),
            (Charging, 6),
            (Cafe, 9),
            (Gym, 6),
            (Market, 7),
            (Restaurant, 11),
        ]
        .into_iter()
        .collect();
        let popularity = [
            (Apartment, PopularityProfile::flat(5.0)),
            (Company, PopularityProfile::flat(5.0)),
            (Charging, PopularityProfile::flat(20.0)),
            (Cafe, PopularityProfile::peaked(10.0, &[(9, 70.0)], 2.0)),
            (Gym, PopularityProfile::peaked(10.0, &[(7, 60.0), (19, 65.0)], 1.5)),
            (Market, PopularityProfile::peaked(10.0, &[(17, 60.0)], 2.5)),
            (
                Restaurant,
                PopularityProfile::peaked(10.0, &[(12, 60.0), (18, 70.0)], 1.5),
            ),
        ]
        .into_iter()
        .collect();
        let brands = [
            (Charging, vec!["VoltHub", "AmpStation", "GridGo"]),
            (Cafe, vec!["Bluebird Coffee", "Morning Mug", "Daily Grind"]),
        ]
        .into_iter()
        .map(|(c, names)| (c, names.into_iter().map(String::from).collect()))
        .collect();
        let hours = [
            (Apartment, OpeningHours::ALWAYS),
            (Company, OpeningHours::ALWAYS),
            (Charging, OpeningHours::ALWAYS),
            (Cafe, OpeningHours::hours(7, 21)),
            (Gym, OpeningHours::hours(6, 23)),
            (Market, OpeningHours::hours(8, 22)),
            (Restaurant, OpeningHours::hours(10, 23)),
        ]
        .into_iter()
        .collect();
        GenerationConfig {
            counts,
            extent_km: 10.0,
            circuity: 1.3,
            speeds_kmh: [34.0, 22.0, 28.0, 20.0],
            jitter: (0.9, 1.1),
            walk_kmh: 4.8,
            popularity,
            popularity_jitter: 10,
            brands,
            hours,
            exclusions: vec![("gas".into(), "charging".into())],
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.counts.is_empty() {
            return bad("no category counts given".into());
        }
        if let Some((c, _)) = self.counts.iter().find(|(_, &n)| n == 0) {
            return bad(format!("count for {c} must be positive"));
        }
        if !(self.extent_km.is_finite() && self.extent_km > 0.0) {
            return bad(format!("city extent must be positive, got {}", self.extent_km));
        }
        if !(self.circuity.is_finite() && self.circuity > 0.0) {
            return bad(format!("circuity must be positive, got {}", self.circuity));
        }
        if let Some(s) = self.speeds_kmh.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return bad(format!("driving speeds must be positive, got {s}"));
        }
        if !(self.walk_kmh.is_finite() && self.walk_kmh > 0.0) {
            return bad(format!("walking speed must be positive, got {}", self.walk_kmh));
        }
        let (lo, hi) = self.jitter;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("jitter range ({lo}, {hi}) must satisfy 0 < lo <= hi"));
        }
        if self.popularity_jitter < 0 {
            return bad("popularity jitter must be non-negative".into());
        }
        for (c, h) in &self.hours {
            if h.open_minute >= h.close_minute || h.close_minute > MINUTES_PER_DAY {
                return bad(format!("opening hours for {c} are not a window within one day"));
            }
        }
        for (c, names) in &self.brands {
            if names.is_empty() {
                return bad(format!("brand list for {c} is empty"));
            }
        }
        let total: usize = self.counts.values().sum();
        if total > NAME_STEMS.len() {
            return bad(format!(
                "at most {} POIs can be named, asked for {total}",
                NAME_STEMS.len()
            ));
        }
        Ok(())
    }
}

const NAME_STEMS: [&str; 96] = [
    "Alder", "Amber", "Ash", "Aspen", "Bay", "Beacon", "Birch", "Bluff", "Brook", "Canal", "Cedar", "Chapel", "Cliff",
    "Clover", "Cobalt", "Copper", "Coral", "Crest", "Cypress", "Dale", "Delta", "Dune", "Elm", "Ember", "Fern",
    "Field", "Flint", "Forge", "Fox", "Garnet", "Glen", "Granite", "Grove", "Harbor", "Haven", "Hazel", "Heath",
    "Heron", "Hollow", "Ivy", "Jade", "Juniper", "Lake", "Larch", "Laurel", "Linden", "Lotus", "Maple", "Marsh",
    "Meadow", "Mesa", "Mill", "Mint", "Oak", "Onyx", "Orchard", "Park", "Pearl", "Pine", "Plaza", "Poplar", "Quarry",
    "Quartz", "Raven", "Reed", "Ridge", "River", "Rowan", "Sage", "Sandy", "Shore", "Slate", "Spruce", "Station",
    "Stone", "Summit", "Sunset", "Tide", "Timber", "Tower", "Tulip", "Union", "Vale", "Valley", "Vine", "Walnut",
    "Willow", "Windsor", "Wren", "Yarrow", "Yew", "Zephyr", "Harvest", "Lantern", "Orchid", "Keystone",
];

fn name_for(category: Category, stem: &str, brand: Option<&str>) -> String {
    match (category, brand) {
        (_, Some(brand)) => format!("{brand} {stem}"),
        (Category::Apartment, None) => format!("{stem} Apartments"),
        (Category::Company, None) => format!("{stem} Labs"),
        (Category::Charging, None) => format!("{stem} Charging"),
        (Category::Cafe, None) => format!("{stem} Café"),
        (Category::Gym, None) => format!("{stem} Fitness"),
        (Category::Market, None) => format!("{stem} Market"),
        (Category::Restaurant, None) => format!("{stem} Kitchen"),
    }
}

fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

/// Builds a city deterministically from `(seed, config)`.
pub fn generate_map(seed: u64, config: &GenerationConfig) -> Result<WorldMap> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut stems: Vec<&str> = NAME_STEMS.to_vec();
    stems.shuffle(&mut rng);

    let layout: Vec<Category> = Category::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, config.counts.get(&c).copied().unwrap_or(0)))
        .collect();
    let n = layout.len();

    let mut pois = Vec::with_capacity(n);
    let mut brand_cursor: BTreeMap<Category, usize> = BTreeMap::new();
    for (index, &category) in layout.iter().enumerate() {
        let x_km = round_to(rng.random::<f64>() * config.extent_km, 3);
        let y_km = round_to(rng.random::<f64>() * config.extent_km, 3);
        let price_level: u8 = rng.random_range(1..=3);
        let jitter = rng.random_range(-config.popularity_jitter..=config.popularity_jitter);

        let brand = config.brands.get(&category).map(|names| {
            let slot = brand_cursor.entry(category).or_insert(0);
            let brand = names[*slot % names.len()].clone();
            *slot += 1;
            brand
        });

        let profile = config.popularity.get(&category);
        let mut popularity = [0u8; 24];
        for (hour, p) in popularity.iter_mut().enumerate() {
            let base = profile.map_or(0.0, |prof| prof.at(hour)).round() as i32;
            *p = (base + jitter).clamp(0, 100) as u8;
        }

        let hours = config.hours.get(&category).copied().unwrap_or(OpeningHours::ALWAYS);
        pois.push(Poi {
            id: PoiId(index as u32),
            name: name_for(category, stems[index], brand.as_deref()),
            category,
            x_km,
            y_km,
            brand,
            price_level,
            open_minute: hours.open_minute,
            close_minute: hours.close_minute,
            base_dwell: category.base_dwell(),
            popularity,
        });
    }

    let cells = n * n;
    let mut distance = vec![0.0; cells];
    let mut walk = vec![0u32; cells];
    let mut drive: [Vec<u32>; 4] = std::array::from_fn(|_| vec![0u32; cells]);
    for i in 0..n {
        for j in (i + 1)..n {
            let jitter = rng.random_range(config.jitter.0..=config.jitter.1);
            let euclid = (pois[i].x_km - pois[j].x_km).hypot(pois[i].y_km - pois[j].y_km);
            let road = round_to(euclid * config.circuity, 1);
            let on_foot = (euclid / config.walk_kmh * 60.0).round() as u32;
            for (a, b) in [(i, j), (j, i)] {
                distance[a * n + b] = road;
                walk[a * n + b] = on_foot;
                for bucket in Bucket::ALL {
                    let speed = config.speeds_kmh[bucket.index()];
                    drive[bucket.index()][a * n + b] = (road / speed * 60.0 * jitter).round() as u32;
                }
            }
        }
    }

    let matrix = TravelMatrix::from_parts(n, drive, walk, distance)?;
    WorldMap::new(pois, matrix, seed, config.exclusions.clone())
}
