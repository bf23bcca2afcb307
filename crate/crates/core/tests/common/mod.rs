#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::subsequence;
use topkit::solver::{Departure, Itinerary, Objective, QuerySpec};
use topkit::time::{Bucket, ClockTime, Minutes};
use topkit::world::{generate_map, Category, GenerationConfig, Poi, PoiId, TravelMatrix, WorldMap};

pub const ORIGIN: PoiId = PoiId(0);
pub const DESTINATION: PoiId = PoiId(1);

pub fn seed7() -> &'static WorldMap {
    static MAP: OnceLock<WorldMap> = OnceLock::new();
    MAP.get_or_init(|| generate_map(7, &GenerationConfig::default()).unwrap())
}

#[derive(Debug, Clone)]
pub struct PoiSpec {
    pub category: Category,
    pub popularity: Vec<u8>,
    /// `None` means always open; otherwise (open hour, hours open).
    pub hours: Option<(u16, u16)>,
    pub brand: usize,
    pub price: u8,
}

fn poi_spec(category: impl Strategy<Value = Category>) -> impl Strategy<Value = PoiSpec> {
    (
        category,
        prop::collection::vec(0u8..=100, 24),
        prop::option::weighted(0.15, (0u16..16, 4u16..=16)),
        0usize..2,
        1u8..=3,
    )
        .prop_map(|(category, popularity, hours, brand, price)| PoiSpec {
            category,
            popularity,
            hours,
            brand,
            price,
        })
}

pub const BRANDS: [&str; 2] = ["Volt", "Spark"];

/// Small maps with arbitrary, asymmetric travel tables. Nothing here obeys
/// the triangle inequality or the congestion ordering, which is the point.
pub fn arb_world(max_extra: usize) -> impl Strategy<Value = WorldMap> {
    let errand = prop::sample::select(vec![
        Category::Charging,
        Category::Charging,
        Category::Cafe,
        Category::Gym,
        Category::Market,
        Category::Restaurant,
    ]);
    (max_extra / 2..=max_extra)
        .prop_flat_map(move |extra| {
            let n = extra + 2;
            (
                prop::collection::vec(poi_spec(errand.clone()), extra),
                prop::collection::vec(prop::collection::vec(1u32..60, n * n), 4),
                prop::collection::vec(1u32..25, n * n),
            )
        })
        .prop_map(|(extras, drive, walk)| build_world(&extras, drive, walk))
}

pub fn build_world(extras: &[PoiSpec], drive: Vec<Vec<u32>>, walk: Vec<u32>) -> WorldMap {
    let n = extras.len() + 2;
    let mut pois = vec![
        plain_poi(0, Category::Apartment, &[0; 24], None, 0, 1),
        plain_poi(1, Category::Company, &[0; 24], None, 0, 1),
    ];
    for (i, spec) in extras.iter().enumerate() {
        pois.push(plain_poi(
            i as u32 + 2,
            spec.category,
            &spec.popularity,
            spec.hours,
            spec.brand,
            spec.price,
        ));
    }
    let zero_diag = |mut cells: Vec<u32>| {
        for i in 0..n {
            cells[i * n + i] = 0;
        }
        cells
    };
    let mut drive = drive.into_iter().map(zero_diag);
    let drive = [(); 4].map(|_| drive.next().unwrap());
    let distance = (0..n * n)
        .map(|c| (pois[c / n].x_km - pois[c % n].x_km).abs())
        .collect();
    let matrix = TravelMatrix::from_parts(n, drive, zero_diag(walk), distance).unwrap();
    WorldMap::new(pois, matrix, 0, Vec::new()).unwrap()
}

fn plain_poi(
    id: u32,
    category: Category,
    popularity: &[u8],
    hours: Option<(u16, u16)>,
    brand: usize,
    price: u8,
) -> Poi {
    let (open, close) = match hours {
        None => (0, 1440),
        Some((h, len)) => (h * 60, ((h + len) * 60).min(1440)),
    };
    let branded = matches!(category, Category::Charging | Category::Cafe);
    Poi {
        id: PoiId(id),
        name: format!("{} {id}", category.as_str()),
        category,
        x_km: id as f64 * 0.7,
        y_km: 0.0,
        brand: branded.then(|| BRANDS[brand].to_string()),
        price_level: price,
        open_minute: open,
        close_minute: close,
        base_dwell: category.base_dwell(),
        popularity: popularity.try_into().unwrap(),
    }
}

pub fn arb_departure() -> impl Strategy<Value = Departure> {
    prop_oneof![
        (0u16..1440).prop_map(|m| Departure::Fixed(ClockTime::new(m).unwrap())),
        prop::collection::vec(0u16..1440, 1..4)
            .prop_map(|ms| Departure::Candidates(ms.into_iter().map(|m| ClockTime::new(m).unwrap()).collect())),
        subsequence(Bucket::anchors(), 1..=4).prop_map(Departure::Candidates),
    ]
}

pub fn arb_objective() -> impl Strategy<Value = Objective> {
    prop::sample::select(vec![Objective::TotalTime, Objective::TotalPrice, Objective::TotalDwell])
}

/// Queries from `ORIGIN` to `DESTINATION` with up to `max_cats` categories,
/// optionally a brand preference and a dwell override.
pub fn arb_query(max_cats: usize) -> impl Strategy<Value = QuerySpec> {
    (
        subsequence(Category::DWELL_BEARING.to_vec(), 0..=max_cats).prop_shuffle(),
        any::<bool>(),
        prop::option::weighted(0.2, (prop::sample::select(Category::DWELL_BEARING.to_vec()), 0usize..2)),
        prop::option::weighted(0.4, (prop::sample::select(Category::DWELL_BEARING.to_vec()), 5u32..60)),
        arb_departure(),
        arb_objective(),
    )
        .prop_map(move |(cats, charge, brand, dwell, departure, objective)| {
            let mut q = QuerySpec::new(ORIGIN, DESTINATION, ClockTime::MIDNIGHT).with_categories(&cats);
            q.departure = departure;
            q.objective = objective;
            q.charge_required = charge && cats.len() < max_cats.max(1);
            if let Some((category, b)) = brand {
                q.brand_preferences.insert(category, BRANDS[b].to_string());
            }
            if let Some((category, m)) = dwell {
                q.dwell_overrides.insert(category, Minutes::whole(m));
            }
            q
        })
}

/// Independent re-statement of the forward simulation without absorption,
/// in whole hundredths of a minute.
pub fn reference_total(map: &WorldMap, itinerary: &Itinerary, overrides: &BTreeMap<Category, Minutes>) -> i64 {
    let start = itinerary.departure.minute_of_day() as i64;
    let clock = |elapsed: i64| ((start + elapsed / 100) % 1440) as u16;
    let bucket = |minute: u16| match minute {
        360..=629 => Bucket::B09,
        630..=899 => Bucket::B12,
        900..=1259 => Bucket::B18,
        _ => Bucket::B00,
    };
    let stay = |id: PoiId, elapsed: i64| {
        let poi = &map.pois[id.index()];
        if let Some(m) = overrides.get(&poi.category) {
            return m.hundredths();
        }
        let hour = clock(elapsed) as usize / 60;
        poi.base_dwell
            .map_or(0, |b| b as i64 * (100 + poi.popularity[hour] as i64))
    };
    let stops = &itinerary.stops;
    let mut elapsed = stay(stops[0], 0);
    for pair in stops.windows(2) {
        elapsed += 100 * map.matrix.drive(bucket(clock(elapsed)), pair[0], pair[1]) as i64;
        elapsed += stay(pair[1], elapsed);
    }
    elapsed
}
