mod common;

use common::seed7;
use topkit::solver::nearest_poi;
use topkit::time::Bucket;
use topkit::world::{generate_map, load_map, save_map, Category, GenerationConfig, PoiId, WorldMap};

fn euclid(map: &WorldMap, i: usize, j: usize) -> f64 {
    let (a, b) = (&map.pois[i], &map.pois[j]);
    ((a.x_km - b.x_km).powi(2) + (a.y_km - b.y_km).powi(2)).sqrt()
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

#[test]
fn distances_recompute_from_coordinates() {
    let map = seed7();
    for (i, j) in pairs(map.len()) {
        let expected = (euclid(map, i, j) * 1.3 * 10.0).round() / 10.0;
        let stored = map.distance_km(PoiId(i as u32), PoiId(j as u32)).unwrap();
        assert!((stored - expected).abs() < 1e-9, "({i},{j}): {stored} vs {expected}");
        let walk = (euclid(map, i, j) / 4.8 * 60.0).round() as u32;
        assert_eq!(
            map.matrix.walk(PoiId(i as u32), PoiId(j as u32)),
            walk,
            "walk ({i},{j})"
        );
    }
}

#[test]
fn drive_times_share_one_jitter_per_edge() {
    // For each edge, every bucket's rounded time must be explained by the
    // same factor in [0.9, 1.1].
    let map = seed7();
    let speeds = [34.0, 22.0, 28.0, 20.0];
    for (i, j) in pairs(map.len()) {
        let (a, b) = (PoiId(i as u32), PoiId(j as u32));
        let road = map.matrix.distance(a, b);
        let (mut lo, mut hi) = (0.9f64, 1.1f64);
        for bucket in Bucket::ALL {
            let free = road / speeds[bucket.index()] * 60.0;
            let d = map.matrix.drive(bucket, a, b) as f64;
            if free > 0.0 {
                lo = lo.max((d - 0.5) / free);
                hi = hi.min((d + 0.5) / free);
            }
        }
        assert!(lo <= hi + 1e-12, "edge ({i},{j}) has no common jitter: [{lo}, {hi}]");
        assert_eq!(map.matrix.drive(Bucket::B09, a, b), map.matrix.drive(Bucket::B09, b, a));
    }
}

#[test]
fn nearest_matches_linear_scan() {
    let map = seed7();
    for origin in &map.pois {
        for category in Category::ALL {
            let mut best: Option<(f64, u32)> = None;
            for p in map.pois.iter().filter(|p| p.category == category && p.id != origin.id) {
                let d = map.matrix.distance(origin.id, p.id);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, p.id.0));
                }
            }
            let got = nearest_poi(map, origin.id, category);
            match best {
                Some((_, id)) => assert_eq!(got.unwrap(), PoiId(id)),
                None => assert!(got.is_err()),
            }
        }
    }
}

#[test]
fn rush_hours_dominate_free_flow_on_many_seeds() {
    for seed in 0..25 {
        let map = generate_map(seed, &GenerationConfig::default()).unwrap();
        assert!(map.matrix.congestion_violations().is_empty(), "seed {seed}");
    }
}

#[test]
fn map_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    save_map(seed7(), &path).unwrap();
    assert_eq!(&load_map(&path).unwrap(), seed7());
}
