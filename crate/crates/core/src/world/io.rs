use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Category, Poi, PoiId, TravelMatrix, WorldMap};
use crate::error::{Error, Result};
use crate::time::Bucket;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoiRecord {
    id: PoiId,
    name: String,
    category: Category,
    x_km: f64,
    y_km: f64,
    brand: Option<String>,
    price_level: u8,
    open_minute: u16,
    close_minute: u16,
    base_dwell_min: Option<u32>,
    popularity: [u8; 24],
}

/// On-disk layout of a map. Field order is the serialized key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    seed: u64,
    pois: Vec<PoiRecord>,
    buckets: [String; 4],
    drive_minutes: [Vec<Vec<u32>>; 4],
    walk_minutes: Vec<Vec<u32>>,
    distance_km: Vec<Vec<f64>>,
    exclusions: Vec<(String, String)>,
}

fn rows<T: Copy>(flat: &[T], n: usize) -> Vec<Vec<T>> {
    if n == 0 {
        return Vec::new();
    }
    flat.chunks(n).map(<[T]>::to_vec).collect()
}

fn flatten<T: Copy>(field: &str, nested: &[Vec<T>], n: usize) -> Result<Vec<T>> {
    if nested.len() != n {
        return Err(Error::Validation(format!(
            "{field} has {} rows, expected {n}",
            nested.len()
        )));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in nested.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation(format!(
                "{field}[{i}] has {} columns, expected {n}",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Ok(flat)
}

impl From<&WorldMap> for MapFile {
    fn from(map: &WorldMap) -> Self {
        let n = map.len();
        MapFile {
            seed: map.seed,
            pois: map
                .pois
                .iter()
                .map(|p| PoiRecord {
                    id: p.id,
                    name: p.name.clone(),
                    category: p.category,
                    x_km: p.x_km,
                    y_km: p.y_km,
                    brand: p.brand.clone(),
                    price_level: p.price_level,
                    open_minute: p.open_minute,
                    close_minute: p.close_minute,
                    base_dwell_min: p.base_dwell,
                    popularity: p.popularity,
                })
                .collect(),
            buckets: Bucket::ALL.map(Bucket::label),
            drive_minutes: Bucket::ALL.map(|b| rows(map.matrix.drive_rows(b), n)),
            walk_minutes: rows(map.matrix.walk_rows(), n),
            distance_km: rows(map.matrix.distance_rows(), n),
            exclusions: map.exclusions.clone(),
        }
    }
}

impl TryFrom<MapFile> for WorldMap {
    type Error = Error;

    fn try_from(file: MapFile) -> Result<Self> {
        let expected = Bucket::ALL.map(Bucket::label);
        if file.buckets != expected {
            return Err(Error::Validation(format!(
                "buckets must be {expected:?}, found {:?}",
                file.buckets
            )));
        }
        let n = file.pois.len();
        let drive = [0, 1, 2, 3].map(|b| flatten(&format!("drive_minutes[{b}]"), &file.drive_minutes[b], n));
        let [d0, d1, d2, d3] = drive;
        let matrix = TravelMatrix::from_parts(
            n,
            [d0?, d1?, d2?, d3?],
            flatten("walk_minutes", &file.walk_minutes, n)?,
            flatten("distance_km", &file.distance_km, n)?,
        )?;
        let pois = file
            .pois
            .into_iter()
            .map(|r| Poi {
                id: r.id,
                name: r.name,
                category: r.category,
                x_km: r.x_km,
                y_km: r.y_km,
                brand: r.brand,
                price_level: r.price_level,
                open_minute: r.open_minute,
                close_minute: r.close_minute,
                base_dwell: r.base_dwell_min,
                popularity: r.popularity,
            })
            .collect();
        WorldMap::new(pois, matrix, file.seed, file.exclusions)
    }
}

/// Canonical file bytes: compact JSON, fixed key order, trailing newline.
pub fn to_canonical_json(map: &WorldMap) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(&MapFile::from(map)).expect("map serialization is infallible");
    bytes.push(b'\n');
    bytes
}

/// SHA-256 of the canonical map bytes, hex encoded.
pub fn map_hash(map: &WorldMap) -> String {
    hex::encode(Sha256::digest(to_canonical_json(map)))
}

pub fn save_map(map: &WorldMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_canonical_json(map)).map_err(|e| Error::io(path, e))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<WorldMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_map(&bytes, &path.display().to_string())
}

pub(crate) fn parse_map(bytes: &[u8], origin: &str) -> Result<WorldMap> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: MapFile = serde_path_to_error::deserialize(de).map_err(|e| Error::from_path_error(origin, e))?;
    WorldMap::try_from(file)
}
