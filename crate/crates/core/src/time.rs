//! Clock arithmetic, congestion buckets, and the popularity-driven dwell model.
//!
//! Durations are fixed-point [`Minutes`] with two decimals. Base dwell times
//! are whole minutes and popularity is an integer percentage, so
//! `base * (1 + p/100)` is always representable exactly and plan totals can be
//! compared for equality without tolerance.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::world::Poi;

pub const MINUTES_PER_DAY: u16 = 1440;
const HUNDREDTHS_PER_DAY: i64 = MINUTES_PER_DAY as i64 * 100;

/// A non-negative duration in hundredths of a minute.
///
/// Serialized as a JSON number of minutes (`27.5`, `6.85`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Minutes(i64);

impl Minutes {
    pub const ZERO: Minutes = Minutes(0);

    pub const fn whole(minutes: u32) -> Self {
        Minutes(minutes as i64 * 100)
    }

    pub const fn from_hundredths(hundredths: i64) -> Self {
        Minutes(hundredths)
    }

    pub const fn hundredths(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Rounds a real number of minutes to the nearest hundredth.
    pub fn from_f64(minutes: f64) -> Option<Self> {
        if minutes.is_finite() && minutes >= 0.0 {
            Some(Minutes((minutes * 100.0).round() as i64))
        } else {
            None
        }
    }
}

impl Add for Minutes {
    type Output = Minutes;
    fn add(self, rhs: Minutes) -> Minutes {
        Minutes(self.0 + rhs.0)
    }
}

impl AddAssign for Minutes {
    fn add_assign(&mut self, rhs: Minutes) {
        self.0 += rhs.0;
    }
}

impl Sub for Minutes {
    type Output = Minutes;
    fn sub(self, rhs: Minutes) -> Minutes {
        Minutes(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Minutes {
    fn sum<I: Iterator<Item = Minutes>>(iter: I) -> Minutes {
        iter.fold(Minutes::ZERO, Add::add)
    }
}

impl fmt::Display for Minutes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 100;
        let frac = self.0 % 100;
        if frac == 0 {
            write!(f, "{whole}")
        } else if frac % 10 == 0 {
            write!(f, "{whole}.{}", frac / 10)
        } else {
            write!(f, "{whole}.{frac:02}")
        }
    }
}

impl Serialize for Minutes {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Minutes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = f64::deserialize(d)?;
        Minutes::from_f64(raw).ok_or_else(|| serde::de::Error::custom(format!("invalid minutes value {raw}")))
    }
}

/// A time of day with minute resolution. Arithmetic wraps at midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockTime(u16);

impl ClockTime {
    pub const MIDNIGHT: ClockTime = ClockTime(0);

    pub fn new(minute_of_day: u16) -> Result<Self> {
        if minute_of_day < MINUTES_PER_DAY {
            Ok(ClockTime(minute_of_day))
        } else {
            Err(Error::Validation(format!(
                "minute of day {minute_of_day} out of range 0..1440"
            )))
        }
    }

    /// Panics if the components are out of range; meant for literals.
    pub const fn hm(hour: u16, minute: u16) -> Self {
        assert!(hour < 24 && minute < 60);
        ClockTime(hour * 60 + minute)
    }

    pub const fn minute_of_day(self) -> u16 {
        self.0
    }

    pub const fn hour(self) -> usize {
        (self.0 / 60) as usize
    }

    pub fn wrapping_add_minutes(self, minutes: u32) -> Self {
        ClockTime(((self.0 as u32 + minutes) % MINUTES_PER_DAY as u32) as u16)
    }

    /// Clock reading `elapsed` after leaving at `self`, truncated to the minute.
    pub fn after(self, elapsed: Minutes) -> Self {
        ClockTime((instant_of_day(self, elapsed) / 100) as u16)
    }
}

/// Hundredths of a minute since midnight of the instant `elapsed` after `start`.
pub(crate) fn instant_of_day(start: ClockTime, elapsed: Minutes) -> i64 {
    (start.0 as i64 * 100 + elapsed.hundredths()).rem_euclid(HUNDREDTHS_PER_DAY)
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for ClockTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("`{s}` is not an HH:MM clock time"));
        let (h, m) = s.split_once(':').ok_or_else(bad)?;
        if h.len() != 2 || m.len() != 2 {
            return Err(bad());
        }
        let h: u16 = h.parse().map_err(|_| bad())?;
        let m: u16 = m.parse().map_err(|_| bad())?;
        if h >= 24 || m >= 60 {
            return Err(bad());
        }
        Ok(ClockTime(h * 60 + m))
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One of the four time-of-day snapshots at which drive times are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    B00,
    B09,
    B12,
    B18,
}

impl Bucket {
    /// File order of the bucket dimension in travel matrices.
    pub const ALL: [Bucket; 4] = [Bucket::B00, Bucket::B09, Bucket::B12, Bucket::B18];

    pub const fn anchor(self) -> ClockTime {
        match self {
            Bucket::B00 => ClockTime::hm(0, 0),
            Bucket::B09 => ClockTime::hm(9, 0),
            Bucket::B12 => ClockTime::hm(12, 0),
            Bucket::B18 => ClockTime::hm(18, 0),
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> String {
        self.anchor().to_string()
    }

    pub fn anchors() -> Vec<ClockTime> {
        Bucket::ALL.iter().map(|b| b.anchor()).collect()
    }
}

/// Maps a clock time to its congestion bucket.
///
/// Windows are half-open: `[06:00, 10:30)` is the morning rush,
/// `[10:30, 15:00)` midday, `[15:00, 21:00)` the evening rush, and everything
/// else is free-flow night traffic.
pub fn bucket_of(t: ClockTime) -> Bucket {
    match t.minute_of_day() {
        360..=629 => Bucket::B09,
        630..=899 => Bucket::B12,
        900..=1259 => Bucket::B18,
        _ => Bucket::B00,
    }
}

/// Popularity of `poi` during the hour containing `t`.
pub fn popularity_at(poi: &Poi, t: ClockTime) -> u8 {
    poi.popularity[t.hour()]
}

/// Expected stay at `poi` when arriving at `t`.
///
/// An override replaces the model outright. Otherwise the stay is
/// `base * (1 + p(t)/100)`; POIs without a base time (homes, offices) take no
/// time.
pub fn dwell_minutes(poi: &Poi, t: ClockTime, dwell_override: Option<Minutes>) -> Minutes {
    if let Some(fixed) = dwell_override {
        return fixed;
    }
    match poi.base_dwell {
        Some(base) => {
            let p = popularity_at(poi, t) as i64;
            Minutes::from_hundredths(base as i64 * (100 + p))
        }
        None => Minutes::ZERO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Category, PoiId};

    fn poi_with(category: Category, popularity: [u8; 24]) -> Poi {
        Poi {
            id: PoiId(0),
            name: "Test".into(),
            category,
            x_km: 0.0,
            y_km: 0.0,
            brand: None,
            price_level: 1,
            open_minute: 0,
            close_minute: 1440,
            base_dwell: category.base_dwell(),
            popularity,
        }
    }

    #[test]
    fn bucket_windows() {
        assert_eq!(bucket_of(ClockTime::hm(9, 0)), Bucket::B09);
        assert_eq!(bucket_of(ClockTime::hm(10, 30)), Bucket::B12);
        assert_eq!(bucket_of(ClockTime::hm(10, 29)), Bucket::B09);
        assert_eq!(bucket_of(ClockTime::hm(23, 59)), Bucket::B00);
        assert_eq!(bucket_of(ClockTime::hm(5, 59)), Bucket::B00);
        assert_eq!(bucket_of(ClockTime::hm(6, 0)), Bucket::B09);
        assert_eq!(bucket_of(ClockTime::hm(15, 0)), Bucket::B18);
        assert_eq!(bucket_of(ClockTime::hm(21, 0)), Bucket::B00);
        for b in Bucket::ALL {
            assert_eq!(bucket_of(b.anchor()), b);
        }
    }

    #[test]
    fn bucket_preimages_partition_the_day() {
        let mut counts = [0usize; 4];
        for m in 0..MINUTES_PER_DAY {
            counts[bucket_of(ClockTime::new(m).unwrap()).index()] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 1440);
        assert_eq!(counts, [540, 270, 270, 360]);
    }

    #[test]
    fn popularity_is_constant_within_the_hour() {
        let mut pop = [0u8; 24];
        pop[12] = 80;
        pop[13] = 40;
        let poi = poi_with(Category::Restaurant, pop);
        assert_eq!(popularity_at(&poi, ClockTime::hm(12, 30)), 80);
        assert_eq!(
            popularity_at(&poi, ClockTime::hm(12, 0)),
            popularity_at(&poi, ClockTime::hm(12, 59))
        );
        assert_eq!(popularity_at(&poi, ClockTime::hm(13, 0)), 40);
    }

    #[test]
    fn dwell_examples() {
        let quiet = poi_with(Category::Charging, [0; 24]);
        assert_eq!(dwell_minutes(&quiet, ClockTime::hm(11, 0), None).as_f64(), 30.0);
        let busy = poi_with(Category::Charging, [50; 24]);
        assert_eq!(dwell_minutes(&busy, ClockTime::hm(11, 0), None).as_f64(), 45.0);
        let restaurant = poi_with(Category::Restaurant, [70; 24]);
        assert_eq!(
            dwell_minutes(&restaurant, ClockTime::hm(19, 0), Some(Minutes::whole(20))).as_f64(),
            20.0
        );
        let home = poi_with(Category::Apartment, [90; 24]);
        assert_eq!(dwell_minutes(&home, ClockTime::hm(8, 0), None), Minutes::ZERO);
    }

    #[test]
    fn clock_parsing_and_wrapping() {
        assert_eq!("09:05".parse::<ClockTime>().unwrap(), ClockTime::hm(9, 5));
        assert!("9:05".parse::<ClockTime>().is_err());
        assert!("24:00".parse::<ClockTime>().is_err());
        assert!("12:60".parse::<ClockTime>().is_err());
        assert_eq!(ClockTime::hm(23, 50).wrapping_add_minutes(20), ClockTime::hm(0, 10));
        assert_eq!(
            ClockTime::hm(23, 30).after(Minutes::from_hundredths(4550)),
            ClockTime::hm(0, 15)
        );
        assert_eq!(ClockTime::hm(7, 5).to_string(), "07:05");
    }

    #[test]
    fn minutes_display_and_serde() {
        assert_eq!(Minutes::from_hundredths(685).to_string(), "6.85");
        assert_eq!(Minutes::from_hundredths(2750).to_string(), "27.5");
        assert_eq!(Minutes::whole(17).to_string(), "17");
        let json = serde_json::to_string(&Minutes::from_hundredths(685)).unwrap();
        assert_eq!(json, "6.85");
        let back: Minutes = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Minutes::from_hundredths(685));
        assert!(serde_json::from_str::<Minutes>("-1.0").is_err());
    }
}
