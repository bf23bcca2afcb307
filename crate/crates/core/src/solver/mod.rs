//! Itinerary evaluation and exact optimization.
//!
//! A plan's cost is the elapsed time of a forward simulation: drive each leg
//! using the congestion bucket of the leg's departure instant, then stay at
//! each stop for the popularity-dependent dwell time at arrival. Charging
//! stops may additionally absorb one adjacent errand that is done on foot
//! while the vehicle charges.

mod evaluate;
mod queries;
mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{ClockTime, Minutes};
use crate::world::{Category, PoiId, WorldMap};

pub use evaluate::{apply_charge_absorption, check_feasibility, evaluate_full, evaluate_plan};
pub use queries::{
    best_departure, best_insertion, compare_routes, nearest_poi, Insertion, InsertionOutcome, Label, RouteComparison,
};
pub use search::{
    brute_force_oracle, candidate_pois, candidate_space_size, solve, solve_optimal, Engine, Outcome, Solution,
};

/// Upper bound on required categories per query; keeps enumeration bounded.
pub const MAX_REQUIRED: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    TotalTime,
    /// Sum of price levels over intermediate stops.
    TotalPrice,
    /// Sum of dwell minutes over all stops.
    TotalDwell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Departure {
    Fixed(ClockTime),
    Candidates(Vec<ClockTime>),
}

impl Departure {
    /// Distinct departure times in ascending clock order.
    pub fn times(&self) -> Vec<ClockTime> {
        let mut times = match self {
            Departure::Fixed(t) => vec![*t],
            Departure::Candidates(ts) => ts.clone(),
        };
        times.sort_unstable();
        times.dedup();
        times
    }
}

/// A structured planning request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub origin: PoiId,
    pub destination: PoiId,
    #[serde(default)]
    pub required_categories: Vec<Category>,
    #[serde(default)]
    pub brand_preferences: BTreeMap<Category, String>,
    #[serde(default)]
    pub dwell_overrides: BTreeMap<Category, Minutes>,
    pub departure: Departure,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub charge_required: bool,
}

impl QuerySpec {
    pub fn new(origin: PoiId, destination: PoiId, departure: ClockTime) -> Self {
        QuerySpec {
            origin,
            destination,
            required_categories: Vec::new(),
            brand_preferences: BTreeMap::new(),
            dwell_overrides: BTreeMap::new(),
            departure: Departure::Fixed(departure),
            objective: Objective::TotalTime,
            charge_required: false,
        }
    }

    pub fn with_categories(mut self, categories: &[Category]) -> Self {
        self.required_categories = categories.to_vec();
        self
    }

    /// Categories the search must visit, with `charge_required` folded in.
    pub fn categories(&self) -> Vec<Category> {
        let mut out = self.required_categories.clone();
        if self.charge_required && !out.contains(&Category::Charging) {
            out.push(Category::Charging);
        }
        out
    }

    pub fn dwell_override(&self, category: Category) -> Option<Minutes> {
        self.dwell_overrides.get(&category).copied()
    }

    pub fn validate(&self, map: &WorldMap) -> Result<()> {
        map.poi(self.origin)?;
        map.poi(self.destination)?;
        if self.origin == self.destination {
            return Err(Error::Query("origin and destination must differ".into()));
        }
        let cats = self.categories();
        for (i, c) in cats.iter().enumerate() {
            if cats[..i].contains(c) {
                return Err(Error::Query(format!("category {c} requested twice")));
            }
        }
        if cats.len() > MAX_REQUIRED {
            return Err(Error::Query(format!(
                "{} required categories exceeds the limit of {MAX_REQUIRED}",
                cats.len()
            )));
        }
        if let Some((a, b)) = map.excluded_pair(&cats) {
            return Err(Error::Query(format!("categories {a} and {b} may not be combined")));
        }
        if self.departure.times().is_empty() {
            return Err(Error::Query("no departure time given".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Itinerary {
    pub stops: Vec<PoiId>,
    pub departure: ClockTime,
}

impl Itinerary {
    pub fn new(stops: Vec<PoiId>, departure: ClockTime) -> Self {
        Itinerary { stops, departure }
    }

    pub fn origin(&self) -> PoiId {
        self.stops[0]
    }

    pub fn destination(&self) -> PoiId {
        self.stops[self.stops.len() - 1]
    }

    pub fn validate(&self, map: &WorldMap) -> Result<()> {
        if self.stops.len() < 2 {
            return Err(Error::Itinerary("an itinerary needs at least two stops".into()));
        }
        for (i, &id) in self.stops.iter().enumerate() {
            map.poi(id)?;
            if self.stops[..i].contains(&id) {
                return Err(Error::Itinerary(format!("stop {id} appears twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Drive,
    Walk,
}

/// One movement between two stops plus the stay at its end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub from: PoiId,
    pub to: PoiId,
    pub mode: Mode,
    pub depart: ClockTime,
    pub travel_min: Minutes,
    pub arrive: ClockTime,
    /// Time spent at `to`. For a charging stop that absorbed an errand this
    /// is the combined window.
    pub dwell_min: Minutes,
    /// Walking legs of an errand done during a charging window. They do not
    /// add to the total.
    pub absorbed_into_charge: bool,
}

/// An errand folded into a charging stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorption {
    pub charging: PoiId,
    pub errand: PoiId,
    /// One-way walking time.
    pub walk_min: Minutes,
    pub charge_min: Minutes,
    pub errand_dwell_min: Minutes,
    /// `max(charge, 2 * walk + errand dwell)`.
    pub combined_min: Minutes,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Violation {
    MissingCategory { category: Category },
    ClosedAtArrival { poi: PoiId },
    DwellPastClose { poi: PoiId },
    BrandMismatch { category: Category, poi: PoiId },
    MissingCharge,
}

impl Violation {
    pub fn tag(&self) -> &'static str {
        match self {
            Violation::MissingCategory { .. } => "missing_category",
            Violation::ClosedAtArrival { .. } => "closed_at_arrival",
            Violation::DwellPastClose { .. } => "dwell_past_close",
            Violation::BrandMismatch { .. } => "brand_mismatch",
            Violation::MissingCharge => "missing_charge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluatedPlan {
    pub itinerary: Itinerary,
    pub origin_dwell_min: Minutes,
    pub legs: Vec<Leg>,
    #[serde(default)]
    pub absorptions: Vec<Absorption>,
    pub total_min: Minutes,
    /// Sum of every stop's own stay, ignoring overlap inside charge windows.
    pub dwell_total_min: Minutes,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl EvaluatedPlan {
    pub fn departure(&self) -> ClockTime {
        self.itinerary.departure
    }

    /// Sum of price levels over intermediate stops.
    pub fn price_total(&self, map: &WorldMap) -> u32 {
        let stops = &self.itinerary.stops;
        stops[1..stops.len() - 1]
            .iter()
            .map(|&id| map.pois[id.index()].price_level as u32)
            .sum()
    }

    pub fn objective_value(&self, objective: Objective, map: &WorldMap) -> i64 {
        match objective {
            Objective::TotalTime => self.total_min.hundredths(),
            Objective::TotalPrice => self.price_total(map) as i64,
            Objective::TotalDwell => self.dwell_total_min.hundredths(),
        }
    }

    /// Recomputes the total from the leg table.
    pub fn leg_sum(&self) -> Minutes {
        self.origin_dwell_min
            + self
                .legs
                .iter()
                .filter(|l| !l.absorbed_into_charge)
                .map(|l| l.travel_min + l.dwell_min)
                .sum()
    }
}

#[cfg(test)]
mod tests;
