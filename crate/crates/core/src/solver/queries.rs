use serde::{Deserialize, Serialize};

use super::evaluate::full_unchecked;
use super::search::{solve, Engine, Outcome, Solution};
use super::{evaluate_plan, Departure, EvaluatedPlan, Itinerary, Objective, QuerySpec, Violation};
use crate::error::{Error, Result};
use crate::time::{ClockTime, Minutes};
use crate::world::{Category, PoiId, WorldMap};

/// Closest POI of `category` to `origin` by road distance, ties to the
/// smaller id. The origin itself is never returned.
pub fn nearest_poi(map: &WorldMap, origin: PoiId, category: Category) -> Result<PoiId> {
    map.poi(origin)?;
    map.pois_of(category)
        .filter(|p| p.id != origin)
        .min_by(|a, b| {
            let da = map.matrix.distance(origin, a.id);
            let db = map.matrix.distance(origin, b.id);
            da.total_cmp(&db).then(a.id.cmp(&b.id))
        })
        .map(|p| p.id)
        .ok_or_else(|| Error::Lookup(format!("no {category} other than the origin on this map")))
}

/// Solves the query once per candidate departure and keeps the shortest trip;
/// ties go to the earliest clock time.
pub fn best_departure(map: &WorldMap, query: &QuerySpec, candidates: &[ClockTime], engine: Engine) -> Result<Solution> {
    let mut times = candidates.to_vec();
    times.sort_unstable();
    times.dedup();
    if times.is_empty() {
        return Err(Error::Query("no departure candidates given".into()));
    }
    let mut considered = 0;
    let mut best: Option<EvaluatedPlan> = None;
    let mut attempt: Option<(usize, Minutes, ClockTime, Outcome)> = None;
    for t in times {
        let mut fixed = query.clone();
        fixed.departure = Departure::Fixed(t);
        fixed.objective = Objective::TotalTime;
        let solution = solve(map, &fixed, engine)?;
        considered += solution.considered;
        match solution.outcome {
            Outcome::Optimal(plan) => {
                if best.as_ref().is_none_or(|b| plan.total_min < b.total_min) {
                    best = Some(plan);
                }
            }
            infeasible @ Outcome::Infeasible { .. } => {
                let key = match &infeasible {
                    Outcome::Infeasible {
                        best_attempt: Some(p), ..
                    } => (p.violations.len(), p.total_min),
                    _ => (usize::MAX, Minutes::ZERO),
                };
                if attempt.as_ref().is_none_or(|(n, m, _, _)| key < (*n, *m)) {
                    attempt = Some((key.0, key.1, t, infeasible));
                }
            }
        }
    }
    let outcome = match (best, attempt) {
        (Some(plan), _) => Outcome::Optimal(plan),
        (None, Some((_, _, _, infeasible))) => infeasible,
        (None, None) => unreachable!("at least one candidate was solved"),
    };
    Ok(Solution { outcome, considered })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InsertionOutcome {
    Best {
        poi: PoiId,
        /// Index in the new stop list where the POI was inserted.
        position: usize,
        plan: EvaluatedPlan,
    },
    Infeasible {
        violations: Vec<Violation>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub outcome: InsertionOutcome,
    pub considered: u64,
}

/// Tries every POI of `category` in every gap of `base` and returns the
/// insertion with the smallest total; ties go to the earlier gap, then the
/// smaller id. POIs already on the route are skipped.
pub fn best_insertion(map: &WorldMap, base: &Itinerary, category: Category, query: &QuerySpec) -> Result<Insertion> {
    let base_plan = evaluate_plan(map, base, query)?;
    if let Some(v) = base_plan
        .violations
        .iter()
        .find(|v| matches!(v, Violation::ClosedAtArrival { .. } | Violation::DwellPastClose { .. }))
    {
        return Err(Error::Itinerary(format!(
            "base itinerary is not feasible ({})",
            v.tag()
        )));
    }
    if map.pois_of(category).next().is_none() {
        return Err(Error::Lookup(format!("no {category} on this map")));
    }
    let brand = query.brand_preferences.get(&category);

    let mut considered = 0;
    let mut best: Option<((Minutes, usize, PoiId), EvaluatedPlan)> = None;
    let mut attempt: Option<(usize, Vec<Violation>)> = None;
    for position in 1..base.stops.len() {
        for poi in map.pois_of(category) {
            if base.stops.contains(&poi.id) {
                continue;
            }
            if brand.is_some_and(|b| poi.brand.as_deref() != Some(b.as_str())) {
                continue;
            }
            let mut stops = base.stops.clone();
            stops.insert(position, poi.id);
            let plan = full_unchecked(map, &Itinerary::new(stops, base.departure), query);
            considered += 1;
            if plan.feasible {
                let key = (plan.total_min, position, poi.id);
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((key, plan));
                }
            } else if attempt.as_ref().is_none_or(|(n, _)| plan.violations.len() < *n) {
                attempt = Some((plan.violations.len(), plan.violations.clone()));
            }
        }
    }
    let outcome = match best {
        Some(((_, position, poi), plan)) => InsertionOutcome::Best { poi, position, plan },
        None => InsertionOutcome::Infeasible {
            violations: attempt
                .map(|(_, v)| v)
                .unwrap_or_else(|| vec![Violation::MissingCategory { category }]),
        },
    };
    Ok(Insertion { outcome, considered })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    pub winner: Label,
    /// Both totals were exactly equal; the first route wins.
    pub tie: bool,
    pub total_a: Minutes,
    pub total_b: Minutes,
}

/// Labels the strictly shorter of two routes under plain evaluation.
pub fn compare_routes(
    map: &WorldMap,
    route_a: &Itinerary,
    route_b: &Itinerary,
    query: &QuerySpec,
) -> Result<RouteComparison> {
    let total_a = evaluate_plan(map, route_a, query)?.total_min;
    let total_b = evaluate_plan(map, route_b, query)?.total_min;
    Ok(RouteComparison {
        winner: if total_b < total_a { Label::B } else { Label::A },
        tie: total_a == total_b,
        total_a,
        total_b,
    })
}
