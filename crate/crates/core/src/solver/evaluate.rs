use super::{Absorption, EvaluatedPlan, Itinerary, Leg, Mode, QuerySpec, Violation};
use crate::error::Result;
use crate::time::{bucket_of, dwell_minutes, instant_of_day, ClockTime, Minutes};
use crate::world::{Category, Poi, PoiId, WorldMap};

/// Forward-simulates an itinerary without concurrency absorption.
pub fn evaluate_plan(map: &WorldMap, itinerary: &Itinerary, query: &QuerySpec) -> Result<EvaluatedPlan> {
    itinerary.validate(map)?;
    Ok(simulate(map, itinerary, query, &[]))
}

/// Constraint violations of the plain (unabsorbed) simulation.
pub fn check_feasibility(map: &WorldMap, itinerary: &Itinerary, query: &QuerySpec) -> Result<Vec<Violation>> {
    Ok(evaluate_plan(map, itinerary, query)?.violations)
}

/// Evaluates and then applies charge absorption; the cost used by every search.
pub fn evaluate_full(map: &WorldMap, itinerary: &Itinerary, query: &QuerySpec) -> Result<EvaluatedPlan> {
    itinerary.validate(map)?;
    Ok(full_unchecked(map, itinerary, query))
}

pub(crate) fn full_unchecked(map: &WorldMap, itinerary: &Itinerary, query: &QuerySpec) -> EvaluatedPlan {
    let plain = simulate(map, itinerary, query, &[]);
    absorb(map, plain, query)
}

/// Folds errands into adjacent charging windows where that saves time.
///
/// Charging stops are handled in visit order, each absorbing at most one
/// neighbouring intermediate stop `q`. A candidate qualifies when the round
/// trip on foot plus the errand fits inside the charge
/// (`2w + dwell(q) <= charge`), the re-chained plan is no longer than the
/// current one, and it introduces no new violations. Among qualifying
/// neighbours the one giving the smallest total wins, then the smaller id.
pub fn apply_charge_absorption(map: &WorldMap, plan: EvaluatedPlan, query: &QuerySpec) -> EvaluatedPlan {
    absorb(map, plan, query)
}

fn absorb(map: &WorldMap, plan: EvaluatedPlan, query: &QuerySpec) -> EvaluatedPlan {
    let stops = plan.itinerary.stops.clone();
    let n = stops.len();
    let is_charging = |idx: usize| map.pois[stops[idx].index()].category == Category::Charging;
    if n < 4 || !(1..n - 1).any(is_charging) {
        return plan;
    }
    // Always start from the plain simulation so repeated calls agree.
    let mut current = if plan.absorptions.is_empty() {
        plan
    } else {
        simulate(map, &plan.itinerary, query, &[])
    };
    let mut chosen: Vec<(usize, usize)> = Vec::new();

    for ch in 1..n - 1 {
        if !is_charging(ch) || chosen.iter().any(|&(c, _)| c == ch) {
            continue;
        }
        let mut pick: Option<(Minutes, PoiId, usize, EvaluatedPlan)> = None;
        for q in [ch - 1, ch + 1] {
            if q == 0 || q == n - 1 || is_charging(q) || chosen.iter().any(|&(_, e)| e == q) {
                continue;
            }
            let mut trial_pairs = chosen.clone();
            trial_pairs.push((ch, q));
            let trial = simulate(map, &current.itinerary, query, &trial_pairs);
            let record = trial
                .absorptions
                .iter()
                .find(|a| a.charging == stops[ch])
                .expect("trial records its absorption");
            let fits = record.walk_min + record.walk_min + record.errand_dwell_min <= record.charge_min;
            let no_worse = trial.total_min <= current.total_min;
            let no_new_violations = trial.violations.iter().all(|v| current.violations.contains(v));
            if !(fits && no_worse && no_new_violations) {
                continue;
            }
            let better = match &pick {
                None => true,
                Some((total, id, _, _)) => (trial.total_min, stops[q]) < (*total, *id),
            };
            if better {
                pick = Some((trial.total_min, stops[q], q, trial));
            }
        }
        if let Some((_, _, q, trial)) = pick {
            chosen.push((ch, q));
            current = trial;
        }
    }
    current
}

fn check_hours(poi: &Poi, departure: ClockTime, arrive_at: Minutes, stay: Minutes, out: &mut Vec<Violation>) {
    if poi.always_open() {
        return;
    }
    let at = instant_of_day(departure, arrive_at);
    let open = poi.open_minute as i64 * 100;
    let close = poi.close_minute as i64 * 100;
    if at < open || at >= close {
        out.push(Violation::ClosedAtArrival { poi: poi.id });
    } else if at + stay.hundredths() > close {
        out.push(Violation::DwellPastClose { poi: poi.id });
    }
}

/// Dwell for `poi` when arriving `arrive_at` after `departure`.
#[inline]
pub(crate) fn stay_at(poi: &Poi, departure: ClockTime, arrive_at: Minutes, query: &QuerySpec) -> Minutes {
    dwell_minutes(poi, departure.after(arrive_at), query.dwell_override(poi.category))
}

/// Drive time from `from` to `to` leaving `depart_at` after `departure`.
#[inline]
pub(crate) fn drive_from(map: &WorldMap, departure: ClockTime, depart_at: Minutes, from: PoiId, to: PoiId) -> Minutes {
    let bucket = bucket_of(departure.after(depart_at));
    Minutes::whole(map.matrix.drive(bucket, from, to))
}

/// Core simulation. `absorbed` lists `(charging index, errand index)` pairs
/// into the itinerary; errands are skipped by the vehicle and visited on foot.
pub(crate) fn simulate(
    map: &WorldMap,
    itinerary: &Itinerary,
    query: &QuerySpec,
    absorbed: &[(usize, usize)],
) -> EvaluatedPlan {
    let stops = &itinerary.stops;
    let n = stops.len();
    let dep = itinerary.departure;
    let poi = |id: PoiId| &map.pois[id.index()];

    let mut violations = Vec::new();
    let mut legs = Vec::with_capacity(n + 2 * absorbed.len());
    let mut absorptions = Vec::with_capacity(absorbed.len());

    let origin_dwell = stay_at(poi(stops[0]), dep, Minutes::ZERO, query);
    let mut elapsed = origin_dwell;
    let mut dwell_total = origin_dwell;
    let mut prev = stops[0];

    for (idx, &to) in stops.iter().enumerate().skip(1) {
        if absorbed.iter().any(|&(_, q)| q == idx) {
            continue;
        }
        let stop = poi(to);
        let depart_at = elapsed;
        let travel = drive_from(map, dep, depart_at, prev, to);
        let arrive_at = depart_at + travel;
        let own = if idx == n - 1 {
            Minutes::ZERO
        } else {
            stay_at(stop, dep, arrive_at, query)
        };
        check_hours(stop, dep, arrive_at, own, &mut violations);
        dwell_total += own;

        let errand = absorbed.iter().find(|&&(c, _)| c == idx).map(|&(_, q)| stops[q]);
        let window = match errand {
            None => own,
            Some(q) => {
                let errand_poi = poi(q);
                let walk = Minutes::whole(map.matrix.walk(to, q));
                let errand_at = arrive_at + walk;
                let errand_dwell = stay_at(errand_poi, dep, errand_at, query);
                check_hours(errand_poi, dep, errand_at, errand_dwell, &mut violations);
                dwell_total += errand_dwell;
                let combined = own.max(walk + walk + errand_dwell);
                absorptions.push(Absorption {
                    charging: to,
                    errand: q,
                    walk_min: walk,
                    charge_min: own,
                    errand_dwell_min: errand_dwell,
                    combined_min: combined,
                });
                combined
            }
        };
        legs.push(Leg {
            from: prev,
            to,
            mode: Mode::Drive,
            depart: dep.after(depart_at),
            travel_min: travel,
            arrive: dep.after(arrive_at),
            dwell_min: window,
            absorbed_into_charge: false,
        });
        if let Some(a) = absorptions.last().filter(|a| errand.is_some() && a.charging == to) {
            let out_at = arrive_at + a.walk_min;
            let back_from = out_at + a.errand_dwell_min;
            legs.push(Leg {
                from: to,
                to: a.errand,
                mode: Mode::Walk,
                depart: dep.after(arrive_at),
                travel_min: a.walk_min,
                arrive: dep.after(out_at),
                dwell_min: a.errand_dwell_min,
                absorbed_into_charge: true,
            });
            legs.push(Leg {
                from: a.errand,
                to,
                mode: Mode::Walk,
                depart: dep.after(back_from),
                travel_min: a.walk_min,
                arrive: dep.after(back_from + a.walk_min),
                dwell_min: Minutes::ZERO,
                absorbed_into_charge: true,
            });
        }
        elapsed = arrive_at + window;
        prev = to;
    }

    for &category in &query.required_categories {
        if !stops.iter().any(|&s| poi(s).category == category) {
            violations.push(Violation::MissingCategory { category });
        }
    }
    if query.charge_required && !stops.iter().any(|&s| poi(s).category == Category::Charging) {
        violations.push(Violation::MissingCharge);
    }
    for &s in stops {
        let stop = poi(s);
        if let Some(brand) = query.brand_preferences.get(&stop.category) {
            if stop.brand.as_deref() != Some(brand.as_str()) {
                violations.push(Violation::BrandMismatch {
                    category: stop.category,
                    poi: s,
                });
            }
        }
    }
    violations.sort();
    violations.dedup();

    EvaluatedPlan {
        itinerary: itinerary.clone(),
        origin_dwell_min: origin_dwell,
        legs,
        absorptions,
        total_min: elapsed,
        dwell_total_min: dwell_total,
        feasible: violations.is_empty(),
        violations,
    }
}
