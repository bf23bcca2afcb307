use itertools::Itertools;

use super::evaluate::{drive_from, full_unchecked, stay_at};
use super::{EvaluatedPlan, Itinerary, Objective, QuerySpec, Violation};
use crate::error::Result;
use crate::time::{bucket_of, Bucket, ClockTime, Minutes, MINUTES_PER_DAY};
use crate::world::{Category, PoiId, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Depth-first search with admissible lower-bound pruning.
    #[default]
    BranchAndBound,
    /// Plain enumeration of every candidate plan.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal(EvaluatedPlan),
    Infeasible {
        /// The enumerated plan with the fewest violations, if any plan existed.
        best_attempt: Option<Box<EvaluatedPlan>>,
        violations: Vec<Violation>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub outcome: Outcome,
    /// Complete candidate plans evaluated by the search.
    pub considered: u64,
}

impl Solution {
    pub fn plan(&self) -> Option<&EvaluatedPlan> {
        match &self.outcome {
            Outcome::Optimal(plan) => Some(plan),
            Outcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, Outcome::Optimal(_))
    }

    pub fn violations(&self) -> &[Violation] {
        match &self.outcome {
            Outcome::Optimal(_) => &[],
            Outcome::Infeasible { violations, .. } => violations,
        }
    }
}

/// Ordering of feasible plans: objective, then total time for secondary
/// objectives, then earlier departure, then the stop-id sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Rank {
    primary: i64,
    secondary: i64,
    departure: ClockTime,
    stops: Vec<PoiId>,
}

impl Rank {
    fn of(plan: &EvaluatedPlan, objective: Objective, map: &WorldMap) -> Self {
        Rank {
            primary: plan.objective_value(objective, map),
            secondary: match objective {
                Objective::TotalTime => 0,
                _ => plan.total_min.hundredths(),
            },
            departure: plan.itinerary.departure,
            stops: plan.itinerary.stops.clone(),
        }
    }
}

struct Incumbent<'a> {
    map: &'a WorldMap,
    objective: Objective,
    best: Option<(Rank, EvaluatedPlan)>,
    attempt: Option<((usize, Rank), EvaluatedPlan)>,
    considered: u64,
}

impl<'a> Incumbent<'a> {
    fn new(map: &'a WorldMap, objective: Objective) -> Self {
        Incumbent {
            map,
            objective,
            best: None,
            attempt: None,
            considered: 0,
        }
    }

    fn primary(&self) -> Option<i64> {
        self.best.as_ref().map(|(r, _)| r.primary)
    }

    fn offer(&mut self, plan: EvaluatedPlan) {
        self.considered += 1;
        if plan.feasible {
            let rank = Rank::of(&plan, self.objective, self.map);
            if self.best.as_ref().is_none_or(|(r, _)| rank < *r) {
                self.best = Some((rank, plan));
            }
        } else if self.best.is_none() {
            let key = (plan.violations.len(), Rank::of(&plan, self.objective, self.map));
            if self.attempt.as_ref().is_none_or(|(k, _)| key < *k) {
                self.attempt = Some((key, plan));
            }
        }
    }

    fn finish(self, categories: &[Category], pools: &[Vec<PoiId>]) -> Solution {
        let outcome = match (self.best, self.attempt) {
            (Some((_, plan)), _) => Outcome::Optimal(plan),
            (None, Some((_, plan))) => Outcome::Infeasible {
                violations: plan.violations.clone(),
                best_attempt: Some(Box::new(plan)),
            },
            (None, None) => Outcome::Infeasible {
                best_attempt: None,
                violations: categories
                    .iter()
                    .zip(pools)
                    .filter(|(_, pool)| pool.is_empty())
                    .map(|(&category, _)| Violation::MissingCategory { category })
                    .collect(),
            },
        };
        Solution {
            outcome,
            considered: self.considered,
        }
    }
}

/// POIs that may serve `category` for this query, ascending by id.
pub fn candidate_pois(map: &WorldMap, query: &QuerySpec, category: Category) -> Vec<PoiId> {
    let brand = query.brand_preferences.get(&category);
    map.pois_of(category)
        .filter(|p| p.id != query.origin && p.id != query.destination)
        .filter(|p| brand.is_none_or(|b| p.brand.as_deref() == Some(b.as_str())))
        .map(|p| p.id)
        .collect()
}

/// Number of complete plans plain enumeration visits:
/// departures × orderings × POI choices.
pub fn candidate_space_size(map: &WorldMap, query: &QuerySpec) -> u64 {
    let cats = query.categories();
    let orderings: u64 = (1..=cats.len() as u64).product();
    let choices: u64 = cats
        .iter()
        .map(|&c| candidate_pois(map, query, c).len() as u64)
        .product();
    query.departure.times().len() as u64 * orderings * choices
}

pub fn solve(map: &WorldMap, query: &QuerySpec, engine: Engine) -> Result<Solution> {
    match engine {
        Engine::BranchAndBound => solve_optimal(map, query),
        Engine::Exhaustive => brute_force_oracle(map, query),
    }
}

/// Reference solver: evaluates every ordering of the required categories,
/// every POI choice, and every departure candidate.
pub fn brute_force_oracle(map: &WorldMap, query: &QuerySpec) -> Result<Solution> {
    query.validate(map)?;
    let cats = query.categories();
    let pools: Vec<Vec<PoiId>> = cats.iter().map(|&c| candidate_pois(map, query, c)).collect();
    let mut incumbent = Incumbent::new(map, query.objective);

    for departure in query.departure.times() {
        if cats.is_empty() {
            let itinerary = Itinerary::new(vec![query.origin, query.destination], departure);
            incumbent.offer(full_unchecked(map, &itinerary, query));
            continue;
        }
        for order in (0..cats.len()).permutations(cats.len()) {
            for choice in order
                .iter()
                .map(|&i| pools[i].iter().copied())
                .multi_cartesian_product()
            {
                let mut stops = Vec::with_capacity(choice.len() + 2);
                stops.push(query.origin);
                stops.extend(choice);
                stops.push(query.destination);
                let itinerary = Itinerary::new(stops, departure);
                incumbent.offer(full_unchecked(map, &itinerary, query));
            }
        }
    }
    Ok(incumbent.finish(&cats, &pools))
}

/// Exact optimizer.
///
/// Extends partial itineraries depth first and cuts a prefix once a lower
/// bound on any completion exceeds the incumbent. Leg and dwell costs are
/// non-negative, so elapsed time is a valid bound, but only up to the point
/// where a later charge absorption could still reroute the vehicle: the stop
/// before a charging stop may be skipped, and so may the last stop when a
/// charging stop is still to come. Ties are resolved exactly as in
/// [`brute_force_oracle`], so both return the same plan.
pub fn solve_optimal(map: &WorldMap, query: &QuerySpec) -> Result<Solution> {
    query.validate(map)?;
    let cats = query.categories();
    let pools: Vec<Vec<PoiId>> = cats.iter().map(|&c| candidate_pois(map, query, c)).collect();
    let mut incumbent = Incumbent::new(map, query.objective);
    let has_charging = cats.contains(&Category::Charging);

    for departure in query.departure.times() {
        let origin_dwell = stay_at(&map.pois[query.origin.index()], departure, Minutes::ZERO, query);
        let mut dfs = Dfs {
            map,
            query,
            cats: &cats,
            pools: &pools,
            floors: None,
            floors_for: None,
            window: Window::all(),
            has_charging,
            departure,
            stops: vec![query.origin],
            departs: vec![origin_dwell],
            dwell_sums: vec![origin_dwell],
            price: 0,
            used: 0,
            order: Vec::new(),
            incumbent: &mut incumbent,
        };
        dfs.descend();
    }
    Ok(incumbent.finish(&cats, &pools))
}

struct Dfs<'s, 'm> {
    map: &'m WorldMap,
    query: &'s QuerySpec,
    cats: &'s [Category],
    pools: &'s [Vec<PoiId>],
    /// Built once an incumbent exists.
    floors: Option<Floors>,
    /// Incumbent total the floors were last checked against.
    floors_for: Option<i64>,
    window: Window,
    has_charging: bool,
    departure: ClockTime,
    /// Origin followed by the intermediate stops chosen so far.
    stops: Vec<PoiId>,
    /// Elapsed time when leaving each stop in `stops`, without absorption.
    departs: Vec<Minutes>,
    /// Cumulative own dwell up to and including each stop.
    dwell_sums: Vec<Minutes>,
    price: u32,
    used: u32,
    /// Category index of each intermediate stop in `stops`.
    order: Vec<usize>,
    incumbent: &'s mut Incumbent<'m>,
}

impl Dfs<'_, '_> {
    fn descend(&mut self) {
        let full = (1u32 << self.cats.len()) - 1;
        if self.used == full {
            let mut stops = self.stops.clone();
            stops.push(self.query.destination);
            let itinerary = Itinerary::new(stops, self.departure);
            let plan = full_unchecked(self.map, &itinerary, self.query);
            self.incumbent.offer(plan);
            return;
        }
        // Cheapest extensions first so a good incumbent appears early.
        let mut children: Vec<(Minutes, usize, PoiId)> = Vec::new();
        for ci in 0..self.cats.len() {
            if self.used & (1 << ci) != 0 {
                continue;
            }
            for &poi in &self.pools[ci] {
                self.push(ci, poi);
                children.push((*self.departs.last().expect("just pushed"), ci, poi));
                self.pop(ci, poi);
            }
        }
        children.sort_unstable();
        for (_, ci, poi) in children {
            self.push(ci, poi);
            if !self.pruned() {
                self.descend();
            }
            self.pop(ci, poi);
        }
    }

    fn push(&mut self, ci: usize, poi: PoiId) {
        let prev = *self.stops.last().expect("origin is always present");
        let leave = *self.departs.last().expect("origin is always present");
        let arrive = leave + drive_from(self.map, self.departure, leave, prev, poi);
        let stay = stay_at(&self.map.pois[poi.index()], self.departure, arrive, self.query);
        let dwell_sum = *self.dwell_sums.last().expect("origin is always present") + stay;
        self.stops.push(poi);
        self.departs.push(arrive + stay);
        self.dwell_sums.push(dwell_sum);
        self.price += self.map.pois[poi.index()].price_level as u32;
        self.used |= 1 << ci;
        self.order.push(ci);
    }

    fn pop(&mut self, ci: usize, poi: PoiId) {
        self.stops.pop();
        self.departs.pop();
        self.dwell_sums.pop();
        self.price -= self.map.pois[poi.index()].price_level as u32;
        self.used &= !(1 << ci);
        self.order.pop();
    }

    /// Index into `stops` up to which timing cannot change under absorption.
    fn settled_prefix(&self) -> usize {
        let k = self.stops.len() - 1;
        let is_charging = |id: &PoiId| self.map.pois[id.index()].category == Category::Charging;
        if let Some(first) = self.stops.iter().skip(1).position(is_charging) {
            return (first + 1).saturating_sub(2);
        }
        let charging_pending = self
            .cats
            .iter()
            .enumerate()
            .any(|(i, &c)| c == Category::Charging && self.used & (1 << i) == 0);
        if charging_pending {
            k.saturating_sub(1)
        } else {
            k
        }
    }

    fn pruned(&mut self) -> bool {
        let Some(bound) = self.incumbent.primary() else {
            return false;
        };
        // A plan no longer than `bound` only ever sees the clock between
        // departure and departure + bound, so floors may ignore other hours.
        if self.floors_for != Some(bound) {
            self.floors_for = Some(bound);
            let window = match self.query.objective {
                Objective::TotalTime => Window::span(self.departure, Minutes::from_hundredths(bound)),
                _ => Window::all(),
            };
            if self.floors.is_none() || window != self.window {
                self.floors = Some(Floors::build(self.map, self.query, self.cats, self.pools, &window));
                self.window = window;
            }
        }
        self.lower_bound() > bound
    }

    /// Admissible bound on the objective of any completion of this prefix.
    ///
    /// The settled prefix contributes its exact value. Each later stop that
    /// is already placed costs at least the fastest drive from its
    /// predecessor (or, when the predecessor might be absorbed, from the stop
    /// before that) plus its shortest possible stay. Each category still to
    /// place costs at least its cheapest inbound drive and stay, and the
    /// destination its cheapest inbound drive. With a charging stop in play
    /// one errand next to it may vanish into the charging window, so the
    /// largest such errand term is dropped.
    fn lower_bound(&self) -> i64 {
        let settled = self.settled_prefix();
        let floors = self.floors.as_ref().expect("floors are built before bounding");
        let unused: Vec<usize> = (0..self.cats.len()).filter(|ci| self.used & (1 << ci) == 0).collect();
        let k = self.stops.len() - 1;
        match self.query.objective {
            Objective::TotalTime => {
                let charger = self.stops[1..]
                    .iter()
                    .position(|id| self.map.pois[id.index()].category == Category::Charging)
                    .map(|p| p + 1);
                let charging_pending = self.has_charging && charger.is_none();
                let may_vanish = |i: usize| {
                    i >= 1
                        && i <= k
                        && floors.per_category[self.order[i - 1]].absorbable
                        && match charger {
                            Some(f) => i + 1 == f || i == f + 1,
                            None => charging_pending && i == k,
                        }
                };
                let mut rest = 0i64;
                let mut droppable = 0i64;
                for i in settled + 1..=k {
                    let to = self.stops[i];
                    let mut leg = floors.leg(self.stops[i - 1], to);
                    if may_vanish(i - 1) && i >= 2 {
                        leg = leg.min(floors.leg(self.stops[i - 2], to));
                    }
                    let term = (leg + floors.poi_stay[to.index()]).hundredths();
                    rest += term;
                    if may_vanish(i) {
                        droppable = droppable.max(term);
                    }
                }
                let future_absorption = charging_pending || charger == Some(k);
                for &ci in &unused {
                    let f = &floors.per_category[ci];
                    let term = (f.inbound + f.stay).hundredths();
                    rest += term;
                    if future_absorption && f.absorbable {
                        droppable = droppable.max(term);
                    }
                }
                self.departs[settled].hundredths() + rest - droppable + floors.dest_in.hundredths()
            }
            Objective::TotalDwell => {
                let placed: i64 = self.stops[settled + 1..]
                    .iter()
                    .map(|id| floors.poi_stay[id.index()].hundredths())
                    .sum();
                let pending: i64 = unused.iter().map(|&ci| floors.per_category[ci].stay.hundredths()).sum();
                self.dwell_sums[settled].hundredths() + placed + pending
            }
            Objective::TotalPrice => {
                self.price as i64
                    + unused
                        .iter()
                        .map(|&ci| floors.per_category[ci].price as i64)
                        .sum::<i64>()
            }
        }
    }
}

/// Clock hours and congestion buckets a plan may touch.
#[derive(PartialEq)]
struct Window {
    hours: [bool; 24],
    buckets: [bool; 4],
}

impl Window {
    fn all() -> Self {
        Window {
            hours: [true; 24],
            buckets: [true; 4],
        }
    }

    fn span(start: ClockTime, length: Minutes) -> Self {
        let minutes = (length.hundredths() + 99) / 100;
        if minutes >= MINUTES_PER_DAY as i64 {
            return Window::all();
        }
        let mut window = Window {
            hours: [false; 24],
            buckets: [false; 4],
        };
        for m in 0..=minutes as u32 {
            let t = start.wrapping_add_minutes(m);
            window.hours[t.hour()] = true;
            window.buckets[bucket_of(t).index()] = true;
        }
        window
    }
}

/// Per-category floors used by the search bound.
struct Floor {
    /// Fastest drive into any candidate.
    inbound: Minutes,
    /// Shortest possible stay at any candidate.
    stay: Minutes,
    price: u32,
    /// Could fit inside some charging window of this query.
    absorbable: bool,
}

struct Floors {
    per_category: Vec<Floor>,
    /// Fastest drive into the destination.
    dest_in: Minutes,
    /// Shortest stay at each POI, by id.
    poi_stay: Vec<Minutes>,
    /// Fastest drive for each ordered pair, row-major by id.
    legs: Vec<Minutes>,
    n: usize,
}

impl Floors {
    fn build(map: &WorldMap, query: &QuerySpec, cats: &[Category], pools: &[Vec<PoiId>], window: &Window) -> Self {
        let stay_floor = |category: Category, pool: &[PoiId]| match query.dwell_override(category) {
            Some(fixed) => fixed,
            None => pool
                .iter()
                .map(|&id| {
                    let poi = &map.pois[id.index()];
                    let quietest = (0..24)
                        .filter(|&h| window.hours[h])
                        .map(|h| poi.popularity[h])
                        .min()
                        .unwrap_or(0) as i64;
                    Minutes::from_hundredths(poi.base_dwell.unwrap_or(0) as i64 * (100 + quietest))
                })
                .min()
                .unwrap_or(Minutes::ZERO),
        };
        let chargers = cats
            .iter()
            .position(|&c| c == Category::Charging)
            .map(|ci| &pools[ci][..])
            .unwrap_or(&[]);
        let longest_charge = match query.dwell_override(Category::Charging) {
            Some(fixed) => fixed,
            None => chargers
                .iter()
                .map(|&id| {
                    let poi = &map.pois[id.index()];
                    let busiest = (0..24)
                        .filter(|&h| window.hours[h])
                        .map(|h| poi.popularity[h])
                        .max()
                        .unwrap_or(100) as i64;
                    Minutes::from_hundredths(poi.base_dwell.unwrap_or(0) as i64 * (100 + busiest))
                })
                .max()
                .unwrap_or(Minutes::ZERO),
        };
        let per_category = cats
            .iter()
            .zip(pools)
            .map(|(&category, pool)| {
                let stay = stay_floor(category, pool);
                let shortest_walk = chargers
                    .iter()
                    .flat_map(|&ch| pool.iter().map(move |&q| map.matrix.walk(ch, q)))
                    .min();
                let absorbable = category != Category::Charging
                    && shortest_walk.is_some_and(|w| Minutes::whole(2 * w) + stay <= longest_charge);
                Floor {
                    inbound: pool
                        .iter()
                        .map(|&id| min_inbound(map, id, window))
                        .min()
                        .unwrap_or(Minutes::ZERO),
                    stay,
                    price: pool
                        .iter()
                        .map(|&id| map.pois[id.index()].price_level as u32)
                        .min()
                        .unwrap_or(0),
                    absorbable,
                }
            })
            .collect();
        let n = map.len();
        let poi_stay = map
            .pois
            .iter()
            .map(|p| stay_floor(p.category, std::slice::from_ref(&p.id)))
            .collect();
        let mut legs = vec![Minutes::ZERO; n * n];
        for from in &map.pois {
            for to in &map.pois {
                let fastest = Bucket::ALL
                    .iter()
                    .filter(|b| window.buckets[b.index()])
                    .map(|&b| map.matrix.drive(b, from.id, to.id))
                    .min()
                    .unwrap_or(0);
                legs[from.id.index() * n + to.id.index()] = Minutes::whole(fastest);
            }
        }
        Floors {
            per_category,
            dest_in: min_inbound(map, query.destination, window),
            poi_stay,
            legs,
            n,
        }
    }

    fn leg(&self, from: PoiId, to: PoiId) -> Minutes {
        self.legs[from.index() * self.n + to.index()]
    }
}

fn min_inbound(map: &WorldMap, to: PoiId, window: &Window) -> Minutes {
    let minutes = Bucket::ALL
        .iter()
        .filter(|b| window.buckets[b.index()])
        .flat_map(|&b| {
            map.pois
                .iter()
                .filter(|p| p.id != to)
                .map(move |p| map.matrix.drive(b, p.id, to))
        })
        .min()
        .unwrap_or(0);
    Minutes::whole(minutes)
}
