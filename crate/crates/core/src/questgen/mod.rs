//! Question templates and seeded benchmark assembly.
//!
//! Each template has a closed set of named slots. Instantiation draws every
//! slot from its domain, re-drawing POIs until they are distinct and category
//! picks until they neither repeat nor form an excluded pair, then binds a
//! structured [`Request`] that the annotator answers without reading the text.

mod catalog;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{
    best_insertion, compare_routes, evaluate_plan, Departure, InsertionOutcome, Itinerary, Mode, Objective, QuerySpec,
};
use crate::time::{ClockTime, Minutes};
use crate::world::{Category, PoiId, WorldMap};

pub use catalog::{
    catalog, catalog_with_cap, AnswerKind, SlotDomain, Template, Workflow, DEFAULT_ALL_INTENTION_CAP, DWELL_OVERRIDES,
    PLANNING_DEPARTURES,
};

/// Draws per instance before generation gives up.
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Easy,
    Medium,
    Hard,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Easy, Level::Medium, Level::Hard];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Easy => "easy",
            Level::Medium => "medium",
            Level::Hard => "hard",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionCategory {
    NameLookup,
    TravelTime,
    Distance,
    DwellLookup,
    NearestNeighbor,
    PlanEvaluation,
    RouteComparison,
    ContextualRecommendation,
    TemporalOptimization,
    SingleFactor,
    FullItinerary,
    MultiConstraint,
    PreferenceAware,
    CustomDwell,
    AllIntention,
}

impl QuestionCategory {
    pub const ALL: [QuestionCategory; 15] = [
        QuestionCategory::NameLookup,
        QuestionCategory::TravelTime,
        QuestionCategory::Distance,
        QuestionCategory::DwellLookup,
        QuestionCategory::NearestNeighbor,
        QuestionCategory::PlanEvaluation,
        QuestionCategory::RouteComparison,
        QuestionCategory::ContextualRecommendation,
        QuestionCategory::TemporalOptimization,
        QuestionCategory::SingleFactor,
        QuestionCategory::FullItinerary,
        QuestionCategory::MultiConstraint,
        QuestionCategory::PreferenceAware,
        QuestionCategory::CustomDwell,
        QuestionCategory::AllIntention,
    ];

    pub fn level(self) -> Level {
        use QuestionCategory::*;
        match self {
            NameLookup | TravelTime | Distance | DwellLookup | NearestNeighbor => Level::Easy,
            PlanEvaluation | RouteComparison | ContextualRecommendation | TemporalOptimization | SingleFactor => {
                Level::Medium
            }
            FullItinerary | MultiConstraint | PreferenceAware | CustomDwell | AllIntention => Level::Hard,
        }
    }

    pub fn as_str(self) -> &'static str {
        use QuestionCategory::*;
        match self {
            NameLookup => "name_lookup",
            TravelTime => "travel_time",
            Distance => "distance",
            DwellLookup => "dwell_lookup",
            NearestNeighbor => "nearest_neighbor",
            PlanEvaluation => "plan_evaluation",
            RouteComparison => "route_comparison",
            ContextualRecommendation => "contextual_recommendation",
            TemporalOptimization => "temporal_optimization",
            SingleFactor => "single_factor",
            FullItinerary => "full_itinerary",
            MultiConstraint => "multi_constraint",
            PreferenceAware => "preference_aware",
            CustomDwell => "custom_dwell",
            AllIntention => "all_intention",
        }
    }
}

impl fmt::Display for QuestionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A bound slot value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SlotValue {
    Poi { id: PoiId, name: String },
    Category(Category),
    Categories(Vec<Category>),
    Time(ClockTime),
    Times(Vec<ClockTime>),
    Minutes(Minutes),
    Objective(Objective),
    Brand(String),
}

impl SlotValue {
    /// How the value appears in question text.
    pub fn surface(&self) -> String {
        match self {
            SlotValue::Poi { name, .. } => name.clone(),
            SlotValue::Category(c) => c.noun().to_string(),
            SlotValue::Categories(cs) => {
                let nouns: Vec<String> = cs.iter().map(|c| format!("a {}", c.noun())).collect();
                join_and(&nouns)
            }
            SlotValue::Time(t) => t.to_string(),
            SlotValue::Times(ts) => join_and(&ts.iter().map(ToString::to_string).collect::<Vec<_>>()),
            SlotValue::Minutes(m) => m.to_string(),
            SlotValue::Objective(o) => match o {
                Objective::TotalTime => "total time".into(),
                Objective::TotalPrice => "total price level".into(),
                Objective::TotalDwell => "total dwell time".into(),
            },
            SlotValue::Brand(b) => b.clone(),
        }
    }
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// The structured question an instance asks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    NameLookup {
        category: Category,
    },
    TravelTime {
        from: PoiId,
        to: PoiId,
        mode: Mode,
        time: Option<ClockTime>,
    },
    Distance {
        from: PoiId,
        to: PoiId,
    },
    DwellLookup {
        poi: PoiId,
        time: ClockTime,
    },
    Nearest {
        origin: PoiId,
        category: Category,
    },
    PlanTotal {
        itinerary: Itinerary,
        query: QuerySpec,
    },
    CompareRoutes {
        route_a: Itinerary,
        route_b: Itinerary,
        query: QuerySpec,
    },
    Insertion {
        base: Itinerary,
        category: Category,
        query: QuerySpec,
    },
    BestDeparture {
        query: QuerySpec,
        candidates: Vec<ClockTime>,
    },
    Optimize {
        query: QuerySpec,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionInstance {
    pub id: String,
    pub level: Level,
    pub category: QuestionCategory,
    pub template_id: String,
    pub text: String,
    pub slots: BTreeMap<String, SlotValue>,
    pub query: Request,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub easy: usize,
    pub medium: usize,
    pub hard: usize,
}

impl Default for LevelCounts {
    fn default() -> Self {
        LevelCounts {
            easy: 100,
            medium: 200,
            hard: 200,
        }
    }
}

impl LevelCounts {
    pub fn get(&self, level: Level) -> usize {
        match level {
            Level::Easy => self.easy,
            Level::Medium => self.medium,
            Level::Hard => self.hard,
        }
    }

    pub fn total(&self) -> usize {
        self.easy + self.medium + self.hard
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub counts: LevelCounts,
    pub all_intention_cap: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            counts: LevelCounts::default(),
            all_intention_cap: DEFAULT_ALL_INTENTION_CAP,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        for level in Level::ALL {
            if self.counts.get(level) == 0 {
                return Err(Error::Config(format!(
                    "question count for level {level} must be positive"
                )));
            }
        }
        if !(1..=crate::solver::MAX_REQUIRED).contains(&self.all_intention_cap) {
            return Err(Error::Config(format!(
                "all_intention_cap must be between 1 and {}",
                crate::solver::MAX_REQUIRED
            )));
        }
        Ok(())
    }
}

fn generation_error(template: &Template, message: impl Into<String>) -> Error {
    Error::Generation {
        template: template.id.to_string(),
        message: message.into(),
    }
}

/// Draws one instance of `template`. Instances whose fixed itineraries would
/// be closed on arrival, whose routes tie, or whose insertion has no feasible
/// choice are redrawn so every question has a well-posed answer.
pub fn instantiate_question<R: Rng + ?Sized>(
    template: &Template,
    map: &WorldMap,
    rng: &mut R,
    id: impl Into<String>,
) -> Result<QuestionInstance> {
    let id = id.into();
    for (slot, domain) in &template.slots {
        let empty = match domain {
            SlotDomain::PoiOf(cats) => !map.pois.iter().any(|p| cats.contains(&p.category)),
            SlotDomain::Category(cs) => cs.is_empty(),
            SlotDomain::CategorySet { pool, size } => pool.len() < *size,
            SlotDomain::Time(ts) | SlotDomain::Times(ts) => ts.is_empty(),
            SlotDomain::DwellOverride(vs) => vs.is_empty(),
            SlotDomain::Objective(os) => os.is_empty(),
            SlotDomain::PoiOfSlot(_) | SlotDomain::BrandOf(_) => false,
        };
        if empty {
            return Err(generation_error(template, format!("slot `{slot}` has an empty domain")));
        }
    }
    for _ in 0..MAX_ATTEMPTS {
        let Some(slots) = draw_slots(template, map, rng)? else {
            continue;
        };
        let query = bind_request(template, &slots)?;
        if !well_posed(map, &query)? {
            continue;
        }
        let text = render(template.text_pattern, &slots);
        return Ok(QuestionInstance {
            id,
            level: template.level,
            category: template.category,
            template_id: template.id.to_string(),
            text,
            slots: slots.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            query,
        });
    }
    Err(generation_error(
        template,
        format!("no valid instance after {MAX_ATTEMPTS} draws"),
    ))
}

/// `Ok(None)` asks the caller to redraw the whole instance.
fn draw_slots<R: Rng + ?Sized>(
    template: &Template,
    map: &WorldMap,
    rng: &mut R,
) -> Result<Option<Vec<(&'static str, SlotValue)>>> {
    let mut bound: Vec<(&'static str, SlotValue)> = Vec::new();
    let lookup =
        |bound: &[(&str, SlotValue)], name: &str| bound.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone());
    for (slot, domain) in &template.slots {
        let used_pois: Vec<PoiId> = bound
            .iter()
            .filter_map(|(_, v)| match v {
                SlotValue::Poi { id, .. } => Some(*id),
                _ => None,
            })
            .collect();
        let used_categories: Vec<Category> = bound
            .iter()
            .flat_map(|(_, v)| match v {
                SlotValue::Category(c) => vec![*c],
                SlotValue::Categories(cs) => cs.clone(),
                SlotValue::Poi { id, .. } => vec![map.pois[id.index()].category],
                _ => vec![],
            })
            .collect();

        let value = match domain {
            SlotDomain::PoiOf(_) | SlotDomain::PoiOfSlot(_) => {
                let pool: Vec<PoiId> = match domain {
                    SlotDomain::PoiOf(cats) => map
                        .pois
                        .iter()
                        .filter(|p| cats.contains(&p.category))
                        .map(|p| p.id)
                        .collect(),
                    SlotDomain::PoiOfSlot(source) => match lookup(&bound, source) {
                        Some(SlotValue::Category(c)) => map.pois_of(c).map(|p| p.id).collect(),
                        _ => {
                            return Err(generation_error(
                                template,
                                format!("slot `{slot}` needs category slot `{source}` first"),
                            ))
                        }
                    },
                    _ => unreachable!(),
                };
                if pool.iter().all(|id| used_pois.contains(id)) {
                    return Err(generation_error(
                        template,
                        format!("domain exhausted: no unused POI left for slot `{slot}`"),
                    ));
                }
                let id = loop {
                    let id = pool[rng.random_range(0..pool.len())];
                    if !used_pois.contains(&id) {
                        break id;
                    }
                };
                SlotValue::Poi {
                    id,
                    name: map.pois[id.index()].name.clone(),
                }
            }
            SlotDomain::Category(pool) => {
                let allowed = |c: &Category| {
                    let mut with = used_categories.clone();
                    with.push(*c);
                    !used_categories.contains(c) && map.excluded_pair(&with).is_none()
                };
                if !pool.iter().any(allowed) {
                    return Ok(None);
                }
                let c = loop {
                    let c = pool[rng.random_range(0..pool.len())];
                    if allowed(&c) {
                        break c;
                    }
                };
                SlotValue::Category(c)
            }
            SlotDomain::CategorySet { pool, size } => {
                let mut picked: Vec<usize> = sample(rng, pool.len(), *size).into_vec();
                picked.sort_unstable();
                let set: Vec<Category> = picked.iter().map(|&i| pool[i]).collect();
                if map.excluded_pair(&set).is_some() || set.iter().any(|c| used_categories.contains(c)) {
                    return Ok(None);
                }
                SlotValue::Categories(set)
            }
            SlotDomain::Time(pool) => SlotValue::Time(pool[rng.random_range(0..pool.len())]),
            SlotDomain::Times(all) => SlotValue::Times(all.clone()),
            SlotDomain::DwellOverride(pool) => {
                SlotValue::Minutes(Minutes::whole(pool[rng.random_range(0..pool.len())]))
            }
            SlotDomain::Objective(pool) => SlotValue::Objective(pool[rng.random_range(0..pool.len())]),
            SlotDomain::BrandOf(source) => {
                let Some(SlotValue::Category(c)) = lookup(&bound, source) else {
                    return Err(generation_error(
                        template,
                        format!("slot `{slot}` needs category slot `{source}` first"),
                    ));
                };
                let mut brands: Vec<&str> = map.pois_of(c).filter_map(|p| p.brand.as_deref()).collect();
                brands.sort_unstable();
                brands.dedup();
                if brands.is_empty() {
                    return Ok(None);
                }
                SlotValue::Brand(brands[rng.random_range(0..brands.len())].to_string())
            }
        };
        bound.push((slot, value));
    }
    Ok(Some(bound))
}

fn render(pattern: &str, slots: &[(&'static str, SlotValue)]) -> String {
    let mut text = pattern.to_string();
    for (name, value) in slots {
        text = text.replace(&format!("{{{name}}}"), &value.surface());
    }
    text
}

fn bind_request(template: &Template, slots: &[(&'static str, SlotValue)]) -> Result<Request> {
    let get = |name: &str| {
        slots
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| generation_error(template, format!("slot `{name}` is not bound")))
    };
    let poi = |name: &str| match get(name)? {
        SlotValue::Poi { id, .. } => Ok(*id),
        other => Err(generation_error(
            template,
            format!("slot `{name}` holds {other:?}, not a POI"),
        )),
    };
    let category = |name: &str| match get(name)? {
        SlotValue::Category(c) => Ok(*c),
        other => Err(generation_error(
            template,
            format!("slot `{name}` holds {other:?}, not a category"),
        )),
    };
    let time = |name: &str| match get(name)? {
        SlotValue::Time(t) => Ok(*t),
        other => Err(generation_error(
            template,
            format!("slot `{name}` holds {other:?}, not a time"),
        )),
    };
    let has = |name: &str| slots.iter().any(|(n, _)| *n == name);

    let planning_query = || -> Result<QuerySpec> {
        let mut categories = Vec::new();
        for name in ["category_1", "category_2", "category_3"] {
            if has(name) {
                categories.push(category(name)?);
            }
        }
        if let Ok(SlotValue::Categories(cs)) = get("categories") {
            categories.extend(cs.iter().copied());
        }
        let departure = if has("time") {
            time("time")?
        } else {
            PLANNING_DEPARTURES[0]
        };
        let mut q = QuerySpec::new(poi("origin")?, poi("destination")?, departure).with_categories(&categories);
        if let Ok(SlotValue::Brand(b)) = get("brand") {
            q.brand_preferences.insert(category("category_1")?, b.clone());
        }
        if let Ok(SlotValue::Minutes(m)) = get("dwell_override") {
            q.dwell_overrides.insert(category("category_1")?, *m);
        }
        if let Ok(SlotValue::Objective(o)) = get("objective") {
            q.objective = *o;
        }
        Ok(q)
    };

    Ok(match template.workflow {
        Workflow::NameScan => Request::NameLookup {
            category: category("category")?,
        },
        Workflow::DriveLookup => Request::TravelTime {
            from: poi("poi_a")?,
            to: poi("poi_b")?,
            mode: Mode::Drive,
            time: Some(time("time")?),
        },
        Workflow::WalkLookup => Request::TravelTime {
            from: poi("poi_a")?,
            to: poi("poi_b")?,
            mode: Mode::Walk,
            time: None,
        },
        Workflow::DistanceLookup => Request::Distance {
            from: poi("poi_a")?,
            to: poi("poi_b")?,
        },
        Workflow::DwellLookup => Request::DwellLookup {
            poi: poi("poi_a")?,
            time: time("time")?,
        },
        Workflow::NearestScan => Request::Nearest {
            origin: poi("origin")?,
            category: category("category")?,
        },
        Workflow::PlanTotal => {
            let query = planning_query()?;
            Request::PlanTotal {
                itinerary: Itinerary::new(
                    vec![query.origin, poi("poi_a")?, poi("poi_b")?, query.destination],
                    time("time")?,
                ),
                query,
            }
        }
        Workflow::RouteCompare => {
            let query = planning_query()?;
            let t = time("time")?;
            Request::CompareRoutes {
                route_a: Itinerary::new(vec![query.origin, poi("poi_a")?, query.destination], t),
                route_b: Itinerary::new(vec![query.origin, poi("poi_b")?, query.destination], t),
                query,
            }
        }
        Workflow::BestInsertion => {
            let query = planning_query()?;
            Request::Insertion {
                base: Itinerary::new(vec![query.origin, poi("poi_a")?, query.destination], time("time")?),
                category: category("category")?,
                query,
            }
        }
        Workflow::BestDeparture => {
            let SlotValue::Times(candidates) = get("times")? else {
                return Err(generation_error(template, "slot `times` is not a time set"));
            };
            let mut query = planning_query()?;
            query.departure = Departure::Candidates(candidates.clone());
            Request::BestDeparture {
                query,
                candidates: candidates.clone(),
            }
        }
        Workflow::Optimize => Request::Optimize {
            query: planning_query()?,
        },
    })
}

/// Cheap checks that the bound question has a single well-defined answer.
fn well_posed(map: &WorldMap, request: &Request) -> Result<bool> {
    Ok(match request {
        Request::PlanTotal { itinerary, query } => evaluate_plan(map, itinerary, query)?.feasible,
        Request::CompareRoutes {
            route_a,
            route_b,
            query,
        } => {
            let cmp = compare_routes(map, route_a, route_b, query)?;
            !cmp.tie && evaluate_plan(map, route_a, query)?.feasible && evaluate_plan(map, route_b, query)?.feasible
        }
        Request::Insertion { base, category, query } => {
            evaluate_plan(map, base, query)?.feasible
                && matches!(
                    best_insertion(map, base, *category, query)?.outcome,
                    InsertionOutcome::Best { .. }
                )
        }
        _ => true,
    })
}

/// Builds the full question set. Templates of a level are cycled round-robin;
/// one seeded generator drives every draw, so the output is a pure function
/// of the map, seed, and config.
pub fn generate_dataset(map: &WorldMap, seed: u64, config: &DatasetConfig) -> Result<Vec<QuestionInstance>> {
    config.validate()?;
    let templates = catalog_with_cap(config.all_intention_cap);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(config.counts.total());
    for level in Level::ALL {
        let level_templates: Vec<&Template> = templates.iter().filter(|t| t.level == level).collect();
        let mut ordinals: BTreeMap<QuestionCategory, usize> = BTreeMap::new();
        for i in 0..config.counts.get(level) {
            let template = level_templates[i % level_templates.len()];
            let ordinal = ordinals.entry(template.category).or_insert(0);
            *ordinal += 1;
            let id = format!("L{}-{}-{:03}", level.number(), template.category, ordinal);
            out.push(instantiate_question(template, map, &mut rng, id)?);
        }
    }
    Ok(out)
}

/// Replaces the question text with `transformer(text)`. Everything the
/// answer depends on is left alone; an empty rewrite keeps the original.
pub fn paraphrase_hook(instance: &QuestionInstance, transformer: impl Fn(&str) -> String) -> QuestionInstance {
    let mut out = instance.clone();
    let rewritten = transformer(&instance.text);
    if !rewritten.trim().is_empty() {
        out.text = rewritten;
    }
    out
}
