use serde::{Deserialize, Serialize};

use super::{Level, QuestionCategory};
use crate::solver::Objective;
use crate::time::{Bucket, ClockTime};
use crate::world::Category;

/// Departure pool for planning questions. Midnight is left out because every
/// errand category is closed then.
pub const PLANNING_DEPARTURES: [ClockTime; 3] = [ClockTime::hm(9, 0), ClockTime::hm(12, 0), ClockTime::hm(18, 0)];

pub const DWELL_OVERRIDES: [u32; 5] = [10, 15, 20, 30, 45];

pub const DEFAULT_ALL_INTENTION_CAP: usize = 4;

/// What a question's answer looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    NameList,
    Minutes,
    Kilometers,
    Poi,
    Clock,
    Plan,
    Label,
}

/// Procedure that computes a template's ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workflow {
    NameScan,
    DriveLookup,
    WalkLookup,
    DistanceLookup,
    DwellLookup,
    NearestScan,
    PlanTotal,
    RouteCompare,
    BestInsertion,
    BestDeparture,
    Optimize,
}

impl Workflow {
    pub fn as_str(self) -> &'static str {
        match self {
            Workflow::NameScan => "name_scan",
            Workflow::DriveLookup => "drive_lookup",
            Workflow::WalkLookup => "walk_lookup",
            Workflow::DistanceLookup => "distance_lookup",
            Workflow::DwellLookup => "dwell_lookup",
            Workflow::NearestScan => "nearest_scan",
            Workflow::PlanTotal => "plan_total",
            Workflow::RouteCompare => "route_compare",
            Workflow::BestInsertion => "best_insertion",
            Workflow::BestDeparture => "best_departure",
            Workflow::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlotDomain {
    /// Any POI whose category is listed.
    PoiOf(Vec<Category>),
    /// Any POI of the category bound to the named slot.
    PoiOfSlot(&'static str),
    Category(Vec<Category>),
    /// A fixed-size subset of the pool, in pool order.
    CategorySet {
        pool: Vec<Category>,
        size: usize,
    },
    Time(Vec<ClockTime>),
    /// Bound whole; the question asks to choose among these.
    Times(Vec<ClockTime>),
    DwellOverride(Vec<u32>),
    Objective(Vec<Objective>),
    /// A brand carried by POIs of the category bound to the named slot.
    BrandOf(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: &'static str,
    pub level: Level,
    pub category: QuestionCategory,
    /// English text with `{slot}` placeholders.
    pub text_pattern: &'static str,
    /// Slots in draw order.
    pub slots: Vec<(&'static str, SlotDomain)>,
    pub workflow: Workflow,
    pub answer: AnswerKind,
}

impl Template {
    pub fn domain(&self, slot: &str) -> Option<&SlotDomain> {
        self.slots.iter().find(|(name, _)| *name == slot).map(|(_, d)| d)
    }

    /// Placeholder names in `text_pattern`, in order of appearance.
    pub fn placeholders(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut rest = self.text_pattern;
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            let close = after.find('}').expect("balanced braces in template text");
            out.push(&after[..close]);
            rest = &after[close + 1..];
        }
        out
    }
}

fn errands() -> Vec<Category> {
    Category::DWELL_BEARING.to_vec()
}

fn anywhere() -> SlotDomain {
    SlotDomain::PoiOf(Category::ALL.to_vec())
}

fn home() -> SlotDomain {
    SlotDomain::PoiOf(vec![Category::Apartment])
}

fn work() -> SlotDomain {
    SlotDomain::PoiOf(vec![Category::Company])
}

fn planning_time() -> SlotDomain {
    SlotDomain::Time(PLANNING_DEPARTURES.to_vec())
}

fn anchor_time() -> SlotDomain {
    SlotDomain::Time(Bucket::anchors())
}

/// The sixteen templates with the default all-intention cap.
pub fn catalog() -> Vec<Template> {
    catalog_with_cap(DEFAULT_ALL_INTENTION_CAP)
}

/// The template catalog; `all_intention_cap` bounds the all-intention
/// category set (at most the number of errand categories).
pub fn catalog_with_cap(all_intention_cap: usize) -> Vec<Template> {
    use AnswerKind as A;
    use Level::*;
    use QuestionCategory as Q;
    use Workflow as W;
    let cap = all_intention_cap.min(Category::DWELL_BEARING.len());
    vec![
        Template {
            id: "name_lookup",
            level: Easy,
            category: Q::NameLookup,
            text_pattern: "List the names of every {category} on the map.",
            slots: vec![("category", SlotDomain::Category(Category::ALL.to_vec()))],
            workflow: W::NameScan,
            answer: A::NameList,
        },
        Template {
            id: "travel_time_driving",
            level: Easy,
            category: Q::TravelTime,
            text_pattern: "How many minutes does it take to drive from {poi_a} to {poi_b} when leaving at {time}?",
            slots: vec![("poi_a", anywhere()), ("poi_b", anywhere()), ("time", anchor_time())],
            workflow: W::DriveLookup,
            answer: A::Minutes,
        },
        Template {
            id: "travel_time_walking",
            level: Easy,
            category: Q::TravelTime,
            text_pattern: "How many minutes does it take to walk from {poi_a} to {poi_b}?",
            slots: vec![("poi_a", anywhere()), ("poi_b", anywhere())],
            workflow: W::WalkLookup,
            answer: A::Minutes,
        },
        Template {
            id: "distance",
            level: Easy,
            category: Q::Distance,
            text_pattern: "What is the road distance in kilometers between {poi_a} and {poi_b}?",
            slots: vec![("poi_a", anywhere()), ("poi_b", anywhere())],
            workflow: W::DistanceLookup,
            answer: A::Kilometers,
        },
        Template {
            id: "dwell_lookup",
            level: Easy,
            category: Q::DwellLookup,
            text_pattern: "How many minutes does a visit to {poi_a} take when arriving at {time}?",
            slots: vec![("poi_a", SlotDomain::PoiOf(errands())), ("time", anchor_time())],
            workflow: W::DwellLookup,
            answer: A::Minutes,
        },
        Template {
            id: "nearest_neighbor",
            level: Easy,
            category: Q::NearestNeighbor,
            text_pattern: "Which {category} is closest to {origin} by road distance?",
            slots: vec![("origin", anywhere()), ("category", SlotDomain::Category(errands()))],
            workflow: W::NearestScan,
            answer: A::Poi,
        },
        Template {
            id: "plan_evaluation",
            level: Medium,
            category: Q::PlanEvaluation,
            text_pattern: "I leave {origin} at {time}, drive to {poi_a}, then {poi_b}, then {destination}. \
                           How many minutes does the whole trip take, including time spent at each stop?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("poi_a", SlotDomain::PoiOf(errands())),
                ("poi_b", SlotDomain::PoiOf(errands())),
                ("time", planning_time()),
            ],
            workflow: W::PlanTotal,
            answer: A::Minutes,
        },
        Template {
            id: "route_comparison",
            level: Medium,
            category: Q::RouteComparison,
            text_pattern: "Leaving {origin} at {time} for {destination} with one stop at a {category}: \
                           is route A via {poi_a} or route B via {poi_b} shorter?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category", SlotDomain::Category(errands())),
                ("poi_a", SlotDomain::PoiOfSlot("category")),
                ("poi_b", SlotDomain::PoiOfSlot("category")),
                ("time", planning_time()),
            ],
            workflow: W::RouteCompare,
            answer: A::Label,
        },
        Template {
            id: "contextual_recommendation",
            level: Medium,
            category: Q::ContextualRecommendation,
            text_pattern: "My plan is {origin} to {poi_a} to {destination}, leaving at {time}. \
                           Which {category} should I add so the trip is as short as possible?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("poi_a", SlotDomain::PoiOf(errands())),
                ("category", SlotDomain::Category(errands())),
                ("time", planning_time()),
            ],
            workflow: W::BestInsertion,
            answer: A::Poi,
        },
        Template {
            id: "temporal_optimization",
            level: Medium,
            category: Q::TemporalOptimization,
            text_pattern: "I need to go from {origin} to {destination} and stop at a {category_1} on the way. \
                           Which departure time among {times} gives the shortest trip (earliest on a tie)?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category_1", SlotDomain::Category(errands())),
                ("times", SlotDomain::Times(Bucket::anchors())),
            ],
            workflow: W::BestDeparture,
            answer: A::Clock,
        },
        Template {
            id: "single_factor",
            level: Medium,
            category: Q::SingleFactor,
            text_pattern: "Leaving {origin} at {time} for {destination}, I want to stop at a {category_1} and a \
                           {category_2}. Which plan has the lowest {objective}, preferring the shorter trip on a tie?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category_1", SlotDomain::Category(errands())),
                ("category_2", SlotDomain::Category(errands())),
                (
                    "objective",
                    SlotDomain::Objective(vec![Objective::TotalPrice, Objective::TotalDwell]),
                ),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
        Template {
            id: "full_itinerary",
            level: Hard,
            category: Q::FullItinerary,
            text_pattern: "Build the fastest trip from {origin} to {destination} leaving at {time} \
                           that visits a {category_1} and a {category_2}.",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category_1", SlotDomain::Category(errands())),
                ("category_2", SlotDomain::Category(errands())),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
        Template {
            id: "multi_constraint",
            level: Hard,
            category: Q::MultiConstraint,
            text_pattern: "Leaving {origin} at {time}, I must visit a {category_1}, a {category_2} and a \
                           {category_3}, all while open, before reaching {destination}. What is the fastest plan?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category_1", SlotDomain::Category(errands())),
                ("category_2", SlotDomain::Category(errands())),
                ("category_3", SlotDomain::Category(errands())),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
        Template {
            id: "preference_aware",
            level: Hard,
            category: Q::PreferenceAware,
            text_pattern: "Going from {origin} to {destination} at {time}, I want a {category_1} of the {brand} \
                           brand and a {category_2}. What is the fastest plan?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                (
                    "category_1",
                    SlotDomain::Category(vec![Category::Charging, Category::Cafe]),
                ),
                ("brand", SlotDomain::BrandOf("category_1")),
                ("category_2", SlotDomain::Category(errands())),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
        Template {
            id: "custom_dwell",
            level: Hard,
            category: Q::CustomDwell,
            text_pattern: "I leave {origin} at {time} for {destination} and will stop at a {category_1} for exactly \
                           {dwell_override} minutes and at a {category_2}. What is the fastest plan?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                ("category_1", SlotDomain::Category(errands())),
                ("dwell_override", SlotDomain::DwellOverride(DWELL_OVERRIDES.to_vec())),
                ("category_2", SlotDomain::Category(errands())),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
        Template {
            id: "all_intention",
            level: Hard,
            category: Q::AllIntention,
            text_pattern: "Leaving {origin} at {time}, I want to get everything done on the way to {destination}: \
                           {categories}. What is the fastest plan?",
            slots: vec![
                ("origin", home()),
                ("destination", work()),
                (
                    "categories",
                    SlotDomain::CategorySet {
                        pool: errands(),
                        size: cap,
                    },
                ),
                ("time", planning_time()),
            ],
            workflow: W::Optimize,
            answer: A::Plan,
        },
    ]
}
