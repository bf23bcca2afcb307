//! Ground-truth workflows and the benchmark file.
//!
//! Every template names one workflow. The workflow reads only the structured
//! request, never the question text, and returns a primary answer plus
//! auxiliary evidence such as the optimal plan's legs and how many candidate
//! plans exist.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::questgen::{catalog, AnswerKind, QuestionInstance, Request, Template, Workflow};
use crate::solver::{
    best_departure, best_insertion, candidate_space_size, compare_routes, evaluate_plan, nearest_poi, solve,
    Absorption, Engine, EvaluatedPlan, InsertionOutcome, Label, Leg, Mode, Outcome, QuerySpec, Solution, Violation,
};
use crate::time::{bucket_of, dwell_minutes, ClockTime, Minutes};
use crate::world::{map_hash, PoiId, WorldMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    NameList(Vec<String>),
    Minutes(f64),
    Kilometers(f64),
    Poi {
        id: PoiId,
        name: String,
    },
    Clock(ClockTime),
    /// Stop names in visit order, origin and destination included.
    Plan {
        stops: Vec<String>,
        departure: ClockTime,
    },
    Label(Label),
    Infeasible,
}

impl Answer {
    /// `None` for [`Answer::Infeasible`], which any template may produce.
    pub fn kind(&self) -> Option<AnswerKind> {
        Some(match self {
            Answer::NameList(_) => AnswerKind::NameList,
            Answer::Minutes(_) => AnswerKind::Minutes,
            Answer::Kilometers(_) => AnswerKind::Kilometers,
            Answer::Poi { .. } => AnswerKind::Poi,
            Answer::Clock(_) => AnswerKind::Clock,
            Answer::Plan { .. } => AnswerKind::Plan,
            Answer::Label(_) => AnswerKind::Label,
            Answer::Infeasible => return None,
        })
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            Answer::NameList(_) => "name_list",
            Answer::Minutes(_) => "minutes",
            Answer::Kilometers(_) => "kilometers",
            Answer::Poi { .. } => "poi",
            Answer::Clock(_) => "clock",
            Answer::Plan { .. } => "plan",
            Answer::Label(_) => "label",
            Answer::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Auxiliary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_min: Option<Minutes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leg_breakdown: Option<Vec<Leg>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorptions: Option<Vec<Absorption>>,
    /// Complete candidate plans plain enumeration examines for this question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub considered_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasible_reason: Option<Vec<Violation>>,
    /// Totals of routes A and B.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route_totals: Option<[Minutes; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub primary: Answer,
    #[serde(default)]
    pub auxiliary: Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    #[serde(flatten)]
    pub question: QuestionInstance,
    pub ground_truth: GroundTruth,
}

/// Binds a dataset to the exact map it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRef {
    pub seed: u64,
    pub hash: String,
}

impl MapRef {
    pub fn of(map: &WorldMap) -> Self {
        MapRef {
            seed: map.seed,
            hash: map_hash(map),
        }
    }

    /// Fails unless `map` hashes to this reference.
    pub fn check(&self, map: &WorldMap, file: &str) -> Result<()> {
        let actual = map_hash(map);
        if actual != self.hash {
            return Err(Error::Validation(format!(
                "{file}: map_ref.hash {} does not match the map ({actual})",
                self.hash
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionsFile {
    pub map_ref: MapRef,
    pub questions: Vec<QuestionInstance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Benchmark {
    pub map_ref: MapRef,
    pub questions: Vec<BenchmarkRecord>,
}

fn template_for<'a>(templates: &'a [Template], question: &QuestionInstance) -> Result<&'a Template> {
    templates.iter().find(|t| t.id == question.template_id).ok_or_else(|| {
        Error::Validation(format!(
            "question `{}`: unknown template `{}`",
            question.id, question.template_id
        ))
    })
}

fn workflow_of(request: &Request) -> Workflow {
    match request {
        Request::NameLookup { .. } => Workflow::NameScan,
        Request::TravelTime { mode: Mode::Drive, .. } => Workflow::DriveLookup,
        Request::TravelTime { mode: Mode::Walk, .. } => Workflow::WalkLookup,
        Request::Distance { .. } => Workflow::DistanceLookup,
        Request::DwellLookup { .. } => Workflow::DwellLookup,
        Request::Nearest { .. } => Workflow::NearestScan,
        Request::PlanTotal { .. } => Workflow::PlanTotal,
        Request::CompareRoutes { .. } => Workflow::RouteCompare,
        Request::Insertion { .. } => Workflow::BestInsertion,
        Request::BestDeparture { .. } => Workflow::BestDeparture,
        Request::Optimize { .. } => Workflow::Optimize,
    }
}

/// Checks an instance against the template catalog: the template exists,
/// level and category agree with it, and the request fits its workflow.
pub fn check_instance(question: &QuestionInstance) -> Result<()> {
    let templates = catalog();
    let template = template_for(&templates, question)?;
    check_against(template, question)
}

fn check_against(template: &Template, question: &QuestionInstance) -> Result<()> {
    let fail = |what: String| Err(Error::Validation(format!("question `{}`: {what}", question.id)));
    if template.level != question.level || template.category != question.category {
        return fail(format!(
            "template `{}` is {}/{}, record says {}/{}",
            template.id, template.level, template.category, question.level, question.category
        ));
    }
    let workflow = workflow_of(&question.query);
    if workflow != template.workflow {
        return fail(format!(
            "request is a {} workflow but template `{}` uses {}",
            workflow.as_str(),
            template.id,
            template.workflow.as_str()
        ));
    }
    Ok(())
}

fn names(map: &WorldMap, stops: &[PoiId]) -> Vec<String> {
    stops.iter().map(|&id| map.pois[id.index()].name.clone()).collect()
}

fn plan_aux(plan: &EvaluatedPlan, considered: u64) -> Auxiliary {
    Auxiliary {
        total_min: Some(plan.total_min),
        leg_breakdown: Some(plan.legs.clone()),
        absorptions: (!plan.absorptions.is_empty()).then(|| plan.absorptions.clone()),
        considered_count: Some(considered),
        ..Auxiliary::default()
    }
}

fn infeasible(violations: &[Violation], considered: u64) -> GroundTruth {
    GroundTruth {
        primary: Answer::Infeasible,
        auxiliary: Auxiliary {
            considered_count: Some(considered),
            infeasible_reason: Some(violations.to_vec()),
            ..Auxiliary::default()
        },
    }
}

fn from_solution(map: &WorldMap, solution: &Solution, considered: u64) -> GroundTruth {
    match &solution.outcome {
        Outcome::Optimal(plan) => GroundTruth {
            primary: Answer::Plan {
                stops: names(map, &plan.itinerary.stops),
                departure: plan.departure(),
            },
            auxiliary: plan_aux(plan, considered),
        },
        Outcome::Infeasible { violations, .. } => infeasible(violations, considered),
    }
}

/// Ground truth using the branch-and-bound solver.
pub fn annotate(map: &WorldMap, question: &QuestionInstance) -> Result<GroundTruth> {
    annotate_with(map, question, Engine::BranchAndBound)
}

/// Ground truth using the chosen search engine. Both engines give the same
/// answer; `considered_count` is the size of the candidate space either way.
pub fn annotate_with(map: &WorldMap, question: &QuestionInstance, engine: Engine) -> Result<GroundTruth> {
    check_instance(question)?;
    let poi = |id: PoiId| map.poi(id);
    Ok(match &question.query {
        Request::NameLookup { category } => GroundTruth {
            primary: Answer::NameList(map.pois_of(*category).map(|p| p.name.clone()).collect()),
            auxiliary: Auxiliary::default(),
        },
        Request::TravelTime { from, to, mode, time } => {
            poi(*from)?;
            poi(*to)?;
            let minutes = match (mode, time) {
                (Mode::Drive, Some(t)) => map.matrix.drive(bucket_of(*t), *from, *to),
                (Mode::Drive, None) => {
                    return Err(Error::Validation(format!(
                        "question `{}`: driving time needs a time",
                        question.id
                    )))
                }
                (Mode::Walk, _) => map.matrix.walk(*from, *to),
            };
            GroundTruth {
                primary: Answer::Minutes(Minutes::whole(minutes).as_f64()),
                auxiliary: Auxiliary::default(),
            }
        }
        Request::Distance { from, to } => GroundTruth {
            primary: Answer::Kilometers(map.distance_km(*from, *to)?),
            auxiliary: Auxiliary::default(),
        },
        Request::DwellLookup { poi: id, time } => GroundTruth {
            primary: Answer::Minutes(dwell_minutes(poi(*id)?, *time, None).as_f64()),
            auxiliary: Auxiliary::default(),
        },
        Request::Nearest { origin, category } => {
            let id = nearest_poi(map, *origin, *category)?;
            GroundTruth {
                primary: Answer::Poi {
                    id,
                    name: map.pois[id.index()].name.clone(),
                },
                auxiliary: Auxiliary {
                    considered_count: Some(map.pois_of(*category).filter(|p| p.id != *origin).count() as u64),
                    ..Auxiliary::default()
                },
            }
        }
        Request::PlanTotal { itinerary, query } => {
            let plan = evaluate_plan(map, itinerary, query)?;
            let mut auxiliary = plan_aux(&plan, 1);
            if !plan.feasible {
                auxiliary.infeasible_reason = Some(plan.violations.clone());
            }
            GroundTruth {
                primary: Answer::Minutes(plan.total_min.as_f64()),
                auxiliary,
            }
        }
        Request::CompareRoutes {
            route_a,
            route_b,
            query,
        } => {
            let cmp = compare_routes(map, route_a, route_b, query)?;
            GroundTruth {
                primary: Answer::Label(cmp.winner),
                auxiliary: Auxiliary {
                    route_totals: Some([cmp.total_a, cmp.total_b]),
                    tie: Some(cmp.tie),
                    considered_count: Some(2),
                    ..Auxiliary::default()
                },
            }
        }
        Request::Insertion { base, category, query } => {
            let insertion = best_insertion(map, base, *category, query)?;
            match insertion.outcome {
                InsertionOutcome::Best { poi: id, plan, .. } => GroundTruth {
                    primary: Answer::Poi {
                        id,
                        name: map.pois[id.index()].name.clone(),
                    },
                    auxiliary: plan_aux(&plan, insertion.considered),
                },
                InsertionOutcome::Infeasible { violations } => infeasible(&violations, insertion.considered),
            }
        }
        Request::BestDeparture { query, candidates } => {
            let solution = best_departure(map, query, candidates, engine)?;
            let considered = departure_space(map, query, candidates);
            match &solution.outcome {
                Outcome::Optimal(plan) => GroundTruth {
                    primary: Answer::Clock(plan.departure()),
                    auxiliary: plan_aux(plan, considered),
                },
                Outcome::Infeasible { violations, .. } => infeasible(violations, considered),
            }
        }
        Request::Optimize { query } => {
            let solution = solve(map, query, engine)?;
            from_solution(map, &solution, candidate_space_size(map, query))
        }
    })
}

fn departure_space(map: &WorldMap, query: &QuerySpec, candidates: &[ClockTime]) -> u64 {
    let mut q = query.clone();
    q.departure = crate::solver::Departure::Candidates(candidates.to_vec());
    candidate_space_size(map, &q)
}

/// Annotates every question in parallel; output order follows input order.
pub fn annotate_all(map: &WorldMap, questions: &[QuestionInstance]) -> Result<Vec<BenchmarkRecord>> {
    annotate_all_with(map, questions, Engine::BranchAndBound)
}

pub fn annotate_all_with(
    map: &WorldMap,
    questions: &[QuestionInstance],
    engine: Engine,
) -> Result<Vec<BenchmarkRecord>> {
    questions
        .par_iter()
        .map(|q| {
            let ground_truth = annotate_with(map, q, engine).map_err(|e| Error::Annotation {
                question: q.id.clone(),
                source: Box::new(e),
            })?;
            Ok(BenchmarkRecord {
                question: q.clone(),
                ground_truth,
            })
        })
        .collect()
}

/// A ground truth that did not re-derive identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub question: String,
    /// `primary`, `total_min`, `considered_count`, or `auxiliary`.
    pub field: &'static str,
    pub detail: String,
}

/// Recomputes every ground truth with plain enumeration and lists the
/// records whose stored answer differs.
pub fn verify(map: &WorldMap, benchmark: &Benchmark) -> Result<Vec<Mismatch>> {
    benchmark.map_ref.check(map, "benchmark")?;
    let results: Vec<Option<Mismatch>> = benchmark
        .questions
        .par_iter()
        .map(|record| {
            let q = &record.question;
            let fresh = annotate_with(map, q, Engine::Exhaustive).map_err(|e| Error::Annotation {
                question: q.id.clone(),
                source: Box::new(e),
            })?;
            let stored = &record.ground_truth;
            let mismatch = |field, a: String, b: String| {
                Some(Mismatch {
                    question: q.id.clone(),
                    field,
                    detail: format!("stored {a}, re-derived {b}"),
                })
            };
            Ok(if stored.primary != fresh.primary {
                mismatch(
                    "primary",
                    format!("{:?}", stored.primary),
                    format!("{:?}", fresh.primary),
                )
            } else if stored.auxiliary.total_min != fresh.auxiliary.total_min {
                mismatch(
                    "total_min",
                    format!("{:?}", stored.auxiliary.total_min),
                    format!("{:?}", fresh.auxiliary.total_min),
                )
            } else if stored.auxiliary.considered_count != fresh.auxiliary.considered_count {
                mismatch(
                    "considered_count",
                    format!("{:?}", stored.auxiliary.considered_count),
                    format!("{:?}", fresh.auxiliary.considered_count),
                )
            } else if stored.auxiliary != fresh.auxiliary {
                mismatch("auxiliary", "a different auxiliary block".into(), "another".into())
            } else {
                None
            })
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

fn to_file_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(value).expect("serialization to memory cannot fail");
    bytes.push(b'\n');
    bytes
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, to_file_bytes(value)).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_json(&bytes, &path.display().to_string())
}

pub(crate) fn parse_json<T: DeserializeOwned>(bytes: &[u8], origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| Error::from_path_error(origin, e))
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>, origin: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Validation(format!("{origin}: duplicate question id `{id}`")));
        }
    }
    Ok(())
}

/// Validates a benchmark: unique ids, known templates, answers of the
/// template's declared kind.
pub fn check_benchmark(benchmark: &Benchmark, origin: &str) -> Result<()> {
    check_unique(benchmark.questions.iter().map(|r| r.question.id.as_str()), origin)?;
    let templates = catalog();
    for record in &benchmark.questions {
        let q = &record.question;
        let template = template_for(&templates, q)?;
        check_against(template, q)?;
        if let Some(kind) = record.ground_truth.primary.kind() {
            if kind != template.answer {
                return Err(Error::Validation(format!(
                    "{origin}: question `{}` has a {} answer but template `{}` answers with {:?}",
                    q.id,
                    record.ground_truth.primary.kind_str(),
                    template.id,
                    template.answer
                )));
            }
        }
    }
    Ok(())
}

pub fn benchmark_to_json(benchmark: &Benchmark) -> Vec<u8> {
    to_file_bytes(benchmark)
}

pub fn parse_benchmark(bytes: &[u8], origin: &str) -> Result<Benchmark> {
    let benchmark: Benchmark = parse_json(bytes, origin)?;
    check_benchmark(&benchmark, origin)?;
    Ok(benchmark)
}

pub fn emit_benchmark(benchmark: &Benchmark, path: impl AsRef<Path>) -> Result<()> {
    write_json(benchmark, path.as_ref())
}

pub fn load_benchmark(path: impl AsRef<Path>) -> Result<Benchmark> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_benchmark(&bytes, &path.display().to_string())
}

pub fn save_questions(file: &QuestionsFile, path: impl AsRef<Path>) -> Result<()> {
    write_json(file, path.as_ref())
}

pub fn load_questions(path: impl AsRef<Path>) -> Result<QuestionsFile> {
    let path = path.as_ref();
    let file: QuestionsFile = read_json(path)?;
    let origin = path.display().to_string();
    check_unique(file.questions.iter().map(|q| q.id.as_str()), &origin)?;
    for q in &file.questions {
        check_instance(q)?;
    }
    Ok(file)
}
