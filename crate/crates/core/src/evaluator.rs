//! Exact-match scoring of a system's answers against the benchmark.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{read_json, write_json, Answer, Benchmark, GroundTruth};
use crate::error::Result;
use crate::questgen::{Level, QuestionCategory};

/// Largest accepted difference for minute and kilometer answers. The extra
/// 1e-9 absorbs binary rounding of decimal inputs such as `27.05`.
pub const NUMERIC_TOLERANCE: f64 = 0.05 + 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    pub answer: Answer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswersFile {
    pub answers: Vec<AnswerRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Match,
    Missing,
    KindMismatch,
    SetMismatch,
    ValueMismatch,
    OutOfTolerance,
    SequenceMismatch,
    DepartureMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub correct: bool,
    pub reason: Reason,
}

impl Verdict {
    fn new(reason: Reason) -> Self {
        Verdict {
            correct: reason == Reason::Match,
            reason,
        }
    }
}

/// Trimmed, case-folded, with inner whitespace runs collapsed.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Scores one answer.
///
/// Name lists compare as sets of normalized names; POIs by normalized name;
/// labels and clock times exactly; minutes and kilometers within
/// [`NUMERIC_TOLERANCE`]; plans by their ordered stop names and departure.
pub fn compare_answer(truth: &GroundTruth, answer: &Answer) -> Verdict {
    use Answer as A;
    let reason = match (&truth.primary, answer) {
        (A::NameList(want), A::NameList(got)) => {
            let set = |names: &[String]| {
                names
                    .iter()
                    .map(|n| normalize_name(n))
                    .collect::<std::collections::BTreeSet<_>>()
            };
            if set(want) == set(got) {
                Reason::Match
            } else {
                Reason::SetMismatch
            }
        }
        (A::Minutes(want), A::Minutes(got)) | (A::Kilometers(want), A::Kilometers(got)) => {
            if (want - got).abs() <= NUMERIC_TOLERANCE {
                Reason::Match
            } else {
                Reason::OutOfTolerance
            }
        }
        (A::Poi { name: want, .. }, A::Poi { name: got, .. }) => {
            if normalize_name(want) == normalize_name(got) {
                Reason::Match
            } else {
                Reason::ValueMismatch
            }
        }
        (A::Clock(want), A::Clock(got)) => {
            if want == got {
                Reason::Match
            } else {
                Reason::ValueMismatch
            }
        }
        (A::Label(want), A::Label(got)) => {
            if want == got {
                Reason::Match
            } else {
                Reason::ValueMismatch
            }
        }
        (
            A::Plan {
                stops: want,
                departure: want_dep,
            },
            A::Plan {
                stops: got,
                departure: got_dep,
            },
        ) => {
            let same_stops = want.len() == got.len()
                && want
                    .iter()
                    .zip(got)
                    .all(|(a, b)| normalize_name(a) == normalize_name(b));
            if !same_stops {
                Reason::SequenceMismatch
            } else if want_dep != got_dep {
                Reason::DepartureMismatch
            } else {
                Reason::Match
            }
        }
        (A::Infeasible, A::Infeasible) => Reason::Match,
        _ => Reason::KindMismatch,
    };
    Verdict::new(reason)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub questions: usize,
    pub correct: usize,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.questions == 0 {
            0.0
        } else {
            self.correct as f64 / self.questions as f64
        }
    }

    fn add(&mut self, correct: bool) {
        self.questions += 1;
        self.correct += correct as usize;
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub questions: usize,
    pub correct: usize,
    /// Benchmark questions with at least one answer.
    pub answered: usize,
    /// Answers superseded by a later answer to the same question.
    pub duplicate_answers: usize,
    /// Answers naming a question id not in the benchmark.
    pub orphan_answers: usize,
    pub per_level: BTreeMap<Level, Tally>,
    pub per_category: BTreeMap<QuestionCategory, Tally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub tool_version: String,
    pub map_hash: String,
    pub overall: f64,
    pub per_level: BTreeMap<Level, f64>,
    pub per_category: BTreeMap<QuestionCategory, f64>,
    pub counts: Counts,
    pub per_question: BTreeMap<String, Verdict>,
}

/// Scores a full run. Each question gets one trial: if an id is answered
/// more than once the last answer counts. Denominators are always the
/// benchmark's question counts.
pub fn evaluate_run(benchmark: &Benchmark, answers: &[AnswerRecord]) -> EvaluationReport {
    let known: BTreeMap<&str, &GroundTruth> = benchmark
        .questions
        .iter()
        .map(|r| (r.question.id.as_str(), &r.ground_truth))
        .collect();
    let mut latest: BTreeMap<&str, &Answer> = BTreeMap::new();
    let mut counts = Counts::default();
    for record in answers {
        if !known.contains_key(record.question_id.as_str()) {
            counts.orphan_answers += 1;
        } else if latest.insert(record.question_id.as_str(), &record.answer).is_some() {
            counts.duplicate_answers += 1;
        }
    }

    let mut per_question = BTreeMap::new();
    for record in &benchmark.questions {
        let q = &record.question;
        let verdict = match latest.get(q.id.as_str()) {
            Some(answer) => compare_answer(&record.ground_truth, answer),
            None => Verdict::new(Reason::Missing),
        };
        counts.questions += 1;
        counts.correct += verdict.correct as usize;
        counts.answered += (verdict.reason != Reason::Missing) as usize;
        counts.per_level.entry(q.level).or_default().add(verdict.correct);
        counts.per_category.entry(q.category).or_default().add(verdict.correct);
        per_question.insert(q.id.clone(), verdict);
    }

    EvaluationReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        map_hash: benchmark.map_ref.hash.clone(),
        overall: Tally {
            questions: counts.questions,
            correct: counts.correct,
        }
        .accuracy(),
        per_level: counts.per_level.iter().map(|(&l, t)| (l, t.accuracy())).collect(),
        per_category: counts.per_category.iter().map(|(&c, t)| (c, t.accuracy())).collect(),
        counts,
        per_question,
    }
}

/// The answers a perfect system would give.
pub fn answers_from_benchmark(benchmark: &Benchmark) -> Vec<AnswerRecord> {
    benchmark
        .questions
        .iter()
        .map(|r| AnswerRecord {
            question_id: r.question.id.clone(),
            answer: r.ground_truth.primary.clone(),
        })
        .collect()
}

pub fn load_answers(path: impl AsRef<Path>) -> Result<AnswersFile> {
    read_json(path.as_ref())
}

pub fn save_answers(file: &AnswersFile, path: impl AsRef<Path>) -> Result<()> {
    write_json(file, path.as_ref())
}

pub fn save_report(report: &EvaluationReport, path: impl AsRef<Path>) -> Result<()> {
    write_json(report, path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{Auxiliary, BenchmarkRecord, MapRef};
    use crate::questgen::{QuestionInstance, Request};
    use crate::solver::Label;
    use crate::time::ClockTime;
    use crate::world::Category;

    fn truth(primary: Answer) -> GroundTruth {
        GroundTruth {
            primary,
            auxiliary: Auxiliary::default(),
        }
    }

    fn plan(stops: &[&str], h: u16) -> Answer {
        Answer::Plan {
            stops: stops.iter().map(|s| s.to_string()).collect(),
            departure: ClockTime::hm(h, 0),
        }
    }

    #[test]
    fn identical_answer_is_correct() {
        let gt = truth(plan(&["Home", "Cafe", "Work"], 9));
        assert_eq!(compare_answer(&gt, &gt.primary), Verdict::new(Reason::Match));
    }

    #[test]
    fn swapped_stops_are_a_sequence_mismatch() {
        let gt = truth(plan(&["Home", "Cafe", "Gym", "Work"], 9));
        let v = compare_answer(&gt, &plan(&["Home", "Gym", "Cafe", "Work"], 9));
        assert_eq!((v.correct, v.reason), (false, Reason::SequenceMismatch));
        let v = compare_answer(&gt, &plan(&["home ", "CAFE", "Gym", "  Work"], 12));
        assert_eq!(v.reason, Reason::DepartureMismatch);
        let v = compare_answer(&gt, &plan(&["home ", "CAFE", "Gym", "  Work"], 9));
        assert!(v.correct);
    }

    #[test]
    fn numeric_tolerance() {
        let gt = truth(Answer::Minutes(27.04));
        assert!(compare_answer(&gt, &Answer::Minutes(27.0)).correct);
        assert!(compare_answer(&truth(Answer::Minutes(27.0)), &Answer::Minutes(27.05)).correct);
        assert_eq!(
            compare_answer(&truth(Answer::Minutes(27.0)), &Answer::Minutes(27.06)).reason,
            Reason::OutOfTolerance
        );
        assert_eq!(
            compare_answer(&truth(Answer::Kilometers(3.5)), &Answer::Minutes(3.5)).reason,
            Reason::KindMismatch
        );
    }

    #[test]
    fn names_and_labels() {
        let gt = truth(Answer::NameList(vec!["Alder Cafe".into(), "Birch Cafe".into()]));
        assert!(
            compare_answer(
                &gt,
                &Answer::NameList(vec![" birch   cafe".into(), "ALDER CAFE".into()])
            )
            .correct
        );
        assert_eq!(
            compare_answer(&gt, &Answer::NameList(vec!["Alder Cafe".into()])).reason,
            Reason::SetMismatch
        );
        assert!(compare_answer(&truth(Answer::Label(Label::B)), &Answer::Label(Label::B)).correct);
        assert!(!compare_answer(&truth(Answer::Label(Label::B)), &Answer::Label(Label::A)).correct);
        assert!(compare_answer(&truth(Answer::Infeasible), &Answer::Infeasible).correct);
        assert_eq!(
            compare_answer(&truth(Answer::Infeasible), &Answer::Clock(ClockTime::hm(9, 0))).reason,
            Reason::KindMismatch
        );
    }

    fn bench(per_level: [(Level, QuestionCategory, usize); 3]) -> Benchmark {
        let mut questions = Vec::new();
        for (level, category, n) in per_level {
            for i in 0..n {
                questions.push(BenchmarkRecord {
                    question: QuestionInstance {
                        id: format!("L{}-{}-{:03}", level.number(), category, i + 1),
                        level,
                        category,
                        template_id: category.as_str().into(),
                        text: String::new(),
                        slots: BTreeMap::new(),
                        query: Request::NameLookup {
                            category: Category::Cafe,
                        },
                    },
                    ground_truth: truth(Answer::Minutes(i as f64)),
                });
            }
        }
        Benchmark {
            map_ref: MapRef {
                seed: 7,
                hash: "abc".into(),
            },
            questions,
        }
    }

    fn shape() -> Benchmark {
        bench([
            (Level::Easy, QuestionCategory::Distance, 100),
            (Level::Medium, QuestionCategory::PlanEvaluation, 200),
            (Level::Hard, QuestionCategory::FullItinerary, 200),
        ])
    }

    #[test]
    fn empty_run_scores_zero_with_missing_reasons() {
        let report = evaluate_run(&shape(), &[]);
        assert_eq!(report.overall, 0.0);
        assert!(report.per_question.values().all(|v| v.reason == Reason::Missing));
        assert_eq!(report.counts.answered, 0);
    }

    #[test]
    fn duplicates_and_orphans() {
        let b = shape();
        let mut answers = answers_from_benchmark(&b);
        let first = answers[0].clone();
        answers.insert(
            0,
            AnswerRecord {
                question_id: first.question_id.clone(),
                answer: Answer::Minutes(99.0),
            },
        );
        answers.push(AnswerRecord {
            question_id: "nope".into(),
            answer: Answer::Infeasible,
        });
        let report = evaluate_run(&b, &answers);
        assert_eq!(report.overall, 1.0);
        assert_eq!((report.counts.duplicate_answers, report.counts.orphan_answers), (1, 1));

        // Last answer wins, so a wrong answer after a right one counts as wrong.
        answers.push(AnswerRecord {
            question_id: first.question_id.clone(),
            answer: Answer::Minutes(99.0),
        });
        let report = evaluate_run(&b, &answers);
        assert_eq!(report.counts.correct, 499);
        assert_eq!(report.per_question[&first.question_id].reason, Reason::OutOfTolerance);
    }

    #[test]
    fn report_serializes_levels_in_order() {
        let b = shape();
        let report = evaluate_run(&b, &answers_from_benchmark(&b));
        let json = serde_json::to_string(&report).unwrap();
        let easy = json.find("\"easy\"").unwrap();
        let medium = json.find("\"medium\"").unwrap();
        let hard = json.find("\"hard\"").unwrap();
        assert!(easy < medium && medium < hard);
        let back: EvaluationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
