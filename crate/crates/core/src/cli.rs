//! The `topkit` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input or I/O failure,
//! 3 when `verify` finds mismatches.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::annotate::{
    annotate_all_with, emit_benchmark, load_benchmark, load_questions, save_questions, verify, Benchmark, MapRef,
    QuestionsFile,
};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate_run, load_answers, save_report};
use crate::questgen::{generate_dataset, DatasetConfig, LevelCounts, DEFAULT_ALL_INTENTION_CAP};
use crate::solver::{solve, Engine, Outcome, QuerySpec, Violation};
use crate::world::{generate_map, load_map, save_map, GenerationConfig, WorldMap};

pub const DEFAULT_SEED: u64 = 7;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "topkit", version, about = "Trip-planning optimization benchmark toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed. Falls back to $TOPKIT_SEED, then 7.
    #[arg(long, env = "TOPKIT_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Bnb,
    Exhaustive,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Bnb => Engine::BranchAndBound,
            EngineArg::Exhaustive => Engine::Exhaustive,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic city map.
    GenMap {
        #[command(flatten)]
        seed: SeedArg,
        /// Generation config as JSON; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Instantiate the question templates against a map.
    GenQuestions {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = LevelCounts::default().easy)]
        easy: usize,
        #[arg(long, default_value_t = LevelCounts::default().medium)]
        medium: usize,
        #[arg(long, default_value_t = LevelCounts::default().hard)]
        hard: usize,
        /// Most categories an all-intention question may require.
        #[arg(long, default_value_t = DEFAULT_ALL_INTENTION_CAP)]
        all_intention_cap: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute ground truth for every question.
    Annotate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineArg::Bnb)]
        engine: EngineArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve one query and print the optimal plan as JSON.
    Solve {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineArg::Bnb)]
        engine: EngineArg,
    },
    /// Score a system's answers against a benchmark.
    Evaluate {
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        answers: PathBuf,
        /// Where to write the full report; a summary is always printed.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-derive every ground truth by plain enumeration and report differences.
    Verify {
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(Serialize)]
struct InfeasibleReport<'a> {
    feasible: bool,
    violations: &'a [Violation],
}

/// Runs the CLI with process stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn load_with_ref(map: &Path) -> Result<(WorldMap, MapRef)> {
    let world = load_map(map)?;
    let map_ref = MapRef::of(&world);
    Ok((world, map_ref))
}

fn write_out(out: &mut dyn Write, text: impl AsRef<[u8]>) -> Result<()> {
    out.write_all(text.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::GenMap { seed, config, output } => {
            let config = match config {
                Some(path) => crate::annotate::read_json::<GenerationConfig>(&path)?,
                None => GenerationConfig::default(),
            };
            let map = generate_map(seed.seed, &config)?;
            save_map(&map, &output)?;
            let _ = writeln!(err, "wrote map with {} POIs to {}", map.pois.len(), output.display());
        }
        Command::GenQuestions {
            map,
            seed,
            easy,
            medium,
            hard,
            all_intention_cap,
            output,
        } => {
            let (world, map_ref) = load_with_ref(&map)?;
            let config = DatasetConfig {
                counts: LevelCounts { easy, medium, hard },
                all_intention_cap,
            };
            let questions = generate_dataset(&world, seed.seed, &config)?;
            save_questions(&QuestionsFile { map_ref, questions }, &output)?;
            let _ = writeln!(err, "wrote {} questions to {}", config.counts.total(), output.display());
        }
        Command::Annotate {
            map,
            questions,
            engine,
            output,
        } => {
            let world = load_map(&map)?;
            let file = load_questions(&questions)?;
            file.map_ref.check(&world, &questions.display().to_string())?;
            let records = annotate_all_with(&world, &file.questions, engine.into())?;
            let benchmark = Benchmark {
                map_ref: file.map_ref,
                questions: records,
            };
            emit_benchmark(&benchmark, &output)?;
            let _ = writeln!(
                err,
                "annotated {} questions into {}",
                benchmark.questions.len(),
                output.display()
            );
        }
        Command::Solve { map, query, engine } => {
            let world = load_map(&map)?;
            let spec: QuerySpec = crate::annotate::read_json(&query)?;
            let origin = query.display().to_string();
            spec.validate(&world)
                .map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
            let solution = solve(&world, &spec, engine.into())?;
            let json = match &solution.outcome {
                Outcome::Optimal(plan) => serde_json::to_string_pretty(plan),
                Outcome::Infeasible { violations, .. } => serde_json::to_string_pretty(&InfeasibleReport {
                    feasible: false,
                    violations,
                }),
            }
            .expect("serialization to memory cannot fail");
            write_out(out, json + "\n")?;
        }
        Command::Evaluate {
            benchmark,
            answers,
            output,
        } => {
            let bench = load_benchmark(&benchmark)?;
            let answers = load_answers(&answers)?;
            let report = evaluate_run(&bench, &answers.answers);
            if let Some(path) = &output {
                save_report(&report, path)?;
            }
            let mut summary = format!(
                "overall {:.4} ({}/{})\n",
                report.overall, report.counts.correct, report.counts.questions
            );
            for (level, tally) in &report.counts.per_level {
                summary += &format!(
                    "{:<7}{:.4} ({}/{})\n",
                    level.as_str(),
                    tally.accuracy(),
                    tally.correct,
                    tally.questions
                );
            }
            if report.counts.duplicate_answers + report.counts.orphan_answers > 0 {
                summary += &format!(
                    "ignored {} duplicate and {} orphan answers\n",
                    report.counts.duplicate_answers, report.counts.orphan_answers
                );
            }
            write_out(out, summary)?;
        }
        Command::Verify { benchmark, map } => {
            let world = load_map(&map)?;
            let bench = load_benchmark(&benchmark)?;
            let mismatches = verify(&world, &bench)?;
            let mut report = String::new();
            for m in &mismatches {
                report += &format!("mismatch {} {}: {}\n", m.question, m.field, m.detail);
            }
            report += &format!(
                "verified {} questions, {} mismatches\n",
                bench.questions.len(),
                mismatches.len()
            );
            write_out(out, report)?;
            if !mismatches.is_empty() {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(EXIT_OK)
}
