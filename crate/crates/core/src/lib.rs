//! Trip-planning optimization benchmarks with exact ground truth.
//!
//! [`world`] generates a seeded synthetic city with time-dependent travel
//! tables. [`solver`] costs itineraries by forward simulation and finds
//! optimal plans. [`questgen`] instantiates question templates,
//! [`annotate`] attaches ground truth, and [`evaluator`] scores answers by
//! exact match. [`cli`] binds it all to the `topkit` binary.
//!
//! ```
//! use topkit::solver::{solve_optimal, QuerySpec};
//! use topkit::time::ClockTime;
//! use topkit::world::{generate_map, Category, GenerationConfig};
//!
//! let map = generate_map(7, &GenerationConfig::default())?;
//! let home = map.pois_of(Category::Apartment).next().unwrap().id;
//! let work = map.pois_of(Category::Company).next().unwrap().id;
//! let query = QuerySpec::new(home, work, ClockTime::hm(9, 0)).with_categories(&[Category::Cafe]);
//! let best = solve_optimal(&map, &query)?;
//! assert!(best.plan().is_some());
//! # Ok::<(), topkit::Error>(())
//! ```

pub mod annotate;
pub mod cli;
pub mod error;
pub mod evaluator;
pub mod questgen;
pub mod solver;
pub mod time;
pub mod world;

pub use error::{Error, Result};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/world.md")]
    mod world {}
    #[doc = include_str!("../../../book/src/dwell.md")]
    mod dwell {}
    #[doc = include_str!("../../../book/src/cost.md")]
    mod cost {}
    #[doc = include_str!("../../../book/src/absorption.md")]
    mod absorption {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
