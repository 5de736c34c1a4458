//! Maximum k-colorable subgraphs of random geometric graphs.
//!
//! Points are scattered in a cube by a Poisson or binomial process, joined
//! when they are within distance `r`, and the question is how many of them
//! can be properly colored with `k` colors. The crate provides
//!
//! * seeded point processes ([`point_process`]),
//! * radius graphs with grid neighbor search ([`geo_graph`]),
//! * exact and heuristic solvers for the colorable count ([`coloring`]),
//! * closed forms and bounds for the limiting ratio ([`theory`]),
//! * a reproducible Monte Carlo harness ([`experiments`]),
//! * and the `geochrome` command line driver ([`cli`]).
//!
//! ```
//! use geochrome::{coloring, geo_graph, point_process::PointSet};
//!
//! let ps = PointSet::from_points(1, 2.0, [[0.0], [0.5], [1.2]])?;
//! let g = geo_graph::build_graph(&ps, 1.0)?;
//! let best = coloring::max_colorable_exact(&g, 1, coloring::DEFAULT_COMPONENT_CAP)?;
//! assert_eq!(best.colored_count, 2);
//! # Ok::<(), geochrome::Error>(())
//! ```

pub mod cli;
pub mod coloring;
mod error;
pub mod experiments;
pub mod geo_graph;
pub mod output;
pub mod point_process;
pub mod theory;

pub use error::{Error, Result};

// The guide's code listings run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/point-processes.md")]
    mod point_processes {}
    #[doc = include_str!("../../../book/src/geometric-graphs.md")]
    mod geometric_graphs {}
    #[doc = include_str!("../../../book/src/max-coloring.md")]
    mod max_coloring {}
    #[doc = include_str!("../../../book/src/one-dimension.md")]
    mod one_dimension {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/fluctuations.md")]
    mod fluctuations {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
