//! Subgraph matching by guarded backtracking.
//!
//! A query is compiled into a guarded candidate space ([`plan`]): filtered
//! candidate sets, candidate edges and one guard slot per candidate vertex and per
//! 2-core candidate edge. Reservation guards ([`reservation`]) are filled once at
//! build time; vertex and edge nogoods ([`nogood`]) are discovered while searching
//! ([`search`]) and drive pruning and backjumping.
//!
//! ```
//! use guardmatch::{graph::Graph, match_query, MatchConfig};
//!
//! let data = Graph::from_edges(vec![0; 4], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
//! let triangle = Graph::from_edges(vec![0; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
//! let result = match_query(&triangle, &data, &MatchConfig::exhaustive()).unwrap();
//! assert_eq!(result.stats.embeddings, 24);
//! ```

pub mod error;
pub mod graph;
pub mod nogood;
mod parallel;
pub mod plan;
pub mod reservation;
pub mod search;

pub use error::{Error, Result};
pub use graph::{Graph, Label, VertexId};
pub use search::{
    match_query, parallel_match, MatchConfig, MatchResult, MatchStats, Plan, PlanOptions,
    PlanTimings, SearchObserver, Termination,
};
