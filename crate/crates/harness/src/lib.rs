//! Test and benchmark support for `guardmatch`: a brute-force oracle, seeded
//! generators and comparison helpers.

pub mod compare;
pub mod fixtures;
pub mod generate;
pub mod oracle;
pub mod trace;

pub use compare::{compare_runs, ComparisonReport, InstanceReport};
pub use generate::{random_labeled_graph, random_walk_query, Workload};
pub use oracle::{brute_force_enumerate, OracleResult};
