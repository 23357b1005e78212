//! Simulation of an `O(log log Δ)`-round massively-parallel maximal matching
//! pipeline: random-greedy matching on edge-sampled, vertex-partitioned
//! subgraphs, with space-budgeted round accounting and a statistical harness
//! for the structural properties the pipeline relies on.

pub mod algorithms;
pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod generators;
pub mod graph;
pub mod greedy;
pub mod matching;
pub mod mpc;
pub mod oracle;
pub mod priority;
pub mod seed;
pub mod stats;
pub mod suites;
pub mod sweep;

pub use algorithms::{maximal_matching_driver, DriverMode, DriverSummary, PhaseConfig};
pub use error::{Error, Result};
pub use generators::GraphSpec;
pub use graph::{load_graph, Graph, Subgraph};
pub use greedy::{greedy_mm, sample_and_greedy};
pub use matching::{match_status_delta, verify_matching, Matching, MatchingCheck};
pub use priority::Priorities;
