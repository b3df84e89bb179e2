//! Exact building blocks for metric search forensics: arbitrary-precision
//! dyadic distances, finite metric spaces with a brute-force oracle,
//! continuous metric multigraphs, leveled search trees with their
//! structural invariants, and instrumented implementations of the classic
//! insertion, nearest-neighbor and paired-tree traversals.
//!
//! The adversarial dataset generators in [`datasets`] produce point sets
//! whose prescribed trees stay shallow while the instrumented algorithms
//! are forced through every level, making the counters in [`search`] and
//! [`dual`] the interesting output rather than the answers themselves.

pub mod datasets;
pub mod dual;
pub mod dyadic;
pub mod expansion;
pub mod graph;
pub mod io;
pub mod metric;
pub mod search;
pub mod trace;
pub mod tree;

pub use datasets::{generate_bichromatic, generate_tall_imbalanced, BichromaticDataset, TallDataset};
pub use dual::{bichromaticity_degree, find_all_nn, DualTreeBlocks};
pub use dyadic::Dyadic;
pub use expansion::{expansion_constant, BallRatio};
pub use graph::{GraphPoint, GraphSpace, MetricMultigraph};
pub use metric::{
    audit_metric, audit_metric_with_limit, brute_force_knn, Distance, EuclideanSpace,
    FiniteMetric, FloatDist, MetricSpace, NeighborAnswer, PointId,
};
pub use search::{build_by_insert, insert, nn_search, TraceCounters};
pub use trace::{render_block_log, render_level_log, replay_trace, Replay};
pub use tree::{explicit_depth, explicit_nodes, verify_invariants, CoverTree, ExplicitNode};
