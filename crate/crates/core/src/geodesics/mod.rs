//! Minimizing geodesics between zeroes in the metric `|R(z)| |dz|` on the
//! sphere with the open petals removed, and the greedy cut tree built from
//! them.
//!
//! Distances are first approximated by Dijkstra on a graded triangulation
//! ([`mesh`]) and then made exact by straightening each mesh path into flat
//! segments between zeroes with the trajectory tracer ([`path`]).

pub mod mesh;
pub mod path;
pub mod tree;

pub use mesh::{build_mesh, MetricMesh, DEFAULT_RESOLUTION};
pub use path::{dijkstra, refine_path, shortest_path, GeodesicPath, GeodesicSegment, SegmentKind};
pub use tree::{
    distance_table, greedy_order, greedy_tree, tree_polylines, verify_noncrossing, DistanceTable, NonCrossing,
    SpanningTree, TreeEdge,
};
