//! Metric-measure Dirichlet spaces built from triangle meshes and weighted graphs.

mod curvature;
mod io;
mod mesh;
mod metric;
mod space;

pub use curvature::{angle_defect_ric_minus, gaussian_curvature, PotentialField};
pub use io::{export_space, read_graph, read_obj, read_off, write_graph, write_off, SpaceExport};
pub use mesh::{FaceGeometry, MeshSurface};
pub use metric::{LengthGraph, MeshMetric, Metric};
pub use space::{
    all_pairs, build_graph_space, build_mesh_space, build_mesh_space_with, geodesic_distances, rescale, Ball, DiscreteSpace, Edge,
    GraphSpec, MeshData,
};

pub(crate) use mesh::{add, cross, dot3, norm3, scale3, sub};

/// Distance on a flat cone of total angle `total` between polar points.
pub fn metric_cone_distance(r1: f64, a1: f64, r2: f64, a2: f64, total: f64) -> f64 {
    metric::cone_distance(r1, a1, r2, a2, total)
}
