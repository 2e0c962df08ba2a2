//! Curvature kernels for warped products, conformal changes, collar slicings
//! and graphs in Fermi collars.

mod curvature;
mod laplacian;
mod metric;
mod slicing;

pub use curvature::{conformal_transform, scalar_curvature, tube_geometry, warped_closed_scalar, SliceGeometry};
pub use laplacian::RadialOperator;
pub use metric::{sphere_area, MetricKind, WarpedMetric};
pub use slicing::{fermi_graph_mean_curvature, slice_curvature};
