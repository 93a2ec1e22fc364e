//! Induced metric, null frames and curvature of surfaces in neutral space.

mod frame;
mod metric;
mod surface;

pub use frame::{
    first_form, framed, isometry_residual, point_geometry, FramedPoint, PointGeometry, TAU_ISO,
};
pub use metric::{
    connection_table_gm, gaussian_curvature_intrinsic, invariant_l, tau_k, Christoffel,
    ConnectionTable, FirstFundamentalForm, InvariantL, SemiGeodesicMetric, TAU_K, TAU_LORENTZ,
};
pub use surface::SurfacePoint;
