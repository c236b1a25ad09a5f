//! Pointwise Riemannian geometry on coordinate charts.

mod field;
mod hypersurface;
mod point;
mod source;

pub use field::{Background, MetricField, TensorField};
pub use hypersurface::{
    area_ratio, dihedral_angle, face_geometry, geodesic_curvature, gram, level_set_mean_curvature,
    mean_curvature, turning_angle, volume_element, FaceGeometry,
};
pub use point::{d_trace, divergence, trace, values, Mat, MetricAt};
pub use source::{CoordinateSlice, MetricSource};

pub(crate) use field::packed;
