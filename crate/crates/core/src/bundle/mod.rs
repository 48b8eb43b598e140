//! Hermitian metrics on trivial bundles and their Chern connection and curvature.

pub mod connection;
pub mod metric;

pub use connection::{self_adjointness_residual, Eq23, SectionField};
pub use metric::{MetricField, PointMetric};
