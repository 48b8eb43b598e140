//! Metrics on sheaves that are not plain hermitian bundles: the metric axioms,
//! fiber-integral (direct image) metrics, the weighted `L^a` family with its dual
//! map and stationary sections, and the curvature check for homomorphism norms.

pub mod axioms;
pub mod family;
pub mod fibered;
pub mod lp;

pub use axioms::{
    metric_axioms_check, section_norm_field, BundleNorm, DirectImageNorm, LpNorm, SheafMetric,
    SquaredNorm, AXIOM_TOLERANCE,
};
pub use family::hom_family_griffiths_check;
pub use fibered::{
    direct_image_metric, lp_metric, parse_fibered, FiberPoint, FiberedConfig, FiberedMetric,
    WeightCertificate, WeightField,
};
pub use lp::{
    dual_map_gamma, dual_map_gamma_closed, lp_section, lp_section_family, stationarity_check,
    SectionFamily, STATIONARITY_STEP,
};
