//! Bundle homomorphisms: operator-norm fields, Griffiths curvature, the
//! curvature-decrease hypothesis and the local estimates behind the maximum
//! principle for `log ‖A‖`.

pub mod field;
pub mod hypothesis;
pub mod proof;

pub use field::{griffiths_curvature, HomomorphismField, PointNorm};
pub use hypothesis::{
    conclusion_check, curvature_ordering_check, curvature_range, gap_map, hypothesis_check,
    node_gap, HypothesisMode, NodeGap, HYPOTHESIS_TOLERANCE,
};
pub use proof::{bound32_check, inequality33_check, proof_section, Bound32Fit};
