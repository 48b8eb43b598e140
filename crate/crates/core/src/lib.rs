//! Curvature calculus for hermitian holomorphic vector bundles over plane domains,
//! together with numerical plurisubharmonicity checks for operator-norm fields of
//! curvature-decreasing homomorphisms.

pub mod error;
pub mod bundle;
pub mod field;
pub mod harness;
pub mod homomorphism;
pub mod psh;
pub mod random;
pub mod report;
pub mod sheaf;

pub use error::{Error, Result};
