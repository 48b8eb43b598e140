//! Matrix-valued polynomial fields over a plane domain, their exact Wirtinger
//! derivatives, grid sampling, circle averages and the finite-difference oracle.

pub mod fd;
pub mod grid;
pub mod json;
pub mod poly;
pub mod quadrature;
pub mod surrogate;

pub use fd::{fd_derivative, fd_levi_extrapolated, fd_levi_real, FdKind};
pub use grid::{GridDomain, ScalarSampleField, SubRect};
pub use json::Point;
pub use poly::{CMatrix, CVector, MatrixPolyField, Wirtinger};
pub use quadrature::{circle_average, try_circle_average};
