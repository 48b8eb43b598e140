//! Numerical potential theory: the Λ operator, disk-restricted `ξξ̄u`,
//! plurisubharmonicity verdicts on sampled fields and maximum-principle checks.

pub mod lambda;
pub mod maxprinciple;
pub mod verdict;

pub use lambda::{lambda_estimate, lambda_ladder, xi_xibar_estimate};
pub use maxprinciple::max_principle_check;
pub use verdict::{
    discrete_levi, grid_tolerance, lambda_map, min_discrete_levi, psh_verdict, PshReport, PshVerdict,
    RadiiPolicy,
};
