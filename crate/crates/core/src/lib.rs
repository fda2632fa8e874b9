//! Bounds on the maximum of dependent zero-mean Gaussian variables.
//!
//! * [`gaussian`]: standard-normal tails in the log domain and the inversion
//!   bounds for `V = -2 ln(1 - Phi(x)) - ln(2 pi)`.
//! * [`bounds`]: union-bound and coupling upper bounds, the `M_n^2`
//!   brackets, and the lower-bound certificate.
//! * [`covariance`]: sequential conditional decomposition, eigenvalue and
//!   precision-based residual variances.
//! * [`process`]: stationary processes in moving-average form and the
//!   subsampled lower bound.
//! * [`montecarlo`]: seeded, thread-count independent simulation checks.
//! * [`cli`]: the `maxbound` command-line front end.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod covariance;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod process;

pub use bounds::{
    dependent_msq_upper, exponential_quantile, gumbel_quantile, gumbel_transform_of_max,
    headline_bound, independent_msq_bracket, lower_bound_certificate, union_upper_tail,
    LowerBoundCertificate, MaxQuery, QuantileBracket,
};
pub use covariance::{
    decompose, eigen_bounds, precision_residuals, sigma_tau, ConditionalDecomposition,
    CovarianceMatrix,
};
pub use error::{Error, Result};
pub use gaussian::{
    invert_v_lower, invert_v_upper, mills_bracket, std_normal_cdf, std_normal_log_tail,
    std_normal_quantile, tail_v, TailPoint,
};
pub use montecarlo::{SimulationPlan, TailEstimate, Target, Verdict};
pub use process::{
    stationary_lower_bound, subsample_residual_variance, window_covariance, WoldModel,
};

/// Library version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
