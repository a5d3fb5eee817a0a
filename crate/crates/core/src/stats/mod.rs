//! Samplers and log-densities for every distribution the test needs:
//! multivariate normal, the multivariate beta on the unit-eigenvalue cone,
//! the normal–multivariate-beta base measure, Student-t, Burr, and the
//! inverse Wishart. All densities are returned in log space.

pub mod base;
pub mod mbeta;
pub mod normal;
pub mod scalar;
pub mod special;
pub mod wishart;

pub use base::{omega_from_alpha, sample_base_measure, BaseMeasureParams, ShiftVolumeDraw};
pub use mbeta::{mbeta_logpdf, sample_mbeta};
pub use normal::NormalParams;
pub use scalar::{burr_cdf, burr_logpdf, sample_burr, student_t_logpdf};
pub use special::log_mvgamma;
pub use wishart::{inv_wishart_logpdf, sample_inv_wishart};
