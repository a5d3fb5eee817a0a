//! Scalar importance-density kernels: Student-t and the Burr scale law.

use std::f64::consts::PI;

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// log density of the standard Student-t with `df` degrees of freedom.
pub fn student_t_logpdf(x: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) {
        return Err(Error::Domain(format!("student t needs df > 0, got {df}")));
    }
    Ok(ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * PI).ln()
        - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln())
}

/// log density of the Burr law on (0, ∞) with density
/// (1/scale)·(1 + x/scale)^{-2}. The 1/scale factor makes the density
/// proper; importance weights need normalized densities.
pub fn burr_logpdf(x: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("burr needs scale > 0, got {scale}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("burr support is x >= 0, got {x}")));
    }
    Ok(-scale.ln() - 2.0 * (1.0 + x / scale).ln())
}

pub fn burr_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x / (scale + x)
    }
}

/// Inverse-CDF draw from the Burr law above.
pub fn sample_burr<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    scale * u / (1.0 - u)
}
