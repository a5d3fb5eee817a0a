//! Inverse Wishart density and Bartlett-based sampler, used by the
//! multivariate importance density.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::mbeta::bartlett_lower;
use crate::stats::normal::LOG_2PI;
use crate::stats::special::log_mvgamma;

/// log density of the inverse Wishart IW(df, psi) at sigma:
/// (df/2)·log det psi − (df·p/2)·log 2 − log Γ_p(df/2)
///   − ((df+p+1)/2)·log det sigma − ½ tr(sigma⁻¹ psi).
pub fn inv_wishart_logpdf(sigma: &DMatrix<f64>, df: f64, psi: &DMatrix<f64>) -> Result<f64> {
    let p = sigma.nrows();
    if sigma.ncols() != p || psi.nrows() != p || psi.ncols() != p {
        return Err(Error::DimensionMismatch("sigma/psi shapes".into()));
    }
    if !(df > p as f64 - 1.0) {
        return Err(Error::Domain(format!(
            "inverse Wishart needs df > p-1, got df={df}, p={p}"
        )));
    }
    let chol_sigma = nalgebra::Cholesky::new(sigma.clone())
        .ok_or_else(|| Error::Domain("sigma not positive definite".into()))?;
    let chol_psi = nalgebra::Cholesky::new(psi.clone())
        .ok_or_else(|| Error::Domain("psi not positive definite".into()))?;
    let log_det_sigma = 2.0 * (0..p).map(|i| chol_sigma.l()[(i, i)].ln()).sum::<f64>();
    let log_det_psi = 2.0 * (0..p).map(|i| chol_psi.l()[(i, i)].ln()).sum::<f64>();
    // tr(sigma^{-1} psi) = ||L_sigma^{-1} L_psi||_F^2
    let y = chol_sigma
        .l()
        .solve_lower_triangular(&chol_psi.l())
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
    let trace = y.norm_squared();
    Ok(0.5 * df * log_det_psi
        - 0.5 * df * p as f64 * 2.0f64.ln()
        - log_mvgamma(p, 0.5 * df)?
        - 0.5 * (df + p as f64 + 1.0) * log_det_sigma
        - 0.5 * trace)
}

/// Draw sigma ~ IW(df, psi). With A the Bartlett factor of a Wishart(df, I)
/// draw and C = Cholesky(psi), sigma = C A⁻ᵀ A⁻¹ Cᵀ, so sigma⁻¹ is
/// Wishart(df, psi⁻¹) as required. Real df > p−1 allowed.
pub fn sample_inv_wishart<R: Rng + ?Sized>(
    df: f64,
    psi: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let p = psi.nrows();
    if psi.ncols() != p {
        return Err(Error::DimensionMismatch("psi must be square".into()));
    }
    let c = nalgebra::Cholesky::new(psi.clone())
        .ok_or_else(|| Error::Domain("psi not positive definite".into()))?;
    let a = bartlett_lower(p, df, rng)?;
    // B = C·A^{-T} computed as Bᵀ = A^{-1}·Cᵀ (forward substitution).
    let bt = a
        .solve_lower_triangular(&c.l().transpose())
        .ok_or_else(|| Error::Numeric("bartlett factor singular".into()))?;
    let sigma = bt.transpose() * &bt;
    Ok((&sigma + sigma.transpose()) * 0.5)
}

/// log N(mu | mean, sigma) evaluated through the Cholesky factor of sigma.
pub fn mvn_logpdf_cov(
    x: &nalgebra::DVector<f64>,
    mean: &nalgebra::DVector<f64>,
    sigma: &DMatrix<f64>,
) -> Result<f64> {
    let p = x.len();
    if mean.len() != p || sigma.nrows() != p || sigma.ncols() != p {
        return Err(Error::DimensionMismatch("mvn_logpdf_cov shapes".into()));
    }
    let chol = nalgebra::Cholesky::new(sigma.clone())
        .ok_or_else(|| Error::Domain("sigma not positive definite".into()))?;
    let log_det = 2.0 * (0..p).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
    let z = chol
        .l()
        .solve_lower_triangular(&(x - mean))
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
    Ok(-0.5 * p as f64 * LOG_2PI - 0.5 * log_det - 0.5 * z.norm_squared())
}
