//! Importance densities for the anchor (μ, Λ): heavier-tailed surrogates
//! of the null posterior built from the sample mean and scatter.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::nullmodel::HaarPosterior;
use crate::stats::normal::{log_chol_jacobian, NormalParams};
use crate::stats::scalar::{burr_logpdf, sample_burr, student_t_logpdf};
use crate::stats::wishart::{inv_wishart_logpdf, mvn_logpdf_cov, sample_inv_wishart};

/// An anchor draw with its exact normalized log density in the (μ, Λ)
/// parameterization.
#[derive(Debug, Clone)]
pub struct AnchorDraw {
    pub params: NormalParams,
    pub log_pdf: f64,
}

/// Univariate proposal: Λ ~ Burr with scale Λ̂, then μ | Λ located at μ̂
/// with scale Λ/√n and Student-t tails with 3 degrees of freedom.
pub fn sample_anchor_univariate<R: Rng + ?Sized>(
    mle: &NormalParams,
    n: usize,
    rng: &mut R,
) -> Result<AnchorDraw> {
    if mle.dim() != 1 {
        return Err(Error::DimensionMismatch("univariate proposal needs p=1".into()));
    }
    let lam_hat = mle.lam()[(0, 0)];
    let mu_hat = mle.mu()[0];
    let lam = sample_burr(lam_hat, rng).max(f64::MIN_POSITIVE);
    let t = StudentT::new(3.0)
        .map_err(|e| Error::Domain(format!("student t: {e}")))?
        .sample(rng);
    let mu = mu_hat + lam / (n as f64).sqrt() * t;
    let params = NormalParams::scalar(mu, lam)?;
    let log_pdf = anchor_univariate_logpdf(&params, mle, n)?;
    Ok(AnchorDraw { params, log_pdf })
}

pub fn anchor_univariate_logpdf(
    params: &NormalParams,
    mle: &NormalParams,
    n: usize,
) -> Result<f64> {
    if params.dim() != 1 || mle.dim() != 1 {
        return Err(Error::DimensionMismatch("univariate proposal needs p=1".into()));
    }
    let lam_hat = mle.lam()[(0, 0)];
    let mu_hat = mle.mu()[0];
    let lam = params.lam()[(0, 0)];
    let mu = params.mu()[0];
    let scale = lam / (n as f64).sqrt();
    Ok(burr_logpdf(lam, lam_hat)?
        + student_t_logpdf((mu - mu_hat) / scale, 3.0)?
        - scale.ln())
}

/// Inverse Wishart degrees of freedom of the multivariate proposal:
/// max{p, n − p√n}; the floor keeps the density proper at small n.
pub fn importance_df(n: usize, p: usize) -> f64 {
    let nf = n as f64;
    (nf - p as f64 * nf.sqrt()).max(p as f64)
}

/// Multivariate proposal: Σ ~ IW(max{p, n−p√n}, scatter) and μ | Σ ~
/// N(x̄, Σ) — the null posterior with the normal component's covariance
/// scaled by n and fattened inverse Wishart tails.
pub fn sample_anchor_multivariate<R: Rng + ?Sized>(
    post: &HaarPosterior,
    rng: &mut R,
) -> Result<AnchorDraw> {
    let p = post.p();
    let df = importance_df(post.n(), p);
    for _ in 0..100 {
        let sigma = sample_inv_wishart(df, post.scatter(), rng)?;
        let chol = match nalgebra::Cholesky::new(sigma.clone()) {
            Some(c) => c,
            None => continue,
        };
        let z = nalgebra::DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mu = post.xbar() + chol.l() * z;
        let params = NormalParams::new(mu, chol.l())?;
        let log_pdf = anchor_multivariate_logpdf(&params, post)?;
        return Ok(AnchorDraw { params, log_pdf });
    }
    Err(Error::Numeric("anchor covariance draws kept failing".into()))
}

pub fn anchor_multivariate_logpdf(params: &NormalParams, post: &HaarPosterior) -> Result<f64> {
    let p = post.p();
    if params.dim() != p {
        return Err(Error::DimensionMismatch("anchor dimension".into()));
    }
    let df = importance_df(post.n(), p);
    let sigma = params.covariance();
    let mu_part = mvn_logpdf_cov(params.mu(), post.xbar(), &sigma)?;
    let sigma_part = inv_wishart_logpdf(&sigma, df, post.scatter())?;
    Ok(mu_part + sigma_part + log_chol_jacobian(params.lam()))
}
