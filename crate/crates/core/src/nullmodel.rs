//! The normal null model under the invariant location-scale prior: maximum
//! likelihood fit, the closed-form marginal likelihood, the posterior
//! density of (μ, Λ), and the minimal-sample predictive constant.
//!
//! The prior is the affine-invariant normalization of the location-scale
//! Haar construction, as a measure on (μ, Σ):
//!
//!   π(μ, Σ) dμ dΣ = 2^{-p} (det Σ)^{-(p+1)/2} dμ dΣ,
//!
//! which at p=1 is exactly Λ^{-1} dμ dΛ in the (μ, Λ) chart. With this
//! normalization the marginal of any minimal sample of size p+1 equals
//! c_p^{-1} |det x̃|^{-p}, the same constant the mixture alternative
//! produces, so the arbitrary scale of the improper prior cancels in the
//! Bayes factor.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::stats::normal::{log_chol_jacobian, NormalParams, LOG_2PI};
use crate::stats::special::log_mvgamma;
use crate::stats::wishart::{inv_wishart_logpdf, mvn_logpdf_cov};

/// Sufficient statistics of the null posterior: sample mean, scatter matrix
/// Σ(x_i−x̄)(x_i−x̄)ᵀ, and the observation count.
#[derive(Debug, Clone)]
pub struct HaarPosterior {
    xbar: DVector<f64>,
    scatter: DMatrix<f64>,
    n: usize,
}

impl HaarPosterior {
    pub fn fit(data: &DataMatrix) -> Result<Self> {
        let (n, p) = (data.n(), data.p());
        if n < p + 1 {
            return Err(Error::Precondition(format!(
                "posterior needs n >= p+1, got n={n}, p={p}"
            )));
        }
        let scatter = data.scatter();
        if nalgebra::Cholesky::new(scatter.clone()).is_none() {
            return Err(Error::DegenerateData(
                "singular scatter matrix; data not in general position".into(),
            ));
        }
        Ok(Self {
            xbar: data.mean(),
            scatter,
            n,
        })
    }

    pub fn from_parts(xbar: DVector<f64>, scatter: DMatrix<f64>, n: usize) -> Result<Self> {
        let p = xbar.len();
        if scatter.nrows() != p || scatter.ncols() != p {
            return Err(Error::DimensionMismatch("scatter shape".into()));
        }
        if n < p + 1 {
            return Err(Error::Precondition("need n >= p+1".into()));
        }
        Ok(Self { xbar, scatter, n })
    }

    pub fn xbar(&self) -> &DVector<f64> {
        &self.xbar
    }

    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.xbar.len()
    }
}

/// Maximum likelihood estimate: μ̂ = x̄, Λ̂ = Cholesky(scatter/n).
pub fn mle(data: &DataMatrix) -> Result<NormalParams> {
    let post = HaarPosterior::fit(data)?;
    let cov = post.scatter() / post.n() as f64;
    let chol = nalgebra::Cholesky::new(cov)
        .ok_or_else(|| Error::DegenerateData("singular covariance".into()))?;
    NormalParams::new(post.xbar().clone(), chol.l())
}

/// Closed-form log marginal of the data under the null:
///
/// log m(X) = −(n−1)p/2·log 2π − p/2·log n + p(n−3)/2·log 2
///            + log Γ_p((n−1)/2) − (n−1)/2·log det S.
///
/// Derived by direct integration of ∏ N(x_i | μ, Σ) against the prior
/// above; guarded by a quadrature oracle in the test suite. Exactly
/// equivariant: m(a + G·X) = |det G|^{-(n-1)} m(X).
pub fn null_log_marginal(data: &DataMatrix) -> Result<f64> {
    let post = HaarPosterior::fit(data)?;
    log_marginal_from_stats(&post)
}

pub fn log_marginal_from_stats(post: &HaarPosterior) -> Result<f64> {
    let (n, p) = (post.n() as f64, post.p() as f64);
    let chol = nalgebra::Cholesky::new(post.scatter().clone())
        .ok_or_else(|| Error::DegenerateData("singular scatter".into()))?;
    let log_det_s = 2.0 * (0..post.p()).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
    Ok(-(n - 1.0) * p / 2.0 * LOG_2PI - p / 2.0 * n.ln()
        + p * (n - 3.0) / 2.0 * 2.0f64.ln()
        + log_mvgamma(post.p(), (n - 1.0) / 2.0)?
        - (n - 1.0) / 2.0 * log_det_s)
}

/// Exact log posterior density of (μ, Λ) under the null prior, in the
/// (μ, Λ) chart: N(μ | x̄, Σ/n) · IW(Σ | n−1, S) with Σ = ΛΛᵀ, times the
/// Cholesky Jacobian dΣ/dΛ = 2^p ∏ Λ_ii^{p−i+1}. Integrates to 1 over
/// ℝ^p × 𝕃_p.
pub fn haar_posterior_logpdf(params: &NormalParams, post: &HaarPosterior) -> Result<f64> {
    let p = post.p();
    if params.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "params dim {} vs posterior dim {p}",
            params.dim()
        )));
    }
    let n = post.n() as f64;
    let sigma = params.covariance();
    let mu_part = mvn_logpdf_cov(params.mu(), post.xbar(), &(&sigma / n))?;
    let sigma_part = inv_wishart_logpdf(&sigma, n - 1.0, post.scatter())?;
    Ok(mu_part + sigma_part + log_chol_jacobian(params.lam()))
}

/// log c_p with c_p = 2^p π^{p²/2} / Γ_p(p/2), the volume constant of the
/// orthogonal group in the minimal-sample predictive.
pub fn log_cp(p: usize) -> Result<f64> {
    Ok(p as f64 * 2.0f64.ln() + (p * p) as f64 / 2.0 * PI.ln() - log_mvgamma(p, p as f64 / 2.0)?)
}

/// log of the minimal-sample predictive density m(x_1,…,x_{p+1}) =
/// c_p^{-1} |det x̃|^{-p}, where column j of x̃ is x_j − x_{p+1}.
/// The analytic oracle shared by the null and the alternative.
pub fn log_min_sample_predictive(points: &DataMatrix) -> Result<f64> {
    let p = points.p();
    if points.n() != p + 1 {
        return Err(Error::Precondition(format!(
            "minimal sample has exactly p+1 points, got n={} for p={p}",
            points.n()
        )));
    }
    let last = points.row(p);
    let mut xt = DMatrix::zeros(p, p);
    for j in 0..p {
        xt.set_column(j, &(points.row(j) - &last));
    }
    let det = xt.determinant().abs();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::DegenerateData(
            "difference vectors are linearly dependent".into(),
        ));
    }
    Ok(-log_cp(p)? - p as f64 * det.ln())
}

/// Density-scale version of the minimal-sample predictive.
pub fn min_sample_predictive(points: &DataMatrix) -> Result<f64> {
    Ok(log_min_sample_predictive(points)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand_distr::{Distribution, StandardNormal};

    fn data(rows: &[Vec<f64>]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn mle_two_point_sample() {
        let d = data(&[vec![0.0], vec![2.0]]);
        let fit = mle(&d).unwrap();
        assert!((fit.mu()[0] - 1.0).abs() < 1e-14);
        assert!((fit.lam()[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mle_symmetric_cross() {
        let d = data(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ]);
        let fit = mle(&d).unwrap();
        assert!(fit.mu().norm() < 1e-14);
        let cov = fit.covariance();
        assert!((&cov - DMatrix::from_diagonal_element(2, 2, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn mle_equivariance() {
        let mut rng = substream(21, &[0]);
        let d = DataMatrix::new(DMatrix::from_fn(9, 2, |_, _| {
            StandardNormal.sample(&mut rng)
        }))
        .unwrap();
        let shift = DVector::from_vec(vec![0.7, -1.1]);
        let scale = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.5, 1.5]);
        let mapped = d.affine_map(&shift, &scale).unwrap();
        let f0 = mle(&d).unwrap();
        let f1 = mle(&mapped).unwrap();
        let mu_expected = &shift + &scale * f0.mu();
        assert!((f1.mu() - mu_expected).norm() < 1e-12);
        let cov_expected = &scale * f0.covariance() * scale.transpose();
        assert!((f1.covariance() - cov_expected).norm() < 1e-12);
    }

    #[test]
    fn marginal_univariate_pair() {
        // m({0,1}) = 1/(2|0−1|) = 1/2.
        let d = data(&[vec![0.0], vec![1.0]]);
        let lm = null_log_marginal(&d).unwrap();
        assert!((lm - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn marginal_bivariate_minimal_sample() {
        // m = 1/(4π) for the unit simplex triple.
        let d = data(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let lm = null_log_marginal(&d).unwrap();
        assert!((lm - (1.0 / (4.0 * PI)).ln()).abs() < 1e-12);
    }

    #[test]
    fn minimal_sample_predictive_examples() {
        let d = data(&[vec![0.0], vec![1.0]]);
        assert!((min_sample_predictive(&d).unwrap() - 0.5).abs() < 1e-14);
        let d = data(&[vec![0.0], vec![4.0]]);
        assert!((min_sample_predictive(&d).unwrap() - 0.125).abs() < 1e-14);
        // x̃ = I₂ → 1/(4π)
        let d = data(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!((min_sample_predictive(&d).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn marginal_equals_min_sample_predictive_at_minimal_n() {
        for p in [1usize, 2, 3] {
            let mut rng = substream(22, &[p as u64]);
            for _ in 0..100 {
                let d = DataMatrix::new(DMatrix::from_fn(p + 1, p, |_, _| {
                    StandardNormal.sample(&mut rng)
                }))
                .unwrap();
                let a = null_log_marginal(&d).unwrap();
                let b = log_min_sample_predictive(&d).unwrap();
                assert!(
                    (a - b).abs() <= 1e-10 * b.abs().max(1.0),
                    "p={p}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn marginal_affine_equivariance() {
        let mut rng = substream(23, &[0]);
        for p in [1usize, 2, 3] {
            let n = 8 + p;
            let d = DataMatrix::new(DMatrix::from_fn(n, p, |_, _| {
                StandardNormal.sample(&mut rng)
            }))
            .unwrap();
            let shift = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            let mut scale = DMatrix::from_fn(p, p, |_, _| {
                let x: f64 = StandardNormal.sample(&mut rng);
                0.5 * x
            });
            for i in 0..p {
                scale[(i, i)] += 2.0;
            }
            let mapped = d.affine_map(&shift, &scale).unwrap();
            let lm0 = null_log_marginal(&d).unwrap();
            let lm1 = null_log_marginal(&mapped).unwrap();
            let expected = lm0 - (n as f64 - 1.0) * scale.determinant().abs().ln();
            assert!(
                (lm1 - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                "p={p}: {lm1} vs {expected}"
            );
        }
    }

    #[test]
    fn posterior_even_in_mu_for_symmetric_data() {
        let d = data(&[vec![-1.5], vec![-0.5], vec![0.5], vec![1.5]]);
        let post = HaarPosterior::fit(&d).unwrap();
        for lam in [0.5, 1.0, 2.0] {
            for mu in [0.3, 0.9] {
                let a = haar_posterior_logpdf(&NormalParams::scalar(mu, lam).unwrap(), &post)
                    .unwrap();
                let b = haar_posterior_logpdf(&NormalParams::scalar(-mu, lam).unwrap(), &post)
                    .unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_data_is_an_error() {
        let d = data(&[vec![1.0], vec![1.0], vec![1.0]]);
        assert!(matches!(
            null_log_marginal(&d),
            Err(Error::DegenerateData(_))
        ));
        let d = data(&[vec![1.0, 2.0], vec![1.5, 2.5]]);
        assert!(matches!(
            null_log_marginal(&d),
            Err(Error::Precondition(_))
        ));
    }
}
