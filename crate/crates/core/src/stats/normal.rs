use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// Mean μ and lower-triangular Cholesky factor Λ of the covariance ΛΛᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalParams {
    mu: DVector<f64>,
    lam: DMatrix<f64>,
}

impl NormalParams {
    pub fn new(mu: DVector<f64>, lam: DMatrix<f64>) -> Result<Self> {
        let p = mu.len();
        if lam.nrows() != p || lam.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu has length {p} but lam is {}x{}",
                lam.nrows(),
                lam.ncols()
            )));
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if lam[(i, j)] != 0.0 {
                    return Err(Error::Domain("lam must be lower triangular".into()));
                }
            }
            if !(lam[(i, i)] > 0.0) {
                return Err(Error::Domain(
                    "lam must have strictly positive diagonal".into(),
                ));
            }
        }
        Ok(Self { mu, lam })
    }

    /// Univariate N(mu, lam²).
    pub fn scalar(mu: f64, lam: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mu), DMatrix::from_element(1, 1, lam))
    }

    pub fn standard(p: usize) -> Self {
        Self {
            mu: DVector::zeros(p),
            lam: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn lam(&self) -> &DMatrix<f64> {
        &self.lam
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.lam * self.lam.transpose()
    }

    pub fn log_det_lam(&self) -> f64 {
        (0..self.dim()).map(|i| self.lam[(i, i)].ln()).sum()
    }

    /// Standardized residual z = Λ⁻¹(x − μ) by forward substitution.
    pub fn standardize(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let d = x - &self.mu;
        self.lam
            .solve_lower_triangular(&d)
            .ok_or_else(|| Error::Numeric("singular triangular factor".into()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mu + &self.lam * z
    }
}

/// Exact log N(x | μ, ΛΛᵀ), computed via a triangular solve against Λ.
pub fn mvn_logpdf(x: &DVector<f64>, params: &NormalParams) -> Result<f64> {
    let z = params.standardize(x)?;
    let p = params.dim() as f64;
    Ok(-0.5 * p * LOG_2PI - params.log_det_lam() - 0.5 * z.norm_squared())
}

/// log of the standard p-variate normal density at z.
pub fn std_mvn_logpdf(z: &DVector<f64>) -> f64 {
    -0.5 * z.len() as f64 * LOG_2PI - 0.5 * z.norm_squared()
}

/// log of the Jacobian dΣ/dΛ of Σ = ΛΛᵀ: 2^p ∏ Λ_ii^{p−i+1}. Densities
/// stated on Σ become densities on the Cholesky factor through this term.
pub fn log_chol_jacobian(lam: &DMatrix<f64>) -> f64 {
    let p = lam.nrows();
    let mut out = p as f64 * 2.0f64.ln();
    for i in 0..p {
        out += (p - i) as f64 * lam[(i, i)].ln();
    }
    out
}
