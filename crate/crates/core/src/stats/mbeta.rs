//! Multivariate beta distribution on 𝕊_p, the cone of symmetric p×p
//! matrices with all eigenvalues in (0,1):
//!
//!   Be(V | ω₁, ω₂) = a_p(ω₁,ω₂) (det V)^{ω₁−(p+1)/2} (det(I−V))^{ω₂−(p+1)/2}
//!
//! with a_p = Γ_p(ω₁+ω₂)/(Γ_p(ω₁)Γ_p(ω₂)). Reduces to Beta(ω₁,ω₂) at p=1.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::base::BaseMeasureParams;
use crate::stats::special::log_mvgamma;

/// Eigenvalues this close to {0,1} are treated as outside 𝕊_p; a draw
/// landing there is discarded and redrawn (a probability-zero event).
pub const EIGEN_MARGIN: f64 = 1e-12;

/// Lower-triangular Bartlett factor A of a Wishart(df, I_p) draw: A_ii² is
/// chi-square with df−i+1 degrees of freedom (real df > p−1 allowed),
/// strictly-lower entries standard normal. The draw itself is AAᵀ.
pub(crate) fn bartlett_lower<R: Rng + ?Sized>(p: usize, df: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    if !(df > p as f64 - 1.0) {
        return Err(Error::Domain(format!(
            "bartlett needs df > p-1, got df={df}, p={p}"
        )));
    }
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        let k = df - i as f64;
        let chi2 = Gamma::new(k / 2.0, 2.0)
            .map_err(|e| Error::Domain(format!("chi-square shape: {e}")))?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(a)
}

/// Symmetric eigendecomposition with a symmetry pre-check.
fn checked_eigen(v: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let p = v.nrows();
    if v.ncols() != p {
        return Err(Error::DimensionMismatch("v must be square".into()));
    }
    let scale = v.norm().max(1.0);
    for i in 0..p {
        for j in (i + 1)..p {
            if (v[(i, j)] - v[(j, i)]).abs() > 1e-8 * scale {
                return Err(Error::Domain("v is not symmetric".into()));
            }
        }
    }
    let sym = (v + v.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// log Be(v | ω₁, ω₂) including the normalizing constant. Errors if v is
/// outside 𝕊_p.
pub fn mbeta_logpdf(v: &DMatrix<f64>, bm: &BaseMeasureParams) -> Result<f64> {
    let p = bm.p();
    if v.nrows() != p || v.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "v is {}x{}, expected {p}x{p}",
            v.nrows(),
            v.ncols()
        )));
    }
    let (eigvals, _) = checked_eigen(v)?;
    if eigvals.iter().any(|&d| d <= 0.0 || d >= 1.0) {
        return Err(Error::Domain(
            "v must have all eigenvalues strictly inside (0,1)".into(),
        ));
    }
    let (w1, w2) = (bm.omega1(), bm.omega2());
    let half = (p as f64 + 1.0) / 2.0;
    let log_a = log_mvgamma(p, w1 + w2)? - log_mvgamma(p, w1)? - log_mvgamma(p, w2)?;
    let log_det_v: f64 = eigvals.iter().map(|d| d.ln()).sum();
    let log_det_iv: f64 = eigvals.iter().map(|d| (1.0 - d).ln()).sum();
    Ok(log_a + (w1 - half) * log_det_v + (w2 - half) * log_det_iv)
}

/// Draw V ~ Be(ω₁, ω₂) as V = T⁻¹ A (T⁻¹)ᵀ where A and A+B are Wishart
/// draws with degrees of freedom 2ω₁ and 2ω₂ via the Bartlett construction
/// and T = Cholesky(A+B). The result is symmetrized and guaranteed to have
/// eigenvalues inside (EIGEN_MARGIN, 1−EIGEN_MARGIN).
pub fn sample_mbeta<R: Rng + ?Sized>(bm: &BaseMeasureParams, rng: &mut R) -> Result<DMatrix<f64>> {
    let p = bm.p();
    for _ in 0..100 {
        let la = bartlett_lower(p, 2.0 * bm.omega1(), rng)?;
        let lb = bartlett_lower(p, 2.0 * bm.omega2(), rng)?;
        let wa = &la * la.transpose();
        let wb = &lb * lb.transpose();
        let sum = &wa + &wb;
        let t = match nalgebra::Cholesky::new(sum) {
            Some(c) => c,
            None => continue,
        };
        // V = T^{-1} A T^{-T} via two triangular solves.
        let y = match t.l().solve_lower_triangular(&wa) {
            Some(y) => y,
            None => continue,
        };
        let v = match t.l().solve_lower_triangular(&y.transpose()) {
            Some(v) => v,
            None => continue,
        };
        let v = (&v + v.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(v.clone());
        if eig
            .eigenvalues
            .iter()
            .all(|&d| d > EIGEN_MARGIN && d < 1.0 - EIGEN_MARGIN)
        {
            return Ok(v);
        }
    }
    Err(Error::Numeric(
        "sample_mbeta failed repeatedly; parameters near domain boundary".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats::base::BaseMeasureParams;

    #[test]
    fn reduces_to_univariate_beta() {
        // Beta(2,2) at 0.5: density 6·0.5·0.5 = 1.5
        let bm = BaseMeasureParams::new(2.0, 2.0, 1).unwrap();
        let v = DMatrix::from_element(1, 1, 0.5);
        let lp = mbeta_logpdf(&v, &bm).unwrap();
        assert!((lp - 1.5f64.ln()).abs() < 1e-12);
        assert!((lp - 0.4055).abs() < 1e-4);

        // Uniform case
        let bm = BaseMeasureParams::new(1.0, 1.0, 1).unwrap();
        let v = DMatrix::from_element(1, 1, 0.25);
        assert!(mbeta_logpdf(&v, &bm).unwrap().abs() < 1e-14);
    }

    #[test]
    fn univariate_sample_mean() {
        let mut rng = substream(5, &[1]);
        let bm = BaseMeasureParams::new(2.0, 2.0, 1).unwrap();
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_mbeta(&bm, &mut rng).unwrap()[(0, 0)])
            .sum::<f64>()
            / n as f64;
        // Beta(2,2) has mean 1/2 and sd 1/(2√5); 3 MC standard errors.
        let se = (0.05f64).sqrt() / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean={mean}");

        let bm = BaseMeasureParams::new(2.0, 6.0, 1).unwrap();
        let mean: f64 = (0..n)
            .map(|_| sample_mbeta(&bm, &mut rng).unwrap()[(0, 0)])
            .sum::<f64>()
            / n as f64;
        // Beta(2,6): mean 0.25, var = 2·6/(64·9) = 0.020833
        let se = (0.0208f64).sqrt() / (n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean={mean}");
    }

    #[test]
    fn draws_live_in_the_cone() {
        let mut rng = substream(6, &[2]);
        let bm = BaseMeasureParams::new(3.0, 3.0, 2).unwrap();
        for _ in 0..500 {
            let v = sample_mbeta(&bm, &mut rng).unwrap();
            assert!((v[(0, 1)] - v[(1, 0)]).abs() < 1e-13);
            let eig = nalgebra::SymmetricEigen::new(v);
            for d in eig.eigenvalues.iter() {
                assert!(*d > 0.0 && *d < 1.0);
            }
        }
    }

    #[test]
    fn rejects_matrix_outside_cone() {
        let bm = BaseMeasureParams::new(3.0, 3.0, 2).unwrap();
        let v = DMatrix::from_row_slice(2, 2, &[1.2, 0.0, 0.0, 0.5]);
        assert!(mbeta_logpdf(&v, &bm).is_err());
        let v = DMatrix::from_row_slice(2, 2, &[0.5, 0.3, -0.3, 0.5]);
        assert!(mbeta_logpdf(&v, &bm).is_err());
    }
}
