//! The base measure Ψ: V ~ Be(ω₁,ω₂) on 𝕊_p and U | V ~ N(0, I_p − V).
//! A draw (U, V) is one mixture component: lateral shift U and volume
//! fraction matrix V, both in the standardized scale of the anchor normal.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::stats::mbeta::sample_mbeta;

/// (ω₁, ω₂, p) with ω₁, ω₂ > (p−1)/2 so the Be density is integrable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMeasureParams {
    omega1: f64,
    omega2: f64,
    p: usize,
}

impl BaseMeasureParams {
    pub fn new(omega1: f64, omega2: f64, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Precondition("p must be >= 1".into()));
        }
        let floor = (p as f64 - 1.0) / 2.0;
        if !(omega1 > floor) || !(omega2 > floor) {
            return Err(Error::Domain(format!(
                "need omega1, omega2 > (p-1)/2 = {floor}, got ({omega1}, {omega2})"
            )));
        }
        Ok(Self { omega1, omega2, p })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// The (ω₁, ω₂) map tied to the Dirichlet precision α:
///
///   ω₁ = (p+1)/2 + α^{−(p+1)/2},   ω₂ = (p+1)/2 + α^{(p+1)/2}.
///
/// ω₁/(ω₁+ω₂) → 1 as α → 0 and → 0 as α → ∞, so the local alternative
/// collapses onto the anchor normal in both limits.
pub fn omega_from_alpha(alpha: f64, p: usize) -> Result<BaseMeasureParams> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let k = (p as f64 + 1.0) / 2.0;
    BaseMeasureParams::new(k + alpha.powf(-k), k + alpha.powf(k), p)
}

/// One draw from Ψ: lateral shift `u` and volume fraction matrix `v`.
#[derive(Debug, Clone)]
pub struct ShiftVolumeDraw {
    pub u: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Draw (U, V) ~ Ψ: V from the multivariate beta, then U ~ N(0, I−V).
pub fn sample_base_measure<R: Rng + ?Sized>(
    bm: &BaseMeasureParams,
    rng: &mut R,
) -> Result<ShiftVolumeDraw> {
    let p = bm.p();
    let v = sample_mbeta(bm, rng)?;
    let cov = DMatrix::identity(p, p) - &v;
    let chol = nalgebra::Cholesky::new(cov)
        .ok_or_else(|| Error::Numeric("I - V not positive definite".into()))?;
    let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let u = chol.l() * z;
    Ok(ShiftVolumeDraw { u, v })
}
