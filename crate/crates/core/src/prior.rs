//! Draws from the alternative prior DPM_{μ,Λ}(α, Ψ) by truncated
//! stick-breaking, density evaluation of such draws, and the Polya urn
//! label law shared with the estimator.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::base::{omega_from_alpha, sample_base_measure, ShiftVolumeDraw};
use crate::stats::normal::{mvn_logpdf, NormalParams};

/// Default truncation tolerance for the residual stick mass.
pub const DEFAULT_RESIDUAL_EPS: f64 = 1e-10;

/// One truncated stick-breaking draw from the local alternative. The
/// truncation residual is assigned to the anchor normal (the mean of the
/// truncated tail), so the density stays properly normalized.
#[derive(Debug, Clone)]
pub struct StickBreakingDraw {
    pub weights: Vec<f64>,
    pub atoms: Vec<ShiftVolumeDraw>,
    pub residual: f64,
    pub anchor: NormalParams,
}

impl StickBreakingDraw {
    /// Mixture components as (weight, NormalParams): N(μ + ΛU_h, ΛV_hΛᵀ)
    /// per atom plus the residual anchor component.
    pub fn components(&self) -> Result<Vec<(f64, NormalParams)>> {
        let lam = self.anchor.lam();
        let mut out = Vec::with_capacity(self.atoms.len() + 1);
        for (w, atom) in self.weights.iter().zip(&self.atoms) {
            let mean = self.anchor.mu() + lam * &atom.u;
            let cov = lam * &atom.v * lam.transpose();
            let chol = nalgebra::Cholesky::new(cov)
                .ok_or_else(|| Error::Numeric("component covariance not SPD".into()))?;
            out.push((*w, NormalParams::new(mean, chol.l())?));
        }
        out.push((self.residual, self.anchor.clone()));
        Ok(out)
    }

    /// log density of the drawn mixture at x.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        let comps = self.components()?;
        let terms: Vec<f64> = comps
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, params)| Ok(w.ln() + mvn_logpdf(x, params)?))
            .collect::<Result<_>>()?;
        Ok(crate::log_sum_exp(&terms))
    }

    /// Density evaluated on a univariate grid (p = 1 only).
    pub fn density_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        if self.anchor.dim() != 1 {
            return Err(Error::DimensionMismatch(
                "density_grid is univariate".into(),
            ));
        }
        let comps: Vec<(f64, f64, f64)> = self
            .components()?
            .iter()
            .map(|(w, params)| (*w, params.mu()[0], params.lam()[(0, 0)]))
            .collect();
        Ok(grid
            .iter()
            .map(|&x| {
                comps
                    .iter()
                    .map(|&(w, m, s)| {
                        let z = (x - m) / s;
                        w * (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
                    })
                    .sum()
            })
            .collect())
    }
}

/// Truncation depth with expected residual mass below eps: the residual
/// after H sticks has mean (α/(α+1))^H.
pub fn truncation_depth(alpha: f64, eps: f64) -> usize {
    let rate = (alpha / (alpha + 1.0)).ln();
    ((eps.ln() / rate).ceil() as usize).max(1)
}

/// Draw from DPM_{μ,Λ}(α, Ψ) truncated to expected residual mass < eps,
/// with (ω₁, ω₂) tied to α.
pub fn draw_prior<R: Rng + ?Sized>(
    anchor: &NormalParams,
    alpha: f64,
    eps: f64,
    rng: &mut R,
) -> Result<StickBreakingDraw> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain("eps must lie in (0,1)".into()));
    }
    let p = anchor.dim();
    let bm = omega_from_alpha(alpha, p)?;
    let h = truncation_depth(alpha, eps);
    let beta = Beta::new(1.0, alpha).map_err(|e| Error::Domain(format!("stick beta: {e}")))?;
    let mut weights = Vec::with_capacity(h);
    let mut atoms = Vec::with_capacity(h);
    let mut remaining = 1.0;
    for _ in 0..h {
        let b = beta.sample(rng);
        weights.push(remaining * b);
        atoms.push(sample_base_measure(&bm, rng)?);
        remaining *= 1.0 - b;
    }
    Ok(StickBreakingDraw {
        weights,
        atoms,
        residual: remaining,
        anchor: anchor.clone(),
    })
}

/// Pointwise mean and Monte Carlo standard error of R prior-draw densities
/// on a univariate grid. Converges to the anchor normal pdf (the prior mean
/// of the alternative is the null element).
pub struct MeanDensity {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

pub fn prior_mean_density(
    anchor: &NormalParams,
    alpha: f64,
    grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<MeanDensity> {
    if anchor.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "prior_mean_density is univariate".into(),
        ));
    }
    if replicates < 2 {
        return Err(Error::Precondition("need at least 2 replicates".into()));
    }
    let rows: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, &[0x6d65616e, r as u64]);
            let draw = draw_prior(anchor, alpha, DEFAULT_RESIDUAL_EPS, &mut rng)?;
            draw.density_grid(grid)
        })
        .collect::<Result<_>>()?;
    let r = replicates as f64;
    let mut mean = vec![0.0; grid.len()];
    for row in &rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= r;
    }
    let mut se = vec![0.0; grid.len()];
    for row in &rows {
        for ((s, v), m) in se.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in se.iter_mut() {
        *s = (*s / (r - 1.0)).sqrt() / r.sqrt();
    }
    Ok(MeanDensity { mean, se })
}

/// Polya urn cluster occupancy after i observations.
#[derive(Debug, Clone, Default)]
pub struct UrnState {
    counts: Vec<usize>,
}

impl UrnState {
    pub fn new() -> Self {
        Self { counts: Vec::new() }
    }

    pub fn from_counts(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn clusters(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Record an assignment to cluster `label` (== clusters() opens a new one).
    pub fn assign(&mut self, label: usize) -> Result<()> {
        if label > self.counts.len() {
            return Err(Error::Precondition(format!(
                "label {label} skips over {} occupied clusters",
                self.counts.len()
            )));
        }
        if label == self.counts.len() {
            self.counts.push(1);
        } else {
            self.counts[label] += 1;
        }
        Ok(())
    }
}

/// Transition law of the urn: P(S_{i+1} = ℓ) = K_ℓ(i)/(α+i) for occupied
/// clusters and α/(α+i) for a new one. Returns L_i + 1 probabilities.
pub fn urn_transition(state: &UrnState, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    let i = state.total() as f64;
    let denom = alpha + i;
    let mut probs: Vec<f64> = state.counts().iter().map(|&k| k as f64 / denom).collect();
    probs.push(alpha / denom);
    Ok(probs)
}
