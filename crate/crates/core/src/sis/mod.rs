//! The Bayes factor engine: per-replicate Polya-urn rollout with conjugate
//! per-cluster updates, importance densities for the anchor (μ, Λ), and
//! log-space aggregation with standard errors.
//!
//! Everything runs in the standardized scale z = Λ⁻¹(x − μ) of the
//! replicate's anchor: a cluster with volume matrix V and K members whose
//! standardized sum is zsum has predictive
//!
//!   Z_new ~ N( (I−V){V + K(I−V)}⁻¹ zsum,  V{V + K(I−V)}⁻¹{I + K(I−V)} ),
//!
//! the conjugate update of U ~ N(0, I−V) with observations Z_j ~ N(U, V).
//! Relative to the anchor itself (the α-term of the urn), only the density
//! ratio against N(0, I) is needed, so the common |det Λ|⁻¹ factor cancels.

mod estimate;
mod importance;

pub use estimate::{estimate_log_bf, summarize_log_weights, LogBfEstimate, WeightSummary};
pub use importance::{
    anchor_multivariate_logpdf, anchor_univariate_logpdf, importance_df,
    sample_anchor_multivariate, sample_anchor_univariate, AnchorDraw,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::log_sum_exp;
use crate::stats::base::BaseMeasureParams;
use crate::stats::mbeta::sample_mbeta;

/// Per-cluster sufficient statistics in the anchor's standardized scale.
#[derive(Debug, Clone)]
pub struct ClusterSuffStats {
    count: usize,
    zsum: DVector<f64>,
    /// Eigendecomposition of the cluster's volume matrix V, fixed at creation.
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
    // Derived quantities for the current count, refreshed on update:
    mean: DVector<f64>,
    /// Rows of diag(σ^{-1/2})·Eᵀ: whitener of the predictive covariance.
    whitener: DMatrix<f64>,
    log_det_cov: f64,
}

impl ClusterSuffStats {
    /// Open a cluster from its first standardized observation and volume
    /// matrix draw.
    pub fn open(v: &DMatrix<f64>, z: &DVector<f64>) -> Result<Self> {
        let p = z.len();
        if v.nrows() != p || v.ncols() != p {
            return Err(Error::DimensionMismatch("volume matrix shape".into()));
        }
        let eig = nalgebra::SymmetricEigen::new((v + v.transpose()) * 0.5);
        if eig.eigenvalues.iter().any(|&d| d <= 0.0 || d >= 1.0) {
            return Err(Error::Domain(
                "cluster volume matrix must have eigenvalues in (0,1)".into(),
            ));
        }
        let mut cluster = Self {
            count: 1,
            zsum: z.clone(),
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues,
            mean: DVector::zeros(p),
            whitener: DMatrix::zeros(p, p),
            log_det_cov: 0.0,
        };
        cluster.refresh();
        Ok(cluster)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn zsum(&self) -> &DVector<f64> {
        &self.zsum
    }

    pub fn absorb(&mut self, z: &DVector<f64>) {
        self.count += 1;
        self.zsum += z;
        self.refresh();
    }

    /// Recompute predictive mean, whitener and log-determinant for the
    /// current count. All factors are commuting polynomials in V, so they
    /// share V's eigenbasis.
    fn refresh(&mut self) {
        let p = self.zsum.len();
        let k = self.count as f64;
        let proj = self.eigvecs.transpose() * &self.zsum;
        let mut mean_coord = DVector::zeros(p);
        let mut inv_sd = DVector::zeros(p);
        let mut log_det = 0.0;
        for j in 0..p {
            let d = self.eigvals[j];
            let denom = d + k * (1.0 - d);
            mean_coord[j] = (1.0 - d) / denom * proj[j];
            let sigma = d * (1.0 + k * (1.0 - d)) / denom;
            inv_sd[j] = 1.0 / sigma.sqrt();
            log_det += sigma.ln();
        }
        self.mean = &self.eigvecs * mean_coord;
        for j in 0..p {
            for c in 0..p {
                self.whitener[(j, c)] = inv_sd[j] * self.eigvecs[(c, j)];
            }
        }
        self.log_det_cov = log_det;
    }

    /// Predictive parameters (mean, covariance) in the standardized scale.
    pub fn predictive_mean_cov(&self) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.zsum.len();
        let k = self.count as f64;
        let mut cov_coord = DVector::zeros(p);
        for j in 0..p {
            let d = self.eigvals[j];
            let denom = d + k * (1.0 - d);
            cov_coord[j] = d * (1.0 + k * (1.0 - d)) / denom;
        }
        let cov = &self.eigvecs * DMatrix::from_diagonal(&cov_coord) * self.eigvecs.transpose();
        (self.mean.clone(), cov)
    }

    /// log N(z | mean, cov) − log N(z | 0, I): the cluster-vs-anchor density
    /// ratio entering both the predictive and the label law.
    pub fn log_ratio_vs_anchor(&self, z: &DVector<f64>) -> f64 {
        let y = &self.whitener * (z - &self.mean);
        0.5 * (z.norm_squared() - y.norm_squared()) - 0.5 * self.log_det_cov
    }
}

/// One replicate's urn state over standardized observations.
pub struct Rollout {
    alpha: f64,
    bm: BaseMeasureParams,
    clusters: Vec<ClusterSuffStats>,
    processed: usize,
    terms: Vec<f64>,
}

impl Rollout {
    pub fn new(alpha: f64, bm: BaseMeasureParams) -> Self {
        Self {
            alpha,
            bm,
            clusters: Vec::new(),
            processed: 0,
            terms: Vec::new(),
        }
    }

    pub fn clusters(&self) -> &[ClusterSuffStats] {
        &self.clusters
    }

    pub fn processed(&self) -> usize {
        self.processed
    }

    /// log predictive density of z given the current state, relative to the
    /// anchor: log[ α/(α+i) + Σ_ℓ K_ℓ/(α+i) · ratio_ℓ(z) ]. Adding
    /// log N(z|0,I) − log|det Λ| recovers the absolute predictive.
    pub fn log_bracket(&mut self, z: &DVector<f64>) -> f64 {
        let i = self.processed as f64;
        self.terms.clear();
        self.terms.push(self.alpha.ln());
        for cluster in &self.clusters {
            self.terms
                .push((cluster.count() as f64).ln() + cluster.log_ratio_vs_anchor(z));
        }
        log_sum_exp(&self.terms) - (self.alpha + i).ln()
    }

    /// Normalized log label probabilities for z: existing clusters in order,
    /// then the new-cluster slot.
    pub fn label_log_probs(&mut self, z: &DVector<f64>) -> Vec<f64> {
        self.terms.clear();
        for cluster in &self.clusters {
            self.terms
                .push((cluster.count() as f64).ln() + cluster.log_ratio_vs_anchor(z));
        }
        self.terms.push(self.alpha.ln());
        let norm = log_sum_exp(&self.terms);
        self.terms.iter().map(|t| t - norm).collect()
    }

    /// Advance the urn: score z, sample its label, update the state.
    /// Returns this step's log bracket.
    pub fn step<R: Rng + ?Sized>(&mut self, z: &DVector<f64>, rng: &mut R) -> Result<f64> {
        let log_bracket = self.log_bracket(z);
        let log_probs = self.label_log_probs(z);
        let u: f64 = rng.gen_range(0.0..1.0);
        let mut acc = 0.0;
        let mut label = log_probs.len() - 1;
        for (j, lp) in log_probs.iter().enumerate() {
            acc += lp.exp();
            if u < acc {
                label = j;
                break;
            }
        }
        if label == self.clusters.len() {
            let v = sample_mbeta(&self.bm, rng)?;
            self.clusters.push(ClusterSuffStats::open(&v, z)?);
        } else {
            self.clusters[label].absorb(z);
        }
        self.processed += 1;
        Ok(log_bracket)
    }
}

/// Roll the urn through `z_rows` in the given order, returning the summed
/// log brackets of Eq-style sequential imputation.
pub(crate) fn rollout_log_brackets<R: Rng + ?Sized>(
    z_rows: &[DVector<f64>],
    order: &[usize],
    alpha: f64,
    bm: BaseMeasureParams,
    rng: &mut R,
) -> Result<f64> {
    let mut rollout = Rollout::new(alpha, bm);
    let mut total = 0.0;
    for &idx in order {
        total += rollout.step(&z_rows[idx], rng)?;
    }
    if !total.is_finite() {
        return Err(Error::Numeric("non-finite rollout log weight".into()));
    }
    Ok(total)
}
