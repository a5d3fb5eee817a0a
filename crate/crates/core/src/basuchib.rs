//! Univariate competitor estimator: a Gibbs sampler over labels, cluster
//! volumes and the anchor (μ, Λ), driving the likelihood–posterior ordinate
//! Bayes factor estimate. Used by the estimator benchmark.
//!
//! The ordinate identity evaluated at a high-posterior-density point
//! (μ*, Λ*):
//!
//!   B̂⁻¹ = f_{H0}(μ*,Λ* | X)/f_{H1}(μ*,Λ* | X) · (1/M) Σ_m ∏_i bracket_i,
//!
//! where the bracket product is the conditional sequential-imputation
//! estimate of f_{H1}(X | μ*,Λ*)/∏ g(x_i | μ*,Λ*), shared with the
//! importance sampler's rollout.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::log_sum_exp;
use crate::nullmodel::{haar_posterior_logpdf, HaarPosterior};
use crate::rng::substream;
use crate::sis::{rollout_log_brackets, summarize_log_weights, LogBfEstimate};
use crate::stats::base::{omega_from_alpha, BaseMeasureParams};
use crate::stats::normal::NormalParams;

const STREAM_SELECT: u64 = 0x6263_0001;
const STREAM_ORDINATE: u64 = 0x6263_0002;
const STREAM_LIKELIHOOD: u64 = 0x6263_0003;

/// Fraction of sweeps discarded as burn-in.
const BURN_IN_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
struct BcCluster {
    v: f64,
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl BcCluster {
    fn ssr(&self) -> f64 {
        (self.sum_sq - self.sum * self.sum / self.count as f64).max(0.0)
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Gibbs state over labels S, per-cluster volumes V_ℓ and the anchor (μ, Λ).
#[derive(Debug, Clone)]
pub struct GibbsState {
    labels: Vec<usize>,
    clusters: Vec<BcCluster>,
    mu: f64,
    lam: f64,
    sweeps: usize,
}

impl GibbsState {
    /// All observations start in one cluster; anchor at the sample MLE.
    pub fn init<R: Rng + ?Sized>(
        xs: &[f64],
        bm: &BaseMeasureParams,
        rng: &mut R,
    ) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Precondition("need at least two observations".into()));
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        if var <= 0.0 {
            return Err(Error::DegenerateData("constant sample".into()));
        }
        let beta = Beta::new(bm.omega1(), bm.omega2())
            .map_err(|e| Error::Domain(format!("volume beta: {e}")))?;
        Ok(Self {
            labels: vec![0; n],
            clusters: vec![BcCluster {
                v: beta.sample(rng),
                count: n,
                sum: xs.iter().sum(),
                sum_sq: xs.iter().map(|x| x * x).sum(),
            }],
            mu: mean,
            lam: var.sqrt(),
            sweeps: 0,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn anchor(&self) -> (f64, f64) {
        (self.mu, self.lam)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Cluster occupancy counts in label order.
    pub fn counts(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.count).collect()
    }
}

/// log N(z | m, s²) − log N(z | 0, 1) for a cluster with volume v, count k
/// and standardized member sum zsum.
fn pred_log_ratio(v: f64, k: f64, zsum: f64, z: f64) -> f64 {
    let denom = v + k * (1.0 - v);
    let m = (1.0 - v) / denom * zsum;
    let s2 = v * (1.0 + k * (1.0 - v)) / denom;
    0.5 * (z * z - (z - m) * (z - m) / s2) - 0.5 * s2.ln()
}

/// Unnormalized log conditional of a cluster volume v given its members'
/// standardized mean and spread: Be(ω₁,ω₂) prior times the U-collapsed
/// Gaussian likelihood N_K(z | 0, vI + (1−v)11ᵀ).
fn volume_log_conditional(
    v: f64,
    k: f64,
    zbar: f64,
    ssr_z: f64,
    bm: &BaseMeasureParams,
) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let denom = v + k * (1.0 - v);
    (bm.omega1() - 1.0) * v.ln() + (bm.omega2() - 1.0) * (1.0 - v).ln()
        - 0.5 * (denom.ln() + (k - 1.0) * v.ln())
        - 0.5 * (k * zbar * zbar / denom + ssr_z / v)
}

/// Shrinking-interval slice sampler on (0,1).
fn slice_sample_volume<R: Rng + ?Sized>(
    v0: f64,
    k: f64,
    zbar: f64,
    ssr_z: f64,
    bm: &BaseMeasureParams,
    rng: &mut R,
) -> f64 {
    let log_f0 = volume_log_conditional(v0, k, zbar, ssr_z, bm);
    let level = log_f0 + rng.gen_range(0.0f64..1.0).ln();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let v = rng.gen_range(lo..hi);
        if volume_log_conditional(v, k, zbar, ssr_z, bm) >= level {
            return v;
        }
        if v < v0 {
            lo = v;
        } else {
            hi = v;
        }
    }
    v0
}

/// One full sweep: resample every label from its conditional, every cluster
/// volume by slice sampling, then (μ, Λ) from their conditionals under the
/// Λ⁻¹ prior. The invariant distribution is the H₁ posterior.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut GibbsState,
    xs: &[f64],
    alpha: f64,
    bm: &BaseMeasureParams,
    rng: &mut R,
) -> Result<()> {
    let n = xs.len();
    if state.labels.len() != n {
        return Err(Error::DimensionMismatch("state/data length".into()));
    }
    let beta = Beta::new(bm.omega1(), bm.omega2())
        .map_err(|e| Error::Domain(format!("volume beta: {e}")))?;

    // Labels.
    let mut terms: Vec<f64> = Vec::new();
    for i in 0..n {
        let old = state.labels[i];
        {
            let c = &mut state.clusters[old];
            c.count -= 1;
            c.sum -= xs[i];
            c.sum_sq -= xs[i] * xs[i];
        }
        if state.clusters[old].count == 0 {
            state.clusters.swap_remove(old);
            let moved = state.clusters.len();
            for label in state.labels.iter_mut() {
                if *label == moved {
                    *label = old;
                }
            }
        }
        let z = (xs[i] - state.mu) / state.lam;
        terms.clear();
        for c in &state.clusters {
            let zsum = (c.sum - c.count as f64 * state.mu) / state.lam;
            terms.push((c.count as f64).ln() + pred_log_ratio(c.v, c.count as f64, zsum, z));
        }
        terms.push(alpha.ln());
        let norm = log_sum_exp(&terms);
        let u: f64 = rng.gen_range(0.0..1.0);
        let mut acc = 0.0;
        let mut label = terms.len() - 1;
        for (j, t) in terms.iter().enumerate() {
            acc += (t - norm).exp();
            if u < acc {
                label = j;
                break;
            }
        }
        if label == state.clusters.len() {
            state.clusters.push(BcCluster {
                v: beta.sample(rng),
                count: 1,
                sum: xs[i],
                sum_sq: xs[i] * xs[i],
            });
        } else {
            let c = &mut state.clusters[label];
            c.count += 1;
            c.sum += xs[i];
            c.sum_sq += xs[i] * xs[i];
        }
        state.labels[i] = label;
    }

    // Cluster volumes.
    for c in state.clusters.iter_mut() {
        let k = c.count as f64;
        let zbar = (c.mean() - state.mu) / state.lam;
        let ssr_z = c.ssr() / (state.lam * state.lam);
        c.v = slice_sample_volume(c.v, k, zbar, ssr_z, bm, rng);
    }

    // Anchor scale: Λ² | μ ~ InvGamma(n/2, Q/2).
    let q: f64 = state
        .clusters
        .iter()
        .map(|c| {
            let k = c.count as f64;
            let c_l = k / (c.v + k * (1.0 - c.v));
            c.ssr() / c.v + c_l * (c.mean() - state.mu) * (c.mean() - state.mu)
        })
        .sum();
    let gamma = Gamma::new(n as f64 / 2.0, 2.0 / q)
        .map_err(|e| Error::Domain(format!("scale gamma: {e}")))?;
    state.lam = (1.0 / gamma.sample(rng)).sqrt();

    // Anchor location: μ | Λ ~ N(Σc_ℓ x̄_ℓ / C, Λ²/C).
    let mut c_total = 0.0;
    let mut weighted = 0.0;
    for c in &state.clusters {
        let k = c.count as f64;
        let c_l = k / (c.v + k * (1.0 - c.v));
        c_total += c_l;
        weighted += c_l * c.mean();
    }
    let noise: f64 = rng.sample(StandardNormal);
    state.mu = weighted / c_total + state.lam / c_total.sqrt() * noise;

    state.sweeps += 1;
    Ok(())
}

/// log f_{H1}(μ*, Λ* | S, V, X): the conditional ordinate averaged over
/// Gibbs draws in the Rao–Blackwellized posterior ordinate.
fn conditional_ordinate(state: &GibbsState, n: usize, mu_star: f64, lam_star: f64) -> f64 {
    let mut c_total = 0.0;
    let mut weighted = 0.0;
    let mut spread = 0.0;
    for c in &state.clusters {
        let k = c.count as f64;
        let c_l = k / (c.v + k * (1.0 - c.v));
        c_total += c_l;
        weighted += c_l * c.mean();
        spread += c.ssr() / c.v + c_l * c.mean() * c.mean();
    }
    let mu_tilde = weighted / c_total;
    let r = spread - c_total * mu_tilde * mu_tilde;
    let nf = n as f64;
    // Λ*² | S,V,X ~ InvGamma((n−1)/2, R/2), in the Λ chart.
    let (a, b) = ((nf - 1.0) / 2.0, r / 2.0);
    let t = lam_star * lam_star;
    let log_lam = a * b.ln() - ln_gamma(a) - (a + 1.0) * t.ln() - b / t + (2.0 * lam_star).ln();
    // μ* | Λ*, S,V,X ~ N(μ̃, Λ*²/C)
    let s2 = t / c_total;
    let log_mu = -0.5 * (2.0 * std::f64::consts::PI * s2).ln()
        - 0.5 * (mu_star - mu_tilde) * (mu_star - mu_tilde) / s2;
    log_lam + log_mu
}

/// Standard error of log(mean(exp(values))) for an autocorrelated chain,
/// by batch means.
fn batch_means_se_log(log_values: &[f64], batches: usize) -> f64 {
    let t = log_values.len();
    if t < 2 * batches {
        return f64::INFINITY;
    }
    let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let u: Vec<f64> = log_values.iter().map(|v| (v - max).exp()).collect();
    let len = t / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| u[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>()
        / (batches as f64 - 1.0);
    (var / batches as f64).sqrt() / grand
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Likelihood–posterior ordinate estimate of log B (univariate only).
///
/// Runs one Gibbs chain to select (μ*, Λ*) as coordinatewise posterior
/// medians, a second chain for the Rao–Blackwellized ordinate
/// f_{H1}(μ*,Λ*|X), and a conditional importance-sampling pass for the
/// likelihood ordinate.
pub fn estimate_log_bf_bc(
    data: &DataMatrix,
    alpha: f64,
    replicates: usize,
    gibbs_iters: usize,
    seed: u64,
) -> Result<LogBfEstimate> {
    if data.p() != 1 {
        return Err(Error::Precondition(
            "the ordinate estimator is univariate only".into(),
        ));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    if replicates == 0 || gibbs_iters < 10 {
        return Err(Error::Precondition(
            "need replicates >= 1 and gibbs_iters >= 10".into(),
        ));
    }
    let canon = data.canonicalize()?;
    let xs = canon.column()?;
    let n = xs.len();
    let bm = omega_from_alpha(alpha, 1)?;
    let burn = ((gibbs_iters as f64 * BURN_IN_FRACTION).ceil() as usize).max(1);

    // Chain 1: select (μ*, Λ*) as coordinatewise medians.
    let mut rng = substream(seed, &[STREAM_SELECT]);
    let mut state = GibbsState::init(&xs, &bm, &mut rng)?;
    let mut mus = Vec::with_capacity(gibbs_iters - burn);
    let mut lams = Vec::with_capacity(gibbs_iters - burn);
    for sweep in 0..gibbs_iters {
        gibbs_sweep(&mut state, &xs, alpha, &bm, &mut rng)?;
        if sweep >= burn {
            mus.push(state.mu);
            lams.push(state.lam);
        }
    }
    let mu_star = median(&mut mus);
    let lam_star = median(&mut lams);

    // Chain 2: Rao–Blackwellized posterior ordinate at (μ*, Λ*).
    let mut rng = substream(seed, &[STREAM_ORDINATE]);
    let mut state = GibbsState::init(&xs, &bm, &mut rng)?;
    let mut ordinates = Vec::with_capacity(gibbs_iters - burn);
    for sweep in 0..gibbs_iters {
        gibbs_sweep(&mut state, &xs, alpha, &bm, &mut rng)?;
        if sweep >= burn {
            ordinates.push(conditional_ordinate(&state, n, mu_star, lam_star));
        }
    }
    let ord_summary = summarize_log_weights(&ordinates)?;
    let log_post_ordinate_h1 = ord_summary.log_mean;
    // Batch-means standard error for the ordinate chain: the draws are
    // autocorrelated, so the iid delta-method se would be optimistic.
    let ord_se = batch_means_se_log(&ordinates, 32);

    // Conditional importance sampling for the likelihood ordinate.
    let params = NormalParams::scalar(mu_star, lam_star)?;
    let rows: Vec<DVector<f64>> = (0..n).map(|i| canon.row(i)).collect();
    let z_rows: Vec<DVector<f64>> = rows
        .iter()
        .map(|x| params.standardize(x))
        .collect::<Result<_>>()?;
    let log_weights: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|m| -> Result<f64> {
            let mut rng = substream(seed, &[STREAM_LIKELIHOOD, m as u64]);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            rollout_log_brackets(&z_rows, &order, alpha, bm, &mut rng)
        })
        .collect::<Result<_>>()?;
    let is_summary = summarize_log_weights(&log_weights)?;

    let post = HaarPosterior::fit(&canon)?;
    let log_post_ordinate_h0 = haar_posterior_logpdf(&params, &post)?;

    let log_bf_inv = log_post_ordinate_h0 - log_post_ordinate_h1 + is_summary.log_mean;
    if !log_bf_inv.is_finite() {
        return Err(Error::Numeric("non-finite ordinate estimate".into()));
    }
    let mc_se_log = (is_summary.se_log.powi(2) + ord_se.powi(2)).sqrt();
    Ok(LogBfEstimate {
        log_bf: -log_bf_inv,
        mc_se_log,
        replicates,
        ess: is_summary.ess,
    })
}

/// Convenience wrapper used by tests: run a chain and return cluster-count
/// frequencies over sweeps.
pub fn cluster_count_frequencies(
    data: &DataMatrix,
    alpha: f64,
    sweeps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let canon = data.canonicalize()?;
    let xs = canon.column()?;
    let bm = omega_from_alpha(alpha, 1)?;
    let mut rng = substream(seed, &[0x6263_0009]);
    let mut state = GibbsState::init(&xs, &bm, &mut rng)?;
    let mut counts = vec![0usize; xs.len() + 1];
    for _ in 0..sweeps {
        gibbs_sweep(&mut state, &xs, alpha, &bm, &mut rng)?;
        counts[state.n_clusters()] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / sweeps as f64).collect())
}
