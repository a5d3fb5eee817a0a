//! Bayes-factor curves over α grids, scalar summaries, the
//! Anderson–Darling competitor, and the power/size, consistency and
//! estimator-benchmark studies.

pub mod anderson;
pub mod benchmark;
pub mod consistency;
pub mod generators;
pub mod power;

pub use anderson::anderson_darling;
pub use benchmark::{estimator_benchmark, BenchRow, BenchSummary, BenchTable};
pub use consistency::{consistency_study, ConsistencyRow, ConsistencyTable};
pub use generators::Generator;
pub use power::{power_size_study, PowerSizeRow, PowerSizeTable};

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::child_seed;
use crate::sis::{estimate_log_bf, LogBfEstimate};

pub(crate) const SEED_TAG_ALPHA: u64 = 0x616c;
pub(crate) const SEED_TAG_DATASET: u64 = 0x6473;
pub(crate) const SEED_TAG_PATH: u64 = 0x7074;
pub(crate) const SEED_TAG_RUN: u64 = 0x726e;

/// Strictly increasing positive α values, by default log₂-regular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaGrid {
    values: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("empty alpha grid".into()));
        }
        if values.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::Domain("alpha grid must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(
                "alpha grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Grid 2^lo, 2^(lo+step), …, 2^hi in log₂ exponents.
    pub fn log2_range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || lo > hi {
            return Err(Error::Precondition(format!(
                "bad log2 grid spec: {lo}..{hi}..{step}"
            )));
        }
        let mut values = Vec::new();
        let mut e = lo;
        while e <= hi + 1e-9 {
            values.push(2.0f64.powf(e));
            e += step;
        }
        Self::new(values)
    }

    /// The test-statistic grid used by the power study: α ∈ [2⁻⁶, 2⁴].
    pub fn testing_default() -> Self {
        Self::log2_range(-6.0, 4.0, 1.0).expect("static grid")
    }

    /// The curve-reporting grid: α ∈ [2⁻⁶, 2¹³].
    pub fn reporting_default() -> Self {
        Self::log2_range(-6.0, 13.0, 1.0).expect("static grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-α estimates plus curve summaries.
#[derive(Debug, Clone, Serialize)]
pub struct BfCurve {
    pub alphas: Vec<f64>,
    pub estimates: Vec<LogBfEstimate>,
    pub min_log_bf: f64,
    pub argmin_alpha: f64,
}

/// Independent estimates per grid point (fresh substreams per α).
pub fn bf_curve(data: &DataMatrix, grid: &AlphaGrid, replicates: usize, seed: u64) -> Result<BfCurve> {
    let estimates: Vec<LogBfEstimate> = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(idx, &alpha)| {
            estimate_log_bf(data, alpha, replicates, child_seed(seed, SEED_TAG_ALPHA, idx as u64))
        })
        .collect::<Result<_>>()?;
    let (argmin_idx, min_log_bf) = estimates
        .iter()
        .map(|e| e.log_bf)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid non-empty");
    Ok(BfCurve {
        alphas: grid.values().to_vec(),
        estimates,
        min_log_bf,
        argmin_alpha: grid.values()[argmin_idx],
    })
}

/// Overall log Bayes factor for the composite alternative with weights π_α
/// over the grid: B = [Σ_j w_j B_j^{-1}]^{-1}, computed in log space. This
/// is exact for a discrete π_α because marginal likelihoods average under
/// the alternative.
pub fn combine_bf(curve: &BfCurve, weights: &[f64]) -> Result<f64> {
    if weights.len() != curve.estimates.len() {
        return Err(Error::DimensionMismatch(
            "weights must match the grid".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Precondition("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    let terms: Vec<f64> = curve
        .estimates
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(e, &w)| w.ln() - e.log_bf)
        .collect();
    Ok(-crate::log_sum_exp(&terms))
}

/// Simulate R datasets from a generator with per-dataset child seeds, in
/// parallel, preserving index order.
pub(crate) fn simulate_batch(
    generator: &Generator,
    n: usize,
    p: usize,
    count: usize,
    seed: u64,
    tag: u64,
) -> Result<Vec<DataMatrix>> {
    (0..count)
        .into_par_iter()
        .map(|i| generator.sample(n, p, child_seed(seed, tag, i as u64)))
        .collect()
}

/// Interpolation-free empirical quantile (type-1, lower).
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}
