//! Consistency study under the null: Bayes factor sample paths along
//! growing prefixes of standard-normal sequences, with quantile summaries.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::experiments::{quantile, Generator, SEED_TAG_PATH};
use crate::rng::child_seed;
use crate::sis::estimate_log_bf;

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
    pub fraction_bf_above_one: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyTable {
    pub rows: Vec<ConsistencyRow>,
    /// log BF per (path, checkpoint).
    pub paths: Vec<Vec<f64>>,
}

/// Simulate `paths` standard-normal sequences; at each checkpoint estimate
/// log B on the prefix (fixed α) and summarize across paths.
pub fn consistency_study(
    checkpoints: &[usize],
    paths: usize,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> Result<ConsistencyTable> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    if paths < 2 {
        return Err(Error::Precondition("need at least 2 paths".into()));
    }
    let n_max = *checkpoints.last().unwrap();
    let path_logs: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|path_idx| -> Result<Vec<f64>> {
            let path_seed = child_seed(seed, SEED_TAG_PATH, path_idx as u64);
            let full = Generator::Normal.sample(n_max, 1, path_seed)?;
            let xs = full.column()?;
            checkpoints
                .iter()
                .map(|&ck| {
                    let prefix = DataMatrix::from_column(&xs[..ck])?;
                    let est = estimate_log_bf(
                        &prefix,
                        alpha,
                        replicates,
                        child_seed(path_seed, 0xc4ec, ck as u64),
                    )?;
                    Ok(est.log_bf)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut vals: Vec<f64> = path_logs.iter().map(|p| p[j]).collect();
            let above = vals.iter().filter(|&&v| v > 0.0).count() as f64 / paths as f64;
            vals.sort_by(f64::total_cmp);
            ConsistencyRow {
                n,
                q025: quantile(&vals, 0.025),
                median: quantile(&vals, 0.5),
                q975: quantile(&vals, 0.975),
                fraction_bf_above_one: above,
            }
        })
        .collect();
    Ok(ConsistencyTable {
        rows,
        paths: path_logs,
    })
}
