//! Estimator benchmark: repeated Bayes factor computations on one fixed
//! dataset for the importance sampler and the ordinate competitor, with
//! wall-clock per run. Runs execute sequentially so timings are honest.

use std::time::Instant;

use serde::Serialize;

use crate::basuchib::estimate_log_bf_bc;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::experiments::SEED_TAG_RUN;
use crate::rng::child_seed;
use crate::sis::estimate_log_bf;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub run: usize,
    pub estimator: String,
    pub log_bf: f64,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub estimator: String,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    pub median_wall_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
}

fn summarize(name: &str, rows: &[BenchRow]) -> BenchSummary {
    let mut vals: Vec<f64> = rows.iter().map(|r| r.log_bf).collect();
    vals.sort_by(f64::total_cmp);
    let mut times: Vec<f64> = rows.iter().map(|r| r.wall_secs).collect();
    times.sort_by(f64::total_cmp);
    let q = |p: f64| crate::experiments::quantile(&vals, p);
    BenchSummary {
        estimator: name.to_string(),
        mean: vals.iter().sum::<f64>() / vals.len() as f64,
        min: vals[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: vals[vals.len() - 1],
        iqr: q(0.75) - q(0.25),
        median_wall_secs: crate::experiments::quantile(&times, 0.5),
    }
}

/// `runs` repetitions of both estimators on the same dataset, each with
/// `replicates` importance samples (and `gibbs_iters` sweeps per ordinate
/// chain). Univariate only, matching the ordinate competitor.
pub fn estimator_benchmark(
    data: &DataMatrix,
    alpha: f64,
    runs: usize,
    replicates: usize,
    gibbs_iters: usize,
    seed: u64,
) -> Result<BenchTable> {
    if data.p() != 1 {
        return Err(Error::Precondition("benchmark is univariate".into()));
    }
    if runs < 2 {
        return Err(Error::Precondition("need at least 2 runs".into()));
    }
    let mut rows = Vec::with_capacity(runs * 2);
    for run in 0..runs {
        let run_seed = child_seed(seed, SEED_TAG_RUN, run as u64);
        let t0 = Instant::now();
        let sis = estimate_log_bf(data, alpha, replicates, run_seed)?;
        let sis_secs = t0.elapsed().as_secs_f64();
        rows.push(BenchRow {
            run,
            estimator: "sis".into(),
            log_bf: sis.log_bf,
            wall_secs: sis_secs,
        });
        let t1 = Instant::now();
        let bc = estimate_log_bf_bc(data, alpha, replicates, gibbs_iters, run_seed ^ 0xbc)?;
        let bc_secs = t1.elapsed().as_secs_f64();
        rows.push(BenchRow {
            run,
            estimator: "basu-chib".into(),
            log_bf: bc.log_bf,
            wall_secs: bc_secs,
        });
    }
    let sis_rows: Vec<BenchRow> = rows.iter().filter(|r| r.estimator == "sis").cloned().collect();
    let bc_rows: Vec<BenchRow> = rows
        .iter()
        .filter(|r| r.estimator == "basu-chib")
        .cloned()
        .collect();
    let summaries = vec![summarize("sis", &sis_rows), summarize("basu-chib", &bc_rows)];
    Ok(BenchTable { rows, summaries })
}
