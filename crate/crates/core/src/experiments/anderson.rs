//! Anderson–Darling normality statistic with estimated mean and variance.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Φ values this close to {0,1} are clamped before taking logs.
const CDF_CLAMP: f64 = 1e-15;

/// A² = −n − (1/n) Σ (2i−1)[ln Φ(z_(i)) + ln(1 − Φ(z_(n+1−i)))], with the
/// sample standardized by its mean and (n−1)-denominator standard
/// deviation. Larger values are stronger evidence against normality.
pub fn anderson_darling(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::Precondition(format!(
            "anderson_darling needs n >= 8, got {n}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition("non-finite observation".into()));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateData("constant sample".into()));
    }
    let sd = var.sqrt();
    let mut sorted: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    sorted.sort_by(f64::total_cmp);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let phi: Vec<f64> = sorted
        .iter()
        .map(|&z| std_normal.cdf(z).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP))
        .collect();
    let mut acc = 0.0;
    for i in 0..n {
        let weight = (2 * (i + 1) - 1) as f64;
        acc += weight * (phi[i].ln() + (1.0 - phi[n - 1 - i]).ln());
    }
    Ok(-nf - acc / nf)
}
