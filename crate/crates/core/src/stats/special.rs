use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// log Γ_p(a), the multivariate gamma function, for a > (p−1)/2:
/// log Γ_p(a) = p(p−1)/4 · log π + Σ_{i=1..p} log Γ(a − (i−1)/2).
pub fn log_mvgamma(p: usize, a: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Precondition("log_mvgamma needs p >= 1".into()));
    }
    if a <= (p as f64 - 1.0) / 2.0 {
        return Err(Error::Domain(format!(
            "log_mvgamma requires a > (p-1)/2, got a={a}, p={p}"
        )));
    }
    let mut s = (p * (p - 1)) as f64 / 4.0 * PI.ln();
    for i in 0..p {
        s += ln_gamma(a - i as f64 / 2.0);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_reduces_to_gamma() {
        // Γ(1/2) = √π
        let v = log_mvgamma(1, 0.5).unwrap();
        assert!((v - 0.5 * PI.ln()).abs() < 1e-12);
        assert!((v - 0.5723649429).abs() < 1e-9);
    }

    #[test]
    fn bivariate_values() {
        // Γ_2(1) = π^{1/2} Γ(1) Γ(1/2) = π
        let v = log_mvgamma(2, 1.0).unwrap();
        assert!((v - PI.ln()).abs() < 1e-12);
        // Γ_2(1.5) = π^{1/2} Γ(1.5) Γ(1) = π/2
        let v = log_mvgamma(2, 1.5).unwrap();
        assert!((v - (0.5 * PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn domain_violation_rejected() {
        assert!(log_mvgamma(3, 1.0).is_err());
        assert!(log_mvgamma(1, 0.0).is_err());
    }
}
