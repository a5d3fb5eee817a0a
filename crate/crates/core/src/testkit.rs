//! Test-support oracles: quadrature, set-partition enumeration, exact urn
//! partition probabilities, and brute-force marginal likelihoods for tiny
//! datasets. Everything here is written independently of the estimator
//! code paths it validates; only elementary special functions are shared.
//!
//! Compiled only when the `testkit` feature is enabled (test targets).

use statrs::function::gamma::ln_gamma;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre polynomial and derivative at x.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// ∫_a^b f by fixed-order Gauss–Legendre.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Nested 2-D Gauss–Legendre on a rectangle.
pub fn integrate2d<F: Fn(f64, f64) -> f64>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    order: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let (mx, hx) = (0.5 * (ax + bx), 0.5 * (bx - ax));
    let (my, hy) = (0.5 * (ay + by), 0.5 * (by - ay));
    let mut total = 0.0;
    for (xi, wi) in nodes.iter().zip(&weights) {
        let x = mx + hx * xi;
        let mut inner = 0.0;
        for (yj, wj) in nodes.iter().zip(&weights) {
            inner += wj * f(x, my + hy * yj);
        }
        total += wi * inner;
    }
    total * hx * hy
}

/// All set partitions of {0,…,n−1} as restricted-growth label vectors.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn recurse(labels: &mut Vec<usize>, max_used: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for label in 0..=max_used + 1 {
            labels.push(label);
            recurse(labels, max_used.max(label), n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut labels = vec![0usize];
    recurse(&mut labels, 0, n, &mut out);
    out
}

/// Cluster sizes of a label vector, in first-appearance order.
pub fn partition_counts(labels: &[usize]) -> Vec<usize> {
    let clusters = labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; clusters];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Exact log probability of a partition under the urn with precision α:
/// α^L ∏_ℓ (K_ℓ−1)! / ∏_{i=0}^{n−1} (α+i).
pub fn crp_log_prob(counts: &[usize], alpha: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let mut lp = counts.len() as f64 * alpha.ln();
    for &k in counts {
        lp += ln_gamma(k as f64);
    }
    for i in 0..n {
        lp -= (alpha + i as f64).ln();
    }
    lp
}

/// Chi-square quantile by the Wilson–Hilferty approximation; adequate for
/// the large-df goodness-of-fit gates used in the tests.
pub fn chi_square_quantile(df: f64, prob: f64) -> f64 {
    let z = standard_normal_quantile(prob);
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Beasley–Springer–Moro style rational approximation of Φ⁻¹.
pub fn standard_normal_quantile(prob: f64) -> f64 {
    assert!(prob > 0.0 && prob < 1.0);
    statrs::function::erf::erf_inv(2.0 * prob - 1.0) * std::f64::consts::SQRT_2
}

/// Two-sided KS critical value at significance `sig` for n samples.
pub fn ks_critical(n: usize, sig: f64) -> f64 {
    (-(sig / 2.0).ln() / (2.0 * n as f64)).sqrt()
}

/// KS distance of sorted samples against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log of the U-collapsed joint density of one univariate cluster's
/// standardized members: N_K(z | 0, vI + (1−v)11ᵀ), given the member
/// count, mean and sum of squared deviations of z.
fn cluster_loglik_given_v(k: f64, zbar: f64, ssr: f64, v: f64) -> f64 {
    let denom = v + k * (1.0 - v);
    -0.5 * k * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * (denom.ln() + (k - 1.0) * v.ln())
        - 0.5 * (k * zbar * zbar / denom + ssr / v)
}

/// Brute-force log marginal of univariate data under the mixture
/// alternative: exhaustive sum over set partitions, a 1-D quadrature over
/// each cluster's volume fraction, and a 2-D quadrature against the Λ⁻¹
/// prior in the scale-free chart (w = (μ − x̄)/Λ, t = log Λ), where
///
///   log marginal = log ∬ [Σ_part CRP ∏_ℓ mass_ℓ(z)] e^{−(n−1)t} dw dt,
///
/// with z_i = (x_i − x̄)/Λ − w. That chart keeps the integrand O(1)-scaled
/// at every Λ, so fixed-order panels converge for n down to the minimal
/// sample.
pub fn h1_log_marginal_exhaustive(xs: &[f64], alpha: f64, order: usize) -> f64 {
    let n = xs.len();
    assert!((2..=8).contains(&n), "exhaustive oracle is for tiny n");
    let omega1 = 1.0 + alpha.powf(-1.0);
    let omega2 = 1.0 + alpha.powf(1.0);
    let log_beta_const = ln_gamma(omega1 + omega2) - ln_gamma(omega1) - ln_gamma(omega2);

    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64).sqrt();

    let partitions = set_partitions(n);
    let (v_nodes, v_weights) = gauss_legendre(order.max(96));

    let joint = |w: f64, t: f64| -> f64 {
        let lam = t.exp();
        let mut total = f64::NEG_INFINITY;
        for labels in &partitions {
            let counts = partition_counts(labels);
            let mut lp = crp_log_prob(&counts, alpha);
            for (cluster_idx, &k) in counts.iter().enumerate() {
                let members: Vec<f64> = labels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == cluster_idx)
                    .map(|(i, _)| (xs[i] - mean) / lam - w)
                    .collect();
                let kf = k as f64;
                let zbar = members.iter().sum::<f64>() / kf;
                let ssr = members.iter().map(|z| (z - zbar) * (z - zbar)).sum::<f64>();
                // mass_ℓ = ∫ Be(v) N_K(z | 0, vI + (1−v)11ᵀ) dv on (0,1).
                let mut mass = 0.0;
                for (&node, &wq) in v_nodes.iter().zip(&v_weights) {
                    let v = 0.5 * (node + 1.0);
                    let log_be = log_beta_const
                        + (omega1 - 1.0) * v.ln()
                        + (omega2 - 1.0) * (1.0 - v).ln();
                    mass += 0.5 * wq * (log_be + cluster_loglik_given_v(kf, zbar, ssr, v)).exp();
                }
                lp += if mass > 0.0 { mass.ln() } else { f64::NEG_INFINITY };
            }
            total = log_add_exp(total, lp);
        }
        (total - (n as f64 - 1.0) * t).exp()
    };

    let t_mid = (8.0 * sd).ln();
    let t_hi = t_mid + 40.0 / (n as f64 - 1.0);
    let core = integrate2d(&joint, -14.0, 14.0, (0.03 * sd).ln(), t_mid, order);
    let tail = integrate2d(&joint, -14.0, 14.0, t_mid, t_hi, order);
    (core + tail).ln()
}

/// Quadrature version of the univariate null log marginal
/// ∫∫ ∏ N(x_i | μ, Λ²) Λ⁻¹ dμ dΛ, in the same scale-free chart.
pub fn null_log_marginal_quad(xs: &[f64], order: usize) -> f64 {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf).sqrt();
    let joint = |w: f64, t: f64| -> f64 {
        let lam = t.exp();
        let mut lp = 0.0;
        for &x in xs {
            let z = (x - mean) / lam - w;
            lp += -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z;
        }
        (lp - (nf - 1.0) * t).exp()
    };
    let t_mid = (8.0 * sd).ln();
    let t_hi = t_mid + 40.0 / (nf - 1.0);
    let core = integrate2d(&joint, -14.0, 14.0, (0.03 * sd).ln(), t_mid, order);
    let tail = integrate2d(&joint, -14.0, 14.0, t_mid, t_hi, order);
    (core + tail).ln()
}
