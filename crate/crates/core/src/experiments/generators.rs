//! Synthetic data generators for the simulation studies.

use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::substream;

/// Data-generating distributions exposed to the CLI and the studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Generator {
    /// iid standard normal coordinates.
    Normal,
    /// p-variate Student-t with 3 degrees of freedom (shared mixing
    /// variable; heavy elliptical tails).
    T3,
    /// Skew-normal with shape 10, location 0, scale 1 (univariate only).
    SkewNormal,
    /// iid Uniform(−1, 1) coordinates.
    Uniform,
    /// Clayton(θ=2) copula with standard normal marginals (bivariate only):
    /// normal margins, non-elliptical dependence.
    CopulaDemo,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Normal => "normal",
            Generator::T3 => "t3",
            Generator::SkewNormal => "skewnormal",
            Generator::Uniform => "uniform",
            Generator::CopulaDemo => "copula-demo",
        }
    }

    pub fn sample(&self, n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
        if n == 0 || p == 0 {
            return Err(Error::Precondition("need n >= 1 and p >= 1".into()));
        }
        let mut rng = substream(seed, &[0x67656e, p as u64, n as u64]);
        let m = match self {
            Generator::Normal => {
                DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
            }
            Generator::T3 => {
                let chi2: Gamma<f64> = Gamma::new(1.5, 2.0).expect("chi-square(3)");
                let mut m = DMatrix::zeros(n, p);
                for i in 0..n {
                    let s = (chi2.sample(&mut rng) / 3.0).sqrt();
                    for j in 0..p {
                        m[(i, j)] = rng.sample::<f64, _>(StandardNormal) / s;
                    }
                }
                m
            }
            Generator::SkewNormal => {
                if p != 1 {
                    return Err(Error::Precondition(
                        "skewnormal generator is univariate".into(),
                    ));
                }
                let shape = 10.0f64;
                let delta = shape / (1.0 + shape * shape).sqrt();
                let tail = (1.0 - delta * delta).sqrt();
                DMatrix::from_fn(n, 1, |_, _| {
                    let u0: f64 = rng.sample(StandardNormal);
                    let u1: f64 = rng.sample(StandardNormal);
                    delta * u0.abs() + tail * u1
                })
            }
            Generator::Uniform => DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0)),
            Generator::CopulaDemo => {
                if p != 2 {
                    return Err(Error::Precondition(
                        "copula-demo generator is bivariate".into(),
                    ));
                }
                let theta = 2.0f64;
                let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
                let mut m = DMatrix::zeros(n, 2);
                for i in 0..n {
                    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                    let w: f64 = rng.gen_range(f64::EPSILON..1.0);
                    // Conditional inverse of the Clayton copula.
                    let u2 = ((w.powf(-theta / (1.0 + theta)) - 1.0) * u1.powf(-theta) + 1.0)
                        .powf(-1.0 / theta);
                    m[(i, 0)] = std_normal.inverse_cdf(u1);
                    m[(i, 1)] = std_normal.inverse_cdf(u2.clamp(f64::EPSILON, 1.0 - f64::EPSILON));
                }
                m
            }
        };
        DataMatrix::new(m)
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Generator::Normal),
            "t3" => Ok(Generator::T3),
            "skewnormal" => Ok(Generator::SkewNormal),
            "uniform" => Ok(Generator::Uniform),
            "copula-demo" => Ok(Generator::CopulaDemo),
            other => Err(Error::Precondition(format!(
                "unknown generator '{other}' (expected normal|t3|skewnormal|uniform|copula-demo)"
            ))),
        }
    }
}
