//! Kernel distribution function estimators on data, their integrated squared
//! error, and a seeded Monte Carlo estimate of the MISE.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::distributions::TargetDistribution;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::numerics::{breakpoints, integrate, integrate_pieces, QuadratureConfig};

/// A sorted, nonempty sample together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    pub seed: u64,
    pub source: String,
}

impl Sample {
    pub fn new(mut values: Vec<f64>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("a sample needs at least one value".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample values must be finite, got {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            seed,
            source: source.into(),
        })
    }

    pub fn draw(dist: &TargetDistribution, n: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            values: dist.sample(n, seed)?,
            seed,
            source: dist.name(),
        })
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

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `F_n(x) = #{X_j ≤ x}/n`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }
}

/// `F_nh(x) = n⁻¹ Σ K((x − X_j)/h)`; the empirical distribution function at
/// `h = 0`. Sinc estimates are returned as computed, even outside `[0, 1]`.
pub fn estimate_cdf(sample: &Sample, kernel: &Kernel, h: f64, x: f64) -> Result<f64> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "bandwidth must be finite and nonnegative, got {h}"
        )));
    }
    Ok(evaluate(sample, kernel, h, x))
}

fn evaluate(sample: &Sample, kernel: &Kernel, h: f64, x: f64) -> f64 {
    if h == 0.0 {
        return sample.ecdf(x);
    }
    let s: f64 = sample.values.iter().map(|&v| kernel.integrated((x - v) / h)).sum();
    s / sample.len() as f64
}

/// Frequency beyond which the normal kernel's transform `e^{−(th)²/2}` is
/// below `1e-17` and drops out of the ISE integrand.
const NORMAL_FT_CUTOFF: f64 = 9.0;

/// `∫(F_nh − F)²` over the real line.
///
/// For `h > 0` this is evaluated on the frequency side as
/// `π⁻¹∫₀^∞ |φ_n(t)φ_k(th) − φ_f(t)|²/t² dt`, with `φ_n` the empirical
/// characteristic function, which costs `n` sines per node instead of `n`
/// kernel evaluations per point of a long oscillating space integrand. The
/// target must be symmetric so that `φ_f` is real, which holds for both
/// families. At `h = 0` the space side is integrated between order
/// statistics.
pub fn ise(
    sample: &Sample,
    kernel: &Kernel,
    h: f64,
    dist: &TargetDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "bandwidth must be finite and nonnegative, got {h}"
        )));
    }
    if h == 0.0 {
        return ise_empirical(sample, dist, cfg);
    }
    let v = &sample.values;
    let n = v.len() as f64;
    // Re and Im of φ_nφ_k − φ_f, over t, with 1 − cos written as 2sin² to
    // keep the small-t end free of cancellation.
    let integrand = |t: f64| {
        let phi_k = kernel.ft(t * h);
        let (mut half_sq, mut sines) = (0.0, 0.0);
        for &x in v {
            let (sh, ch) = (0.5 * t * x).sin_cos();
            half_sq += sh * sh;
            sines += sh * ch;
        }
        let re = (dist.one_minus_cf(t) - kernel.one_minus_ft(t * h) - 2.0 * half_sq / n * phi_k) / t;
        let im = 2.0 * sines / n * phi_k / t;
        re * re + im * im
    };
    let support = match kernel.kind() {
        KernelKind::Normal => NORMAL_FT_CUTOFF,
        _ => kernel.ft_support(),
    } / h;
    let knots = kernel
        .ft_knots()
        .iter()
        .map(|k| k / h)
        .chain(dist.cf_knots())
        .chain([1.0 / h, 1.0 / dist.spread()]);
    let pts = breakpoints(0.0, support, knots);
    let core = integrate_pieces(integrand, &pts, cfg).require("ise")?;
    let pure = |t: f64| (dist.cf(t) / t).powi(2);
    let tail_pts = breakpoints(support, f64::INFINITY, dist.cf_knots());
    let tail = integrate_pieces(pure, &tail_pts, cfg).require("ise")?;
    Ok((core + tail) / PI)
}

/// `∫(F_n − F)²` panel by panel between order statistics.
fn ise_empirical(sample: &Sample, dist: &TargetDistribution, cfg: &QuadratureConfig) -> Result<f64> {
    let v = &sample.values;
    let n = v.len() as f64;
    let mut total = integrate(|x| dist.cdf(x).powi(2), f64::NEG_INFINITY, v[0], cfg).require("ise")?;
    for i in 1..v.len() {
        let (a, b) = (v[i - 1], v[i]);
        if b > a {
            let level = i as f64 / n;
            let q = integrate(|x| (level - dist.cdf(x)).powi(2), a, b, cfg).require("ise")?;
            total += q;
        }
    }
    total += integrate(|x| dist.sf(x).powi(2), v[v.len() - 1], f64::INFINITY, cfg).require("ise")?;
    Ok(total)
}

/// Seed of replication `index`: SplitMix64 applied to the master seed and a
/// counter, so replications are independent of scheduling.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloMise {
    pub estimate: f64,
    pub std_error: f64,
    pub replications: usize,
    pub h: f64,
    pub n: usize,
}

impl MonteCarloMise {
    /// `(estimate − exact)/std_error`.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.estimate - exact) / self.std_error
    }
}

/// Mean and standard error of the ISE over independent samples of size `n`.
pub fn monte_carlo_mise(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    n: usize,
    replications: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<MonteCarloMise> {
    if replications < 2 {
        return Err(Error::Precondition(format!(
            "Monte Carlo needs at least 2 replications, got {replications}"
        )));
    }
    let values: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|i| {
            let sample = Sample::draw(dist, n, replication_seed(seed, i))?;
            ise(&sample, kernel, h, dist, cfg)
        })
        .collect::<Result<_>>()?;
    let r = replications as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(MonteCarloMise {
        estimate: mean,
        std_error: (var / r).sqrt(),
        replications,
        h,
        n,
    })
}
