//! Exact mean integrated squared error of kernel distribution estimators.
//!
//! `MISE(h) = IV(h) + ISB(h)` with
//!
//! ```text
//! IV(h)  = (πn)⁻¹ ∫₀^∞ t⁻² φ_k(th)² {1 − φ_f(t)²} dt
//! ISB(h) =  π⁻¹   ∫₀^∞ t⁻² {1 − φ_k(th)}² φ_f(t)² dt
//! ```
//!
//! for symmetric `k` and `f`. Every integral is split at the knots of `φ_k(·h)`
//! and `φ_f`, and truncated exactly where either spectrum vanishes.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;

use crate::distributions::{psi_f_space, TargetDistribution};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::numerics::{
    breakpoints, integrate_pieces, std_normal_cdf, QuadratureConfig, QuadratureResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MiseMethod {
    Fourier,
    ClosedFormNormalNormal,
    ClosedFormNormalSinc,
    SincFourier,
    LinearSegment,
    SpaceDomainOracle,
    MonteCarlo,
}

impl MiseMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fourier => "fourier",
            Self::ClosedFormNormalNormal => "closed_form_normal_normal",
            Self::ClosedFormNormalSinc => "closed_form_normal_sinc",
            Self::SincFourier => "sinc_fourier",
            Self::LinearSegment => "linear_segment",
            Self::SpaceDomainOracle => "space_domain_oracle",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for MiseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiseReport {
    pub h: f64,
    pub n: usize,
    pub iv: f64,
    pub isb: f64,
    pub mise: f64,
    pub method: MiseMethod,
    pub error_estimate: f64,
}

impl MiseReport {
    fn new(h: f64, n: usize, iv: f64, isb: f64, method: MiseMethod, error_estimate: f64) -> Self {
        Self {
            h,
            n,
            iv,
            isb,
            mise: iv + isb,
            method,
            error_estimate,
        }
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h.is_finite() && h >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("bandwidth must be finite and nonnegative, got {h}")))
    }
}

fn check_sample_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The Fourier representation needs a finite mean, and for the sinc kernel
/// additionally a square-integrable density.
pub(crate) fn check_pair(dist: &TargetDistribution, kernel: &Kernel) -> Result<()> {
    if !dist.abs_first_moment_finite() {
        return Err(Error::Precondition(format!("{dist} has no finite mean")));
    }
    if kernel.kind() == KernelKind::Sinc && !dist.square_integrable() {
        return Err(Error::Precondition(format!(
            "the sinc kernel needs a square-integrable density; {dist} is not"
        )));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be positive, got {sigma}")))
    }
}

/// Sorted panel ends on `[lower, upper]`, including every kernel and
/// distribution knot and the natural frequency scales in between.
fn frequency_breakpoints(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    lower: f64,
    upper: f64,
) -> Vec<f64> {
    let mut inner: Vec<f64> = dist.cf_knots();
    if h > 0.0 {
        inner.extend(kernel.ft_knots().iter().map(|k| k / h));
        if kernel.kind() == KernelKind::Normal {
            inner.push(1.0 / h);
        }
    }
    if let Some(s) = dist.normal_sigma() {
        inner.push(1.0 / s);
    }
    let mut pts = vec![lower];
    let mut interior: Vec<f64> = inner.into_iter().filter(|&p| p > lower && p < upper).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    pts.extend(interior);
    pts.push(upper);
    pts
}

/// `∫₀^∞ t⁻² φ_k(th)² {1 − φ_f(t)²} dt`.
fn variance_integral(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    let upper = if h > 0.0 {
        kernel.ft_support() / h
    } else {
        f64::INFINITY
    };
    let pts = frequency_breakpoints(dist, kernel, h, 0.0, upper);
    integrate_pieces(
        |t| {
            let phi = kernel.ft(t * h);
            if phi == 0.0 {
                0.0
            } else {
                phi * phi * dist.roughness_integrand(t)
            }
        },
        &pts,
        cfg,
    )
}

/// `∫₀^∞ t⁻² {1 − φ_k(th)}² φ_f(t)² dt`; nothing below `S_k/h` or above `D_f`.
fn bias_integral(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    let zero = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        subdivisions_used: 0,
        converged: true,
    };
    if h == 0.0 {
        return zero;
    }
    let lower = kernel.s_k() / h;
    let upper = dist.d_f();
    if lower >= upper {
        return zero;
    }
    let pts = frequency_breakpoints(dist, kernel, h, lower, upper);
    integrate_pieces(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            let gap = kernel.one_minus_ft(t * h);
            let phi = dist.cf(t);
            if gap == 0.0 || phi == 0.0 {
                0.0
            } else {
                let r = gap * phi / t;
                r * r
            }
        },
        &pts,
        cfg,
    )
}

pub fn iv_fourier(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_bandwidth(h)?;
    check_sample_size(n)?;
    check_pair(dist, kernel)?;
    let q = variance_integral(dist, kernel, h, cfg).require("iv_fourier")?;
    Ok(q / (PI * n as f64))
}

pub fn isb_fourier(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_bandwidth(h)?;
    check_pair(dist, kernel)?;
    let q = bias_integral(dist, kernel, h, cfg).require("isb_fourier")?;
    Ok(q / PI)
}

/// Both Fourier integrals, without any fast path.
pub fn mise_fourier(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<MiseReport> {
    check_bandwidth(h)?;
    check_sample_size(n)?;
    check_pair(dist, kernel)?;
    let v = variance_integral(dist, kernel, h, cfg);
    let b = bias_integral(dist, kernel, h, cfg);
    let iv = v.require("iv_fourier")? / (PI * n as f64);
    let isb = b.require("isb_fourier")? / PI;
    let err = v.error_estimate / (PI * n as f64) + b.error_estimate / PI;
    Ok(MiseReport::new(h, n, iv, isb, MiseMethod::Fourier, err))
}

/// Exact MISE, taking a closed form whenever one applies and the Fourier
/// integrals otherwise.
pub fn mise(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<MiseReport> {
    check_bandwidth(h)?;
    check_sample_size(n)?;
    check_pair(dist, kernel)?;
    let nf = n as f64;
    if h == 0.0 {
        return Ok(MiseReport::new(0.0, n, dist.psi_f() / nf, 0.0, MiseMethod::Fourier, 0.0));
    }
    if kernel.s_k() > 0.0 && h * dist.d_f() <= kernel.s_k() {
        let iv = (dist.psi_f() - kernel.psi() * h) / nf;
        return Ok(MiseReport::new(h, n, iv, 0.0, MiseMethod::LinearSegment, 0.0));
    }
    if let Some(sigma) = dist.normal_sigma() {
        match kernel.kind() {
            KernelKind::Normal => {
                let (iv, isb) = normal_normal_parts(sigma, h, nf);
                return Ok(MiseReport::new(h, n, iv, isb, MiseMethod::ClosedFormNormalNormal, 0.0));
            }
            KernelKind::Sinc => {
                let (iv, isb) = normal_sinc_parts(sigma, h, nf);
                return Ok(MiseReport::new(h, n, iv, isb, MiseMethod::ClosedFormNormalSinc, 0.0));
            }
            KernelKind::Trapezoidal => {}
        }
    }
    if kernel.kind() == KernelKind::Sinc {
        return mise_sinc_fourier(dist, h, n, cfg);
    }
    mise_fourier(dist, kernel, h, n, cfg)
}

/// Sinc-kernel MISE: `(nπ)⁻¹∫₀^{1/h} t⁻²{1 − φ_f²} + π⁻¹∫_{1/h}^∞ t⁻²φ_f²`.
/// `h = 0` gives the empirical distribution function.
pub fn mise_sinc_fourier(
    dist: &TargetDistribution,
    h: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<MiseReport> {
    let sinc = Kernel::sinc();
    check_bandwidth(h)?;
    check_sample_size(n)?;
    check_pair(dist, &sinc)?;
    if h == 0.0 {
        return mise(dist, &sinc, 0.0, n, cfg);
    }
    let nf = n as f64;
    let cut = 1.0 / h;
    let pts = frequency_breakpoints(dist, &sinc, h, 0.0, cut);
    let v = integrate_pieces(|t| dist.roughness_integrand(t), &pts, cfg);
    let iv = v.require("mise_sinc_fourier")? / (PI * nf);
    let (isb, b_err) = if cut >= dist.d_f() {
        (0.0, 0.0)
    } else {
        let pts = frequency_breakpoints(dist, &sinc, h, cut, dist.d_f());
        let b = integrate_pieces(
            |t| {
                let r = dist.cf(t) / t;
                r * r
            },
            &pts,
            cfg,
        );
        (b.require("mise_sinc_fourier")? / PI, b.error_estimate / PI)
    };
    let err = v.error_estimate / (PI * nf) + b_err;
    Ok(MiseReport::new(h, n, iv, isb, MiseMethod::SincFourier, err))
}

fn normal_normal_parts(sigma: f64, h: f64, n: f64) -> (f64, f64) {
    let r1 = h.hypot(sigma);
    let r2 = (2.0 * h * h + 4.0 * sigma * sigma).sqrt();
    let sqrt_pi = PI.sqrt();
    let iv = (r1 - h) / (n * sqrt_pi);
    let isb = (r2 - r1 - sigma) / sqrt_pi;
    (iv, isb)
}

/// `√π·MISE = n⁻¹{√(h²+σ²) − h} + {√(2h²+4σ²) − √(h²+σ²) − σ}` for a
/// `N(0, σ²)` target and the normal kernel.
pub fn mise_normal_normal_closed(sigma: f64, h: f64, n: usize) -> Result<f64> {
    check_sigma(sigma)?;
    check_bandwidth(h)?;
    check_sample_size(n)?;
    let (iv, isb) = normal_normal_parts(sigma, h, n as f64);
    Ok(iv + isb)
}

/// Closed-form split for a normal target and the sinc kernel:
/// `π·ISB = h e^{−σ²/h²} − 2σ√π Φ(−σ√2/h)` and
/// `IV = (σ/√π − h/π + ISB)/n`, which avoids the cancellation of the
/// combined expression for small `h`.
fn normal_sinc_parts(sigma: f64, h: f64, n: f64) -> (f64, f64) {
    let sqrt_pi = PI.sqrt();
    let ratio = sigma / h;
    let isb = (h * (-ratio * ratio).exp()
        - 2.0 * sigma * sqrt_pi * std_normal_cdf(-ratio * std::f64::consts::SQRT_2))
        / PI;
    let iv = (sigma / sqrt_pi - h / PI + isb) / n;
    (iv, isb)
}

/// `π·MISE = (1 + n⁻¹){h e^{−σ²/h²} + 2σ√π Φ(σ√2/h)} − n⁻¹h − (2 + n⁻¹)σ√π`.
pub fn mise_normal_sinc_closed(sigma: f64, h: f64, n: usize) -> Result<f64> {
    check_sigma(sigma)?;
    check_sample_size(n)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "the sinc closed form needs h > 0 (use h = 0 through mise), got {h}"
        )));
    }
    let (iv, isb) = normal_sinc_parts(sigma, h, n as f64);
    Ok(iv + isb)
}

/// Tolerances that suit the nested space-domain oracles; the default
/// configuration is needlessly tight for them. Results typically agree with
/// the Fourier side to about `1e-8`.
pub fn oracle_config() -> QuadratureConfig {
    QuadratureConfig::default().with_tolerances(1e-7, 1e-5)
}

/// Integrates an outer function whose evaluation runs inner quadratures,
/// reporting failure of any of them. Inner integrals use a purely relative
/// tolerance a hundred times tighter than the outer one.
fn nested(
    outer: impl Fn(f64, &QuadratureConfig, &Cell<bool>) -> f64,
    pts: &[f64],
    cfg: &QuadratureConfig,
    what: &'static str,
) -> Result<f64> {
    let inner_cfg = cfg.with_tolerances(cfg.abs_tol * 1e-2, cfg.rel_tol * 1e-2);
    let ok = Cell::new(true);
    let q = integrate_pieces(|x| outer(x, &inner_cfg, &ok), pts, cfg);
    let value = q.require(what)?;
    if ok.get() {
        Ok(value)
    } else {
        Err(Error::Quadrature {
            what,
            value,
            error: f64::NAN,
        })
    }
}

fn check_oracle_kernel(kernel: &Kernel) -> Result<()> {
    if kernel.integrable() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "space-domain oracles need an integrable kernel; {kernel} is not"
        )))
    }
}

/// A weight `w(u)` for [`weighted_mass`] with its limits as `u → ∓∞` and a
/// bound on `|w(u) − limit|` once `|u − x|` exceeds a given distance.
struct Weight<W, D> {
    w: W,
    limits: (f64, f64),
    deviation: D,
}

/// A weight built from `kernel` at bandwidth `h`; `squared` when `w` is the
/// square of a kernel term with limits in `{0, 1}`.
fn kernel_weight<W: Fn(f64) -> f64>(
    kernel: &Kernel,
    h: f64,
    w: W,
    limits: (f64, f64),
    squared: bool,
) -> Weight<W, impl Fn(f64) -> f64 + '_> {
    let deviation = move |d: f64| {
        let t = kernel.tail_bound(d / h);
        if squared {
            t * (t + 2.0)
        } else {
            t
        }
    };
    Weight {
        w,
        limits,
        deviation,
    }
}

/// `∫ f(u) w(u) du` over `[a, b]` (either end may be infinite), split where
/// `w` changes on the scale `h` around `x` and where `f` has its bulk.
///
/// An infinite end is cut at the first doubling `U` where the remaining mass
/// times the weight's deviation from its limit drops below a hundredth of the
/// absolute tolerance; the rest counts as limit × mass. Without the cut the
/// oscillating density tails cost hundreds of panels per call.
#[allow(clippy::too_many_arguments)]
fn weighted_mass<W: Fn(f64) -> f64, D: Fn(f64) -> f64>(
    dist: &TargetDistribution,
    weight: &Weight<W, D>,
    a: f64,
    b: f64,
    x: f64,
    h: f64,
    cfg: &QuadratureConfig,
    ok: &Cell<bool>,
) -> f64 {
    let s = dist.spread();
    let negligible = 1e-2 * cfg.abs_tol;
    let cutoff = |mass: &dyn Fn(f64) -> f64| {
        let mut u = (32.0 * s).max(x.abs() + 10.0 * h);
        for _ in 0..64 {
            if mass(u) * (weight.deviation)(u - x.abs()) <= negligible {
                break;
            }
            u *= 2.0;
        }
        u
    };
    let (mut lo, mut hi, mut tails) = (a, b, 0.0);
    if a == f64::NEG_INFINITY {
        lo = -cutoff(&|u| dist.cdf(-u));
        tails += weight.limits.0 * dist.cdf(lo);
    }
    if b == f64::INFINITY {
        hi = cutoff(&|u| dist.sf(u));
        tails += weight.limits.1 * dist.sf(hi);
    }
    let pts = breakpoints(
        lo,
        hi,
        [x - 5.0 * h, x, x + 5.0 * h, -32.0 * s, -8.0 * s, -s, 0.0, s, 8.0 * s, 32.0 * s],
    );
    let q = integrate_pieces(|u| dist.density(u) * (weight.w)(u), &pts, cfg);
    if !q.converged {
        ok.set(false);
    }
    q.value + tails
}

/// ISB by direct space-domain quadrature, a cross-check for the Fourier path.
///
/// Integrating by parts in the kernel variable turns the bias at `x` into
/// `∫_x^∞ f(u)K((x−u)/h) du − ∫_{−∞}^x f(u){1 − K((x−u)/h)} du`, so the
/// triple integral over `dK(y)dK(z)dx` becomes an outer integral of a
/// squared difference of two single integrals.
pub fn isb_space_oracle(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_bandwidth(h)?;
    check_oracle_kernel(kernel)?;
    if h == 0.0 {
        return Ok(0.0);
    }
    let bias = |x: f64, inner: &QuadratureConfig, ok: &Cell<bool>| {
        let k = kernel_weight(kernel, h, |u| kernel.integrated((x - u) / h), (0.0, 0.0), false);
        let above = weighted_mass(dist, &k, x, f64::INFINITY, x, h, inner, ok);
        let s = kernel_weight(kernel, h, |u| kernel.survival((x - u) / h), (0.0, 0.0), false);
        let below = weighted_mass(dist, &s, f64::NEG_INFINITY, x, x, h, inner, ok);
        let b = above - below;
        b * b
    };
    let s = dist.spread();
    let pts = [f64::NEG_INFINITY, -s, 0.0, s, f64::INFINITY];
    nested(bias, &pts, cfg, "isb_space_oracle")
}

/// IV by direct space-domain quadrature: `n⁻¹∫Var K((x−X)/h) dx`, where
/// `E K²` replaces the `max(y, z)` term of the triple-integral form. Right of
/// the origin the variance is taken of `1 − K` to keep it free of
/// cancellation.
pub fn iv_space_oracle(
    dist: &TargetDistribution,
    kernel: &Kernel,
    h: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_bandwidth(h)?;
    check_sample_size(n)?;
    check_oracle_kernel(kernel)?;
    if h == 0.0 {
        return Ok(psi_f_space(dist, cfg)? / n as f64);
    }
    let variance = |x: f64, inner: &QuadratureConfig, ok: &Cell<bool>| {
        let w = |u: f64| {
            let y = (x - u) / h;
            if x >= 0.0 {
                kernel.survival(y)
            } else {
                kernel.integrated(y)
            }
        };
        let limits = if x >= 0.0 { (0.0, 1.0) } else { (1.0, 0.0) };
        let (lo, hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let plain = kernel_weight(kernel, h, &w, limits, false);
        let m1 = weighted_mass(dist, &plain, lo, x, x, h, inner, ok)
            + weighted_mass(dist, &plain, x, hi, x, h, inner, ok);
        let squared = kernel_weight(kernel, h, |u: f64| w(u).powi(2), limits, true);
        let m2 = weighted_mass(dist, &squared, lo, x, x, h, inner, ok)
            + weighted_mass(dist, &squared, x, hi, x, h, inner, ok);
        (m2 - m1 * m1).max(0.0)
    };
    let s = dist.spread();
    let pts = [f64::NEG_INFINITY, -s, 0.0, s, f64::INFINITY];
    Ok(nested(variance, &pts, cfg, "iv_space_oracle")? / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_jdlvp, make_normal, rescale};
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn pairs() -> Vec<(TargetDistribution, Kernel)> {
        let mut v = Vec::new();
        for d in [make_jdlvp(), make_normal(1.0).unwrap()] {
            for k in Kernel::catalog() {
                v.push((d, k));
            }
        }
        v
    }

    #[test]
    fn zero_bandwidth_is_the_empirical_distribution_function() {
        for (d, k) in pairs() {
            let r = mise(&d, &k, 0.0, 37, &cfg()).unwrap();
            assert_eq!(r.isb, 0.0);
            assert_eq!(r.mise, d.psi_f() / 37.0);
            let iv = iv_fourier(&d, &k, 0.0, 37, &cfg()).unwrap();
            assert!((iv - d.psi_f() / 37.0).abs() < 1e-12 * d.psi_f());
            assert_eq!(isb_fourier(&d, &k, 0.0, &cfg()).unwrap(), 0.0);
        }
    }

    #[test]
    fn jdlvp_linear_segment() {
        let d = make_jdlvp();
        let k = Kernel::trapezoidal();
        for &h in &[0.05, 0.2, 0.25] {
            for &n in &[1usize, 10, 1000] {
                let iv = iv_fourier(&d, &k, h, n, &cfg()).unwrap();
                let want = (d.psi_f() - k.psi() * h) / n as f64;
                assert!((iv - want).abs() < 1e-12 * want, "h={h} n={n}");
                assert_eq!(isb_fourier(&d, &k, h, &cfg()).unwrap(), 0.0);
            }
        }
        let r = mise(&d, &k, 0.3, 1000, &cfg()).unwrap();
        assert_eq!(r.method, MiseMethod::LinearSegment);
        assert!((r.mise - (0.936_711_563_593_944 - 0.245_922_6 * 0.3) / 1000.0).abs() < 1e-10);
        let f = mise_fourier(&d, &k, 0.3, 1000, &cfg()).unwrap();
        assert!((r.mise - f.mise).abs() < 1e-12);
        assert_eq!(f.isb, 0.0);
        assert!(isb_fourier(&d, &k, 0.51, &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn sinc_bias_switches_on_at_half() {
        let d = make_jdlvp();
        let k = Kernel::sinc();
        assert_eq!(isb_fourier(&d, &k, 0.5, &cfg()).unwrap(), 0.0);
        assert!(isb_fourier(&d, &k, 0.51, &cfg()).unwrap() > 0.0);
        let r = mise_sinc_fourier(&d, 0.4, 20, &cfg()).unwrap();
        assert_eq!(r.isb, 0.0);
        assert!((r.mise - (d.psi_f() - 0.4 / PI) / 20.0).abs() < 1e-13);
    }

    #[test]
    fn normal_normal_closed_form_agrees_with_fourier() {
        let d = make_normal(1.0).unwrap();
        let k = Kernel::normal();
        for &(h, n) in &[(0.2, 50usize), (0.3, 100), (0.5, 100), (1.7, 3)] {
            let f = mise_fourier(&d, &k, h, n, &cfg()).unwrap();
            let c = mise_normal_normal_closed(1.0, h, n).unwrap();
            assert!((f.mise - c).abs() < 1e-9, "h={h}: {} vs {c}", f.mise);
            let (iv, isb) = normal_normal_parts(1.0, h, n as f64);
            assert!((f.iv - iv).abs() < 1e-9);
            assert!((f.isb - isb).abs() < 1e-9);
        }
        assert!((mise_normal_normal_closed(1.0, 0.0, 10).unwrap() - 1.0 / (10.0 * PI.sqrt())).abs() < 1e-15);
        assert!((mise_normal_normal_closed(2.0, 0.0, 10).unwrap() - 2.0 / (10.0 * PI.sqrt())).abs() < 1e-15);
        assert!(mise_normal_normal_closed(0.0, 0.1, 10).is_err());
    }

    #[test]
    fn iv_coefficient_from_two_sample_sizes() {
        let d = make_normal(1.0).unwrap();
        let k = Kernel::normal();
        let (a, b) = (
            mise_normal_normal_closed(1.0, 0.5, 100).unwrap(),
            mise_normal_normal_closed(1.0, 0.5, 200).unwrap(),
        );
        // MISE_n = c/n + ISB, so c/100 = 2(a − b).
        let iv = 2.0 * (a - b);
        let isb = a - iv;
        assert!((iv_fourier(&d, &k, 0.5, 100, &cfg()).unwrap() - iv).abs() < 1e-9);
        assert!((isb_fourier(&d, &k, 0.5, &cfg()).unwrap() - isb).abs() < 1e-9);
    }

    fn normal_sinc_display(sigma: f64, h: f64, n: f64) -> f64 {
        let sp = PI.sqrt();
        ((1.0 + 1.0 / n)
            * (h * (-sigma * sigma / (h * h)).exp()
                + 2.0 * sigma * sp * std_normal_cdf(sigma * 2f64.sqrt() / h))
            - h / n
            - (2.0 + 1.0 / n) * sigma * sp)
            / PI
    }

    #[test]
    fn normal_sinc_closed_form() {
        for &(sigma, h, n) in &[(1.0, 0.4, 100usize), (1.0, 0.5, 100), (2.0, 1.3, 7), (0.5, 3.0, 1)] {
            let c = mise_normal_sinc_closed(sigma, h, n).unwrap();
            assert!((c - normal_sinc_display(sigma, h, n as f64)).abs() < 1e-13);
            let f = mise_sinc_fourier(&make_normal(sigma).unwrap(), h, n, &cfg()).unwrap();
            assert!((c - f.mise).abs() < 1e-9, "σ={sigma} h={h}: {c} vs {}", f.mise);
        }
        let limit = mise_normal_sinc_closed(1.0, 1e-3, 100).unwrap();
        assert!((limit - 1.0 / (100.0 * PI.sqrt())).abs() < 1e-5);
        assert!(mise_normal_sinc_closed(1.0, 0.0, 100).is_err());
    }

    #[test]
    fn normal_sinc_critical_point() {
        let h = 1.0 / (101f64).ln().sqrt();
        let e = 1e-5;
        let d = (mise_normal_sinc_closed(1.0, h + e, 100).unwrap()
            - mise_normal_sinc_closed(1.0, h - e, 100).unwrap())
            / (2.0 * e);
        assert!(d.abs() < 1e-9, "{d}");
    }

    #[test]
    fn fast_paths_agree_with_fourier() {
        for (d, k) in pairs() {
            for i in 0..=40 {
                let h = 0.05 * i as f64;
                let fast = mise(&d, &k, h, 25, &cfg()).unwrap();
                let slow = mise_fourier(&d, &k, h, 25, &cfg()).unwrap();
                assert!((fast.mise - slow.mise).abs() < 1e-9, "{d} {k} h={h}: {fast:?} vs {slow:?}");
                assert!((fast.mise - fast.iv - fast.isb).abs() < 1e-12);
                assert!(fast.iv >= 0.0 && fast.isb >= 0.0);
            }
        }
    }

    #[test]
    fn affine_on_the_zero_bias_segment() {
        let d = make_jdlvp();
        for k in [Kernel::trapezoidal(), Kernel::sinc()] {
            let m = |h: f64| mise_fourier(&d, &k, h, 40, &cfg()).unwrap().mise;
            let (a, b, c) = (m(0.1), m(0.3), m(0.5));
            let slope = (c - a) / 0.4;
            assert!(((b - a) / 0.2 - slope).abs() < 1e-10 * slope.abs());
            assert!((slope + k.psi() / 40.0).abs() < 1e-10 * slope.abs());
        }
    }

    #[test]
    fn bias_does_not_depend_on_n() {
        for (d, k) in pairs() {
            let a = mise_fourier(&d, &k, 0.8, 10, &cfg()).unwrap().isb;
            let b = mise_fourier(&d, &k, 0.8, 10_000, &cfg()).unwrap().isb;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mise_tends_to_bias() {
        for (d, k) in pairs() {
            let isb = isb_fourier(&d, &k, 0.9, &cfg()).unwrap();
            let scaled: Vec<f64> = [10usize, 1000, 100_000]
                .iter()
                .map(|&n| (mise(&d, &k, 0.9, n, &cfg()).unwrap().mise - isb) * n as f64)
                .collect();
            assert!(scaled.iter().all(|s| (s - scaled[0]).abs() < 1e-8), "{scaled:?}");
        }
    }

    #[test]
    fn space_oracles_agree_with_fourier_side() {
        let oc = oracle_config();
        let n1 = make_normal(1.0).unwrap();
        let j = make_jdlvp();
        let nk = Kernel::normal();
        let tk = Kernel::trapezoidal();

        assert_eq!(isb_space_oracle(&n1, &nk, 0.0, &oc).unwrap(), 0.0);
        let isb = isb_space_oracle(&n1, &nk, 0.5, &oc).unwrap();
        assert!((isb - isb_fourier(&n1, &nk, 0.5, &cfg()).unwrap()).abs() < 1e-7);
        assert!(isb_space_oracle(&j, &tk, 0.25, &oc).unwrap().abs() < 1e-7);

        let iv = iv_space_oracle(&n1, &nk, 0.5, 10, &oc).unwrap();
        assert!((iv - iv_fourier(&n1, &nk, 0.5, 10, &cfg()).unwrap()).abs() < 1e-6);
        let iv = iv_space_oracle(&j, &tk, 0.2, 10, &oc).unwrap();
        assert!((iv - (j.psi_f() - tk.psi() * 0.2) / 10.0).abs() < 1e-6);
        let iv0 = iv_space_oracle(&j, &tk, 0.0, 1, &oc).unwrap();
        assert!((iv0 - j.psi_f()).abs() < 1e-3 * j.psi_f());

        let sinc = Kernel::sinc();
        assert!(matches!(isb_space_oracle(&j, &sinc, 0.3, &oc), Err(Error::Unsupported(_))));
    }

    #[test]
    fn space_oracles_resolve_bias_off_the_segment() {
        let oc = oracle_config();
        let j = make_jdlvp();
        let tk = Kernel::trapezoidal();
        let space = isb_space_oracle(&j, &tk, 1.2, &oc).unwrap();
        let fourier = isb_fourier(&j, &tk, 1.2, &cfg()).unwrap();
        assert!((space - fourier).abs() < 1e-7, "{space} vs {fourier}");
        let space = iv_space_oracle(&j, &tk, 1.2, 5, &oc).unwrap();
        let fourier = iv_fourier(&j, &tk, 1.2, 5, &cfg()).unwrap();
        assert!((space - fourier).abs() < 1e-6, "{space} vs {fourier}");
    }

    #[test]
    fn rejects_bad_input() {
        let d = make_jdlvp();
        let k = Kernel::normal();
        assert!(matches!(mise(&d, &k, -0.1, 10, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(mise(&d, &k, f64::NAN, 10, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(mise(&d, &k, 0.1, 0, &cfg()), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mise_is_a_nonnegative_sum(h in 0.0f64..3.0, n in 1usize..5000, a in 0.3f64..3.0, which in 0usize..6) {
            let (d, k) = pairs()[which];
            let d = rescale(&d, a).unwrap();
            let r = mise(&d, &k, h, n, &cfg()).unwrap();
            prop_assert!(r.iv >= 0.0 && r.isb >= 0.0);
            prop_assert!((r.mise - r.iv - r.isb).abs() <= 1e-12 * r.mise.max(1e-300));
            let slow = mise_fourier(&d, &k, h, n, &cfg()).unwrap();
            prop_assert!((r.mise - slow.mise).abs() < 1e-9 * a.max(1.0));
        }
    }
}
