//! Target distributions: the Jackson–de la Vallée Poussin (JdlVP) law and
//! centred normals, each with an optional scale `a` (`f_a(x) = f(x/a)/a`).

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{
    breakpoints, integrate, integrate_pieces, si, std_normal_cdf, std_normal_pdf, QuadratureConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Density `(3/(4π))(sin(x/2)/(x/2))⁴`, characteristic function supported on `[−2, 2]`.
    Jdlvp,
    Normal { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetDistribution {
    family: Family,
    scale: f64,
}

pub const DISTRIBUTION_NAMES: &str = "jdlvp, normal:sigma=<v> (optionally followed by ,scale=<a>)";

const JDLVP_PEAK: f64 = 3.0 / (4.0 * PI);

pub fn make_jdlvp() -> TargetDistribution {
    TargetDistribution {
        family: Family::Jdlvp,
        scale: 1.0,
    }
}

pub fn make_normal(sigma: f64) -> Result<TargetDistribution> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("normal sigma must be positive, got {sigma}")));
    }
    Ok(TargetDistribution {
        family: Family::Normal { sigma },
        scale: 1.0,
    })
}

pub fn rescale(dist: &TargetDistribution, a: f64) -> Result<TargetDistribution> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {a}")));
    }
    Ok(TargetDistribution {
        family: dist.family,
        scale: dist.scale * a,
    })
}

impl TargetDistribution {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> String {
        let base = match self.family {
            Family::Jdlvp => "jdlvp".to_string(),
            Family::Normal { sigma } => format!("normal:sigma={sigma}"),
        };
        if self.scale == 1.0 {
            base
        } else {
            let sep = if matches!(self.family, Family::Jdlvp) { ':' } else { ',' };
            format!("{base}{sep}scale={}", self.scale)
        }
    }

    /// Standard deviation when the law is normal, after scaling.
    pub fn normal_sigma(&self) -> Option<f64> {
        match self.family {
            Family::Normal { sigma } => Some(sigma * self.scale),
            Family::Jdlvp => None,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let a = self.scale;
        base_density(self.family, x / a) / a
    }

    pub fn cdf(&self, x: f64) -> f64 {
        base_cdf(self.family, x / self.scale)
    }

    /// `1 − F(x)`, accurate in the right tail.
    pub fn sf(&self, x: f64) -> f64 {
        base_cdf(self.family, -x / self.scale)
    }

    /// `φ_f(t)`.
    pub fn cf(&self, t: f64) -> f64 {
        let u = (t * self.scale).abs();
        match self.family {
            Family::Jdlvp => {
                if u <= 1.0 {
                    1.0 - 1.5 * u * u + 0.75 * u * u * u
                } else if u <= 2.0 {
                    let r = 2.0 - u;
                    0.25 * r * r * r
                } else {
                    0.0
                }
            }
            Family::Normal { sigma } => (-0.5 * sigma * sigma * u * u).exp(),
        }
    }

    /// `1 − φ_f(t)` without cancellation near the origin.
    pub fn one_minus_cf(&self, t: f64) -> f64 {
        let u = (t * self.scale).abs();
        match self.family {
            Family::Jdlvp if u <= 1.0 => u * u * (1.5 - 0.75 * u),
            Family::Jdlvp => 1.0 - self.cf(t),
            Family::Normal { sigma } => -(-0.5 * sigma * sigma * u * u).exp_m1(),
        }
    }

    /// `(1 − |φ_f(t)|²)/t²`, continuous at `t = 0`.
    pub(crate) fn roughness_integrand(&self, t: f64) -> f64 {
        let a = self.scale;
        if t == 0.0 {
            return match self.family {
                Family::Jdlvp => 3.0 * a * a,
                Family::Normal { sigma } => sigma * sigma * a * a,
            };
        }
        let u = (t * a).abs();
        match self.family {
            Family::Jdlvp if u <= 1.0 => a * a * (1.5 - 0.75 * u) * (1.0 + self.cf(t)),
            Family::Normal { sigma } => -(-sigma * sigma * u * u).exp_m1() / (t * t),
            _ => self.one_minus_cf(t) * (1.0 + self.cf(t)) / (t * t),
        }
    }

    /// `C_f`.
    pub fn c_f(&self) -> f64 {
        match self.family {
            Family::Jdlvp => 2.0 / self.scale,
            Family::Normal { .. } => f64::INFINITY,
        }
    }

    /// `D_f`: `φ_f` vanishes identically past this frequency.
    pub fn d_f(&self) -> f64 {
        self.c_f()
    }

    /// Closed-form `ψ(F) = ∫F(1−F)`.
    pub fn psi_f(&self) -> f64 {
        let base = match self.family {
            Family::Jdlvp => (96.0 * LN_2 - 43.0) / (8.0 * PI),
            Family::Normal { sigma } => sigma / PI.sqrt(),
        };
        self.scale * base
    }

    pub fn abs_first_moment_finite(&self) -> bool {
        true
    }

    pub fn square_integrable(&self) -> bool {
        true
    }

    /// Points where `φ_f` is not smooth.
    pub fn cf_knots(&self) -> Vec<f64> {
        match self.family {
            Family::Jdlvp => vec![1.0 / self.scale, 2.0 / self.scale],
            Family::Normal { .. } => Vec::new(),
        }
    }

    /// A bandwidth bracket wide enough to contain the MISE minimiser for the
    /// sample sizes of interest.
    pub fn default_h_max(&self) -> f64 {
        match self.family {
            Family::Jdlvp => 8.0 * self.scale,
            Family::Normal { sigma } => 4.0 * sigma * self.scale,
        }
    }

    /// Rough spread used to place quadrature breakpoints in the space domain.
    pub(crate) fn spread(&self) -> f64 {
        match self.family {
            Family::Jdlvp => 2.0 * self.scale,
            Family::Normal { sigma } => sigma * self.scale,
        }
    }

    /// `n` i.i.d. draws, sorted ascending. Equal seeds give equal output.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Precondition("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        match self.family {
            Family::Normal { sigma } => {
                let s = sigma * self.scale;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    out.push(s * z);
                }
            }
            Family::Jdlvp => {
                let budget = 1_000_000u64.saturating_mul(n as u64);
                let mut proposals = 0u64;
                while out.len() < n {
                    if proposals >= budget {
                        return Err(Error::Sampler(format!(
                            "rejection sampler used {proposals} proposals for {} of {n} draws",
                            out.len()
                        )));
                    }
                    proposals += 1;
                    let x = jdlvp_envelope_draw(&mut rng);
                    let u: f64 = rng.random();
                    if u * jdlvp_envelope(x) <= base_density(Family::Jdlvp, x) {
                        out.push(self.scale * x);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

/// Envelope `(3/(4π)) min(1, (2/|x|)⁴)` dominating the JdlVP density. Its mass
/// is 3/4 on `[−2, 2]` and 1/4 in the tails.
fn jdlvp_envelope(x: f64) -> f64 {
    let r = 2.0 / x.abs();
    if r >= 1.0 {
        JDLVP_PEAK
    } else {
        JDLVP_PEAK * r * r * r * r
    }
}

fn jdlvp_envelope_draw<R: Rng>(rng: &mut R) -> f64 {
    let pick: f64 = rng.random();
    if pick < 0.75 {
        -2.0 + 4.0 * rng.random::<f64>()
    } else {
        let v = 1.0 - rng.random::<f64>();
        let mag = 2.0 * v.powf(-1.0 / 3.0);
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    }
}

fn base_density(family: Family, x: f64) -> f64 {
    match family {
        Family::Jdlvp => {
            if x == 0.0 {
                JDLVP_PEAK
            } else {
                let s = (0.5 * x).sin() / (0.5 * x);
                let s2 = s * s;
                JDLVP_PEAK * s2 * s2
            }
        }
        Family::Normal { sigma } => std_normal_pdf(x / sigma) / sigma,
    }
}

fn base_cdf(family: Family, x: f64) -> f64 {
    match family {
        Family::Normal { sigma } => std_normal_cdf(x / sigma),
        Family::Jdlvp => {
            if x.is_nan() {
                f64::NAN
            } else if x >= 0.0 {
                1.0 - jdlvp_tail(x)
            } else {
                jdlvp_tail(-x)
            }
        }
    }
}

/// Switch point past which the tail mass comes from its asymptotic series.
const JDLVP_ASYMPTOTIC_FROM: f64 = 64.0;

/// `∫_y^∞ f` for `y ≥ 0`, with full relative accuracy in the far tail.
fn jdlvp_tail(y: f64) -> f64 {
    if y < 2.0 {
        0.5 - jdlvp_core_mass(y)
    } else if y < JDLVP_ASYMPTOTIC_FROM {
        0.5 - jdlvp_outer_mass(y)
    } else {
        jdlvp_far_tail(y)
    }
}

/// `∫₀^y f` for `0 ≤ y < 2` by quadrature of the smooth density.
fn jdlvp_core_mass(y: f64) -> f64 {
    let cfg = QuadratureConfig::default().with_tolerances(1e-15, 1e-13);
    integrate(|u| base_density(Family::Jdlvp, u), 0.0, y, &cfg).value
}

/// `∫₀^y f` for `y ≥ 2` in closed form. With `g(y) = 16 sin⁴(y/2)` and
/// repeated integration by parts of `g/y⁴`, the remainder reduces to sine
/// integrals.
fn jdlvp_outer_mass(y: f64) -> f64 {
    if y.is_infinite() {
        return 0.5;
    }
    let (s1, c1) = y.sin_cos();
    let (s2, c2) = (2.0 * y).sin_cos();
    let g = 9.0 + 3.0 * c2 - 12.0 * c1;
    let g1 = -6.0 * s2 + 12.0 * s1;
    let g2 = -12.0 * c2 + 12.0 * c1;
    let boundary = -g / (3.0 * y * y * y) - g1 / (6.0 * y * y) - g2 / (6.0 * y);
    boundary / (2.0 * PI) + 2.0 * si(2.0 * y) - si(y)
}

/// `∫_y^∞ f` for large `y`. Writing `16 sin⁴(u/2) = 6 − 8 cos u + 2 cos 2u`,
/// the tail is `(3/(2π))[y⁻³ − 4 C(y) + 8 C(2y)]` with `C(y) = ∫_y^∞ cos(u)/u⁴ du`.
fn jdlvp_far_tail(y: f64) -> f64 {
    if y.is_infinite() {
        return 0.0;
    }
    1.5 / PI * (1.0 / (y * y * y) - 4.0 * cos_quartic_tail(y) + 8.0 * cos_quartic_tail(2.0 * y))
}

/// `∫_y^∞ cos(u)/u⁴ du` from the asymptotic series of `∫_y^∞ e^{iu} u⁻⁴ du
/// ~ i e^{iy} y⁻⁴ Σ (4)_m (−i/y)^m`; 25 terms reach rounding level for `y ≥ 64`.
fn cos_quartic_tail(y: f64) -> f64 {
    let (mut even, mut odd) = (0.0, 0.0);
    let mut term = 1.0;
    for m in 0..25 {
        match m % 4 {
            0 => even += term,
            1 => odd -= term,
            2 => even -= term,
            _ => odd += term,
        }
        term *= (4 + m) as f64 / y;
    }
    let (s, c) = y.sin_cos();
    -(even * s + odd * c) / (y * y * y * y)
}

impl fmt::Display for TargetDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for TargetDistribution {
    type Err = Error;

    /// Accepts `jdlvp`, `jdlvp:scale=2`, `normal`, `normal:sigma=1.5` and
    /// `normal:sigma=1.5,scale=2`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownName {
            kind: "distribution",
            name: s.to_string(),
            expected: DISTRIBUTION_NAMES,
        };
        let trimmed = s.trim();
        let (head, params) = match trimmed.split_once(':') {
            Some((h, p)) => (h, p),
            None => (trimmed, ""),
        };
        let mut sigma = None;
        let mut scale = 1.0;
        for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(unknown)?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("invalid number in distribution spec: {part}")))?;
            match key.trim() {
                "sigma" => sigma = Some(value),
                "scale" => scale = value,
                _ => return Err(unknown()),
            }
        }
        let base = match head.trim().to_ascii_lowercase().as_str() {
            "jdlvp" if sigma.is_none() => make_jdlvp(),
            "normal" | "gaussian" => make_normal(sigma.unwrap_or(1.0))?,
            _ => return Err(unknown()),
        };
        rescale(&base, scale)
    }
}

/// `ψ(F)` from the characteristic function, `(2π)⁻¹∫t⁻²{1 − |φ_f(t)|²}dt`.
pub fn psi_f_fourier(dist: &TargetDistribution, cfg: &QuadratureConfig) -> Result<f64> {
    if !dist.abs_first_moment_finite() {
        return Err(Error::Precondition("psi(F) requires a finite mean".into()));
    }
    let pts = breakpoints(0.0, f64::INFINITY, dist.cf_knots());
    let q = integrate_pieces(|t| dist.roughness_integrand(t), &pts, cfg);
    Ok(q.require("psi_f_fourier")? / PI)
}

/// `ψ(F) = ∫F(1−F)` by direct space-domain quadrature.
pub fn psi_f_space(dist: &TargetDistribution, cfg: &QuadratureConfig) -> Result<f64> {
    let s = dist.spread();
    let pts = [f64::NEG_INFINITY, -s, 0.0, s, f64::INFINITY];
    let q = integrate_pieces(|x| dist.cdf(x) * dist.sf(x), &pts, cfg);
    q.require("psi_f_space")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all() -> Vec<TargetDistribution> {
        let j = make_jdlvp();
        let n1 = make_normal(1.0).unwrap();
        vec![
            j,
            n1,
            make_normal(0.5).unwrap(),
            make_normal(2.0).unwrap(),
            rescale(&j, 0.5).unwrap(),
            rescale(&j, 2.0).unwrap(),
            rescale(&n1, 0.5).unwrap(),
            rescale(&n1, 2.0).unwrap(),
        ]
    }

    #[test]
    fn jdlvp_spectrum_branches_meet() {
        let d = make_jdlvp();
        assert_eq!(d.cf(1.0), 0.25);
        assert_eq!(d.cf(2.0), 0.0);
        assert_eq!(d.cf(0.0), 1.0);
        assert_eq!(d.cf(3.0), 0.0);
        assert_eq!(d.c_f(), 2.0);
        assert_eq!(d.d_f(), 2.0);
        // Fourier-side quadrature of the spectrum, evaluated independently.
        assert!((d.psi_f() - 0.936_711_563_593_957).abs() < 1e-12);
    }

    #[test]
    fn normal_constants() {
        let d = make_normal(1.0).unwrap();
        assert!((d.psi_f() - 0.564_189_6).abs() < 1e-7);
        assert_eq!(d.cf(0.0), 1.0);
        assert!(d.c_f().is_infinite() && d.d_f().is_infinite());
        assert!(make_normal(0.0).is_err());
        assert!(make_normal(-1.0).is_err());
        assert!(make_normal(f64::NAN).is_err());
    }

    #[test]
    fn rescaling_transforms_constants() {
        let j = make_jdlvp();
        assert_eq!(rescale(&j, 1.0).unwrap(), j);
        assert_eq!(rescale(&j, 2.0).unwrap().d_f(), 1.0);
        let n3 = rescale(&make_normal(1.0).unwrap(), 3.0).unwrap();
        assert!((n3.psi_f() - 3.0 / PI.sqrt()).abs() < 1e-14);
        assert!(rescale(&j, 0.0).is_err());
        assert!(rescale(&j, -2.0).is_err());
    }

    #[test]
    fn psi_fourier_side_matches_closed_forms() {
        let cfg = QuadratureConfig::default();
        for d in all() {
            let v = psi_f_fourier(&d, &cfg).unwrap();
            assert!((v - d.psi_f()).abs() < 1e-9, "{d}: {v} vs {}", d.psi_f());
        }
    }

    #[test]
    fn psi_space_side_matches_fourier_side() {
        let cfg = QuadratureConfig::default();
        for d in all() {
            let space = psi_f_space(&d, &cfg).unwrap();
            let fourier = psi_f_fourier(&d, &cfg).unwrap();
            assert!((space - fourier).abs() < 1e-6, "{d}: {space} vs {fourier}");
        }
    }

    #[test]
    fn cdf_matches_quadrature_of_density() {
        let cfg = QuadratureConfig::default().with_tolerances(1e-12, 1e-10);
        for d in all() {
            for i in 0..20 {
                let x = -12.0 + 24.0 * i as f64 / 19.0 + 0.01;
                let q = integrate(|u| d.density(u), f64::NEG_INFINITY, x, &cfg)
                    .require("cdf")
                    .unwrap();
                assert!((d.cdf(x) - q).abs() < 1e-9, "{d} at {x}: {} vs {q}", d.cdf(x));
            }
        }
    }

    #[test]
    fn jdlvp_cdf_is_continuous_across_the_closed_form_switch() {
        let d = make_jdlvp();
        let below = jdlvp_core_mass(2.0 - 1e-12);
        let above = jdlvp_outer_mass(2.0);
        assert!((below - above).abs() < 1e-12, "{below} vs {above}");
        let y = JDLVP_ASYMPTOTIC_FROM;
        let closed = 0.5 - jdlvp_outer_mass(y);
        let series = jdlvp_far_tail(y);
        assert!((closed - series).abs() < 1e-9 * series, "{closed} vs {series}");
        assert_eq!(d.cdf(0.0), 0.5);
        assert!((d.cdf(1e9) - 1.0).abs() < 1e-12);
        assert!(d.cdf(-1e9).abs() < 1e-12);
    }

    #[test]
    fn jdlvp_density_is_a_density() {
        let d = make_jdlvp();
        for i in 0..=20_000 {
            let x = -100.0 + i as f64 * 0.01;
            assert!(d.density(x) >= 0.0);
        }
        let total = integrate(|x| d.density(x), f64::NEG_INFINITY, f64::INFINITY, &QuadratureConfig::default())
            .require("mass")
            .unwrap();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn envelope_dominates_density() {
        for i in 0..=40_000 {
            let x = -200.0 + i as f64 * 0.01;
            assert!(jdlvp_envelope(x) >= base_density(Family::Jdlvp, x));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for d in [make_jdlvp(), make_normal(1.0).unwrap()] {
            let a = d.sample(500, 42).unwrap();
            let b = d.sample(500, 42).unwrap();
            assert_eq!(a, b);
            assert!(a.windows(2).all(|w| w[0] <= w[1]));
            assert_ne!(a, d.sample(500, 43).unwrap());
        }
        assert!(make_jdlvp().sample(0, 1).is_err());
    }

    fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn jdlvp_sample_is_centred() {
        let n = 100_000;
        let xs = make_jdlvp().sample(n, 20_240_601).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * var.sqrt() / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn samples_pass_kolmogorov_smirnov() {
        let n = 100_000;
        let normal = make_normal(1.0).unwrap();
        let xs = normal.sample(n, 7).unwrap();
        let ks = ks_statistic(&xs, |x| normal.cdf(x));
        assert!(ks < 1.95 / (n as f64).sqrt(), "normal KS {ks}");

        let j = rescale(&make_jdlvp(), 1.5).unwrap();
        let xs = j.sample(n, 11).unwrap();
        let ks = ks_statistic(&xs, |x| j.cdf(x));
        assert!(ks < 1.95 / (n as f64).sqrt(), "jdlvp KS {ks}");
    }

    #[test]
    fn parse_specs() {
        assert_eq!("jdlvp".parse::<TargetDistribution>().unwrap(), make_jdlvp());
        let n = "normal:sigma=2,scale=3".parse::<TargetDistribution>().unwrap();
        assert_eq!(n.normal_sigma(), Some(6.0));
        let j = "jdlvp:scale=2".parse::<TargetDistribution>().unwrap();
        assert_eq!(j.d_f(), 1.0);
        assert_eq!(j.name().parse::<TargetDistribution>().unwrap(), j);
        assert_eq!(n.name().parse::<TargetDistribution>().unwrap(), n);
        assert!("cauchy".parse::<TargetDistribution>().is_err());
        assert!("normal:sigma=-1".parse::<TargetDistribution>().is_err());
        assert!("normal:mu=1".parse::<TargetDistribution>().is_err());
    }

    proptest! {
        #[test]
        fn rescale_composes(a in 0.05f64..20.0, b in 0.05f64..20.0, which in 0usize..2) {
            let base = if which == 0 { make_jdlvp() } else { make_normal(1.3).unwrap() };
            let two_step = rescale(&rescale(&base, a).unwrap(), b).unwrap();
            let one_step = rescale(&base, a * b).unwrap();
            for i in 0..20 {
                let t = 0.17 * i as f64;
                prop_assert!((two_step.cf(t) - one_step.cf(t)).abs() < 1e-12);
            }
        }

        #[test]
        fn spectrum_is_bounded(t in -50.0f64..50.0, a in 0.1f64..10.0) {
            for d in [rescale(&make_jdlvp(), a).unwrap(), make_normal(a).unwrap()] {
                let phi = d.cf(t);
                prop_assert!(phi.abs() <= 1.0);
                prop_assert!((d.one_minus_cf(t) - (1.0 - phi)).abs() < 1e-14);
                prop_assert!(d.c_f() <= d.d_f());
            }
        }

        #[test]
        fn cdf_is_monotone(x in -30.0f64..30.0, dx in 0.0f64..5.0) {
            for d in [make_jdlvp(), make_normal(0.7).unwrap()] {
                prop_assert!(d.cdf(x) <= d.cdf(x + dx) + 1e-15);
                prop_assert!((d.cdf(x) + d.sf(x) - 1.0).abs() < 1e-14);
            }
        }
    }
}
