//! The kernel catalog: standard normal, the trapezoidal superkernel and the
//! sinc kernel.
//!
//! Every kernel is symmetric, so its Fourier transform `φ_k` is real. For the
//! two superkernels `φ_k` equals one on `[0, S_k]`, which is what makes the
//! integrated squared bias vanish for small enough bandwidths.
//!
//! | kernel      | `φ_k(t)`                                  | `S_k = T_k` | `ψ(K)`            |
//! |-------------|-------------------------------------------|-------------|-------------------|
//! | normal      | `exp(−t²/2)`                              | 0           | `1/√π`            |
//! | trapezoidal | 1 on `[0,1]`, `2 − t` on `[1,2]`, 0 after | 1           | `(4 ln 2 − 2)/π`  |
//! | sinc        | indicator of `[−1, 1]`                    | 1           | `1/π`             |

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{
    breakpoints, integrate, integrate_pieces, si, si_upper_tail, std_normal_cdf, std_normal_pdf,
    QuadratureConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Normal,
    Trapezoidal,
    Sinc,
}

/// A kernel `k`, its integrated form `K(x) = ∫_{−∞}^x k` and its Fourier
/// transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Kernel {
    kind: KernelKind,
}

pub const KERNEL_NAMES: &str = "normal, trapezoidal, sinc";

impl Kernel {
    /// Standard normal density; `K = Φ`.
    pub const fn normal() -> Self {
        Self {
            kind: KernelKind::Normal,
        }
    }

    /// `k(x) = (cos x − cos 2x)/(πx²)`.
    pub const fn trapezoidal() -> Self {
        Self {
            kind: KernelKind::Trapezoidal,
        }
    }

    /// `k(x) = sin(x)/(πx)`. Not Lebesgue integrable; `K = 1/2 + Si` in the
    /// principal-value sense.
    pub const fn sinc() -> Self {
        Self {
            kind: KernelKind::Sinc,
        }
    }

    pub fn catalog() -> [Kernel; 3] {
        [Self::normal(), Self::trapezoidal(), Self::sinc()]
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::Normal => "normal",
            KernelKind::Trapezoidal => "trapezoidal",
            KernelKind::Sinc => "sinc",
        }
    }

    pub fn kernel_fn(&self, x: f64) -> f64 {
        match self.kind {
            KernelKind::Normal => std_normal_pdf(x),
            KernelKind::Trapezoidal => {
                if x == 0.0 {
                    1.5 / PI
                } else {
                    // cos x − cos 2x = 2 sin(3x/2) sin(x/2), free of cancellation near 0
                    2.0 * (1.5 * x).sin() * (0.5 * x).sin() / (PI * x * x)
                }
            }
            KernelKind::Sinc => {
                if x == 0.0 {
                    1.0 / PI
                } else {
                    x.sin() / (PI * x)
                }
            }
        }
    }

    /// `K(x)`.
    pub fn integrated(&self, x: f64) -> f64 {
        match self.kind {
            KernelKind::Normal => std_normal_cdf(x),
            KernelKind::Trapezoidal => {
                if x == 0.0 {
                    0.5
                } else if x.is_infinite() {
                    if x > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    0.5 + 2.0 * si(2.0 * x) - si(x) - 2.0 * (1.5 * x).sin() * (0.5 * x).sin() / (PI * x)
                }
            }
            KernelKind::Sinc => 0.5 + si(x),
        }
    }

    /// `1 − K(x)`; every built-in kernel is symmetric so this is `K(−x)`.
    pub fn survival(&self, x: f64) -> f64 {
        self.integrated(-x)
    }

    /// An upper bound on `|K(z) − 1|` for `z ≥ y` and on `K(−z)` for the
    /// same `z`, valid for `y > 0`. The oscillating kernels use
    /// `|1/2 − Si(y)| ≤ 1/(πy)`.
    pub fn tail_bound(&self, y: f64) -> f64 {
        match self.kind {
            KernelKind::Normal => std_normal_cdf(-y),
            KernelKind::Trapezoidal => 4.0 / (PI * y),
            KernelKind::Sinc => 1.0 / (PI * y),
        }
    }

    /// `φ_k(t)`.
    pub fn ft(&self, t: f64) -> f64 {
        let t = t.abs();
        match self.kind {
            KernelKind::Normal => (-0.5 * t * t).exp(),
            KernelKind::Trapezoidal => {
                if t <= 1.0 {
                    1.0
                } else if t <= 2.0 {
                    2.0 - t
                } else {
                    0.0
                }
            }
            KernelKind::Sinc => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `1 − φ_k(t)` without cancellation for small `t`.
    pub fn one_minus_ft(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Normal => -(-0.5 * t * t).exp_m1(),
            _ => 1.0 - self.ft(t),
        }
    }

    /// `S_k`: the largest frequency up to which `φ_k ≡ 1`.
    pub fn s_k(&self) -> f64 {
        match self.kind {
            KernelKind::Normal => 0.0,
            KernelKind::Trapezoidal | KernelKind::Sinc => 1.0,
        }
    }

    /// `T_k`: the smallest frequency past which `φ_k` is not identically one
    /// on any subinterval.
    pub fn t_k(&self) -> f64 {
        self.s_k()
    }

    pub fn integrable(&self) -> bool {
        !matches!(self.kind, KernelKind::Sinc)
    }

    /// Whether `∫|y k(y)| dy < ∞`.
    pub fn abs_first_moment_finite(&self) -> bool {
        matches!(self.kind, KernelKind::Normal)
    }

    /// Frequency past which `φ_k` vanishes identically (infinite for the normal).
    pub fn ft_support(&self) -> f64 {
        match self.kind {
            KernelKind::Normal => f64::INFINITY,
            KernelKind::Trapezoidal => 2.0,
            KernelKind::Sinc => 1.0,
        }
    }

    /// Points where `φ_k` is not smooth.
    pub fn ft_knots(&self) -> &'static [f64] {
        match self.kind {
            KernelKind::Normal => &[],
            KernelKind::Trapezoidal => &[1.0, 2.0],
            KernelKind::Sinc => &[1.0],
        }
    }

    /// Closed-form `ψ(K) = ∫K(1−K)`.
    pub fn psi(&self) -> f64 {
        match self.kind {
            KernelKind::Normal => 1.0 / PI.sqrt(),
            KernelKind::Trapezoidal => (4.0 * LN_2 - 2.0) / PI,
            KernelKind::Sinc => 1.0 / PI,
        }
    }

    /// `(1 − φ_k(t)²)/t²`, continuous at `t = 0`.
    fn roughness_integrand(&self, t: f64) -> f64 {
        if t == 0.0 {
            return match self.kind {
                KernelKind::Normal => 1.0,
                _ => 0.0,
            };
        }
        match self.kind {
            KernelKind::Normal => -(-t * t).exp_m1() / (t * t),
            _ => {
                let phi = self.ft(t);
                (1.0 - phi) * (1.0 + phi) / (t * t)
            }
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Self::normal()),
            "trapezoidal" | "trapezoid" => Ok(Self::trapezoidal()),
            "sinc" => Ok(Self::sinc()),
            _ => Err(Error::UnknownName {
                kind: "kernel",
                name: s.to_string(),
                expected: KERNEL_NAMES,
            }),
        }
    }
}

/// `ψ(K)` from the Fourier side, `(2π)⁻¹∫t⁻²{1 − φ_k(t)²}dt`.
pub fn psi_k(kernel: &Kernel, cfg: &QuadratureConfig) -> Result<f64> {
    let pts = breakpoints(0.0, f64::INFINITY, kernel.ft_knots().iter().copied());
    let q = integrate_pieces(|t| kernel.roughness_integrand(t), &pts, cfg);
    Ok(q.require("psi_k")? / PI)
}

/// `ψ(K) = ∫K(1−K)` by direct quadrature in the space domain.
///
/// The trapezoidal and sinc kernels have oscillating algebraic tails, so the
/// integral is taken period by period out to a large multiple of `2π` and the
/// remainder is added from its asymptotic expansion.
pub fn psi_k_space(kernel: &Kernel, cfg: &QuadratureConfig) -> Result<f64> {
    let body = |x: f64| kernel.integrated(x) * kernel.survival(x);
    let half = match kernel.kind {
        KernelKind::Normal => integrate(body, 0.0, f64::INFINITY, cfg).require("psi_k_space")?,
        KernelKind::Trapezoidal => {
            let periods = 2000;
            let end = periods as f64 * 2.0 * PI;
            let pts: Vec<f64> = (0..=4 * periods).map(|i| i as f64 * 0.5 * PI).collect();
            let core = integrate_pieces(body, &pts, cfg).require("psi_k_space")?;
            // 1 − K(x) = [sin 2x/(2x²) − sin x/x²]/π + O(x⁻³); (1 − K)² is O(x⁻⁴).
            let tail = ((2.0 * end).cos() / 4.0 - end.cos()) / (PI * end * end);
            core + tail
        }
        KernelKind::Sinc => {
            let periods = 1000;
            let end = periods as f64 * 2.0 * PI;
            let pts: Vec<f64> = (0..=2 * periods).map(|i| i as f64 * PI).collect();
            let core = integrate_pieces(body, &pts, cfg).require("psi_k_space")?;
            // ∫_X^∞ (1/2 − Si) is exact; ∫_X^∞ (1/2 − Si)² from the leading terms.
            let linear = end.cos() / PI - end * si_upper_tail(end);
            let quadratic = (0.5 / end - (2.0 * end).sin() / (4.0 * end * end)) / (PI * PI);
            core + linear - quadratic
        }
    };
    Ok(2.0 * half)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn tail_bound_dominates_both_tails() {
        for k in Kernel::catalog() {
            for y in [0.5, 1.0, 3.0, 10.0, 100.0] {
                let b = k.tail_bound(y);
                for i in 0..20_000 {
                    let z = y + i as f64 * 0.05;
                    assert!(k.survival(z).abs() <= b, "{k} at {z}");
                    assert!(k.integrated(-z).abs() <= b, "{k} at -{z}");
                }
            }
        }
    }

    #[test]
    fn unit_mass_and_flat_spectra() {
        for k in Kernel::catalog() {
            assert_eq!(k.ft(0.0), 1.0, "{k}");
            assert!(k.s_k() <= k.t_k());
            assert_eq!(k.integrated(0.0), 0.5, "{k}");
            for i in 0..50 {
                let t = k.s_k() * (1.0 - 1e-9) * i as f64 / 49.0;
                assert_eq!(k.ft(t), 1.0);
            }
            if k.s_k() > 0.0 {
                assert!((1..=10).any(|i| k.ft(k.s_k() + 0.01 * i as f64) < 1.0));
            }
            for i in 0..400 {
                let t = i as f64 * 0.01;
                let phi = k.ft(t);
                assert!((0.0..=1.0).contains(&phi));
            }
        }
    }

    #[test]
    fn trapezoid_knots_are_exact() {
        let k = Kernel::trapezoidal();
        assert_eq!(k.ft(1.0), 1.0);
        assert_eq!(k.ft(2.0), 0.0);
        assert_eq!(k.ft(1.5), 0.5);
        assert_eq!(k.ft(0.7), 1.0);
        assert_eq!(k.ft(-1.25), 0.75);
    }

    // ∫_X^∞ cos(ax)/x² dx, exact.
    fn cos_over_square_tail(a: f64, x: f64) -> f64 {
        let a = a.abs();
        (a * x).cos() / x - a * PI * si_upper_tail(a * x)
    }

    #[test]
    fn trapezoid_spectrum_matches_numeric_transform() {
        let k = Kernel::trapezoidal();
        let c = cfg();
        let end = 400.0 * PI;
        let pts: Vec<f64> = (0..=1600).map(|i| i as f64 * 0.25 * PI).collect();
        for i in 0..20 {
            let t = 2.5 * i as f64 / 19.0;
            let core = integrate_pieces(|x| k.kernel_fn(x) * (t * x).cos(), &pts, &c)
                .require("ft")
                .unwrap();
            // k(x) cos(tx) = [cos((1−t)x) + cos((1+t)x) − cos((2−t)x) − cos((2+t)x)]/(2πx²)
            let tail = (cos_over_square_tail(1.0 - t, end) + cos_over_square_tail(1.0 + t, end)
                - cos_over_square_tail(2.0 - t, end)
                - cos_over_square_tail(2.0 + t, end))
                / (2.0 * PI);
            let numeric = 2.0 * (core + tail);
            assert!((numeric - k.ft(t)).abs() < 1e-6, "t={t}: {numeric} vs {}", k.ft(t));
        }
    }

    #[test]
    fn sinc_spectrum_is_an_indicator() {
        let k = Kernel::sinc();
        assert_eq!(k.ft(0.9999), 1.0);
        assert_eq!(k.ft(1.0001), 0.0);
        assert!(!k.integrable());
    }

    #[test]
    fn trapezoid_kernel_value_at_origin_is_the_limit() {
        let k = Kernel::trapezoidal();
        let near = k.kernel_fn(1e-5);
        assert!((near - 1.5 / PI).abs() < 1e-9);
        assert_eq!(k.kernel_fn(0.0), 1.5 / PI);
    }

    #[test]
    fn integrated_kernel_matches_quadrature_of_kernel() {
        let c = cfg();
        for k in [Kernel::normal(), Kernel::trapezoidal(), Kernel::sinc()] {
            for x in [-7.3, -2.0, -0.4, 0.3, 1.0, 4.5, 11.0] {
                let q = integrate(|y| k.kernel_fn(y), 0.0, x, &c).require("k").unwrap();
                assert!((k.integrated(x) - 0.5 - q).abs() < 1e-11, "{k} at {x}");
            }
        }
    }

    #[test]
    fn integrated_kernel_limits() {
        for k in Kernel::catalog() {
            assert!((k.integrated(1e6) - 1.0).abs() < 1e-6, "{k}");
            assert!(k.integrated(-1e6).abs() < 1e-6, "{k}");
        }
        let normal = Kernel::normal();
        let mut prev = 0.0;
        for i in -100..=100 {
            let v = normal.integrated(i as f64 * 0.1);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn psi_fourier_side_matches_closed_forms() {
        for k in Kernel::catalog() {
            let v = psi_k(&k, &cfg()).unwrap();
            assert!((v - k.psi()).abs() < 1e-10, "{k}: {v} vs {}", k.psi());
            assert!(v > 0.0);
        }
        assert!((Kernel::trapezoidal().psi() - 0.245_922_6).abs() < 1e-7);
        assert!((Kernel::sinc().psi() - 0.318_309_9).abs() < 1e-7);
    }

    #[test]
    fn psi_space_side_agrees_with_fourier_side() {
        let c = cfg();
        for (k, tol) in [
            (Kernel::normal(), 1e-8),
            (Kernel::trapezoidal(), 1e-8),
            (Kernel::sinc(), 1e-6),
        ] {
            let space = psi_k_space(&k, &c).unwrap();
            let fourier = psi_k(&k, &c).unwrap();
            assert!((space - fourier).abs() < tol, "{k}: space {space} fourier {fourier}");
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("Sinc".parse::<Kernel>().unwrap(), Kernel::sinc());
        assert_eq!("trapezoidal".parse::<Kernel>().unwrap(), Kernel::trapezoidal());
        let err = "epanechnikov".parse::<Kernel>().unwrap_err();
        assert!(err.to_string().contains("normal, trapezoidal, sinc"));
    }
}
