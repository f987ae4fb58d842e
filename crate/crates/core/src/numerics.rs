//! Special functions and adaptive quadrature shared by the rest of the crate.
//!
//! The sine integral uses the normalization `Si(x) = ∫₀ˣ sin(z)/(πz) dz`, so
//! that `Si(±∞) = ±1/2` and the integrated sinc kernel is simply `1/2 + Si`.
//!
//! Quadrature is a 15-point Gauss–Kronrod rule with global adaptive bisection
//! of the panel carrying the largest error estimate. Semi-infinite ranges are
//! split at a finite point and the tail is mapped onto a finite interval with
//! `t = 1/u`, which is well behaved for every integrand in this crate since
//! they all decay at least like `t⁻²`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Level below which a decaying integrand or tail probability is treated
    /// as negligible by callers that must truncate an infinite domain.
    pub tail_cutoff_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cutoff_tol: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        tail_cutoff_tol: f64,
    ) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            tail_cutoff_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.abs_tol) && positive(self.rel_tol) && positive(self.tail_cutoff_tol)) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be finite and positive: {self:?}"
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    /// Same budget with both tolerances replaced.
    pub fn with_tolerances(self, abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..self
        }
    }

    pub fn with_max_subdivisions(self, max_subdivisions: usize) -> Self {
        Self {
            max_subdivisions,
            ..self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl QuadratureResult {
    const ZERO: Self = Self {
        value: 0.0,
        error_estimate: 0.0,
        subdivisions_used: 0,
        converged: true,
    };

    fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            subdivisions_used: self.subdivisions_used + other.subdivisions_used,
            converged: self.converged && other.converged,
        }
    }

    fn negate(self) -> Self {
        Self {
            value: -self.value,
            ..self
        }
    }

    /// Turns a non-converged result into [`Error::Quadrature`].
    pub fn require(self, what: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                what,
                value: self.value,
                error: self.error_estimate,
            })
        }
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod_15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { a, b, value, error }
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> QuadratureResult {
    let first = gauss_kronrod_15(f, a, b);
    if !first.value.is_finite() {
        return QuadratureResult {
            value: first.value,
            error_estimate: f64::INFINITY,
            subdivisions_used: 1,
            converged: false,
        };
    }
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut converged = total_err <= cfg.target(total);

    while !converged && heap.len() < cfg.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_15(f, worst.a, mid);
        let right = gauss_kronrod_15(f, mid, worst.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            heap.push(worst);
            total = f64::NAN;
            break;
        }
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        converged = total_err <= cfg.target(total);
    }

    // Summation in left-to-right panel order keeps the result independent of
    // the heap's internal layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = if total.is_nan() {
        f64::NAN
    } else {
        panels.iter().map(|p| p.value).sum()
    };
    let error_estimate: f64 = panels.iter().map(|p| p.error).sum();
    QuadratureResult {
        value,
        error_estimate,
        subdivisions_used: panels.len(),
        converged: value.is_finite() && error_estimate <= cfg.target(value),
    }
}

/// `∫_a^∞ f` through `t = 1/u` on `(0, 1/a]`; requires `a > 0`.
fn upper_tail(f: &dyn Fn(f64) -> f64, a: f64, cfg: &QuadratureConfig) -> QuadratureResult {
    let g = |u: f64| {
        let v = f(1.0 / u);
        if v == 0.0 {
            0.0
        } else {
            v / (u * u)
        }
    };
    adaptive(&g, 0.0, 1.0 / a, cfg)
}

/// Adaptively integrates `f` over `[lower, upper]`; either end may be infinite.
///
/// A non-converged integration is reported through
/// [`QuadratureResult::converged`] rather than an error, so callers decide
/// whether a partial answer is acceptable.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    integrate_ref(&f, lower, upper, cfg)
}

fn integrate_ref(
    f: &dyn Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    if lower.is_nan() || upper.is_nan() {
        return QuadratureResult {
            value: f64::NAN,
            error_estimate: f64::INFINITY,
            subdivisions_used: 0,
            converged: false,
        };
    }
    if lower == upper {
        return QuadratureResult::ZERO;
    }
    if lower > upper {
        return integrate_ref(f, upper, lower, cfg).negate();
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => adaptive(f, lower, upper, cfg),
        (true, false) => {
            if lower > 0.0 {
                upper_tail(f, lower, cfg)
            } else {
                adaptive(f, lower, 1.0, cfg).combine(upper_tail(f, 1.0, cfg))
            }
        }
        (false, true) => {
            let reflected = |x: f64| f(-x);
            integrate_ref(&reflected, -upper, f64::INFINITY, cfg)
        }
        (false, false) => integrate_ref(f, f64::NEG_INFINITY, 0.0, cfg)
            .combine(integrate_ref(f, 0.0, f64::INFINITY, cfg)),
    }
}

/// Integrates over consecutive pairs of `points`, which must be nondecreasing.
/// The first and last entries may be infinite.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    points
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| integrate_ref(&f, w[0], w[1], cfg))
        .fold(QuadratureResult::ZERO, QuadratureResult::combine)
}

/// Sorts `points`, drops duplicates and anything outside `[lower, upper]`, and
/// brackets the result with the two ends.
pub fn breakpoints(lower: f64, upper: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|p| p.is_finite() && *p > lower && *p < upper)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(lower);
    out.extend(pts);
    out.push(upper);
    out
}

/// Standard normal distribution function `Φ(x)`.
///
/// Computed from the complementary error function, so both tails keep full
/// relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Sine integral `Si(x) = ∫₀ˣ sin(z)/(πz) dz`.
pub fn sine_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("sine integral of non-finite {x}")));
    }
    Ok(si(x))
}

/// Unchecked [`sine_integral`]; infinite arguments map to `±1/2`.
pub(crate) fn si(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let t = x.abs();
    let value = if t <= SERIES_LIMIT {
        si_series(t) / PI
    } else {
        0.5 - si_upper_tail(t)
    };
    value.copysign(x)
}

/// `1/2 − Si(t)` for `t ≥ 0`, without the cancellation of the subtraction.
pub(crate) fn si_upper_tail(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t.is_infinite() {
        0.0
    } else if t <= SERIES_LIMIT {
        0.5 - si_series(t) / PI
    } else if t < ASYMPTOTIC_LIMIT {
        let (f, g) = auxiliary_interpolated(t);
        let (s, c) = t.sin_cos();
        (f * c + g * s) / PI
    } else {
        let (f, g) = auxiliary_asymptotic(t);
        let (s, c) = t.sin_cos();
        (f * c + g * s) / PI
    }
}

const SERIES_LIMIT: f64 = 4.0;
const ASYMPTOTIC_LIMIT: f64 = 40.0;

/// Classical `∫₀ᵗ sin(z)/z dz` by its Maclaurin series; all terms stay below
/// 4 in magnitude on `[0, 4]`, so there is no damaging cancellation.
fn si_series(t: f64) -> f64 {
    let t2 = t * t;
    let mut power = t;
    let mut sum = t;
    let mut k = 1.0_f64;
    loop {
        power *= -t2 / ((2.0 * k) * (2.0 * k + 1.0));
        let term = power / (2.0 * k + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
        k += 1.0;
    }
}

/// Auxiliary functions `f(t), g(t)` with `π/2 − Si_classical(t) = f cos t + g sin t`,
/// from the continued fraction for `E₁(it)` evaluated by the modified Lentz method.
fn auxiliary_continued_fraction(t: f64) -> (f64, f64) {
    const TINY: f64 = 1e-300;
    let mut b = Complex::new(1.0, t);
    let mut c = Complex::new(1.0 / TINY, 0.0);
    let mut d = Complex::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) * (i - 1)) as f64;
        b = b + Complex::new(2.0, 0.0);
        d = Complex::new(1.0, 0.0) / (d.scale(a) + b);
        c = b + Complex::new(a, 0.0) / c;
        let del = c * d;
        h = h * del;
        if (del.re - 1.0).abs() + del.im.abs() < 4.0 * f64::EPSILON {
            break;
        }
    }
    // E₁(it) = e^{−it}·h and π/2 − Si = −Im E₁(it) = h.re·sin t − h.im·cos t.
    (-h.im, h.re)
}

const CHEB_NODES: usize = 26;
const CHEB_EDGES: [f64; 4] = [SERIES_LIMIT, 8.0, 16.0, ASYMPTOTIC_LIMIT];

/// Chebyshev coefficients of `t·f(t)` and `t²·g(t)` on one segment.
struct ChebSegment {
    lo: f64,
    hi: f64,
    f: [f64; CHEB_NODES],
    g: [f64; CHEB_NODES],
}

impl ChebSegment {
    fn build(lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let nf = CHEB_NODES as f64;
        let mut fv = [0.0; CHEB_NODES];
        let mut gv = [0.0; CHEB_NODES];
        for k in 0..CHEB_NODES {
            let x = mid + half * (PI * (k as f64 + 0.5) / nf).cos();
            let (f, g) = auxiliary_continued_fraction(x);
            fv[k] = x * f;
            gv[k] = x * x * g;
        }
        let mut f = [0.0; CHEB_NODES];
        let mut g = [0.0; CHEB_NODES];
        for j in 0..CHEB_NODES {
            for k in 0..CHEB_NODES {
                let w = (PI * j as f64 * (k as f64 + 0.5) / nf).cos();
                f[j] += fv[k] * w;
                g[j] += gv[k] * w;
            }
            f[j] *= 2.0 / nf;
            g[j] *= 2.0 / nf;
        }
        Self { lo, hi, f, g }
    }

    fn clenshaw(c: &[f64; CHEB_NODES], y: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cj in c[1..].iter().rev() {
            let next = 2.0 * y * b1 - b2 + cj;
            b2 = b1;
            b1 = next;
        }
        y * b1 - b2 + 0.5 * c[0]
    }
}

static AUXILIARY_TABLE: OnceLock<Vec<ChebSegment>> = OnceLock::new();

/// The auxiliary functions on `(4, 40)` from Chebyshev interpolants of the
/// continued fraction, which is several times slower to evaluate directly.
fn auxiliary_interpolated(t: f64) -> (f64, f64) {
    let table = AUXILIARY_TABLE.get_or_init(|| {
        CHEB_EDGES
            .windows(2)
            .map(|w| ChebSegment::build(w[0], w[1]))
            .collect()
    });
    let seg = table
        .iter()
        .find(|s| t <= s.hi)
        .unwrap_or(&table[table.len() - 1]);
    let y = (2.0 * t - seg.lo - seg.hi) / (seg.hi - seg.lo);
    let f = ChebSegment::clenshaw(&seg.f, y) / t;
    let g = ChebSegment::clenshaw(&seg.g, y) / (t * t);
    (f, g)
}

/// Asymptotic series for the auxiliary functions; truncation error is below
/// `e^{−t}` once the terms are summed to their smallest element.
fn auxiliary_asymptotic(t: f64) -> (f64, f64) {
    let inv2 = 1.0 / (t * t);
    let mut f_sum = 1.0;
    let mut g_sum = 1.0;
    let mut f_term = 1.0;
    let mut g_term = 1.0;
    let mut k = 1.0_f64;
    loop {
        let next_f = -f_term * (2.0 * k - 1.0) * (2.0 * k) * inv2;
        let next_g = -g_term * (2.0 * k) * (2.0 * k + 1.0) * inv2;
        if next_f.abs() >= f_term.abs() || next_f.abs() < 1e-18 {
            break;
        }
        f_term = next_f;
        g_term = next_g;
        f_sum += f_term;
        g_sum += g_term;
        k += 1.0;
    }
    (f_sum / t, g_sum * inv2)
}

#[derive(Debug, Clone, Copy)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

impl std::ops::Add for Complex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl std::ops::Mul for Complex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl std::ops::Div for Complex {
    type Output = Self;
    // Smith's algorithm.
    fn div(self, o: Self) -> Self {
        if o.re.abs() >= o.im.abs() {
            let r = o.im / o.re;
            let den = o.re + o.im * r;
            Self::new((self.re + self.im * r) / den, (self.im - self.re * r) / den)
        } else {
            let r = o.re / o.im;
            let den = o.re * r + o.im;
            Self::new((self.re * r + self.im) / den, (self.im * r - self.re) / den)
        }
    }
}
