//! MISE-optimal bandwidths, their large-sample limits and relative
//! efficiencies against the empirical distribution function.

use std::fmt;

use rayon::prelude::*;

use crate::distributions::TargetDistribution;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::mise::{check_pair, mise};
use crate::numerics::QuadratureConfig;

/// Grid-scan plus golden-section search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSearch {
    pub h_max: f64,
    pub grid_size: usize,
    pub refine_tol: f64,
}

/// Lowest log-spaced grid point, as a fraction of `h_max`.
const GRID_FLOOR: f64 = 1e-4;
/// Grid cells whose MISE agrees to this relative level are ties; the smaller
/// bandwidth wins.
const TIE_TOL: f64 = 1e-14;

impl BandwidthSearch {
    pub fn new(h_max: f64, grid_size: usize, refine_tol: f64) -> Result<Self> {
        let s = Self {
            h_max,
            grid_size,
            refine_tol,
        };
        s.validate()?;
        Ok(s)
    }

    /// 512 grid points over `[0, h_max]` with the distribution's default bracket.
    pub fn for_distribution(dist: &TargetDistribution) -> Self {
        Self {
            h_max: dist.default_h_max(),
            grid_size: 512,
            refine_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_max > 0.0 && self.h_max.is_finite()) {
            return Err(Error::Domain(format!("h_max must be positive, got {}", self.h_max)));
        }
        if self.grid_size < 64 {
            return Err(Error::Domain(format!(
                "grid_size must be at least 64, got {}",
                self.grid_size
            )));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }

    /// `0` followed by `grid_size` log-spaced points ending at `h_max`.
    pub fn grid(&self) -> Vec<f64> {
        let lo = self.h_max * GRID_FLOOR;
        let step = (self.h_max / lo).ln() / (self.grid_size - 1) as f64;
        let mut g = Vec::with_capacity(self.grid_size + 1);
        g.push(0.0);
        g.extend((0..self.grid_size).map(|i| lo * (step * i as f64).exp()));
        *g.last_mut().expect("grid is nonempty") = self.h_max;
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryFlag {
    Interior,
    AtZero,
    AtUpperBracket,
}

impl BoundaryFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::AtZero => "at_zero",
            Self::AtUpperBracket => "at_upper_bracket",
        }
    }
}

impl fmt::Display for BoundaryFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthResult {
    pub h_opt: f64,
    pub mise_at_opt: f64,
    pub n: usize,
    /// The grid cell around the best grid point; both ends have MISE at least
    /// `mise_at_opt`.
    pub bracket: (f64, f64),
    pub grid_points_scanned: usize,
    /// Width of the final golden-section interval.
    pub refined_tolerance: f64,
    pub boundary_flag: BoundaryFlag,
}

fn better(candidate: (f64, f64), best: (f64, f64)) -> bool {
    let (h, m) = candidate;
    let (bh, bm) = best;
    if (m - bm).abs() <= TIE_TOL * bm.abs().max(m.abs()) {
        h < bh
    } else {
        m < bm
    }
}

/// Global minimiser of `MISE(h)` on `[0, h_max]`.
///
/// A full grid scan guards against the several local minima of the sinc
/// MISE; golden-section search then refines inside the best grid cell.
pub fn optimal_bandwidth(
    dist: &TargetDistribution,
    kernel: &Kernel,
    n: usize,
    search: &BandwidthSearch,
    cfg: &QuadratureConfig,
) -> Result<BandwidthResult> {
    search.validate()?;
    check_pair(dist, kernel)?;
    let grid = search.grid();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&h| mise(dist, kernel, h, n, cfg).map(|r| r.mise))
        .collect::<Result<_>>()?;

    let mut best_idx = 0;
    for i in 1..grid.len() {
        if better((grid[i], values[i]), (grid[best_idx], values[best_idx])) {
            best_idx = i;
        }
    }
    let last = grid.len() - 1;
    let lo = grid[best_idx.saturating_sub(1)];
    let hi = grid[(best_idx + 1).min(last)];

    let eval = |h: f64| mise(dist, kernel, h, n, cfg).map(|r| r.mise);
    let mut best = (grid[best_idx], values[best_idx]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for p in [(c, fc), (d, fd)] {
        if better(p, best) {
            best = p;
        }
    }
    while b - a > search.refine_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
            if better((c, fc), best) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
            if better((d, fd), best) {
                best = (d, fd);
            }
        }
    }

    let boundary_flag = if best.0 == 0.0 {
        BoundaryFlag::AtZero
    } else if best_idx == last && best.0 >= search.h_max - search.refine_tol {
        log::warn!(
            "MISE minimiser for {dist} with the {kernel} kernel at n = {n} sits on the upper bracket h_max = {}; widen the bracket",
            search.h_max
        );
        BoundaryFlag::AtUpperBracket
    } else {
        BoundaryFlag::Interior
    };
    Ok(BandwidthResult {
        h_opt: best.0,
        mise_at_opt: best.1,
        n,
        bracket: (lo, hi),
        grid_points_scanned: grid.len(),
        refined_tolerance: b - a,
        boundary_flag,
    })
}

/// Large-sample limit `S_k/D_f` of the optimal bandwidth. Needs `C_f = D_f`
/// and `S_k = T_k`.
pub fn limit_bandwidth(dist: &TargetDistribution, kernel: &Kernel) -> Result<f64> {
    if dist.c_f() != dist.d_f() || kernel.s_k() != kernel.t_k() {
        return Err(Error::Unsupported(format!(
            "limit bandwidth needs C_f = D_f and S_k = T_k ({dist}: {} vs {}; {kernel}: {} vs {})",
            dist.c_f(),
            dist.d_f(),
            kernel.s_k(),
            kernel.t_k()
        )));
    }
    if kernel.s_k() == 0.0 || dist.d_f().is_infinite() {
        return Ok(0.0);
    }
    Ok(kernel.s_k() / dist.d_f())
}

/// Bandwidths in `[lo, hi]` where the sinc-kernel MISE is stationary, i.e.
/// `φ_f(1/h)² = 1/(n+1)`. Sign changes are located on a 1024-point grid in
/// `1/h` and bisected to full precision; the result is ascending in `h`.
pub fn sinc_critical_bandwidths(
    dist: &TargetDistribution,
    n: usize,
    bracket: (f64, f64),
) -> Result<Vec<f64>> {
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid bandwidth bracket ({lo}, {hi})")));
    }
    if !dist.square_integrable() {
        return Err(Error::Precondition(format!(
            "the sinc kernel needs a square-integrable density; {dist} is not"
        )));
    }
    let level = 1.0 / (n as f64 + 1.0);
    let g = |u: f64| {
        let phi = dist.cf(u);
        phi * phi - level
    };
    let u_lo = 1.0 / hi;
    let mut u_hi = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
    if u_hi.is_infinite() {
        // Past D_f, or once φ_f² has fallen well below the level, no more roots.
        let mut u = u_lo.max(1.0 / dist.spread());
        for _ in 0..200 {
            if u >= dist.d_f() || dist.cf(u).powi(2) < 0.5 * level {
                break;
            }
            u *= 2.0;
        }
        u_hi = u.min(dist.d_f()).max(u_lo);
    }
    let m = 1024;
    let us: Vec<f64> = (0..m)
        .map(|i| u_lo + (u_hi - u_lo) * i as f64 / (m - 1) as f64)
        .collect();
    let gs: Vec<f64> = us.iter().map(|&u| g(u)).collect();
    let mut roots = Vec::new();
    for i in 0..m {
        if gs[i] == 0.0 {
            roots.push(us[i]);
            continue;
        }
        if i + 1 < m && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let (mut a, mut b) = (us[i], us[i + 1]);
            let ga = gs[i];
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    let mut hs: Vec<f64> = roots.into_iter().map(|u| 1.0 / u).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    Ok(hs)
}

/// `MISE(h_0n)/MISE(0)`.
pub fn relative_efficiency(
    dist: &TargetDistribution,
    kernel: &Kernel,
    n: usize,
    search: &BandwidthSearch,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let r = optimal_bandwidth(dist, kernel, n, search, cfg)?;
    Ok(r.mise_at_opt * n as f64 / dist.psi_f())
}

/// `1 − ψ(K)S_k/{ψ(F)D_f}`: the efficiency reached at the limit bandwidth.
/// One when the pair admits no first-order gain.
pub fn asymptotic_relative_efficiency(dist: &TargetDistribution, kernel: &Kernel) -> Result<f64> {
    let h = limit_bandwidth(dist, kernel)?;
    if h == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - kernel.psi() * h / dist.psi_f())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    pub n_values: Vec<usize>,
    pub h_opt: Vec<f64>,
    pub rel_eff: Vec<f64>,
    pub asymptote: f64,
}

pub fn efficiency_curve(
    dist: &TargetDistribution,
    kernel: &Kernel,
    n_values: &[usize],
    search: &BandwidthSearch,
    cfg: &QuadratureConfig,
) -> Result<EfficiencyCurve> {
    let mut h_opt = Vec::with_capacity(n_values.len());
    let mut rel_eff = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let r = optimal_bandwidth(dist, kernel, n, search, cfg)?;
        h_opt.push(r.h_opt);
        rel_eff.push(r.mise_at_opt * n as f64 / dist.psi_f());
    }
    Ok(EfficiencyCurve {
        n_values: n_values.to_vec(),
        h_opt,
        rel_eff,
        asymptote: asymptotic_relative_efficiency(dist, kernel)?,
    })
}

/// `n` values `10^{1 + 6i/(count−1)}` rounded to integers.
pub fn log_spaced_sample_sizes(count: usize, lo_exp: f64, hi_exp: f64) -> Vec<usize> {
    if count == 1 {
        return vec![10f64.powf(lo_exp).round() as usize];
    }
    (0..count)
        .map(|i| {
            let e = lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64;
            10f64.powf(e).round() as usize
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub lower_bound: f64,
    pub limit: f64,
    pub h_opt: Vec<(usize, f64)>,
    /// Every `h_0n ≥ S_k/D_f − refine_tol`.
    pub lower_bound_holds: bool,
    /// The last `h_0n` lies within the caller's tolerance of `S_k/D_f`; vacuous
    /// when there is no positive limit.
    pub limit_reached: bool,
    pub violations: Vec<String>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the lower half of `S_k/D_f ≤ inf h_0n ≤ limsup h_0n ≤ h_*` along
/// `n_list`, and that the final optimum is within `limit_tol` of `S_k/D_f`.
pub fn bandwidth_sandwich_check(
    dist: &TargetDistribution,
    kernel: &Kernel,
    n_list: &[usize],
    search: &BandwidthSearch,
    limit_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<SandwichReport> {
    let limit = limit_bandwidth(dist, kernel)?;
    let mut h_opt = Vec::with_capacity(n_list.len());
    let mut violations = Vec::new();
    for &n in n_list {
        let r = optimal_bandwidth(dist, kernel, n, search, cfg)?;
        if r.h_opt < limit - search.refine_tol {
            violations.push(format!(
                "lower bound S_k/D_f = {limit} violated at n = {n}: h_opt = {}",
                r.h_opt
            ));
        }
        h_opt.push((n, r.h_opt));
    }
    let lower_bound_holds = violations.is_empty();
    let mut limit_reached = true;
    if limit > 0.0 {
        if let Some(&(n, h)) = h_opt.last() {
            if (h - limit).abs() > limit_tol {
                limit_reached = false;
                violations.push(format!(
                    "h_opt = {h} at n = {n} is not within {limit_tol} of the limit {limit}"
                ));
            }
        }
    }
    Ok(SandwichReport {
        lower_bound: limit,
        limit,
        h_opt,
        lower_bound_holds,
        limit_reached,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_jdlvp, make_normal, rescale};
    use crate::mise::{mise_normal_sinc_closed, mise_sinc_fourier};
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn large_n_optimum_matches_a_dense_scan() {
        // Independent of the grid and golden section: a plain scan at step
        // 1e-4 over the region just past the bias-free segment.
        let d = make_jdlvp();
        for k in [Kernel::trapezoidal(), Kernel::sinc()] {
            let n = 1_000_000;
            let r = optimal_bandwidth(&d, &k, n, &BandwidthSearch::for_distribution(&d), &cfg()).unwrap();
            let (mut best_h, mut best_m) = (f64::NAN, f64::INFINITY);
            for i in 0..=4000 {
                let h = 0.5 + 1e-4 * i as f64;
                let m = crate::mise::mise(&d, &k, h, n, &cfg()).unwrap().mise;
                if m < best_m {
                    (best_h, best_m) = (h, m);
                }
            }
            assert!((r.h_opt - best_h).abs() <= 1e-4, "{k}: {} vs {best_h}", r.h_opt);
            assert!(r.mise_at_opt <= best_m * (1.0 + 1e-12), "{k}");
        }
    }

    #[test]
    fn search_settings_are_validated() {
        assert!(BandwidthSearch::new(1.0, 63, 1e-6).is_err());
        assert!(BandwidthSearch::new(0.0, 64, 1e-6).is_err());
        assert!(BandwidthSearch::new(1.0, 64, 0.0).is_err());
        let g = BandwidthSearch::new(2.0, 64, 1e-6).unwrap().grid();
        assert_eq!(g.len(), 65);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn normal_sinc_optimum_solves_the_critical_equation() {
        let d = make_normal(1.0).unwrap();
        let search = BandwidthSearch::for_distribution(&d);
        let r = optimal_bandwidth(&d, &Kernel::sinc(), 100, &search, &cfg()).unwrap();
        let exact = 1.0 / 101f64.ln().sqrt();
        assert!((r.h_opt - exact).abs() <= search.refine_tol, "{}", r.h_opt);
        assert_eq!(r.boundary_flag, BoundaryFlag::Interior);
        assert!(r.bracket.0 <= r.h_opt && r.h_opt <= r.bracket.1);
        let roots = sinc_critical_bandwidths(&d, 100, (0.0, 4.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn jdlvp_sinc_critical_point_matches_the_cubic_branch() {
        let d = make_jdlvp();
        for &n in &[3usize, 10, 100, 10_000] {
            let roots = sinc_critical_bandwidths(&d, n, (0.0, 8.0)).unwrap();
            assert_eq!(roots.len(), 1, "n={n}: {roots:?}");
            // ((2 − t)³/4)² = 1/(n+1) on the outer branch when the level is below 1/16.
            let level = 1.0 / (n as f64 + 1.0);
            let t = if level < 1.0 / 16.0 {
                2.0 - (4.0 * level.sqrt()).cbrt()
            } else {
                let mut a = 0.0;
                let mut b = 1.0;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if d.cf(m) * d.cf(m) > level { a = m } else { b = m }
                }
                a
            };
            assert!((roots[0] - 1.0 / t).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn sinc_critical_points_are_stationary() {
        for (d, n) in [(make_jdlvp(), 50usize), (make_normal(1.0).unwrap(), 100), (rescale(&make_jdlvp(), 2.0).unwrap(), 500)] {
            for h in sinc_critical_bandwidths(&d, n, (0.0, d.default_h_max())).unwrap() {
                let e = 1e-5 * h;
                let m = |h: f64| mise_sinc_fourier(&d, h, n, &cfg()).unwrap().mise;
                let deriv = (m(h + e) - m(h - e)) / (2.0 * e);
                assert!(deriv.abs() < 1e-6 * m(h), "{d} n={n} h={h}: {deriv}");
            }
        }
        let nd = (mise_normal_sinc_closed(1.0, 0.47, 100).unwrap() - mise_normal_sinc_closed(1.0, 0.46, 100).unwrap()).abs();
        assert!(nd < 1e-5);
    }

    #[test]
    fn limit_bandwidths() {
        let j = make_jdlvp();
        assert_eq!(limit_bandwidth(&j, &Kernel::sinc()).unwrap(), 0.5);
        assert_eq!(limit_bandwidth(&j, &Kernel::trapezoidal()).unwrap(), 0.5);
        assert_eq!(limit_bandwidth(&rescale(&j, 2.0).unwrap(), &Kernel::trapezoidal()).unwrap(), 1.0);
        assert_eq!(limit_bandwidth(&j, &Kernel::normal()).unwrap(), 0.0);
        let n = make_normal(1.0).unwrap();
        for k in Kernel::catalog() {
            assert_eq!(limit_bandwidth(&n, &k).unwrap(), 0.0);
            assert_eq!(asymptotic_relative_efficiency(&n, &k).unwrap(), 1.0);
        }
    }

    #[test]
    fn asymptotic_efficiencies() {
        let j = make_jdlvp();
        let t = asymptotic_relative_efficiency(&j, &Kernel::trapezoidal()).unwrap();
        let s = asymptotic_relative_efficiency(&j, &Kernel::sinc()).unwrap();
        assert!((t - 0.86874).abs() < 1e-4, "{t}");
        assert!((s - 0.83010).abs() < 1e-4, "{s}");
    }

    #[test]
    fn jdlvp_optimum_stays_above_the_limit_and_beats_the_edf() {
        let d = make_jdlvp();
        let search = BandwidthSearch::for_distribution(&d);
        for k in [Kernel::trapezoidal(), Kernel::sinc()] {
            let mut prev = f64::INFINITY;
            for &n in &[2usize, 10, 100, 1000, 10_000] {
                let r = optimal_bandwidth(&d, &k, n, &search, &cfg()).unwrap();
                assert!(r.h_opt >= 0.5 - search.refine_tol, "{k} n={n}");
                assert!(r.h_opt <= prev + search.refine_tol, "{k} n={n}");
                assert!(r.mise_at_opt < d.psi_f() / n as f64);
                assert_eq!(r.boundary_flag, BoundaryFlag::Interior);
                prev = r.h_opt;
            }
        }
    }

    #[test]
    fn efficiency_values_from_an_independent_solver() {
        // Optimal bandwidths and efficiencies obtained with a separate
        // double-precision implementation (adaptive quadrature plus bounded
        // scalar minimisation).
        let j = make_jdlvp();
        let search = BandwidthSearch::for_distribution(&j);
        let cases = [
            (Kernel::trapezoidal(), 1000usize, 0.9190, 0.7761),
            (Kernel::sinc(), 1000, 0.6675, 0.7832),
            (Kernel::trapezoidal(), 1_000_000, 0.6318, 0.8386),
            (Kernel::sinc(), 1_000_000, 0.5431, 0.8177),
        ];
        for (k, n, h, eff) in cases {
            let r = optimal_bandwidth(&j, &k, n, &search, &cfg()).unwrap();
            let e = r.mise_at_opt * n as f64 / j.psi_f();
            assert!((r.h_opt - h).abs() < 1e-3, "{k} n={n}: h {}", r.h_opt);
            assert!((e - eff).abs() < 1e-3, "{k} n={n}: eff {e}");
        }
    }

    #[test]
    fn normal_optimum_shrinks_with_n() {
        let d = make_normal(1.0).unwrap();
        let search = BandwidthSearch::for_distribution(&d);
        let mut prev = f64::INFINITY;
        for &n in &[100usize, 200, 400, 800, 1600, 3200, 6400, 12_800, 25_600, 51_200, 102_400] {
            let r = optimal_bandwidth(&d, &Kernel::normal(), n, &search, &cfg()).unwrap();
            assert!(r.h_opt < prev, "n={n}");
            prev = r.h_opt;
        }
        assert!(prev < 0.04);
    }

    #[test]
    fn optimum_is_global_on_an_audit_grid() {
        let d = make_jdlvp();
        let k = Kernel::sinc();
        let search = BandwidthSearch::for_distribution(&d);
        let r = optimal_bandwidth(&d, &k, 50, &search, &cfg()).unwrap();
        for i in 0..512 {
            let h = search.h_max * (i as f64 + 0.37) / 512.0;
            assert!(r.mise_at_opt <= mise(&d, &k, h, 50, &cfg()).unwrap().mise * (1.0 + 1e-12));
        }
    }

    #[test]
    fn upper_bracket_is_flagged() {
        let d = make_jdlvp();
        let search = BandwidthSearch::new(0.3, 64, 1e-6).unwrap();
        let r = optimal_bandwidth(&d, &Kernel::trapezoidal(), 100, &search, &cfg()).unwrap();
        assert_eq!(r.boundary_flag, BoundaryFlag::AtUpperBracket);
        assert_eq!(r.h_opt, 0.3);
    }

    #[test]
    fn sandwich_report_flags_a_missed_limit() {
        let d = make_jdlvp();
        let search = BandwidthSearch::for_distribution(&d);
        let rep = bandwidth_sandwich_check(&d, &Kernel::sinc(), &[10, 1000], &search, 0.01, &cfg()).unwrap();
        assert!(rep.lower_bound_holds);
        assert!(!rep.limit_reached);
        assert!(!rep.passed());
        assert!(rep.violations[0].contains("n = 1000"));
        let n = make_normal(1.0).unwrap();
        let rep = bandwidth_sandwich_check(&n, &Kernel::normal(), &[10, 1000], &BandwidthSearch::for_distribution(&n), 0.01, &cfg()).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn sample_size_grid() {
        let ns = log_spaced_sample_sizes(15, 1.0, 7.0);
        assert_eq!(ns.len(), 15);
        assert_eq!(ns[0], 10);
        assert_eq!(ns[14], 10_000_000);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn superkernel_optimum_respects_the_lower_bound(n in 2usize..200_000, a in 0.5f64..3.0, sinc in any::<bool>()) {
            let d = rescale(&make_jdlvp(), a).unwrap();
            let k = if sinc { Kernel::sinc() } else { Kernel::trapezoidal() };
            let search = BandwidthSearch::for_distribution(&d);
            let r = optimal_bandwidth(&d, &k, n, &search, &cfg()).unwrap();
            prop_assert!(r.h_opt >= limit_bandwidth(&d, &k).unwrap() - search.refine_tol);
            prop_assert!(r.mise_at_opt <= d.psi_f() / n as f64);
            prop_assert!(r.bracket.0 <= r.h_opt && r.h_opt <= r.bracket.1);
        }
    }
}
