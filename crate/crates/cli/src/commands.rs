//! The seven commands. Each returns a [`Report`] listing the files it wrote
//! and anything meant for standard output.

use std::fmt::Write as _;

use cdf_mise::bandwidth::{
    efficiency_curve, limit_bandwidth, log_spaced_sample_sizes, optimal_bandwidth,
    asymptotic_relative_efficiency, BandwidthSearch, EfficiencyCurve,
};
use cdf_mise::distributions::{make_jdlvp, make_normal, psi_f_fourier, Family};
use cdf_mise::estimator::{monte_carlo_mise, replication_seed, MonteCarloMise};
use cdf_mise::kernels::psi_k;
use cdf_mise::mise::mise;
use cdf_mise::numerics::QuadratureConfig;
use cdf_mise::{Kernel, TargetDistribution};
use rayon::prelude::*;

use crate::config::{Command, HGrid, RunConfig, MIN_REPS};
use crate::svg::{self, ChartSpec};
use crate::table::{Cell, Table};
use crate::{write_atomic, CliError, Report};

/// Sample sizes of the figure and efficiency commands: 15 points, evenly
/// spaced in `log₁₀ n` from 1 to 7.
pub fn figure_sample_sizes() -> Vec<usize> {
    log_spaced_sample_sizes(15, 1.0, 7.0)
}

pub const DEFAULT_H_GRID: HGrid = HGrid {
    min: 0.0,
    max: 1.0,
    count: 101,
};
pub const DEFAULT_CURVE_N: usize = 1000;
pub const DEFAULT_OPTIMAL_N: [usize; 5] = [100, 1000, 10_000, 100_000, 1_000_000];
pub const MC_BANDWIDTHS: [f64; 3] = [0.2, 0.5, 1.0];
pub const MC_SAMPLE_SIZES: [usize; 2] = [20, 100];
/// Cells whose z-score exceeds this in absolute value fail validation.
pub const Z_FLAG: f64 = 4.0;

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::MiseCurve => cmd_mise_curve(cfg),
        Command::OptimalBandwidth => cmd_optimal_bandwidth(cfg),
        Command::EfficiencyCurve => cmd_efficiency_curve(cfg),
        Command::Figure2 => cmd_figure2(cfg),
        Command::Figure3 => cmd_figure3(cfg),
        Command::McValidate => cmd_mc_validate(cfg),
        Command::Constants => cmd_constants(cfg),
    }
}

fn quadrature() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn parse_dist(spec: &str) -> Result<TargetDistribution, CliError> {
    spec.parse().map_err(|e: cdf_mise::Error| CliError::Usage(e.to_string()))
}

fn parse_kernel(spec: &str) -> Result<Kernel, CliError> {
    spec.parse().map_err(|e: cdf_mise::Error| CliError::Usage(e.to_string()))
}

fn dist_or(cfg: &RunConfig, default: &str) -> Result<TargetDistribution, CliError> {
    parse_dist(cfg.dist_spec.as_deref().unwrap_or(default))
}

fn kernel_or(cfg: &RunConfig, default: &str) -> Result<Kernel, CliError> {
    parse_kernel(cfg.kernel_spec.as_deref().unwrap_or(default))
}

/// Writes `table` and, when asked for, its chart.
fn emit(
    cfg: &RunConfig,
    report: &mut Report,
    stem: &str,
    table: &Table,
    chart: Option<&ChartSpec>,
) -> Result<(), CliError> {
    let csv = table.to_csv()?;
    report
        .files
        .push(write_atomic(&cfg.output_dir, &format!("{stem}.csv"), &csv)?);
    if let (true, Some(spec)) = (cfg.format.with_svg(), chart) {
        let svg = svg::render(&csv, spec)?;
        report
            .files
            .push(write_atomic(&cfg.output_dir, &format!("{stem}.svg"), &svg)?);
    }
    Ok(())
}

pub const MISE_CHART: ChartSpec = ChartSpec {
    title: "Exact MISE and its parts",
    x: "h",
    x_label: "bandwidth h",
    y_label: "integrated squared error",
    series: &["iv", "isb", "mise"],
    asymptotes: &[],
};

/// One row per grid bandwidth, with `h = 0` always included.
pub fn cmd_mise_curve(cfg: &RunConfig) -> Result<Report, CliError> {
    let dist = dist_or(cfg, "jdlvp")?;
    let kernel = kernel_or(cfg, "trapezoidal")?;
    let mut hs = cfg.h_grid.unwrap_or(DEFAULT_H_GRID).values();
    if hs[0] > 0.0 {
        hs.insert(0, 0.0);
    }
    let ns = cfg.n_list.clone().unwrap_or_else(|| vec![DEFAULT_CURVE_N]);
    let qc = quadrature();
    let mut report = Report::default();
    for n in ns {
        let rows = hs
            .par_iter()
            .map(|&h| mise(&dist, &kernel, h, n, &qc))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new(&["h", "iv", "isb", "mise", "method"]);
        for r in rows {
            table.push(vec![r.h.into(), r.iv.into(), r.isb.into(), r.mise.into(), r.method.as_str().into()]);
        }
        emit(cfg, &mut report, &format!("mise_curve_n{n}"), &table, Some(&MISE_CHART))?;
    }
    Ok(report)
}

pub fn cmd_optimal_bandwidth(cfg: &RunConfig) -> Result<Report, CliError> {
    let dist = dist_or(cfg, "jdlvp")?;
    let kernel = kernel_or(cfg, "trapezoidal")?;
    let ns = cfg.n_list.clone().unwrap_or_else(|| DEFAULT_OPTIMAL_N.to_vec());
    let search = BandwidthSearch::for_distribution(&dist);
    let qc = quadrature();
    let mut table = Table::new(&[
        "n",
        "h_opt",
        "mise_at_opt",
        "mise_edf",
        "rel_eff",
        "bracket_lo",
        "bracket_hi",
        "boundary",
    ]);
    for n in ns {
        let r = optimal_bandwidth(&dist, &kernel, n, &search, &qc)?;
        let edf = dist.psi_f() / n as f64;
        table.push(vec![
            n.into(),
            r.h_opt.into(),
            r.mise_at_opt.into(),
            edf.into(),
            (r.mise_at_opt / edf).into(),
            r.bracket.0.into(),
            r.bracket.1.into(),
            r.boundary_flag.as_str().into(),
        ]);
    }
    let mut report = Report::default();
    emit(cfg, &mut report, "optimal_bandwidth", &table, None)?;
    Ok(report)
}

fn curve(dist: &TargetDistribution, kernel: &Kernel, ns: &[usize]) -> Result<EfficiencyCurve, CliError> {
    let search = BandwidthSearch::for_distribution(dist);
    Ok(efficiency_curve(dist, kernel, ns, &search, &quadrature())?)
}

pub const EFFICIENCY_CHART: ChartSpec = ChartSpec {
    title: "Relative efficiency at the optimal bandwidth",
    x: "log10_n",
    x_label: "log10 n",
    y_label: "MISE(h_opt) / MISE(0)",
    series: &["rel_eff"],
    asymptotes: &["asymptote"],
};

pub fn cmd_efficiency_curve(cfg: &RunConfig) -> Result<Report, CliError> {
    let dist = dist_or(cfg, "jdlvp")?;
    let kernel = kernel_or(cfg, "trapezoidal")?;
    let ns = cfg.n_list.clone().unwrap_or_else(figure_sample_sizes);
    let c = curve(&dist, &kernel, &ns)?;
    let mut table = Table::new(&["log10_n", "n", "h_opt", "rel_eff", "asymptote"]);
    for i in 0..ns.len() {
        let n = ns[i];
        table.push(vec![
            (n as f64).log10().into(),
            n.into(),
            c.h_opt[i].into(),
            c.rel_eff[i].into(),
            c.asymptote.into(),
        ]);
    }
    let mut report = Report::default();
    emit(cfg, &mut report, "efficiency_curve", &table, Some(&EFFICIENCY_CHART))?;
    Ok(report)
}

/// Curves for two kernels on one distribution, sharing the `n` grid.
fn paired_curves(
    cfg: &RunConfig,
    default_dist: &str,
    kernels: [Kernel; 2],
) -> Result<(Vec<usize>, [EfficiencyCurve; 2], TargetDistribution), CliError> {
    let dist = dist_or(cfg, default_dist)?;
    let ns = cfg.n_list.clone().unwrap_or_else(figure_sample_sizes);
    let a = curve(&dist, &kernels[0], &ns)?;
    let b = curve(&dist, &kernels[1], &ns)?;
    Ok((ns, [a, b], dist))
}

pub const FIGURE2_BANDWIDTH_CHART: ChartSpec = ChartSpec {
    title: "Optimal bandwidth sequence",
    x: "log10_n",
    x_label: "log10 n",
    y_label: "h_opt",
    series: &["h_trapezoidal", "h_sinc"],
    asymptotes: &["limit_trapezoidal", "limit_sinc"],
};

pub const FIGURE2_EFFICIENCY_CHART: ChartSpec = ChartSpec {
    title: "Relative efficiency in MISE",
    x: "log10_n",
    x_label: "log10 n",
    y_label: "MISE(h_opt) / MISE(0)",
    series: &["eff_trapezoidal", "eff_sinc"],
    asymptotes: &["asymptote_trapezoidal", "asymptote_sinc"],
};

/// Trapezoidal and sinc superkernels on the JdlVP distribution.
pub fn cmd_figure2(cfg: &RunConfig) -> Result<Report, CliError> {
    let kernels = [Kernel::trapezoidal(), Kernel::sinc()];
    let (ns, [t, s], dist) = paired_curves(cfg, "jdlvp", kernels)?;
    let limits = [limit_bandwidth(&dist, &kernels[0])?, limit_bandwidth(&dist, &kernels[1])?];
    let mut bw = Table::new(&["log10_n", "n", "h_trapezoidal", "h_sinc", "limit_trapezoidal", "limit_sinc"]);
    let mut eff = Table::new(&[
        "log10_n",
        "n",
        "eff_trapezoidal",
        "eff_sinc",
        "asymptote_trapezoidal",
        "asymptote_sinc",
    ]);
    for (i, &n) in ns.iter().enumerate() {
        let x = (n as f64).log10();
        bw.push(vec![x.into(), n.into(), t.h_opt[i].into(), s.h_opt[i].into(), limits[0].into(), limits[1].into()]);
        eff.push(vec![
            x.into(),
            n.into(),
            t.rel_eff[i].into(),
            s.rel_eff[i].into(),
            t.asymptote.into(),
            s.asymptote.into(),
        ]);
    }
    let mut report = Report::default();
    emit(cfg, &mut report, "figure2_bandwidth", &bw, Some(&FIGURE2_BANDWIDTH_CHART))?;
    emit(cfg, &mut report, "figure2_efficiency", &eff, Some(&FIGURE2_EFFICIENCY_CHART))?;
    Ok(report)
}

pub const FIGURE3_CHART: ChartSpec = ChartSpec {
    title: "Relative efficiency for the standard normal",
    x: "log10_n",
    x_label: "log10 n",
    y_label: "MISE(h_opt) / MISE(0)",
    series: &["eff_normal", "eff_sinc"],
    asymptotes: &["asymptote"],
};

/// Normal and sinc kernels on the standard normal distribution.
pub fn cmd_figure3(cfg: &RunConfig) -> Result<Report, CliError> {
    let kernels = [Kernel::normal(), Kernel::sinc()];
    let (ns, [nk, s], _) = paired_curves(cfg, "normal:sigma=1", kernels)?;
    let mut eff = Table::new(&["log10_n", "n", "eff_normal", "eff_sinc", "asymptote"]);
    for (i, &n) in ns.iter().enumerate() {
        eff.push(vec![
            (n as f64).log10().into(),
            n.into(),
            nk.rel_eff[i].into(),
            s.rel_eff[i].into(),
            nk.asymptote.into(),
        ]);
    }
    let mut report = Report::default();
    emit(cfg, &mut report, "figure3_efficiency", &eff, Some(&FIGURE3_CHART))?;
    Ok(report)
}

/// One Monte Carlo validation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct McCell {
    pub dist: TargetDistribution,
    pub kernel: Kernel,
    pub exact: f64,
    pub mc: MonteCarloMise,
}

impl McCell {
    pub fn z_score(&self) -> f64 {
        self.mc.z_score(self.exact)
    }
}

/// Kernels paired with a distribution in the default suite: both
/// superkernels for JdlVP, the normal and sinc kernels otherwise.
fn suite_kernels(dist: &TargetDistribution) -> [Kernel; 2] {
    match dist.family() {
        Family::Jdlvp => [Kernel::trapezoidal(), Kernel::sinc()],
        Family::Normal { .. } => [Kernel::normal(), Kernel::sinc()],
    }
}

/// Exact and Monte Carlo MISE over the suite selected by `cfg`. Without
/// overrides this is 4 pairs × 3 bandwidths × 2 sample sizes; cell `i` is
/// seeded with `replication_seed(seed, i)`.
pub fn mc_validate_cells(cfg: &RunConfig) -> Result<Vec<McCell>, CliError> {
    if cfg.reps < MIN_REPS {
        return Err(CliError::Usage(format!(
            "mc-validate needs at least {MIN_REPS} replications, got {}",
            cfg.reps
        )));
    }
    let dists = match &cfg.dist_spec {
        Some(s) => vec![parse_dist(s)?],
        None => vec![make_jdlvp(), make_normal(1.0)?],
    };
    let kernel = cfg.kernel_spec.as_deref().map(parse_kernel).transpose()?;
    let hs = cfg.h_grid.map(|g| g.values()).unwrap_or_else(|| MC_BANDWIDTHS.to_vec());
    let ns = cfg.n_list.clone().unwrap_or_else(|| MC_SAMPLE_SIZES.to_vec());
    let qc = quadrature();
    let mut cells = Vec::new();
    for dist in dists {
        let kernels = match kernel {
            Some(k) => vec![k],
            None => suite_kernels(&dist).to_vec(),
        };
        for k in kernels {
            for &h in &hs {
                for &n in &ns {
                    let seed = replication_seed(cfg.seed, cells.len() as u64);
                    let exact = mise(&dist, &k, h, n, &qc)?.mise;
                    let mc = monte_carlo_mise(&dist, &k, h, n, cfg.reps, seed, &qc)?;
                    log::info!("{dist} {k} h={h} n={n}: z = {:.3}", mc.z_score(exact));
                    cells.push(McCell { dist, kernel: k, exact, mc });
                }
            }
        }
    }
    Ok(cells)
}

pub fn cmd_mc_validate(cfg: &RunConfig) -> Result<Report, CliError> {
    let cells = mc_validate_cells(cfg)?;
    let mut table = Table::new(&[
        "dist",
        "kernel",
        "h",
        "n",
        "reps",
        "exact_mise",
        "mc_mise",
        "std_error",
        "z_score",
        "flagged",
    ]);
    let mut report = Report::default();
    let mut max_z: f64 = 0.0;
    for c in &cells {
        let z = c.z_score();
        let flagged = !(z.abs() <= Z_FLAG);
        if flagged {
            report.failures.push(format!(
                "{} {} h={} n={}: |z| = {:.3} exceeds {Z_FLAG}",
                c.dist, c.kernel, c.mc.h, c.mc.n, z.abs()
            ));
        }
        max_z = max_z.max(z.abs());
        table.push(vec![
            c.dist.name().into(),
            c.kernel.name().into(),
            c.mc.h.into(),
            c.mc.n.into(),
            c.mc.replications.into(),
            c.exact.into(),
            c.mc.estimate.into(),
            c.mc.std_error.into(),
            z.into(),
            Cell::Int(flagged as u64),
        ]);
    }
    emit(cfg, &mut report, "mc_validate", &table, None)?;
    let _ = writeln!(
        report.stdout,
        "{} cells, max |z| = {max_z:.3}, {} flagged (|z| > {Z_FLAG})",
        cells.len(),
        report.failures.len()
    );
    Ok(report)
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.10}")
    }
}

/// Analytic constants next to their quadrature values, for the catalog or
/// for whatever `--dist` and `--kernel` select.
pub fn cmd_constants(cfg: &RunConfig) -> Result<Report, CliError> {
    let dists = match &cfg.dist_spec {
        Some(s) => vec![parse_dist(s)?],
        None => vec![make_jdlvp(), make_normal(1.0)?],
    };
    let kernels = match &cfg.kernel_spec {
        Some(s) => vec![parse_kernel(s)?],
        None => Kernel::catalog().to_vec(),
    };
    let qc = quadrature();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>14} {:>18} {:>12} {:>8} {:>8}",
        "distribution", "psi_f", "psi_f quadrature", "discrepancy", "C_f", "D_f"
    );
    for d in &dists {
        let q = psi_f_fourier(d, &qc)?;
        let _ = writeln!(
            out,
            "{:<24} {:>14} {:>18} {:>12.2e} {:>8} {:>8}",
            d.name(),
            fmt_value(d.psi_f()),
            fmt_value(q),
            (q - d.psi_f()).abs(),
            fmt_value(d.c_f()),
            fmt_value(d.d_f())
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<24} {:>14} {:>18} {:>12} {:>8} {:>8}",
        "kernel", "psi_k", "psi_k quadrature", "discrepancy", "S_k", "T_k"
    );
    for k in &kernels {
        let q = psi_k(k, &qc)?;
        let _ = writeln!(
            out,
            "{:<24} {:>14} {:>18} {:>12.2e} {:>8} {:>8}",
            k.name(),
            fmt_value(k.psi()),
            fmt_value(q),
            (q - k.psi()).abs(),
            k.s_k(),
            k.t_k()
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<24} {:<12} {:>16} {:>22}",
        "distribution", "kernel", "limit bandwidth", "asymptotic efficiency"
    );
    for d in &dists {
        for k in &kernels {
            let (limit, eff) = match (limit_bandwidth(d, k), asymptotic_relative_efficiency(d, k)) {
                (Ok(l), Ok(e)) => (fmt_value(l), fmt_value(e)),
                _ => ("n/a".to_string(), "n/a".to_string()),
            };
            let _ = writeln!(out, "{:<24} {:<12} {:>16} {:>22}", d.name(), k.name(), limit, eff);
        }
    }
    Ok(Report {
        stdout: out,
        ..Report::default()
    })
}
