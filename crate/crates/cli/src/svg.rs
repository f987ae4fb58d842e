//! Minimal line charts rendered from CSV text alone, so a plot can always be
//! regenerated from its table.

use crate::CliError;

/// Which CSV columns to draw. `asymptotes` name constant columns drawn as
/// dashed horizontal lines.
#[derive(Debug, Clone, Copy)]
pub struct ChartSpec {
    pub title: &'static str,
    pub x: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub series: &'static [&'static str],
    pub asymptotes: &'static [&'static str],
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 270.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Columns {
    x: Vec<f64>,
    series: Vec<Vec<f64>>,
    asymptotes: Vec<f64>,
}

fn read_columns(csv_text: &str, spec: &ChartSpec) -> Result<Columns, CliError> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Output(format!("unreadable CSV header: {e}")))?
        .clone();
    let index = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Output(format!("CSV has no column {name:?}")))
    };
    let xi = index(spec.x)?;
    let si: Vec<usize> = spec.series.iter().map(|s| index(s)).collect::<Result<_, _>>()?;
    let ai: Vec<usize> = spec.asymptotes.iter().map(|s| index(s)).collect::<Result<_, _>>()?;
    let mut cols = Columns {
        x: Vec::new(),
        series: vec![Vec::new(); si.len()],
        asymptotes: vec![f64::NAN; ai.len()],
    };
    let number = |field: Option<&str>| field.and_then(|f| f.parse::<f64>().ok()).unwrap_or(f64::NAN);
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Output(format!("unreadable CSV row: {e}")))?;
        cols.x.push(number(record.get(xi)));
        for (col, &i) in cols.series.iter_mut().zip(&si) {
            col.push(number(record.get(i)));
        }
        for (a, &i) in cols.asymptotes.iter_mut().zip(&ai) {
            *a = number(record.get(i));
        }
    }
    Ok(cols)
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn padded(range: Option<(f64, f64)>) -> (f64, f64) {
    let (lo, hi) = range.unwrap_or((0.0, 1.0));
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = 0.1 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Round tick positions covering `[lo, hi]` with spacing 1, 2 or 5 × 10^k.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the chart described by `spec` from `csv_text`.
pub fn render(csv_text: &str, spec: &ChartSpec) -> Result<String, CliError> {
    let cols = read_columns(csv_text, spec)?;
    let (x0, x1) = padded(finite_range(cols.x.iter().copied()));
    let all_y = cols.series.iter().flatten().chain(&cols.asymptotes).copied();
    let (y0, y1) = padded(finite_range(all_y));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!("<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        LEFT + pw / 2.0,
        escape(spec.title)
    ));

    let (xt, xd) = ticks(x0, x1);
    for t in xt {
        let px = sx(t);
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#e0e0e0\"/>\n",
            TOP,
            TOP + ph
        ));
        out.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{t:.xd$}</text>\n",
            TOP + ph + 16.0
        ));
    }
    let (yt, yd) = ticks(y0, y1);
    for t in yt {
        let py = sy(t);
        out.push_str(&format!(
            "<line x1=\"{LEFT:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#e0e0e0\"/>\n",
            LEFT + pw
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{t:.yd$}</text>\n",
            LEFT - 6.0,
            py + 4.0
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(spec.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(spec.y_label)
    ));

    let legend_x = LEFT + pw + 16.0;
    let mut legend_y = TOP + 8.0;
    for (i, (name, ys)) in spec.series.iter().zip(&cols.series).enumerate() {
        let color = COLORS[i % COLORS.len()];
        // Non-finite values break the line into separate runs.
        let mut runs: Vec<Vec<String>> = vec![Vec::new()];
        for (&x, &y) in cols.x.iter().zip(ys) {
            if x.is_finite() && y.is_finite() {
                runs.last_mut().unwrap().push(format!("{:.2},{:.2}", sx(x), sy(y)));
            } else if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                run.join(" ")
            ));
        }
        out.push_str(&format!(
            "<line x1=\"{legend_x:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            legend_x + 22.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            legend_x + 28.0,
            legend_y + 4.0,
            escape(name)
        ));
        legend_y += 18.0;
    }
    for (i, (name, &a)) in spec.asymptotes.iter().zip(&cols.asymptotes).enumerate() {
        if !a.is_finite() {
            continue;
        }
        let color = COLORS[i % COLORS.len()];
        let py = sy(a);
        out.push_str(&format!(
            "<line x1=\"{LEFT:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"{color}\" stroke-dasharray=\"6 4\"/>\n",
            LEFT + pw
        ));
        out.push_str(&format!(
            "<line x1=\"{legend_x:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{color}\" stroke-dasharray=\"6 4\"/>\n",
            legend_x + 22.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{} = {a:.4}</text>\n",
            legend_x + 28.0,
            legend_y + 4.0,
            escape(name)
        ));
        legend_y += 18.0;
    }
    out.push_str("</svg>\n");
    Ok(out)
}
