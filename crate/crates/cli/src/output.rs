//! JSON envelope, CSV tables and SVG plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const TOOL: &str = "perspec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerances that shaped a result; absent entries did not apply.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Tolerances {
    pub gap_tol: f64,
    pub hermitian_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrema_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_log10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_tol: Option<f64>,
}

impl Tolerances {
    pub fn base() -> Self {
        Self {
            gap_tol: perspec::bands::GAP_TOL,
            hermitian_tol: perspec::floquet::HERMITIAN_TOL,
            ..Self::default()
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub tolerances: Tolerances,
    pub result: R,
}

/// One CSV file: header plus rows of numbers.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&str]) -> Self {
        Self { name, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `out.json` → `out.<suffix>`.
pub fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_csv(path: &Path, table: &Table) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()
}

/// Line series on a common axis box, or horizontal bars.
pub enum Plot {
    Lines { title: String, xlabel: String, ylabel: String, series: Vec<Vec<(f64, f64)>> },
    Bars { title: String, xlabel: String, bars: Vec<(f64, f64)> },
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(svg: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>", W / 2.0, M / 2.0, escape(title));
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(svg, "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>", H / 2.0, H / 2.0, escape(ylabel));
    let _ = writeln!(svg, "<text x=\"{M}\" y=\"{}\" text-anchor=\"start\">{:.4}</text>", H - M + 14.0, x.0);
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4}</text>", W - M, H - M + 14.0, x.1);
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4}</text>", M - 4.0, H - M, y.0);
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4}</text>", M - 4.0, M + 8.0, y.1);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let mut svg = String::new();
    let sx = |x: f64, r: (f64, f64)| M + (x - r.0) / (r.1 - r.0) * (W - 2.0 * M);
    let sy = |y: f64, r: (f64, f64)| H - M - (y - r.0) / (r.1 - r.0) * (H - 2.0 * M);
    match plot {
        Plot::Lines { title, xlabel, ylabel, series } => {
            let xr = range(series.iter().flatten().map(|p| p.0));
            let yr = range(series.iter().flatten().map(|p| p.1));
            frame(&mut svg, title, xlabel, ylabel, xr, yr);
            for (i, s) in series.iter().enumerate() {
                let pts: Vec<String> = s
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x, xr), sy(y, yr)))
                    .collect();
                let _ = writeln!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>",
                    COLORS[i % COLORS.len()],
                    pts.join(" ")
                );
            }
        }
        Plot::Bars { title, xlabel, bars } => {
            let xr = range(bars.iter().flat_map(|b| [b.0, b.1]));
            let yr = (0.0, bars.len().max(1) as f64);
            frame(&mut svg, title, xlabel, "band", xr, yr);
            let h = (H - 2.0 * M) / yr.1;
            for (i, &(lo, hi)) in bars.iter().enumerate() {
                let _ = writeln!(
                    svg,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    sx(lo, xr),
                    sy(i as f64 + 0.85, yr),
                    (sx(hi, xr) - sx(lo, xr)).max(0.5),
                    0.7 * h,
                    COLORS[i % COLORS.len()]
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
