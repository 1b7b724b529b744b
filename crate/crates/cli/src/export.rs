//! File formats: plain-text matrices, CSV tables and SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use boundary_regulation::linalg::{Complex64, ComplexMatrix};

/// Header line `rows cols complex`, then one line per row of `re im` pairs.
/// Numbers use the shortest representation that round-trips exactly.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {} complex\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|z| format!("{:e} {:e}", z.re, z.im)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut tokens = text.split_whitespace();
    let mut header = || tokens.next().context("truncated matrix header");
    let rows: usize = header()?.parse().context("matrix row count")?;
    let cols: usize = header()?.parse().context("matrix column count")?;
    let flag = header()?;
    ensure!(flag == "complex" || flag == "real", "unknown matrix flag {flag:?}");
    let per_entry = if flag == "complex" { 2 } else { 1 };
    let values: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().with_context(|| format!("bad matrix entry {t:?}")))
        .collect::<Result<_>>()?;
    if values.len() != rows * cols * per_entry {
        bail!("matrix of shape {rows}x{cols} needs {} numbers, found {}", rows * cols * per_entry, values.len());
    }
    Ok(ComplexMatrix::from_row_iterator(
        rows,
        cols,
        values.chunks(per_entry).map(|c| Complex64::new(c[0], c.get(1).copied().unwrap_or(0.0))),
    ))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, format_matrix(m)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("in {}", path.display()))
}

/// Writes a CSV table. Empty cells encode missing values.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(header)?;
    for row in rows {
        ensure!(row.len() == header.len(), "CSV row has {} cells for {} columns", row.len(), header.len());
        writer.write_record(row.iter().map(|cell| cell.map(|v| format!("{v:e}")).unwrap_or_default()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a CSV table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| if cell.is_empty() { Ok(None) } else { cell.parse().map(Some) })
            .collect::<std::result::Result<Vec<_>, _>>()
            .context("non-numeric CSV cell")?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// One named curve of a line plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Minimal SVG line plot; `log_y` plots `log10 y` and drops nonpositive
/// values.
pub fn line_plot(title: &str, x_label: &str, series: &[Series], log_y: bool) -> String {
    let transform = |y: f64| if log_y { (y > 0.0).then(|| y.log10()) } else { Some(y) };
    let curves: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter_map(|&(x, y)| transform(y).map(|ty| (x, ty))).collect())
        .collect();
    let all = curves.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        svg,
        r#"<polyline points="{m},{t} {m},{b} {r},{b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let y_name = if log_y { "log10" } else { "" };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12">{y_name} {y1:.3}</text>"#, 4.0, MARGIN);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12">{y_name} {y0:.3}</text>"#, 4.0, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12">{x0:.2}</text>"#, MARGIN, HEIGHT - MARGIN + 18.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{x1:.2}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    for (i, (s, curve)) in series.iter().zip(&curves).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
