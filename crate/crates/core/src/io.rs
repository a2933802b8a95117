//! Output helpers: text files and a minimal SVG line plot.

use crate::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Write `text` to `dir/name`, creating `dir` if needed.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

/// One curve of a plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Polylines with axes, tick labels and a legend.  With `log_y` the
/// ordinate is `log10(y)`; nonpositive values are dropped.
pub fn svg_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let (w, h) = (640.0, 420.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let tf = |y: f64| if log_y { if y > 0.0 { Some(y.log10()) } else { None } } else { Some(y) };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter_map(|&(x, y)| tf(y).filter(|v| v.is_finite() && x.is_finite()).map(|v| (x, v))).collect())
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-size="15" text-anchor="middle" font-family="sans-serif">{}</text>"#, w / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<path d="M{ml} {mt} L{ml} {} L{} {}" fill="none" stroke="black"/>"#,
        h - mb,
        w - mr,
        h - mb
    )
    .unwrap();
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let ylab = if log_y { format!("1e{fy:.1}") } else { format!("{fy:.3}") };
        writeln!(s, r#"<text x="{:.1}" y="{}" font-size="11" text-anchor="middle" font-family="sans-serif">{fx:.3}</text>"#, px(fx), h - mb + 16.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end" font-family="sans-serif">{ylab}</text>"#, ml - 6.0, py(fy) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle" font-family="sans-serif">{}</text>"#, w / 2.0, h - 12.0, escape(xlabel)).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(ylabel)
    )
    .unwrap();
    for (k, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" ")).unwrap();
        let ly = mt + 14.0 * k as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{ly:.1}" font-size="11" fill="{color}" text-anchor="end" font-family="sans-serif">{}</text>"#,
            w - mr - 4.0,
            escape(&ser.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
