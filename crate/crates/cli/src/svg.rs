//! Minimal SVG renderings. The CSV files are the data of record; these are
//! for a quick look.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    s
}

fn frame(s: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" text-anchor="middle">{}</text>"#, H - MARGIN + 16.0, tick(x0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W - MARGIN, H - MARGIN + 16.0, tick(x1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, H - MARGIN, tick(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 4.0, tick(y1));
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn sx(x: f64, (x0, x1): (f64, f64)) -> f64 {
    MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN)
}

fn sy(y: f64, (y0, y1): (f64, f64)) -> f64 {
    H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN)
}

/// Line plot; with `log_y` the absolute values are drawn on a log scale.
/// Non-finite samples break the line.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let tf = |y: f64| if log_y { y.abs().log10() } else { y };
    let xr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| tf(p.1))));
    let ylabel = if log_y { format!("log10 |{ylabel}|") } else { ylabel.to_string() };
    let mut s = header(title, xlabel, &ylabel);
    frame(&mut s, xr, yr);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &ser.points {
            let y = tf(y);
            if !x.is_finite() || !y.is_finite() {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            let _ = write!(path, "{cmd}{:.2},{:.2} ", sx(x, xr), sy(y, yr));
            pen_down = true;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.trim_end());
        let ly = MARGIN + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            W - MARGIN - 150.0,
            escape(ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of `log10 |z|` on a regular grid, `values[iy][ix]`, with an
/// optional overlay curve. NaN cells are left blank.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    overlay: &[(f64, f64)],
) -> String {
    let xr = bounds(xs.iter().copied());
    let yr = bounds(ys.iter().copied());
    let logs = values.iter().flatten().map(|v| v.abs().log10());
    let (lo, hi) = bounds(logs);
    let mut s = header(title, xlabel, ylabel);
    let cw = (W - 2.0 * MARGIN) / xs.len().max(1) as f64;
    let ch = (H - 2.0 * MARGIN) / ys.len().max(1) as f64;
    for (iy, row) in values.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            let l = v.abs().log10();
            if !l.is_finite() {
                continue;
            }
            let t = ((l - lo) / (hi - lo)).clamp(0.0, 1.0);
            let shade = (255.0 * t).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{},{})"/>"#,
                MARGIN + ix as f64 * cw,
                H - MARGIN - (iy as f64 + 1.0) * ch,
                cw + 0.05,
                ch + 0.05,
                (255.0 * (1.0 - t) * 0.6) as u8,
                255 - shade
            );
        }
    }
    frame(&mut s, xr, yr);
    if !overlay.is_empty() {
        let mut path = String::new();
        for (i, &(x, y)) in overlay.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, sx(x, xr), sy(y, yr));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="white" stroke-dasharray="4 3"/>"#, path.trim_end());
    }
    s.push_str("</svg>\n");
    s
}
