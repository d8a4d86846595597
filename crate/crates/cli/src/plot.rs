//! Minimal SVG emitters: panelled heatmaps and log-log line plots.

use std::fmt::Write as _;

/// One heatmap panel; `cells` is row-major with `side * side` entries.
#[derive(Debug, Clone)]
pub struct HeatPanel {
    pub title: String,
    pub side: usize,
    pub cells: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn colour(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let k = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Panels laid out on a `rows x cols` grid, each with its own colour scale and
/// `(min, max)` written above it.
pub fn heatmap(title: &str, panels: &[HeatPanel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols);
    let (size, pad, head) = (260.0, 30.0, 44.0);
    let width = cols as f64 * (size + pad) + pad;
    let height = rows as f64 * (size + pad + head) + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, width / 2.0, escape(title));
    for (k, p) in panels.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        let x0 = pad + c as f64 * (size + pad);
        let y0 = 40.0 + r as f64 * (size + pad + head);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            x0 + size / 2.0,
            y0 + 14.0,
            escape(&p.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">({}, {})</text>"#,
            x0 + size / 2.0,
            y0 + 30.0,
            fmt_num(p.min),
            fmt_num(p.max)
        );
        let top = y0 + head;
        let cell = size / p.side.max(1) as f64;
        let span = p.max - p.min;
        let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
        for (idx, v) in p.cells.iter().enumerate() {
            let (i, j) = (idx / p.side, idx % p.side);
            let t = if span > 0.0 { (v - p.min) / span } else { 0.5 };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x0 + j as f64 * cell,
                top + i as f64 * cell,
                cell + 0.05,
                cell + 0.05,
                colour(t)
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black" stroke-width="0.5"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    (a..=b).map(|e| 10f64.powi(e)).collect()
}

/// Log-log line plot; non-positive points are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 80.0, 170.0, 40.0, 50.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, (w - mr + ml) / 2.0, escape(title));
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x_lo, x_hi) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, 0.0, |p| p.0));
    let (y_lo, y_hi) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, 0.0, |p| p.1));
    let xt = log_ticks(x_lo, x_hi);
    let yt = log_ticks(y_lo, y_hi);
    let (lx0, lx1) = (xt[0].log10(), xt[xt.len() - 1].log10().max(xt[0].log10() + 1.0));
    let (ly0, ly1) = (yt[0].log10(), yt[yt.len() - 1].log10().max(yt[0].log10() + 1.0));
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let px = |x: f64| ml + (x.log10() - lx0) / (lx1 - lx0) * pw;
    let py = |y: f64| mt + ph - (y.log10() - ly0) / (ly1 - ly0) * ph;

    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in &xt {
        let x = px(*t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{mt}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, mt + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, mt + ph + 16.0, fmt_num(*t));
    }
    for t in &yt {
        let y = py(*t);
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, ml + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, ml - 6.0, y + 4.0, fmt_num(*t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, ml + pw / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(y_label)
    );
    for (k, se) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let dash = if se.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = se
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.6"{dash}/>"#, path.join(" "));
        for p in &path {
            let (x, y) = p.split_once(',').expect("formatted point");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{colour}"/>"#);
        }
        let ly = mt + 14.0 + 18.0 * k as f64;
        let lx = ml + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, lx + 28.0, ly + 4.0, escape(&se.label));
    }
    s.push_str("</svg>\n");
    s
}
