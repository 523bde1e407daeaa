//! Self-contained SVG line/scatter charts. No plotting dependency: the
//! emitted files are a pure function of the data handed in, so they can
//! be regenerated offline from the CSVs.

use crate::gformat::format_g;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 62.0;
/// Polylines are thinned to at most this many points.
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub enum SeriesKind {
    Line,
    Scatter,
}

pub struct Series {
    pub label: String,
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
}

pub fn render_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| {
        let px = MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let py = MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;
        (px, py)
    };

    let mut out = String::with_capacity(16 * 1024);
    out.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    out.push('\n');
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push('\n');
    out.push_str(&format!(
        r#"<text x="{}" y="26" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    ));
    out.push('\n');

    // Axes box and grid.
    out.push_str(&format!(
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>"#
    ));
    out.push('\n');
    for tick in ticks(x_min, x_max) {
        let (px, _) = to_px(tick, y_min);
        out.push_str(&format!(
            r#"<line x1="{px:.1}" y1="{MARGIN_TOP}" x2="{px:.1}" y2="{:.1}" stroke="#ddd" stroke-width="0.6"/>"#,
            MARGIN_TOP + plot_h
        ));
        out.push_str(&format!(
            r#"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h + 18.0,
            format_g(tick, 4)
        ));
        out.push('\n');
    }
    for tick in ticks(y_min, y_max) {
        let (_, py) = to_px(x_min, tick);
        out.push_str(&format!(
            r#"<line x1="{MARGIN_LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd" stroke-width="0.6"/>"#,
            MARGIN_LEFT + plot_w
        ));
        out.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            format_g(tick, 4)
        ));
        out.push('\n');
    }
    out.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    ));
    out.push_str(&format!(
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));
    out.push('\n');

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        match s.kind {
            SeriesKind::Line => {
                let stride = s.points.len().div_ceil(MAX_POINTS).max(1);
                let mut path = String::new();
                for (j, &(x, y)) in s.points.iter().step_by(stride).enumerate() {
                    if !x.is_finite() || !y.is_finite() {
                        continue;
                    }
                    let (px, py) = to_px(x, y);
                    path.push_str(if j == 0 { "M" } else { "L" });
                    path.push_str(&format!("{px:.1},{py:.1} "));
                }
                out.push_str(&format!(
                    r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.3"/>"#
                ));
            }
            SeriesKind::Scatter => {
                for &(x, y) in &s.points {
                    if !x.is_finite() || !y.is_finite() {
                        continue;
                    }
                    let (px, py) = to_px(x, y);
                    out.push_str(&format!(
                        r#"<circle cx="{px:.1}" cy="{py:.1}" r="2.6" fill="{color}" fill-opacity="0.65"/>"#
                    ));
                }
            }
        }
        out.push('\n');
    }

    // Legend (skip when every label is empty).
    if series.iter().any(|s| !s.label.is_empty()) {
        let legend_x = MARGIN_LEFT + plot_w - 150.0;
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = MARGIN_TOP + 14.0 + 18.0 * i as f64;
            out.push_str(&format!(
                r#"<rect x="{legend_x}" y="{:.1}" width="12" height="12" fill="{color}"/>"#,
                y - 10.0
            ));
            out.push_str(&format!(
                r#"<text x="{:.1}" y="{y:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
                legend_x + 18.0,
                escape(&s.label)
            ));
            out.push('\n');
        }
    }

    out.push_str("</svg>\n");
    out
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Round tick positions on a 1-2-5 ladder, 4 to 8 of them.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw_step = span / 6.0;
    let magnitude = 10f64.powf(raw_step.abs().log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&s| span / s <= 8.0)
        .unwrap_or(magnitude * 10.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}


fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
