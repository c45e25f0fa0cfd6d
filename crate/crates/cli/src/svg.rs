//! Minimal SVG plots: heatmap, bar chart, line plot, points with error bars.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_CELLS: usize = 128;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Viridis, sampled at five stops.
const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick positions covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span.is_finite() && span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    right: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self {
            x: pad(x),
            y: pad(y),
            right: RIGHT,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - self.right)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, x1) = (LEFT, WIDTH - self.right);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#000"/>"##,
            x1 - x0,
            y0 - y1
        );
        for t in ticks(self.x.0, self.x.1) {
            let p = self.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{p:.1}" y1="{y0:.1}" x2="{p:.1}" y2="{:.1}" stroke="#000"/><text x="{p:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"##,
                y0 + 5.0,
                y0 + 20.0,
                label(t)
            );
        }
        for t in ticks(self.y.0, self.y.1) {
            let p = self.py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{p:.1}" x2="{x0:.1}" y2="{p:.1}" stroke="#000"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                p + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle" font-size="14">{}</text>"#,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }
}

fn open(title: &str, stamp: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    if let Some(s) = stamp {
        let _ = writeln!(out, "<!-- {} -->", escape(s));
    }
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    out
}

fn close(mut out: String) -> String {
    out.push_str("</svg>\n");
    out
}

/// Peak-normalized heatmap of a row-major n×n array on ±`half_range`.
/// Rows run along x (signal), columns along y (idler). Block-averaged down
/// to at most 128 cells per axis.
pub fn heatmap(
    values: &[f64],
    n: usize,
    half_range: f64,
    title: &str,
    x_label: &str,
    y_label: &str,
    stamp: Option<&str>,
) -> String {
    let block = n.div_ceil(MAX_CELLS).max(1);
    let cells = n.div_ceil(block);
    let mut coarse = vec![0.0; cells * cells];
    for cj in 0..cells {
        for ck in 0..cells {
            let (mut sum, mut count) = (0.0, 0.0);
            for j in cj * block..((cj + 1) * block).min(n) {
                for k in ck * block..((ck + 1) * block).min(n) {
                    sum += values[j * n + k];
                    count += 1.0;
                }
            }
            coarse[cj * cells + ck] = sum / count;
        }
    }
    let peak = coarse.iter().copied().fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };

    let mut frame = Frame::new((-half_range, half_range), (-half_range, half_range));
    frame.right = RIGHT + 60.0;
    let mut out = open(title, stamp);
    let step = 2.0 * half_range / cells as f64;
    let w = frame.px(-half_range + step) - frame.px(-half_range);
    let h = frame.py(-half_range) - frame.py(-half_range + step);
    for cj in 0..cells {
        for ck in 0..cells {
            let x = frame.px(-half_range + cj as f64 * step);
            let y = frame.py(-half_range + (ck + 1) as f64 * step);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                w + 0.05,
                h + 0.05,
                color(coarse[cj * cells + ck] * scale)
            );
        }
    }
    frame.axes(&mut out, x_label, y_label);

    let bar_x = WIDTH - RIGHT - 40.0;
    let (top, bottom) = (TOP, HEIGHT - BOTTOM);
    let steps = 50;
    for s in 0..steps {
        let t = s as f64 / (steps - 1) as f64;
        let y = bottom - (s + 1) as f64 * (bottom - top) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x:.1}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            (bottom - top) / steps as f64 + 0.05,
            color(t)
        );
    }
    for (t, y) in [(0.0, bottom), (0.5, (top + bottom) / 2.0), (1.0, top)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            bar_x + 20.0,
            y + 4.0,
            label(t)
        );
    }
    close(out)
}

/// Bars at x = 1, 2, ….
pub fn bar_chart(values: &[f64], title: &str, x_label: &str, y_label: &str, stamp: Option<&str>) -> String {
    let top = values.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let frame = Frame::new((0.5, values.len() as f64 + 0.5), (0.0, top * 1.1));
    let mut out = open(title, stamp);
    let width = frame.px(1.35) - frame.px(0.65);
    for (i, v) in values.iter().enumerate() {
        let x = frame.px(i as f64 + 1.0) - width / 2.0;
        let y = frame.py(*v);
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{width:.1}" height="{:.1}" fill="{}"/>"#,
            frame.py(0.0) - y,
            PALETTE[0]
        );
    }
    frame.axes(&mut out, x_label, y_label);
    close(out)
}

pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn line_plot(series: &[Series<'_>], title: &str, x_label: &str, y_label: &str, stamp: Option<&str>) -> String {
    let x = bounds(series.iter().flat_map(|s| s.x.iter()));
    let y = bounds(series.iter().flat_map(|s| s.y.iter()));
    let frame = Frame::new(x, (y.0.min(0.0), y.1 * 1.05));
    let mut out = open(title, stamp);
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .x
            .iter()
            .zip(s.y)
            .map(|(&a, &b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    frame.axes(&mut out, x_label, y_label);
    close(out)
}

/// Markers joined by a line, with symmetric error bars where given.
pub fn error_bar_plot(
    x: &[f64],
    y: &[Option<f64>],
    err: &[Option<f64>],
    title: &str,
    x_label: &str,
    y_label: &str,
    stamp: Option<&str>,
) -> String {
    let lows: Vec<f64> = y
        .iter()
        .zip(err)
        .filter_map(|(v, e)| v.map(|v| v - e.unwrap_or(0.0)))
        .collect();
    let highs: Vec<f64> = y
        .iter()
        .zip(err)
        .filter_map(|(v, e)| v.map(|v| v + e.unwrap_or(0.0)))
        .collect();
    let (lo, _) = bounds(lows.iter());
    let (_, hi) = bounds(highs.iter());
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let pad = 0.05 * (hi - lo).max(1e-9);
    let frame = Frame::new(bounds(x.iter()), (lo - pad, hi + pad));
    let mut out = open(title, stamp);
    let points: Vec<String> = x
        .iter()
        .zip(y)
        .filter_map(|(&a, b)| b.map(|b| format!("{:.2},{:.2}", frame.px(a), frame.py(b))))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
        PALETTE[0],
        points.join(" ")
    );
    for ((&a, b), e) in x.iter().zip(y).zip(err) {
        let Some(b) = *b else { continue };
        let (cx, cy) = (frame.px(a), frame.py(b));
        if let Some(e) = *e {
            let (t, u) = (frame.py(b + e), frame.py(b - e));
            let _ = writeln!(
                out,
                r##"<path d="M{cx:.2} {t:.2}V{u:.2}M{:.2} {t:.2}H{:.2}M{:.2} {u:.2}H{:.2}" stroke="#000" fill="none"/>"##,
                cx - 4.0,
                cx + 4.0,
                cx - 4.0,
                cx + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{}"/>"#,
            PALETTE[0]
        );
    }
    frame.axes(&mut out, x_label, y_label);
    close(out)
}
