//! Minimal deterministic SVG charts: fixed canvas, fixed palette, two
//! decimal places, no timestamps.

use std::fmt::Write;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, ys: impl Iterator<Item = f64>) -> Self {
        let (mut y0, mut y1) = ys
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        y0 = y0.min(0.0);
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let x1 = if x1 - x0 < 1e-12 { x0 + 1.0 } else { x1 };
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str, fr: &Frame, x_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, esc(title));
    let (bx, by) = (HEIGHT - BOTTOM, WIDTH - RIGHT);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{bx}" x2="{by}" y2="{bx}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bx}" stroke="black"/>"#);
    for k in 0..=4 {
        let v = fr.y0 + (fr.y1 - fr.y0) * k as f64 / 4.0;
        let y = fr.py(v);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 8.0,
        esc(x_label)
    );
    s
}

fn legend(s: &mut String, names: &[&str]) {
    for (k, name) in names.iter().enumerate() {
        let x = LEFT + 8.0 + 120.0 * k as f64;
        let c = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{c}"/>"#, TOP - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 14.0, TOP + 5.0, esc(name));
    }
}

/// One polyline per series over shared x values.
pub fn line_chart(title: &str, x_label: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let x0 = x.iter().copied().fold(f64::INFINITY, f64::min);
    let x1 = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fr = Frame::new(x0, x1, series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut s = open(title, &fr, x_label);
    for (k, (_, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .map(|(&a, &b)| format!("{:.2},{:.2}", fr.px(a), fr.py(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        );
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Box per x position from `[q05, q25, median, q75, q95]`.
pub fn box_chart(title: &str, x_label: &str, rows: &[(f64, [f64; 5])]) -> String {
    let x0 = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min) - 0.5;
    let x1 = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let fr = Frame::new(x0, x1, rows.iter().flat_map(|r| r.1));
    let mut s = open(title, &fr, x_label);
    let half = 0.35 * (fr.px(1.0) - fr.px(0.0)).abs().min(20.0);
    for (x, q) in rows {
        let cx = fr.px(*x);
        let _ = writeln!(
            s,
            r##"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="#444"/>"##,
            fr.py(q[0]),
            fr.py(q[4])
        );
        let (top, bot) = (fr.py(q[3]), fr.py(q[1]));
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.4" stroke="{}"/>"#,
            cx - half,
            2.0 * half,
            (bot - top).max(0.0),
            PALETTE[0],
            PALETTE[0]
        );
        let m = fr.py(q[2]);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{m:.2}" x2="{:.2}" y2="{m:.2}" stroke="{}" stroke-width="1.5"/>"#,
            cx - half,
            cx + half,
            PALETTE[1]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bars: one group per category, one bar per series.
pub fn bar_chart(title: &str, x_label: &str, categories: &[String], series: &[(&str, Vec<f64>)]) -> String {
    let n = categories.len().max(1) as f64;
    let fr = Frame::new(0.0, n, series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut s = open(title, &fr, x_label);
    let group = fr.px(1.0) - fr.px(0.0);
    let bar = 0.8 * group / series.len().max(1) as f64;
    for (c, name) in categories.iter().enumerate() {
        let gx = fr.px(c as f64) + 0.1 * group;
        for (k, (_, vals)) in series.iter().enumerate() {
            let v = vals[c];
            let (y, base) = (fr.py(v.max(fr.y0)), fr.py(fr.y0.max(0.0)));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{bar:.2}" height="{:.2}" fill="{}"/>"#,
                gx + bar * k as f64,
                y.min(base),
                (base - y).abs(),
                PALETTE[k % PALETTE.len()]
            );
        }
        if categories.len() <= 40 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                fr.px(c as f64 + 0.5),
                HEIGHT - BOTTOM + 14.0,
                esc(name)
            );
        }
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_input_same_bytes() {
        let x = [0.0, 1.0, 2.0];
        let a = line_chart("t", "x", &x, &[("a", vec![0.0, 0.5, 1.0])]);
        let b = line_chart("t", "x", &x, &[("a", vec![0.0, 0.5, 1.0])]);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
    }

    #[test]
    fn escapes_text() {
        let s = bar_chart("a<b", "x", &["&".into()], &[("s", vec![1.0])]);
        assert!(s.contains("a&lt;b") && s.contains("&amp;"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let s = line_chart("flat", "x", &[0.0, 0.0], &[("a", vec![0.0, 0.0])]);
        assert!(!s.contains("NaN") && !s.contains("inf"));
    }
}
