//! Minimal SVG charts: an F1 curve with a ±1 std band and a 2-D query scatter.

use std::fmt::Write;

use c2lse::harness::CurvePoint;
use c2lse::problems::{GroundTruth, TruthLabel};
use c2lse::search::DomainBounds;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        MARGIN + (x - self.x0) / span * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let span = if self.y1 > self.y0 { self.y1 - self.y0 } else { 1.0 };
        H - MARGIN - (y - self.y0) / span * (H - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for i in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * i as f64 / 4.0;
            let fy = self.y0 + (self.y1 - self.y0) * i as f64 / 4.0;
            let (x, y) = (self.px(fx), self.py(fy));
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                b + 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
                b + 20.0,
                tick(fx)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#,
                l - 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
                l - 8.0,
                y + 4.0,
                tick(fy)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{xlabel}</text>"#,
            W / 2.0,
            H - 12.0
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
            H / 2.0,
            H / 2.0
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn open() -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n")
}

/// Mean macro-F1 against iteration with a shaded ±1 std band, clipped to [0, 1].
pub fn f1_curve(curve: &[CurvePoint], title: &str) -> String {
    let mut out = open();
    let last = curve.last().map_or(1, |p| p.iteration.max(1));
    let frame = Frame {
        x0: curve.first().map_or(0.0, |p| p.iteration as f64),
        x1: last as f64,
        y0: 0.0,
        y1: 1.0,
    };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="30" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    if !curve.is_empty() {
        let upper = curve.iter().map(|p| (p.iteration, (p.mean_f1 + p.std_f1).min(1.0)));
        let lower = curve.iter().rev().map(|p| (p.iteration, (p.mean_f1 - p.std_f1).max(0.0)));
        let band: Vec<String> = upper
            .chain(lower)
            .map(|(i, y)| format!("{:.2},{:.2}", frame.px(i as f64), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>"##,
            band.join(" ")
        );
        let line: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.2},{:.2}", frame.px(p.iteration as f64), frame.py(p.mean_f1)))
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
            line.join(" ")
        );
    }
    frame.axes(&mut out, "iteration", "macro F1");
    out.push_str("</svg>\n");
    out
}

/// Queries of one run over the truth grid coloured by label; marker shade
/// darkens with query order.
pub fn query_scatter(bounds: &DomainBounds, truth: &GroundTruth, queries: &[Vec<f64>], title: &str) -> String {
    let mut out = open();
    let frame = Frame {
        x0: bounds.lower()[0],
        x1: bounds.upper()[0],
        y0: bounds.lower()[1],
        y1: bounds.upper()[1],
    };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="30" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    // Cell size from the smallest positive coordinate gaps of the grid.
    let cell = |axis: usize| {
        let mut c: Vec<f64> = truth.points.iter().map(|p| p[axis]).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        let gap = c.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if gap.is_finite() {
            gap
        } else {
            frame_span(bounds, axis)
        }
    };
    let (cw, ch) = (cell(0), cell(1));
    let wpx = (frame.px(cw) - frame.px(0.0)).abs() + 0.5;
    let hpx = (frame.py(0.0) - frame.py(ch)).abs() + 0.5;
    out.push_str("<g stroke=\"none\">\n");
    for (p, label) in truth.points.iter().zip(&truth.labels) {
        let fill = match label {
            TruthLabel::Super => "#fdd0a2",
            TruthLabel::Sub => "#deebf7",
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{wpx:.2}" height="{hpx:.2}" fill="{fill}"/>"#,
            frame.px(p[0]) - wpx / 2.0,
            frame.py(p[1]) - hpx / 2.0
        );
    }
    out.push_str("</g>\n");
    let n = queries.len().max(1) as f64;
    for (i, q) in queries.iter().enumerate() {
        let shade = (200.0 * (1.0 - (i as f64 + 1.0) / n)) as u8;
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="rgb({shade},{shade},{shade})" stroke="black" stroke-width="0.5"/>"#,
            frame.px(q[0]),
            frame.py(q[1])
        );
    }
    frame.axes(&mut out, "x1", "x2");
    out.push_str("</svg>\n");
    out
}

fn frame_span(bounds: &DomainBounds, axis: usize) -> f64 {
    bounds.widths()[axis]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
