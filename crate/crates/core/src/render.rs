//! Self-contained SVG line plots of control charts.

use std::fmt::Write as _;

use crate::charts::{ChartPoint, ControlChart};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the plotted series, both limit lines, a marker at every signal
/// and a dotted line at the end of Phase I. `times` labels the first and
/// last ticks when given.
pub fn chart_svg(chart: &ControlChart, title: &str, times: Option<&[String]>) -> String {
    let pts = &chart.points;
    let finite = |x: f64| x.is_finite();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in pts {
        for v in [p.value, p.lcl, p.ucl] {
            if finite(v) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let n = pts.len().max(2);
    let x = |t: usize| MARGIN + (t as f64 - 1.0) / (n as f64 - 1.0) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);
    let line = |f: &dyn Fn(&ChartPoint) -> f64| -> String {
        pts.iter()
            .map(|p| format!("{:.2},{:.2}", x(p.t), y(f(p))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for v in [lo + pad, hi - pad] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{:.4}</text>"#,
            MARGIN - 4.0,
            y(v) + 4.0,
            v
        );
    }
    if let Some(last) = pts.last() {
        let label = |t: usize| {
            times
                .and_then(|ts| ts.get(t - 1).cloned())
                .unwrap_or_else(|| t.to_string())
        };
        for t in [1, last.t] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                x(t),
                HEIGHT - MARGIN + 16.0,
                escape(&label(t))
            );
        }
    }
    let m = chart.base.m;
    if m < pts.len() {
        let xm = x(m) + 0.5 * (x(m + 1) - x(m));
        let _ = writeln!(
            svg,
            r##"<line x1="{xm:.2}" y1="{MARGIN}" x2="{xm:.2}" y2="{}" stroke="#999" stroke-dasharray="2,3"/>"##,
            HEIGHT - MARGIN
        );
    }
    for limit in [line(&|p| p.ucl), line(&|p| p.lcl)] {
        let _ = writeln!(
            svg,
            r##"<polyline points="{limit}" fill="none" stroke="#c33" stroke-dasharray="6,4"/>"##
        );
    }
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#246" stroke-width="1.5"/>"##,
        line(&|p| p.value)
    );
    for p in pts.iter().filter(|p| p.signal) {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#d22"/>"##,
            x(p.t),
            y(p.value)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::shewhart;

    #[test]
    fn svg_has_markers_for_signals() {
        let c = shewhart(&[0.0, 1.0, 0.0, 1.0, 9.0, 0.5, -9.0], 4).unwrap();
        let svg = chart_svg(&c, "P<1,1>", None);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("P&lt;1,1&gt;"));
    }
}
