//! Static SVG figures: traces as polylines over the real axis.

use std::fmt::Write as _;

use crate::io::format_number;
use crate::trace::Trace;

/// Plotted region `[x_min, x_max] x [0, y_max]` and styling.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    /// In plot units.
    pub stroke_width: f64,
    /// Rendered width in pixels; the height follows the aspect ratio.
    pub pixel_width: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            y_max: 2.0,
            stroke_width: 0.01,
            pixel_width: 800.0,
        }
    }
}

impl SvgOptions {
    /// Region enclosing all traces with a 10% margin.
    pub fn fitted(traces: &[&Trace]) -> Self {
        let pts = traces.iter().flat_map(|t| t.points());
        let (mut lo, mut hi, mut top) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for z in pts {
            lo = lo.min(z.re);
            hi = hi.max(z.re);
            top = top.max(z.im);
        }
        if !lo.is_finite() {
            return Self::default();
        }
        let span = (hi - lo).max(top).max(1e-3);
        let pad = 0.1 * span;
        Self {
            x_min: lo - pad,
            x_max: hi + pad,
            y_max: top + pad,
            stroke_width: span / 300.0,
            ..Self::default()
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One polyline per trace plus the real axis. The y axis points up.
pub fn render(traces: &[&Trace], opts: &SvgOptions) -> String {
    let w = opts.x_max - opts.x_min;
    let h = opts.y_max;
    let f = format_number;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        f(opts.x_min),
        f(-h),
        f(w),
        f(h),
        f(opts.pixel_width),
        f((opts.pixel_width * h / w).round())
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-width="{}">"#, f(opts.stroke_width));
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="0" x2="{}" y2="0" stroke="#000000"/>"##,
        f(opts.x_min),
        f(opts.x_max)
    );
    for (i, tr) in traces.iter().enumerate() {
        let points: Vec<String> = tr.points().map(|z| format!("{},{}", f(z.re), f(z.im))).collect();
        let _ = writeln!(
            s,
            r#"<polyline stroke="{}" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            points.join(" ")
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
