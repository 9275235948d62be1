//! Tiny deterministic SVG line charts for quick visual checks.
//!
//! Fixed canvas, fixed palette, coordinates rounded to hundredths of a
//! pixel: the same data always renders to the same bytes.

use crate::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;
const N_TICKS: usize = 5;
const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One named curve; `y` must match the shared x grid in length.
pub struct Trace<'a> {
    pub label: &'a str,
    pub y: &'a [f64],
}

/// Renders the traces over a shared x axis into a standalone SVG document.
pub fn line_chart(title: &str, x: &[f64], traces: &[Trace<'_>]) -> Result<String> {
    if x.is_empty() || traces.is_empty() {
        return Err(Error::InvalidParameter {
            field: "chart",
            message: "nothing to plot".into(),
        });
    }
    for t in traces {
        if t.y.len() != x.len() {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "trace '{}' has {} samples on a {}-point axis",
                    t.label,
                    t.y.len(),
                    x.len()
                ),
            });
        }
    }
    let finite = |vs: &[f64]| vs.iter().all(|v| v.is_finite());
    if !finite(x) || traces.iter().any(|t| !finite(t.y)) {
        return Err(Error::InvalidParameter {
            field: "chart",
            message: "non-finite sample".into(),
        });
    }

    let (x0, x1) = padded_range(x.iter().copied());
    let (y0, y1) = padded_range(traces.iter().flat_map(|t| t.y.iter().copied()));
    let px = |v: f64| MARGIN_LEFT + (v - x0) / (x1 - x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
    let py = |v: f64| HEIGHT - MARGIN_BOTTOM - (v - y0) / (y1 - y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

    let mut out = String::with_capacity(4096);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // axes
    let (bx, by) = (px(x0), py(y0));
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        px(x0), py(y1), bx, by
    ));
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        bx, by, px(x1), by
    ));
    for i in 0..N_TICKS {
        let f = i as f64 / (N_TICKS - 1) as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>\n\
             <text x=\"{0:.2}\" y=\"{3:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{4}</text>\n",
            px(xv), by, by + 5.0, by + 18.0, tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{1:.2}\" y1=\"{0:.2}\" x2=\"{2:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>\n\
             <text x=\"{3:.2}\" y=\"{4:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{5}</text>\n",
            py(yv), bx - 5.0, bx, bx - 8.0, py(yv) + 4.0, tick_label(yv)
        ));
    }

    for (k, t) in traces.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = x
            .iter()
            .zip(t.y)
            .map(|(&xv, &yv)| format!("{:.2},{:.2}", px(xv), py(yv)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 16.0 * k as f64;
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{2:.2}\" y2=\"{1:.2}\" stroke=\"{3}\" \
             stroke-width=\"1.5\"/>\n\
             <text x=\"{4:.2}\" y=\"{5:.2}\" font-family=\"sans-serif\" font-size=\"12\">{6}</text>\n",
            WIDTH - MARGIN_RIGHT - 150.0,
            ly,
            WIDTH - MARGIN_RIGHT - 126.0,
            color,
            WIDTH - MARGIN_RIGHT - 120.0,
            ly + 4.0,
            escape(t.label)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Range widened by 5% on each side; degenerate ranges open up to unit
/// width so flat traces still render mid-chart.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
