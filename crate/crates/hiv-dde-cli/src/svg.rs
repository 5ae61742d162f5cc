//! Minimal SVG polyline plots (no plotting dependency).
//!
//! Each plot is a fixed 800x500 viewBox with axis ticks at round numbers, a
//! single polyline, and text labels. The phase plot projects the (x, p, y)
//! coordinates obliquely onto the plane.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

/// Chooses a round tick step covering `span` with 4-10 ticks.
fn tick_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let frac = raw / mag;
    let nice = if frac < 1.5 {
        1.0
    } else if frac < 3.5 {
        2.0
    } else if frac < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn data_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 * (1.0 + hi.abs()) {
        // Flat series: pad so the line sits mid-plot.
        let pad = 0.5 * (1.0 + hi.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn polyline(points: &[(f64, f64)]) -> String {
    let mut s = String::with_capacity(points.len() * 16);
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

/// A single-series line plot of `ys` against `xs`.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64]) -> String {
    let (x_lo, x_hi) = data_range(xs);
    let (y_lo, y_hi) = data_range(ys);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.0}\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{title}</text>",
        WIDTH / 2.0
    );
    // Axes.
    let _ = writeln!(
        out,
        "  <line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.2}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{MARGIN_L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    // Ticks.
    let xt = tick_step(x_hi - x_lo);
    let mut t = (x_lo / xt).ceil() * xt;
    while t <= x_hi + 1e-9 * xt {
        let px = sx(t);
        let _ = writeln!(
            out,
            "  <line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{t}</text>",
            HEIGHT - MARGIN_B + 18.0
        );
        t += xt;
    }
    let yt = tick_step(y_hi - y_lo);
    let mut t = (y_lo / yt).ceil() * yt;
    while t <= y_hi + 1e-9 * yt {
        let py = sy(t);
        let _ = writeln!(
            out,
            "  <line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_L}\" y2=\"{py:.2}\" stroke=\"black\"/>",
            MARGIN_L - 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{t:.6}</text>",
            MARGIN_L - 8.0,
            py + 4.0
        );
        t += yt;
    }
    // Axis labels.
    let _ = writeln!(
        out,
        "  <text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>",
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"18\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.0})\">{y_label}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    // Data.
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (sx(x), sy(y))).collect();
    let _ = writeln!(
        out,
        "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"{}\"/>",
        polyline(&pts)
    );
    out.push_str("</svg>\n");
    out
}

/// Oblique projection of a 3-D curve onto the plane:
/// `(u, v) = (a + 0.5 c cos 45deg, b + 0.5 c sin 45deg)`.
pub fn oblique_plot(title: &str, a: &[f64], b: &[f64], c: &[f64]) -> String {
    let (a_lo, a_hi) = data_range(a);
    let (b_lo, b_hi) = data_range(b);
    let (c_lo, c_hi) = data_range(c);
    let f = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    let us: Vec<f64> = a
        .iter()
        .zip(c)
        .map(|(&ai, &ci)| (ai - a_lo) / (a_hi - a_lo) + f * (ci - c_lo) / (c_hi - c_lo))
        .collect();
    let vs: Vec<f64> = b
        .iter()
        .zip(c)
        .map(|(&bi, &ci)| (bi - b_lo) / (b_hi - b_lo) + f * (ci - c_lo) / (c_hi - c_lo))
        .collect();
    line_plot(title, "x + depth(y)", "p + depth(y)", &us, &vs)
}
