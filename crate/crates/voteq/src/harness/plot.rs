//! Hand-rolled SVG learning-curve plots: one chart per environment, one
//! polyline per agent (the mean sampled EMA curve), with axes and legend.

use super::logio::fmt_float;
use super::metric::{sample_points, AgentCurve};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(value: f64) -> String {
    let text = format!("{value:.4}");
    let trimmed = text.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

/// Renders one environment's curves as a standalone SVG document.
pub fn learning_curve_svg(env: &str, curves: &[&AgentCurve]) -> String {
    let settings = curves
        .first()
        .map(|c| c.settings)
        .unwrap_or_default();
    let points = sample_points(&settings);
    let x_max = points.last().copied().unwrap_or(1) as f64;

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for curve in curves {
        for &v in &curve.mean_curve {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |step: f64| MARGIN_LEFT + plot_w * (step / x_max);
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo));

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{} — mean EMA of episode returns (coeff {})</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        escape(env),
        fmt_float(settings.ema_coeff),
    );

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#333\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"#333\"/>\n",
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h,
    ));

    // Ticks and grid.
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let x = MARGIN_LEFT + plot_w * frac;
        let step = x_max * frac;
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"#333\"/>\n\
             <text x=\"{x}\" y=\"{ty}\" text-anchor=\"middle\">{}</text>\n",
            tick_label(step),
            b = MARGIN_TOP + plot_h,
            b2 = MARGIN_TOP + plot_h + 5.0,
            ty = MARGIN_TOP + plot_h + 20.0,
        ));
        let v = y_lo + (y_hi - y_lo) * frac;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{y}\" x2=\"{r}\" y2=\"{y}\" stroke=\"#ddd\"/>\n\
             <text x=\"{tx}\" y=\"{lb}\" text-anchor=\"end\">{}</text>\n",
            tick_label(v),
            l = MARGIN_LEFT,
            r = MARGIN_LEFT + plot_w,
            tx = MARGIN_LEFT - 8.0,
            lb = y + 4.0,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">global step</text>\n",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 14.0,
    ));

    // Curves and legend.
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .zip(&curve.mean_curve)
            .map(|(&p, &v)| format!("{:.2},{:.2}", x_of(p as f64), y_of(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            path.join(" ")
        ));
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{lx2}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\" >{} ({})</text>\n",
            escape(&curve.agent),
            fmt_float(curve.score),
            lx = WIDTH - MARGIN_RIGHT + 12.0,
            lx2 = WIDTH - MARGIN_RIGHT + 34.0,
            tx = WIDTH - MARGIN_RIGHT + 40.0,
            ty = ly + 4.0,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::MetricSettings;

    fn curve(agent: &str, values: Vec<f64>) -> AgentCurve {
        AgentCurve {
            agent: agent.into(),
            env: "e".into(),
            score: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            score_step: 100,
            stderr_at_peak: 0.0,
            seeds: 1,
            mean_curve: values,
            settings: MetricSettings {
                ema_coeff: 0.9,
                sample_interval: 100,
                sample_count: 4,
            },
        }
    }

    #[test]
    fn svg_contains_curves_axes_and_legend() {
        let a = curve("alpha", vec![0.0, 0.25, 0.5, 0.75]);
        let b = curve("beta", vec![0.5, 0.5, 0.5, 0.5]);
        let svg = learning_curve_svg("corridor", &[&a, &b]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("alpha (0.75)"));
        assert!(svg.contains("beta (0.5)"));
        assert!(svg.contains("global step"));
        assert!(svg.contains("corridor"));
        assert!(svg.contains("coeff 0.9"));
    }

    #[test]
    fn names_are_xml_escaped() {
        let a = curve("a<b>&\"c\"", vec![0.1, 0.2, 0.3, 0.4]);
        let b = curve("plain", vec![0.0; 4]);
        let svg = learning_curve_svg("env<&>", &[&a, &b]);
        assert!(svg.contains("a&lt;b&gt;&amp;&quot;c&quot;"));
        assert!(svg.contains("env&lt;&amp;&gt;"));
        assert!(!svg.contains("env<&>"));
    }

    #[test]
    fn flat_curves_still_produce_a_finite_viewport() {
        let a = curve("flat", vec![0.5; 4]);
        let b = curve("flat2", vec![0.5; 4]);
        let svg = learning_curve_svg("e", &[&a, &b]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn tick_labels_trim_trailing_zeros() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(200000.0), "200000");
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(0.1235), "0.1235");
    }
}
