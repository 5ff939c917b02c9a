//! Minimal hand-rolled log-log SVG plots: error curves over h or tau with
//! slope reference guides. No drawing dependency; the output is plain XML.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 54.0;

const PALETTE: [&str; 4] = ["#1f6fb2", "#c23b22", "#2e8540", "#7651a1"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// (scale, error) pairs; nonpositive or non-finite entries are skipped.
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct LogFrame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl LogFrame {
    fn from_points(pts: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x.log10());
            x1 = x1.max(x.log10());
            y0 = y0.min(y.log10());
            y1 = y1.max(y.log10());
        }
        // Pad by 8% of the span (at least a tenth of a decade) so markers
        // do not sit on the frame.
        let pad = |a: &mut f64, b: &mut f64| {
            let d = ((*b - *a) * 0.08).max(0.1);
            *a -= d;
            *b += d;
        };
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        LogFrame { x0, x1, y0, y1 }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        MARGIN_T + (self.y1 - y.log10()) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

/// Renders a log-log plot. `guides` lists slopes for dashed reference lines
/// anchored near the data; the classic convergence-plot slope triangles.
pub fn loglog_svg(title: &str, x_label: &str, series: &[Series], guides: &[f64]) -> String {
    let cleaned: Vec<Series> = series
        .iter()
        .map(|s| Series {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
                .collect(),
        })
        .collect();
    let all: Vec<(f64, f64)> = cleaned.iter().flat_map(|s| s.points.iter().copied()).collect();

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    if all.is_empty() {
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">no positive data to plot</text>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        out.push_str("</svg>\n");
        return out;
    }

    let frame = LogFrame::from_points(&all);
    let (plot_r, plot_b) = (WIDTH - MARGIN_R, HEIGHT - MARGIN_B);

    // Axes frame.
    out.push_str(&format!(
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#444\"/>\n",
        plot_r - MARGIN_L,
        plot_b - MARGIN_T
    ));

    // Decade grid lines and labels.
    let mut k = frame.x0.ceil() as i64;
    while (k as f64) <= frame.x1 {
        let x = frame.sx(10f64.powi(k as i32));
        out.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{MARGIN_T}\" x2=\"{x:.1}\" y2=\"{plot_b:.1}\" \
             stroke=\"#ddd\"/>\n"
        ));
        out.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">1e{k}</text>\n",
            plot_b + 16.0
        ));
        k += 1;
    }
    let mut k = frame.y0.ceil() as i64;
    while (k as f64) <= frame.y1 {
        let y = frame.sy(10f64.powi(k as i32));
        out.push_str(&format!(
            "  <line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{plot_r:.1}\" y2=\"{y:.1}\" \
             stroke=\"#ddd\"/>\n"
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">1e{k}</text>\n",
            MARGIN_L - 6.0,
            y + 4.0
        ));
        k += 1;
    }
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        (MARGIN_L + plot_r) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    ));

    // Slope guides: dashed lines through the lower data corner.
    let (gx0, gy0) = (
        frame.x0 + 0.62 * (frame.x1 - frame.x0),
        frame.y0 + 0.12 * (frame.y1 - frame.y0),
    );
    let glen = 0.22 * (frame.x1 - frame.x0);
    for &slope in guides {
        let (xa, ya) = (10f64.powf(gx0), 10f64.powf(gy0));
        let (xb, yb) = (10f64.powf(gx0 + glen), 10f64.powf(gy0 + slope * glen));
        out.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#888\" \
             stroke-dasharray=\"5 4\"/>\n",
            frame.sx(xa),
            frame.sy(ya),
            frame.sx(xb),
            frame.sy(yb)
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"#666\">slope {slope}</text>\n",
            frame.sx(xb) + 4.0,
            frame.sy(yb)
        ));
    }

    // One polyline per series plus point markers and a legend entry.
    for (i, s) in cleaned.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", frame.sx(x), frame.sy(y)))
            .collect();
        out.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.join(" ")
        ));
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                frame.sx(x),
                frame.sy(y)
            ));
        }
        let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            MARGIN_L + 10.0,
            MARGIN_L + 34.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            MARGIN_L + 40.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Series> {
        vec![
            Series {
                label: "H1".to_string(),
                points: (0..4)
                    .map(|i| {
                        let h = 0.25 / f64::powi(2.0, i);
                        (h, 2.0 * h)
                    })
                    .collect(),
            },
            Series {
                label: "L2".to_string(),
                points: (0..4)
                    .map(|i| {
                        let h = 0.25 / f64::powi(2.0, i);
                        (h, h * h)
                    })
                    .collect(),
            },
        ]
    }

    #[test]
    fn emits_one_polyline_per_series_and_balanced_tags() {
        let svg = loglog_svg("errors vs h", "h", &sample(), &[1.0, 2.0]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("slope 1").count(), 1);
        assert_eq!(svg.matches("slope 2").count(), 1);
        // Every opened element is self-closing or closed; crude XML sanity.
        for tag in ["<svg", "<text", "<line", "<polyline", "<circle", "<rect"] {
            let opened = svg.matches(tag).count();
            let closed = svg.matches("/>").count()
                + svg.matches("</svg>").count()
                + svg.matches("</text>").count();
            assert!(closed >= opened, "unclosed {tag}");
        }
        assert_eq!(
            svg.matches("<text").count(),
            svg.matches("</text>").count()
        );
    }

    #[test]
    fn degenerate_input_still_yields_valid_svg() {
        let empty = loglog_svg("nothing", "h", &[], &[]);
        assert!(empty.starts_with("<svg") && empty.trim_end().ends_with("</svg>"));
        let zeros = vec![Series {
            label: "flat".to_string(),
            points: vec![(0.1, 0.0), (0.05, -1.0)],
        }];
        let svg = loglog_svg("zeros", "tau", &zeros, &[2.0]);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.contains("no positive data"));
    }

    #[test]
    fn labels_are_escaped() {
        let s = vec![Series {
            label: "a<b & c".to_string(),
            points: vec![(0.1, 0.1), (0.05, 0.05)],
        }];
        let svg = loglog_svg("t", "x", &s, &[]);
        assert!(svg.contains("a&lt;b &amp; c"));
        assert!(!svg.contains("a<b"));
    }
}
