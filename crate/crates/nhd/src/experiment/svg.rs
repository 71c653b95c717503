//! Minimal self-contained SVG line charts.
//!
//! Just enough plotting to eyeball a sweep: light axes, dashed reference
//! curves, sampled markers with error bars, a legend. No external assets,
//! fixed viewport, deterministic output.

/// One curve or point set.
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub markers: bool,
    pub points: Vec<(f64, f64)>,
    /// Vertical half-lengths of error bars, parallel to `points`.
    pub bars: Option<Vec<f64>>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 48.0;

pub const PALETTE: [&str; 6] = ["#1f6fb2", "#d9541e", "#2f8f4e", "#8e4fb5", "#b0812c", "#52767e"];

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_series(series: &[Series]) -> Frame {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for s in series {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                let bar = s.bars.as_ref().map(|b| b[i]).unwrap_or(0.0);
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y - bar);
                y_max = y_max.max(y + bar);
            }
        }
        if !x_min.is_finite() {
            (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_max - x_min < 1e-12 {
            x_max = x_min + 1.0;
        }
        if y_max - y_min < 1e-12 {
            y_max = y_min + 1.0;
        }
        let pad = 0.05 * (y_max - y_min);
        Frame { x_min, x_max, y_min: y_min - pad, y_max: y_max + pad }
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(frame: &Frame, out: &mut String, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    out.push_str(&format!(
        "<rect x='{x0}' y='{y1}' width='{}' height='{}' fill='none' stroke='#888' stroke-width='1'/>\n",
        x1 - x0,
        y0 - y1
    ));
    for k in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * k as f64 / 4.0;
        let px = frame.x(fx);
        out.push_str(&format!(
            "<line x1='{}' y1='{y0}' x2='{}' y2='{}' stroke='#888' stroke-width='1'/>\n",
            fmt2(px),
            fmt2(px),
            fmt2(y0 + 4.0)
        ));
        out.push_str(&format!(
            "<text x='{}' y='{}' font-size='11' text-anchor='middle' fill='#444'>{}</text>\n",
            fmt2(px),
            fmt2(y0 + 17.0),
            fmt2(fx)
        ));
        let fy = frame.y_min + (frame.y_max - frame.y_min) * k as f64 / 4.0;
        let py = frame.y(fy);
        out.push_str(&format!(
            "<line x1='{}' y1='{}' x2='{x0}' y2='{}' stroke='#888' stroke-width='1'/>\n",
            fmt2(x0 - 4.0),
            fmt2(py),
            fmt2(py)
        ));
        out.push_str(&format!(
            "<text x='{}' y='{}' font-size='11' text-anchor='end' fill='#444'>{}</text>\n",
            fmt2(x0 - 7.0),
            fmt2(py + 4.0),
            fmt2(fy)
        ));
    }
    out.push_str(&format!(
        "<text x='{}' y='{}' font-size='12' text-anchor='middle' fill='#222'>{}</text>\n",
        fmt2((x0 + x1) / 2.0),
        fmt2(HEIGHT - 10.0),
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x='16' y='{}' font-size='12' text-anchor='middle' fill='#222' transform='rotate(-90 16 {})'>{}</text>\n",
        fmt2((y0 + y1) / 2.0),
        fmt2((y0 + y1) / 2.0),
        escape(y_label)
    ));
}

/// Render a complete chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::from_series(series);
    let mut out = String::with_capacity(16 * 1024);
    out.push_str(&format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{WIDTH}' height='{HEIGHT}' viewBox='0 0 {WIDTH} {HEIGHT}'>\n"
    ));
    out.push_str("<rect width='100%' height='100%' fill='white'/>\n");
    out.push_str(&format!(
        "<text x='{}' y='20' font-size='14' text-anchor='middle' fill='#111'>{}</text>\n",
        fmt2(WIDTH / 2.0),
        escape(title)
    ));
    axes(&frame, &mut out, x_label, y_label);

    for s in series {
        if !s.markers {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", fmt2(frame.x(x)), fmt2(frame.y(y))))
                .collect();
            let dash = if s.dashed { " stroke-dasharray='6 4'" } else { "" };
            out.push_str(&format!(
                "<polyline points='{}' fill='none' stroke='{}' stroke-width='1.6'{dash}/>\n",
                path.join(" "),
                s.color
            ));
        } else {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                let px = frame.x(x);
                let py = frame.y(y);
                if let Some(bars) = &s.bars {
                    let top = frame.y(y + bars[i]);
                    let bottom = frame.y(y - bars[i]);
                    out.push_str(&format!(
                        "<line x1='{}' y1='{}' x2='{}' y2='{}' stroke='{}' stroke-width='1'/>\n",
                        fmt2(px),
                        fmt2(top),
                        fmt2(px),
                        fmt2(bottom),
                        s.color
                    ));
                }
                out.push_str(&format!(
                    "<circle cx='{}' cy='{}' r='2.4' fill='{}'/>\n",
                    fmt2(px),
                    fmt2(py),
                    s.color
                ));
            }
        }
    }

    let mut ly = MARGIN_T + 14.0;
    for s in series {
        let lx = WIDTH - MARGIN_R - 150.0;
        if s.markers {
            out.push_str(&format!(
                "<circle cx='{}' cy='{}' r='2.4' fill='{}'/>\n",
                fmt2(lx + 12.0),
                fmt2(ly - 4.0),
                s.color
            ));
        } else {
            let dash = if s.dashed { " stroke-dasharray='6 4'" } else { "" };
            out.push_str(&format!(
                "<line x1='{}' y1='{}' x2='{}' y2='{}' stroke='{}' stroke-width='1.6'{dash}/>\n",
                fmt2(lx),
                fmt2(ly - 4.0),
                fmt2(lx + 24.0),
                fmt2(ly - 4.0),
                s.color
            ));
        }
        out.push_str(&format!(
            "<text x='{}' y='{}' font-size='11' fill='#333'>{}</text>\n",
            fmt2(lx + 30.0),
            fmt2(ly),
            escape(&s.label)
        ));
        ly += 15.0;
    }

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_wellformed_and_deterministic() {
        let series = vec![
            Series {
                label: "reference".into(),
                color: PALETTE[0],
                dashed: true,
                markers: false,
                points: (0..20).map(|i| (i as f64 * 0.1, (i as f64 * 0.1).sin())).collect(),
                bars: None,
            },
            Series {
                label: "sampled".into(),
                color: PALETTE[1],
                dashed: false,
                markers: true,
                points: vec![(0.5, 0.5), (1.0, 0.8)],
                bars: Some(vec![0.05, 0.02]),
            },
        ];
        let a = line_chart("demo", "t", "value", &series);
        let b = line_chart("demo", "t", "value", &series);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(a.matches("<circle").count() >= 2);
        assert!(!a.contains("NaN"));
    }

    #[test]
    fn degenerate_input_still_renders() {
        let series = vec![Series {
            label: "flat".into(),
            color: PALETTE[2],
            dashed: false,
            markers: false,
            points: vec![(1.0, 2.0), (1.0, 2.0)],
            bars: None,
        }];
        let svg = line_chart("flat", "x", "y", &series);
        assert!(svg.contains("</svg>"));
        let empty = line_chart("empty", "x", "y", &[]);
        assert!(empty.contains("</svg>"));
    }
}
