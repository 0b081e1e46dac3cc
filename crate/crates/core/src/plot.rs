//! Minimal self-contained SVG line charts.
//!
//! Output is deterministic: coordinates are printed with two decimals and
//! elements appear in series order, so two renders of the same data are
//! byte-identical.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    /// Non-finite `y` values break the line.
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
    /// Vertical dashed lines at these x positions.
    pub markers: Vec<(f64, String)>,
}

struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
    log: bool,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log {
            (v.log10(), self.lo.log10(), self.hi.log10())
        } else {
            (v, self.lo, self.hi)
        };
        let frac = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        self.from + frac * (self.to - self.from)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let log_x = self.log_x
            && self
                .series
                .iter()
                .flat_map(|s| &s.points)
                .all(|&(x, _)| x > 0.0);
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let (x_lo, x_hi) = extent(xs.chain(self.markers.iter().map(|m| m.0)));
        let (y_lo, y_hi) = extent(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let (y_lo, y_hi) = (y_lo.min(0.0), y_hi);
        let x = Scale {
            lo: x_lo,
            hi: x_hi,
            from: MARGIN_LEFT,
            to: WIDTH - MARGIN_RIGHT,
            log: log_x,
        };
        let y = Scale {
            lo: y_lo,
            hi: y_hi,
            from: HEIGHT - MARGIN_BOTTOM,
            to: MARGIN_TOP,
            log: false,
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            escape(&self.title)
        );
        // axes
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = writeln!(
            s,
            r#"<path class="axis" d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
        );
        for (i, v) in [y_lo, (y_lo + y_hi) / 2.0, y_hi].iter().enumerate() {
            let py = y.map(*v);
            let _ = writeln!(
                s,
                r#"<text class="ytick" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                py + 4.0,
                format_tick(*v, i)
            );
        }
        let mut ticks: Vec<f64> = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
        ticks.sort_by(f64::total_cmp);
        ticks.dedup();
        for v in &ticks {
            let _ = writeln!(
                s,
                r#"<text class="xtick" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                x.map(*v),
                y0 + 16.0,
                format_tick(*v, 0)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let d = path_data(&series.points, &x, &y);
            let _ = writeln!(
                s,
                r#"<path class="series" data-name="{}" d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                escape(&series.name),
                d
            );
            let ly = MARGIN_TOP + 18.0 * i as f64 + 8.0;
            let _ = writeln!(
                s,
                r#"<path class="legend" d="M{:.2},{ly:.2} L{:.2},{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                x1 + 12.0,
                x1 + 32.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                x1 + 38.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        for (mx, label) in &self.markers {
            let px = x.map(*mx);
            let _ = writeln!(
                s,
                r#"<path class="marker" data-name="{}" d="M{px:.2},{y0:.2} L{px:.2},{y1:.2}" stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64, _slot: usize) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn path_data(points: &[(f64, f64)], x: &Scale, y: &Scale) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for &(px, py) in points {
        if !px.is_finite() || !py.is_finite() {
            pen_down = false;
            continue;
        }
        if !d.is_empty() {
            d.push(' ');
        }
        let _ = write!(d, "{}{:.2},{:.2}", if pen_down { 'L' } else { 'M' }, x.map(px), y.map(py));
        pen_down = true;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_paths(svg: &str) -> Vec<(String, String)> {
        svg.lines()
            .filter(|l| l.contains(r#"class="series""#) || l.contains(r#"class="marker""#))
            .map(|l| {
                let attr = |name: &str| {
                    let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
                    let end = l[start..].find('"').unwrap() + start;
                    l[start..end].to_string()
                };
                (attr("data-name"), attr("d"))
            })
            .collect()
    }

    #[test]
    fn renders_series_and_marker() {
        let chart = LineChart {
            title: "t".into(),
            series: vec![
                Series::new("eir", vec![(1.0, 0.0), (2.0, 1.0), (3.0, f64::NAN), (4.0, 0.5)]),
                Series::new("der", vec![(1.0, 1.0), (4.0, 1.0)]),
            ],
            markers: vec![(2.0, "threshold".into())],
            ..Default::default()
        };
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let paths = series_paths(&svg);
        assert_eq!(paths.len(), 3);
        assert_eq!(paths[0].0, "eir");
        // NaN breaks the line: two sub-paths
        assert_eq!(paths[0].1.matches('M').count(), 2);
        assert_eq!(paths[1].1.matches('L').count(), 1);
        assert_eq!(paths[2].0, "threshold");
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg, chart.to_svg());
    }

    #[test]
    fn log_axis_falls_back_for_non_positive_x() {
        let chart = LineChart {
            log_x: true,
            series: vec![Series::new("a", vec![(0.0, 1.0), (10.0, 2.0)])],
            ..Default::default()
        };
        let d = &series_paths(&chart.to_svg())[0].1;
        assert!(d.starts_with(&format!("M{MARGIN_LEFT:.2}")));
    }

    #[test]
    fn escapes_text() {
        let chart = LineChart {
            title: "a<b & c".into(),
            ..Default::default()
        };
        assert!(chart.to_svg().contains("a&lt;b &amp; c"));
    }
}
