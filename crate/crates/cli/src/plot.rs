//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Markers only.
    Points,
    /// Polyline only.
    Line,
    /// Polyline with markers.
    LinePoints,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Symmetric vertical error bars, one per point.
    pub errors: Option<Vec<f64>>,
    pub style: Style,
    /// Series sharing a colour slot are drawn in the same colour.
    pub color: usize,
}

impl Series {
    pub fn new(
        name: impl Into<String>,
        points: Vec<(f64, f64)>,
        style: Style,
        color: usize,
    ) -> Self {
        Series {
            name: name.into(),
            points,
            errors: None,
            style,
            color,
        }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(
        values: impl Iterator<Item = f64>,
        log: bool,
        fixed: Option<(f64, f64)>,
        from: f64,
        to: f64,
    ) -> Self {
        let (mut lo, mut hi) = fixed.unwrap_or_else(|| {
            values
                .filter(|v| v.is_finite() && (!log || *v > 0.0))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                    (a.min(v), b.max(v))
                })
        });
        if !lo.is_finite() {
            (lo, hi) = (if log { 0.1 } else { 0.0 }, 1.0);
        }
        if log {
            (lo, hi) = (lo.log10(), hi.log10());
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        } else if fixed.is_none() {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Axis {
            lo,
            hi,
            log,
            from,
            to,
        }
    }

    fn map(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite()
            .then(|| self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from))
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            let pick = |mantissas: &[f64]| -> Vec<f64> {
                (a..=b)
                    .flat_map(|e| mantissas.iter().map(move |m| m * 10f64.powi(e)))
                    .filter(|v| (self.lo..=self.hi).contains(&v.log10()))
                    .collect()
            };
            let t = pick(&[1.0, 2.0, 5.0]);
            return if t.len() >= 3 {
                t
            } else {
                pick(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
            };
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    let s = if !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else {
        let decimals = (2.0 - a.log10().floor()).clamp(0.0, 6.0) as usize;
        format!("{v:.decimals$}")
    };
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let errs = |s: &Series, i: usize| {
            s.errors
                .as_ref()
                .and_then(|e| e.get(i).copied())
                .filter(|e| e.is_finite())
                .unwrap_or(0.0)
        };
        let x = Axis::new(all().map(|p| p.0), self.log_x, None, LEFT, WIDTH - RIGHT);
        let ys = self.series.iter().flat_map(|s| {
            s.points
                .iter()
                .enumerate()
                .flat_map(move |(i, p)| [p.1 - errs(s, i), p.1 + errs(s, i)])
        });
        let y = Axis::new(ys, self.log_y, self.y_range, HEIGHT - BOTTOM, TOP);
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&self.title)
        );
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        for t in x.ticks() {
            if let Some(px) = x.map(t) {
                let _ = writeln!(
                    o,
                    r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{y1}" stroke="#eee"/>"##
                );
                let _ = writeln!(
                    o,
                    r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                    y0 + 16.0,
                    label(t)
                );
            }
        }
        for t in y.ticks() {
            if let Some(py) = y.map(t) {
                let _ = writeln!(
                    o,
                    r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#eee"/>"##
                );
                let _ = writeln!(
                    o,
                    r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                    x0 - 6.0,
                    py + 4.0,
                    label(t)
                );
            }
        }
        let _ = writeln!(
            o,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        for s in &self.series {
            let color = COLORS[s.color % COLORS.len()];
            let mapped: Vec<Option<(f64, f64)>> = s
                .points
                .iter()
                .map(|&(a, b)| Some((x.map(a)?, y.map(b)?)))
                .collect();
            if s.style != Style::Points {
                let mut path = String::new();
                let mut pen_down = false;
                for p in &mapped {
                    match p {
                        Some((px, py)) => {
                            let _ = write!(
                                path,
                                "{}{px:.2},{py:.2} ",
                                if pen_down { "L" } else { "M" }
                            );
                            pen_down = true;
                        }
                        None => pen_down = false,
                    }
                }
                let _ = writeln!(
                    o,
                    r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    path.trim_end()
                );
            }
            if s.style != Style::Line {
                for (i, p) in mapped.iter().enumerate() {
                    let Some((px, py)) = p else { continue };
                    let e = errs(s, i);
                    if e > 0.0 {
                        let lo = y.map(s.points[i].1 - e).unwrap_or(y0);
                        let hi = y.map(s.points[i].1 + e).unwrap_or(y1);
                        let _ = writeln!(
                            o,
                            r#"<line x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="{color}"/>"#
                        );
                    }
                    let _ = writeln!(
                        o,
                        r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#
                    );
                }
            }
        }
        let mut ly = TOP + 10.0;
        for s in self.series.iter().filter(|s| !s.name.is_empty()) {
            let color = COLORS[s.color % COLORS.len()];
            let lx = WIDTH - RIGHT + 12.0;
            if s.style == Style::Points {
                let _ = writeln!(
                    o,
                    r#"<circle cx="{}" cy="{ly}" r="3" fill="{color}"/>"#,
                    lx + 10.0
                );
            } else {
                let _ = writeln!(
                    o,
                    r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>"#,
                    lx + 20.0
                );
            }
            let _ = writeln!(
                o,
                r#"<text x="{}" y="{}">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                escape(&s.name)
            );
            ly += 18.0;
        }
        o.push_str("</svg>\n");
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_skips_nonpositive_on_log_axes() {
        let chart = Chart {
            title: "a < b".into(),
            log_x: true,
            series: vec![Series::new(
                "s",
                vec![(0.0, 1.0), (1.0, 2.0), (10.0, 3.0)],
                Style::LinePoints,
                0,
            )
            .with_errors(vec![0.1, 0.1, 0.1])],
            ..Default::default()
        };
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg, chart.to_svg());
    }

    #[test]
    fn ticks_are_round_numbers() {
        let a = Axis::new([0.0, 1.0].into_iter(), false, Some((0.0, 1.0)), 0.0, 100.0);
        assert_eq!(a.ticks(), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(label(0.6000000000000001), "0.6");
        assert_eq!(label(0.0709), "0.0709");
        assert_eq!(label(12.5), "12.5");
        let l = Axis::new([0.3, 9.5].into_iter(), true, None, 0.0, 100.0);
        assert!(l.ticks().contains(&1.0) && l.ticks().contains(&5.0));
    }
}
