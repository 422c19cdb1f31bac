use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::csv_out::format_float;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Axis range snapped outward to a tick step of 1, 2 or 5 times a power of ten.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(min: f64, max: f64) -> Axis {
        let (min, max) = if min == max {
            let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.5 };
            (min - pad, max + pad)
        } else {
            (min, max)
        };
        let raw = (max - min) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        Axis {
            lo: (min / step).floor() * step,
            hi: (max / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as i64;
        (0..=count).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64, step: f64) -> String {
    // Snap away float noise such as 0.30000000000000004.
    let snapped = (v / step).round() * step;
    format_float(if snapped.abs() < step * 1e-9 { 0.0 } else { (snapped * 1e9).round() / 1e9 })
}

/// Renders a line plot of every series on shared linear axes.
pub fn render_svg(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidConfig("nothing to plot".into()));
    }
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        if s.points.is_empty() {
            return Err(Error::InvalidConfig(format!("series {:?} has no points", s.label)));
        }
        for &(x, y) in &s.points {
            if !x.is_finite() {
                return Err(Error::NonFinite(x));
            }
            if !y.is_finite() {
                return Err(Error::NonFinite(y));
            }
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    let xa = Axis::fit(xs.0, xs.1);
    let ya = Axis::fit(ys.0, ys.1);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    let w = &mut out;
    // Writing to a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for t in xa.ticks() {
        let px = xa.map(t, x0, x1);
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            tick_label(t, xa.step)
        );
    }
    for t in ya.ticks() {
        let py = ya.map(t, y0, y1);
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(t, ya.step)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", xa.map(x, x0, x1), ya.map(y, y0, y1)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            w,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(series: &[Series], path: impl AsRef<Path>, x_label: &str, y_label: &str) -> Result<()> {
    std::fs::write(path, render_svg(series, x_label, y_label)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_series() {
        let svg = render_svg(&[Series::new("a", vec![(0.0, 1.0), (1.0, 2.0)])], "x", "y").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn two_series_two_legend_entries() {
        let s = [
            Series::new("none", vec![(100.0, 2.0), (200.0, 2.1)]),
            Series::new("a < b & c", vec![(100.0, 20.0), (200.0, 41.0)]),
        ];
        let svg = render_svg(&s, "n", "rounds").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 2);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert_eq!(svg, render_svg(&s, "n", "rounds").unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(render_svg(&[], "x", "y").is_err());
        assert!(render_svg(&[Series::new("e", vec![])], "x", "y").is_err());
        assert!(render_svg(&[Series::new("n", vec![(0.0, f64::NAN)])], "x", "y").is_err());
        let single = render_svg(&[Series::new("p", vec![(3.0, 3.0)])], "x", "y").unwrap();
        assert_eq!(single.matches("<polyline").count(), 1);
    }

    #[test]
    fn axis_ticks() {
        let a = Axis::fit(0.0, 1000.0);
        assert_eq!((a.lo, a.hi, a.step), (0.0, 1000.0, 200.0));
        assert_eq!(a.ticks().len(), 6);
        let b = Axis::fit(1.3, 2.7);
        assert!(b.lo <= 1.3 && b.hi >= 2.7);
        assert_eq!(tick_label(0.1 + 0.2, 0.1), "0.3");
        let c = Axis::fit(5.0, 5.0);
        assert!(c.lo < 5.0 && c.hi > 5.0);
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.svg");
        let s = [Series::new("a", vec![(0.0, 0.0), (1.0, 1.0)])];
        emit_svg(&s, &p, "x", "y").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), render_svg(&s, "x", "y").unwrap());
    }
}
