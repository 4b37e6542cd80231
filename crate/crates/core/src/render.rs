//! Deterministic SVG figures and sample exports.
//!
//! All numbers are written with a fixed number of decimals and elements are
//! emitted in input order, so identical inputs give byte-identical documents.

use std::fmt::Write as _;

use serde::Serialize;

use crate::curve::{CurveSpec, PlanePoint, TwoTermSpec};
use crate::error::{Error, Result};
use crate::geometry::IntersectionRecord;
use crate::singularity::{predicted_cusp_locus, undefined_derivative_set};

/// Axis-aligned region of the plane mapped onto the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBox {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl ViewBox {
    pub fn symmetric(half: f64) -> Self {
        Self {
            min_x: -half,
            max_x: half,
            min_y: -half,
            max_y: half,
        }
    }

    pub fn contains(&self, p: PlanePoint) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub point: PlanePoint,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub view: ViewBox,
    pub stroke_width: f64,
    pub markers: Vec<Marker>,
    pub samples: usize,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            view: ViewBox::symmetric(2.2),
            stroke_width: 1.0,
            markers: Vec::new(),
            samples: 2000,
        }
    }
}

impl PlotSpec {
    /// Canvas coordinates of a plane point; the y axis points up in the plane.
    pub fn to_pixel(&self, p: PlanePoint) -> (f64, f64) {
        let v = &self.view;
        (
            (p.x - v.min_x) / (v.max_x - v.min_x) * self.width as f64,
            (v.max_y - p.y) / (v.max_y - v.min_y) * self.height as f64,
        )
    }

    pub fn from_pixel(&self, px: f64, py: f64) -> PlanePoint {
        let v = &self.view;
        PlanePoint::new(
            v.min_x + px / self.width as f64 * (v.max_x - v.min_x),
            v.max_y - py / self.height as f64 * (v.max_y - v.min_y),
        )
    }
}

/// Linear blue-to-red ramp over `count` entries.
pub fn color_ramp(index: usize, count: usize) -> String {
    let f = if count <= 1 {
        0.0
    } else {
        index as f64 / (count - 1) as f64
    };
    let lerp = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(31.0, 214.0),
        lerp(119.0, 39.0),
        lerp(180.0, 40.0)
    )
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(width: u32, height: u32) -> Self {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        );
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
        );
        Self { out }
    }

    fn polyline(&mut self, class: &str, color: &str, stroke: f64, pixels: &[(f64, f64)]) {
        let _ = write!(
            self.out,
            "<polyline class=\"{class}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke:.2}\" points=\""
        );
        for (k, (x, y)) in pixels.iter().enumerate() {
            if k > 0 {
                self.out.push(' ');
            }
            let _ = write!(self.out, "{x:.3},{y:.3}");
        }
        self.out.push_str("\"/>\n");
    }

    fn line(&mut self, class: &str, from: (f64, f64), to: (f64, f64)) {
        let _ = writeln!(
            self.out,
            "<line class=\"{class}\" x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#999999\" stroke-width=\"0.50\"/>",
            from.0, from.1, to.0, to.1
        );
    }

    fn circle(&mut self, class: &str, at: (f64, f64), r: f64, color: &str, extra: &str) {
        let _ = writeln!(
            self.out,
            "<circle class=\"{class}\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{r:.2}\" fill=\"{color}\"{extra}/>",
            at.0, at.1
        );
    }

    fn text(&mut self, at: (f64, f64), body: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            at.0,
            at.1,
            escape(body)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn draw_markers(svg: &mut Svg, plot: &PlotSpec) {
    for m in &plot.markers {
        let at = plot.to_pixel(m.point);
        svg.circle("marker", at, 4.0, "black", "");
        if !m.label.is_empty() {
            svg.text((at.0 + 6.0, at.1 - 6.0), &m.label);
        }
    }
}

/// One closed polyline per curve, sampled with [`CurveSpec::sample`].
///
/// The view box grows symmetrically when a curve can leave it.
pub fn render_curve(specs: &[CurveSpec], plot: &PlotSpec) -> Result<String> {
    if specs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut plot = plot.clone();
    let reach = specs.iter().map(CurveSpec::scale).fold(0.0, f64::max);
    let v = plot.view;
    if -reach < v.min_x || reach > v.max_x || -reach < v.min_y || reach > v.max_y {
        let half = 1.1 * reach;
        plot.view = ViewBox {
            min_x: v.min_x.min(-half),
            max_x: v.max_x.max(half),
            min_y: v.min_y.min(-half),
            max_y: v.max_y.max(half),
        };
    }
    let mut svg = Svg::new(plot.width, plot.height);
    let origin = plot.to_pixel(PlanePoint::ORIGIN);
    svg.line("axis", (0.0, origin.1), (plot.width as f64, origin.1));
    svg.line("axis", (origin.0, 0.0), (origin.0, plot.height as f64));
    for (k, spec) in specs.iter().enumerate() {
        let mut pixels: Vec<(f64, f64)> = spec
            .sample(plot.samples)?
            .into_iter()
            .map(|p| plot.to_pixel(p))
            .collect();
        pixels.push(pixels[0]);
        svg.polyline(
            "curve",
            &color_ramp(k, specs.len()),
            plot.stroke_width,
            &pixels,
        );
    }
    draw_markers(&mut svg, &plot);
    Ok(svg.finish())
}

/// `γ_{a,b}^s` for `steps` values of `s` spread evenly over `[−1, 1]`.
pub fn render_sweep(a: i64, b: i64, steps: usize, plot: &PlotSpec) -> Result<String> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    let specs = (0..steps)
        .map(|k| {
            let s = -1.0 + 2.0 * k as f64 / (steps - 1) as f64;
            TwoTermSpec::new(a, b, s).map(|spec| spec.curve())
        })
        .collect::<Result<Vec<_>>>()?;
    render_curve(&specs, plot)
}

/// Graph of `y′(t)/x′(t)` over `t ∈ [0, 1]`, broken wherever the slope is
/// undefined or leaves the vertical range of the view box.
pub fn render_param_derivative(spec: &TwoTermSpec, plot: &PlotSpec) -> Result<String> {
    let pieces = param_derivative_pieces(spec, plot)?;
    let mut svg = Svg::new(plot.width, plot.height);
    let graph = graph_plot(plot, 0.0, 1.0);
    let zero = graph.to_pixel(PlanePoint::new(0.0, 0.0));
    svg.line("axis", (0.0, zero.1), (plot.width as f64, zero.1));
    for piece in &pieces {
        let pixels: Vec<(f64, f64)> = piece.iter().map(|&p| graph.to_pixel(p)).collect();
        svg.polyline("derivative", "black", plot.stroke_width, &pixels);
    }
    svg.text(
        (8.0, 16.0),
        &format!("y'/x' for a={}, b={}, s={}", spec.a(), spec.b(), spec.s()),
    );
    Ok(svg.finish())
}

fn graph_plot(plot: &PlotSpec, t_lo: f64, t_hi: f64) -> PlotSpec {
    PlotSpec {
        view: ViewBox {
            min_x: t_lo,
            max_x: t_hi,
            min_y: plot.view.min_y,
            max_y: plot.view.max_y,
        },
        ..plot.clone()
    }
}

/// Continuous runs `(t, slope)` of the parametric derivative inside the view's vertical range.
pub fn param_derivative_pieces(
    spec: &TwoTermSpec,
    plot: &PlotSpec,
) -> Result<Vec<Vec<PlanePoint>>> {
    if plot.samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let curve = spec.curve();
    let (lo, hi) = (plot.view.min_y, plot.view.max_y);
    let mut pieces = Vec::new();
    let mut current: Vec<PlanePoint> = Vec::new();
    for j in 0..=plot.samples {
        let t = j as f64 / plot.samples as f64;
        match curve.parametric_derivative(t) {
            Some(v) if (lo..=hi).contains(&v) => current.push(PlanePoint::new(t, v)),
            _ => {
                if current.len() >= 2 {
                    pieces.push(std::mem::take(&mut current));
                } else {
                    current.clear();
                }
            }
        }
    }
    if current.len() >= 2 {
        pieces.push(current);
    }
    Ok(pieces)
}

/// Pixel radius of the bold cusp markers in the singularity diagram.
pub const CUSP_MARKER_RADIUS: f64 = 6.0;

/// The `(s, t)` diagram of parameters with an undefined parametric derivative,
/// with the predicted cusps drawn as bold points. `s` runs left to right over
/// `[−1, 1]`, `t` bottom to top over `[0, 1]`.
pub fn render_singularity_diagram(a: i64, b: i64, s_grid: usize) -> Result<String> {
    if s_grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "diagram needs at least 2 values of s, got {s_grid}"
        )));
    }
    let locus = predicted_cusp_locus(a, b)?;
    let plot = diagram_plot();
    let mut svg = Svg::new(plot.width, plot.height);
    svg.line(
        "axis",
        plot.to_pixel(PlanePoint::new(-1.0, 0.0)),
        plot.to_pixel(PlanePoint::new(1.0, 0.0)),
    );
    svg.line(
        "axis",
        plot.to_pixel(PlanePoint::new(-1.0, 0.0)),
        plot.to_pixel(PlanePoint::new(-1.0, 1.0)),
    );
    for k in 0..s_grid {
        let s = -1.0 + 2.0 * k as f64 / (s_grid - 1) as f64;
        for t in undefined_derivative_set(a, b, s)? {
            svg.circle(
                "locus",
                plot.to_pixel(PlanePoint::new(s, t)),
                1.2,
                "black",
                "",
            );
        }
    }
    let s_bar = locus.s_bar_f64();
    for t in locus.t_values_f64() {
        let extra = format!(" data-s=\"{s_bar}\" data-t=\"{t}\"");
        svg.circle(
            "cusp",
            plot.to_pixel(PlanePoint::new(s_bar, t)),
            CUSP_MARKER_RADIUS,
            "black",
            &extra,
        );
    }
    svg.text((8.0, 16.0), &format!("undefined y'/x' for a={a}, b={b}"));
    Ok(svg.finish())
}

/// Canvas used by [`render_singularity_diagram`]; `x` is `s`, `y` is `t`.
pub fn diagram_plot() -> PlotSpec {
    PlotSpec {
        view: ViewBox {
            min_x: -1.05,
            max_x: 1.05,
            min_y: -0.05,
            max_y: 1.05,
        },
        ..PlotSpec::default()
    }
}

/// Side-by-side graphs of `x(t)` and `y(t)` over `[t_lo, t_hi]`, one line per
/// spec. Three specs are drawn red, green and blue in order.
pub fn render_components(
    specs: &[TwoTermSpec],
    t_lo: f64,
    t_hi: f64,
    plot: &PlotSpec,
) -> Result<String> {
    if specs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if t_lo >= t_hi || t_lo.is_nan() || t_hi.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "empty range [{t_lo}, {t_hi}]"
        )));
    }
    let half_width = plot.width / 2;
    let panel = PlotSpec {
        width: half_width,
        ..graph_plot(plot, t_lo, t_hi)
    };
    let mut svg = Svg::new(plot.width, plot.height);
    for (k, spec) in specs.iter().enumerate() {
        let color = match (specs.len(), k) {
            (3, 0) => "red".to_string(),
            (3, 1) => "green".to_string(),
            (3, _) => "blue".to_string(),
            _ => color_ramp(k, specs.len()),
        };
        let curve = spec.curve();
        let ts: Vec<f64> = (0..=plot.samples)
            .map(|j| t_lo + (t_hi - t_lo) * j as f64 / plot.samples as f64)
            .collect();
        for (offset, pick) in [(0.0, 0usize), (half_width as f64, 1)] {
            let pixels: Vec<(f64, f64)> = ts
                .iter()
                .map(|&t| {
                    let p = curve.evaluate(t);
                    let v = if pick == 0 { p.x } else { p.y };
                    let (px, py) = panel.to_pixel(PlanePoint::new(t, v));
                    (px + offset, py)
                })
                .collect();
            let class = if pick == 0 {
                "x-component"
            } else {
                "y-component"
            };
            svg.polyline(class, &color, plot.stroke_width, &pixels);
        }
    }
    Ok(svg.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct SampleRow {
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct SampleDocument<'a> {
    spec: &'a CurveSpec,
    samples: Vec<SampleRow>,
}

/// Formats with 17 significant digits.
fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t, x, y` at `t = j/n`. CSV uses CRLF line endings; JSON embeds the curve
/// description so the document can be read back with [`CurveSpec::from_json`].
pub fn export_samples(spec: &CurveSpec, n: usize, format: SampleFormat) -> Result<String> {
    let points = spec.sample(n)?;
    let rows = points.into_iter().enumerate().map(|(j, p)| SampleRow {
        t: j as f64 / n as f64,
        x: p.x,
        y: p.y,
    });
    match format {
        SampleFormat::Csv => {
            let mut out = String::from("t,x,y\r\n");
            for r in rows {
                let _ = write!(out, "{},{},{}\r\n", sig17(r.t), sig17(r.x), sig17(r.y));
            }
            Ok(out)
        }
        SampleFormat::Json => Ok(serde_json::to_string(&SampleDocument {
            spec,
            samples: rows.collect(),
        })
        .expect("sample documents always serialize")),
    }
}

/// Reads the curve description back out of a JSON sample document.
pub fn spec_from_samples_json(text: &str) -> Result<CurveSpec> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let spec = value
        .get("spec")
        .ok_or_else(|| Error::Parse("missing \"spec\" field".into()))?;
    CurveSpec::from_json(&spec.to_string())
}

/// `t1,t2,x,y,on_grid` rows with CRLF line endings.
pub fn intersections_csv(records: &[IntersectionRecord]) -> String {
    let mut out = String::from("t1,t2,x,y,on_grid\r\n");
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{}\r\n",
            sig17(r.t1),
            sig17(r.t2),
            sig17(r.point.x),
            sig17(r.point.y),
            r.on_rational_grid
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: i64, b: i64, s: f64) -> TwoTermSpec {
        TwoTermSpec::new(a, b, s).unwrap()
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(
            render_curve(&[], &PlotSpec::default()),
            Err(Error::EmptyInput)
        );
    }

    #[test]
    fn pixel_round_trip() {
        let plot = PlotSpec::default();
        let p = PlanePoint::new(1.25, -0.5);
        let (x, y) = plot.to_pixel(p);
        let q = plot.from_pixel(x, y);
        assert!(p.distance(q) < 1e-12);
        assert_eq!(plot.to_pixel(PlanePoint::ORIGIN), (400.0, 400.0));
    }

    #[test]
    fn derivative_pole_gaps() {
        for (s, pieces) in [(-0.5, 4), (-1.0, 2), (1.0, 6)] {
            let got = param_derivative_pieces(&two(1, 3, s), &PlotSpec::default()).unwrap();
            assert_eq!(got.len(), pieces, "s = {s}");
        }
    }

    #[test]
    fn three_term_curve_expands_view() {
        let c = CurveSpec::exponential_sum(&[3, 3, 7]).unwrap();
        let svg = render_curve(&[c], &PlotSpec::default()).unwrap();
        assert!(svg.contains("class=\"curve\""));
    }

    #[test]
    fn csv_export_rows() {
        let csv = export_samples(&two(1, 3, 0.0).curve(), 2, SampleFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines[0], "t,x,y");
        let row = |l: &str| -> Vec<f64> { l.split(',').map(|v| v.parse().unwrap()).collect() };
        assert_eq!(row(lines[1]), vec![0.0, 2.0, 0.0]);
        let second = row(lines[2]);
        assert_eq!(second[0], 0.5);
        assert_eq!(second[1], -2.0);
        assert!(second[2].abs() < 1e-15);
        assert_eq!(lines[3], "");
        assert_eq!(lines[1].split(',').next().unwrap(), "0.0000000000000000e0");
    }

    #[test]
    fn json_export_round_trips_spec() {
        let spec = CurveSpec::exponential_sum(&[2, 7, 13]).unwrap();
        let json = export_samples(&spec, 16, SampleFormat::Json).unwrap();
        assert_eq!(spec_from_samples_json(&json).unwrap(), spec);
    }

    #[test]
    fn color_ramp_endpoints() {
        assert_eq!(color_ramp(0, 21), "#1f77b4");
        assert_eq!(color_ramp(20, 21), "#d62728");
        assert_eq!(color_ramp(0, 1), "#1f77b4");
    }
}
