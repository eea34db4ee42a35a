//! Deterministic SVG figures: world coordinates are fitted to the canvas
//! with a 5% margin and equal aspect ratio, and every number is written
//! with a fixed number of decimals so identical inputs give identical bytes.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::caustic::CausticCurve;
use crate::hroots::{Orientation, RootSet};
use crate::lemniscate::OmegaDecomposition;
use crate::newton::LatticePolygon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Roots,
    ZerosOfF,
    Lemniscate,
    Caustic,
    Cusps,
    GammaCurves,
    NewtonPolygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub stroke: String,
    pub fill: String,
    pub stroke_width: f64,
    /// Marker radius in pixels for point shapes.
    pub marker: f64,
    pub opacity: f64,
}

impl Style {
    pub fn line(stroke: &str, width: f64) -> Self {
        Style {
            stroke: stroke.into(),
            fill: "none".into(),
            stroke_width: width,
            marker: 0.0,
            opacity: 1.0,
        }
    }

    pub fn area(fill: &str, opacity: f64) -> Self {
        Style {
            stroke: "none".into(),
            fill: fill.into(),
            stroke_width: 0.0,
            marker: 0.0,
            opacity,
        }
    }

    pub fn points(fill: &str, marker: f64) -> Self {
        Style {
            stroke: "none".into(),
            fill: fill.into(),
            stroke_width: 0.0,
            marker,
            opacity: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Polyline { points: Vec<Complex64>, closed: bool },
    /// Filled region with holes (even-odd rule).
    Region { outer: Vec<Complex64>, holes: Vec<Vec<Complex64>> },
    Segment(Complex64, Complex64),
    Dot(Complex64),
    Star(Complex64),
    Cross(Complex64),
}

impl Shape {
    fn extend_bounds(&self, b: &mut Bounds) {
        match self {
            Shape::Polyline { points, .. } => points.iter().for_each(|&z| b.add(z)),
            Shape::Region { outer, .. } => outer.iter().for_each(|&z| b.add(z)),
            Shape::Segment(a, c) => {
                b.add(*a);
                b.add(*c);
            }
            Shape::Dot(z) | Shape::Star(z) | Shape::Cross(z) => b.add(*z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub style: Style,
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bounds {
    lo: Complex64,
    hi: Complex64,
    empty: bool,
}

impl Bounds {
    fn new() -> Self {
        Bounds {
            lo: Complex64::new(f64::INFINITY, f64::INFINITY),
            hi: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            empty: true,
        }
    }

    fn add(&mut self, z: Complex64) {
        if !z.re.is_finite() || !z.im.is_finite() {
            return;
        }
        self.lo = Complex64::new(self.lo.re.min(z.re), self.lo.im.min(z.im));
        self.hi = Complex64::new(self.hi.re.max(z.re), self.hi.im.max(z.im));
        self.empty = false;
    }
}

/// One panel: a stack of layers drawn in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub title: String,
    pub width: f64,
    pub height: f64,
    pub layers: Vec<Layer>,
    /// Fixed world window `(lower-left, upper-right)`; auto-fitted when absent.
    pub window: Option<(Complex64, Complex64)>,
}

struct Transform {
    x0: f64,
    y1: f64,
    scale: f64,
    off_x: f64,
    off_y: f64,
}

impl Transform {
    fn px(&self, z: Complex64) -> (f64, f64) {
        (self.off_x + (z.re - self.x0) * self.scale, self.off_y + (self.y1 - z.im) * self.scale)
    }
}

impl Figure {
    pub fn new(title: impl Into<String>) -> Self {
        Figure {
            title: title.into(),
            width: 480.0,
            height: 480.0,
            layers: Vec::new(),
            window: None,
        }
    }

    pub fn with_layer(mut self, layer: Layer) -> Self {
        self.layers.push(layer);
        self
    }

    pub fn push(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    fn transform(&self) -> Transform {
        let (lo, hi) = match self.window {
            Some(w) => w,
            None => {
                let mut b = Bounds::new();
                for layer in &self.layers {
                    for s in &layer.shapes {
                        s.extend_bounds(&mut b);
                    }
                }
                if b.empty {
                    (Complex64::new(-1.0, -1.0), Complex64::new(1.0, 1.0))
                } else {
                    (b.lo, b.hi)
                }
            }
        };
        let w = (hi.re - lo.re).max(1e-12);
        let h = (hi.im - lo.im).max(1e-12);
        // 5% margin on each side
        let (x0, x1) = (lo.re - 0.05 * w, hi.re + 0.05 * w);
        let (y0, y1) = (lo.im - 0.05 * h, hi.im + 0.05 * h);
        let top = 24.0;
        let scale = (self.width / (x1 - x0)).min((self.height - top) / (y1 - y0));
        let off_x = 0.5 * (self.width - (x1 - x0) * scale);
        let off_y = top + 0.5 * (self.height - top - (y1 - y0) * scale);
        Transform {
            x0,
            y1,
            scale,
            off_x,
            off_y,
        }
    }

    /// Panel body (without the `<svg>` wrapper).
    fn body(&self, out: &mut String) {
        let tr = self.transform();
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{:.2}\" height=\"{:.2}\" fill=\"white\" stroke=\"#cccccc\"/>",
            self.width, self.height
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            self.width / 2.0,
            escape(&self.title)
        );
        for layer in &self.layers {
            let st = &layer.style;
            let _ = writeln!(
                out,
                "<g class=\"{}\" stroke=\"{}\" fill=\"{}\" stroke-width=\"{:.2}\" opacity=\"{:.2}\">",
                kind_name(layer.kind),
                st.stroke,
                st.fill,
                st.stroke_width,
                st.opacity
            );
            for shape in &layer.shapes {
                write_shape(out, &tr, shape, st);
            }
            out.push_str("</g>\n");
        }
    }

    pub fn render(&self) -> String {
        render_panels(std::slice::from_ref(self), 1)
    }
}

fn kind_name(kind: LayerKind) -> &'static str {
    match kind {
        LayerKind::Roots => "roots",
        LayerKind::ZerosOfF => "zeros_of_f",
        LayerKind::Lemniscate => "lemniscate",
        LayerKind::Caustic => "caustic",
        LayerKind::Cusps => "cusps",
        LayerKind::GammaCurves => "gamma_curves",
        LayerKind::NewtonPolygon => "newton_polygon",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn path_data(tr: &Transform, pts: &[Complex64], closed: bool) -> String {
    let mut d = String::new();
    for (i, &z) in pts.iter().enumerate() {
        let (x, y) = tr.px(z);
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x, y);
    }
    if closed && !pts.is_empty() {
        d.push_str(" Z");
    }
    d
}

fn write_shape(out: &mut String, tr: &Transform, shape: &Shape, st: &Style) {
    match shape {
        Shape::Polyline { points, closed } => {
            if points.len() >= 2 {
                let _ = writeln!(out, "<path d=\"{}\"/>", path_data(tr, points, *closed));
            }
        }
        Shape::Region { outer, holes } => {
            let mut d = path_data(tr, outer, true);
            for h in holes {
                d.push(' ');
                d.push_str(&path_data(tr, h, true));
            }
            let _ = writeln!(out, "<path fill-rule=\"evenodd\" d=\"{d}\"/>");
        }
        Shape::Segment(a, b) => {
            let (x1, y1) = tr.px(*a);
            let (x2, y2) = tr.px(*b);
            let _ = writeln!(out, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>");
        }
        Shape::Dot(z) => {
            let (x, y) = tr.px(*z);
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\"/>", st.marker);
        }
        Shape::Star(z) => {
            let (x, y) = tr.px(*z);
            let r = st.marker;
            let mut d = String::new();
            for j in 0..10 {
                let rr = if j % 2 == 0 { r } else { 0.45 * r };
                let a = -std::f64::consts::FRAC_PI_2 + j as f64 * std::f64::consts::PI / 5.0;
                let _ = write!(
                    d,
                    "{}{:.2},{:.2}",
                    if j == 0 { "M" } else { " L" },
                    x + rr * a.cos(),
                    y + rr * a.sin()
                );
            }
            let _ = writeln!(out, "<path d=\"{d} Z\"/>");
        }
        Shape::Cross(z) => {
            let (x, y) = tr.px(*z);
            let r = st.marker;
            let _ = writeln!(
                out,
                "<path stroke=\"{}\" stroke-width=\"1.50\" d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\"/>",
                st.fill,
                x - r,
                y - r,
                x + r,
                y + r,
                x - r,
                y + r,
                x + r,
                y - r
            );
        }
    }
}

/// Lays panels out on a grid with `cols` columns.
pub fn render_panels(panels: &[Figure], cols: usize) -> String {
    let cols = cols.max(1).min(panels.len().max(1));
    let rows = panels.len().div_ceil(cols).max(1);
    let cell_w = panels.iter().map(|p| p.width).fold(0.0, f64::max).max(1.0);
    let cell_h = panels.iter().map(|p| p.height).fold(0.0, f64::max).max(1.0);
    let width = cell_w * cols as f64;
    let height = cell_h * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    for (i, panel) in panels.iter().enumerate() {
        let x = (i % cols) as f64 * cell_w;
        let y = (i / cols) as f64 * cell_h;
        let _ = writeln!(out, "<g transform=\"translate({x:.0},{y:.0})\">");
        panel.body(&mut out);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Dots for sense-preserving zeros, open markers for sense-reversing ones,
/// crosses for singular ones.
pub fn roots_layers(rs: &RootSet) -> Vec<Layer> {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut singular = Vec::new();
    for r in &rs.roots {
        match r.orientation {
            Orientation::Preserving => plus.push(Shape::Dot(r.location)),
            Orientation::Reversing => minus.push(Shape::Dot(r.location)),
            Orientation::Singular => singular.push(Shape::Cross(r.location)),
        }
    }
    let mut layers = vec![
        Layer {
            kind: LayerKind::Roots,
            style: Style::points("#1f4e9c", 3.0),
            shapes: plus,
        },
        Layer {
            kind: LayerKind::Roots,
            style: Style {
                stroke: "#1f4e9c".into(),
                fill: "white".into(),
                stroke_width: 1.2,
                marker: 3.0,
                opacity: 1.0,
            },
            shapes: minus,
        },
    ];
    if !singular.is_empty() {
        layers.push(Layer {
            kind: LayerKind::Roots,
            style: Style::points("#cc0000", 4.0),
            shapes: singular,
        });
    }
    layers
}

pub fn zeros_of_f_layer(zeros: &[Complex64]) -> Layer {
    Layer {
        kind: LayerKind::ZerosOfF,
        style: Style::points("#d98c00", 5.0),
        shapes: zeros.iter().map(|&z| Shape::Star(z)).collect(),
    }
}

/// Shaded `Omega` plus its boundary.
pub fn omega_layers(omega: &OmegaDecomposition) -> Vec<Layer> {
    let mut fill = Vec::new();
    let mut edge = Vec::new();
    for c in &omega.components {
        let outer = c.points();
        let holes: Vec<Vec<Complex64>> = c.holes.iter().map(|h| h.iter().map(|s| s.z).collect()).collect();
        for h in &holes {
            edge.push(Shape::Polyline {
                points: h.clone(),
                closed: true,
            });
        }
        edge.push(Shape::Polyline {
            points: outer.clone(),
            closed: true,
        });
        fill.push(Shape::Region { outer, holes });
    }
    vec![
        Layer {
            kind: LayerKind::Lemniscate,
            style: Style::area("#b0b0b0", 0.5),
            shapes: fill,
        },
        Layer {
            kind: LayerKind::Lemniscate,
            style: Style::line("#606060", 0.8),
            shapes: edge,
        },
    ]
}

pub fn caustic_layers(curves: &[CausticCurve]) -> Vec<Layer> {
    let lines = curves
        .iter()
        .map(|c| Shape::Polyline {
            points: c.image_samples.clone(),
            closed: true,
        })
        .collect();
    let cusps = curves
        .iter()
        .flat_map(|c| {
            c.cusps.iter().map(move |cusp| {
                let j = nearest_theta(&c.thetas, cusp.theta);
                Shape::Dot(c.image_samples[j])
            })
        })
        .collect();
    vec![
        Layer {
            kind: LayerKind::Caustic,
            style: Style::line("#222222", 1.0),
            shapes: lines,
        },
        Layer {
            kind: LayerKind::Cusps,
            style: Style::points("#cc0000", 2.5),
            shapes: cusps,
        },
    ]
}

fn nearest_theta(thetas: &[f64], t: f64) -> usize {
    (0..thetas.len())
        .min_by(|&a, &b| (thetas[a] - t).abs().total_cmp(&(thetas[b] - t).abs()))
        .unwrap_or(0)
}

pub fn newton_polygon_layer(poly: &LatticePolygon, stroke: &str) -> Layer {
    let pts: Vec<Complex64> = poly
        .hull
        .iter()
        .map(|v| Complex64::new(v.0 as f64, v.1 as f64))
        .collect();
    let mut shapes = vec![Shape::Polyline {
        points: pts.clone(),
        closed: true,
    }];
    shapes.extend(pts.into_iter().map(Shape::Dot));
    Layer {
        kind: LayerKind::NewtonPolygon,
        style: Style {
            stroke: stroke.into(),
            fill: stroke.into(),
            stroke_width: 1.5,
            marker: 3.0,
            opacity: 1.0,
        },
        shapes,
    }
}

/// Zero set of a real function on `[lo, hi]` by marching squares on an
/// `nx x ny` grid, as line segments.
pub fn zero_set_segments<F>(g: F, lo: Complex64, hi: Complex64, nx: usize, ny: usize) -> Vec<Shape>
where
    F: Fn(Complex64) -> f64,
{
    let dx = (hi.re - lo.re) / nx as f64;
    let dy = (hi.im - lo.im) / ny as f64;
    let at = |i: usize, j: usize| Complex64::new(lo.re + i as f64 * dx, lo.im + j as f64 * dy);
    let vals: Vec<f64> = (0..=ny).flat_map(|j| (0..=nx).map(move |i| (i, j))).map(|(i, j)| g(at(i, j))).collect();
    let v = |i: usize, j: usize| vals[j * (nx + 1) + i];
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut hits = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                let (va, vb) = (v(a.0, a.1), v(b.0, b.1));
                if (va < 0.0) != (vb < 0.0) {
                    let t = va / (va - vb);
                    hits.push(at(a.0, a.1) + (at(b.0, b.1) - at(a.0, a.1)) * t);
                }
            }
            if hits.len() == 2 {
                out.push(Shape::Segment(hits[0], hits[1]));
            } else if hits.len() == 4 {
                out.push(Shape::Segment(hits[0], hits[1]));
                out.push(Shape::Segment(hits[2], hits[3]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_figures_render_identically() {
        let fig = Figure::new("circle").with_layer(Layer {
            kind: LayerKind::Lemniscate,
            style: Style::line("black", 1.0),
            shapes: vec![Shape::Polyline {
                points: (0..16)
                    .map(|j| Complex64::from_polar(1.0, j as f64 * std::f64::consts::TAU / 16.0))
                    .collect(),
                closed: true,
            }],
        });
        let a = fig.render();
        assert_eq!(a, fig.clone().render());
        assert!(a.starts_with("<svg"));
        assert!(a.contains("class=\"lemniscate\""));
    }

    #[test]
    fn margin_keeps_points_inside() {
        let fig = Figure::new("pts").with_layer(Layer {
            kind: LayerKind::Roots,
            style: Style::points("black", 2.0),
            shapes: vec![Shape::Dot(Complex64::new(-3.0, 1.0)), Shape::Dot(Complex64::new(5.0, 2.0))],
        });
        let tr = fig.transform();
        for z in [Complex64::new(-3.0, 1.0), Complex64::new(5.0, 2.0)] {
            let (x, y) = tr.px(z);
            assert!(x > 0.0 && x < fig.width && y > 24.0 && y < fig.height);
        }
    }

    #[test]
    fn circle_zero_set() {
        let segs = zero_set_segments(
            |z| z.norm() - 1.0,
            Complex64::new(-2.0, -2.0),
            Complex64::new(2.0, 2.0),
            40,
            40,
        );
        assert!(!segs.is_empty());
        for s in segs {
            if let Shape::Segment(a, b) = s {
                assert!((a.norm() - 1.0).abs() < 0.02 && (b.norm() - 1.0).abs() < 0.02);
            }
        }
    }
}
