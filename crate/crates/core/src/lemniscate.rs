//! The critical lemniscate `{|f| = 1}` of `f = p'/q'` and the components of
//! the sense-reversing region `Omega = {|f| < 1}`.
//!
//! Boundary curves are traced with an arclength predictor-corrector. Walking
//! along `v = i f/f'` keeps `|f|` fixed, increases `arg f` and keeps `Omega`
//! on the left, so outer boundaries come out counterclockwise and hole
//! boundaries clockwise. Where a critical point of `f` sits on the curve,
//! `2k` arcs meet at angles `theta_j`; the sectors between `theta_(2l)` and
//! `theta_(2l+1)` belong to `Omega`. A boundary that arrives along
//! `theta_(2l+1)` therefore leaves along `theta_(2l)`, and the sectors become
//! separate components touching at that point.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpoly::{merge_multiple_roots, RationalFn};
use crate::error::{Error, Result};
use crate::hroots::{winding_number, Contour, HarmonicPoly};

/// Traced and resampled points satisfy `||f| - 1| <= LEVEL_TOL`.
pub const LEVEL_TOL: f64 = 1e-8;
/// A critical point of `f` counts as on the curve when `||f| - 1|` is below this.
pub const ON_CURVE_TOL: f64 = 1e-6;
/// Smallest `|f/f(z0) - 1|` at which the curve is traced directly next to a
/// critical point `z0`; closer in, the wedge model is used.
const RESOLVABLE_LEVEL: f64 = 1e-9;
const MAX_TURN: f64 = 2.0 * PI / 180.0;
const MAX_DTHETA: f64 = 0.05;
const MAX_TRACE_POINTS: usize = 2_000_000;
const RAY_SAMPLES: usize = 4000;
/// Generic starting direction for rays out of zeros and poles of `f`.
const RAY_ANGLE: f64 = 0.3217;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub z: Complex64,
    /// Continuous `arg f(z)`.
    pub theta: f64,
    pub f_val: Complex64,
    pub fprime_val: Complex64,
}

/// One component `D` of `Omega`, described by its boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveComponent {
    /// Outer boundary, counterclockwise, `theta` increasing; the closing
    /// segment back to the first sample is implicit.
    pub samples: Vec<CurveSample>,
    /// Zeros of `f` in `D`, which is the degree of `f: D -> unit disk`.
    pub zero_count: usize,
    /// Critical points of `f` on the outer boundary.
    pub critical_points: Vec<Complex64>,
    /// The zeros of `f` in `D`, with multiplicity.
    pub zeros: Vec<Complex64>,
    /// Boundaries of holes (clockwise).
    pub holes: Vec<Vec<CurveSample>>,
}

/// Point of a serialized boundary polyline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolylinePoint {
    pub re: f64,
    pub im: f64,
    pub theta: f64,
}

impl CurveComponent {
    pub fn is_simply_connected(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.z).collect()
    }

    pub fn polyline(&self) -> Vec<PolylinePoint> {
        self.samples
            .iter()
            .map(|s| PolylinePoint {
                re: s.z.re,
                im: s.z.im,
                theta: s.theta,
            })
            .collect()
    }

    /// Total increase of `arg f` around the outer boundary.
    pub fn theta_span(&self) -> f64 {
        theta_span(&self.samples)
    }

    /// `z` lies inside the outer boundary and outside every hole.
    pub fn contains(&self, z: Complex64) -> bool {
        point_in_polygon(z, &self.points()) && !self.holes.iter().any(|h| point_in_polygon(z, &points_of(h)))
    }

    /// Outer boundary as `(z, theta)` with every sample interval subdivided
    /// in equal `theta` steps until consecutive points are at most
    /// `max_step` apart. Equal-`theta` sampling is sparse where the boundary
    /// passes near a critical point of `f`; this fills those gaps.
    pub fn dense_boundary(&self, f: &RationalFn, max_step: f64) -> Vec<(Complex64, f64)> {
        let n = self.samples.len();
        let span = self.theta_span();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let a = &self.samples[j];
            let (zb, tb) = if j + 1 < n {
                (self.samples[j + 1].z, self.samples[j + 1].theta)
            } else {
                (self.samples[0].z, self.samples[0].theta + span)
            };
            out.push((a.z, a.theta));
            let pieces = ((zb - a.z).norm() / max_step).ceil() as usize;
            if pieces <= 1 {
                continue;
            }
            // march in theta; a failed shift keeps the coarse segment
            let mut fine = Vec::with_capacity(pieces);
            let mut z = a.z;
            let mut t = a.theta;
            let mut ok = true;
            for i in 1..pieces {
                let tn = a.theta + (tb - a.theta) * i as f64 / pieces as f64;
                match shift_along(f, z, tn - t) {
                    Some(zn) => {
                        fine.push((zn, tn));
                        z = zn;
                        t = tn;
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.extend(fine);
            }
        }
        out
    }

    /// Largest `|z - center|` over the outer boundary.
    pub fn extent(&self) -> (Complex64, f64) {
        let pts = self.points();
        let center = pts.iter().sum::<Complex64>() / pts.len().max(1) as f64;
        let r = pts.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        (center, r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaDecomposition {
    pub components: Vec<CurveComponent>,
    pub total_zero_count: usize,
    /// Critical points of `f` lying on the lemniscate.
    pub saddles: Vec<Complex64>,
    /// Common roots of `p'` and `q'`; `f` is not defined there as given.
    pub common_roots: Vec<Complex64>,
}

/// Local picture of the lemniscate at a critical point `z0` of order `k - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub k: usize,
    /// The `2k` ray directions, ascending, spanning `[theta_0, theta_0 + 2 pi)`.
    pub angles: Vec<f64>,
}

fn points_of(samples: &[CurveSample]) -> Vec<Complex64> {
    samples.iter().map(|s| s.z).collect()
}

fn theta_span(samples: &[CurveSample]) -> f64 {
    match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.theta - a.theta + (a.f_val / b.f_val).arg(),
        _ => 0.0,
    }
}

/// Even-odd test against a closed polygon.
pub fn point_in_polygon(z: Complex64, poly: &[Complex64]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Shoelace area, positive for counterclockwise polygons.
pub fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

/// Taylor coefficients `c_0, ..., c_order` of `f` at `z0`.
pub fn taylor_coefficients(f: &RationalFn, z0: Complex64, order: usize) -> Result<Vec<Complex64>> {
    let num = f.numerator().shift(z0);
    let den = f.denominator().shift(z0);
    let d0 = den.coeff(0);
    if d0.norm() == 0.0 {
        return Err(Error::InvalidInput(format!("f has a pole at {z0}")));
    }
    let mut c: Vec<Complex64> = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let mut acc = num.coeff(i);
        for j in 1..=i {
            acc -= den.coeff(j) * c[i - j];
        }
        c.push(acc / d0);
    }
    Ok(c)
}

/// Order and ray directions of the lemniscate at a critical point of `f`.
///
/// `k` is the index of the first Taylor coefficient beyond `c_0` that is not
/// negligible on the natural length scale of the expansion. The rays are
/// `theta_j = arg(f(z0)/f^(k)(z0))/k + (pi/k)(j + 1/2)`.
pub fn wedge_structure(f: &RationalFn, z0: Complex64) -> Result<Wedge> {
    let order = f.numerator().degree_or_zero() + f.denominator().degree_or_zero() + 2;
    let c = taylor_coefficients(f, z0, order)?;
    let modulus = c[0].norm();
    if (modulus - 1.0).abs() > ON_CURVE_TOL {
        return Err(Error::NotOnLemniscate { at: z0, modulus });
    }
    // length scale on which the expansion is O(1)
    let rho = (1..=order)
        .filter(|&i| c[i].norm() > 0.0)
        .map(|i| (modulus / c[i].norm()).powf(1.0 / i as f64))
        .fold(f64::INFINITY, f64::min);
    if !rho.is_finite() {
        return Err(Error::InvalidInput("f is constant".into()));
    }
    let k = (1..=order)
        .find(|&i| c[i].norm() * rho.powi(i as i32) > ON_CURVE_TOL * modulus)
        .expect("some coefficient attains the scale");
    if k == 1 {
        return Err(Error::NotCritical {
            at: z0,
            derivative: c[1].norm(),
        });
    }
    let kf = k as f64;
    let base = (c[0] / c[k]).arg() / kf;
    let angles = (0..2 * k).map(|j| base + PI / kf * (j as f64 + 0.5)).collect();
    Ok(Wedge { k, angles })
}

/// Tangent `v = i f(z)/f'(z)` of the lemniscate at `z`.
pub fn tangent_v(f: &RationalFn, z: Complex64) -> Result<Complex64> {
    let (fv, dfv) = f.eval_with_derivative(z);
    let modulus = fv.norm();
    if (modulus - 1.0).abs() > ON_CURVE_TOL {
        return Err(Error::NotOnLemniscate { at: z, modulus });
    }
    if dfv.norm() < 1e-12 * modulus / (1.0 + z.norm()) {
        return Err(Error::CriticalPoint { at: z });
    }
    Ok(Complex64::i() * fv / dfv)
}

/// Number of zeros of `f` inside a component: the winding of `f` around its
/// boundary (outer boundary plus holes).
pub fn zeros_inside(f: &RationalFn, component: &CurveComponent) -> Result<i64> {
    let mut total = 0;
    for boundary in std::iter::once(&component.samples).chain(component.holes.iter()) {
        let contour = Contour::Polyline(points_of(boundary));
        total += winding_number(|z| f.eval(z), &contour, 0)?;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
struct Saddle {
    z: Complex64,
    wedge: Wedge,
    radius: f64,
}

struct Tracer<'a> {
    f: &'a RationalFn,
    saddles: Vec<Saddle>,
    scale: f64,
}

struct TracedContour {
    samples: Vec<CurveSample>,
    saddles: Vec<Complex64>,
}

impl<'a> Tracer<'a> {
    fn sample(&self, z: Complex64, theta: f64) -> CurveSample {
        let (f_val, fprime_val) = self.f.eval_with_derivative(z);
        CurveSample {
            z,
            theta,
            f_val,
            fprime_val,
        }
    }

    /// Newton on `log|f|` along the gradient direction.
    fn correct(&self, mut z: Complex64) -> Option<Complex64> {
        for _ in 0..12 {
            let (fv, dfv) = self.f.eval_with_derivative(z);
            let l = fv.norm().ln();
            if !l.is_finite() || dfv.norm() == 0.0 {
                return None;
            }
            if l.abs() <= 1e-14 {
                return Some(z);
            }
            z -= fv / dfv * l;
        }
        let l = self.f.eval(z).norm().ln();
        (l.abs() <= LEVEL_TOL).then_some(z)
    }

    fn unit_tangent(&self, z: Complex64) -> Option<Complex64> {
        let (fv, dfv) = self.f.eval_with_derivative(z);
        let v = Complex64::i() * fv / dfv;
        (v.is_finite() && v.norm() > 0.0).then(|| v / v.norm())
    }

    fn trace(&self, start: Complex64) -> Result<TracedContour> {
        let hmin = 1e-8 * self.scale;
        let hmax = 0.05 * self.scale;
        let theta0 = self.f.eval(start).arg();
        let mut samples = vec![self.sample(start, theta0)];
        let mut visited = Vec::new();
        let mut z = start;
        let mut theta = theta0;
        let mut h = 1e-3 * self.scale;
        let mut turns = 1.0;
        let close_tol = 1e-7 * self.scale;
        loop {
            if samples.len() > MAX_TRACE_POINTS {
                return Err(Error::TraceStall { at: z, step: h });
            }
            let t = self.unit_tangent(z).ok_or(Error::CriticalPoint { at: z })?;

            // hand over to the wedge model next to a critical point
            if let Some(s) = self
                .saddles
                .iter()
                .find(|s| (z - s.z).norm() < s.radius && (t.conj() * (s.z - z)).re > 0.0)
            {
                let (exit, crossed) = self.cross_saddle(s, z)?;
                let theta_c = theta + (self.f.eval(s.z) / self.f.eval(z)).arg();
                let theta_e = theta_c + (self.f.eval(exit) / self.f.eval(s.z)).arg();
                if self.closes_between(&samples, theta0, turns, theta_e, start, close_tol) {
                    break;
                }
                samples.push(self.sample(s.z, theta_c));
                samples.push(self.sample(exit, theta_e));
                visited.push(crossed);
                z = exit;
                theta = theta_e;
                continue;
            }

            // never step over a saddle disk
            let mut step = h;
            for s in &self.saddles {
                let d = (z - s.z).norm();
                if d < 4.0 * s.radius + step {
                    step = step.min((0.5 * d).max(0.25 * s.radius));
                }
            }
            let accepted = loop {
                if step < hmin {
                    return Err(Error::TraceStall { at: z, step });
                }
                let Some(zn) = self.correct(z + t * step) else {
                    step *= 0.5;
                    continue;
                };
                let Some(tn) = self.unit_tangent(zn) else {
                    step *= 0.5;
                    continue;
                };
                let turn = (tn / t).arg().abs();
                let dtheta = (self.f.eval(zn) / self.f.eval(z)).arg();
                if turn > MAX_TURN || dtheta > MAX_DTHETA || dtheta <= 0.0 {
                    step *= 0.5;
                    continue;
                }
                break (zn, dtheta, turn);
            };
            let (zn, dtheta, turn) = accepted;
            let theta_n = theta + dtheta;
            if self.closes_between(&samples, theta0, turns, theta_n, start, close_tol) {
                break;
            }
            while theta_n - theta0 >= TAU * turns {
                turns += 1.0;
            }
            samples.push(self.sample(zn, theta_n));
            z = zn;
            theta = theta_n;
            h = if turn < MAX_TURN / 3.0 && dtheta < MAX_DTHETA / 3.0 {
                (1.5 * step).min(hmax)
            } else {
                step
            };
        }
        Ok(TracedContour {
            samples,
            saddles: visited,
        })
    }

    /// The step from the last sample to `theta_n` passes `theta0 + 2 pi turns`
    /// at the starting point, so the contour is closed.
    fn closes_between(
        &self,
        samples: &[CurveSample],
        theta0: f64,
        turns: f64,
        theta_n: f64,
        start: Complex64,
        tol: f64,
    ) -> bool {
        if theta_n - theta0 < TAU * turns {
            return false;
        }
        let last = samples.last().expect("nonempty");
        if (last.z - start).norm() > 0.2 * self.scale {
            return false;
        }
        let target = Complex64::from_polar(1.0, theta0);
        solve_value_near(self.f, target, last.z).is_some_and(|w| (w - start).norm() <= tol)
    }

    /// Arriving at saddle `s` from `z`: the exit point on the paired ray.
    fn cross_saddle(&self, s: &Saddle, z: Complex64) -> Result<(Complex64, Complex64)> {
        let dir = (z - s.z).arg();
        let (j, _) = s
            .wedge
            .angles
            .iter()
            .enumerate()
            .map(|(j, a)| (j, wrap(dir - a).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("wedge has rays");
        if j % 2 == 0 {
            return Err(Error::SaddleUnresolved { at: s.z });
        }
        let r = (z - s.z).norm();
        let exit_guess = s.z + Complex64::from_polar(r, s.wedge.angles[j - 1]);
        let exit = self.correct(exit_guess).ok_or(Error::SaddleUnresolved { at: s.z })?;
        Ok((exit, s.z))
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Newton for `f(w) = target` from `w0`.
fn solve_value_near(f: &RationalFn, target: Complex64, w0: Complex64) -> Option<Complex64> {
    let mut w = w0;
    for _ in 0..40 {
        let (fv, dfv) = f.eval_with_derivative(w);
        let g = (fv / target).ln();
        if g.norm() <= 1e-14 {
            return Some(w);
        }
        let dw = g * fv / dfv;
        if !dw.is_finite() {
            return None;
        }
        w -= dw;
    }
    ((f.eval(w) / target).ln().norm() <= 1e-10).then_some(w)
}

/// Radius beyond which `|f| > 1`.
fn outer_radius(f: &RationalFn) -> f64 {
    let num = f.numerator();
    let den = f.denominator();
    let dn = num.degree_or_zero();
    let lead = num.leading().norm();
    let g = |r: f64| {
        let lower: f64 = (0..dn).map(|k| num.coeff(k).norm() * r.powi(k as i32)).sum();
        lead * r.powi(dn as i32) - lower - den.abs_eval(r)
    };
    let mut r = 1.0;
    while g(r) <= 0.0 {
        r *= 2.0;
    }
    r
}

/// Crossings of `|f| = 1` along the ray `w + s e^{i alpha}`, `0 < s <= len`.
fn ray_crossings(f: &RationalFn, w: Complex64, alpha: f64, len: f64) -> Vec<Complex64> {
    let dir = Complex64::from_polar(1.0, alpha);
    let g = |s: f64| f.eval(w + dir * s).norm().ln();
    let mut out = Vec::new();
    let mut s_prev = len * 1e-9;
    let mut g_prev = g(s_prev);
    for i in 1..=RAY_SAMPLES {
        let s = len * i as f64 / RAY_SAMPLES as f64;
        let gs = g(s);
        if g_prev.is_finite() && gs.is_finite() && (g_prev < 0.0) != (gs < 0.0) {
            let (mut lo, mut hi) = (s_prev, s);
            let neg_lo = g_prev < 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) < 0.0) == neg_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(w + dir * (0.5 * (lo + hi)));
        }
        s_prev = s;
        g_prev = gs;
    }
    out
}

fn near_polyline(z: Complex64, pts: &[Complex64], tol_abs: f64) -> bool {
    let n = pts.len();
    (0..n).any(|i| {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let ab = b - a;
        let len2 = ab.norm_sqr();
        let s = if len2 > 0.0 { ((z - a) * ab.conj()).re / len2 } else { 0.0 };
        let p = a + ab * s.clamp(0.0, 1.0);
        (z - p).norm() <= 1e-2 * len2.sqrt() + tol_abs
    })
}

/// Critical points of `f` on `|f| = 1`, merged by multiplicity.
fn lemniscate_saddles(f: &RationalFn, scale: f64) -> Result<Vec<Complex64>> {
    let dnum = f.derivative_numerator();
    if dnum.degree_or_zero() == 0 {
        return Ok(Vec::new());
    }
    let roots = dnum.all_roots()?;
    let den_roots = if f.denominator().degree_or_zero() > 0 {
        f.denominator().all_roots()?
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    for (c, _) in merge_multiple_roots(&dnum, &roots, 1e-5 * scale, 1e-2 * scale) {
        if den_roots.iter().any(|d| (d - c).norm() <= 1e-5 * scale) {
            continue;
        }
        if (f.eval(c).norm() - 1.0).abs() < ON_CURVE_TOL {
            out.push(c);
        }
    }
    Ok(out)
}

/// Traces `{|f| = 1}` and splits `{|f| < 1}` into components.
pub fn trace_lemniscate(f: &RationalFn) -> Result<OmegaDecomposition> {
    let num = f.numerator();
    let den = f.denominator();
    if num.degree_or_zero() <= den.degree_or_zero() {
        return Err(Error::InvalidInput(
            "numerator degree must exceed denominator degree for a bounded region".into(),
        ));
    }
    let r_out = outer_radius(f);
    let scale = r_out.max(1.0);
    let common = f.common_roots()?;
    let zeros: Vec<Complex64> = num
        .all_roots()?
        .into_iter()
        .filter(|z| !common.iter().any(|c| (c - z).norm() <= 1e-7 * scale))
        .collect();
    let poles: Vec<Complex64> = if den.degree_or_zero() > 0 { den.all_roots()? } else { Vec::new() };

    let saddle_pts = lemniscate_saddles(f, scale)?;
    let mut saddles = Vec::new();
    for &c in &saddle_pts {
        let wedge = wedge_structure(f, c)?;
        let gap = zeros
            .iter()
            .chain(poles.iter())
            .chain(saddle_pts.iter().filter(|&&o| o != c))
            .map(|w| (w - c).norm())
            .fold(f64::INFINITY, f64::min);
        // inside this radius |f| - 1 is too small against rounding to trace
        let taylor = taylor_coefficients(f, c, wedge.k)?;
        let resolvable = (RESOLVABLE_LEVEL * taylor[0].norm() / taylor[wedge.k].norm()).powf(1.0 / wedge.k as f64);
        saddles.push(Saddle {
            z: c,
            wedge,
            radius: (1e-3 * scale).max(resolvable).min(0.1 * gap),
        });
    }
    let tracer = Tracer {
        f,
        saddles: saddles.clone(),
        scale,
    };

    let mut contours: Vec<TracedContour> = Vec::new();
    let sources: Vec<Complex64> = zeros.iter().chain(poles.iter()).copied().collect();
    for &w in &sources {
        let len = r_out + w.norm() + 1.0;
        for attempt in 0..4 {
            let alpha = RAY_ANGLE + 0.7 * attempt as f64;
            let crossings = ray_crossings(f, w, alpha, len);
            if crossings
                .iter()
                .any(|z| saddles.iter().any(|s| (z - s.z).norm() < 2.0 * s.radius))
            {
                continue;
            }
            for z in crossings {
                if contours
                    .iter()
                    .any(|c| near_polyline(z, &points_of(&c.samples), 1e-9 * scale))
                {
                    continue;
                }
                let Some(start) = tracer.correct(z) else { continue };
                contours.push(tracer.trace(start)?);
            }
            break;
        }
    }

    // outer boundaries wind counterclockwise, holes clockwise
    let areas: Vec<f64> = contours.iter().map(|c| signed_area(&points_of(&c.samples))).collect();
    let mut components: Vec<CurveComponent> = Vec::new();
    let mut outer_ids = Vec::new();
    for (i, c) in contours.iter().enumerate() {
        if areas[i] > 0.0 {
            outer_ids.push(i);
            components.push(CurveComponent {
                samples: c.samples.clone(),
                zero_count: 0,
                critical_points: c.saddles.clone(),
                zeros: Vec::new(),
                holes: Vec::new(),
            });
        }
    }
    for (i, c) in contours.iter().enumerate() {
        if areas[i] > 0.0 {
            continue;
        }
        let probe = c.samples[0].z;
        let parent = outer_ids
            .iter()
            .enumerate()
            .filter(|(_, &o)| point_in_polygon(probe, &points_of(&contours[o].samples)))
            .min_by(|a, b| areas[*a.1].total_cmp(&areas[*b.1]));
        if let Some((slot, _)) = parent {
            components[slot].holes.push(c.samples.clone());
        }
    }
    for comp in components.iter_mut() {
        comp.zeros = zeros.iter().copied().filter(|&z| comp.contains(z)).collect();
        let span = theta_span(&comp.samples) + comp.holes.iter().map(|h| theta_span(h)).sum::<f64>();
        comp.zero_count = (span / TAU).round().max(0.0) as usize;
    }
    // stable order: by leftmost, then lowest point of each component
    components.sort_by(|a, b| {
        let ka = a.extent().0;
        let kb = b.extent().0;
        ka.re.total_cmp(&kb.re).then(ka.im.total_cmp(&kb.im))
    });
    let total_zero_count = components.iter().map(|c| c.zero_count).sum();
    Ok(OmegaDecomposition {
        components,
        total_zero_count,
        saddles: saddle_pts,
        common_roots: common,
    })
}

/// Point of the boundary with `arg f = theta_raw` between samples `a` and `b`.
fn locate_on_segment(f: &RationalFn, a: &CurveSample, b: &CurveSample, theta_raw: f64) -> Option<Complex64> {
    let target = Complex64::from_polar(1.0, theta_raw);
    let s = ((theta_raw - a.theta) / (b.theta - a.theta)).clamp(0.0, 1.0);
    let seg = (b.z - a.z).norm();
    let guess = a.z + (b.z - a.z) * s;
    if let Some(w) = solve_value_near(f, target, guess) {
        let theta_w = a.theta + (f.eval(w) / a.f_val).arg();
        if (w - guess).norm() <= 2.0 * seg + 1e-12 && (theta_w - theta_raw).abs() < 1e-9 {
            return Some(w);
        }
    }
    // bisection along the chord, projecting each point onto the curve
    let project = |s: f64| -> Option<(Complex64, f64)> {
        let mut w = a.z + (b.z - a.z) * s;
        for _ in 0..30 {
            let (fv, dfv) = f.eval_with_derivative(w);
            let l = fv.norm().ln();
            if l.abs() <= 1e-15 {
                break;
            }
            let dw = fv / dfv * l;
            if !dw.is_finite() {
                return None;
            }
            w -= dw;
        }
        Some((w, a.theta + (f.eval(w) / a.f_val).arg()))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (_, th) = project(mid)?;
        if th < theta_raw {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    project(0.5 * (lo + hi)).map(|(w, _)| w)
}

/// Resamples a boundary at equal steps of `arg f`.
///
/// The result has `N = samples_per_turn * k` points with
/// `theta = 2 pi k (j + 1/2) / N` exactly, measured from a point where
/// `f = 1`; `k` is the number of turns of `arg f` around the boundary. The
/// half-step offset keeps samples off critical points whose `f` value is a
/// dyadic root of unity (`f = -1`, `f = i`, ...), which symmetric examples
/// produce.
pub fn resample_boundary(f: &RationalFn, samples: &[CurveSample], samples_per_turn: usize) -> Result<Vec<CurveSample>> {
    let span = theta_span(samples);
    let k = (span / TAU).round() as usize;
    if k == 0 {
        return Err(Error::InvalidInput("arg f does not turn along the boundary".into()));
    }
    let theta0 = samples[0].theta;
    let base = TAU * (theta0 / TAU).ceil();
    // closed list of samples with the first repeated at the end
    let mut ring: Vec<CurveSample> = samples.to_vec();
    let mut closing = samples[0];
    closing.theta = theta0 + span;
    ring.push(closing);
    let total = samples_per_turn * k;
    let mut out = Vec::with_capacity(total);
    for j in 0..total {
        let t = TAU * k as f64 * (j as f64 + 0.5) / total as f64;
        let mut raw = base + t;
        if raw >= theta0 + span {
            raw -= span;
        }
        let idx = ring.partition_point(|s| s.theta <= raw).clamp(1, ring.len() - 1);
        let (a, b) = (&ring[idx - 1], &ring[idx]);
        let z = locate_on_segment(f, a, b, raw).ok_or(Error::TraceStall { at: a.z, step: 0.0 })?;
        let (f_val, fprime_val) = f.eval_with_derivative(z);
        out.push(CurveSample {
            z,
            theta: t,
            f_val,
            fprime_val,
        });
    }
    Ok(out)
}

/// Default resolution of [`harmonic_parametrization`].
pub const SAMPLES_PER_TURN: usize = 4096;

/// The component with its outer boundary resampled at equal steps of
/// `theta = arg f` over `[0, 2 pi k)`: the parametrization `eta(theta) =
/// f^{-1}(e^{i theta})` of the boundary.
pub fn harmonic_parametrization(f: &RationalFn, component: &CurveComponent, samples_per_turn: usize) -> Result<CurveComponent> {
    let samples = resample_boundary(f, &component.samples, samples_per_turn)?;
    Ok(CurveComponent {
        samples,
        ..component.clone()
    })
}

/// Step in `theta` of the finite differences in [`curvature_ratio`].
pub const FD_STEP: f64 = 1e-5;

/// Point of the boundary at `arg f = theta_sample + dtheta`, near `z`.
pub fn shift_along(f: &RationalFn, z: Complex64, dtheta: f64) -> Option<Complex64> {
    let (fv, dfv) = f.eval_with_derivative(z);
    let v = Complex64::i() * fv / dfv;
    let target = fv / fv.norm() * Complex64::from_polar(1.0, dtheta);
    solve_value_near(f, target, z + v * dtheta)
}

/// `d/dtheta [arg v + arg q']` at every sample of a harmonically
/// parametrized boundary, which is `kappa/|f'|` for the curvature `kappa`
/// of `q(boundary)`. Central differences over `theta +- FD_STEP`.
pub fn curvature_ratio(h: &HarmonicPoly, component: &CurveComponent) -> Result<Vec<f64>> {
    let f = h.critical_fn()?;
    let dq = h.q().derivative();
    let g = |z: Complex64| -> Option<f64> {
        let (fv, dfv) = f.eval_with_derivative(z);
        let v = Complex64::i() * fv / dfv;
        Some(v.arg() + dq.eval(z).arg())
    };
    component
        .samples
        .iter()
        .map(|s| {
            let plus = shift_along(&f, s.z, FD_STEP).and_then(g);
            let minus = shift_along(&f, s.z, -FD_STEP).and_then(g);
            match (plus, minus) {
                (Some(a), Some(b)) => {
                    let d = wrap(a - b);
                    if d.abs() > PI / 2.0 {
                        Err(Error::BranchJump {
                            theta: s.theta,
                            step: d,
                        })
                    } else {
                        Ok(d / (2.0 * FD_STEP))
                    }
                }
                _ => Err(Error::CriticalPoint { at: s.z }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::CPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly_fn(coeffs: &[f64]) -> RationalFn {
        RationalFn::new(CPoly::from_real(coeffs), CPoly::from_real(&[1.0])).unwrap()
    }

    #[test]
    fn unit_circle() {
        let f = poly_fn(&[0.0, 1.0]);
        let om = trace_lemniscate(&f).unwrap();
        assert_eq!(om.components.len(), 1);
        let comp = &om.components[0];
        assert_eq!(comp.zero_count, 1);
        assert!(comp.is_simply_connected());
        for s in &comp.samples {
            assert!((s.z.norm() - 1.0).abs() < LEVEL_TOL);
        }
        assert!(signed_area(&comp.points()) > 0.0);
        assert!((signed_area(&comp.points()) - PI).abs() < 1e-3);
        assert_eq!(zeros_inside(&f, comp).unwrap(), 1);
    }

    #[test]
    fn petals_meet_at_saddle() {
        let f = poly_fn(&[-1.0, 0.0, 0.0, 1.0]);
        let om = trace_lemniscate(&f).unwrap();
        assert_eq!(om.components.len(), 3);
        assert_eq!(om.total_zero_count, 3);
        assert_eq!(om.saddles.len(), 1);
        assert!(om.saddles[0].norm() < 1e-7);
        for comp in &om.components {
            assert_eq!(comp.zero_count, 1);
            assert_eq!(comp.zeros.len(), 1);
            assert_eq!(comp.critical_points.len(), 1);
            assert_eq!(zeros_inside(&f, comp).unwrap(), 1);
            for s in &comp.samples {
                assert!((s.f_val.norm() - 1.0).abs() < LEVEL_TOL);
            }
        }
    }

    #[test]
    fn wedge_examples() {
        let w = wedge_structure(&poly_fn(&[1.0, 0.0, 1.0]), c(0.0, 0.0)).unwrap();
        assert_eq!(w.k, 2);
        assert_eq!(w.angles.len(), 4);
        for (j, a) in w.angles.iter().enumerate() {
            assert!((a - (PI / 4.0 + j as f64 * PI / 2.0)).abs() < 1e-12);
        }
        let w = wedge_structure(&poly_fn(&[-1.0, 0.0, 0.0, 1.0]), c(0.0, 0.0)).unwrap();
        assert_eq!(w.k, 3);
        assert!((w.angles[5] - w.angles[0] - 5.0 * PI / 3.0).abs() < 1e-12);
        assert!(matches!(
            wedge_structure(&poly_fn(&[1.0, 0.0, 1.0]), c(0.5, 0.0)),
            Err(Error::NotOnLemniscate { .. })
        ));
        assert!(matches!(
            wedge_structure(&poly_fn(&[0.0, 1.0]), c(1.0, 0.0)),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn tangent_examples() {
        let f = poly_fn(&[0.0, 1.0]);
        assert!((tangent_v(&f, c(1.0, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((tangent_v(&f, c(0.0, 1.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(tangent_v(&f, c(0.5, 0.0)), Err(Error::NotOnLemniscate { .. })));
    }

    #[test]
    fn resampling_z_squared_spans_two_turns() {
        let f = poly_fn(&[0.0, 0.0, 1.0]);
        let om = trace_lemniscate(&f).unwrap();
        assert_eq!(om.components.len(), 1);
        let hp = harmonic_parametrization(&f, &om.components[0], 256).unwrap();
        assert_eq!(hp.samples.len(), 512);
        for (j, s) in hp.samples.iter().enumerate() {
            assert!((s.theta - TAU * 2.0 * (j as f64 + 0.5) / 512.0).abs() < 1e-12);
            let want = Complex64::from_polar(1.0, s.theta);
            assert!((s.f_val - want).norm() < 1e-10);
        }
    }

    #[test]
    fn unit_circle_curvature_ratio_is_one() {
        let h = HarmonicPoly::new(CPoly::from_real(&[0.0, 0.0, 0.5]), CPoly::from_real(&[0.0, 1.0])).unwrap();
        let f = h.critical_fn().unwrap();
        let om = trace_lemniscate(&f).unwrap();
        let hp = harmonic_parametrization(&f, &om.components[0], 64).unwrap();
        for r in curvature_ratio(&h, &hp).unwrap() {
            assert!((r - 1.0).abs() < 1e-6);
        }
    }
}
