//! Caustics `h(boundary of D)` of lemniscate components, their cusps and
//! winding numbers, the rotation search for two zeros in one component, and
//! the local shape of the lemniscate at a critical point.
//!
//! Write `h = p + conj(q) = p - conj(r)` with `r = -q`. On a harmonically
//! parametrized boundary (`f(eta(theta)) = e^{i theta}`, `f = p'/q'`) the
//! caustic tangent is
//! `V = v p' + conj(v q') = 2i s Im(v r' s)`, with `v = i f/f'` and
//! `s = e^{i (theta + pi)/2}` a continuous branch of `sqrt(p'/r') = sqrt(-f)`.
//! Writing `v r' s = |.| e^{i Psi}`, the caustic has a cusp exactly where
//! `Psi` crosses a multiple of `pi`, and between cusps `arg V` grows at rate
//! `1/2`. The branch `s` changes sign once per turn; its seam sits at the
//! first boundary sample.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpoly::{poly_jet, CPoly, RationalFn};
use crate::error::{Error, Result};
use crate::hroots::{find_all_zeros, HarmonicPoly, SearchOptions};
use crate::lemniscate::{
    curvature_ratio, harmonic_parametrization, point_in_polygon, shift_along, trace_lemniscate, wedge_structure, wrap,
    CurveComponent,
    ON_CURVE_TOL,
};

/// A sign change of `Im(v r' s)` counts only when both sides exceed
/// this fraction of its maximum over the component.
pub const NOISE_FLOOR: f64 = 1e-7;
/// Cusp positions are refined to this precision in `theta`.
pub const CUSP_THETA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuspKind {
    /// `Im(v r' s)` changes sign at a smooth boundary point.
    SmoothPointSignChange,
    /// Sign change across the seam of the branch `s`.
    BranchCutCase,
    /// The boundary passes a critical point of `f` and the wedge angle test holds.
    CriticalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    pub theta: f64,
    pub z: Complex64,
    pub kind: CuspKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticCurve {
    pub thetas: Vec<f64>,
    /// `h(eta(theta))`.
    pub image_samples: Vec<Complex64>,
    /// Caustic tangent `V`.
    pub v_samples: Vec<Complex64>,
    /// Branch-tracked `Psi = arg v + arg r' + (theta + pi)/2`.
    pub psi_samples: Vec<f64>,
    /// `Im(v r' s)`.
    pub im_w: Vec<f64>,
    pub cusps: Vec<Cusp>,
    pub zero_count: usize,
    pub simply_connected: bool,
    /// `Psi` over the closing step back to `theta = 0`, i.e. `Psi(2 pi k)`.
    pub psi_end: f64,
}

impl CausticCurve {
    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }

    /// Total increase of `Psi` around the boundary.
    pub fn psi_increment(&self) -> f64 {
        self.psi_end - self.psi_samples[0]
    }

    /// Number of multiples of `pi` crossed by `Psi`; equals the cusp count.
    pub fn psi_crossings(&self) -> usize {
        let mut vals = self.psi_samples.clone();
        vals.push(self.psi_end);
        vals.windows(2)
            .map(|w| ((w[1] / PI).floor() - (w[0] / PI).floor()).abs() as usize)
            .sum()
    }

    /// Parity and lower bound on the cusp count for simply connected
    /// components: `cusps = k (mod 2)` and `cusps >= k + 2`.
    pub fn cusp_law_holds(&self) -> Option<bool> {
        self.simply_connected.then(|| {
            let c = self.cusp_count();
            c % 2 == self.zero_count % 2 && c >= self.zero_count + 2
        })
    }
}

/// `v`, `V` and the factored `2i s Im(v r' s)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticTangent {
    pub v: Complex64,
    pub big_v: Complex64,
    pub factored: Complex64,
}

/// Caustic tangent at a boundary point, checked against its factored form.
pub fn tangent_big_v(h: &HarmonicPoly, f: &RationalFn, z: Complex64) -> Result<CausticTangent> {
    let v = crate::lemniscate::tangent_v(f, z)?;
    let dp = h.p().derivative().eval(z);
    let dq = h.q().derivative().eval(z);
    let big_v = v * dp + (v * dq).conj();
    let s = (-f.eval(z)).sqrt();
    let factored = Complex64::i() * s * (-v * dq * s).im * 2.0;
    let scale = v.norm() * (dp.norm() + dq.norm());
    if (big_v - factored).norm() > 1e-9 * scale {
        return Err(Error::AssumptionFailed(format!(
            "caustic tangent {big_v} disagrees with factored form {factored} at {z}"
        )));
    }
    Ok(CausticTangent { v, big_v, factored })
}

/// `v r' s` with `r' = -q'` and `s = e^{i (theta + pi)/2}`.
fn w_at(f: &RationalFn, dq: &CPoly, z: Complex64, theta: f64) -> Complex64 {
    let (fv, dfv) = f.eval_with_derivative(z);
    let v = Complex64::i() * fv / dfv;
    -v * dq.eval(z) * Complex64::from_polar(1.0, (theta + PI) / 2.0)
}

/// Sample interval `j -> j + 1` (cyclic) that contains a critical point `c`.
fn interval_of(component: &CurveComponent, c: Complex64) -> usize {
    let s = &component.samples;
    let n = s.len();
    (0..n)
        .min_by(|&a, &b| {
            let da = (s[a].z - c).norm() + (s[(a + 1) % n].z - c).norm();
            let db = (s[b].z - c).norm() + (s[(b + 1) % n].z - c).norm();
            da.total_cmp(&db)
        })
        .expect("nonempty boundary")
}

/// Continuous `theta` of the critical point `c` inside interval `j`.
fn theta_in_interval(f: &RationalFn, component: &CurveComponent, j: usize, c: Complex64) -> f64 {
    let a = &component.samples[j];
    a.theta + (f.eval(c) / a.f_val).arg()
}

/// Branch-tracked `Psi` on a harmonically parametrized boundary. Across a
/// critical point of `f`, `arg v` jumps forward by an angle in `[pi/2, pi)`,
/// so that step is taken in `[-pi/4, 7 pi/4)`; elsewhere steps must stay
/// below `pi/2`.
pub fn psi(h: &HarmonicPoly, component: &CurveComponent) -> Result<Vec<f64>> {
    Ok(psi_with_end(h, component)?.0)
}

fn psi_with_end(h: &HarmonicPoly, component: &CurveComponent) -> Result<(Vec<f64>, f64)> {
    let f = h.critical_fn()?;
    let dq = h.q().derivative();
    let n = component.samples.len();
    let span = component.theta_span();
    let jump_intervals: Vec<usize> = component
        .critical_points
        .iter()
        .map(|&c| interval_of(component, c))
        .collect();
    let raw: Vec<f64> = component
        .samples
        .iter()
        .map(|s| w_at(&f, &dq, s.z, s.theta).arg())
        .collect();
    let mut out = Vec::with_capacity(n);
    out.push(raw[0]);
    let mut end = 0.0;
    for j in 0..n {
        let next_raw = if j + 1 < n {
            raw[j + 1]
        } else {
            // closing step: continue s once around
            let s0 = &component.samples[0];
            w_at(&f, &dq, s0.z, s0.theta + span).arg()
        };
        let d = wrap(next_raw - raw[j]);
        let step = if jump_intervals.contains(&j) {
            if d < -FRAC_PI_4 {
                d + TAU
            } else {
                d
            }
        } else if d.abs() >= FRAC_PI_4 {
            // fast turning, e.g. where the boundary passes close to a
            // critical point of f: resolve the step by marching
            let a = &component.samples[j];
            let (z1, t1) = if j + 1 < n {
                let b = &component.samples[j + 1];
                (b.z, b.theta)
            } else {
                (component.samples[0].z, component.samples[0].theta + span)
            };
            arg_w_increment(&f, &dq, a.z, a.theta, z1, t1).ok_or(Error::BranchJump {
                theta: a.theta,
                step: d,
            })?
        } else {
            d
        };
        let value = out[j] + step;
        if j + 1 < n {
            out.push(value);
        } else {
            end = value;
        }
    }
    Ok((out, end))
}

/// Largest boundary spacing, relative to the component's extent, of the
/// polylines used for winding numbers.
pub const DENSE_STEP: f64 = 1e-3;

/// Finest subdivision level tried by [`arg_w_increment`].
const MAX_MARCH_LEVEL: u32 = 12;

/// Continuous change of `arg w` from `(z0, t0)` to `(z1, t1)` along the
/// boundary, marched in equal `theta` steps. The step count doubles until
/// every step turns `w` by less than `pi/4` and the march lands on `z1`.
fn arg_w_increment(f: &RationalFn, dq: &CPoly, z0: Complex64, t0: f64, z1: Complex64, t1: f64) -> Option<f64> {
    'level: for level in 1..=MAX_MARCH_LEVEL {
        let steps = 1usize << level;
        let (mut z, mut t) = (z0, t0);
        let mut a = w_at(f, dq, z, t).arg();
        let mut total = 0.0;
        for i in 1..=steps {
            let tn = t0 + (t1 - t0) * i as f64 / steps as f64;
            let Some(zn) = shift_along(f, z, tn - t) else { continue 'level };
            let an = w_at(f, dq, zn, tn).arg();
            let d = wrap(an - a);
            if d.abs() >= FRAC_PI_4 {
                continue 'level;
            }
            total += d;
            (z, t, a) = (zn, tn, an);
        }
        if (z - z1).norm() <= 1e-8 * (1.0 + z1.norm()) {
            return Some(total);
        }
    }
    None
}

/// Computes the caustic of a harmonically parametrized component and its cusps.
pub fn detect_cusps(h: &HarmonicPoly, component: &CurveComponent) -> Result<CausticCurve> {
    let f = h.critical_fn()?;
    let dp = h.p().derivative();
    let dq = h.q().derivative();
    let samples = &component.samples;
    let n = samples.len();
    let span = component.theta_span();
    let k = component.zero_count;
    let (psi_samples, psi_end) = psi_with_end(h, component)?;

    let mut thetas = Vec::with_capacity(n);
    let mut image = Vec::with_capacity(n);
    let mut big_v = Vec::with_capacity(n);
    let mut im_w = Vec::with_capacity(n);
    for s in samples {
        let v = Complex64::i() * s.f_val / s.fprime_val;
        let dqz = dq.eval(s.z);
        thetas.push(s.theta);
        image.push(h.eval(s.z));
        big_v.push(v * dp.eval(s.z) + (v * dqz).conj());
        im_w.push(w_at(&f, &dq, s.z, s.theta).im);
    }
    let floor = NOISE_FLOOR * im_w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let crit: Vec<(usize, Complex64)> = component
        .critical_points
        .iter()
        .map(|&c| (interval_of(component, c), c))
        .collect();

    let mut cusps = Vec::new();
    // One walk around the boundary from the first significant sample. Each
    // critical point of f is bracketed by points just before and after it,
    // found by marching along the boundary, so a sign change across it is
    // read off from the actual values on both sides.
    let mut fallback = Vec::new();
    if let Some(j0) = (0..n).find(|&j| im_w[j].abs() > floor) {
        let mut walk = Vec::with_capacity(n + 1 + 2 * crit.len());
        for step in 0..=n {
            let idx = (j0 + step) % n;
            let a = &samples[idx];
            let t = a.theta + if j0 + step >= n { span } else { 0.0 };
            let w = w_at(&f, &dq, a.z, t);
            walk.push(WalkPoint {
                z: a.z,
                theta: t,
                val: w.im,
                significant: w.im.abs() > floor,
                mark: Mark::Sample {
                    seam: idx == 0 && step > 0,
                },
            });
            if step == n {
                break;
            }
            let b = &samples[(idx + 1) % n];
            let t_next = t + (b.f_val / a.f_val).arg().rem_euclid(TAU);
            if !crit.iter().any(|(ci, _)| *ci == idx) {
                let w_next = w_at(&f, &dq, b.z, t_next);
                subdivide(&f, &dq, (a.z, t, w), (b.z, t_next, w_next), 0, floor, &mut walk);
            }
            for &(_, c) in crit.iter().filter(|(ci, _)| *ci == idx) {
                let tc = t + (f.eval(c) / a.f_val).arg();
                let before = approach(&f, &dq, c, a.z, t, tc);
                let after = approach(&f, &dq, c, b.z, t_next, tc);
                match (before, after) {
                    (Some(pb), Some(pa)) => {
                        walk.push(pb);
                        walk.push(WalkPoint {
                            mark: Mark::AfterCritical { c, theta: tc },
                            ..pa
                        });
                    }
                    _ => {
                        fallback.push((idx, c));
                        walk.push(WalkPoint {
                            z: c,
                            theta: tc,
                            val: 0.0,
                            significant: false,
                            mark: Mark::Barrier,
                        });
                    }
                }
            }
        }
        let mut last = 0;
        for i in 1..walk.len() {
            if !walk[i].significant {
                continue;
            }
            let between = &walk[last + 1..=i];
            if walk[i].val.signum() != walk[last].val.signum() {
                let crossed = between.iter().find_map(|p| match p.mark {
                    Mark::AfterCritical { c, theta } => Some((c, theta)),
                    _ => None,
                });
                let barrier = between.iter().any(|p| matches!(p.mark, Mark::Barrier));
                if let Some((c, theta)) = crossed {
                    cusps.push(Cusp {
                        theta: theta.rem_euclid(span),
                        z: c,
                        kind: CuspKind::CriticalPoint,
                    });
                } else if !barrier {
                    let seam = between.iter().any(|p| matches!(p.mark, Mark::Sample { seam: true }));
                    let cusp = refine_between(&f, &dq, &walk[last], &walk[i], span)?;
                    cusps.push(Cusp {
                        kind: if seam {
                            CuspKind::BranchCutCase
                        } else {
                            CuspKind::SmoothPointSignChange
                        },
                        ..cusp
                    });
                }
            }
            last = i;
        }
    }
    // critical points that could not be approached: decide from the first
    // order behaviour of w along the rays of the wedge
    for &(j, c) in &fallback {
        let wedge = wedge_structure(&f, c)?;
        let next = samples[(j + 1) % n].z;
        let out_dir = (next - c).arg();
        let exit = wedge
            .angles
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0)
            .min_by(|a, b| wrap(out_dir - a.1).abs().total_cmp(&wrap(out_dir - b.1).abs()))
            .map(|(_, a)| *a)
            .expect("wedge has rays");
        let theta_c = theta_in_interval(&f, component, j, c);
        let x = (exit + (-dq.eval(c)).arg() + (theta_c + PI) / 2.0).rem_euclid(TAU);
        let kf = wedge.k as f64;
        let hit = (x > 0.0 && x < (kf - 1.0) / kf * PI) || (x > PI && x < (2.0 * kf - 1.0) / kf * PI);
        if hit {
            cusps.push(Cusp {
                theta: theta_c.rem_euclid(span),
                z: c,
                kind: CuspKind::CriticalPoint,
            });
        }
    }
    cusps.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(CausticCurve {
        thetas,
        image_samples: image,
        v_samples: big_v,
        psi_samples,
        im_w,
        cusps,
        zero_count: k,
        simply_connected: component.is_simply_connected(),
        psi_end,
    })
}

#[derive(Debug, Clone, Copy)]
enum Mark {
    Sample { seam: bool },
    AfterCritical { c: Complex64, theta: f64 },
    BeforeCritical,
    Barrier,
}

/// A point of the walk around the boundary, with continuous `theta`.
#[derive(Debug, Clone, Copy)]
struct WalkPoint {
    z: Complex64,
    theta: f64,
    val: f64,
    significant: bool,
    mark: Mark,
}

/// Finest subdivision level of a sample interval in [`subdivide`].
const MAX_SUBDIVISION: u32 = 12;

/// Distance of `arg w` from the nearest multiple of `pi`.
fn off_axis(w: Complex64) -> f64 {
    let a = w.arg().rem_euclid(PI);
    a.min(PI - a)
}

/// Inserts walk points strictly between `(z0, t0)` and `t1` wherever `w`
/// turns by more than half its angular distance from the real axis. Two
/// cusps closer together than the sample spacing leave `Im w` with the same
/// sign at both samples; the excursion across the axis shows up as a turn
/// comparable to that distance and is resolved by halving.
fn subdivide(
    f: &RationalFn,
    dq: &CPoly,
    (z0, t0, w0): (Complex64, f64, Complex64),
    (z1, t1, w1): (Complex64, f64, Complex64),
    level: u32,
    floor: f64,
    walk: &mut Vec<WalkPoint>,
) {
    let turn = wrap(w1.arg() - w0.arg()).abs();
    if level >= MAX_SUBDIVISION || turn <= 0.5 * off_axis(w0).min(off_axis(w1)) {
        return;
    }
    let tm = 0.5 * (t0 + t1);
    let Some(zm) = midpoint_along(f, (z0, t0), (z1, t1)) else { return };
    let wm = w_at(f, dq, zm, tm);
    subdivide(f, dq, (z0, t0, w0), (zm, tm, wm), level + 1, floor, walk);
    walk.push(WalkPoint {
        z: zm,
        theta: tm,
        val: wm.im,
        significant: wm.im.abs() > floor,
        mark: Mark::Sample { seam: false },
    });
    subdivide(f, dq, (zm, tm, wm), (z1, t1, w1), level + 1, floor, walk);
}

/// The boundary point halfway in `theta` between two boundary points. It
/// must be reached from both ends: a single long shift can jump to a nearby
/// arc where the boundary passes close to a critical point of `f`, so the
/// shifts are split into more and more pieces until the two agree.
fn midpoint_along(f: &RationalFn, (z0, t0): (Complex64, f64), (z1, t1): (Complex64, f64)) -> Option<Complex64> {
    let tm = 0.5 * (t0 + t1);
    let march = |mut z: Complex64, dt: f64, pieces: u32| -> Option<Complex64> {
        for _ in 0..pieces {
            z = shift_along(f, z, dt / pieces as f64)?;
        }
        Some(z)
    };
    (0..=6).find_map(|level| {
        let pieces = 1 << level;
        let forward = march(z0, tm - t0, pieces)?;
        let backward = march(z1, tm - t1, pieces)?;
        ((forward - backward).norm() <= 1e-9 * (1.0 + forward.norm())).then_some(forward)
    })
}

/// Distance from a critical point at which its one-sided sign is read.
const APPROACH_RADIUS: f64 = 1e-4;
/// A one-sided value counts only if `|Im w| / |w|` exceeds this; below it
/// the arc leaves along a direction where `Im w` vanishes to first order and
/// the sign is taken from the next sample instead.
const ONE_SIDED_MIN: f64 = 1e-3;

/// Marches from `(z, theta)` towards the critical point `c` at `theta_c`,
/// halving the remaining `theta` gap each step while staying on the arc.
fn approach(f: &RationalFn, dq: &CPoly, c: Complex64, z: Complex64, theta: f64, theta_c: f64) -> Option<WalkPoint> {
    let (mut z, mut t) = (z, theta);
    let radius = APPROACH_RADIUS * (1.0 + c.norm());
    for _ in 0..200 {
        if (z - c).norm() < radius {
            break;
        }
        let next = theta_c - 0.5 * (theta_c - t);
        let z_next = shift_along(f, z, next - t)?;
        if (z_next - c).norm() >= (z - c).norm() {
            return None;
        }
        z = z_next;
        t = next;
    }
    if (z - c).norm() >= radius {
        return None;
    }
    let w = w_at(f, dq, z, t);
    Some(WalkPoint {
        z,
        theta: t,
        val: w.im,
        significant: w.im.abs() > ONE_SIDED_MIN * w.norm(),
        mark: Mark::BeforeCritical,
    })
}

/// Bisection in `theta` between two walk points; `shift_along` is anchored
/// at a sample, never at a point next to a critical point.
fn refine_between(f: &RationalFn, dq: &CPoly, a: &WalkPoint, b: &WalkPoint, span: f64) -> Result<Cusp> {
    let anchor = if matches!(a.mark, Mark::Sample { .. }) { a } else { b };
    let eval = |t: f64| -> Option<(f64, Complex64)> {
        let z = shift_along(f, anchor.z, t - anchor.theta)?;
        Some((w_at(f, dq, z, t).im, z))
    };
    let (mut lo, mut hi) = (a.theta, b.theta);
    let mut z_mid = anchor.z;
    while hi - lo > CUSP_THETA_TOL {
        let mid = 0.5 * (lo + hi);
        let Some((g, z)) = eval(mid) else { break };
        z_mid = z;
        if (g < 0.0) == (a.val < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Cusp {
        theta: (0.5 * (lo + hi)).rem_euclid(span),
        z: z_mid,
        kind: CuspKind::SmoothPointSignChange,
    })
}

/// Linear fit of unwrapped `arg V` against `theta` on one smooth arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcFit {
    pub theta_start: f64,
    pub theta_end: f64,
    pub samples: usize,
    pub slope: f64,
    pub max_residual: f64,
}

/// Fits on every arc between consecutive cusps, skipping `guard` samples at
/// each end and samples where `|Im(v r' s)|` is below the noise floor.
pub fn arc_slopes(curve: &CausticCurve, guard: usize) -> Vec<ArcFit> {
    let n = curve.thetas.len();
    let floor = NOISE_FLOOR * curve.im_w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let near_cusp = |j: usize| {
        curve.cusps.iter().any(|c| {
            let d = (curve.thetas[j] - c.theta).abs();
            let span = curve.thetas[1] - curve.thetas[0];
            d <= (guard as f64 + 1.0) * span || (TAU * curve.zero_count as f64 - d) <= (guard as f64 + 1.0) * span
        })
    };
    let mut fits = Vec::new();
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |run: &mut Vec<(f64, f64)>, fits: &mut Vec<ArcFit>| {
        if run.len() >= 8 {
            fits.push(fit_line(run));
        }
        run.clear();
    };
    for j in 0..n {
        if near_cusp(j) || curve.im_w[j].abs() <= floor || curve.v_samples[j].norm() == 0.0 {
            flush(&mut run, &mut fits);
            continue;
        }
        let a = curve.v_samples[j].arg();
        let val = match run.last() {
            Some(&(_, prev)) => prev + wrap(a - prev),
            None => a,
        };
        run.push((curve.thetas[j], val));
    }
    flush(&mut run, &mut fits);
    fits
}

fn fit_line(pts: &[(f64, f64)]) -> ArcFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).abs())
        .fold(0.0, f64::max);
    ArcFit {
        theta_start: pts[0].0,
        theta_end: pts[pts.len() - 1].0,
        samples: pts.len(),
        slope,
        max_residual,
    }
}

/// Winding numbers of a closed curve around the centers of a square grid
/// covering its bounding box (5% margin). Cells the curve passes through
/// are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingProfile {
    pub origin: Complex64,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `ny` rows of `nx` cells.
    pub winding: Vec<Option<i64>>,
}

impl WindingProfile {
    pub fn center(&self, ix: usize, iy: usize) -> Complex64 {
        self.origin + Complex64::new((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    pub fn max_abs(&self) -> i64 {
        self.winding.iter().flatten().map(|w| w.abs()).max().unwrap_or(0)
    }

    /// Distinct winding values over cells off the curve.
    pub fn values(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.winding.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Cell center with `|winding| >= min_abs` farthest from `curve`.
    pub fn deepest(&self, curve: &[Complex64], min_abs: i64) -> Option<(Complex64, i64, f64)> {
        let mut best: Option<(Complex64, i64, f64)> = None;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                if let Some(w) = self.winding[iy * self.nx + ix] {
                    if w.abs() >= min_abs {
                        let c = self.center(ix, iy);
                        let d = distance_to_polyline(c, curve);
                        if best.is_none_or(|b| d > b.2) {
                            best = Some((c, w, d));
                        }
                    }
                }
            }
        }
        best
    }
}

/// Distance from `z` to a closed polyline.
pub fn distance_to_polyline(z: Complex64, curve: &[Complex64]) -> f64 {
    let n = curve.len();
    (0..n)
        .map(|i| {
            let a = curve[i];
            let b = curve[(i + 1) % n];
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let s = if len2 > 0.0 { (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
            (z - a - ab * s).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Winding number of a closed polyline around `p` (signed crossing count).
pub fn winding_at(curve: &[Complex64], p: Complex64) -> i64 {
    let n = curve.len();
    let mut w = 0;
    for i in 0..n {
        let a = curve[i] - p;
        let b = curve[(i + 1) % n] - p;
        let cross = a.re * b.im - a.im * b.re;
        if a.im <= 0.0 {
            if b.im > 0.0 && cross > 0.0 {
                w += 1;
            }
        } else if b.im <= 0.0 && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Proper crossings of non-adjacent segments of a closed polyline, as
/// `(point, i, j)` for segments `i -> i+1` and `j -> j+1` with `i < j`.
pub fn self_crossings(curve: &[Complex64]) -> Vec<(Complex64, usize, usize)> {
    let n = curve.len();
    if n < 4 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (curve[0], curve[0]);
    for z in curve {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let cells = (n as f64).sqrt().ceil().max(1.0);
    let cw = ((hi.re - lo.re) / cells).max(1e-300);
    let ch = ((hi.im - lo.im) / cells).max(1e-300);
    let last = cells as i64 - 1;
    let cell_of = |z: Complex64| {
        (
            (((z.re - lo.re) / cw) as i64).clamp(0, last),
            (((z.im - lo.im) / ch) as i64).clamp(0, last),
        )
    };
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = (curve[i], curve[(i + 1) % n]);
        let (x0, y0) = cell_of(Complex64::new(a.re.min(b.re), a.im.min(b.im)));
        let (x1, y1) = cell_of(Complex64::new(a.re.max(b.re), a.im.max(b.im)));
        for x in x0..=x1 {
            for y in y0..=y1 {
                buckets.entry((x, y)).or_default().push(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let segs = &buckets[&key];
        for (u, &i) in segs.iter().enumerate() {
            for &j in &segs[u + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j == i + 1 || (i == 0 && j == n - 1) || !seen.insert((i, j)) {
                    continue;
                }
                let (a, b) = (curve[i], curve[(i + 1) % n]);
                let (c, d) = (curve[j], curve[(j + 1) % n]);
                let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
                let den = cross(b - a, d - c);
                if den == 0.0 {
                    continue;
                }
                let s = cross(c - a, d - c) / den;
                let t = cross(c - a, b - a) / den;
                if (0.0..1.0).contains(&s) && (0.0..1.0).contains(&t) {
                    out.push((a + (b - a) * s, i, j));
                }
            }
        }
    }
    out.sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
    out
}

/// A point of largest `|winding|` of a closed polyline, moved away from the
/// curve as far as a local search allows.
///
/// Every region with `|winding| >= 2` is bounded by arcs meeting at
/// self-crossings, so probing the four quadrants next to each crossing finds
/// it however small it is.
pub fn winding_peak(curve: &[Complex64]) -> Option<(Complex64, i64)> {
    let n = curve.len();
    let mut best: Option<(Complex64, i64)> = None;
    for (x, i, j) in self_crossings(curve) {
        let seg = |k: usize| curve[(k + 1) % n] - curve[k];
        let (u, v) = (seg(i), seg(j));
        let eps = 1e-3 * u.norm().min(v.norm());
        let (u, v) = (u / u.norm(), v / v.norm());
        for (su, sv) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let probe = x + (u * su + v * sv) * eps;
            let w = winding_at(curve, probe);
            if best.is_none_or(|b| w.abs() > b.1.abs()) {
                best = Some((probe, w));
            }
        }
    }
    let (mut z, w) = best?;
    // pattern search for a point deeper inside the same region
    let mut d = distance_to_polyline(z, curve);
    let mut step = d;
    for _ in 0..200 {
        if step <= 1e-3 * d {
            break;
        }
        let mut moved = false;
        for k in 0..8 {
            let cand = z + Complex64::from_polar(step, k as f64 * FRAC_PI_4);
            let dc = distance_to_polyline(cand, curve);
            if dc > d && winding_at(curve, cand) == w {
                (z, d, moved) = (cand, dc, true);
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Some((z, w))
}

/// Winding profile on a `grid x grid` (at most) lattice of square cells.
pub fn winding_profile(curve: &[Complex64], grid: usize) -> WindingProfile {
    let grid = grid.max(2);
    let (mut lo, mut hi) = (curve[0], curve[0]);
    for z in curve {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let size = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
    let cell = 1.1 * size / grid as f64;
    let center = 0.5 * (lo + hi);
    let nx = (((hi.re - lo.re) * 1.1 / cell).ceil() as usize).clamp(1, grid);
    let ny = (((hi.im - lo.im) * 1.1 / cell).ceil() as usize).clamp(1, grid);
    let origin = center - Complex64::new(nx as f64 * cell / 2.0, ny as f64 * cell / 2.0);
    let mut winding = vec![Some(0_i64); nx * ny];

    // scanline: winding at x on row y is the signed count of upward minus
    // downward crossings to the right of x
    let m = curve.len();
    for iy in 0..ny {
        let y = origin.im + (iy as f64 + 0.5) * cell;
        let mut crossings: Vec<(f64, i64)> = Vec::new();
        for i in 0..m {
            let a = curve[i];
            let b = curve[(i + 1) % m];
            let up = a.im <= y && b.im > y;
            let down = a.im > y && b.im <= y;
            if up || down {
                let x = a.re + (y - a.im) / (b.im - a.im) * (b.re - a.re);
                crossings.push((x, if up { 1 } else { -1 }));
            }
        }
        crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut idx = crossings.len();
        let mut acc: i64 = 0;
        for ix in (0..nx).rev() {
            let x = origin.re + (ix as f64 + 0.5) * cell;
            while idx > 0 && crossings[idx - 1].0 > x {
                idx -= 1;
                acc += crossings[idx].1;
            }
            winding[iy * nx + ix] = Some(acc);
        }
    }
    // cells the curve passes through
    for i in 0..m {
        let a = curve[i];
        let b = curve[(i + 1) % m];
        let pieces = (((b - a).norm() / (0.25 * cell)).ceil() as usize).max(1);
        for t in 0..=pieces {
            let z = a + (b - a) * (t as f64 / pieces as f64);
            let ix = ((z.re - origin.re) / cell).floor();
            let iy = ((z.im - origin.im) / cell).floor();
            if ix >= 0.0 && iy >= 0.0 && (ix as usize) < nx && (iy as usize) < ny {
                winding[iy as usize * nx + ix as usize] = None;
            }
        }
    }
    WindingProfile {
        origin,
        cell,
        nx,
        ny,
        winding,
    }
}

/// Rotation and shift that give two zeros of `e^{i phi} p + A + conj(q)` in
/// one lemniscate component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoZeroCertificate {
    pub phi: f64,
    #[serde(rename = "A")]
    pub a: Complex64,
    pub zeros_found: Vec<Complex64>,
    pub component_id: usize,
    /// `|winding|` of the modified caustic around `-A`, the zero count in `D`.
    pub boundary_count: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoZeroOptions {
    pub phi_steps: usize,
    pub grid: usize,
    /// Boundary samples per turn of `arg f`.
    pub samples_per_turn: usize,
    /// Reject components with more than one zero of `f` or with
    /// `min curvature_ratio >= -1/2`.
    pub require_precondition: bool,
}

impl Default for TwoZeroOptions {
    fn default() -> Self {
        TwoZeroOptions {
            phi_steps: 256,
            grid: 96,
            samples_per_turn: 2048,
            require_precondition: true,
        }
    }
}

/// Scans `phi` over `[0, 4 pi)`; for the first rotation whose caustic winds
/// twice around some point `P`, sets `A = -P` and certifies two zeros of the
/// shifted polynomial inside the component.
pub fn two_zero_search(h: &HarmonicPoly, component_id: usize, opts: &TwoZeroOptions) -> Result<TwoZeroCertificate> {
    let f = h.critical_fn()?;
    let omega = trace_lemniscate(&f)?;
    let comp = omega
        .components
        .get(component_id)
        .ok_or_else(|| Error::InvalidInput(format!("no component {component_id}")))?;
    let comp = harmonic_parametrization(&f, comp, opts.samples_per_turn)?;
    if opts.require_precondition {
        if comp.zero_count != 1 {
            return Err(Error::AssumptionFailed(format!(
                "component has {} zeros of f, need exactly one",
                comp.zero_count
            )));
        }
        let min_ratio = curvature_ratio(h, &comp)?.into_iter().fold(f64::INFINITY, f64::min);
        if min_ratio >= -0.5 {
            return Err(Error::AssumptionFailed(format!(
                "min curvature ratio {min_ratio:.6} is not below -1/2"
            )));
        }
    }
    let (_, extent) = comp.extent();
    let pts: Vec<Complex64> = comp
        .dense_boundary(&f, DENSE_STEP * extent)
        .into_iter()
        .map(|(z, _)| z)
        .collect();
    let holes: Vec<Vec<Complex64>> = comp.holes.iter().map(|h| h.iter().map(|s| s.z).collect()).collect();
    let in_d = |z: Complex64| point_in_polygon(z, &pts) && !holes.iter().any(|h| point_in_polygon(z, h));
    let pvals: Vec<Complex64> = pts.iter().map(|&z| h.p().eval(z)).collect();
    let qvals: Vec<Complex64> = pts.iter().map(|&z| h.q().eval(z).conj()).collect();
    let (base_psi, psi_end) = psi_with_end(h, &comp)?;
    let mut cusp_range = (usize::MAX, 0);
    for step in 0..opts.phi_steps {
        let phi = 2.0 * TAU * step as f64 / opts.phi_steps as f64;
        let rot = Complex64::from_polar(1.0, phi);
        let image: Vec<Complex64> = pvals.iter().zip(&qvals).map(|(p, q)| rot * p + q).collect();
        let cusps = shifted_crossings(&base_psi, psi_end, phi);
        cusp_range = (cusp_range.0.min(cusps), cusp_range.1.max(cusps));
        let origin_count = winding_at(&image, Complex64::new(0.0, 0.0)).abs();
        let target = if step == 0 && origin_count >= 2 && distance_to_polyline(Complex64::new(0.0, 0.0), &image) > 0.0 {
            Some(Complex64::new(0.0, 0.0))
        } else {
            // regions below the grid resolution are found from the crossings
            winding_profile(&image, opts.grid)
                .deepest(&image, 2)
                .map(|t| t.0)
                .or_else(|| winding_peak(&image).filter(|p| p.1.abs() >= 2).map(|p| p.0))
        };
        let Some(target) = target else { continue };
        let a = -target;
        let shifted = HarmonicPoly::new(&h.p().scale(rot) + &CPoly::constant(a), h.q().clone())?;
        let roots = find_all_zeros(&shifted, &SearchOptions::default())?;
        let inside: Vec<Complex64> = roots
            .roots
            .iter()
            .filter(|r| r.is_certified() && in_d(r.location))
            .map(|r| r.location)
            .collect();
        let boundary_count = winding_at(&image, target).abs();
        if roots.certified && inside.len() >= 2 && inside.len() as i64 == boundary_count {
            return Ok(TwoZeroCertificate {
                phi,
                a,
                zeros_found: inside,
                component_id,
                boundary_count,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no rotation in {} steps gave a point of winding 2; cusp counts ranged over {}..={}",
        opts.phi_steps, cusp_range.0, cusp_range.1
    )))
}

/// Cusp count of the caustic of `e^{i phi} p + conj(q)`, whose `Psi` is the
/// base `Psi` shifted by `phi/2`.
fn shifted_crossings(base: &[f64], end: f64, phi: f64) -> usize {
    let shift = phi / 2.0;
    base.iter()
        .copied()
        .chain(std::iter::once(end))
        .collect::<Vec<f64>>()
        .windows(2)
        .map(|w| (((w[1] + shift) / PI).floor() - ((w[0] + shift) / PI).floor()).abs() as usize)
        .sum()
}

/// Shape of the lemniscate at a critical point where two arcs cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflectionReport {
    pub perpendicular: bool,
    pub no_inflection: bool,
    /// `Re(e^{+- i pi/4} L3 / L2^{3/2})` with `Lj = (log f)^(j)(z0)`.
    pub values: [f64; 2],
    /// Outward unit directions of the four arcs.
    pub directions: Vec<Complex64>,
    /// Signed curvature at `z0` of the arc leaving along each direction,
    /// from `gamma(t) = z0 + g t - (i g / 6) Im(g L3 / L2) t^2`.
    pub curvatures: Vec<f64>,
}

impl InflectionReport {
    /// Point `gamma(t)` of the quadratic model along arc `j`.
    pub fn model_point(&self, z0: Complex64, j: usize, t: f64) -> Complex64 {
        let g = self.directions[j];
        z0 + g * t + Complex64::i() * g * (0.5 * self.curvatures[j] * t * t)
    }
}

/// `(log P)''` and `(log P)'''` at `z`.
fn log_derivs(p: &CPoly, z: Complex64) -> (Complex64, Complex64) {
    let [v, d1, d2, d3] = poly_jet(p, z);
    let a = d1 / v;
    let b = d2 / v;
    let c = d3 / v;
    (b - a * a, c - 3.0 * a * b + 2.0 * a * a * a)
}

/// Inflection test at a critical point `z0` of `f` on `|f| = 1`.
pub fn inflection_check(f: &RationalFn, z0: Complex64) -> Result<InflectionReport> {
    let (fv, dfv) = f.eval_with_derivative(z0);
    let modulus = fv.norm();
    if (modulus - 1.0).abs() > 1e-8 {
        return Err(Error::NotOnLemniscate { at: z0, modulus });
    }
    if dfv.norm() > ON_CURVE_TOL {
        return Err(Error::NotCritical {
            at: z0,
            derivative: dfv.norm(),
        });
    }
    let (n2, n3) = log_derivs(f.numerator(), z0);
    let (d2, d3) = if f.denominator().degree_or_zero() > 0 {
        log_derivs(f.denominator(), z0)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let l2 = n2 - d2;
    let l3 = n3 - d3;
    let scale = n2.norm() + d2.norm() + 1.0;
    if l2.norm() <= 1e-9 * scale {
        return Err(Error::AssumptionFailed(format!(
            "(log f)''(z0) vanishes at {z0}; the crossing is not simple"
        )));
    }
    let ratio = l3 / l2.powf(1.5);
    let values = [
        (Complex64::from_polar(1.0, FRAC_PI_4) * ratio).re,
        (Complex64::from_polar(1.0, -FRAC_PI_4) * ratio).re,
    ];
    let tol = 1e-9 * (ratio.norm() + 1.0);
    // Re(L2 g^2) = 0 along the arcs: g = e^{i(pi/4 + j pi/2 - arg(L2)/2)}
    let base = PI / 4.0 - l2.arg() / 2.0;
    let directions: Vec<Complex64> = (0..4)
        .map(|j| Complex64::from_polar(1.0, base + j as f64 * PI / 2.0))
        .collect();
    let curvatures = directions
        .iter()
        .map(|&g| -(g * l3 / l2).im / 3.0)
        .collect();
    Ok(InflectionReport {
        perpendicular: true,
        no_inflection: values[0].abs() > tol && values[1].abs() > tol,
        values,
        directions,
        curvatures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemniscate::{trace_lemniscate, SAMPLES_PER_TURN};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk_case() -> HarmonicPoly {
        HarmonicPoly::new(CPoly::from_real(&[0.0, 0.0, 0.5]), CPoly::from_real(&[0.0, 1.0])).unwrap()
    }

    #[test]
    fn caustic_tangent_example() {
        // h = z^2/2 - conj(z) on the unit circle: dh/dt = i e^{2it} + i e^{-it}
        let h = HarmonicPoly::new(CPoly::from_real(&[0.0, 0.0, 0.5]), CPoly::from_real(&[0.0, -1.0])).unwrap();
        let f = h.critical_fn().unwrap();
        let t = tangent_big_v(&h, &f, c(1.0, 0.0)).unwrap();
        assert!((t.v - c(0.0, 1.0)).norm() < 1e-15);
        assert!((t.big_v - c(0.0, 2.0)).norm() < 1e-14);
        assert!((t.factored - t.big_v).norm() < 1e-14);
    }

    #[test]
    fn deltoid_tangent_vanishes_at_cusp() {
        // h = z^2/2 + conj(z): dh/dt = i e^{2it} - i e^{-it} = 0 at t = 0
        let h = disk_case();
        let f = h.critical_fn().unwrap();
        let t = tangent_big_v(&h, &f, c(1.0, 0.0)).unwrap();
        assert!(t.big_v.norm() < 1e-14);
        let z = Complex64::from_polar(1.0, 0.3);
        let t = tangent_big_v(&h, &f, z).unwrap();
        let fd = (h.eval(Complex64::from_polar(1.0, 0.3 + 1e-6)) - h.eval(Complex64::from_polar(1.0, 0.3 - 1e-6))) / 2e-6;
        assert!((t.big_v - fd).norm() < 1e-8);
    }

    #[test]
    fn disk_has_three_cusps_and_monotone_psi() {
        let h = disk_case();
        let f = h.critical_fn().unwrap();
        let om = trace_lemniscate(&f).unwrap();
        let comp = harmonic_parametrization(&f, &om.components[0], 512).unwrap();
        let curve = detect_cusps(&h, &comp).unwrap();
        assert_eq!(curve.cusp_count(), 3);
        assert_eq!(curve.psi_crossings(), 3);
        assert!((curve.psi_increment() - 3.0 * PI).abs() < 1e-2);
        for w in curve.psi_samples.windows(2) {
            let slope = (w[1] - w[0]) / (curve.thetas[1] - curve.thetas[0]);
            assert!((slope - 1.5).abs() < 1e-6);
        }
        for fit in arc_slopes(&curve, 2) {
            assert!((fit.slope - 0.5).abs() < 2e-3);
        }
        let prof = winding_profile(&curve.image_samples, 64);
        assert!(prof.values().iter().all(|w| w.abs() <= 1));
        assert_eq!(prof.max_abs(), 1);
    }

    #[test]
    fn winding_far_away_is_zero() {
        let circle: Vec<Complex64> = (0..64).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / 64.0)).collect();
        assert_eq!(winding_at(&circle, c(0.0, 0.0)), 1);
        assert_eq!(winding_at(&circle, c(5.0, 5.0)), 0);
        let twice: Vec<Complex64> = (0..128).map(|j| Complex64::from_polar(1.0, 2.0 * TAU * j as f64 / 128.0)).collect();
        let prof = winding_profile(&twice, 32);
        assert_eq!(prof.max_abs(), 2);
    }

    #[test]
    fn degenerate_inflection() {
        let f = RationalFn::new(CPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]), CPoly::from_real(&[1.0])).unwrap();
        assert!(matches!(inflection_check(&f, c(0.0, 0.0)), Err(Error::AssumptionFailed(_))));
    }

    #[test]
    fn perpendicular_crossing() {
        let f = RationalFn::new(CPoly::from_real(&[1.0, 0.0, 1.0]), CPoly::from_real(&[1.0])).unwrap();
        let rep = inflection_check(&f, c(0.0, 0.0)).unwrap();
        assert!(rep.perpendicular);
        // log(1 + z^2) has no cubic term, so both values vanish
        assert!(!rep.no_inflection);
        for g in &rep.directions {
            assert!((1.0 + g * g).re.abs() < 1e-12 || (g * g).re.abs() < 1e-12);
        }
    }

    #[test]
    fn no_certificate_for_disk() {
        let h = disk_case();
        let opts = TwoZeroOptions {
            phi_steps: 32,
            require_precondition: false,
            samples_per_turn: SAMPLES_PER_TURN / 8,
            ..Default::default()
        };
        assert!(matches!(two_zero_search(&h, 0, &opts), Err(Error::NotFound(_))));
        assert!(matches!(
            two_zero_search(&h, 0, &TwoZeroOptions::default()),
            Err(Error::AssumptionFailed(_))
        ));
    }
}
