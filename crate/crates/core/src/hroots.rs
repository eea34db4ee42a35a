//! Zeros of harmonic polynomials `h = p + conj(q)`.
//!
//! Zeros are located by multistart Newton iteration on the real 2-D system
//! `(Re h, Im h) = 0` and certified one by one with the argument principle
//! for harmonic maps: a small circle around a regular zero winds `+1` when
//! `h` is sense-preserving there and `-1` when it is sense-reversing. The
//! whole set is certified when the sum of those windings equals `deg p` and
//! refining the seed grid twice finds nothing new.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpoly::{CPoly, RationalFn};
use crate::error::{Error, Result};

/// `h(z) = p(z) + conj(q(z))` with `deg p > deg q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPoly {
    p: CPoly,
    q: CPoly,
}

impl HarmonicPoly {
    pub fn new(p: CPoly, q: CPoly) -> Result<Self> {
        let n = p
            .degree()
            .ok_or_else(|| Error::InvalidInput("analytic part is the zero polynomial".into()))?;
        if n == 0 {
            return Err(Error::InvalidInput("analytic part must be nonconstant".into()));
        }
        if q.degree().is_some_and(|m| m >= n) {
            return Err(Error::InvalidInput(format!(
                "need deg p > deg q, got n = {n}, m = {}",
                q.degree_or_zero()
            )));
        }
        Ok(HarmonicPoly { p, q })
    }

    /// Skips the `deg p > deg q` check. Evaluation and expansion work for any
    /// pair; root search assumes the checked invariant.
    pub fn new_unchecked(p: CPoly, q: CPoly) -> Self {
        HarmonicPoly { p, q }
    }

    pub fn p(&self) -> &CPoly {
        &self.p
    }

    pub fn q(&self) -> &CPoly {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.p.degree_or_zero()
    }

    pub fn m(&self) -> usize {
        self.q.degree_or_zero()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.p.eval(z) + self.q.eval(z).conj()
    }

    /// Jacobian determinant `|p'|^2 - |q'|^2`.
    pub fn jacobian(&self, z: Complex64) -> f64 {
        self.p.derivative().eval(z).norm_sqr() - self.q.derivative().eval(z).norm_sqr()
    }

    /// Size of the terms that make up `h(z)`, used to scale residuals.
    pub fn scale_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.p.abs_eval(r) + self.q.abs_eval(r)
    }

    pub fn residual(&self, z: Complex64) -> f64 {
        self.eval(z).norm() / self.scale_at(z).max(f64::MIN_POSITIVE)
    }

    /// `f = p'/q'`, whose unit sublevel set is the sense-reversing region.
    pub fn critical_fn(&self) -> Result<RationalFn> {
        let dq = self.q.derivative();
        if dq.is_zero() {
            return Err(Error::InvalidInput(
                "co-analytic part is constant; h is analytic and has no lemniscate".into(),
            ));
        }
        RationalFn::new(self.p.derivative(), dq)
    }

    /// `e^{i phi} p + conj(q)`.
    pub fn rotate_analytic(&self, phi: f64) -> HarmonicPoly {
        HarmonicPoly {
            p: self.p.scale(Complex64::from_polar(1.0, phi)),
            q: self.q.clone(),
        }
    }

    /// `h - c`, realised by moving `c` into the analytic part.
    pub fn minus_constant(&self, c: Complex64) -> HarmonicPoly {
        HarmonicPoly {
            p: &self.p - &CPoly::constant(c),
            q: self.q.clone(),
        }
    }

    /// `h(z + s)`; for real `s` this keeps real coefficients.
    pub fn shift(&self, s: Complex64) -> HarmonicPoly {
        // conj(q(z + s)) = conj(q)(z + s) with q shifted as an analytic polynomial
        HarmonicPoly {
            p: self.p.shift(s),
            q: self.q.shift(s),
        }
    }

    /// Radius beyond which `|p| > |q|`, so every zero lies inside.
    ///
    /// This is the positive root of `|p_n| r^n = sum_{k<n} (|p_k| + |q_k|) r^k`
    /// inflated by 5%.
    pub fn enclosure_radius(&self) -> f64 {
        let n = self.n();
        let lead = self.p.leading().norm();
        let lower: Vec<f64> = (0..n)
            .map(|k| self.p.coeff(k).norm() + self.q.coeff(k).norm())
            .collect();
        // g(r) = 1 - sum c_k r^(k-n) / lead is increasing in r
        let g = |r: f64| 1.0 - lower.iter().enumerate().map(|(k, c)| c * r.powi(k as i32 - n as i32)).sum::<f64>() / lead;
        let mut hi = 1.0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid > 0.0 && g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (1.05 * hi).max(1e-6)
    }
}

/// What the zero finder needs from a harmonic map `h` whose analytic part
/// has degree `n`. Implementations evaluate `h` in whatever form is most
/// accurate for them.
pub trait HarmonicMap: Sync {
    /// Degree of the analytic part; `h` winds `n` times around a large circle.
    fn degree(&self) -> usize;
    fn value(&self, z: Complex64) -> Complex64;
    /// Wirtinger derivatives `(h_z, h_zbar)`.
    fn derivatives(&self, z: Complex64) -> (Complex64, Complex64);
    /// Radius of a disk that contains every zero.
    fn zero_radius(&self) -> f64;
    /// Size of `v = h(z)` relative to the rounding error of evaluating it.
    fn scaled_residual(&self, z: Complex64, v: Complex64) -> f64;
    /// `v = h(z)` cannot be told apart from zero in floating point.
    fn negligible(&self, z: Complex64, v: Complex64) -> bool {
        self.scaled_residual(z, v) <= 64.0 * f64::EPSILON
    }
    /// Newton correction `dz` with `h_z dz + h_zbar conj(dz) = -v`.
    fn newton_step(&self, z: Complex64, v: Complex64) -> Option<Complex64> {
        let (a, b) = self.derivatives(z);
        let det = a.norm_sqr() - b.norm_sqr();
        if det.abs() <= 1e-300 {
            return None;
        }
        let dz = (-v * a.conj() + b * v.conj()) / det;
        dz.is_finite().then_some(dz)
    }
    /// Points around which zeros may cluster more tightly than any uniform
    /// seed grid resolves, with the number of directions to seed along.
    fn cluster_hints(&self) -> Vec<(Complex64, usize)> {
        Vec::new()
    }
    /// Sign of `|h_z|^2 - |h_zbar|^2`.
    fn orientation(&self, z: Complex64) -> Orientation {
        let (a, b) = self.derivatives(z);
        classify_jacobian(a.norm_sqr(), b.norm_sqr())
    }
}

impl HarmonicMap for HarmonicPoly {
    fn degree(&self) -> usize {
        self.n()
    }

    fn value(&self, z: Complex64) -> Complex64 {
        self.eval(z)
    }

    fn derivatives(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.p.derivative().eval(z), self.q.derivative().eval(z).conj())
    }

    fn orientation(&self, z: Complex64) -> Orientation {
        orientation_at(self, z)
    }

    fn zero_radius(&self) -> f64 {
        self.enclosure_radius()
    }

    fn scaled_residual(&self, z: Complex64, v: Complex64) -> f64 {
        v.norm() / self.scale_at(z).max(f64::MIN_POSITIVE)
    }
}

/// Local orientation of `h` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Preserving,
    Reversing,
    Singular,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Preserving => 1,
            Orientation::Reversing => -1,
            Orientation::Singular => 0,
        }
    }
}

/// Sign of `|p'|^2 - |q'|^2`, or `Singular` when it is within the rounding
/// error of evaluating `p'` and `q'` by Horner's rule at `z`.
pub fn orientation_at(h: &HarmonicPoly, z: Complex64) -> Orientation {
    let (dp, dq) = (h.p.derivative(), h.q.derivative());
    let r = z.norm();
    let (sp, sq) = (dp.abs_eval(r), dq.abs_eval(r));
    let tau = JACOBIAN_ROUNDING * (h.n() + 1) as f64 * f64::EPSILON * (sp * sp + sq * sq);
    classify_with(dp.eval(z).norm_sqr(), dq.eval(z).norm_sqr(), tau)
}

/// Safety factor on the rounding bound used by [`orientation_at`].
const JACOBIAN_ROUNDING: f64 = 64.0;

fn classify_jacobian(a: f64, b: f64) -> Orientation {
    classify_with(a, b, 1e-9 * (a + b + 1.0))
}

fn classify_with(a: f64, b: f64, tau: f64) -> Orientation {
    if a - b > tau {
        Orientation::Preserving
    } else if a - b < -tau {
        Orientation::Reversing
    } else {
        Orientation::Singular
    }
}

/// Closed curve for argument-principle counts.
#[derive(Debug, Clone)]
pub enum Contour {
    Circle { center: Complex64, radius: f64 },
    /// Closed polyline; the last vertex connects back to the first.
    Polyline(Vec<Complex64>),
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    /// Point at parameter `t` in `[0, 1)`.
    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(*radius, TAU * t),
            Contour::Polyline(pts) => {
                let n = pts.len();
                let s = t.rem_euclid(1.0) * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let frac = s - i as f64;
                pts[i] + (pts[(i + 1) % n] - pts[i]) * frac
            }
        }
    }

    fn min_samples(&self) -> usize {
        match self {
            Contour::Circle { .. } => 0,
            Contour::Polyline(pts) => pts.len(),
        }
    }
}

/// Winding number of `F` along `contour`, i.e. the continuous change of
/// `arg F` divided by `2 pi`.
///
/// The contour is sampled at `samples` points (at least every polyline
/// vertex) and bisected until each step turns `arg F` by less than `pi/2`.
pub fn winding_number<F>(f: F, contour: &Contour, samples: usize) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    let total = argument_increment(&f, contour, samples)?;
    Ok((total / TAU).round() as i64)
}

/// Continuous argument increment of `F` along `contour`, in radians.
pub fn argument_increment<F>(f: &F, contour: &Contour, samples: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let base = sample_params(contour, samples);
    let scale = base.iter().map(|&t| f(contour.point(t)).norm()).fold(0.0, f64::max);
    let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
    increment_with(f, contour, &base, &|_, v: Complex64| v.norm() <= floor)
}

/// Winding number of a harmonic map along `contour`, using the map's own
/// test for values that are zero within rounding.
pub fn map_winding<H: HarmonicMap + ?Sized>(h: &H, contour: &Contour, samples: usize) -> Result<i64> {
    let base = sample_params(contour, samples);
    let total = increment_with(&|z| h.value(z), contour, &base, &|z, v| h.negligible(z, v))?;
    Ok((total / TAU).round() as i64)
}

fn sample_params(contour: &Contour, samples: usize) -> Vec<f64> {
    let base = samples.max(contour.min_samples()).max(8);
    (0..=base).map(|i| i as f64 / base as f64).collect()
}

fn increment_with<F, N>(f: &F, contour: &Contour, ts: &[f64], negligible: &N) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
    N: Fn(Complex64, Complex64) -> bool,
{
    let vals: Vec<Complex64> = ts.iter().map(|&t| f(contour.point(t))).collect();
    let mut total = 0.0;
    for w in 0..ts.len() - 1 {
        total += segment_increment(f, contour, ts[w], ts[w + 1], vals[w], vals[w + 1], negligible, 0)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn segment_increment<F, N>(
    f: &F,
    contour: &Contour,
    t0: f64,
    t1: f64,
    v0: Complex64,
    v1: Complex64,
    negligible: &N,
    depth: usize,
) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
    N: Fn(Complex64, Complex64) -> bool,
{
    let (z0, z1) = (contour.point(t0), contour.point(t1));
    if negligible(z0, v0) {
        return Err(Error::CurveThroughZero { at: z0 });
    }
    if negligible(z1, v1) {
        return Err(Error::CurveThroughZero { at: z1 });
    }
    let step = (v1 / v0).arg();
    if step.abs() < PI / 2.0 {
        return Ok(step);
    }
    // on a short piece where only one of Re, Im changes sign, the image stays
    // in one half plane and the principal step is the increment; very flat
    // images need this, as the pi-sized turn happens in a window far below
    // any practical sampling
    let adjacent = ((v0.re < 0.0) != (v1.re < 0.0)) != ((v0.im < 0.0) != (v1.im < 0.0));
    if depth >= 16 && adjacent {
        return Ok(step);
    }
    if depth > 48 {
        return Err(Error::CurveThroughZero {
            at: contour.point(0.5 * (t0 + t1)),
        });
    }
    let tm = 0.5 * (t0 + t1);
    let vm = f(contour.point(tm));
    Ok(segment_increment(f, contour, t0, tm, v0, vm, negligible, depth + 1)?
        + segment_increment(f, contour, tm, t1, vm, v1, negligible, depth + 1)?)
}

/// A located zero of `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub location: Complex64,
    pub orientation: Orientation,
    /// Winding of `h` around the certification circle.
    pub winding: i64,
    pub residual: f64,
    pub cert_radius: f64,
}

impl Root {
    pub fn is_certified(&self) -> bool {
        self.orientation != Orientation::Singular && self.winding == self.orientation.sign()
    }
}

/// All zeros found for one harmonic polynomial, with certification data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub n_plus: usize,
    pub n_minus: usize,
    pub certified: bool,
    /// Analytic degree of the polynomial the set belongs to.
    pub n: usize,
    /// Winding of `h` over the enclosing circle (equals `n` for any `h`).
    pub outer_winding: i64,
    pub enclosure_radius: f64,
    /// Seed pitch at which the refinement fixpoint was reached.
    pub final_pitch: f64,
    pub fixpoint: bool,
    pub singular_count: usize,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.location).collect()
    }

    /// `n_plus - n_minus == n`.
    pub fn index_sum_holds(&self) -> bool {
        self.n_plus as i64 - self.n_minus as i64 == self.n as i64
    }

    pub fn ensure_regular(&self) -> Result<&Self> {
        if self.singular_count > 0 {
            Err(Error::SingularZeroDetected {
                count: self.singular_count,
            })
        } else {
            Ok(self)
        }
    }
}

/// Tuning for [`find_all_zeros`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Seed grid pitch; `None` means `R / (8n)`.
    pub pitch: Option<f64>,
    /// Converged points closer than this (relative to `max(1, R)`) are merged.
    pub merge_radius: f64,
    pub max_halvings: usize,
    pub newton_max_iter: usize,
    /// Converged points must reach this scaled residual to be kept.
    pub accept_residual: f64,
    /// Rounds of dense local reseeding around zeros that fail certification.
    pub local_rounds: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            pitch: None,
            merge_radius: 1e-7,
            max_halvings: 5,
            newton_max_iter: 80,
            accept_residual: 1e-11,
            local_rounds: 4,
        }
    }
}

/// Multistart Newton search plus winding certification.
///
/// Singular zeros are kept in the result with `orientation = Singular`; the
/// set is then flagged uncertified rather than failing, so the caller can
/// inspect it (see [`RootSet::ensure_regular`]).
pub fn find_all_zeros<H: HarmonicMap + ?Sized>(h: &H, opts: &SearchOptions) -> Result<RootSet> {
    find_all_zeros_seeded(h, opts, &[])
}

/// [`find_all_zeros`] with additional starting points, solved before the
/// grid rounds. Extra seeds only add candidates; the grid must still reach
/// its fixpoint for the set to count as certified.
pub fn find_all_zeros_seeded<H: HarmonicMap + ?Sized>(h: &H, opts: &SearchOptions, extra: &[Complex64]) -> Result<RootSet> {
    let n = h.degree();
    let radius = h.zero_radius();
    let base_pitch = opts.pitch.unwrap_or(radius / (8.0 * n as f64));
    let merge = opts.merge_radius * radius.max(1.0);
    let solver = NewtonSolver::new(h, radius, opts);

    let mut found = RootCollector::new(merge);
    let results: Vec<Option<(Complex64, f64)>> = extra.par_iter().map(|&s| solver.solve(s)).collect();
    for (z, res) in results.into_iter().flatten() {
        found.insert(z, res);
    }
    let mut pitch = base_pitch;
    let mut quiet_rounds = 0;
    let mut fixpoint = false;
    for round in 0..=opts.max_halvings {
        let seeds = hex_seeds(radius, pitch, round > 0);
        let before = found.len();
        let results: Vec<Option<(Complex64, f64)>> =
            seeds.par_iter().map(|&s| solver.solve(s)).collect();
        for (z, res) in results.into_iter().flatten() {
            found.insert(z, res);
        }
        if round > 0 {
            if found.len() == before {
                quiet_rounds += 1;
            } else {
                quiet_rounds = 0;
            }
            if quiet_rounds >= 2 {
                fixpoint = true;
                break;
            }
        }
        if round < opts.max_halvings {
            pitch *= 0.5;
        }
    }

    let hint_seeds: Vec<Complex64> = h
        .cluster_hints()
        .into_iter()
        .flat_map(|(c, dirs)| polar_seeds(c, radius, dirs))
        .collect();
    let results: Vec<Option<(Complex64, f64)>> =
        hint_seeds.par_iter().map(|&s| solver.solve(s)).collect();
    for (z, res) in results.into_iter().flatten() {
        found.insert(z, res);
    }
    let mut roots = certify(h, &found.sorted(), radius)?;
    // reseed densely around zeros whose small circle does not certify them;
    // those circles hide clusters finer than the global grid
    for _ in 0..opts.local_rounds {
        let bad: Vec<&Root> = roots.iter().filter(|r| !r.is_certified()).collect();
        if bad.is_empty() {
            break;
        }
        let seeds: Vec<Complex64> = bad
            .iter()
            .flat_map(|r| {
                let reach = 2.0 * r.cert_radius;
                hex_seeds(reach, reach / 12.0, false)
                    .into_iter()
                    .map(move |s| s + r.location)
            })
            .collect();
        let before = found.len();
        let results: Vec<Option<(Complex64, f64)>> =
            seeds.par_iter().map(|&s| solver.solve(s)).collect();
        for (z, res) in results.into_iter().flatten() {
            found.insert(z, res);
        }
        if found.len() == before {
            break;
        }
        roots = certify(h, &found.sorted(), radius)?;
    }
    let n_plus = roots.iter().filter(|r| r.is_certified() && r.winding == 1).count();
    let n_minus = roots.iter().filter(|r| r.is_certified() && r.winding == -1).count();
    let singular_count = roots.iter().filter(|r| !r.is_certified()).count();
    let outer = Contour::circle(Complex64::new(0.0, 0.0), 1.1 * radius);
    let outer_winding = map_winding(h, &outer, 64 * n)?;
    let certified = singular_count == 0
        && fixpoint
        && outer_winding == n as i64
        && n_plus as i64 - n_minus as i64 == n as i64;
    Ok(RootSet {
        roots,
        n_plus,
        n_minus,
        certified,
        n,
        outer_winding,
        enclosure_radius: radius,
        final_pitch: pitch,
        fixpoint,
        singular_count,
    })
}

struct NewtonSolver<'a, H: ?Sized> {
    h: &'a H,
    radius: f64,
    max_iter: usize,
    accept: f64,
}

impl<'a, H: HarmonicMap + ?Sized> NewtonSolver<'a, H> {
    fn new(h: &'a H, radius: f64, opts: &SearchOptions) -> Self {
        NewtonSolver {
            h,
            radius,
            max_iter: opts.newton_max_iter,
            accept: opts.accept_residual,
        }
    }

    fn step(&self, z: Complex64, hv: Complex64) -> Option<Complex64> {
        self.h.newton_step(z, hv)
    }

    fn solve(&self, seed: Complex64) -> Option<(Complex64, f64)> {
        let merit = |z: Complex64, v: Complex64| self.h.scaled_residual(z, v);
        let mut z = seed;
        let mut hv = self.h.value(z);
        let mut cur = merit(z, hv);
        for _ in 0..self.max_iter {
            let dz = self.step(z, hv)?;
            // damped: shrink until |h| decreases
            let mut lambda = 1.0;
            let mut next = z + dz;
            let mut next_h = self.h.value(next);
            let mut tries = 0;
            while next_h.norm() > hv.norm() && tries < 12 {
                lambda *= 0.5;
                next = z + dz * lambda;
                next_h = self.h.value(next);
                tries += 1;
            }
            z = next;
            hv = next_h;
            let prev = cur;
            cur = merit(z, hv);
            if !z.is_finite() || z.norm() > 2.0 * self.radius {
                return None;
            }
            // converged, or down at rounding level and no longer improving
            let stalled = cur <= self.accept && cur >= 0.5 * prev;
            if (dz * lambda).norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) || cur == 0.0 || stalled {
                break;
            }
        }
        // a couple of undamped polishing steps
        for _ in 0..2 {
            if let Some(dz) = self.step(z, hv) {
                let cand = z + dz;
                let ch = self.h.value(cand);
                let cm = merit(cand, ch);
                if cm < cur {
                    z = cand;
                    hv = ch;
                    cur = cm;
                }
            }
        }
        (cur <= self.accept && z.norm() <= self.radius).then_some((z, cur))
    }
}

/// Hexagonal lattice points in the disk. With `skip_coarse`, points of the
/// lattice with twice the pitch are omitted (they were seeded already).
fn hex_seeds(radius: f64, pitch: f64, skip_coarse: bool) -> Vec<Complex64> {
    let row = pitch * 3f64.sqrt() / 2.0;
    let bmax = (radius / row).ceil() as i64;
    let mut out = Vec::new();
    for b in -bmax..=bmax {
        let y = b as f64 * row;
        let offset = b as f64 * pitch / 2.0;
        let amin = ((-radius - offset) / pitch).floor() as i64;
        let amax = ((radius - offset) / pitch).ceil() as i64;
        for a in amin..=amax {
            if skip_coarse && a.rem_euclid(2) == 0 && b.rem_euclid(2) == 0 {
                continue;
            }
            // slight irrational offset keeps seeds off symmetry axes
            let z = Complex64::new(a as f64 * pitch + offset + 0.0137 * pitch, y + 0.0071 * pitch);
            if z.norm() <= radius {
                out.push(z);
            }
        }
    }
    out
}

/// Seeds on circles around `center` with radii from `1e-2 R` down to
/// `1e-9 R` in ratio `1.2`, `8 dirs` per circle.
fn polar_seeds(center: Complex64, radius: f64, dirs: usize) -> Vec<Complex64> {
    let per_ring = 8 * dirs.max(1);
    let mut out = Vec::new();
    let mut r = 1e-2 * radius;
    let mut ring = 0;
    while r > 1e-9 * radius {
        let twist = 0.5 * (ring % 2) as f64;
        for j in 0..per_ring {
            let ang = TAU * (j as f64 + twist + 0.013) / per_ring as f64;
            out.push(center + Complex64::from_polar(r, ang));
        }
        r /= 1.2;
        ring += 1;
    }
    out
}

/// Spatial hash that merges nearby converged points, keeping the smallest
/// residual.
struct RootCollector {
    cell: f64,
    roots: Vec<(Complex64, f64)>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl RootCollector {
    fn new(merge: f64) -> Self {
        RootCollector {
            cell: merge,
            roots: Vec::new(),
            grid: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.roots.len()
    }

    fn key(&self, z: Complex64) -> (i64, i64) {
        ((z.re / self.cell).floor() as i64, (z.im / self.cell).floor() as i64)
    }

    fn insert(&mut self, z: Complex64, res: f64) {
        let (kx, ky) = self.key(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if (self.roots[i].0 - z).norm() <= self.cell {
                            if res < self.roots[i].1 {
                                self.roots[i] = (z, res);
                            }
                            return;
                        }
                    }
                }
            }
        }
        self.grid.entry((kx, ky)).or_default().push(self.roots.len());
        self.roots.push((z, res));
    }

    fn sorted(&self) -> Vec<(Complex64, f64)> {
        let mut v = self.roots.clone();
        v.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        v
    }
}

fn certify<H: HarmonicMap + ?Sized>(h: &H, found: &[(Complex64, f64)], radius: f64) -> Result<Vec<Root>> {
    let locs: Vec<Complex64> = found.iter().map(|r| r.0).collect();
    found
        .par_iter()
        .enumerate()
        .map(|(i, &(z, residual))| {
            let nearest = locs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            let cert_radius = (nearest / 3.0).min(1e-2 * radius);
            let orientation = h.orientation(z);
            let winding = match map_winding(h, &Contour::circle(z, cert_radius), 32) {
                Ok(w) => w,
                Err(_) => 0,
            };
            Ok(Root {
                location: z,
                orientation: if winding == orientation.sign() {
                    orientation
                } else {
                    Orientation::Singular
                },
                winding,
                residual,
                cert_radius,
            })
        })
        .collect()
}

/// Roots with `|Re z| > 1e-8` and `|Im z| > 1e-8`.
pub fn off_axes_count(rs: &RootSet) -> usize {
    const EPS_AXIS: f64 = 1e-8;
    rs.roots
        .iter()
        .filter(|r| r.location.re.abs() > EPS_AXIS && r.location.im.abs() > EPS_AXIS)
        .count()
}

/// Perturbation `q -> q + delta z^m_new` that keeps every certified zero.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub h: HarmonicPoly,
    pub delta: f64,
}

/// Raises the co-analytic degree without losing zeros.
///
/// `delta` is half the Rouché margin `min |h| / max (|z|^m_new + 1)` over all
/// certification circles, so each circle keeps its winding number.
pub fn perturb_antianalytic(h: &HarmonicPoly, rs: &RootSet, m_new: usize) -> Result<Perturbation> {
    if m_new <= h.m() && !h.q.is_zero() {
        return Err(Error::InvalidInput(format!(
            "new co-analytic degree {m_new} must exceed {}",
            h.m()
        )));
    }
    if m_new >= h.n() {
        return Err(Error::InvalidInput("new co-analytic degree must stay below n".into()));
    }
    if rs.singular_count > 0 || rs.roots.iter().any(|r| !r.is_certified()) {
        return Err(Error::NotRegular(format!("{} singular zero(s)", rs.singular_count)));
    }
    const CIRCLE_SAMPLES: usize = 512;
    let mut margin = f64::INFINITY;
    for root in &rs.roots {
        let mut min_h = f64::INFINITY;
        let mut max_w = 0.0_f64;
        for k in 0..CIRCLE_SAMPLES {
            let z = root.location + Complex64::from_polar(root.cert_radius, TAU * k as f64 / CIRCLE_SAMPLES as f64);
            min_h = min_h.min(h.eval(z).norm());
            max_w = max_w.max(z.norm().powi(m_new as i32) + 1.0);
        }
        margin = margin.min(min_h / max_w);
    }
    if !(margin.is_finite() && margin > 0.0) {
        return Err(Error::NotRegular("no certification circles".into()));
    }
    let delta = 0.5 * margin;
    let q = &h.q + &CPoly::monomial(Complex64::new(delta, 0.0), m_new);
    Ok(Perturbation {
        h: HarmonicPoly::new(h.p.clone(), q)?,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hp(p: &[f64], q: &[f64]) -> HarmonicPoly {
        HarmonicPoly::new(CPoly::from_real(p), CPoly::from_real(q)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let h = HarmonicPoly::new_unchecked(CPoly::from_real(&[0.0, 1.0]), CPoly::from_real(&[0.0, 1.0]));
        assert_eq!(h.eval(c(1.0, 1.0)), c(2.0, 0.0));
        let h = hp(&[0.0, 0.0, 1.0], &[]);
        assert_eq!(h.eval(c(0.0, 1.0)), c(-1.0, 0.0));
    }

    #[test]
    fn rejects_n_not_above_m() {
        assert!(HarmonicPoly::new(CPoly::from_real(&[0.0, 1.0]), CPoly::from_real(&[0.0, 1.0])).is_err());
        assert!(HarmonicPoly::new(CPoly::from_real(&[1.0]), CPoly::zero()).is_err());
    }

    #[test]
    fn orientation_examples() {
        let h = hp(&[0.0, 0.0, 1.0], &[0.0, 1.0]);
        assert_eq!(orientation_at(&h, c(1.0, 0.0)), Orientation::Preserving);
        assert_eq!(orientation_at(&h, c(0.0, 0.0)), Orientation::Reversing);
        assert_eq!(orientation_at(&h, c(0.5, 0.0)), Orientation::Singular);
    }

    #[test]
    fn winding_examples() {
        let unit = Contour::circle(c(0.0, 0.0), 1.0);
        assert_eq!(winding_number(|z| z, &unit, 16).unwrap(), 1);
        assert_eq!(winding_number(|z| z.conj(), &unit, 16).unwrap(), -1);
        // z^4/4 - z - conj(z) on |z| = 3: |z^4/4| dominates, winding 4
        let fig5 = hp(&[0.0, -1.0, 0.0, 0.0, 0.25], &[0.0, -1.0]);
        let big = Contour::circle(c(0.0, 0.0), 3.0);
        for z in (0..64).map(|k| big.point(k as f64 / 64.0)) {
            assert!(fig5.p().eval(z).norm() > 4.0 * fig5.q().eval(z).norm());
        }
        assert_eq!(winding_number(|z| fig5.eval(z), &big, 8).unwrap(), 4);
    }

    #[test]
    fn winding_through_zero_fails() {
        let unit = Contour::circle(c(0.0, 0.0), 1.0);
        let err = winding_number(|z| z - 1.0, &unit, 16).unwrap_err();
        assert!(matches!(err, Error::CurveThroughZero { .. }));
    }

    #[test]
    fn polyline_winding() {
        let square = Contour::Polyline(vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)]);
        assert_eq!(winding_number(|z| z * z * z, &square, 4).unwrap(), 3);
        assert_eq!(winding_number(|z| z - c(5.0, 0.0), &square, 4).unwrap(), 0);
    }

    #[test]
    fn identity_has_one_zero() {
        let h = hp(&[0.0, 1.0], &[]);
        let rs = find_all_zeros(&h, &SearchOptions::default()).unwrap();
        assert_eq!(rs.len(), 1);
        assert!(rs.roots[0].location.norm() < 1e-12);
        assert_eq!((rs.n_plus, rs.n_minus), (1, 0));
        assert!(rs.certified);
    }

    #[test]
    fn z_squared_plus_conj_z() {
        // z^2 + conj(z) = 0: z = 0 (reversing) and the three cube-root-of-minus-one points
        let h = hp(&[0.0, 0.0, 1.0], &[0.0, 1.0]);
        let rs = find_all_zeros(&h, &SearchOptions::default()).unwrap();
        assert!(rs.certified);
        assert_eq!(rs.len(), 4);
        assert_eq!((rs.n_plus, rs.n_minus), (3, 1));
        assert!(rs.index_sum_holds());
    }

    #[test]
    fn off_axes_single_root() {
        let rs = RootSet {
            roots: vec![Root {
                location: c(1.0, 1.0),
                orientation: Orientation::Preserving,
                winding: 1,
                residual: 0.0,
                cert_radius: 0.1,
            }],
            n_plus: 1,
            n_minus: 0,
            certified: true,
            n: 1,
            outer_winding: 1,
            enclosure_radius: 2.0,
            final_pitch: 0.1,
            fixpoint: true,
            singular_count: 0,
        };
        assert_eq!(off_axes_count(&rs), 1);
    }

    #[test]
    fn perturbation_delta_positive_and_degree_raised() {
        let h = hp(&[0.0, 0.0, 0.0, 1.0], &[0.0, 1.0]);
        let rs = find_all_zeros(&h, &SearchOptions::default()).unwrap();
        let pert = perturb_antianalytic(&h, &rs, 2).unwrap();
        assert!(pert.delta > 0.0);
        assert_eq!(pert.h.m(), 2);
        let after = find_all_zeros(&pert.h, &SearchOptions::default()).unwrap();
        assert!(after.certified);
        assert!(after.len() >= rs.len());
        // n = 2 cannot take m_new = 2
        let h2 = hp(&[0.0, 0.0, 1.0], &[0.0, 1.0]);
        let rs2 = find_all_zeros(&h2, &SearchOptions::default()).unwrap();
        assert!(perturb_antianalytic(&h2, &rs2, 2).is_err());
    }

    #[test]
    fn enclosure_contains_roots_and_p_dominates() {
        let h = hp(&[0.3, -1.0, 0.5, 1.0], &[2.0, 1.0]);
        let r = h.enclosure_radius();
        for k in 0..256 {
            let z = Complex64::from_polar(r, TAU * k as f64 / 256.0);
            assert!(h.p().eval(z).norm() > h.q().eval(z).norm());
        }
    }
}
