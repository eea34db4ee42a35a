//! Harmonic polynomials with many zeros built from a pair `S`, `T`.
//!
//! With `S(z) = (z - a)^(n-1) (z + (n-1) a)` and
//! `T(z) = (z - b)^(m+1) (z^(n-m-1) + t_(n-m-2) z^(n-m-2) + ... + t_0)`, the
//! free coefficients `t_j` are fixed by requiring `deg(S - T) <= m`. Then
//! `p = S + T`, `q = S - T` and `h = p + conj(q) = 2 Re S + 2i Im T`, so zeros
//! of `h` are the intersections of `{Re S = 0}` and `{Im T = 0}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpoly::CPoly;
use crate::error::{Error, Result};
use crate::hroots::{find_all_zeros_seeded, HarmonicMap, HarmonicPoly, Orientation, RootSet, SearchOptions};

/// Pivots smaller than this (relative to the largest) mark a singular system.
const PIVOT_RATIO_MIN: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub n: usize,
    pub m: usize,
    pub a: Complex64,
    pub b: Complex64,
}

impl ConstructionParams {
    pub fn new(n: usize, m: usize, a: Complex64, b: Complex64) -> Result<Self> {
        if n <= m {
            return Err(Error::InvalidInput(format!("need n > m, got n = {n}, m = {m}")));
        }
        Ok(ConstructionParams { n, m, a, b })
    }

    /// `m^2 + m + n`, the guaranteed count for `a = 0` and generic `b`.
    pub fn guaranteed_count(&self) -> usize {
        self.m * self.m + self.m + self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub params: ConstructionParams,
    pub s: CPoly,
    pub t: CPoly,
    pub p: CPoly,
    pub q: CPoly,
    /// `t_0, ..., t_(n-m-2)`.
    pub t_coeffs: Vec<Complex64>,
}

impl ConstructionResult {
    pub fn harmonic(&self) -> Result<HarmonicPoly> {
        HarmonicPoly::new(self.p.clone(), self.q.clone())
    }

    /// `h` evaluated through the factored forms of `S` and `T`.
    pub fn factored(&self) -> Result<FactoredConstruction> {
        let mut u = self.t_coeffs.clone();
        u.push(Complex64::new(1.0, 0.0));
        Ok(FactoredConstruction {
            params: self.params,
            cofactor: CPoly::new(u),
            radius: self.harmonic()?.enclosure_radius(),
        })
    }
}

/// `h = 2 Re S + 2i Im T` with `S` and `T` kept as products.
///
/// Near `b` the expanded form `p + conj(q)` loses `Im T ~ |z - b|^(m+1)` to
/// cancellation against `Im S`; the product form computes each part with
/// small relative error, so zeros clustered around `b` stay resolvable.
#[derive(Debug, Clone)]
pub struct FactoredConstruction {
    params: ConstructionParams,
    /// `z^(n-m-1) + t_(n-m-2) z^(n-m-2) + ... + t_0`.
    cofactor: CPoly,
    radius: f64,
}

impl FactoredConstruction {
    /// `(S, S')`.
    pub fn s_jet(&self, z: Complex64) -> (Complex64, Complex64) {
        let ConstructionParams { n, a, .. } = self.params;
        let w = z - a;
        let nf = n as f64;
        let s = w.powu(n as u32 - 1) * (z + a * (nf - 1.0));
        let ds = if n >= 2 {
            w.powu(n as u32 - 2) * (z + a * (nf - 2.0)) * nf
        } else {
            Complex64::new(1.0, 0.0)
        };
        (s, ds)
    }

    /// `(T, T', rounding scale of T)`.
    pub fn t_jet(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let ConstructionParams { m, b, .. } = self.params;
        let w = z - b;
        let (r, dr) = self.cofactor.eval_with_derivative(z);
        let wm = w.powu(m as u32);
        let t = wm * w * r;
        let dt = wm * ((m as f64 + 1.0) * r + w * dr);
        let scale = wm.norm() * w.norm() * (r.norm() + self.cofactor.abs_eval(z.norm()));
        (t, dt, scale)
    }
}

impl HarmonicMap for FactoredConstruction {
    fn degree(&self) -> usize {
        self.params.n
    }

    fn value(&self, z: Complex64) -> Complex64 {
        let (s, _) = self.s_jet(z);
        let (t, _, _) = self.t_jet(z);
        Complex64::new(2.0 * s.re, 2.0 * t.im)
    }

    fn derivatives(&self, z: Complex64) -> (Complex64, Complex64) {
        let (_, ds) = self.s_jet(z);
        let (_, dt, _) = self.t_jet(z);
        (ds + dt, (ds - dt).conj())
    }

    fn zero_radius(&self) -> f64 {
        self.radius
    }

    fn scaled_residual(&self, z: Complex64, v: Complex64) -> f64 {
        let (s, _) = self.s_jet(z);
        let (_, _, t_scale) = self.t_jet(z);
        0.5 * v.re.abs() / s.norm().max(f64::MIN_POSITIVE) + 0.5 * v.im.abs() / t_scale.max(f64::MIN_POSITIVE)
    }

    /// Solves `Re(S' dz) = -Re S`, `Im(T' dz) = -Im T` by Cramer's rule; the
    /// determinant `Re(S' conj(T'))` has no cancellation between large terms.
    fn newton_step(&self, z: Complex64, v: Complex64) -> Option<Complex64> {
        let (_, ds) = self.s_jet(z);
        let (_, dt, _) = self.t_jet(z);
        let det = ds.re * dt.re + ds.im * dt.im;
        if det == 0.0 {
            return None;
        }
        let (r1, r2) = (-0.5 * v.re, -0.5 * v.im);
        // [ds.re  -ds.im] [dx]   [r1]
        // [dt.im   dt.re] [dy] = [r2]
        let dx = (r1 * dt.re + ds.im * r2) / det;
        let dy = (ds.re * r2 - dt.im * r1) / det;
        let dz = Complex64::new(dx, dy);
        dz.is_finite().then_some(dz)
    }

    /// `T` vanishes to order `m + 1` at `b`, where `2m + 2` arcs of
    /// `Im T = 0` meet.
    fn cluster_hints(&self) -> Vec<(Complex64, usize)> {
        vec![(self.params.b, 2 * self.params.m + 2)]
    }

    fn negligible(&self, z: Complex64, v: Complex64) -> bool {
        self.scaled_residual(z, v) <= (4 * self.params.n + 64) as f64 * f64::EPSILON
    }

    /// `|h_z|^2 - |h_zbar|^2 = 4 Re(S' conj(T'))`, evaluated without cancellation.
    fn orientation(&self, z: Complex64) -> Orientation {
        let (_, ds) = self.s_jet(z);
        let (_, dt, _) = self.t_jet(z);
        let d = (ds * dt.conj()).re;
        let tau = 1e-9 * ds.norm() * dt.norm();
        if d > tau {
            Orientation::Preserving
        } else if d < -tau {
            Orientation::Reversing
        } else {
            Orientation::Singular
        }
    }
}

/// `S(z) = (z - a)^(n-1) (z + (n-1) a)`.
pub fn build_s(n: usize, a: Complex64) -> CPoly {
    assert!(n >= 1, "S needs n >= 1");
    let linear = CPoly::new(vec![a * (n as f64 - 1.0), Complex64::new(1.0, 0.0)]);
    &CPoly::binomial_power(a, n - 1) * &linear
}

/// Solves for the `t_j` and assembles `S, T, p, q`.
pub fn solve_t(params: &ConstructionParams) -> Result<ConstructionResult> {
    let ConstructionParams { n, m, a, b } = *params;
    if n <= m {
        return Err(Error::InvalidInput(format!("need n > m, got n = {n}, m = {m}")));
    }
    let s = build_s(n, a);
    let base = CPoly::binomial_power(b, m + 1);
    let unknowns = n - m - 1;

    let t_coeffs = if unknowns == 0 {
        Vec::new()
    } else {
        // coefficient of z^k in T is sum_j base_{k-j} u_j with u monic of degree `unknowns`;
        // match k = m+1 .. n-1 against S
        let mut mat = DMatrix::<Complex64>::zeros(unknowns, unknowns);
        let mut rhs = DVector::<Complex64>::zeros(unknowns);
        for (row, k) in (m + 1..n).enumerate() {
            for j in 0..unknowns {
                if k >= j {
                    mat[(row, j)] = base.coeff(k - j);
                }
            }
            let fixed = if k >= unknowns { base.coeff(k - unknowns) } else { Complex64::new(0.0, 0.0) };
            rhs[row] = s.coeff(k) - fixed;
        }
        solve_refined(&mat, &rhs)?
    };

    let mut u = t_coeffs.clone();
    u.push(Complex64::new(1.0, 0.0));
    let t = &base * &CPoly::new(u);
    let p = &s + &t;
    let diff = &s - &t;
    // coefficients above m vanish up to rounding; check before truncating
    let scale = s.norm1().max(t.norm1());
    let leak = (m + 1..=n).map(|k| diff.coeff(k).norm()).fold(0.0, f64::max);
    if leak > 1e-9 * scale {
        return Err(Error::SingularSystem {
            pivot_ratio: leak / scale,
        });
    }
    let q = diff.truncate(m);
    Ok(ConstructionResult {
        params: *params,
        s,
        t,
        p,
        q,
        t_coeffs,
    })
}

/// Dense LU with partial pivoting plus one step of iterative refinement.
fn solve_refined(mat: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> Result<Vec<Complex64>> {
    let lu = mat.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let pivot_ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(pivot_ratio > PIVOT_RATIO_MIN) {
        return Err(Error::SingularSystem { pivot_ratio });
    }
    let mut x = lu.solve(rhs).ok_or(Error::SingularSystem { pivot_ratio })?;
    let residual = rhs - mat * &x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    Ok(x.iter().copied().collect())
}

/// Root count of a construction, with every root checked against both curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRoots {
    pub construction: ConstructionResult,
    pub roots: RootSet,
    /// Roots where `|Re S|` or `|Im T|` exceeds `1e-7` of the local scale.
    pub off_curve: usize,
}

impl ConstructionRoots {
    pub fn certified_count(&self) -> Option<usize> {
        self.roots.certified.then_some(self.roots.len())
    }
}

pub fn count_construction_roots(params: &ConstructionParams, opts: &SearchOptions) -> Result<ConstructionRoots> {
    let construction = solve_t(params)?;
    let h = construction.factored()?;
    let seeds = if params.a == Complex64::new(0.0, 0.0) {
        ray_candidates(&h)
    } else {
        Vec::new()
    };
    let roots = find_all_zeros_seeded(&h, opts, &seeds)?;
    let off_curve = roots
        .roots
        .iter()
        .filter(|r| {
            let z = r.location;
            let (s, _) = h.s_jet(z);
            let (t, _, t_scale) = h.t_jet(z);
            s.re.abs() > 1e-7 * s.norm() || t.im.abs() > 1e-7 * t_scale
        })
        .count();
    Ok(ConstructionRoots {
        construction,
        roots,
        off_curve,
    })
}

/// Samples per unit of `r` on the uniform part of a ray.
const RAY_DENSITY: f64 = 128.0;
/// Decades and samples per decade of the refinement towards `b`.
const RAY_DECADES: i32 = 9;
const RAY_PER_DECADE: usize = 48;

/// Zeros of `h` bracketed on `{Re S = 0}` when `a = 0`. There `S = z^n`, so
/// the set is the `2n` rays `arg z = (j + 1/2) pi / n`, and along each ray
/// the zeros are the sign changes of `Im T`. Sampling is refined
/// geometrically towards the point of the ray nearest `b`, where up to
/// `m + 1` zeros crowd together.
fn ray_candidates(h: &FactoredConstruction) -> Vec<Complex64> {
    let ConstructionParams { n, b, .. } = h.params;
    let radius = h.radius;
    let uniform = (RAY_DENSITY * radius).ceil() as usize * n;
    (0..2 * n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let dir = Complex64::from_polar(1.0, (j as f64 + 0.5) * std::f64::consts::PI / n as f64);
            let r0 = (b * dir.conj()).re;
            let mut rs: Vec<f64> = (1..=uniform).map(|i| radius * i as f64 / uniform as f64).collect();
            for d in 0..RAY_DECADES * RAY_PER_DECADE as i32 {
                let u = 0.1 * (1.0 + b.norm()) * 10f64.powf(-(d as f64) / RAY_PER_DECADE as f64);
                rs.extend([r0 - u, r0 + u]);
            }
            rs.retain(|&r| r > 0.0 && r <= radius);
            rs.sort_by(f64::total_cmp);
            let g = |r: f64| h.t_jet(dir * r).0.im;
            let vals: Vec<f64> = rs.iter().map(|&r| g(r)).collect();
            let mut out = Vec::new();
            for i in 1..rs.len() {
                if (vals[i - 1] < 0.0) == (vals[i] < 0.0) {
                    continue;
                }
                let (mut lo, mut hi, glo) = (rs[i - 1], rs[i], vals[i - 1]);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (g(mid) < 0.0) == (glo < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(dir * (0.5 * (lo + hi)));
            }
            out
        })
        .collect()
}

/// Default offset of `b` from `e^{i pi/(2n)}` in the excessive-zeros sweep.
pub fn default_eps() -> Complex64 {
    Complex64::from_polar(0.003, 0.7)
}

/// One row of the `m = n - 2` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessRecord {
    pub n: usize,
    pub m: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub total: usize,
    /// `total - (m^2 + m + n)`; meaningless unless `certified`.
    pub excessive: i64,
    pub certified: bool,
    /// `n^2 - 2n + 4`.
    pub wilmshurst_count: usize,
}

/// Runs the construction with `m = n - 2`, `a = 0`, `b = e^{i pi/(2n)} + eps`.
pub fn excessive_zeros_experiment(n: usize, eps: Complex64, opts: &SearchOptions) -> Result<ExcessRecord> {
    if n < 4 {
        return Err(Error::InvalidInput("excessive-zeros sweep starts at n = 4".into()));
    }
    if !(eps.norm() > 0.0 && eps.norm() <= 1e-2) {
        return Err(Error::InvalidInput("need 0 < |eps| <= 1e-2".into()));
    }
    let m = n - 2;
    let a = Complex64::new(0.0, 0.0);
    let b = Complex64::from_polar(1.0, std::f64::consts::PI / (2.0 * n as f64)) + eps;
    let params = ConstructionParams::new(n, m, a, b)?;
    let run = count_construction_roots(&params, opts)?;
    let total = run.roots.len();
    Ok(ExcessRecord {
        n,
        m,
        a,
        b,
        total,
        excessive: total as i64 - params.guaranteed_count() as i64,
        certified: run.roots.certified,
        wilmshurst_count: n * n - 2 * n + 4,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureTable {
    pub rows: Vec<ExcessRecord>,
    /// Values of `n` where the certified excess grows relative to the
    /// previous certified row.
    pub jumps: Vec<usize>,
    /// Rows whose root set was not certified.
    pub inconclusive: Vec<usize>,
}

/// Sweeps `4 <= n <= n_max` with `m = n - 2`.
pub fn conjecture_scan(n_max: usize, eps: Complex64, opts: &SearchOptions) -> Result<ConjectureTable> {
    let rows: Vec<ExcessRecord> = (4..=n_max)
        .into_par_iter()
        .map(|n| excessive_zeros_experiment(n, eps, opts))
        .collect::<Result<_>>()?;
    let mut jumps = Vec::new();
    let mut last: Option<i64> = None;
    for row in rows.iter().filter(|r| r.certified) {
        if let Some(prev) = last {
            if row.excessive > prev {
                jumps.push(row.n);
            }
        }
        last = Some(row.excessive);
    }
    let inconclusive = rows.iter().filter(|r| !r.certified).map(|r| r.n).collect();
    Ok(ConjectureTable {
        rows,
        jumps,
        inconclusive,
    })
}
