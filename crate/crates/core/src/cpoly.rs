//! Dense complex polynomials and rational functions.
//!
//! Every other module builds on [`CPoly`]: the analytic and co-analytic parts
//! of a harmonic polynomial, the construction polynomials, and the rational
//! function `p'/q'` whose unit level set is the critical lemniscate.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual target for [`CPoly::all_roots`], measured as backward error.
pub const ROOT_RESIDUAL_TARGET: f64 = 1e-10;

/// Roots closer than this are reported as one multiple root by [`cluster_roots`].
pub const MULTIPLICITY_TOL: f64 = 1e-7;

const ABERTH_MAX_ITER: usize = 600;

/// Complex polynomial stored by ascending power.
///
/// Trailing zero coefficients are trimmed on construction, so the last stored
/// coefficient is the leading one. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for CPoly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        CPoly::new(coeffs)
    }
}

impl From<CPoly> for Vec<Complex64> {
    fn from(p: CPoly) -> Self {
        p.coeffs
    }
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        CPoly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        CPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        CPoly::new(vec![c])
    }

    /// `c z^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        CPoly::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        CPoly::new(coeffs)
    }

    /// `(z - a)^k` expanded with exact binomial coefficients.
    pub fn binomial_power(a: Complex64, k: usize) -> Self {
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut binom = 1.0_f64;
        for j in 0..=k {
            // coefficient of z^j is C(k, j) (-a)^(k-j)
            coeffs.push(binom * (-a).powu((k - j) as u32));
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        CPoly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(P(z), P'(z))` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |a_k| r^k`, the natural scale of `|P(z)|` on `|z| = r`.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> CPoly {
        CPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Coefficient-wise conjugate, i.e. the polynomial `conj(P(conj z))`.
    pub fn conj_coeffs(&self) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// `P(z + s)`.
    pub fn shift(&self, s: Complex64) -> CPoly {
        // repeated synthetic division (Taylor shift)
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let next = c[j + 1];
                c[j] += s * next;
            }
        }
        CPoly::new(c)
    }

    /// Drop every coefficient above `degree`.
    pub fn truncate(&self, degree: usize) -> CPoly {
        CPoly::new(self.coeffs.iter().take(degree + 1).copied().collect())
    }

    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `1 + max_{k<n} |a_k| / |a_n|`; every root lies strictly inside.
    pub fn cauchy_bound(&self) -> f64 {
        let Some(n) = self.degree() else {
            return f64::INFINITY;
        };
        let lead = self.coeffs[n].norm();
        1.0 + self.coeffs[..n]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max)
    }

    /// Backward-error residual `|P(z)| / sum |a_k| |z|^k`.
    pub fn residual(&self, z: Complex64) -> f64 {
        let scale = self.abs_eval(z.norm());
        if scale == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / scale
        }
    }

    /// All complex roots with multiplicity.
    ///
    /// Aberth–Ehrlich simultaneous iteration followed by Newton polishing.
    /// Fails with [`Error::NonConvergence`] when some root's backward error
    /// stays above [`ROOT_RESIDUAL_TARGET`].
    pub fn all_roots(&self) -> Result<Vec<Complex64>> {
        let Some(n) = self.degree() else {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        };
        if n == 0 {
            return Err(Error::InvalidInput("roots of a constant polynomial".into()));
        }
        let zeros_at_origin = self.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        let reduced = CPoly::new(self.coeffs[zeros_at_origin..].to_vec());
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
        if reduced.degree_or_zero() > 0 {
            roots.extend(aberth(&reduced));
        }
        for z in roots.iter_mut().skip(zeros_at_origin) {
            *z = polish(self, *z);
        }
        let worst = roots
            .iter()
            .map(|&z| self.residual(z))
            .fold(0.0, f64::max);
        if worst > ROOT_RESIDUAL_TARGET {
            return Err(Error::NonConvergence {
                worst_residual: worst,
            });
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}

fn aberth(p: &CPoly) -> Vec<Complex64> {
    let n = p.degree_or_zero();
    let lead = p.leading();
    let radius = (p.coeff(0) / lead).norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..ABERTH_MAX_ITER {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dpv) = p.eval_with_derivative(z[i]);
            let noise = 8.0 * f64::EPSILON * p.abs_eval(z[i].norm());
            if pv.norm() <= noise {
                done[i] = true;
                continue;
            }
            all_done = false;
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                if step.norm() <= f64::EPSILON * z[i].norm() {
                    done[i] = true;
                }
            } else {
                // derivative vanished; nudge off the stationary point
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                z[i] += bump;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

fn polish(p: &CPoly, mut z: Complex64) -> Complex64 {
    let mut best = p.residual(z);
    for _ in 0..4 {
        let (pv, dpv) = p.eval_with_derivative(z);
        if dpv.norm() == 0.0 {
            break;
        }
        let candidate = z - pv / dpv;
        let r = p.residual(candidate);
        if !(r < best) {
            break;
        }
        best = r;
        z = candidate;
    }
    z
}

/// Groups roots closer than `tol` into `(mean, multiplicity)` clusters.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for &r in roots {
        match clusters
            .iter_mut()
            .find(|(_, members)| members.iter().any(|m| (m - r).norm() <= tol))
        {
            Some((_, members)) => members.push(r),
            None => clusters.push((r, vec![r])),
        }
    }
    clusters
        .into_iter()
        .map(|(_, members)| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            (mean, members.len())
        })
        .collect()
}

/// Coefficients of `p` below this fraction of its size at the cluster are
/// treated as rounding noise by [`merge_multiple_roots`].
const MULTIPLE_ROOT_NOISE: f64 = 1e-9;

/// Groups computed roots of `p` into `(centre, multiplicity)` clusters.
///
/// A root of multiplicity `k` comes back from the solver as `k` points
/// spread over a radius of order `eps^(1/k)`, far beyond any fixed merge
/// tolerance when `k` is large. Groups are formed by single linkage at
/// distances from `max_tol` down to `min_tol`; a group of `k` roots is
/// accepted as one root when the Taylor coefficients `t_0 .. t_(k-1)` of
/// `p` at its centroid are all at rounding level. Whatever is left at
/// `min_tol` is grouped as by [`cluster_roots`].
pub fn merge_multiple_roots(p: &CPoly, roots: &[Complex64], min_tol: f64, max_tol: f64) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    let mut left: Vec<Complex64> = roots.to_vec();
    let mut tol = max_tol;
    while tol > min_tol && !left.is_empty() {
        let mut rest = Vec::new();
        for group in linkage_groups(&left, tol) {
            let k = group.len();
            let c = cluster_centre(p, &group);
            let t = p.shift(c);
            let r = 1.0 + c.norm();
            let size: f64 = t.coeffs().iter().enumerate().map(|(j, a)| a.norm() * r.powi(j as i32)).sum();
            let flat = (0..k).all(|j| t.coeff(j).norm() * r.powi(j as i32) <= MULTIPLE_ROOT_NOISE * size);
            if k > 1 && flat {
                out.push((c, k));
            } else if k == 1 {
                out.push((c, 1));
            } else {
                rest.extend(group);
            }
        }
        left = rest;
        tol /= 10.0;
    }
    out.extend(cluster_roots(&left, min_tol));
    out
}

/// Centre of a cluster of `k` roots: the root of `p^(k-1)` nearest the
/// centroid, which is simple when the cluster is one `k`-fold root.
fn cluster_centre(p: &CPoly, group: &[Complex64]) -> Complex64 {
    let k = group.len();
    let centroid = group.iter().sum::<Complex64>() / k as f64;
    if k == 1 {
        return centroid;
    }
    let radius = group.iter().map(|z| (z - centroid).norm()).fold(0.0, f64::max);
    let d = (1..k).fold(p.clone(), |acc, _| acc.derivative());
    let mut z = centroid;
    for _ in 0..30 {
        let (v, dv) = d.eval_with_derivative(z);
        let step = v / dv;
        if !step.is_finite() {
            return centroid;
        }
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - centroid).norm() <= radius {
        z
    } else {
        centroid
    }
}

/// Connected components of `points` under "closer than `tol`".
fn linkage_groups(points: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        seen[i] = true;
        let mut stack = vec![i];
        let mut group = Vec::new();
        while let Some(a) = stack.pop() {
            group.push(points[a]);
            for b in 0..n {
                if !seen[b] && (points[a] - points[b]).norm() <= tol {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        groups.push(group);
    }
    groups
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        if self.is_zero() || rhs.is_zero() {
            return CPoly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Values of a function and its first three derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct Jet3 {
    pub f: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

/// Ratio of two polynomials, used for `f = p'/q'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFn {
    numerator: CPoly,
    denominator: CPoly,
}

impl RationalFn {
    pub fn new(numerator: CPoly, denominator: CPoly) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidInput("rational function with zero denominator".into()));
        }
        Ok(RationalFn {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> &CPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &CPoly {
        &self.denominator
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.numerator.eval(z) / self.denominator.eval(z)
    }

    /// `(f, f')` at `z`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let (n, dn) = self.numerator.eval_with_derivative(z);
        let (d, dd) = self.denominator.eval_with_derivative(z);
        (n / d, (dn * d - n * dd) / (d * d))
    }

    /// `f` and its derivatives up to third order.
    pub fn jet(&self, z: Complex64) -> Jet3 {
        let nj = poly_jet(&self.numerator, z);
        let dj = poly_jet(&self.denominator, z);
        // f = N / D; write N = f D and differentiate (Leibniz) to solve for f^(k)
        let f = nj[0] / dj[0];
        let d1 = (nj[1] - f * dj[1]) / dj[0];
        let d2 = (nj[2] - 2.0 * d1 * dj[1] - f * dj[2]) / dj[0];
        let d3 = (nj[3] - 3.0 * d2 * dj[1] - 3.0 * d1 * dj[2] - f * dj[3]) / dj[0];
        Jet3 { f, d1, d2, d3 }
    }

    /// Numerator of `f'`: `N' D - N D'`.
    pub fn derivative_numerator(&self) -> CPoly {
        &(&self.numerator.derivative() * &self.denominator)
            - &(&self.numerator * &self.denominator.derivative())
    }

    /// Zeros of the numerator that are (numerically) zeros of the denominator
    /// too. They are reported, never cancelled.
    pub fn common_roots(&self) -> Result<Vec<Complex64>> {
        if self.numerator.degree_or_zero() == 0 || self.denominator.degree_or_zero() == 0 {
            return Ok(Vec::new());
        }
        let dr = self.denominator.all_roots()?;
        Ok(self
            .numerator
            .all_roots()?
            .into_iter()
            .filter(|z| dr.iter().any(|w| (z - w).norm() <= MULTIPLICITY_TOL))
            .collect())
    }
}

/// `[P, P', P'', P''']` at `z`.
pub fn poly_jet(p: &CPoly, z: Complex64) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    let mut cur = p.clone();
    for slot in out.iter_mut() {
        *slot = cur.eval(z);
        cur = cur.derivative();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = CPoly::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(c(1.0, 0.0)), c(0.0, 0.0));
        let id = CPoly::from_real(&[0.0, 1.0]);
        assert_eq!(id.eval(c(3.0, 4.0)), c(3.0, 4.0));
        let fig5 = CPoly::from_real(&[0.0, -1.0, 0.0, 0.0, 0.25]);
        assert!((fig5.eval(c(1.0, 0.0)) - c(-0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(CPoly::from_real(&[0.0, 0.0, 1.0]).derivative(), CPoly::from_real(&[0.0, 2.0]));
        assert!(CPoly::from_real(&[5.0]).derivative().is_zero());
        let fig5 = CPoly::from_real(&[0.0, -1.0, 0.0, 0.0, 0.25]);
        assert_eq!(fig5.derivative(), CPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let deg = rng.gen_range(1..10);
            let p = CPoly::new((0..=deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let h = 1e-5 * (1.0 + z.norm());
            let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
            let exact = p.derivative().eval(z);
            assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn cube_roots_of_unity() {
        let roots = CPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]).all_roots().unwrap();
        assert_eq!(roots.len(), 3);
        for k in 0..3 {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            assert!(roots.iter().any(|r| (r - w).norm() < 1e-12));
        }
    }

    #[test]
    fn double_root_clusters() {
        // (z-1)^2 (z+2) = z^3 - 3z + 2
        let p = CPoly::from_real(&[2.0, -3.0, 0.0, 1.0]);
        let roots = p.all_roots().unwrap();
        let clusters = cluster_roots(&roots, MULTIPLICITY_TOL);
        assert_eq!(clusters.len(), 2);
        let one = clusters.iter().find(|(z, _)| (z - c(1.0, 0.0)).norm() < 1e-7).unwrap();
        assert_eq!(one.1, 2);
        let minus_two = clusters.iter().find(|(z, _)| (z - c(-2.0, 0.0)).norm() < 1e-10).unwrap();
        assert_eq!(minus_two.1, 1);
    }

    #[test]
    fn high_multiplicity_root_merges_but_close_simple_roots_do_not() {
        // (z - 0.3i)^7 (z - 2) spreads its 7-fold root far beyond MULTIPLICITY_TOL
        let centre = c(0.0, 0.3);
        let mut zs = vec![centre; 7];
        zs.push(c(2.0, 0.0));
        let p = CPoly::from_roots(&zs);
        let roots = p.all_roots().unwrap();
        let merged = merge_multiple_roots(&p, &roots, 1e-5, 1e-2);
        assert_eq!(merged.len(), 2);
        let seven = merged.iter().find(|(_, k)| *k == 7).expect("7-fold cluster");
        assert!((seven.0 - centre).norm() < 1e-8);

        // two simple roots 1e-3 apart stay separate
        let p = CPoly::from_roots(&[c(0.5, 0.0), c(0.501, 0.0), c(-1.0, 0.0)]);
        let merged = merge_multiple_roots(&p, &p.all_roots().unwrap(), 1e-5, 1e-2);
        assert_eq!(merged.len(), 3);
    }

    #[test]
    fn wilmshurst_critical_points_on_symmetry_line() {
        // p = z^5 + (z-1)^5 is symmetric under z -> 1 - z, so p' roots sit on Re z = 1/2
        let p = &CPoly::monomial(c(1.0, 0.0), 5) + &CPoly::binomial_power(c(1.0, 0.0), 5);
        let roots = p.derivative().all_roots().unwrap();
        assert_eq!(roots.len(), 4);
        for r in roots {
            assert!((r.re - 0.5).abs() < 1e-9, "{r}");
            // substitution check
            assert!(p.derivative().residual(r) < 1e-12);
        }
    }

    #[test]
    fn cauchy_bound_examples() {
        assert_eq!(CPoly::from_real(&[-1.0, 0.0, 1.0]).cauchy_bound(), 2.0);
        assert_eq!(CPoly::from_real(&[0.0, 0.0, 0.0, 1.0]).cauchy_bound(), 1.0);
        assert_eq!(CPoly::from_real(&[-8.0, 0.0, 2.0]).cauchy_bound(), 5.0);
    }

    #[test]
    fn roots_at_origin() {
        let roots = CPoly::from_real(&[0.0, 0.0, 0.0, 1.0]).all_roots().unwrap();
        assert!(roots.iter().all(|r| r.norm() == 0.0));
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = CPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0), c(0.0, 1.0)]);
        let s = c(0.7, -1.2);
        let shifted = p.shift(s);
        for z in [c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)] {
            assert!((shifted.eval(z) - p.eval(z + s)).norm() < 1e-12);
        }
    }

    #[test]
    fn binomial_power_expansion() {
        assert_eq!(CPoly::binomial_power(c(1.0, 0.0), 2), CPoly::from_real(&[1.0, -2.0, 1.0]));
        let b = c(1.1, -0.1);
        let direct = (0..4).fold(CPoly::constant(c(1.0, 0.0)), |acc, _| &acc * &CPoly::new(vec![-b, c(1.0, 0.0)]));
        let expanded = CPoly::binomial_power(b, 4);
        for k in 0..=4 {
            assert!((direct.coeff(k) - expanded.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn rational_jet_matches_finite_differences() {
        let f = RationalFn::new(
            CPoly::new(vec![c(1.0, 0.0), c(0.2, 0.3), c(-1.0, 0.5), c(0.4, 0.0)]),
            CPoly::new(vec![c(2.0, 0.1), c(0.3, -0.2)]),
        )
        .unwrap();
        let z = c(0.3, -0.4);
        let j = f.jet(z);
        let h = 1e-4;
        let g = |w: Complex64| f.eval(w);
        let d1 = (g(z + h) - g(z - h)) / (2.0 * h);
        let d2 = (g(z + h) - 2.0 * g(z) + g(z - h)) / (h * h);
        let d3 = (g(z + 2.0 * h) - 2.0 * g(z + h) + 2.0 * g(z - h) - g(z - 2.0 * h)) / (2.0 * h * h * h);
        assert!((j.d1 - d1).norm() < 1e-7);
        assert!((j.d2 - d2).norm() < 1e-5);
        assert!((j.d3 - d3).norm() < 1e-3);
        let (_, df) = f.eval_with_derivative(z);
        assert!((df - j.d1).norm() < 1e-12);
    }

    #[test]
    fn common_roots_are_reported() {
        let f = RationalFn::new(
            CPoly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]),
            CPoly::from_roots(&[c(1.0, 0.0), c(-3.0, 0.0)]),
        )
        .unwrap();
        let common = f.common_roots().unwrap();
        assert_eq!(common.len(), 1);
        assert!((common[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!(RationalFn::new(CPoly::from_real(&[1.0]), CPoly::zero()).is_err());
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> CPoly {
        let coeffs: Vec<Complex64> = (0..=deg)
            .map(|_| {
                let r: f64 = rng.gen_range(0.05_f64..1.0).sqrt();
                Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        CPoly::new(coeffs)
    }

    #[test]
    fn random_polys_rebuild_from_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let deg = rng.gen_range(1..=12);
            let p = random_poly(&mut rng, deg);
            let roots = p.all_roots().unwrap();
            assert_eq!(roots.len(), deg);
            let rebuilt = CPoly::from_roots(&roots);
            let lead = p.leading();
            for k in 0..=deg {
                assert!(
                    (rebuilt.coeff(k) - p.coeff(k) / lead).norm() <= 1e-8,
                    "deg {deg} coeff {k}"
                );
            }
        }
    }

    #[test]
    fn roots_inside_cauchy_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let deg = rng.gen_range(1..=12);
            let p = random_poly(&mut rng, deg);
            let bound = p.cauchy_bound();
            assert!(p.all_roots().unwrap().iter().all(|r| r.norm() < bound));
        }
    }
}
