//! Newton polygons of the real system `h(x + iy) = A(x, y) + i B(x, y)` and
//! the mixed-area bound on zeros off the coordinate axes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hroots::{off_axes_count, HarmonicPoly, RootSet};

/// Relative threshold below which expanded coefficients count as zero.
pub const EPS_DROP: f64 = 1e-12;

pub type LatticePoint = (i64, i64);

/// Real bivariate polynomial `sum c_ij x^i y^j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RPoly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl RPoly2 {
    /// Builds from raw terms, dropping those below `EPS_DROP * max |c|`.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), f64)>) -> Self {
        let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (k, v) in terms {
            *acc.entry(k).or_default() += v;
        }
        let max = acc.values().map(|v| v.abs()).fold(0.0, f64::max);
        acc.retain(|_, v| v.abs() > EPS_DROP * max);
        RPoly2 { terms: acc }
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        self.terms.keys().map(|&(i, j)| (i as i64, j as i64)).collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }
}

/// Splits `h(x + iy)` into real and imaginary parts by binomial expansion.
pub fn realify(h: &HarmonicPoly) -> (RPoly2, RPoly2) {
    let mut acc: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
    // (x + iy)^k = sum_j C(k,j) x^(k-j) (iy)^j ; conj gives (-i)^j
    let mut add = |coeff: Complex64, k: usize, conjugate: bool| {
        let mut binom = 1.0_f64;
        for j in 0..=k {
            let unit = match (j % 4, conjugate) {
                (0, _) => Complex64::new(1.0, 0.0),
                (2, _) => Complex64::new(-1.0, 0.0),
                (1, false) | (3, true) => Complex64::new(0.0, 1.0),
                _ => Complex64::new(0.0, -1.0),
            };
            *acc.entry(((k - j) as u32, j as u32)).or_default() += coeff * unit * binom;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    };
    for (k, &a) in h.p().coeffs().iter().enumerate() {
        add(a, k, false);
    }
    for (k, &b) in h.q().coeffs().iter().enumerate() {
        add(b.conj(), k, true);
    }
    let re = RPoly2::from_terms(acc.iter().map(|(&k, v)| (k, v.re)));
    let im = RPoly2::from_terms(acc.iter().map(|(&k, v)| (k, v.im)));
    (re, im)
}

/// Convex hull of a lattice point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePolygon {
    pub support: Vec<LatticePoint>,
    /// Counterclockwise, starting from the lowest-then-leftmost vertex, with
    /// no three consecutive vertices collinear.
    pub hull: Vec<LatticePoint>,
}

impl LatticePolygon {
    pub fn from_points(points: &[LatticePoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut support = points.to_vec();
        support.sort_unstable();
        support.dedup();
        let hull = convex_hull(&support);
        Ok(LatticePolygon { support, hull })
    }

    /// Twice the enclosed area (an integer for lattice polygons).
    pub fn double_area(&self) -> i64 {
        let n = self.hull.len();
        if n < 3 {
            return 0;
        }
        (0..n)
            .map(|i| {
                let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
                a.0 * b.1 - a.1 * b.0
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.double_area() as f64 / 2.0
    }

    /// Hull vertices as a sorted set, for comparisons.
    pub fn vertex_set(&self) -> Vec<LatticePoint> {
        let mut v = self.hull.clone();
        v.sort_unstable();
        v
    }

    pub fn translate(&self, by: LatticePoint) -> LatticePolygon {
        let shift = |p: &LatticePoint| (p.0 + by.0, p.1 + by.1);
        LatticePolygon {
            support: self.support.iter().map(shift).collect(),
            hull: self.hull.iter().map(shift).collect(),
        }
    }
}

fn cross(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; collinear points are dropped.
fn convex_hull(sorted: &[LatticePoint]) -> Vec<LatticePoint> {
    if sorted.len() <= 2 {
        return sorted.to_vec();
    }
    let mut lower: Vec<LatticePoint> = Vec::new();
    for &p in sorted {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<LatticePoint> = Vec::new();
    for &p in sorted.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // all points collinear: the chain degenerates to the two endpoints
    lower.dedup();
    let start = lower
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| (p.1, p.0))
        .map(|(i, _)| i)
        .unwrap_or(0);
    lower.rotate_left(start);
    lower
}

/// Newton polygon (hull of the exponent support).
pub fn newton_polygon(p: &RPoly2) -> Result<LatticePolygon> {
    if p.is_zero() {
        return Err(Error::EmptySupport);
    }
    LatticePolygon::from_points(&p.support())
}

/// Minkowski sum by merging the two boundaries in edge-angle order.
pub fn minkowski_sum(a: &LatticePolygon, b: &LatticePolygon) -> LatticePolygon {
    let (pa, pb) = (&a.hull, &b.hull);
    if pa.len() == 1 {
        return b.translate(pa[0]).with_support_of_sum(a, b);
    }
    if pb.len() == 1 {
        return a.translate(pb[0]).with_support_of_sum(a, b);
    }
    let (na, nb) = (pa.len(), pb.len());
    let edge = |poly: &Vec<LatticePoint>, i: usize| {
        let (s, t) = (poly[i % poly.len()], poly[(i + 1) % poly.len()]);
        (t.0 - s.0, t.1 - s.1)
    };
    let mut out = Vec::with_capacity(na + nb);
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let pi = pa[i % na];
        let qj = pb[j % nb];
        out.push((pi.0 + qj.0, pi.1 + qj.1));
        let (ea, eb) = (edge(pa, i), edge(pb, j));
        let turn = ea.0 * eb.1 - ea.1 * eb.0;
        if j >= nb || (i < na && turn > 0) {
            i += 1;
        } else if i >= na || turn < 0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    let mut sorted = out;
    sorted.sort_unstable();
    sorted.dedup();
    LatticePolygon {
        support: Vec::new(),
        hull: convex_hull(&sorted),
    }
    .with_support_of_sum(a, b)
}

impl LatticePolygon {
    fn with_support_of_sum(mut self, a: &LatticePolygon, b: &LatticePolygon) -> LatticePolygon {
        let mut support: Vec<LatticePoint> = a
            .hull
            .iter()
            .flat_map(|u| b.hull.iter().map(move |v| (u.0 + v.0, u.1 + v.1)))
            .collect();
        support.sort_unstable();
        support.dedup();
        self.support = support;
        self
    }
}

/// `[N_P + N_Q] - [N_P] - [N_Q]`.
pub fn mixed_area_polygons(a: &LatticePolygon, b: &LatticePolygon) -> f64 {
    let sum = minkowski_sum(a, b);
    (sum.double_area() - a.double_area() - b.double_area()) as f64 / 2.0
}

pub fn mixed_area(p: &RPoly2, q: &RPoly2) -> Result<f64> {
    Ok(mixed_area_polygons(&newton_polygon(p)?, &newton_polygon(q)?))
}

/// Hull vertex sets `(A, B)` predicted for a generic real-coefficient `h`
/// of analytic degree `n`: a triangle and a trapezoid whose roles swap with
/// the parity of `n`.
pub fn predicted_vertices(n: usize) -> (Vec<LatticePoint>, Vec<LatticePoint>) {
    let n = n as i64;
    let (mut a, mut b) = if n % 2 == 0 {
        (
            vec![(0, 0), (0, n), (n, 0)],
            vec![(0, 1), (0, n - 1), (1, n - 1), (n - 1, 1)],
        )
    } else {
        (
            vec![(0, 0), (0, n - 1), (1, n - 1), (n, 0)],
            vec![(0, 1), (0, n), (n - 1, 1)],
        )
    };
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    (a, b)
}

/// Whether every predicted extreme coefficient of `realify(h)` is nonzero.
pub fn is_generic(h: &HarmonicPoly) -> bool {
    let (a, b) = realify(h);
    let (va, vb) = predicted_vertices(h.n());
    va.iter().all(|&(i, j)| a.coeff(i as u32, j as u32) != 0.0)
        && vb.iter().all(|&(i, j)| b.coeff(i as u32, j as u32) != 0.0)
}

/// Shifts `h(z) -> h(z + x0)` for `x0 = 1, 2, 3, ...` until the predicted
/// extreme coefficients are all nonzero. Returns `x0 = 0` when `h` already is.
pub fn make_generic(h: &HarmonicPoly) -> Result<(HarmonicPoly, f64)> {
    if is_generic(h) {
        return Ok((h.clone(), 0.0));
    }
    for x0 in 1..=64 {
        let shifted = h.shift(Complex64::new(x0 as f64, 0.0));
        if is_generic(&shifted) {
            return Ok((shifted, x0 as f64));
        }
    }
    Err(Error::AssumptionFailed(
        "no integer shift makes the Newton polygons generic".into(),
    ))
}

fn require_real(h: &HarmonicPoly) -> Result<()> {
    for (part, poly) in [("p", h.p()), ("q", h.q())] {
        if let Some((index, c)) = poly.coeffs().iter().enumerate().find(|(_, c)| c.im.abs() > 1e-12) {
            return Err(Error::NotRealCoefficients {
                part,
                index,
                imag: c.im,
            });
        }
    }
    Ok(())
}

/// Off-axes root count against the mixed-area bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub off_axes: usize,
    pub bound: f64,
    pub generic: bool,
    pub holds: bool,
}

pub fn bernstein_check(h: &HarmonicPoly, rs: &RootSet) -> Result<BernsteinReport> {
    require_real(h)?;
    let (a, b) = realify(h);
    let bound = mixed_area(&a, &b)?;
    let off_axes = off_axes_count(rs);
    Ok(BernsteinReport {
        off_axes,
        bound,
        generic: is_generic(h),
        holds: off_axes as f64 <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::CPoly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(p: &[f64], q: &[f64]) -> HarmonicPoly {
        HarmonicPoly::new_unchecked(CPoly::from_real(p), CPoly::from_real(q))
    }

    fn random_real(rng: &mut ChaCha8Rng, n: usize) -> HarmonicPoly {
        let m = rng.gen_range(0..n);
        let p: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        HarmonicPoly::new(CPoly::from_real(&p), CPoly::from_real(&q)).unwrap()
    }

    #[test]
    fn realify_examples() {
        let (a, b) = realify(&hp(&[0.0, 0.0, 1.0], &[]));
        assert_eq!(a, RPoly2::from_terms([((2, 0), 1.0), ((0, 2), -1.0)]));
        assert_eq!(b, RPoly2::from_terms([((1, 1), 2.0)]));
        let (a, b) = realify(&hp(&[0.0, 1.0], &[0.0, 1.0]));
        assert_eq!(a, RPoly2::from_terms([((1, 0), 2.0)]));
        assert!(b.is_zero());
    }

    #[test]
    fn realify_matches_evaluation() {
        let h = HarmonicPoly::new(
            CPoly::new(vec![Complex64::new(0.2, -0.1), Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.2), Complex64::new(0.7, 0.0)]),
            CPoly::new(vec![Complex64::new(0.1, 0.1), Complex64::new(-0.4, 0.9)]),
        )
        .unwrap();
        let (a, b) = realify(&h);
        for (x, y) in [(0.3, -0.7), (1.2, 0.4), (-2.0, 1.5)] {
            let v = h.eval(Complex64::new(x, y));
            assert!((a.eval(x, y) - v.re).abs() < 1e-12);
            assert!((b.eval(x, y) - v.im).abs() < 1e-12);
        }
    }

    #[test]
    fn real_coefficients_split_y_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_real(&mut rng, 6);
        let (a, b) = realify(&h);
        assert!(a.terms().all(|(&(_, j), _)| j % 2 == 0));
        assert!(b.terms().all(|(&(_, j), _)| j % 2 == 1));
    }

    #[test]
    fn newton_polygons_for_n6_and_n5() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_real(&mut rng, 6);
        let (a, b) = realify(&h);
        assert_eq!(newton_polygon(&a).unwrap().vertex_set(), vec![(0, 0), (0, 6), (6, 0)]);
        assert_eq!(newton_polygon(&b).unwrap().vertex_set(), vec![(0, 1), (0, 5), (1, 5), (5, 1)]);
        assert_eq!(mixed_area(&a, &b).unwrap(), 30.0);
        let h = random_real(&mut rng, 5);
        let (a, b) = realify(&h);
        assert_eq!(mixed_area(&a, &b).unwrap(), 20.0);
    }

    #[test]
    fn single_point_polygon() {
        let p = RPoly2::from_terms([((1, 0), 1.0)]);
        let poly = newton_polygon(&p).unwrap();
        assert_eq!(poly.hull, vec![(1, 0)]);
        assert_eq!(poly.area(), 0.0);
        assert_eq!(newton_polygon(&RPoly2::default()), Err(Error::EmptySupport));
    }

    #[test]
    fn minkowski_examples() {
        let tri = LatticePolygon::from_points(&[(0, 0), (0, 6), (6, 0)]).unwrap();
        let trap = LatticePolygon::from_points(&[(0, 1), (0, 5), (1, 5), (5, 1)]).unwrap();
        let sum = minkowski_sum(&tri, &trap);
        assert_eq!(sum.vertex_set(), vec![(0, 1), (0, 11), (1, 11), (11, 1)]);

        let point = LatticePolygon::from_points(&[(2, 3)]).unwrap();
        assert_eq!(minkowski_sum(&tri, &point).vertex_set(), vec![(2, 3), (2, 9), (8, 3)]);

        let sq = LatticePolygon::from_points(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap();
        assert_eq!(minkowski_sum(&sq, &sq).area(), 4.0);
    }

    #[test]
    fn mixed_area_of_equal_triangles() {
        // x + y + 1 has the unit simplex as Newton polygon
        let p = RPoly2::from_terms([((0, 0), 1.0), ((1, 0), 1.0), ((0, 1), 1.0)]);
        assert_eq!(mixed_area(&p, &p).unwrap(), 1.0);
    }

    #[test]
    fn bernstein_rejects_complex() {
        let h = HarmonicPoly::new(CPoly::new(vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]), CPoly::zero()).unwrap();
        let rs = crate::hroots::find_all_zeros(&h, &Default::default()).unwrap();
        assert!(matches!(bernstein_check(&h, &rs), Err(Error::NotRealCoefficients { .. })));
    }

    #[test]
    fn bernstein_z2_plus_conj_z() {
        let h = hp(&[0.0, 0.0, 1.0], &[0.0, 1.0]);
        let rs = crate::hroots::find_all_zeros(&h, &Default::default()).unwrap();
        let rep = bernstein_check(&h, &rs).unwrap();
        // roots: 0, -1, e^{+-i pi/3}; two lie off the axes
        assert_eq!(rep.bound, 2.0);
        assert_eq!(rep.off_axes, 2);
        assert!(rep.holds);
    }

    #[test]
    fn generic_shift_restores_extreme_coefficients() {
        // p = z^4 - z^2 + 0.25, q = 0: A has no constant... check a00 = h(0) != 0 fails at first
        let h = hp(&[0.0, 0.0, -1.0, 0.0, 1.0], &[0.0, 1.0]);
        assert!(!is_generic(&h));
        let (g, x0) = make_generic(&h).unwrap();
        assert!(x0 >= 1.0);
        assert!(is_generic(&g));
    }
}
