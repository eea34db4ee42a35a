use hzeros::newton::realify;
use hzeros::{find_all_zeros, CPoly, HarmonicPoly, SearchOptions};
use num_complex::Complex64;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0_f64, -1.0..1.0_f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn poly(degree: usize) -> impl Strategy<Value = CPoly> {
    (prop::collection::vec(coeff(), degree), 0.3..1.0_f64, 0.0..std::f64::consts::TAU).prop_map(
        |(mut c, lead, angle)| {
            c.push(Complex64::from_polar(lead, angle));
            CPoly::new(c)
        },
    )
}

fn harmonic() -> impl Strategy<Value = HarmonicPoly> {
    (2..=5_usize)
        .prop_flat_map(|n| (poly(n), 0..n))
        .prop_flat_map(|(p, m)| (Just(p), poly(m)))
        .prop_filter_map("degenerate", |(p, q)| HarmonicPoly::new(p, q).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_and_imaginary_parts_match_evaluation(h in harmonic(), x in -2.0..2.0_f64, y in -2.0..2.0_f64) {
        let (a, b) = realify(&h);
        let w = h.eval(Complex64::new(x, y));
        let scale = 1.0 + h.p().abs_eval(x.hypot(y)) + h.q().abs_eval(x.hypot(y));
        prop_assert!((a.eval(x, y) - w.re).abs() <= 1e-10 * scale);
        prop_assert!((b.eval(x, y) - w.im).abs() <= 1e-10 * scale);
    }

    #[test]
    fn certified_roots_obey_index_sum(h in harmonic()) {
        let rs = find_all_zeros(&h, &SearchOptions::default()).unwrap();
        prop_assume!(rs.certified);
        let sum: i64 = rs.roots.iter().map(|r| r.winding).sum();
        prop_assert_eq!(sum, h.n() as i64);
        prop_assert!(rs.len() >= h.n());
        prop_assert!(rs.len() <= 3 * h.n() * h.n());
        for r in &rs.roots {
            prop_assert!(h.residual(r.location) < 1e-8);
        }
    }

    #[test]
    fn polynomial_roots_round_trip(roots in prop::collection::vec(coeff(), 1..8)) {
        let p = CPoly::from_roots(&roots);
        let found = p.all_roots().unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for z in &roots {
            let nearest = found.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-4, "root {} missed by {:e}", z, nearest);
        }
        for w in &found {
            prop_assert!(p.residual(*w) < 1e-8);
        }
    }
}
