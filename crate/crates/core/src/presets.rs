//! Named configurations reproducing the published figures, and the figure
//! assembly shared by the command-line tool.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{solve_t, ConstructionParams};
use crate::cpoly::CPoly;
use crate::error::{Error, Result};
use crate::hroots::{HarmonicPoly, RootSet, SearchOptions};
use crate::lemniscate::{trace_lemniscate, OmegaDecomposition};
use crate::newton::{make_generic, newton_polygon, realify};
use crate::report::{caustic_run, construct_report, newton_report, roots_report, CausticRun};
use crate::svg::{
    caustic_layers, newton_polygon_layer, omega_layers, render_panels, roots_layers, zero_set_segments,
    zeros_of_f_layer, Figure, Layer, LayerKind, Style,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The `(4, 1)` polynomial with a non-convex lemniscate component holding
/// two zeros of `h`:
/// `h = (0.0581623 + 0.156514i) z^4 + (0.354765 - 0.131835i) z^3
///  - (0.116325 + 0.313028i) z^2 - (1.06429 - 0.395504i) z
///  + (0.247627 + 0.020994i) - (0.934124 + 0.356949i) conj(z)`.
pub fn concave_quartic() -> HarmonicPoly {
    let p = CPoly::new(vec![
        c(0.247627, 0.020994),
        -c(1.06429, -0.395504),
        -c(0.116325, 0.313028),
        c(0.354765, -0.131835),
        c(0.0581623, 0.156514),
    ]);
    // conj(q(z)) = -(0.934124 + 0.356949i) conj(z)
    let q = CPoly::new(vec![c(0.0, 0.0), -c(0.934124, 0.356949).conj()]);
    HarmonicPoly::new(p, q).expect("valid preset")
}

/// `h = z^4/4 - z - e^{i theta} conj(z)`.
pub fn petals(theta: f64) -> HarmonicPoly {
    let p = CPoly::from_real(&[0.0, -1.0, 0.0, 0.0, 0.25]);
    let q = CPoly::new(vec![c(0.0, 0.0), -Complex64::from_polar(1.0, theta).conj()]);
    HarmonicPoly::new(p, q).expect("valid preset")
}

pub fn construction_n4() -> ConstructionParams {
    ConstructionParams::new(4, 2, c(0.0, 0.0), c(1.1, -0.1)).expect("valid preset")
}

pub fn construction_n5() -> ConstructionParams {
    ConstructionParams::new(5, 2, c(1.5, -0.5), c(-0.05, 0.92)).expect("valid preset")
}

pub fn construction_n9() -> ConstructionParams {
    ConstructionParams::new(9, 7, c(0.0, 0.0), c(1.1, -0.1)).expect("valid preset")
}

/// Seeded real-coefficient `h` of degree `n` with `m = n - 1`, coefficients
/// uniform in `[-1, 1]`, shifted if needed so its Newton polygons are generic.
pub fn random_real(n: usize, seed: u64) -> HarmonicPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| CPoly::from_real(&(0..=k).map(|_| rng.gen_range(-1.0..=1.0)).collect::<Vec<f64>>());
    let p = draw(n);
    let q = draw(n - 1);
    let h = HarmonicPoly::new(p, q).expect("random leading coefficient is nonzero");
    make_generic(&h).map(|(g, _)| g).unwrap_or(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub title: String,
}

pub const PRESET_NAMES: [&str; 5] = ["paper-fig-1", "paper-fig-2", "paper-fig-3", "paper-fig-4", "paper-fig-5"];

pub fn preset(name: &str) -> Option<Preset> {
    let title = match name {
        "paper-fig-1" => "Roots, zeros of f and Omega for the concave (4,1) example",
        "paper-fig-2" => "Newton polygons A and B for n = 6 and n = 5",
        "paper-fig-3" => "Gamma_T, Gamma_S and Omega for (n,m) = (4,2) and (5,2)",
        "paper-fig-4" => "Roots and Omega for (n,m) = (9,7)",
        "paper-fig-5" => "Lemniscate and caustics of z^4/4 - z - e^{i theta} conj(z)",
        _ => return None,
    };
    Some(Preset {
        name: name.into(),
        title: title.into(),
    })
}

/// Rendered preset: the SVG and a JSON summary of the data drawn.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub svg: String,
    pub summary: serde_json::Value,
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn render_preset(name: &str, seed: u64) -> Result<Rendered> {
    let opts = SearchOptions::default();
    match name {
        "paper-fig-1" => {
            let h = concave_quartic();
            let report = roots_report(&h, &opts, None)?;
            let (full, zoom) = roots_figures(&h, &report.roots, true)?;
            Ok(Rendered {
                svg: render_panels(&[full, zoom.expect("zoom requested")], 2),
                summary: json(&report),
            })
        }
        "paper-fig-2" => {
            let mut panels = Vec::new();
            let mut summary = Vec::new();
            for n in [6, 5] {
                let h = random_real(n, seed);
                let (a, b) = realify(&h);
                let pa = newton_polygon(&a)?;
                let pb = newton_polygon(&b)?;
                panels.push(Figure::new(format!("A, n = {n}")).with_layer(newton_polygon_layer(&pa, "#1f4e9c")));
                panels.push(Figure::new(format!("B, n = {n}")).with_layer(newton_polygon_layer(&pb, "#b22222")));
                summary.push(newton_report(&h, None)?);
            }
            Ok(Rendered {
                svg: render_panels(&panels, 2),
                summary: json(&summary),
            })
        }
        "paper-fig-3" => {
            let mut panels = Vec::new();
            let mut summary = Vec::new();
            for params in [construction_n4(), construction_n5()] {
                let report = construct_report(&params, &opts)?;
                panels.push(construction_figure(&params, &report.roots)?);
                summary.push(report);
            }
            Ok(Rendered {
                svg: render_panels(&panels, 2),
                summary: json(&summary),
            })
        }
        "paper-fig-4" => {
            let params = construction_n9();
            let report = construct_report(&params, &opts)?;
            let h = report.construction.harmonic()?;
            let omega = trace_lemniscate(&h.critical_fn()?)?;
            let mut fig = Figure::new("(n,m) = (9,7), a = 0, b = 1.1 - 0.1i");
            fig.layers.extend(omega_layers(&omega));
            fig.layers.extend(roots_layers(&report.roots));
            Ok(Rendered {
                svg: fig.render(),
                summary: json(&report),
            })
        }
        "paper-fig-5" => {
            let mut panels = Vec::new();
            let mut summary = Vec::new();
            for (label, theta) in [("0", 0.0), ("pi/6", PI / 6.0)] {
                let h = petals(theta);
                let run = caustic_run(&h, 2048)?;
                let [lem, caus] = caustic_figures(&run, &format!("theta = {label}"));
                if panels.is_empty() {
                    panels.push(lem);
                }
                panels.push(caus);
                summary.push(run.report);
            }
            Ok(Rendered {
                svg: render_panels(&panels, 3),
                summary: json(&summary),
            })
        }
        _ => Err(Error::InvalidInput(format!(
            "unknown preset {name}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Roots over the shaded `Omega` with the zeros of `f` as stars; with
/// `zoom`, a second panel around the component holding the most zeros of `h`.
pub fn roots_figures(h: &HarmonicPoly, rs: &RootSet, zoom: bool) -> Result<(Figure, Option<Figure>)> {
    let f = h.critical_fn()?;
    let omega = trace_lemniscate(&f)?;
    let stars: Vec<Complex64> = omega.components.iter().flat_map(|c| c.zeros.iter().copied()).collect();
    let build = |title: &str| {
        let mut fig = Figure::new(title);
        fig.layers.extend(omega_layers(&omega));
        fig.layers.extend(roots_layers(rs));
        fig.push(zeros_of_f_layer(&stars));
        fig
    };
    let full = build("roots (dots), zeros of f (stars), Omega (shaded)");
    let zoomed = if zoom { zoom_panel(&omega, rs).map(|w| {
        let mut fig = build("largest-count component");
        fig.window = Some(w);
        fig
    }) } else { None };
    Ok((full, zoomed))
}

fn zoom_panel(omega: &OmegaDecomposition, rs: &RootSet) -> Option<(Complex64, Complex64)> {
    let best = omega
        .components
        .iter()
        .max_by_key(|comp| rs.roots.iter().filter(|r| comp.contains(r.location)).count())?;
    let (center, r) = best.extent();
    let r = r * 1.2;
    Some((center - c(r, r), center + c(r, r)))
}

/// `Gamma_S = {Re S = 0}` (red), `Gamma_T = {Im T = 0}` (black), shaded
/// `Omega` and the roots.
pub fn construction_figure(params: &ConstructionParams, rs: &RootSet) -> Result<Figure> {
    let cons = solve_t(params)?;
    let fact = cons.factored()?;
    let h = cons.harmonic()?;
    let omega = trace_lemniscate(&h.critical_fn()?)?;
    let locs = rs.locations();
    let mut lo = locs.first().copied().unwrap_or(c(-1.0, -1.0));
    let mut hi = lo;
    for z in locs.iter().chain(omega.components.iter().flat_map(|c| c.samples.iter().map(|s| &s.z))) {
        lo = c(lo.re.min(z.re), lo.im.min(z.im));
        hi = c(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = 0.25 * (hi.re - lo.re).max(hi.im - lo.im).max(1.0);
    let (lo, hi) = (lo - c(pad, pad), hi + c(pad, pad));
    let gamma_t = zero_set_segments(|z| fact.t_jet(z).0.im, lo, hi, 300, 300);
    let gamma_s = zero_set_segments(|z| fact.s_jet(z).0.re, lo, hi, 300, 300);
    let mut fig = Figure::new(format!(
        "n = {}, m = {}, a = {}, b = {}: {} roots",
        params.n,
        params.m,
        fmt_c(params.a),
        fmt_c(params.b),
        rs.len()
    ));
    fig.window = Some((lo, hi));
    fig.layers.extend(omega_layers(&omega));
    fig.push(Layer {
        kind: LayerKind::GammaCurves,
        style: Style::line("#000000", 0.9),
        shapes: gamma_t,
    });
    fig.push(Layer {
        kind: LayerKind::GammaCurves,
        style: Style::line("#cc0000", 0.9),
        shapes: gamma_s,
    });
    fig.layers.extend(roots_layers(rs));
    Ok(fig)
}

fn fmt_c(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Lemniscate panel and caustic panel of a caustic run.
pub fn caustic_figures(run: &CausticRun, label: &str) -> [Figure; 2] {
    let stars: Vec<Complex64> = run.omega.components.iter().flat_map(|c| c.zeros.iter().copied()).collect();
    let mut lem = Figure::new("lemniscate");
    lem.layers.extend(omega_layers(&run.omega));
    lem.push(zeros_of_f_layer(&stars));
    let mut caus = Figure::new(format!("caustic, {label}"));
    caus.layers.extend(caustic_layers(&run.curves));
    [lem, caus]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_paper_preset_exists() {
        for n in 1..=5 {
            assert!(preset(&format!("paper-fig-{n}")).is_some());
        }
        assert!(preset("paper-fig-6").is_none());
    }

    #[test]
    fn petal_derivative() {
        let h = petals(0.0);
        let dp = h.p().derivative();
        assert_eq!(dp, CPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]));
        assert!((h.p().eval(c(1.0, 0.0)) - c(-0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn concave_quartic_matches_listed_coefficients() {
        let h = concave_quartic();
        let z = c(0.3, -0.2);
        let listed = c(0.0581623, 0.156514) * z.powu(4) + c(0.354765, -0.131835) * z.powu(3)
            - c(0.116325, 0.313028) * z * z
            - c(1.06429, -0.395504) * z
            + c(0.247627, 0.020994)
            - c(0.934124, 0.356949) * z.conj();
        assert!((h.eval(z) - listed).norm() < 1e-14);
    }
}
