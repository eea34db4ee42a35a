//! Versioned, serializable reports for every experiment. Reports contain
//! only data derived deterministically from their inputs, so serializing the
//! same configuration twice gives identical bytes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caustic::{
    arc_slopes, detect_cusps, winding_peak, winding_profile, CausticCurve, Cusp, TwoZeroCertificate, DENSE_STEP,
};
use crate::construct::{
    count_construction_roots, ConjectureTable, ConstructionParams, ConstructionResult,
};
use crate::cpoly::CPoly;
use crate::error::{Error, Result};
use crate::hroots::{find_all_zeros, HarmonicPoly, RootSet, SearchOptions};
use crate::lemniscate::{
    curvature_ratio, harmonic_parametrization, trace_lemniscate, OmegaDecomposition, PolylinePoint,
};
use crate::newton::{
    bernstein_check, is_generic, mixed_area_polygons, newton_polygon, predicted_vertices, realify,
    BernsteinReport, LatticePoint,
};

/// Bumped whenever a report layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub command: String,
    /// The full configuration the run was made from.
    pub config: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: serde_json::Value, result: T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            result,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only serializable data");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsReport {
    pub p: CPoly,
    pub q: CPoly,
    pub roots: RootSet,
    pub count: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub certified: bool,
    pub index_sum_ok: bool,
    /// Constant subtracted from `h` to restore regularity, if any.
    pub nudge: Option<Complex64>,
}

/// Roots of `h`; with `nudge_seed`, an uncertified run is retried up to three
/// times on `h - c` for a seeded random `c` of modulus `1e-6`.
pub fn roots_report(h: &HarmonicPoly, opts: &SearchOptions, nudge_seed: Option<u64>) -> Result<RootsReport> {
    let mut target = h.clone();
    let mut roots = find_all_zeros(&target, opts)?;
    let mut nudge = None;
    if let Some(seed) = nudge_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 {
            if roots.certified {
                break;
            }
            let c = Complex64::from_polar(1e-6, rng.gen_range(0.0..std::f64::consts::TAU));
            target = h.minus_constant(c);
            roots = find_all_zeros(&target, opts)?;
            nudge = Some(c);
        }
    }
    Ok(RootsReport {
        p: target.p().clone(),
        q: target.q().clone(),
        count: roots.len(),
        n_plus: roots.n_plus,
        n_minus: roots.n_minus,
        certified: roots.certified,
        index_sum_ok: roots.index_sum_holds(),
        roots,
        nudge,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructReport {
    pub construction: ConstructionResult,
    pub roots: RootSet,
    pub count: usize,
    pub guaranteed: usize,
    pub certified: bool,
    pub off_curve: usize,
}

pub fn construct_report(params: &ConstructionParams, opts: &SearchOptions) -> Result<ConstructReport> {
    let run = count_construction_roots(params, opts)?;
    Ok(ConstructReport {
        count: run.roots.len(),
        guaranteed: params.guaranteed_count(),
        certified: run.roots.certified,
        off_curve: run.off_curve,
        construction: run.construction,
        roots: run.roots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub table: ConjectureTable,
    pub eps: Complex64,
}

/// Caustic data of one lemniscate component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub id: usize,
    pub zero_count: usize,
    pub simply_connected: bool,
    pub critical_points: Vec<Complex64>,
    pub cusp_count: usize,
    pub cusps: Vec<Cusp>,
    pub psi_increment: f64,
    pub min_curvature_ratio: f64,
    /// Exactly one zero of `f` and `min curvature_ratio < -1/2`.
    pub two_zero_condition: bool,
    /// Parity and lower bound on the cusp count; `None` for components with holes.
    pub cusp_law: Option<bool>,
    pub max_winding: i64,
    /// Extreme slopes of `arg V` over the smooth caustic arcs.
    pub arc_slope_range: Option<(f64, f64)>,
    pub boundary: Vec<PolylinePoint>,
    pub caustic: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticReport {
    pub p: CPoly,
    pub q: CPoly,
    pub total_zero_count: usize,
    pub saddles: Vec<Complex64>,
    pub common_roots: Vec<Complex64>,
    pub components: Vec<ComponentReport>,
}

/// Everything computed for a caustic run; the report plus the raw curves
/// needed for drawing.
#[derive(Debug, Clone)]
pub struct CausticRun {
    pub report: CausticReport,
    pub omega: OmegaDecomposition,
    pub curves: Vec<CausticCurve>,
}

/// Every component's boundary is written with this many samples per turn of
/// `arg f` (the analysis itself uses `samples_per_turn`).
const REPORT_POLYLINE_PER_TURN: usize = 512;

pub fn caustic_run(h: &HarmonicPoly, samples_per_turn: usize) -> Result<CausticRun> {
    let f = h.critical_fn()?;
    let omega = trace_lemniscate(&f)?;
    let mut components = Vec::new();
    let mut curves = Vec::new();
    for (id, comp) in omega.components.iter().enumerate() {
        let hp = harmonic_parametrization(&f, comp, samples_per_turn)?;
        let curve = detect_cusps(h, &hp)?;
        let ratio = curvature_ratio(h, &hp)?;
        let min_ratio = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let fits = arc_slopes(&curve, 2);
        let slope_range = (!fits.is_empty()).then(|| {
            fits.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f.slope), hi.max(f.slope)))
        });
        let (_, extent) = hp.extent();
        let dense: Vec<Complex64> = hp
            .dense_boundary(&f, DENSE_STEP * extent)
            .into_iter()
            .map(|(z, _)| h.eval(z))
            .collect();
        let max_winding = winding_profile(&dense, 96)
            .max_abs()
            .max(winding_peak(&dense).map_or(0, |p| p.1.abs()));
        let stride = (samples_per_turn / REPORT_POLYLINE_PER_TURN).max(1);
        components.push(ComponentReport {
            id,
            zero_count: comp.zero_count,
            simply_connected: comp.is_simply_connected(),
            critical_points: comp.critical_points.clone(),
            cusp_count: curve.cusp_count(),
            cusps: curve.cusps.clone(),
            psi_increment: curve.psi_increment(),
            min_curvature_ratio: min_ratio,
            two_zero_condition: comp.zero_count == 1 && min_ratio < -0.5,
            cusp_law: curve.cusp_law_holds(),
            max_winding,
            arc_slope_range: slope_range,
            boundary: hp.polyline().into_iter().step_by(stride).collect(),
            caustic: curve.image_samples.iter().copied().step_by(stride).collect(),
        });
        curves.push(curve);
    }
    Ok(CausticRun {
        report: CausticReport {
            p: h.p().clone(),
            q: h.q().clone(),
            total_zero_count: omega.total_zero_count,
            saddles: omega.saddles.clone(),
            common_roots: omega.common_roots.clone(),
            components,
        },
        omega,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub n: usize,
    pub a_vertices: Vec<LatticePoint>,
    pub b_vertices: Vec<LatticePoint>,
    pub predicted_a: Vec<LatticePoint>,
    pub predicted_b: Vec<LatticePoint>,
    pub matches_prediction: bool,
    pub generic: bool,
    pub mixed_area: f64,
    /// Present when the roots were computed (real coefficients only).
    pub bernstein: Option<BernsteinReport>,
}

/// Newton polygons of `realify(h)`; with `roots`, also the off-axes check.
pub fn newton_report(h: &HarmonicPoly, roots: Option<&RootSet>) -> Result<NewtonReport> {
    let (a, b) = realify(h);
    let pa = newton_polygon(&a)?;
    let pb = newton_polygon(&b)?;
    let (predicted_a, predicted_b) = predicted_vertices(h.n());
    let a_vertices = pa.vertex_set();
    let b_vertices = pb.vertex_set();
    let bernstein = roots.map(|rs| bernstein_check(h, rs)).transpose()?;
    Ok(NewtonReport {
        n: h.n(),
        matches_prediction: a_vertices == predicted_a && b_vertices == predicted_b,
        a_vertices,
        b_vertices,
        predicted_a,
        predicted_b,
        generic: is_generic(h),
        mixed_area: mixed_area_polygons(&pa, &pb),
        bernstein,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoZeroReport {
    pub component_id: usize,
    pub found: bool,
    pub certificate: Option<TwoZeroCertificate>,
    /// Why no certificate was produced.
    pub diagnostic: Option<String>,
}

impl TwoZeroReport {
    pub fn from_result(component_id: usize, r: Result<TwoZeroCertificate>) -> Result<Self> {
        match r {
            Ok(cert) => Ok(TwoZeroReport {
                component_id,
                found: true,
                certificate: Some(cert),
                diagnostic: None,
            }),
            Err(e @ (Error::NotFound(_) | Error::AssumptionFailed(_))) => Ok(TwoZeroReport {
                component_id,
                found: false,
                certificate: None,
                diagnostic: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_carries_schema_version() {
        let r = Report::new("noop", serde_json::json!({"x": 1}), 5_u32);
        let s = r.to_json();
        assert!(s.contains("\"schema_version\": 1"));
        assert!(s.ends_with('\n'));
        let back: Report<u32> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn single_root_report() {
        let h = HarmonicPoly::new(CPoly::from_real(&[0.0, 1.0]), CPoly::zero()).unwrap();
        let r = roots_report(&h, &SearchOptions::default(), None).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.certified && r.index_sum_ok);
    }

    #[test]
    fn newton_report_for_real_quadratic() {
        let h = HarmonicPoly::new(CPoly::from_real(&[0.3, -0.7, 1.0]), CPoly::from_real(&[0.0, 0.4])).unwrap();
        let r = newton_report(&h, None).unwrap();
        assert_eq!(r.mixed_area, 2.0);
        assert!(r.matches_prediction);
    }
}
