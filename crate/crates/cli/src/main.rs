//! `hzlab`: command-line front end for the harmonic-zeros laboratory.
//!
//! Every run is described by one JSON configuration (`--config`), with
//! command-line flags overriding its fields. Each command writes
//! `<command>.json` (and `<command>.svg` with `--svg`) into `--out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hzeros::caustic::{two_zero_search, TwoZeroOptions};
use hzeros::construct::{conjecture_scan, default_eps, ConstructionParams};
use hzeros::presets::{
    caustic_figures, concave_quartic, construction_figure, construction_n4, construction_n5, construction_n9,
    petals, render_preset, roots_figures,
};
use hzeros::report::{
    caustic_run, construct_report, newton_report, roots_report, ExperimentReport, Report, RootsReport,
    TwoZeroReport,
};
use hzeros::svg::{newton_polygon_layer, render_panels, Figure};
use hzeros::{CPoly, Error, HarmonicPoly, SearchOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const EXIT_UNCERTIFIED: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hzlab", version, about = "Zeros, lemniscates and caustics of harmonic polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write an SVG figure.
    #[arg(long, global = true)]
    svg: bool,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Exit 0 even when the root set is not certified.
    #[arg(long, global = true)]
    allow_uncertified: bool,

    /// Retry uncertified root searches on h - c for a tiny random c.
    #[arg(long, global = true)]
    nudge: bool,

    #[arg(long, global = true)]
    phi_steps: Option<usize>,

    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Find and certify all zeros of h.
    Roots,
    /// Build the S/T construction and count its zeros.
    Construct,
    /// Sweep the m = n - 2 construction and report the excess over m^2 + m + n.
    Experiment,
    /// Trace the critical lemniscate and analyse the caustics.
    Caustic,
    /// Newton polygons, mixed area and the off-axes root bound.
    Newton,
    /// Search for a rotation and shift giving two zeros in one component.
    TwoZeroSearch,
    /// Render a named figure preset (paper-fig-1 ... paper-fig-5).
    Render,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Roots => "roots",
            Command::Construct => "construct",
            Command::Experiment => "experiment",
            Command::Caustic => "caustic",
            Command::Newton => "newton",
            Command::TwoZeroSearch => "two-zero-search",
            Command::Render => "render",
        }
    }
}

/// Everything a run depends on. Coefficients are `[re, im]` pairs in
/// ascending powers.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    preset: Option<String>,
    p: Option<Vec<Complex64>>,
    q: Option<Vec<Complex64>>,
    /// Rotation angle for the `paper-fig-5` polynomial.
    theta: Option<f64>,
    construction: Option<ConstructionParams>,
    n_max: Option<usize>,
    eps: Option<Complex64>,
    component: Option<usize>,
    phi_steps: Option<usize>,
    grid: Option<usize>,
    samples_per_turn: Option<usize>,
    seed: Option<u64>,
    allow_uncertified: bool,
    nudge: bool,
    svg: bool,
    /// Not part of the report: runs into different directories are the same run.
    #[serde(skip_serializing)]
    out: Option<PathBuf>,
    search: Option<SearchOptions>,
}

impl RunConfig {
    fn load(cli: &Cli) -> Result<Self, Failure> {
        let mut cfg: RunConfig = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::input(format!("bad config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        if cli.seed.is_some() {
            cfg.seed = cli.seed;
        }
        if cli.phi_steps.is_some() {
            cfg.phi_steps = cli.phi_steps;
        }
        if cli.grid.is_some() {
            cfg.grid = cli.grid;
        }
        cfg.svg |= cli.svg;
        cfg.allow_uncertified |= cli.allow_uncertified;
        cfg.nudge |= cli.nudge;
        Ok(cfg)
    }

    fn search(&self) -> SearchOptions {
        self.search.clone().unwrap_or_default()
    }

    fn construction_params(&self) -> Result<Option<ConstructionParams>, Failure> {
        if let Some(p) = self.construction {
            return ConstructionParams::new(p.n, p.m, p.a, p.b).map(Some).map_err(Failure::from);
        }
        Ok(match self.preset.as_deref() {
            Some("paper-fig-3" | "paper-fig-3-left") => Some(construction_n4()),
            Some("paper-fig-3-right") => Some(construction_n5()),
            Some("paper-fig-4") => Some(construction_n9()),
            _ => None,
        })
    }

    fn harmonic(&self) -> Result<HarmonicPoly, Failure> {
        if let Some(p) = &self.p {
            let q = self.q.clone().unwrap_or_default();
            return Ok(HarmonicPoly::new(CPoly::new(p.clone()), CPoly::new(q))?);
        }
        match self.preset.as_deref() {
            Some("paper-fig-1") => Ok(concave_quartic()),
            Some("paper-fig-5") => Ok(petals(self.theta.unwrap_or(0.0))),
            _ => match self.construction_params()? {
                Some(params) => Ok(hzeros::construct::solve_t(&params)?.harmonic()?),
                None => Err(Failure::input("config needs `p` (and `q`), a `construction` or a polynomial preset")),
            },
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DEGENERATE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularZeroDetected { .. } => EXIT_UNCERTIFIED,
            Error::NotRegular(_)
            | Error::EmptySupport
            | Error::NotRealCoefficients { .. }
            | Error::SingularSystem { .. }
            | Error::NotOnLemniscate { .. }
            | Error::NotCritical { .. }
            | Error::AssumptionFailed(_)
            | Error::InvalidInput(_) => EXIT_DEGENERATE,
            Error::NonConvergence { .. }
            | Error::CurveThroughZero { .. }
            | Error::TraceStall { .. }
            | Error::SaddleUnresolved { .. }
            | Error::CriticalPoint { .. }
            | Error::BranchJump { .. }
            | Error::NotFound(_) => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: the JSON body, an optional figure and whether
/// its root counts are certified.
struct Output {
    json: String,
    svg: Option<String>,
    certified: bool,
}

fn write_outputs(dir: &Path, stem: &str, out: &Output) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, &out.json).map_err(|e| Failure::input(format!("cannot write {}: {e}", json_path.display())))?;
    println!("{}", json_path.display());
    if let Some(svg) = &out.svg {
        let svg_path = dir.join(format!("{stem}.svg"));
        fs::write(&svg_path, svg).map_err(|e| Failure::input(format!("cannot write {}: {e}", svg_path.display())))?;
        println!("{}", svg_path.display());
    }
    Ok(())
}

fn config_value(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config is serializable")
}

fn cmd_roots(cfg: &RunConfig) -> Result<Output, Failure> {
    let opts = cfg.search();
    let (report, fig) = match (cfg.p.is_none(), cfg.construction_params()?) {
        (true, Some(params)) => {
            let run = construct_report(&params, &opts)?;
            let fig = cfg.svg.then(|| construction_figure(&params, &run.roots)).transpose()?;
            let roots = run.roots;
            let report = RootsReport {
                p: run.construction.p.clone(),
                q: run.construction.q.clone(),
                count: roots.len(),
                n_plus: roots.n_plus,
                n_minus: roots.n_minus,
                certified: roots.certified,
                index_sum_ok: roots.index_sum_holds(),
                roots,
                nudge: None,
            };
            (report, fig)
        }
        _ => {
            let h = cfg.harmonic()?;
            let seed = cfg.nudge.then(|| cfg.seed.unwrap_or(0));
            let report = roots_report(&h, &opts, seed)?;
            let fig = if cfg.svg {
                let target = HarmonicPoly::new(report.p.clone(), report.q.clone())?;
                Some(roots_figures(&target, &report.roots, false)?.0)
            } else {
                None
            };
            (report, fig)
        }
    };
    let certified = report.certified;
    Ok(Output {
        json: Report::new("roots", config_value(cfg), report).to_json(),
        svg: fig.map(|f| f.render()),
        certified,
    })
}

fn cmd_construct(cfg: &RunConfig) -> Result<Output, Failure> {
    let params = cfg
        .construction_params()?
        .ok_or_else(|| Failure::input("config needs `construction` {n, m, a, b} or a construction preset"))?;
    let report = construct_report(&params, &cfg.search())?;
    let svg = if cfg.svg {
        Some(construction_figure(&params, &report.roots)?.render())
    } else {
        None
    };
    let certified = report.certified;
    Ok(Output {
        json: Report::new("construct", config_value(cfg), report).to_json(),
        svg,
        certified,
    })
}

fn cmd_experiment(cfg: &RunConfig) -> Result<Output, Failure> {
    let n_max = cfg.n_max.unwrap_or(9);
    let eps = cfg.eps.unwrap_or_else(default_eps);
    let table = conjecture_scan(n_max, eps, &cfg.search())?;
    let certified = table.inconclusive.is_empty();
    for n in &table.inconclusive {
        eprintln!("n = {n}: INCONCLUSIVE (root set not certified)");
    }
    Ok(Output {
        json: Report::new("experiment", config_value(cfg), ExperimentReport { table, eps }).to_json(),
        svg: None,
        certified,
    })
}

fn cmd_caustic(cfg: &RunConfig) -> Result<Output, Failure> {
    let h = cfg.harmonic()?;
    let run = caustic_run(&h, cfg.samples_per_turn.unwrap_or(2048))?;
    let svg = cfg.svg.then(|| render_panels(&caustic_figures(&run, "h(boundary of Omega)"), 2));
    Ok(Output {
        json: Report::new("caustic", config_value(cfg), run.report).to_json(),
        svg,
        certified: true,
    })
}

fn cmd_newton(cfg: &RunConfig) -> Result<Output, Failure> {
    let h = cfg.harmonic()?;
    let real = h.p().is_real(1e-12) && h.q().is_real(1e-12);
    let roots = if real {
        Some(hzeros::find_all_zeros(&h, &cfg.search())?)
    } else {
        None
    };
    let report = newton_report(&h, roots.as_ref())?;
    let svg = if cfg.svg {
        let (a, b) = hzeros::newton::realify(&h);
        let pa = hzeros::newton::newton_polygon(&a)?;
        let pb = hzeros::newton::newton_polygon(&b)?;
        Some(render_panels(
            &[
                Figure::new("A").with_layer(newton_polygon_layer(&pa, "#1f4e9c")),
                Figure::new("B").with_layer(newton_polygon_layer(&pb, "#b22222")),
            ],
            2,
        ))
    } else {
        None
    };
    let certified = roots.as_ref().is_none_or(|r| r.certified);
    Ok(Output {
        json: Report::new("newton", config_value(cfg), report).to_json(),
        svg,
        certified,
    })
}

fn cmd_two_zero(cfg: &RunConfig) -> Result<Output, Failure> {
    let h = cfg.harmonic()?;
    let defaults = TwoZeroOptions::default();
    let opts = TwoZeroOptions {
        phi_steps: cfg.phi_steps.unwrap_or(defaults.phi_steps),
        grid: cfg.grid.unwrap_or(defaults.grid),
        samples_per_turn: cfg.samples_per_turn.unwrap_or(defaults.samples_per_turn),
        require_precondition: true,
    };
    let ids: Vec<usize> = match cfg.component {
        Some(id) => vec![id],
        None => {
            let omega = hzeros::lemniscate::trace_lemniscate(&h.critical_fn()?)?;
            (0..omega.components.len()).collect()
        }
    };
    let reports = ids
        .into_iter()
        .map(|id| TwoZeroReport::from_result(id, two_zero_search(&h, id, &opts)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output {
        json: Report::new("two-zero-search", config_value(cfg), reports).to_json(),
        svg: None,
        certified: true,
    })
}

fn cmd_render(cfg: &RunConfig) -> Result<(String, Output), Failure> {
    let name = cfg
        .preset
        .clone()
        .ok_or_else(|| Failure::input("render needs `preset` (paper-fig-1 ... paper-fig-5)"))?;
    let rendered = render_preset(&name, cfg.seed.unwrap_or(0))?;
    Ok((
        name,
        Output {
            json: Report::new("render", config_value(cfg), rendered.summary).to_json(),
            svg: Some(rendered.svg),
            certified: true,
        },
    ))
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let cfg = RunConfig::load(cli)?;
    let (stem, out) = match cli.command {
        Command::Roots => ("roots".to_string(), cmd_roots(&cfg)?),
        Command::Construct => ("construct".to_string(), cmd_construct(&cfg)?),
        Command::Experiment => ("experiment".to_string(), cmd_experiment(&cfg)?),
        Command::Caustic => ("caustic".to_string(), cmd_caustic(&cfg)?),
        Command::Newton => ("newton".to_string(), cmd_newton(&cfg)?),
        Command::TwoZeroSearch => (cli.command.name().to_string(), cmd_two_zero(&cfg)?),
        Command::Render => cmd_render(&cfg)?,
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_outputs(&dir, &stem, &out)?;
    if !out.certified && !cfg.allow_uncertified {
        eprintln!("result is not certified (use --allow-uncertified to accept it)");
        return Ok(EXIT_UNCERTIFIED);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("hzlab {}: {}", cli.command.name(), f.message);
            ExitCode::from(f.code)
        }
    }
}
