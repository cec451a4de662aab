use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;

use pogorelov_core::assembly::{build_layout, grid_dump, MetricField, DEFAULT_DOMAIN};
use pogorelov_core::curvature::{
    closed_form_k, curvature_csv, curvature_sign_changes, curvature_table, expansion_fit, gauss_curvature,
    lower_bound_window, taylor_coefficients, ExpansionFit,
};

use pogorelov_core::embedding::{
    build_mesh, default_rho_max, induced_metric_residual, integrate_profile_with, jump_analysis, mean_curvature_scan,
    JumpReport, ResidualGrid, ResidualReport, SampleSpec,
};
use pogorelov_core::format::{csv_table, fmt17, num, pairs, to_json};
use pogorelov_core::lemma_lab::affine::{affine_segment_detect, DiscMap};
use pogorelov_core::lemma_lab::convex::{default_height, run_suite, SuiteReport};
use pogorelov_core::lemma_lab::ruling::{sample_ruling, CurvatureMode, RulingFit};
use pogorelov_core::lemma_lab::{ruling_curvature_fit, sagitta, RuledFamily};
use pogorelov_core::profile::{embeddable_window, smoothness_report, Interval, SmoothnessReport};
use pogorelov_core::regularity::{estimate_report, summarize};
use pogorelov_core::verify::{run_verify, Resolution};
use pogorelov_core::{make_pogorelov_profile, Error, RadialProfile};

use crate::manifest::{manifest_path, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "pogorelov",
    version,
    about = "Radial C^{2,1} metric with only a C^{1,1} isometric embedding: construction and checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Profile f and its derivatives; JSON adds the embeddable window and branch-point smoothness.
    Profile(Common),
    /// Gauss curvature on the bump annulus by three routes.
    Curvature {
        #[command(flatten)]
        common: Common,
        /// Print the largest relative discrepancy between -f''/f and the closed form and exit.
        #[arg(long)]
        check_closed_form: bool,
    },
    /// Surface-of-revolution embedding: OBJ mesh, generating-curve CSV or JSON diagnostics.
    Embed(Common),
    /// Accumulating metric: grid dump CSV or layout JSON.
    Assemble(Common),
    /// Norm estimates per disc with decay fits and tail sums.
    Regularity(Common),
    /// Lemma harnesses: convex bound suite, ruling law, sagitta, affine chords.
    Lemmas {
        #[command(flatten)]
        common: Common,
        /// Fewer seeds and cases.
        #[arg(long)]
        quick: bool,
    },
    /// Full acceptance suite; exit 0 only if every check passes.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Reduced resolution, same tolerances.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Obj,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Obj => "obj",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Bump radius a.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Outer radius of the embedded part [default: 0.749·a].
    #[arg(long, allow_hyphen_values = true)]
    pub rho_max: Option<f64>,
    /// Angular resolution of meshes.
    #[arg(long, default_value_t = 128)]
    pub n_theta: usize,
    /// Resolution: table rows (profile, curvature: 1000), window cells (embed: 96),
    /// x-samples (assemble: 261), radial cells (regularity: 64).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-12, allow_hyphen_values = true)]
    pub tol: f64,
    /// Number of discs.
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    /// First random seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output format [default: csv; obj for embed; json for lemmas; text for verify].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file [default: stdout]. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Check(e.to_string())
        }
    }
}

/// Rendered output plus the verdict of any checks it contains.
struct Output {
    bytes: String,
    failure: Option<String>,
}

impl Output {
    fn ok(bytes: String) -> Self {
        Self { bytes, failure: None }
    }
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Profile(c) => ("profile", c),
            Command::Curvature { common, .. } => ("curvature", common),
            Command::Embed(c) => ("embed", c),
            Command::Assemble(c) => ("assemble", c),
            Command::Regularity(c) => ("regularity", c),
            Command::Lemmas { common, .. } => ("lemmas", common),
            Command::Verify { common, .. } => ("verify", common),
        }
    }
}

fn resolved(cmd: &Command, format: &str, grid: Option<usize>) -> BTreeMap<String, String> {
    let (_, c) = cmd.parts();
    let mut p = BTreeMap::new();
    p.insert("a".into(), fmt17(c.a));
    p.insert(
        "rho_max".into(),
        fmt17(c.rho_max.unwrap_or_else(|| default_rho_max(c.a))),
    );
    p.insert("n_theta".into(), c.n_theta.to_string());
    p.insert("grid".into(), grid.map_or_else(|| "unused".into(), |g| g.to_string()));
    p.insert("tol".into(), fmt17(c.tol));
    p.insert("n_max".into(), c.n_max.to_string());
    p.insert("seed".into(), c.seed.to_string());
    p.insert("format".into(), format.into());
    p.insert(
        "out".into(),
        c.out.as_ref().map_or_else(|| "-".into(), |o| o.display().to_string()),
    );
    match cmd {
        Command::Curvature { check_closed_form, .. } => {
            p.insert("check_closed_form".into(), check_closed_form.to_string());
        }
        Command::Lemmas { quick, .. } | Command::Verify { quick, .. } => {
            p.insert("quick".into(), quick.to_string());
        }
        _ => {}
    }
    p
}

fn unsupported(sub: &str, f: Format) -> Failure {
    Failure::Usage(format!("format {} is not available for {sub}", f.name()))
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let cmd = &cli.command;
    let (sub, common) = cmd.parts();
    if common.tol.is_nan() || common.tol <= 0.0 {
        return Err(Failure::Usage(format!("--tol {} must be positive", common.tol)));
    }
    let default_grid = match cmd {
        Command::Profile(_) | Command::Curvature { .. } => Some(1000),
        Command::Embed(_) => Some(SampleSpec::default().n_window),
        Command::Assemble(_) => Some(261),
        Command::Regularity(_) => Some(64),
        Command::Lemmas { .. } | Command::Verify { .. } => None,
    };
    let grid = common.grid.or(default_grid);
    let format_name = match (common.format, cmd) {
        (Some(f), _) => f.name(),
        (None, Command::Embed(_)) => "obj",
        (None, Command::Lemmas { .. }) => "json",
        (None, Command::Verify { .. }) => "text",
        (
            None,
            Command::Curvature {
                check_closed_form: true,
                ..
            },
        ) => "text",
        (None, _) => "csv",
    };
    let out = match cmd {
        Command::Profile(c) => profile(c, grid.unwrap_or(1000))?,
        Command::Curvature {
            common,
            check_closed_form,
        } => curvature(common, grid.unwrap_or(1000), *check_closed_form)?,
        Command::Embed(c) => embed(c, grid.unwrap_or(96))?,
        Command::Assemble(c) => assemble(c, grid.unwrap_or(261))?,
        Command::Regularity(c) => regularity(c, grid.unwrap_or(64))?,
        Command::Lemmas { common, quick } => lemmas(common, *quick)?,
        Command::Verify { common, quick } => verify(common, *quick)?,
    };

    match &common.out {
        Some(path) => {
            write(path, out.bytes.as_bytes())?;
            let mut manifest = RunManifest::new(sub, resolved(cmd, format_name, grid), common.seed);
            manifest.add_output(path, out.bytes.as_bytes());
            write(&manifest_path(path), to_json(&manifest).as_bytes())?;
        }
        None => print!("{}", out.bytes),
    }
    match out.failure {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn write(path: &std::path::Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn profile(c: &Common, grid: usize) -> Result<Output, Failure> {
    let p = make_pogorelov_profile(c.a)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            if grid < 2 {
                return Err(Failure::Usage("--grid must be at least 2".into()));
            }
            let rows = (0..grid).map(|i| {
                let rho = c.a * i as f64 / grid as f64;
                let mut row = vec![rho];
                row.extend((0..4).map(|k| p.eval_raw(rho, k)));
                row
            });
            Ok(Output::ok(csv_table(&["rho", "f", "df", "d2f", "d3f"], rows)))
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                profile: RadialProfile,
                #[serde(serialize_with = "num")]
                branch_point: f64,
                #[serde(serialize_with = "num")]
                radicand_root: f64,
                embeddable_window: Vec<Interval>,
                branch_smoothness: SmoothnessReport,
            }
            let b = 0.5 * c.a;
            Ok(Output::ok(to_json(&Summary {
                profile: p,
                branch_point: b,
                radicand_root: 0.75 * c.a,
                embeddable_window: embeddable_window(&p, grid.max(100))?,
                branch_smoothness: smoothness_report(&p, b, 1e-6 * c.a)?,
            })))
        }
        f => Err(unsupported("profile", f)),
    }
}

fn curvature(c: &Common, grid: usize, check: bool) -> Result<Output, Failure> {
    let p = make_pogorelov_profile(c.a)?;
    if check {
        let mut worst = 0.0f64;
        for i in 0..grid {
            let r = c.a * (0.5 + 0.5 * (i as f64 + 0.5) / grid as f64);
            let k = gauss_curvature(&p, r)?;
            worst = worst.max((k - closed_form_k(c.a, r)?).abs() / k.abs());
        }
        let bytes = format!(
            "max relative discrepancy: {} over {grid} points (limit 1e-9)\n",
            fmt17(worst)
        );
        let failure = (worst > 1e-9).then(|| "closed form disagrees with -f''/f".to_string());
        return Ok(Output { bytes, failure });
    }
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Output::ok(curvature_csv(&curvature_table(&p, grid)?))),
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                #[serde(serialize_with = "num")]
                a: f64,
                expansion_fit: ExpansionFit,
                #[serde(serialize_with = "pogorelov_core::format::nums")]
                taylor_coefficients: [f64; 4],
                #[serde(serialize_with = "pogorelov_core::format::nums")]
                sign_changes: [f64; 2],
                #[serde(serialize_with = "num")]
                lower_bound_window_3_4: f64,
            }
            Ok(Output::ok(to_json(&Summary {
                a: c.a,
                expansion_fit: expansion_fit(&p, 1e-3 * c.a)?,
                taylor_coefficients: taylor_coefficients(c.a),
                sign_changes: curvature_sign_changes(c.a),
                lower_bound_window_3_4: lower_bound_window(&p, 0.75)?,
            })))
        }
        f => Err(unsupported("curvature", f)),
    }
}

fn embed(c: &Common, grid: usize) -> Result<Output, Failure> {
    let p = make_pogorelov_profile(c.a)?;
    let rho_max = c.rho_max.unwrap_or_else(|| default_rho_max(c.a));
    let spec = SampleSpec {
        n_window: grid,
        ..SampleSpec::default()
    };
    let curve = integrate_profile_with(&p, rho_max, c.tol, &spec)?;
    match c.format.unwrap_or(Format::Obj) {
        Format::Obj => Ok(Output::ok(build_mesh(&curve, c.n_theta)?.to_obj())),
        Format::Csv => Ok(Output::ok(curve.to_csv())),
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                #[serde(serialize_with = "num")]
                a: f64,
                #[serde(serialize_with = "num")]
                rho_max: f64,
                #[serde(serialize_with = "num")]
                z_at_rho_max: f64,
                #[serde(serialize_with = "num")]
                quadrature_error_estimate: f64,
                jump: JumpReport,
                isometry_residual: ResidualReport,
                mean_curvature_sign: i8,
                #[serde(serialize_with = "pairs")]
                mean_curvature_sign_changes: Vec<(f64, f64)>,
                #[serde(serialize_with = "pogorelov_core::format::nums")]
                one_sided_radii: Vec<f64>,
            }
            let mesh = build_mesh(&curve, c.n_theta)?;
            let h = mean_curvature_scan(&mesh);
            Ok(Output::ok(to_json(&Summary {
                a: c.a,
                rho_max,
                z_at_rho_max: curve.z_at_max(),
                quadrature_error_estimate: curve.error_estimate,
                jump: jump_analysis(&curve)?,
                isometry_residual: induced_metric_residual(&p, &curve, &ResidualGrid::new(0.0, rho_max, 200, 64))?,
                mean_curvature_sign: h.sign,
                mean_curvature_sign_changes: h.sign_changes,
                one_sided_radii: h.flagged,
            })))
        }
    }
}

fn assemble(c: &Common, grid: usize) -> Result<Output, Failure> {
    let layout = build_layout(c.n_max)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            if grid < 2 {
                return Err(Failure::Usage("--grid must be at least 2".into()));
            }
            let [x0, x1, y0, y1] = DEFAULT_DOMAIN;
            let ny = ((grid as f64) * (y1 - y0) / (x1 - x0)).ceil().max(2.0) as usize;
            let field = MetricField::new(layout)?;
            Ok(Output::ok(grid_dump(&field, DEFAULT_DOMAIN, grid, ny)))
        }
        Format::Json => Ok(Output::ok(layout.to_json())),
        f => Err(unsupported("assemble", f)),
    }
}

fn regularity(c: &Common, grid: usize) -> Result<Output, Failure> {
    let report = estimate_report(&MetricField::new(build_layout(c.n_max)?)?, grid)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Output::ok(report.to_csv())),
        Format::Json => Ok(Output::ok(to_json(&summarize(&report, grid)))),
        f => Err(unsupported("regularity", f)),
    }
}

#[derive(Serialize)]
struct SuiteWithArchives {
    label: &'static str,
    #[serde(flatten)]
    report: SuiteReport,
    failures: Vec<Box<RawValue>>,
}

#[derive(Serialize)]
struct RulingEntry {
    family: RuledFamily,
    fit: RulingFit,
    #[serde(serialize_with = "num")]
    max_abs_gauss: f64,
}

#[derive(Serialize)]
struct AffineEntry {
    surface: &'static str,
    chords_checked: usize,
    qualifying: usize,
    expected: usize,
}

#[derive(Serialize)]
struct LemmaReport {
    convex: Vec<SuiteWithArchives>,
    ruling: Vec<RulingEntry>,
    #[serde(serialize_with = "num")]
    sagitta_1_0p1: f64,
    sagitta_bound_holds_to_0p3a: bool,
    affine: Vec<AffineEntry>,
}

fn lemmas(c: &Common, quick: bool) -> Result<Output, Failure> {
    if let Some(f) = c.format.filter(|f| *f != Format::Json) {
        return Err(unsupported("lemmas", f));
    }
    let (n_seeds, count) = if quick { (3, 20) } else { (10, 100) };
    let seeds: Vec<u64> = (c.seed..c.seed + n_seeds).collect();
    let half_chord = 0.3 * c.a;
    let mut problems = Vec::new();
    let mut convex = Vec::new();
    for (label, b) in [("b=3c^2/a", default_height(c.a, half_chord)), ("b=c", half_chord)] {
        let report = run_suite(&seeds, count, half_chord, b)?;
        if report.passed != report.cases {
            problems.push(format!(
                "convex bound failed in {} of {} cases ({label})",
                report.cases - report.passed,
                report.cases
            ));
        }
        let failures = report
            .failures
            .iter()
            .map(|s| RawValue::from_string(s.trim_end().to_string()).expect("archive is valid JSON"))
            .collect();
        convex.push(SuiteWithArchives {
            label,
            report,
            failures,
        });
    }
    let mut ruling = Vec::new();
    for family in [
        RuledFamily::Cone { alpha: 0.4 },
        RuledFamily::Cylinder { radius: 1.5 },
        RuledFamily::HelixTangent {
            radius: 1.0,
            pitch: 0.3,
        },
    ] {
        let s = sample_ruling(family, 0.7, 0.5, 2.5, 1000, CurvatureMode::Analytic)?;
        let fit = ruling_curvature_fit(&s)?;
        if fit.max_residual > 1e-6 {
            problems.push(format!(
                "ruling fit residual {} for {family:?}",
                fmt17(fit.max_residual)
            ));
        }
        ruling.push(RulingEntry {
            family,
            fit,
            max_abs_gauss: s.max_abs_gauss,
        });
    }
    let sag = sagitta(1.0, 0.1)?.value;
    let mut bound = true;
    for i in 1..=100 {
        bound &= sagitta(1.0, 0.3 * i as f64 / 100.0)?.upper_ok;
    }
    if !bound {
        problems.push("sagitta bound violated".into());
    }
    let n = 48;
    let all = n * (n - 1) / 2;
    let surfaces: [(&str, DiscMap, usize); 3] = [
        ("plane", DiscMap::new(0.5, |[u, v]| [u, v, 0.0]), all),
        (
            "unit sphere cap",
            DiscMap::new(0.5, |[u, v]| [u, v, (1.0 - u * u - v * v).sqrt()]),
            0,
        ),
        (
            "unit cylinder",
            DiscMap::new(0.5, |[u, v]| [u.sin(), v, u.cos()]),
            n / 2 - 1,
        ),
    ];
    let mut affine = Vec::new();
    for (surface, map, expected) in surfaces {
        let qualifying = affine_segment_detect(&map, n, 16, 1e-6).len();
        if qualifying != expected {
            problems.push(format!("affine chords on {surface}: {qualifying}, expected {expected}"));
        }
        affine.push(AffineEntry {
            surface,
            chords_checked: all,
            qualifying,
            expected,
        });
    }
    let bytes = to_json(&LemmaReport {
        convex,
        ruling,
        sagitta_1_0p1: sag,
        sagitta_bound_holds_to_0p3a: bound,
        affine,
    });
    Ok(Output {
        bytes,
        failure: (!problems.is_empty()).then(|| problems.join("\n")),
    })
}

fn verify(c: &Common, quick: bool) -> Result<Output, Failure> {
    let report = run_verify(if quick { Resolution::Quick } else { Resolution::Full });
    let bytes = match c.format {
        None => report.to_text(),
        Some(Format::Json) => report.to_json(),
        Some(f) => return Err(unsupported("verify", f)),
    };
    let failure = (!report.all_passed()).then(|| {
        let mut table = format!(
            "verification failed: {}/{} checks passed\n",
            report.passed, report.total
        );
        for ch in &report.checks {
            table.push_str(&format!(
                "{:02} {} {}\n",
                ch.id,
                if ch.pass { "PASS" } else { "FAIL" },
                ch.name
            ));
        }
        table
    });
    Ok(Output { bytes, failure })
}
