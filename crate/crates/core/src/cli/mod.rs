//! The `translator-lab` command line.
//!
//! Every command writes `report.json` (plus field files where there is a
//! field) into `--out`. Flags may also come from a `key=value` file given
//! with `--config`; flags on the command line win. Exit codes: 0 success,
//! 1 configuration error, 2 solver or audit failure. Failures write
//! `error.json` next to the report.

pub mod export;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::closed_forms::{BowlProfile, ClosedFormSurface};
use crate::delta_wing::{self, WingOptions};
use crate::error::{Error, Result};
use crate::geometry::apex_spectrum;
use crate::grid::ScalarField;
use crate::pde::{Discretization, SolveReport};
use crate::simplex_map;
use crate::suite::{self, SolveOptions};
use export::{field_to_obj, ApexRecord, AuditEntry, NodeTable, RunReport};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "TRANSLATOR_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "translator-lab",
    version,
    about = "Translating solitons of mean curvature flow"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// `key=value` file supplying flags not given on the command line.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Record wall time in the report (makes reports non-reproducible).
    #[arg(long, global = true)]
    #[serde(skip)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a closed-form translator.
    ClosedForm(ClosedFormArgs),
    /// Integrate the bowl profile.
    Bowl(BowlArgs),
    /// Solve on the rectangle [-L, L] x [-b, b].
    SolveRect(RectArgs),
    /// Solve on the ellipsoid sum a_i x_i^2 < R^2.
    SolveEllipsoid(EllipsoidArgs),
    /// Solve on ellipsoid x [-b, b].
    SolveSlab(SlabArgs),
    /// Construct a Δ-wing from rectangle solves.
    DeltaWing(WingArgs),
    /// Evaluate the coefficient-to-curvature map.
    Fmap(FmapArgs),
    /// Find coefficients with prescribed apex curvatures.
    InvertFmap(InvertArgs),
    /// Solve and audit a rectangle, ellipsoid or slab problem.
    Audit(AuditArgs),
    /// Re-export a node CSV as CSV or OBJ.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    GrimReaper,
    Tilted,
    Arc,
    Plane,
    Bowl,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct ClosedFormArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Tilt angle (tilted).
    #[arg(long)]
    theta: Option<f64>,
    /// Half-width (arc).
    #[arg(long)]
    b: Option<f64>,
    /// Dimension (bowl).
    #[arg(long)]
    n: Option<usize>,
    /// Height (plane).
    #[arg(long, default_value_t = 0.0)]
    height: f64,
    /// Comma-separated point.
    #[arg(long, value_delimiter = ',', required = true)]
    eval: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct BowlArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    dr: f64,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct SolverArgs {
    /// Number of uniform continuation steps.
    #[arg(long, default_value_t = 16)]
    steps: usize,
    #[arg(long, value_enum)]
    discretization: Option<Scheme>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Scheme {
    NonDivergence,
    Divergence,
}

impl SolverArgs {
    fn options(&self, default: Discretization) -> Result<SolveOptions> {
        let mut o = SolveOptions::default();
        if self.steps == 0 {
            return Err(Error::Config("--steps must be positive".into()));
        }
        o.schedule = crate::pde::ContinuationSchedule::uniform(self.steps);
        o.settings.discretization = match self.discretization {
            None => default,
            Some(Scheme::NonDivergence) => Discretization::NonDivergence,
            Some(Scheme::Divergence) => Discretization::Divergence,
        };
        Ok(o)
    }
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct RectArgs {
    #[arg(long = "L")]
    #[serde(rename = "L")]
    l: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    h: f64,
    /// Also run the rectangle audit.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct EllipsoidArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    r: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct SlabArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    r: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct WingArgs {
    #[arg(long)]
    b: f64,
    #[arg(long)]
    h: f64,
    /// Comma-separated increasing half-lengths.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    #[serde(rename = "L")]
    l: Vec<f64>,
    #[arg(long)]
    cauchy_tol: Option<f64>,
    #[arg(long)]
    wall_margin: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct FmapArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    #[arg(long, default_value_t = simplex_map::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    h: f64,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct InvertArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<f64>,
    #[arg(long, default_value_t = simplex_map::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AuditKind {
    Rect,
    Ellipsoid,
    Slab,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct AuditArgs {
    #[arg(long, value_enum)]
    kind: AuditKind,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    l: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    r: Option<f64>,
    #[arg(long)]
    h: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Obj,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::ClosedForm(_) => "closed-form",
            Self::Bowl(_) => "bowl",
            Self::SolveRect(_) => "solve-rect",
            Self::SolveEllipsoid(_) => "solve-ellipsoid",
            Self::SolveSlab(_) => "solve-slab",
            Self::DeltaWing(_) => "delta-wing",
            Self::Fmap(_) => "fmap",
            Self::InvertFmap(_) => "invert-fmap",
            Self::Audit(_) => "audit",
            Self::Export(_) => "export",
        }
    }

    fn params(&self) -> serde_json::Value {
        let v = match self {
            Self::ClosedForm(a) => serde_json::to_value(a),
            Self::Bowl(a) => serde_json::to_value(a),
            Self::SolveRect(a) => serde_json::to_value(a),
            Self::SolveEllipsoid(a) => serde_json::to_value(a),
            Self::SolveSlab(a) => serde_json::to_value(a),
            Self::DeltaWing(a) => serde_json::to_value(a),
            Self::Fmap(a) => serde_json::to_value(a),
            Self::InvertFmap(a) => serde_json::to_value(a),
            Self::Audit(a) => serde_json::to_value(a),
            Self::Export(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

/// Outcome of a command that ran to completion.
struct Outcome {
    report: RunReport,
    /// Lines for stdout.
    summary: Vec<String>,
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config_file(argv.clone()) {
        Ok(a) => a,
        Err(e) => return fail(Some(&out_dir_of(&argv)), "unknown", &e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            if code != 0 {
                write_error(
                    &out_dir_of(&argv),
                    "unknown",
                    "config",
                    e.to_string().lines().next().unwrap_or_default(),
                    code,
                );
            }
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        return fail(Some(&cli.common.out), cli.command.name(), &e);
    }
    let start = Instant::now();
    let out = cli.common.out.clone();
    match execute(&cli, &out) {
        Ok(mut outcome) => {
            if cli.common.timing {
                outcome.report.timing_s = Some(start.elapsed().as_secs_f64());
            }
            if let Err(e) = fs::create_dir_all(&out)
                .map_err(Error::from)
                .and_then(|_| outcome.report.write(&out.join("report.json")))
            {
                return fail(Some(&out), cli.command.name(), &e);
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            let failed: Vec<&AuditEntry> =
                outcome.report.audits.iter().filter(|a| !a.pass).collect();
            if failed.is_empty() {
                0
            } else {
                for a in &failed {
                    eprintln!(
                        "audit {} failed: value {:e}, tolerance {:e}",
                        a.id, a.value, a.tolerance
                    );
                }
                let ids: Vec<&str> = failed.iter().map(|a| a.id.as_str()).collect();
                write_error(
                    &out,
                    cli.command.name(),
                    "audit",
                    &format!("failed: {}", ids.join(", ")),
                    2,
                );
                2
            }
        }
        Err(e) => fail(Some(&out), cli.command.name(), &e),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Usage(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Domain(_) => "domain",
        Error::Usage(_) => "usage",
        Error::Accuracy(_) => "accuracy",
        Error::Solver { .. } => "solver",
        Error::Linear(_) => "linear",
        Error::Postcondition(_) => "postcondition",
        Error::Calibration(_) => "calibration",
        Error::Inversion { .. } => "inversion",
        Error::ScheduleTooShort { .. } => "schedule_too_short",
        Error::Io(_) => "io",
    }
}

fn fail(out: Option<&Path>, command: &str, e: &Error) -> i32 {
    let code = exit_code(e);
    eprintln!("error: {e}");
    if let Some(out) = out {
        write_error(out, command, error_kind(e), &e.to_string(), code);
    }
    code
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    command: &'a str,
    kind: &'a str,
    message: &'a str,
    exit_code: i32,
}

fn write_error(out: &Path, command: &str, kind: &str, message: &str, exit_code: i32) {
    let rec = ErrorRecord {
        command,
        kind,
        message,
        exit_code,
    };
    let text = serde_json::to_string_pretty(&rec).expect("error record serializes") + "\n";
    if fs::create_dir_all(out)
        .and_then(|_| fs::write(out.join("error.json"), text))
        .is_err()
    {
        eprintln!("could not write error record to {}", out.display());
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // a pool built earlier in the process (tests, repeated runs) stays in place
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// `--out` as written on the command line, for error records written
/// before parsing succeeds.
fn out_dir_of(argv: &[OsString]) -> PathBuf {
    let strs: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    for (i, a) in strs.iter().enumerate() {
        if let Some(v) = a.strip_prefix("--out=") {
            return v.into();
        }
        if a == "--out" {
            if let Some(v) = strs.get(i + 1) {
                return v.into();
            }
        }
    }
    PathBuf::from("out")
}

/// Appends `--key value` for every file entry whose flag is not already on
/// the command line. The subcommand must precede any options.
fn merge_config_file(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(pos) = strs.iter().position(|a| a == "--config") else {
        return Ok(argv);
    };
    let path = strs
        .get(pos + 1)
        .ok_or_else(|| Error::Config("--config needs a file".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {path}: {e}")))?;
    let mut extra = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{path}:{}: expected key=value", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!(
                "{path}:{}: invalid key {key:?}",
                i + 1
            )));
        }
        let flag = format!("--{key}");
        let given = strs
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value {
            "true" => extra.push(flag),
            "false" => {}
            _ => extra.push(format!("{flag}={value}")),
        }
    }
    let mut argv = argv;
    argv.extend(extra.into_iter().map(OsString::from));
    Ok(argv)
}

fn execute(cli: &Cli, out: &Path) -> Result<Outcome> {
    let mut params = BTreeMap::new();
    if let serde_json::Value::Object(m) = cli.command.params() {
        params.extend(m);
    }
    params.insert(
        "out".into(),
        serde_json::Value::String(cli.common.out.display().to_string()),
    );
    let report = RunReport::new(cli.command.name(), params);
    match &cli.command {
        Command::ClosedForm(a) => closed_form(a, report, out),
        Command::Bowl(a) => bowl(a, report, out),
        Command::SolveRect(a) => {
            let opts = a.solver.options(Discretization::NonDivergence)?;
            let (f, sr) = suite::solve_rectangle_with(a.l, a.b, a.h, &opts)?;
            let audit = if a.audit {
                Some(suite::audit_rectangle(&f)?)
            } else {
                None
            };
            field_outcome(report, out, &f, &sr, audit)
        }
        Command::SolveEllipsoid(a) => {
            let opts = a.solver.options(Discretization::NonDivergence)?;
            let (f, sr) = suite::solve_ellipsoid_with(&a.a, a.r, a.h, &opts)?;
            let audit = if a.audit {
                Some(suite::audit_ellipsoid(&f)?)
            } else {
                None
            };
            field_outcome(report, out, &f, &sr, audit)
        }
        Command::SolveSlab(a) => {
            let opts = a.solver.options(Discretization::NonDivergence)?;
            let (f, sr) = suite::solve_slab_with(&a.a, a.r, a.b, a.h, &opts)?;
            let audit = if a.audit {
                Some(suite::audit_slab(&f)?)
            } else {
                None
            };
            field_outcome(report, out, &f, &sr, audit)
        }
        Command::DeltaWing(a) => wing(a, report, out),
        Command::Fmap(a) => fmap(a, report),
        Command::InvertFmap(a) => invert(a, report),
        Command::Audit(a) => audit(a, report, out),
        Command::Export(a) => export_cmd(a, report, out),
    }
}

fn closed_form(a: &ClosedFormArgs, mut report: RunReport, out: &Path) -> Result<Outcome> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Error::Config(format!("this family needs --{flag}")))
    };
    let surface = match a.family {
        Family::GrimReaper => ClosedFormSurface::GrimReaper,
        Family::Tilted => ClosedFormSurface::tilted(need(a.theta, "theta")?)?,
        Family::Arc => ClosedFormSurface::arc(need(a.b, "b")?)?,
        Family::Plane => ClosedFormSurface::Plane { height: a.height },
        Family::Bowl => {
            let n = a.n.ok_or_else(|| Error::Config("bowl needs --n".into()))?;
            if n != a.eval.len() {
                return Err(Error::Config(format!(
                    "bowl of dimension {n} evaluated at a {}-point",
                    a.eval.len()
                )));
            }
            let r = a.eval.iter().map(|c| c * c).sum::<f64>().sqrt();
            ClosedFormSurface::bowl(n, r.max(1.0) * 1.01)?
        }
    };
    let value = surface.value(&a.eval)?;
    write_out(out, |dir| {
        NodeTable {
            dim: a.eval.len(),
            rows: vec![(a.eval.clone(), value)],
        }
        .write(&dir.join("value.csv"))
    })?;
    report.params.insert(
        "surface".into(),
        serde_json::Value::String(surface.name().into()),
    );
    Ok(Outcome {
        report,
        summary: vec![format!("{value:.15}")],
    })
}

fn bowl(a: &BowlArgs, mut report: RunReport, out: &Path) -> Result<Outcome> {
    let p = BowlProfile::integrate(a.n, a.r_max, a.dr)?;
    let rows = p
        .radii()
        .zip(p.sampled_values())
        .map(|(r, &u)| (vec![r], u))
        .collect();
    write_out(out, |dir| {
        NodeTable { dim: 1, rows }.write(&dir.join("profile.csv"))
    })?;
    let u2 = p.fitted_apex_curvature();
    report.apex = Some(ApexRecord {
        location: vec![0.0; a.n],
        value: 0.0,
        curvatures: vec![-u2; a.n],
    });
    let target = -1.0 / a.n as f64;
    report.audits.push(AuditEntry::new(
        "APEX_CURVATURE",
        (u2 - target).abs() <= 1e-6,
        u2,
        1e-6,
    ));
    Ok(Outcome {
        report,
        summary: vec![format!("u''(0) = {u2:.12}")],
    })
}

fn write_out(out: &Path, f: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    fs::create_dir_all(out)?;
    f(out)
}

fn write_field(out: &Path, f: &ScalarField) -> Result<()> {
    write_out(out, |dir| {
        NodeTable::from_field(f).write(&dir.join("field.csv"))?;
        if f.dim() == 2 {
            fs::write(dir.join("field.obj"), field_to_obj(f)?)?;
        }
        Ok(())
    })
}

fn field_outcome(
    mut report: RunReport,
    out: &Path,
    f: &ScalarField,
    sr: &SolveReport,
    audit: Option<suite::AuditReport>,
) -> Result<Outcome> {
    write_field(out, f)?;
    report.residual_max = Some(sr.final_residual);
    let sp = apex_spectrum(f)?;
    report.apex = Some(ApexRecord::from(&sp));
    if let Some(a) = &audit {
        report.add_audits(a);
    }
    let summary = vec![
        format!("max_value = {:.6}", sr.max_value),
        format!("apex curvatures = {:?}", sp.axis_curvatures),
        format!("residual = {:.3e}", sr.final_residual),
    ];
    Ok(Outcome { report, summary })
}

fn wing(a: &WingArgs, mut report: RunReport, out: &Path) -> Result<Outcome> {
    let mut opts = WingOptions::default();
    opts.solve = a.solver.options(Discretization::Divergence)?;
    if let Some(t) = a.cauchy_tol {
        opts.cauchy_tol = t;
    }
    if let Some(m) = a.wall_margin {
        opts.wall_margin = m;
    }
    let w = delta_wing::construct_with(a.b, a.h, &a.l, &opts)?;
    write_field(out, &w.field)?;
    report.residual_max = w.reports.last().map(|r| r.final_residual);
    report.apex = Some(ApexRecord::from(&w.apex));
    let theta_tol = 0.05 * w.theta_expected;
    report.audits.push(AuditEntry::new(
        "THETA_HAT",
        (w.theta_hat - w.theta_expected).abs() <= theta_tol,
        w.theta_hat,
        theta_tol,
    ));
    report.audits.push(AuditEntry::new(
        "CAUCHY",
        w.cauchy_gap() <= opts.cauchy_tol,
        w.cauchy_gap(),
        opts.cauchy_tol,
    ));
    if w.l_max() >= 10.0 * w.b {
        let s = delta_wing::asymptotic_slope_check(&w)?;
        report.audits.push(AuditEntry::new(
            "SLOPE",
            s.pass,
            s.relative_error,
            s.tolerance,
        ));
    }
    let c = delta_wing::convexity_check(&w);
    report.audits.push(AuditEntry::new(
        "CONVEXITY",
        c.pass,
        c.fraction,
        delta_wing::CONVEX_FRACTION,
    ));
    let g = delta_wing::gauss_image_bounds(&w);
    report.audits.push(AuditEntry::new(
        "GAUSS_IMAGE",
        g.pass,
        g.max_first_slope,
        g.bound,
    ));
    let trace_err = (w.apex.trace + 1.0).abs();
    report.audits.push(AuditEntry::new(
        "TRACE_APEX",
        trace_err <= 0.05,
        w.apex.trace,
        0.05,
    ));
    let summary = vec![
        format!(
            "theta_hat = {:.4} (expected {:.4})",
            w.theta_hat, w.theta_expected
        ),
        format!(
            "apex curvatures = ({:.4}, {:.4})",
            w.curvature_pair.0, w.curvature_pair.1
        ),
        format!("relative Cauchy gap = {:.3e}", w.cauchy_gap()),
    ];
    Ok(Outcome { report, summary })
}

fn fmap(a: &FmapArgs, mut report: RunReport) -> Result<Outcome> {
    let r = simplex_map::f_map(&a.a, a.lambda, a.h)?;
    report.residual_max = r.report.as_ref().map(|s| s.final_residual);
    if let Some(sp) = &r.spectrum {
        let mut rec = ApexRecord::from(sp);
        rec.curvatures = r.k.clone();
        report.apex = Some(rec);
    }
    report.params.insert("radius".into(), r.radius.into());
    let sum_err = (r.k_sum() - 1.0).abs();
    report
        .audits
        .push(AuditEntry::new("K_SUM", sum_err <= 0.05, r.k_sum(), 0.05));
    Ok(Outcome {
        report,
        summary: vec![format!("F({:?}) = {:?} (R = {:.6})", a.a, r.k, r.radius)],
    })
}

fn invert(a: &InvertArgs, mut report: RunReport) -> Result<Outcome> {
    let inv = simplex_map::invert_f(&a.k, a.lambda, a.h, a.tol)?;
    report
        .params
        .insert("a".into(), serde_json::to_value(&inv.a).unwrap());
    report.params.insert(
        "achieved".into(),
        serde_json::to_value(&inv.achieved).unwrap(),
    );
    report.audits.push(AuditEntry::new(
        "INVERSION",
        inv.residual <= a.tol,
        inv.residual,
        a.tol,
    ));
    Ok(Outcome {
        report,
        summary: vec![format!(
            "a = {:?}, F(a) = {:?}, residual {:.3e}",
            inv.a, inv.achieved, inv.residual
        )],
    })
}

fn audit(a: &AuditArgs, report: RunReport, out: &Path) -> Result<Outcome> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Error::Config(format!("this audit needs --{flag}")))
    };
    let (f, sr, rep) = match a.kind {
        AuditKind::Rect => {
            let (f, sr) = suite::solve_rectangle(need(a.l, "L")?, need(a.b, "b")?, a.h)?;
            let rep = suite::audit_rectangle(&f)?;
            (f, sr, rep)
        }
        AuditKind::Ellipsoid => {
            let (f, sr) = suite::solve_ellipsoid(&a.a, need(a.r, "R")?, a.h)?;
            let rep = suite::audit_ellipsoid(&f)?;
            (f, sr, rep)
        }
        AuditKind::Slab => {
            let (f, sr) = suite::solve_slab(&a.a, need(a.r, "R")?, need(a.b, "b")?, a.h)?;
            let rep = suite::audit_slab(&f)?;
            (f, sr, rep)
        }
    };
    let mut outcome = field_outcome(report, out, &f, &sr, Some(rep))?;
    outcome.summary = outcome
        .report
        .audits
        .iter()
        .map(|c| {
            format!(
                "{:<16} {} value {:.3e} tolerance {:.3e}",
                c.id,
                if c.pass { "pass" } else { "FAIL" },
                c.value,
                c.tolerance
            )
        })
        .collect();
    Ok(outcome)
}

fn export_cmd(a: &ExportArgs, report: RunReport, out: &Path) -> Result<Outcome> {
    let table = NodeTable::read(&a.input)?;
    let path = write_out(out, |dir| match a.format {
        Format::Csv => table.write(&dir.join("export.csv")),
        Format::Obj => Ok(fs::write(dir.join("export.obj"), table.to_obj()?)?),
    });
    path?;
    Ok(Outcome {
        report,
        summary: vec![format!("{} rows exported", table.rows.len())],
    })
}
