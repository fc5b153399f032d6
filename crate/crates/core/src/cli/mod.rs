//! Command-line front end: `analyze`, `verify`, `catalog`, `squaroid` and
//! `wintgen`.
//!
//! Exit codes: 0 on success, 2 when a run completes but a threshold check
//! fails or a diagnostic is raised, 1 on errors.

pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::curvature::{DiffConfig, DiffMode, TolerancePolicy};
use crate::error::{Error, Result};
use crate::metricspace::{catalog_metric, parse_metric_spec, sample_points, MetricField};
use crate::shapeops::{wintgen_quantities, ShapeOperatorDoc};
use crate::symmetry::classify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DIAGNOSTICS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "curvsym", version, about = "Curvature-symmetry analysis of Riemannian metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a metric at sampled points
    Analyze(CommonArgs),
    /// Run the algebraic identity suite on a metric
    Verify(CommonArgs),
    /// Acceptance table over the Thurston geometries and space forms
    Catalog(CommonArgs),
    /// Levi-Civita and Deszcz squaroid sweeps at the centre of the domain
    Squaroid(CommonArgs),
    /// Wintgen inequality suite, or the quantities of one shape-operator file
    Wintgen(WintgenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Jet,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TolProfile {
    Strict,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// Catalog name (euclidean, space_form, thurston, sol, product_s2xe1,
    /// product_h2xe1) or path to a metric-spec file
    #[arg(long)]
    metric: Option<String>,
    /// Dimension for euclidean and space_form
    #[arg(long)]
    dim: Option<usize>,
    /// Catalog parameter, e.g. `--param c=-1` or `--param m=0.25`
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    planes: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Jet)]
    mode: Mode,
    #[arg(long = "fd-step", default_value_t = 1e-4)]
    fd_step: f64,
    /// Tolerance profile; defaults to `strict` in jet mode and `fd` otherwise
    #[arg(long, value_enum)]
    tol: Option<TolProfile>,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Args)]
struct WintgenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Shape-operator JSON document: {"ambient_c": c, "operators": [[[...]]]}
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of random shape-operator sets
    #[arg(long, default_value_t = 1000)]
    random: usize,
    /// Number of ideal-form instances
    #[arg(long, default_value_t = 50)]
    ideal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Analyze,
    Verify,
    Catalog,
    Squaroid,
    Wintgen,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub metric: Option<String>,
    pub dim: Option<usize>,
    pub params: Vec<(String, f64)>,
    pub points: usize,
    pub planes: usize,
    pub seed: u64,
    pub mode: Mode,
    pub fd_step: f64,
    pub tol_profile: TolerancePolicy,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub random: usize,
    pub ideal: usize,
}

impl RunConfig {
    fn from_args(command: CommandKind, a: CommonArgs) -> Result<Self> {
        if a.points == 0 || a.planes == 0 {
            return Err(Error::Config("--points and --planes must be at least 1".into()));
        }
        let params = a
            .params
            .iter()
            .map(|kv| {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--param expects KEY=VALUE, got `{kv}`")))?;
                let v: f64 =
                    v.trim().parse().map_err(|_| Error::Config(format!("--param {k}: `{v}` is not a number")))?;
                Ok((k.trim().to_string(), v))
            })
            .collect::<Result<Vec<_>>>()?;
        let tol_profile = match a.tol {
            Some(TolProfile::Strict) => TolerancePolicy::STRICT,
            Some(TolProfile::Fd) => TolerancePolicy::FD,
            None if a.mode == Mode::Fd => TolerancePolicy::FD,
            None => TolerancePolicy::STRICT,
        };
        Ok(Self {
            command,
            metric: a.metric,
            dim: a.dim,
            params,
            points: a.points,
            planes: a.planes,
            seed: a.seed,
            mode: a.mode,
            fd_step: a.fd_step,
            tol_profile,
            output: a.out,
            format: a.format,
            input: None,
            random: 1000,
            ideal: 50,
        })
    }

    pub fn diff_config(&self) -> Result<DiffConfig> {
        let cfg = DiffConfig {
            mode: match self.mode {
                Mode::Jet => DiffMode::Jet,
                Mode::Fd => DiffMode::FiniteDifference,
            },
            fd_step: self.fd_step,
            tolerance: self.tol_profile,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Catalog lookup, or a metric-spec file when `metric` names an
    /// existing file (or looks like a path).
    pub fn resolve_metric(&self) -> Result<MetricField> {
        let spec = self.metric.as_deref().ok_or_else(|| Error::Config("--metric is required".into()))?;
        let path = Path::new(spec);
        if path.is_file() {
            let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{spec}: {e}")))?;
            let field = parse_metric_spec(&src)?;
            if let Some(d) = self.dim {
                if d != field.dim() {
                    return Err(Error::DimensionMismatch { expected: d, got: field.dim() });
                }
            }
            return Ok(field);
        }
        if spec.contains(std::path::MAIN_SEPARATOR) || spec.ends_with(".metric") {
            return Err(Error::Io(format!("{spec}: no such metric file")));
        }
        let mut params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        if let Some(d) = self.dim {
            params.push(("dim", d as f64));
        }
        catalog_metric(spec, &params)
    }
}

/// A finished run: the document to print and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub document: Value,
    /// Rows for the CSV projection.
    pub rows: Vec<Value>,
    pub exit_code: i32,
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| Error::Io(format!("serialisation failed: {e}")))
}

fn envelope(cfg: &RunConfig, field: Option<&MetricField>) -> Map<String, Value> {
    let mut params = Map::new();
    if let Some(f) = field {
        params.insert("dim".into(), json!(f.dim()));
        for (k, v) in f.params() {
            params.insert(k.clone(), json!(v));
        }
    }
    params.insert("points".into(), json!(cfg.points));
    params.insert("planes".into(), json!(cfg.planes));
    params.insert("tol".into(), json!(cfg.tol_profile.name));
    if cfg.mode == Mode::Fd {
        params.insert("fd_step".into(), json!(cfg.fd_step));
    }
    let mut doc = Map::new();
    doc.insert("metric".into(), field.map_or(Value::Null, |f| json!(f.name())));
    doc.insert("params".into(), Value::Object(params));
    doc.insert("mode".into(), json!(cfg.mode));
    doc.insert("seed".into(), json!(cfg.seed));
    doc.insert("points".into(), json!([]));
    doc.insert("per_point".into(), json!([]));
    doc.insert("aggregate".into(), json!({}));
    doc.insert("suite".into(), json!([]));
    doc
}

fn suite_output<T: Serialize>(
    mut doc: Map<String, Value>,
    rows: &[T],
    pass: impl Fn(&T) -> bool,
) -> Result<RunOutput> {
    let values = rows.iter().map(to_value).collect::<Result<Vec<_>>>()?;
    let failed = rows.iter().filter(|r| !pass(r)).count();
    doc.insert("aggregate".into(), json!({ "rows": rows.len(), "failed": failed }));
    doc.insert("suite".into(), Value::Array(values.clone()));
    Ok(RunOutput {
        document: Value::Object(doc),
        rows: values,
        exit_code: if failed == 0 { EXIT_OK } else { EXIT_DIAGNOSTICS },
    })
}

pub fn run_analyze(cfg: &RunConfig) -> Result<RunOutput> {
    let field = cfg.resolve_metric()?;
    let dc = cfg.diff_config()?;
    let pts = sample_points(&field, cfg.points, cfg.seed)?;
    let report = classify(&field, &pts, cfg.planes, &dc, cfg.seed)?;
    let mut doc = envelope(cfg, Some(&field));
    doc.insert("points".into(), to_value(&pts.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>())?);
    let rows = report.per_point.iter().map(to_value).collect::<Result<Vec<_>>>()?;
    doc.insert("per_point".into(), Value::Array(rows.clone()));
    let mut agg = to_value(&report.aggregate)?;
    if let Value::Object(m) = &mut agg {
        m.insert("dim".into(), json!(report.dim));
        m.insert("diagnostics".into(), to_value(&report.diagnostics)?);
    }
    doc.insert("aggregate".into(), agg);
    Ok(RunOutput {
        document: Value::Object(doc),
        rows,
        exit_code: if report.diagnostics.is_empty() { EXIT_OK } else { EXIT_DIAGNOSTICS },
    })
}

pub fn run_verify(cfg: &RunConfig) -> Result<RunOutput> {
    let field = cfg.resolve_metric()?;
    let dc = cfg.diff_config()?;
    let pts = sample_points(&field, cfg.points, cfg.seed)?;
    let rows = suites::identity_suite(&field, &pts, &dc)?;
    let mut doc = envelope(cfg, Some(&field));
    doc.insert("points".into(), to_value(&pts.iter().map(|p| p.coords().to_vec()).collect::<Vec<_>>())?);
    suite_output(doc, &rows, |r| r.pass)
}

pub fn run_catalog(cfg: &RunConfig) -> Result<RunOutput> {
    let dc = cfg.diff_config()?;
    let rows = suites::catalog_suite(cfg.points, cfg.planes, cfg.seed, &dc)?;
    suite_output(envelope(cfg, None), &rows, |r| r.pass)
}

pub fn run_squaroid(cfg: &RunConfig) -> Result<RunOutput> {
    let field = cfg.resolve_metric()?;
    let dc = cfg.diff_config()?;
    let rows = suites::squaroid_sweep(&field, &dc)?;
    let mut doc = envelope(cfg, Some(&field));
    let centre: Vec<f64> = field.domain().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    doc.insert("points".into(), json!([centre]));
    suite_output(doc, &rows, |_| true)
}

pub fn run_wintgen(cfg: &RunConfig) -> Result<RunOutput> {
    let mut doc = envelope(cfg, None);
    if let Some(path) = &cfg.input {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let parsed: ShapeOperatorDoc = serde_json::from_str(&src)
            .map_err(|e| Error::ShapeOperators(format!("{}: {e}", path.display())))?;
        let set = parsed.into_set()?;
        let q = wintgen_quantities(&set);
        let row = json!({
            "name": "input",
            "n": set.dim(),
            "m": set.codim(),
            "ambient_c": set.ambient_c(),
            "rho": q.rho,
            "rho_perp": q.rho_perp,
            "h2": q.h2,
            "slack": q.slack,
        });
        return suite_output(doc, &[row], |_| true);
    }
    doc.insert("params".into(), json!({ "random": cfg.random, "ideal": cfg.ideal }));
    let rows = suites::wintgen_suite(cfg.random, cfg.ideal, cfg.seed)?;
    suite_output(doc, &rows, |r| r.pass)
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.command {
        CommandKind::Analyze => run_analyze(cfg),
        CommandKind::Verify => run_verify(cfg),
        CommandKind::Catalog => run_catalog(cfg),
        CommandKind::Squaroid => run_squaroid(cfg),
        CommandKind::Wintgen => run_wintgen(cfg),
    }
}

/// Renders the run in the requested format.
pub fn render(cfg: &RunConfig, out: &RunOutput) -> Result<String> {
    match cfg.format {
        Format::Json => Ok(output::to_json(&out.document)),
        Format::Csv => output::to_csv(&out.rows).map_err(Error::Io),
    }
}

fn parse_config<I, T>(args: I) -> std::result::Result<RunConfig, i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Err(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let cfg = match cli.command {
        Command::Analyze(a) => RunConfig::from_args(CommandKind::Analyze, a),
        Command::Verify(a) => RunConfig::from_args(CommandKind::Verify, a),
        Command::Catalog(a) => RunConfig::from_args(CommandKind::Catalog, a),
        Command::Squaroid(a) => RunConfig::from_args(CommandKind::Squaroid, a),
        Command::Wintgen(w) => RunConfig::from_args(CommandKind::Wintgen, w.common).map(|mut c| {
            c.input = w.input;
            c.random = w.random;
            c.ideal = w.ideal;
            c
        }),
    };
    cfg.map_err(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

/// Parses `args` (including the program name), runs, writes the report
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = run(&cfg).and_then(|out| render(&cfg, &out).map(|text| (out, text)));
    let (out, text) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_ERROR;
    }
    if let Some(Value::Array(diags)) = out.document.get("aggregate").and_then(|a| a.get("diagnostics")) {
        for d in diags {
            eprintln!("diagnostic: {}", d.as_str().unwrap_or_default());
        }
    }
    if let Some(Value::Number(n)) = out.document.get("aggregate").and_then(|a| a.get("failed")) {
        if n.as_u64() != Some(0) {
            eprintln!("{n} suite row(s) failed");
        }
    }
    out.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        parse_config(std::iter::once("curvsym").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let c = cfg(&["analyze", "--metric", "sol"]);
        assert_eq!((c.points, c.planes, c.seed, c.mode), (20, 50, 1, Mode::Jet));
        assert_eq!(c.tol_profile, TolerancePolicy::STRICT);
        assert_eq!(cfg(&["analyze", "--metric", "sol", "--mode", "fd"]).tol_profile, TolerancePolicy::FD);
    }

    #[test]
    fn catalog_params_reach_the_metric() {
        let c = cfg(&["analyze", "--metric", "space_form", "--dim", "2", "--param", "c=-1"]);
        let f = c.resolve_metric().unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.params(), &[("c".to_string(), -1.0)]);
    }

    #[test]
    fn bad_invocations_are_errors() {
        assert!(parse_config(["curvsym", "analyze", "--points", "0", "--metric", "sol"]).is_err());
        assert!(parse_config(["curvsym", "analyze", "--mode", "spline"]).is_err());
        let c = cfg(&["analyze", "--metric", "./missing.metric"]);
        assert!(matches!(c.resolve_metric(), Err(Error::Io(_))));
        let c = cfg(&["analyze", "--metric", "sol", "--mode", "fd", "--fd-step", "0.1"]);
        assert!(matches!(c.diff_config(), Err(Error::Config(_))));
    }
}
