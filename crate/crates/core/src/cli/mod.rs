//! Command-line front end. All dB ↔ linear conversion happens here.

mod config;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

pub use config::{Config, KNOWN_KEYS};

use crate::channel::{Geometry, PhaseDesign, SecrecyThreshold, SystemParams};
use crate::mc::Execution;
use crate::metrics::{Method, MetricKind};
use crate::validate::{self, db, EvalSettings, Grid};

pub const CSV_HEADER: &str =
    "design,L,delta,r1,r2,gammaB_db,gammaE_db,rt,metric,method,value,error,n_or_terms";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or values: exit 2.
    Usage(String),
    /// Numerical failure or failed validation: exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ris-secrecy",
    version,
    about = "Secrecy metrics of RIS-assisted wiretap links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate metrics at one operating point (lists expand to a product).
    Metrics(Common),
    /// Evaluate metrics along one parameter axis.
    Sweep(SweepArgs),
    /// Monte-Carlo estimates of the metrics.
    Simulate(Common),
    /// Run a validation suite and print a pass/fail report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// coherent | discrete, comma separated for several.
    #[arg(long)]
    pub design: Option<String>,
    /// Number of RIS elements, comma separated for several.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// Path-loss exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Inner annulus radius.
    #[arg(long, allow_negative_numbers = true)]
    pub r1: Option<f64>,
    /// Outer annulus radius.
    #[arg(long, allow_negative_numbers = true)]
    pub r2: Option<f64>,
    /// Alice–RIS distance.
    #[arg(long = "d-ar", allow_negative_numbers = true)]
    pub d_ar: Option<f64>,
    /// RIS–Bob distance.
    #[arg(long = "d-rb", allow_negative_numbers = true)]
    pub d_rb: Option<f64>,
    /// Bob's transmit SNR P/N0 in dB.
    #[arg(long = "gammaB-db", allow_negative_numbers = true)]
    pub gamma_b_db: Option<f64>,
    /// Eve's transmit SNR P/N0 in dB.
    #[arg(long = "gammaE-db", allow_negative_numbers = true)]
    pub gamma_e_db: Option<f64>,
    /// Target secrecy rate in bits/s/Hz.
    #[arg(long, allow_negative_numbers = true)]
    pub rt: Option<f64>,
    /// Phase resolution in bits for the discrete design.
    #[arg(long)]
    pub q: Option<u32>,
    /// closed | quad | mc, comma separated for several.
    #[arg(long)]
    pub method: Option<String>,
    /// sop | sop_lower | pnz, comma separated for several.
    #[arg(long)]
    pub metric: Option<String>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Monte-Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Absolute tolerance of the quadrature oracles.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Config file with `key = value` defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// gammaB-db | gammaE-db | L | rt
    #[arg(long)]
    pub axis: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Explicit comma-separated grid instead of from/to/steps.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// identities | crosscheck | mc | all
    #[arg(long)]
    pub suite: String,
    /// small | standard (crosscheck only)
    #[arg(long, default_value = "small")]
    pub grid: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings: flags over config over defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub designs: Vec<PhaseDesign>,
    pub ls: Vec<u32>,
    pub geometry: Geometry,
    pub gamma_b_db: f64,
    pub gamma_e_db: f64,
    pub rt: f64,
    pub methods: Vec<Method>,
    pub metrics: Vec<MetricKind>,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("invalid value '{s}' for {key}")))
}

fn parse_list<T, F>(key: &str, s: &str, f: F) -> Result<Vec<T>, CliError>
where
    F: Fn(&str) -> Result<T, CliError>,
{
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(f)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(usage(format!("empty list for {key}")));
    }
    Ok(items)
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    match s {
        "closed" => Ok(Method::ClosedForm),
        "quad" => Ok(Method::Quadrature),
        "mc" => Ok(Method::MonteCarlo),
        other => Err(usage(format!("unknown method '{other}' (closed|quad|mc)"))),
    }
}

fn parse_design(s: &str, q: u32) -> Result<PhaseDesign, CliError> {
    match s {
        "coherent" => Ok(PhaseDesign::CoherentImperfect),
        "discrete" => PhaseDesign::discrete(q).map_err(|e| usage(e.to_string())),
        other => Err(usage(format!(
            "unknown design '{other}' (coherent|discrete)"
        ))),
    }
}

/// Flag if given, else config entry, else `None`.
fn pick<T: FromStr + Clone>(
    flag: &Option<T>,
    cfg: &Config,
    key: &str,
) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v.clone())),
        None => cfg.get(key).map(|s| parse_value(key, s)).transpose(),
    }
}

impl Settings {
    pub fn resolve(c: &Common) -> Result<Self, CliError> {
        let cfg = match &c.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        Self::resolve_with(c, &cfg)
    }

    pub fn resolve_with(c: &Common, cfg: &Config) -> Result<Self, CliError> {
        let d = Geometry::default();
        let q = pick(&c.q, cfg, "q")?.unwrap_or(1);
        let designs_s = pick(&c.design, cfg, "design")?.unwrap_or_else(|| "coherent".into());
        let designs = parse_list("design", &designs_s, |s| parse_design(s, q))?;
        let ls_s = pick(&c.l, cfg, "L")?.unwrap_or_else(|| "16".into());
        let ls = parse_list("L", &ls_s, |s| parse_value::<u32>("L", s))?;
        if ls.contains(&0) {
            return Err(usage("L must be at least 1"));
        }
        let geometry = Geometry {
            delta: pick(&c.delta, cfg, "delta")?.unwrap_or(d.delta),
            r1: pick(&c.r1, cfg, "r1")?.unwrap_or(d.r1),
            r2: pick(&c.r2, cfg, "r2")?.unwrap_or(d.r2),
            d_ar: pick(&c.d_ar, cfg, "d-ar")?.unwrap_or(d.d_ar),
            d_rb: pick(&c.d_rb, cfg, "d-rb")?.unwrap_or(d.d_rb),
        };
        geometry.validate().map_err(|e| usage(e.to_string()))?;
        let methods_s = pick(&c.method, cfg, "method")?.unwrap_or_else(|| "closed".into());
        let metrics_s = pick(&c.metric, cfg, "metric")?.unwrap_or_else(|| "sop".into());
        let s = Settings {
            designs,
            ls,
            geometry,
            gamma_b_db: pick(&c.gamma_b_db, cfg, "gammaB-db")?.unwrap_or(20.0),
            gamma_e_db: pick(&c.gamma_e_db, cfg, "gammaE-db")?.unwrap_or(-20.0),
            rt: pick(&c.rt, cfg, "rt")?.unwrap_or(0.8),
            methods: parse_list("method", &methods_s, parse_method)?,
            metrics: parse_list("metric", &metrics_s, |s| {
                s.parse::<MetricKind>().map_err(|e| usage(e.to_string()))
            })?,
            samples: pick(&c.samples, cfg, "samples")?.unwrap_or(1_000_000),
            seed: pick(&c.seed, cfg, "seed")?.unwrap_or(42),
            tol: pick(&c.tol, cfg, "tol")?.unwrap_or(1e-9),
            threads: pick(&c.threads, cfg, "threads")?.unwrap_or(0),
            out: pick(&c.out, cfg, "out")?,
        };
        for (name, v) in [("gammaB-db", s.gamma_b_db), ("gammaE-db", s.gamma_e_db)] {
            if !v.is_finite() {
                return Err(usage(format!("{name} must be finite")));
            }
        }
        SecrecyThreshold::new(s.rt).map_err(|e| usage(e.to_string()))?;
        if !(s.tol > 0.0) {
            return Err(usage("tol must be positive"));
        }
        if s.methods.contains(&Method::MonteCarlo) && s.samples < crate::mc::MIN_SAMPLES {
            return Err(usage(format!(
                "samples must be at least {}",
                crate::mc::MIN_SAMPLES
            )));
        }
        Ok(s)
    }

    fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            tol: self.tol,
            samples: self.samples,
            seed: self.seed,
            exec: Execution::default(),
        }
    }
}

/// One operating point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    design: PhaseDesign,
    l: u32,
    gamma_b_db: f64,
    gamma_e_db: f64,
    rt: f64,
    metric: MetricKind,
    method: Method,
}

fn csv_row(
    s: &Settings,
    p: &Point,
    value: f64,
    err: f64,
    n: Option<u64>,
    method: Method,
) -> String {
    let g = &s.geometry;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        p.design.name(),
        p.l,
        g.delta,
        g.r1,
        g.r2,
        p.gamma_b_db,
        p.gamma_e_db,
        p.rt,
        p.metric,
        method,
        value,
        err,
        n.map(|v| v.to_string()).unwrap_or_default()
    )
}

fn evaluate_point(s: &Settings, p: &Point) -> Result<String, String> {
    let run = || -> crate::Result<String> {
        let params =
            SystemParams::from_transmit_snrs(p.l, s.geometry, db(p.gamma_b_db), db(p.gamma_e_db))?;
        let thr = SecrecyThreshold::new(p.rt)?;
        let (r, n) = validate::evaluate(
            p.metric,
            p.method,
            p.design,
            &params,
            &thr,
            &s.eval_settings(),
        )?;
        Ok(csv_row(s, p, r.value, r.error_estimate, n, r.method))
    };
    run().map_err(|e| {
        format!(
            "{} {} L={} gammaB_db={} gammaE_db={} rt={} [{}]: {e}",
            p.design.name(),
            p.metric,
            p.l,
            p.gamma_b_db,
            p.gamma_e_db,
            p.rt,
            p.method
        )
    })
}

/// Evaluates points (in parallel when enabled) and returns rows in input order.
fn evaluate_points(s: &Settings, points: &[Point]) -> Vec<Result<String, String>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(|p| evaluate_point(s, p)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|p| evaluate_point(s, p)).collect()
    }
}

fn write_rows(out: &Option<PathBuf>, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::Failure(format!("cannot write output: {e}")))
        }
    }
}

fn finish(s: &Settings, results: Vec<Result<String, String>>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(e),
        }
    }
    write_rows(&s.out, CSV_HEADER, &rows)?;
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("{f}");
        }
        Err(CliError::Failure(format!(
            "{} evaluation(s) failed",
            failures.len()
        )))
    }
}

fn product(s: &Settings) -> Vec<Point> {
    let mut pts = Vec::new();
    for &design in &s.designs {
        for &l in &s.ls {
            for &metric in &s.metrics {
                for &method in &s.methods {
                    pts.push(Point {
                        design,
                        l,
                        gamma_b_db: s.gamma_b_db,
                        gamma_e_db: s.gamma_e_db,
                        rt: s.rt,
                        metric,
                        method,
                    });
                }
            }
        }
    }
    pts
}

pub fn cmd_metrics(c: &Common) -> Result<(), CliError> {
    let s = Settings::resolve(c)?;
    with_threads(s.threads, || finish(&s, evaluate_points(&s, &product(&s))))
}

pub fn cmd_simulate(c: &Common) -> Result<(), CliError> {
    let mut s = Settings::resolve(c)?;
    s.methods = vec![Method::MonteCarlo];
    if c.metric.is_none() && Config::load_opt(&c.config)?.get("metric").is_none() {
        s.metrics = vec![MetricKind::Sop, MetricKind::SopLower, MetricKind::Pnz];
    }
    if s.samples < crate::mc::MIN_SAMPLES {
        return Err(usage(format!(
            "samples must be at least {}",
            crate::mc::MIN_SAMPLES
        )));
    }
    with_threads(s.threads, || finish(&s, evaluate_points(&s, &product(&s))))
}

impl Config {
    fn load_opt(path: &Option<PathBuf>) -> Result<Config, CliError> {
        match path {
            Some(p) => Config::load(p),
            None => Ok(Config::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    GammaB,
    GammaE,
    L,
    Rt,
}

fn sweep_grid(a: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if let Some(v) = &a.values {
        if a.from.is_some() || a.to.is_some() || a.steps.is_some() {
            return Err(usage("give either --values or --from/--to/--steps"));
        }
        return parse_list("values", v, |x| parse_value::<f64>("values", x));
    }
    let (from, to, steps) = match (a.from, a.to, a.steps) {
        (Some(f), Some(t), Some(n)) => (f, t, n),
        _ => return Err(usage("sweep needs --from, --to and --steps (or --values)")),
    };
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(usage("sweep needs finite bounds and steps >= 1"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let s = Settings::resolve(&a.common)?;
    let axis = match a.axis.as_str() {
        "gammaB-db" => Axis::GammaB,
        "gammaE-db" => Axis::GammaE,
        "L" => Axis::L,
        "rt" => Axis::Rt,
        other => return Err(usage(format!("unknown sweep axis '{other}'"))),
    };
    let grid = sweep_grid(a)?;
    if axis == Axis::L && grid.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
        return Err(usage("L sweep values must be positive integers"));
    }
    let ls: Vec<u32> = if axis == Axis::L {
        vec![0]
    } else {
        s.ls.clone()
    };
    let mut pts = Vec::new();
    for &design in &s.designs {
        for &l in &ls {
            for &x in &grid {
                for &metric in &s.metrics {
                    for &method in &s.methods {
                        let mut p = Point {
                            design,
                            l,
                            gamma_b_db: s.gamma_b_db,
                            gamma_e_db: s.gamma_e_db,
                            rt: s.rt,
                            metric,
                            method,
                        };
                        match axis {
                            Axis::GammaB => p.gamma_b_db = x,
                            Axis::GammaE => p.gamma_e_db = x,
                            Axis::L => p.l = x as u32,
                            Axis::Rt => p.rt = x,
                        }
                        pts.push(p);
                    }
                }
            }
        }
    }
    with_threads(s.threads, || finish(&s, evaluate_points(&s, &pts)))
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<(), CliError> {
    let grid = match a.grid.as_str() {
        "small" => Grid::Small,
        "standard" => Grid::Standard,
        other => return Err(usage(format!("unknown grid '{other}' (small|standard)"))),
    };
    let suites: &[&str] = match a.suite.as_str() {
        "identities" => &["identities"],
        "crosscheck" => &["crosscheck"],
        "mc" => &["mc"],
        "all" => &["identities", "crosscheck", "mc"],
        other => return Err(usage(format!("unknown suite '{other}'"))),
    };
    if !(a.tol > 0.0) {
        return Err(usage("tol must be positive"));
    }
    if suites.contains(&"mc") && a.samples < crate::mc::MIN_SAMPLES {
        return Err(usage(format!(
            "samples must be at least {}",
            crate::mc::MIN_SAMPLES
        )));
    }
    with_threads(a.threads.unwrap_or(0), || {
        let mut checks = Vec::new();
        for suite in suites {
            match *suite {
                "identities" => checks.extend(validate::identities()),
                "crosscheck" => checks.extend(validate::crosscheck(grid, a.tol)),
                _ => checks.extend(validate::monte_carlo(
                    a.samples,
                    a.seed,
                    Execution::default(),
                )),
            }
        }
        let rows: Vec<String> = checks.iter().map(|c| c.to_string()).collect();
        write_rows(&a.out, validate::REPORT_HEADER, &rows)?;
        let failed = checks
            .iter()
            .filter(|c| c.status == validate::Status::Fail)
            .count();
        eprintln!(
            "{} checks: {} passed, {} failed, {} discrepancies",
            checks.len(),
            checks
                .iter()
                .filter(|c| c.status == validate::Status::Pass)
                .count(),
            failed,
            checks
                .iter()
                .filter(|c| c.status == validate::Status::Discrepancy)
                .count()
        );
        if failed > 0 {
            Err(CliError::Failure(format!(
                "{failed} validation check(s) failed"
            )))
        } else {
            Ok(())
        }
    })
}

/// Runs `f` on a pool of `threads` workers (0 keeps the global pool).
fn with_threads<T: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Failure(format!("cannot start thread pool: {e}")))?;
        return pool.install(f);
    }
    let _ = threads;
    f()
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let r = match &cli.command {
        Command::Metrics(c) => cmd_metrics(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match r {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
