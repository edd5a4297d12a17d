//! The `dynrecon` command-line tool.
//!
//! Exit status is 0 on success, 1 when the input or configuration is invalid
//! and 2 when a computation fails (divergence, no minimum, no neighbor, ...).
//! Every file written starts with `#` lines recording the invocation and the
//! resolved configuration; JSON outputs carry the invocation in a field.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::embedding::{
    atau_optimal_params, estimate_m_fnn, fnn_fraction, tau_first_min_mi, tau_first_zero_autocorr, FnnConfig,
    ParamChoice,
};
use crate::error::{Error, Result};
use crate::estimators::ais::atau_surface;
use crate::estimators::autocorr::autocorrelation;
use crate::estimators::binning::td_mutual_information_curve;
use crate::estimators::ordinal::{choose_word_length, permutation_entropy, weighted_permutation_entropy};
use crate::forecast::{rolling_evaluate, Method};
use crate::grid::SweepGrid;
use crate::points::PointCloud;
use crate::series::{load_series, reconstruct_values, write_series, ScalarSeries};
use crate::systems::{
    generate_flow_trajectory, generate_map_trace, random_flow_initial, random_map_initial, Flow, FlowSpec, Map,
    MapSpec,
};
use crate::topology::{
    betti_numbers, edge_lifespan_diagram, epsilon_barcode, reconstruction_diameter, scaled_epsilon,
    select_landmarks, write_barcode_csv, write_betti_csv, write_lifespan_csv, LandmarkStrategy, WitnessFiltration,
};

const SUBCOMMANDS: [&str; 6] = ["generate", "sweep", "select-params", "forecast", "wpe", "topology"];

#[derive(Debug, Parser)]
#[command(
    name = "dynrecon",
    version,
    about = "Delay reconstruction, parameter selection, forecasting and witness-complex topology",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// Seed for random initial conditions and random landmarks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Print the resolved configuration as key=value lines and exit.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub dump_config: bool,
    /// Read key=value settings from a file; flags on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a trace from a benchmark flow or map.
    Generate(GenerateArgs),
    /// Evaluate A_tau or LMA 1-MASE over an (m, tau) grid.
    Sweep(SweepArgs),
    /// Choose reconstruction parameters with one heuristic.
    SelectParams(SelectArgs),
    /// Rolling-origin forecast evaluation.
    Forecast(ForecastArgs),
    /// Permutation entropy and weighted permutation entropy.
    Wpe(WpeArgs),
    /// Witness-complex Betti numbers, barcodes and edge lifespans.
    Topology(TopologyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Lorenz63,
    Lorenz96,
    Rossler,
    Henon,
    Logistic,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub system: SystemKind,
    /// Lorenz 96 site count.
    #[arg(long = "K", default_value_t = 22)]
    #[serde(rename = "K")]
    pub sites: usize,
    /// Lorenz 96 forcing.
    #[arg(long = "F", default_value_t = 5.0)]
    #[serde(rename = "F")]
    pub forcing: f64,
    /// Override the first system parameter (Lorenz 63 sigma, Rossler a, Henon a).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Override the second system parameter (Lorenz 63 rho, Rossler b, Henon b).
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Override the third system parameter (Lorenz 63 beta, Rossler c).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Logistic map parameter.
    #[arg(long, default_value_t = 3.65)]
    pub r: f64,
    /// Integration step for flows.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Integration steps for flows, including the transient.
    #[arg(long, default_value_t = 60_000)]
    pub steps: usize,
    /// Discarded leading steps (flows default 10000, maps 0).
    #[arg(long)]
    pub transient: Option<usize>,
    /// Number of map iterates written.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Observed state coordinate.
    #[arg(long, default_value_t = 0)]
    pub observe: usize,
    /// Initial state, comma separated; drawn from --seed when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Vec<f64>,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    /// Also write the full post-transient flow state as a point-cloud CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Atau,
    Mase,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SweepMode::Atau)]
    pub mode: SweepMode,
    /// Dimension range `lo:hi` (or a single value).
    #[arg(long, default_value = "1:8")]
    pub m: String,
    /// Delay range `lo:hi` (or a single value).
    #[arg(long, default_value = "1:10")]
    pub tau: String,
    /// Forecast horizon.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// KSG neighbor count.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Sample cap per A_tau cell; larger inputs are subsampled by a uniform stride.
    #[arg(long, default_value_t = 20_000)]
    pub max_samples: usize,
    /// Training fraction for mase mode.
    #[arg(long, default_value_t = 0.9)]
    pub split: f64,
    /// Theiler window for mase mode.
    #[arg(long, default_value_t = 0)]
    pub theiler: usize,
    /// Grid CSV path (stdout when omitted).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Write the optimal cell as JSON (argmax for atau, argmin for mase).
    #[arg(long)]
    pub best: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SelectMethod {
    FirstMinMi,
    FirstZeroAutocorr,
    Fnn,
    AtauOptimal,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SelectArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: SelectMethod,
    /// Largest delay scanned by the delay heuristics.
    #[arg(long, default_value_t = 100)]
    pub tau_max: usize,
    /// Histogram bins for the lagged mutual information.
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Delay used by fnn (first MI minimum when omitted).
    #[arg(long)]
    pub delay: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,
    /// Acceptable false-neighbor fraction.
    #[arg(long, default_value_t = 0.10)]
    pub fnn_threshold: f64,
    #[arg(long, default_value_t = 10.0)]
    pub r_tol: f64,
    #[arg(long, default_value_t = 2.0)]
    pub a_tol: f64,
    /// Dimension range for atau_optimal.
    #[arg(long, default_value = "1:8")]
    pub m: String,
    /// Delay range for atau_optimal.
    #[arg(long, default_value = "1:10")]
    pub tau: String,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// JSON path (stdout when omitted).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Write the underlying curve or grid as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ForecastMethod {
    RandomWalk,
    Naive,
    Lma,
    Ar,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ForecastArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: ForecastMethod,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[arg(long, default_value_t = 0)]
    pub theiler: usize,
    /// Autoregression order.
    #[arg(long, default_value_t = crate::forecast::DEFAULT_AR_ORDER)]
    pub order: usize,
    /// Refit the autoregression every this many forecast origins.
    #[arg(long, default_value_t = 1)]
    pub refit_every: usize,
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long, default_value_t = 0.9)]
    pub split: f64,
    /// JSON path (stdout when omitted).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Write `index,prediction,truth` CSV.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WpeArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    /// Word length (chosen from the series length when omitted).
    #[arg(long)]
    pub ell: Option<usize>,
    /// Report entropies in bits instead of normalized by log2(ell!).
    #[arg(long)]
    pub unnormalized: bool,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum TopologyMode {
    Barcode,
    Betti,
    Lifespan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum LandmarkArg {
    EquallySpaced,
    MaxMin,
    Random,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TopologyArgs {
    #[arg(long, value_enum, default_value_t = TopologyMode::Barcode)]
    pub mode: TopologyMode,
    /// Scalar series to reconstruct.
    #[arg(short = 'i', long, conflicts_with = "cloud")]
    pub input: Option<PathBuf>,
    /// Point-cloud CSV used directly as the witness set.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Reconstruction dimension; a range `lo:hi` in lifespan mode.
    #[arg(long, default_value = "2")]
    pub m: String,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    /// Landmark count.
    #[arg(long, default_value_t = 200)]
    pub ell: usize,
    #[arg(long, value_enum, default_value_t = LandmarkArg::EquallySpaced)]
    pub landmarks: LandmarkArg,
    /// Number of geometrically spaced xi values in barcode mode.
    #[arg(long, default_value_t = 100)]
    pub xi_grid: usize,
    #[arg(long, default_value_t = 0.0005)]
    pub xi_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub xi_max: f64,
    /// Scale as a fraction of the witness diameter in betti and lifespan modes.
    #[arg(long, default_value_t = 0.0054)]
    pub xi: f64,
    /// Barcode CSV, Betti JSON or lifespan CSV path (stdout when omitted).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Also write the Betti curve CSV in barcode mode.
    #[arg(long)]
    pub betti_curve: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let invocation = invocation_string(&args);
    match run(&cli, &invocation) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_validation() || matches!(e, Error::Io(_)) {
                1
            } else {
                2
            }
        }
    }
}

fn invocation_string(args: &[OsString]) -> String {
    let mut parts = vec!["dynrecon".to_string()];
    parts.extend(args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()));
    parts.join(" ")
}

/// Splices `--key value` pairs from a `--config` file right after the
/// subcommand, so explicit flags that follow take precedence.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)?;
    let mut extra: Vec<OsString> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: format!("expected key=value in {}", path.display()),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match value {
            "true" => extra.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                extra.push(format!("--{key}").into());
                extra.push(value.into());
            }
        }
    }
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(args.len(), |i| i + 1);
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

/// Resolved configuration as `key=value` lines.
fn config_lines(global: &GlobalArgs, command: &impl Serialize) -> Vec<String> {
    let mut lines = Vec::new();
    for value in [serde_json::to_value(global), serde_json::to_value(command)].into_iter().flatten() {
        if let Value::Object(map) = value {
            for (k, v) in map {
                match v {
                    Value::Null => {}
                    Value::String(s) => lines.push(format!("{k}={s}")),
                    Value::Array(items) => {
                        if !items.is_empty() {
                            let joined: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                            lines.push(format!("{k}={}", joined.join(",")));
                        }
                    }
                    other => lines.push(format!("{k}={other}")),
                }
            }
        }
    }
    lines
}

struct Context<'a> {
    invocation: &'a str,
    config: Vec<String>,
}

impl Context<'_> {
    fn header(&self) -> Vec<String> {
        let mut h = vec![format!("invocation: {}", self.invocation)];
        h.extend(self.config.iter().cloned());
        h
    }

    fn write_header(&self, w: &mut dyn Write, extra: &[(String, String)]) -> io::Result<()> {
        for line in self.header() {
            writeln!(w, "# {line}")?;
        }
        for (k, v) in extra {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }

    fn json(&self, mut value: Value) -> Value {
        if let Value::Object(map) = &mut value {
            map.insert("invocation".into(), Value::String(self.invocation.to_string()));
        }
        value
    }
}

/// Writes to `path` in one piece, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => io::stdout().write_all(body)?,
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Degenerate(e.to_string()))?;
    text.push('\n');
    emit(path, text.as_bytes())
}

pub fn run(cli: &Cli, invocation: &str) -> Result<()> {
    if cli.global.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    let config = match &cli.command {
        Command::Generate(a) => config_lines(&cli.global, a),
        Command::Sweep(a) => config_lines(&cli.global, a),
        Command::SelectParams(a) => config_lines(&cli.global, a),
        Command::Forecast(a) => config_lines(&cli.global, a),
        Command::Wpe(a) => config_lines(&cli.global, a),
        Command::Topology(a) => config_lines(&cli.global, a),
    };
    if cli.global.dump_config {
        let mut out = config.join("\n");
        out.push('\n');
        return emit(None, out.as_bytes());
    }
    let ctx = Context { invocation, config };
    match &cli.command {
        Command::Generate(a) => run_generate(a, cli.global.seed, &ctx),
        Command::Sweep(a) => run_sweep(a, &ctx),
        Command::SelectParams(a) => run_select(a, &ctx),
        Command::Forecast(a) => run_forecast(a, &ctx),
        Command::Wpe(a) => run_wpe(a, &ctx),
        Command::Topology(a) => run_topology(a, cli.global.seed, &ctx),
    }
}

/// Parses `lo:hi` or a single value into an inclusive range.
pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("cannot parse {s:?} in range {text:?}")))
    };
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(Error::invalid(format!("range {text:?} must satisfy 1 <= lo <= hi")));
    }
    Ok(lo..=hi)
}

fn run_generate(a: &GenerateArgs, seed: u64, ctx: &Context) -> Result<()> {
    let mut buf = Vec::new();
    let mut traj_buf = None;
    match a.system {
        SystemKind::Lorenz63 | SystemKind::Lorenz96 | SystemKind::Rossler => {
            let flow = match a.system {
                SystemKind::Lorenz63 => match Flow::lorenz63() {
                    Flow::Lorenz63 { sigma, rho, beta } => Flow::Lorenz63 {
                        sigma: a.a.unwrap_or(sigma),
                        rho: a.b.unwrap_or(rho),
                        beta: a.c.unwrap_or(beta),
                    },
                    f => f,
                },
                SystemKind::Rossler => match Flow::rossler() {
                    Flow::Rossler { a: pa, b: pb, c: pc } => Flow::Rossler {
                        a: a.a.unwrap_or(pa),
                        b: a.b.unwrap_or(pb),
                        c: a.c.unwrap_or(pc),
                    },
                    f => f,
                },
                _ => Flow::lorenz96(a.sites, a.forcing),
            };
            let spec = FlowSpec {
                flow,
                dt: a.dt,
                steps: a.steps,
                transient: a.transient.unwrap_or(10_000),
                observed_index: a.observe,
            };
            spec.validate()?;
            let x0 = if a.x0.is_empty() { random_flow_initial(&flow, seed) } else { a.x0.clone() };
            let traj = generate_flow_trajectory(&spec, &x0)?;
            let values: Vec<f64> = traj.iter().map(|p| p[a.observe]).collect();
            let series = ScalarSeries::with_interval(values, a.dt)?;
            write_series(&mut buf, &series, &ctx.header())?;
            if a.trajectory.is_some() {
                let mut t = Vec::new();
                ctx.write_header(&mut t, &[])?;
                traj.write_csv(&mut t)?;
                traj_buf = Some(t);
            }
        }
        SystemKind::Henon | SystemKind::Logistic => {
            if a.trajectory.is_some() {
                return Err(Error::invalid("--trajectory is only available for flows"));
            }
            let map = match a.system {
                SystemKind::Henon => match Map::henon() {
                    Map::Henon { a: pa, b: pb } => Map::Henon { a: a.a.unwrap_or(pa), b: a.b.unwrap_or(pb) },
                    m => m,
                },
                _ => Map::logistic(a.r),
            };
            let x0 = if a.x0.is_empty() { random_map_initial(&map, seed) } else { a.x0.clone() };
            let spec = MapSpec { map, x0, n: a.n, transient: a.transient.unwrap_or(0) };
            let series = generate_map_trace(&spec)?;
            write_series(&mut buf, &series, &ctx.header())?;
        }
    }
    emit(Some(&a.output), &buf)?;
    if let (Some(path), Some(t)) = (&a.trajectory, traj_buf) {
        emit(Some(path), &t)?;
    }
    Ok(())
}

fn run_sweep(a: &SweepArgs, ctx: &Context) -> Result<()> {
    let m_range = parse_range(&a.m)?;
    let tau_range = parse_range(&a.tau)?;
    if a.h == 0 || a.k == 0 || a.max_samples == 0 {
        return Err(Error::invalid("h, k and max-samples must be at least 1"));
    }
    if !(a.split > 0.0 && a.split < 1.0) {
        return Err(Error::invalid(format!("split must lie in (0, 1), got {}", a.split)));
    }
    let series = load_series(&a.input)?;
    let values = series.values();
    let grid = match a.mode {
        SweepMode::Atau => atau_surface(values, m_range, tau_range, a.h, a.k, a.max_samples),
        SweepMode::Mase => {
            let mut g = SweepGrid::evaluate(m_range, tau_range, |m, tau| {
                rolling_evaluate(values, a.split, &Method::Lma { m, tau, theiler: a.theiler }, a.h)
                    .map(|r| r.score.value)
            });
            g.metadata.push(("quantity".into(), "h_mase".into()));
            g.metadata.push(("h".into(), a.h.to_string()));
            g.metadata.push(("split".into(), a.split.to_string()));
            g.metadata.push(("theiler".into(), a.theiler.to_string()));
            g
        }
    };
    let mut buf = Vec::new();
    ctx.write_header(&mut buf, &[])?;
    grid.write_csv(&mut buf)?;
    for (m, tau, msg) in &grid.failures {
        eprintln!("warning: cell m={m} tau={tau} failed: {msg}");
    }
    if let Some(path) = &a.best {
        let (cell, criterion) = match a.mode {
            SweepMode::Atau => (grid.argmax(), "max"),
            SweepMode::Mase => (grid.argmin(), "min"),
        };
        let cell = cell.ok_or(Error::EmptyGrid)?;
        let v = ctx.json(json!({ "m": cell.m, "tau": cell.tau, "value": cell.value, "criterion": criterion }));
        emit(a.output.as_deref(), &buf)?;
        return emit_json(Some(path), &v);
    }
    emit(a.output.as_deref(), &buf)
}

fn choice_json(ctx: &Context, c: &ParamChoice) -> Value {
    ctx.json(json!({ "method": c.method.name(), "m": c.m, "tau": c.tau, "score": c.score }))
}

fn run_select(a: &SelectArgs, ctx: &Context) -> Result<()> {
    let fnn = FnnConfig { r_tol: a.r_tol, a_tol: a.a_tol, fraction_threshold: a.fnn_threshold, m_max: a.m_max };
    if a.method == SelectMethod::Fnn {
        fnn.validate()?;
    }
    let series = load_series(&a.input)?;
    let x = series.values();
    let mut curve = Vec::new();
    ctx.write_header(&mut curve, &[])?;
    let choice = match a.method {
        SelectMethod::FirstMinMi => {
            if a.curve.is_some() {
                writeln!(curve, "tau,mi_bits")?;
                for (tau, v) in td_mutual_information_curve(x, a.tau_max, a.bins)? {
                    writeln!(curve, "{tau},{v}")?;
                }
            }
            tau_first_min_mi(x, a.tau_max, a.bins)?
        }
        SelectMethod::FirstZeroAutocorr => {
            if a.curve.is_some() {
                writeln!(curve, "tau,autocorrelation")?;
                for tau in 0..=a.tau_max.min(x.len().saturating_sub(1)) {
                    writeln!(curve, "{tau},{}", autocorrelation(x, tau)?)?;
                }
            }
            tau_first_zero_autocorr(x, a.tau_max)?
        }
        SelectMethod::Fnn => {
            let tau = match a.delay {
                Some(t) => t,
                None => tau_first_min_mi(x, a.tau_max, a.bins)?.tau,
            };
            if a.curve.is_some() {
                writeln!(curve, "m,fnn_fraction")?;
                for m in 1..=a.m_max {
                    writeln!(curve, "{m},{}", fnn_fraction(x, m, tau, &fnn)?)?;
                }
            }
            estimate_m_fnn(x, tau, &fnn)?
        }
        SelectMethod::AtauOptimal => {
            let (choice, grid) = atau_optimal_params(x, parse_range(&a.m)?, parse_range(&a.tau)?, a.h, a.k)?;
            grid.write_csv(&mut curve)?;
            choice
        }
    };
    if let Some(path) = &a.curve {
        emit(Some(path), &curve)?;
    }
    emit_json(a.output.as_deref(), &choice_json(ctx, &choice))
}

fn run_forecast(a: &ForecastArgs, ctx: &Context) -> Result<()> {
    let method = match a.method {
        ForecastMethod::RandomWalk => Method::RandomWalk,
        ForecastMethod::Naive => Method::Naive,
        ForecastMethod::Lma => Method::Lma { m: a.m, tau: a.tau, theiler: a.theiler },
        ForecastMethod::Ar => Method::Ar { order: a.order, refit_every: a.refit_every },
    };
    method.validate()?;
    let series = load_series(&a.input)?;
    let run = rolling_evaluate(series.values(), a.split, &method, a.h)?;
    let params = match method {
        Method::Lma { m, tau, theiler } => json!({ "m": m, "tau": tau, "theiler": theiler }),
        Method::Ar { order, refit_every } => json!({ "order": order, "refit_every": refit_every }),
        _ => json!({}),
    };
    let metadata: serde_json::Map<String, Value> =
        run.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let summary = ctx.json(json!({
        "method": method.name(),
        "params": params,
        "h": run.h,
        "n_train": run.train_length,
        "n_test": run.truth.len(),
        "h_mase": run.score.value,
        "scaling_denominator": run.score.scaling_denominator,
        "metadata": metadata,
    }));
    if let Some(path) = &a.predictions {
        let mut buf = Vec::new();
        ctx.write_header(&mut buf, &[])?;
        writeln!(buf, "index,prediction,truth")?;
        for (j, (p, c)) in run.predictions.iter().zip(&run.truth).enumerate() {
            writeln!(buf, "{},{p:.16e},{c:.16e}", run.train_length + j)?;
        }
        emit(Some(path), &buf)?;
    }
    emit_json(a.output.as_deref(), &summary)
}

fn run_wpe(a: &WpeArgs, ctx: &Context) -> Result<()> {
    let series = load_series(&a.input)?;
    let x = series.values();
    let ell = a.ell.unwrap_or_else(|| choose_word_length(x.len()));
    let normalized = !a.unnormalized;
    let pe = permutation_entropy(x, ell, normalized)?;
    let wpe = weighted_permutation_entropy(x, ell, normalized)?;
    emit_json(
        a.output.as_deref(),
        &ctx.json(json!({ "pe": pe, "wpe": wpe, "ell": ell, "normalized": normalized })),
    )
}

fn landmark_strategy(arg: LandmarkArg, seed: u64) -> LandmarkStrategy {
    match arg {
        LandmarkArg::EquallySpaced => LandmarkStrategy::EquallySpaced,
        LandmarkArg::MaxMin => LandmarkStrategy::MaxMin,
        LandmarkArg::Random => LandmarkStrategy::Random(seed),
    }
}

fn check_xi(name: &str, xi: f64) -> Result<()> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("{name} must be a finite nonnegative number, got {xi}")));
    }
    Ok(())
}

fn run_topology(a: &TopologyArgs, seed: u64, ctx: &Context) -> Result<()> {
    let m_range = parse_range(&a.m)?;
    if a.tau == 0 {
        return Err(Error::invalid("tau must be at least 1"));
    }
    if a.mode == TopologyMode::Lifespan {
        check_xi("xi", a.xi)?;
        let input = a
            .input
            .as_ref()
            .ok_or_else(|| Error::invalid("lifespan mode needs a scalar series (--input)"))?;
        let series = load_series(input)?;
        let diagram = edge_lifespan_diagram(series.values(), m_range, a.tau, a.xi, a.ell)?;
        let mut buf = Vec::new();
        ctx.write_header(&mut buf, &[])?;
        write_lifespan_csv(&mut buf, &diagram)?;
        return emit(a.output.as_deref(), &buf);
    }
    if m_range.start() != m_range.end() {
        return Err(Error::invalid("barcode and betti modes take a single --m"));
    }
    let m = *m_range.start();
    let (witnesses, diameter) = match (&a.input, &a.cloud) {
        (Some(p), None) => {
            let series = load_series(p)?;
            let rec = reconstruct_values(series.values(), m, a.tau)?;
            (rec.into_points(), reconstruction_diameter(series.values(), m)?)
        }
        (None, Some(p)) => {
            let cloud = PointCloud::load_csv(p)?;
            let d = scaled_epsilon(1.0, &cloud)?;
            (cloud, d)
        }
        _ => return Err(Error::invalid("give exactly one of --input or --cloud")),
    };
    let landmarks = select_landmarks(&witnesses, a.ell, landmark_strategy(a.landmarks, seed))?;
    let extra = vec![("diameter".to_string(), diameter.to_string())];
    match a.mode {
        TopologyMode::Betti => {
            check_xi("xi", a.xi)?;
            let filt = WitnessFiltration::new(&witnesses, &landmarks.points(&witnesses))?;
            let eps = a.xi * diameter;
            let snap = filt.snapshot(eps)?;
            let b = betti_numbers(&snap);
            let v = ctx.json(json!({
                "xi": a.xi, "epsilon": eps, "b0": b.b0, "b1": b.b1,
                "vertices": snap.vertices, "edges": snap.edges.len(), "triangles": snap.triangles.len(),
            }));
            emit_json(a.output.as_deref(), &v)
        }
        TopologyMode::Barcode => {
            check_xi("xi-min", a.xi_min)?;
            check_xi("xi-max", a.xi_max)?;
            if a.xi_grid == 0 || !(a.xi_min > 0.0 && a.xi_min < a.xi_max) {
                return Err(Error::invalid("need xi-grid >= 1 and 0 < xi-min < xi-max"));
            }
            let xis: Vec<f64> = if a.xi_grid == 1 {
                vec![a.xi_min]
            } else {
                let ratio = (a.xi_max / a.xi_min).powf(1.0 / (a.xi_grid - 1) as f64);
                (0..a.xi_grid).map(|i| a.xi_min * ratio.powi(i as i32)).collect()
            };
            let eps: Vec<f64> = xis.iter().map(|x| x * diameter).collect();
            let filt = WitnessFiltration::new(&witnesses, &landmarks.points(&witnesses))?;
            let bc = epsilon_barcode(&filt, &eps)?;
            let mut buf = Vec::new();
            ctx.write_header(&mut buf, &extra)?;
            write_barcode_csv(&mut buf, &[&bc.dim0, &bc.dim1])?;
            if let Some(path) = &a.betti_curve {
                let mut c = Vec::new();
                ctx.write_header(&mut c, &extra)?;
                write_betti_csv(&mut c, &bc.curve)?;
                emit(Some(path), &c)?;
            }
            emit(a.output.as_deref(), &buf)
        }
        TopologyMode::Lifespan => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:8").unwrap(), 1..=8);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("0:3").is_err());
        assert!(parse_range("5:3").is_err());
        assert!(parse_range("a:3").is_err());
    }

    #[test]
    fn config_splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# comment\nm=1:3\nunnormalized=true\nsplit=false\n").unwrap();
        let args: Vec<OsString> = ["dynrecon", "sweep", "--config", cfg.to_str().unwrap(), "--m", "2"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = expand_config(args).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[..5], &["dynrecon", "sweep", "--m", "1:3", "--unnormalized"]);
        assert_eq!(s.last().unwrap(), "2");
    }
}
