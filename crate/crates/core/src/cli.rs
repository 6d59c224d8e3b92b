//! Command-line front end. Every command writes CSV (to `--out` or stdout)
//! and, when writing a file, a `<out>.manifest.json` beside it.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{self, CaptureSemantics, LoadPoint, SystemConfig, DEFAULT_TAIL_TOL};
use crate::barring::{self, ScenarioConfig};
use crate::error::{Error, Result};
use crate::optimizer::{self, DEFAULT_TOL};
use crate::simulator::{self, ArrivalModel, Scheme, StatsAccumulator, TraceWriter};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "noma-ra",
    version,
    about = "NOMA random-access throughput and user barring lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized throughput versus offered load.
    Curves(CurvesArgs),
    /// Optimal load, maximum throughput, idle threshold and gain.
    Optimal(OptimalArgs),
    /// Monte Carlo run at a fixed load.
    Simulate(SimulateArgs),
    /// Closed-loop user barring scenario from a JSON config.
    Barring(BarringArgs),
    /// Maximum-throughput gain table against MS-ALOHA with and without capture.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Poisson,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Noma,
    Msaloha,
    Capture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SemanticsArg {
    #[default]
    Physical,
    Paper,
}

impl From<SemanticsArg> for CaptureSemantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Physical => CaptureSemantics::Physical,
            SemanticsArg::Paper => CaptureSemantics::PaperFormula,
        }
    }
}

/// `min:max:step`, inclusive of `max` when it lies on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as u64;
        (0..=count)
            .map(|i| self.min + i as f64 * self.step)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts.as_slice() else {
            return Err(format!("expected min:max:step, got `{s}`"));
        };
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        let grid = Grid {
            min: parse(min)?,
            max: parse(max)?,
            step: parse(step)?,
        };
        if !(grid.min >= 0.0 && grid.min < grid.max && grid.step > 0.0 && grid.max.is_finite()) {
            return Err("grid needs 0 <= min < max and step > 0".into());
        }
        Ok(grid)
    }
}

/// A single level count `4` or an inclusive range `1..12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub first: u32,
    pub last: u32,
}

impl LevelRange {
    fn is_single(&self) -> bool {
        self.first == self.last
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if first == 0 || first > last {
            return Err("level range needs 1 <= first <= last".into());
        }
        Ok(LevelRange { first, last })
    }
}

/// `poisson:<rate per level>` or `binomial:<users>[,<access probability>]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalSpec(pub ArrivalModel);

impl FromStr for ArrivalSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            format!("expected poisson:<rate> or binomial:<users>[,<p>], got `{s}`")
        })?;
        let model = match kind {
            "poisson" => {
                let lambda = rest
                    .parse::<f64>()
                    .map_err(|e| format!("rate `{rest}`: {e}"))?;
                ArrivalModel::PoissonPerLevel { lambda }
            }
            "binomial" => {
                let (u, p) = rest.split_once(',').unwrap_or((rest, "1.0"));
                let users = u
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| format!("users `{u}`: {e}"))?;
                let p_access = p
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| format!("access probability `{p}`: {e}"))?;
                ArrivalModel::BernoulliUsers { users, p_access }
            }
            other => return Err(format!("unknown arrival model `{other}`")),
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(ArrivalSpec(model))
    }
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, value_enum, default_value = "poisson")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "noma")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value_t = 4)]
    pub l: u32,
    /// Offered load per channel, `min:max:step`.
    #[arg(long, default_value = "0:6:0.05")]
    pub grid: Grid,
    #[arg(long, value_enum, default_value = "physical")]
    pub capture_semantics: SemanticsArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    /// Level count, or an inclusive sweep such as `1..12`.
    #[arg(long, default_value = "4")]
    pub l: LevelRange,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "noma")]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "physical")]
    pub capture_semantics: SemanticsArg,
    #[arg(long)]
    pub arrivals: ArrivalSpec,
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value_t = 4)]
    pub l: u32,
    #[arg(long, default_value_t = 100_000)]
    pub slots: u64,
    #[arg(long, env = "NOMA_RA_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-channel slot trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BarringArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's `barring` flag.
    #[arg(long)]
    pub barring: Option<bool>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "1..12")]
    pub l: LevelRange,
    #[arg(long, value_enum, default_value = "physical")]
    pub capture_semantics: SemanticsArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub output_paths: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            output_paths: Vec::new(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Stdout wrapper that drops output once the reader has gone away, so
/// `noma-ra curves | head` ends quietly.
struct ClosedPipeSink<W: Write> {
    inner: W,
    closed: bool,
}

impl<W: Write> Write for ClosedPipeSink<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if self.closed {
            return Ok(buf.len());
        }
        match self.inner.write(buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(buf.len())
            }
            other => other,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        if self.closed {
            return Ok(());
        }
        match self.inner.flush() {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(())
            }
            other => other,
        }
    }
}

/// Writes `body` to `out` (or stdout) and the manifest beside the file.
fn emit(
    out: Option<&Path>,
    mut manifest: RunManifest,
    extra_outputs: &[&Path],
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
            manifest.output_paths.push(path.display().to_string());
            manifest
                .output_paths
                .extend(extra_outputs.iter().map(|p| p.display().to_string()));
            let text = serde_json::to_string_pretty(&manifest)
                .map_err(|e| Error::internal(format!("manifest: {e}")))?;
            std::fs::write(manifest_path(path), text + "\n")?;
        }
        None => {
            let mut w = ClosedPipeSink {
                inner: io::stdout().lock(),
                closed: false,
            };
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curves(a) => cmd_curves(&a),
        Command::Optimal(a) => cmd_optimal(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Barring(a) => cmd_barring(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

/// Process exit status for an error: 2 for usage and configuration
/// problems, 3 for violated internal post-conditions.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Internal(_) => 3,
        Error::Domain(_) | Error::Config(_) | Error::Io(_) => 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub load: f64,
    pub normalized_throughput: f64,
}

/// Analytic curve rows. Binomial loads are snapped to whole user counts
/// `U = round(load·N)`, one row per distinct `U`.
pub fn curve_points(
    model: ModelArg,
    scheme: SchemeArg,
    cfg: &SystemConfig,
    grid: &Grid,
    semantics: CaptureSemantics,
) -> Vec<CurvePoint> {
    let nf = f64::from(cfg.n_channels());
    let lf = f64::from(cfg.n_levels());
    match model {
        ModelArg::Poisson => grid
            .points()
            .into_iter()
            .map(|load| {
                let t = match scheme {
                    SchemeArg::Noma => analytic::throughput_poisson(load / lf, cfg),
                    SchemeArg::Msaloha => {
                        analytic::throughput_msaloha(LoadPoint::Poisson { lambda: load }, cfg)
                    }
                    SchemeArg::Capture => analytic::capture_throughput_poisson_with(
                        load,
                        cfg,
                        DEFAULT_TAIL_TOL,
                        semantics,
                    ),
                };
                CurvePoint {
                    load,
                    normalized_throughput: t / nf,
                }
            })
            .collect(),
        ModelArg::Binomial => {
            let mut users: Vec<u64> = grid
                .points()
                .into_iter()
                .map(|load| (load * nf).round() as u64)
                .collect();
            users.dedup();
            users
                .into_iter()
                .map(|u| {
                    let t = match scheme {
                        SchemeArg::Noma => analytic::throughput_binomial(u, cfg),
                        SchemeArg::Msaloha => {
                            analytic::throughput_msaloha(LoadPoint::Binomial { users: u }, cfg)
                        }
                        SchemeArg::Capture => {
                            analytic::capture_throughput_binomial_with(u, cfg, semantics)
                        }
                    };
                    CurvePoint {
                        load: u as f64 / nf,
                        normalized_throughput: t / nf,
                    }
                })
                .collect()
        }
    }
}

fn cmd_curves(a: &CurvesArgs) -> Result<()> {
    let cfg = SystemConfig::new(a.n, a.l)?;
    let points = curve_points(a.model, a.scheme, &cfg, &a.grid, a.capture_semantics.into());
    let manifest = RunManifest::new("curves", None)
        .param("model", format!("{:?}", a.model).to_lowercase())
        .param("scheme", format!("{:?}", a.scheme).to_lowercase())
        .param("n", a.n)
        .param("l", a.l)
        .param(
            "grid",
            format!("{}:{}:{}", a.grid.min, a.grid.max, a.grid.step),
        )
        .param(
            "capture_semantics",
            format!("{:?}", a.capture_semantics).to_lowercase(),
        );
    emit(a.out.as_deref(), manifest, &[], |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["load", "normalized_throughput"])?;
        for p in &points {
            csv.write_record([p.load.to_string(), p.normalized_throughput.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRow {
    pub l: u32,
    pub lambda_star: f64,
    pub channel_load_star: f64,
    pub max_norm_throughput: f64,
    pub idle_threshold: f64,
    pub population_idle_threshold: f64,
    pub u_star: u64,
    pub gain: f64,
}

pub fn optimal_row(n: u32, l: u32, tol: f64) -> Result<OptimalRow> {
    let cfg = SystemConfig::new(n, l)?;
    let opt = optimizer::optimal_lambda(&cfg, tol)?;
    let max_norm_throughput = opt.normalized_max_throughput(&cfg);
    Ok(OptimalRow {
        l,
        lambda_star: opt.lambda_star,
        channel_load_star: opt.channel_load_star,
        max_norm_throughput,
        idle_threshold: opt.idle_threshold,
        population_idle_threshold: opt.population_idle_threshold,
        u_star: opt.u_star,
        gain: max_norm_throughput / (-1.0f64).exp(),
    })
}

fn cmd_optimal(a: &OptimalArgs) -> Result<()> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::Config("tol: must be positive".into()));
    }
    let rows = (a.l.first..=a.l.last)
        .map(|l| optimal_row(a.n, l, a.tol))
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest::new("optimal", None)
        .param("n", a.n)
        .param("l", format!("{}..{}", a.l.first, a.l.last))
        .param("tol", a.tol);
    let single = a.l.is_single();
    emit(a.out.as_deref(), manifest, &[], |w| {
        if single {
            let r = &rows[0];
            writeln!(w, "n = {}", a.n)?;
            writeln!(w, "l = {}", r.l)?;
            writeln!(w, "lambda_star = {}", r.lambda_star)?;
            writeln!(w, "channel_load_star = {}", r.channel_load_star)?;
            writeln!(w, "max_norm_throughput = {}", r.max_norm_throughput)?;
            writeln!(w, "idle_threshold = {}", r.population_idle_threshold)?;
            writeln!(w, "idle_threshold_poisson = {}", r.idle_threshold)?;
            writeln!(w, "u_star = {}", r.u_star)?;
            writeln!(w, "gain = {}", r.gain)?;
            return Ok(());
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "l",
            "lambda_star",
            "channel_load_star",
            "max_norm_throughput",
            "gain",
        ])?;
        for r in &rows {
            csv.write_record([
                r.l.to_string(),
                r.lambda_star.to_string(),
                r.channel_load_star.to_string(),
                r.max_norm_throughput.to_string(),
                r.gain.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn scheme_of(scheme: SchemeArg, semantics: SemanticsArg) -> Scheme {
    match scheme {
        SchemeArg::Noma => Scheme::NomaRa,
        SchemeArg::Msaloha => Scheme::MsAloha,
        SchemeArg::Capture => Scheme::MsAlohaCapture(semantics.into()),
    }
}

fn arrivals_label(model: &ArrivalModel) -> String {
    match *model {
        ArrivalModel::PoissonPerLevel { lambda } => format!("poisson:{lambda}"),
        ArrivalModel::BernoulliUsers { users, p_access } => format!("binomial:{users},{p_access}"),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    if a.slots == 0 {
        return Err(Error::Config("slots: must be positive".into()));
    }
    let cfg = SystemConfig::new(a.n, a.l)?;
    let model = a.arrivals.0;
    let scheme = scheme_of(a.scheme, a.capture_semantics);
    let mut acc = StatsAccumulator::default();
    let mut trace = match &a.trace {
        Some(p) => Some(TraceWriter::new(BufWriter::new(File::create(p)?))?),
        None => None,
    };
    let stream = simulator::slot_stream(cfg, model, scheme, a.seed)?;
    for (t, slot) in stream.take(a.slots as usize).enumerate() {
        acc.push(&slot);
        if let Some(tw) = trace.as_mut() {
            tw.write_slot(t as u64, &slot)?;
        }
    }
    if let Some(tw) = trace {
        tw.finish()?;
    }
    let stats = acc.finish();
    let load = match model {
        ArrivalModel::PoissonPerLevel { lambda } => lambda * f64::from(a.l),
        ArrivalModel::BernoulliUsers { users, p_access } => {
            users as f64 * p_access / f64::from(a.n)
        }
    };
    let scheme_name = format!("{:?}", a.scheme).to_lowercase();
    let manifest = RunManifest::new("simulate", Some(a.seed))
        .param("scheme", &scheme_name)
        .param(
            "capture_semantics",
            format!("{:?}", a.capture_semantics).to_lowercase(),
        )
        .param("arrivals", arrivals_label(&model))
        .param("n", a.n)
        .param("l", a.l)
        .param("slots", a.slots);
    let extra: Vec<&Path> = a.trace.iter().map(PathBuf::as_path).collect();
    emit(a.out.as_deref(), manifest, &extra, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "scheme",
            "n",
            "l",
            "load",
            "slots",
            "seed",
            "mean_norm_throughput",
            "idle_freq",
            "std_err",
        ])?;
        csv.write_record([
            scheme_name.clone(),
            a.n.to_string(),
            a.l.to_string(),
            load.to_string(),
            stats.slots.to_string(),
            a.seed.to_string(),
            stats.mean_normalized_throughput.to_string(),
            stats.idle_channel_frequency.to_string(),
            stats.std_error.to_string(),
        ])?;
        csv.flush()?;
        Ok(())
    })
}

fn cmd_barring(a: &BarringArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Config(format!("{}: {e}", a.config.display())))?;
    let mut scenario = ScenarioConfig::from_json(&text)?;
    if let Some(b) = a.barring {
        scenario.barring = b;
    }
    if let Some(s) = a.seed {
        scenario.seed = s;
    }
    let records = scenario.run()?;
    let schedule: Vec<String> = scenario
        .schedule
        .iter()
        .map(|b| format!("{}x{}", b.slots, b.users))
        .collect();
    let manifest = RunManifest::new("barring", Some(scenario.seed))
        .param("config", a.config.display())
        .param("n", scenario.n)
        .param("l", scenario.l)
        .param("period_slots", scenario.period_slots)
        .param("u_max", scenario.u_max)
        .param("barring", scenario.barring)
        .param("schedule", schedule.join(";"));
    emit(a.out.as_deref(), manifest, &[], |w| {
        barring::write_records_csv(&records, w)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub l: u32,
    pub noma: f64,
    pub msaloha: f64,
    pub capture: f64,
}

/// Largest per-channel capture throughput under Poisson load, by a grid scan
/// over `(0, 12]` refined with golden-section search around the best cell.
pub fn capture_max_norm_throughput(l: u32, semantics: CaptureSemantics) -> f64 {
    let cfg = SystemConfig::new(1, l).expect("level count must be at least 1");
    let f = |lambda: f64| {
        analytic::capture_throughput_poisson_with(lambda, &cfg, DEFAULT_TAIL_TOL, semantics)
    };
    let step = 0.01;
    let best = (1..=1200)
        .map(|i| i as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("non-empty grid");
    let (mut lo, mut hi) = ((best - step).max(0.0), best + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    f(0.5 * (lo + hi)).max(f(best))
}

pub fn compare_rows(levels: LevelRange, semantics: CaptureSemantics) -> Vec<CompareRow> {
    let msaloha = (-1.0f64).exp();
    (levels.first..=levels.last)
        .map(|l| CompareRow {
            l,
            noma: optimizer::max_gain_ratio(l) * msaloha,
            msaloha,
            capture: capture_max_norm_throughput(l, semantics),
        })
        .collect()
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let rows = compare_rows(a.l, a.capture_semantics.into());
    let manifest = RunManifest::new("compare", None)
        .param("l", format!("{}..{}", a.l.first, a.l.last))
        .param(
            "capture_semantics",
            format!("{:?}", a.capture_semantics).to_lowercase(),
        );
    emit(a.out.as_deref(), manifest, &[], |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "l",
            "noma_max_norm_throughput",
            "msaloha_max_norm_throughput",
            "capture_max_norm_throughput",
            "gain_vs_msaloha",
            "gain_vs_capture",
        ])?;
        for r in &rows {
            csv.write_record([
                r.l.to_string(),
                r.noma.to_string(),
                r.msaloha.to_string(),
                r.capture.to_string(),
                (r.noma / r.msaloha).to_string(),
                (r.noma / r.capture).to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Hangup;

    impl Write for Hangup {
        fn write(&mut self, _: &[u8]) -> io::Result<usize> {
            Err(io::ErrorKind::BrokenPipe.into())
        }
        fn flush(&mut self) -> io::Result<()> {
            Err(io::ErrorKind::BrokenPipe.into())
        }
    }

    #[test]
    fn closed_pipe_is_not_an_error() {
        let mut w = ClosedPipeSink {
            inner: Hangup,
            closed: false,
        };
        assert!(writeln!(w, "a,b").is_ok());
        assert!(w.closed);
        assert!(w.flush().is_ok());
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:6:0.05".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 121);
        assert!((pts[120] - 6.0).abs() < 1e-9);
        assert!("1:1:0.1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("a:1:0.1".parse::<Grid>().is_err());
    }

    #[test]
    fn level_range_parsing() {
        assert_eq!(
            "4".parse::<LevelRange>().unwrap(),
            LevelRange { first: 4, last: 4 }
        );
        assert_eq!(
            "1..12".parse::<LevelRange>().unwrap(),
            LevelRange { first: 1, last: 12 }
        );
        assert!("0".parse::<LevelRange>().is_err());
        assert!("5..2".parse::<LevelRange>().is_err());
    }

    #[test]
    fn arrival_parsing() {
        assert_eq!(
            "poisson:0.65".parse::<ArrivalSpec>().unwrap().0,
            ArrivalModel::PoissonPerLevel { lambda: 0.65 }
        );
        assert_eq!(
            "binomial:1,1.0".parse::<ArrivalSpec>().unwrap().0,
            ArrivalModel::BernoulliUsers {
                users: 1,
                p_access: 1.0
            }
        );
        assert_eq!(
            "binomial:26".parse::<ArrivalSpec>().unwrap().0,
            ArrivalModel::BernoulliUsers {
                users: 26,
                p_access: 1.0
            }
        );
        assert!("binomial:3,1.5".parse::<ArrivalSpec>().is_err());
        assert!("poisson:-1".parse::<ArrivalSpec>().is_err());
        assert!("uniform:3".parse::<ArrivalSpec>().is_err());
        assert!("poisson".parse::<ArrivalSpec>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
        assert_eq!(exit_code(&Error::Internal("x".into())), 3);
    }

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(
            manifest_path(Path::new("/tmp/out.csv")),
            PathBuf::from("/tmp/out.csv.manifest.json")
        );
    }

    #[test]
    fn binomial_curve_snaps_to_user_counts() {
        let cfg = SystemConfig::new(10, 4).unwrap();
        let grid: Grid = "0:1:0.05".parse().unwrap();
        let pts = curve_points(
            ModelArg::Binomial,
            SchemeArg::Noma,
            &cfg,
            &grid,
            CaptureSemantics::Physical,
        );
        assert_eq!(pts.first().unwrap().load, 0.0);
        assert_eq!(pts.last().unwrap().load, 1.0);
        assert!(pts.windows(2).all(|w| w[0].load < w[1].load));
    }
}
