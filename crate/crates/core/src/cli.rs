//! Command-line front end.
//!
//! Every subcommand writes its main table to `--out FILE` (or stdout) and,
//! when writing a file, a `FILE.manifest.json` next to it. The manifest holds
//! the fully resolved argument list, so `rankdyn replay FILE.manifest.json`
//! regenerates the file byte for byte. Secondary output (summaries, fixed
//! point reports, validation tables) goes to `FILE.summary.json` or stderr.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! numerical failures.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{convergence_table, large_n_limit, validate_pq, PQSequenceFamily};
use crate::distrib::{fmt_f64, parse_f64, uniform_grid, DistributionSpec, SampledCdf, DEFAULT_GRID};
use crate::dynamics::{Mode, RankSystem, Stability, WeightVector, DEFAULT_SCAN_GRID, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exact::{
    compare_means, comparison_table, exact_limit_cdf, second_orderstat_mean,
    second_orderstat_mean_by_quadrature,
};
use crate::mc::{ks_distance, run_detailed, SimConfig, SimMode, DEFAULT_STRIDE};
use crate::orderstats::OrderStatContext;
use crate::presets::preset;

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "RANKDYN_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Driver mini-language: `uniform`, `power:EXP`, `atoms:l1=w1,l2=w2`,
/// `table:PATH` (a CSV with header `x,cdf`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DriverSpec {
    Uniform,
    Power(f64),
    Atoms(Vec<(f64, f64)>),
    Table(PathBuf),
}

impl fmt::Display for DriverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverSpec::Uniform => f.write_str("uniform"),
            DriverSpec::Power(e) => write!(f, "power:{e}"),
            DriverSpec::Atoms(atoms) => {
                f.write_str("atoms:")?;
                for (i, (l, w)) in atoms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}={w}")?;
                }
                Ok(())
            }
            DriverSpec::Table(p) => write!(f, "table:{}", p.display()),
        }
    }
}

impl FromStr for DriverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("malformed driver {s:?}: {why}"));
        let num = |t: &str| parse_f64(t.trim()).map_err(|_| bad(&format!("{t:?} is not a number")));
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        match (kind, rest) {
            ("uniform", None) => Ok(DriverSpec::Uniform),
            ("power", Some(e)) => {
                let e = num(e)?;
                if !(e > 0.0 && e.is_finite()) {
                    return Err(bad("exponent must be positive"));
                }
                Ok(DriverSpec::Power(e))
            }
            ("atoms", Some(list)) => {
                let atoms = list
                    .split(',')
                    .map(|pair| {
                        let (l, w) = pair.split_once('=').ok_or_else(|| bad("expected loc=weight"))?;
                        Ok((num(l)?, num(w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DistributionSpec::atoms(atoms.clone()).map_err(|e| bad(&e.to_string()))?;
                Ok(DriverSpec::Atoms(atoms))
            }
            ("table", Some(p)) if !p.is_empty() => Ok(DriverSpec::Table(PathBuf::from(p))),
            _ => Err(bad("use uniform, power:EXP, atoms:l1=w1,... or table:PATH")),
        }
    }
}

impl DriverSpec {
    pub fn to_distribution(&self) -> Result<DistributionSpec> {
        match self {
            DriverSpec::Uniform => Ok(DistributionSpec::Uniform),
            DriverSpec::Power(e) => DistributionSpec::power_law(*e),
            DriverSpec::Atoms(a) => DistributionSpec::atoms(a.clone()),
            DriverSpec::Table(path) => {
                let file = File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open driver table {}: {e}", path.display())))?;
                let table = SampledCdf::read_csv(BufReader::new(file))?;
                if table.has_uniform_unit_grid() {
                    table.to_tabulated()
                } else {
                    DistributionSpec::piecewise_linear(table.xs, table.cdf)
                }
            }
        }
    }
}

fn parse_driver(s: &str) -> std::result::Result<DriverSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sim_mode(s: &str) -> std::result::Result<SimMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "rankdyn", version, about = "Limiting distributions of rank-driven dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Order-statistic polynomials on a grid of R, or composed with a driver.
    Orderstats(OrderstatsArgs),
    /// Exogenous fixed points for a list of driver values, or the endogenous
    /// fixed points with their stability and basins.
    FixedPoint(FixedPointArgs),
    /// Trajectory of the scalar map from a starting value.
    Iterate(IterateArgs),
    /// Limiting marginal CDF on a grid.
    Limit(LimitArgs),
    /// Large-n behavior of a (p,q) weight family.
    Asymptote(AsymptoteArgs),
    /// Exact min-replacement law against the independence approximation.
    Exact(ExactArgs),
    /// Monte Carlo simulation; writes the pooled empirical CDF.
    Simulate(SimArgs),
    /// Simulation together with the analytic and exact predictions.
    Compare(SimArgs),
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, Args, Serialize)]
struct OutArgs {
    /// Output file; a manifest is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct WeightArgs {
    /// Named weight profile: min-only, fig5, fig6, fig7, sqrt, uniform3.
    #[arg(long, conflicts_with = "weights", requires = "n")]
    preset: Option<String>,
    /// Population size for --preset.
    #[arg(long)]
    n: Option<usize>,
    /// Explicit comma-separated weights alpha_1,...,alpha_n.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<WeightVector> {
        match (&self.preset, &self.weights) {
            (Some(name), None) => preset(name, self.n.unwrap_or(0)),
            (None, Some(w)) => {
                if let Some(n) = self.n {
                    if n != w.len() {
                        return Err(Error::Config(format!("--n {n} but {} weights given", w.len())));
                    }
                }
                WeightVector::new(w.clone())
            }
            _ => Err(Error::Config("give either --preset NAME --n N or --weights a,b,...".into())),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct OrderstatsArgs {
    #[arg(long)]
    n: usize,
    /// Rank, counted from the lowest. Needed with `--driver`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Compose with this distribution and write its CDF instead.
    #[arg(long, value_parser = parse_driver)]
    driver: Option<DriverSpec>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct FixedPointArgs {
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    #[command(flatten)]
    weights: WeightArgs,
    /// Driver values for exogenous mode (comma-separated).
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_SCAN_GRID)]
    scan_grid: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct IterateArgs {
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long)]
    r0: f64,
    /// Driver value (exogenous mode).
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct LimitArgs {
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    #[command(flatten)]
    weights: WeightArgs,
    /// Driving distribution (exogenous) or initial distribution (endogenous).
    #[arg(long, value_parser = parse_driver, default_value = "uniform")]
    driver: DriverSpec,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct AsymptoteArgs {
    /// Weight family: fig5, sqrt or uniform3.
    #[arg(long, alias = "family")]
    preset: String,
    /// Override the claimed p.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, alias = "ladder", value_delimiter = ',', default_value = "100,400,1600,6400")]
    n_ladder: Vec<usize>,
    #[arg(long, alias = "nu", value_delimiter = ',', default_value = "0.5,0.8")]
    nu_grid: Vec<f64>,
    /// Only run the family validation.
    #[arg(long)]
    validate_only: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ExactArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_driver, default_value = "uniform")]
    driver: DriverSpec,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SimArgs {
    /// exo, endo or bak-sneppen.
    #[arg(long, value_parser = parse_sim_mode)]
    mode: SimMode,
    #[command(flatten)]
    weights: WeightArgs,
    #[arg(long, value_parser = parse_driver, default_value = "uniform")]
    driver: DriverSpec,
    /// Law of the starting population (defaults to the driver, or uniform
    /// for endogenous runs).
    #[arg(long, value_parser = parse_driver)]
    initial: Option<DriverSpec>,
    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_STRIDE)]
    stride: usize,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig> {
        let driver = Some(self.driver.to_distribution()?);
        let initial = self.initial.as_ref().map(DriverSpec::to_distribution).transpose()?;
        let (n, weights) = match self.mode {
            SimMode::BakSneppen => {
                let n = self.weights.n.ok_or_else(|| Error::Config("bak-sneppen needs --n".into()))?;
                (n, None)
            }
            _ => {
                let w = self.weights.resolve()?;
                (w.len(), Some(w))
            }
        };
        let config = SimConfig {
            n,
            weights,
            mode: self.mode,
            driver,
            initial,
            burn_in: self.burn_in,
            measure_steps: self.steps,
            stride: self.stride,
            seed: self.seed,
            replicas: self.replicas,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Resolved argument list, replayable as is.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::Config(format!("cannot open manifest {}: {e}", path.display())))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    with_suffix(out, "manifest.json")
}

pub fn summary_path(out: &Path) -> PathBuf {
    with_suffix(out, "summary.json")
}

fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Where the main table and any secondary output go.
struct Sink<'a> {
    out: Option<PathBuf>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    written: Vec<PathBuf>,
}

impl Sink<'_> {
    fn main(&mut self, body: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => {
                write_file(path, body)?;
                self.written.push(path.clone());
            }
            None => self.stdout.write_all(body)?,
        }
        Ok(())
    }

    fn summary(&mut self, value: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        match &self.out {
            Some(path) => {
                let p = summary_path(path);
                write_file(&p, text.as_bytes())?;
                self.written.push(p);
            }
            None => self.stderr.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn note(&mut self, text: &str) -> Result<()> {
        self.stderr.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(body)?;
    w.flush()?;
    Ok(())
}

fn csv_row(fields: &[f64]) -> String {
    let mut s = fields.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn sampled_csv(c: &SampledCdf) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    c.write_csv(&mut buf)?;
    Ok(buf)
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, args, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    if let Command::Replay { manifest } = &command {
        let m = RunManifest::read(manifest)?;
        let mut argv = vec!["rankdyn".to_string()];
        argv.extend(m.argv);
        let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Config(format!("manifest arguments do not parse: {e}")))?;
        if matches!(cli.command, Command::Replay { .. }) {
            return Err(Error::Config("a manifest cannot replay another manifest".into()));
        }
        return dispatch(cli.command, argv[1..].to_vec(), stdout, stderr);
    }

    let (name, out, params, seed) = describe(&command)?;
    let mut sink = Sink { out: out.clone(), stdout, stderr, written: Vec::new() };
    match command {
        Command::Orderstats(a) => orderstats(&a, &mut sink)?,
        Command::FixedPoint(a) => fixed_point(&a, &mut sink)?,
        Command::Iterate(a) => iterate(&a, &mut sink)?,
        Command::Limit(a) => limit(&a, &mut sink)?,
        Command::Asymptote(a) => asymptote(&a, &mut sink)?,
        Command::Exact(a) => exact(&a, &mut sink)?,
        Command::Simulate(a) => simulate(&a, &mut sink)?,
        Command::Compare(a) => compare(&a, &mut sink)?,
        Command::Replay { .. } => unreachable!(),
    }
    if let Some(out) = out {
        let mut argv = args;
        // Pin the seed so the manifest does not depend on the environment.
        if let Some(s) = seed {
            if !argv.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
                argv.push("--seed".into());
                argv.push(s.to_string());
            }
        }
        let manifest = RunManifest {
            subcommand: name.to_string(),
            argv,
            parameters: params,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: sink.written.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_file(&manifest_path(&out), text.as_bytes())?;
    }
    Ok(())
}

fn describe(c: &Command) -> Result<(&'static str, Option<PathBuf>, serde_json::Value, Option<u64>)> {
    use serde_json::to_value;
    Ok(match c {
        Command::Orderstats(a) => ("orderstats", a.out.out.clone(), to_value(a)?, None),
        Command::FixedPoint(a) => ("fixed-point", a.out.out.clone(), to_value(a)?, None),
        Command::Iterate(a) => ("iterate", a.out.out.clone(), to_value(a)?, None),
        Command::Limit(a) => ("limit", a.out.out.clone(), to_value(a)?, None),
        Command::Asymptote(a) => ("asymptote", a.out.out.clone(), to_value(a)?, None),
        Command::Exact(a) => ("exact", a.out.out.clone(), to_value(a)?, None),
        Command::Simulate(a) => ("simulate", a.out.out.clone(), to_value(a)?, Some(a.seed)),
        Command::Compare(a) => ("compare", a.out.out.clone(), to_value(a)?, Some(a.seed)),
        Command::Replay { .. } => ("replay", None, serde_json::Value::Null, None),
    })
}

fn orderstats(a: &OrderstatsArgs, sink: &mut Sink) -> Result<()> {
    let ctx = OrderStatContext::new(a.n)?;
    match &a.driver {
        Some(d) => {
            let k = a.k.ok_or_else(|| Error::Config("--driver needs --k".into()))?;
            let dist = ctx.order_stat_distribution(k, &d.to_distribution()?, a.grid)?;
            let table = dist.sample_cdf(a.grid)?;
            sink.main(&sampled_csv(&table)?)?;
            let atoms = dist.atom_list();
            if !atoms.is_empty() {
                sink.summary(&serde_json::json!({ "atoms": atoms }))?;
            }
        }
        None => {
            let ranks: Vec<usize> = match a.k {
                Some(k) => vec![k],
                None => (1..=a.n).collect(),
            };
            let mut body = String::from("R");
            for k in &ranks {
                body.push_str(&format!(",theta_{k}"));
            }
            body.push('\n');
            let mut row = Vec::with_capacity(ranks.len() + 1);
            for r in uniform_grid(a.grid)? {
                row.clear();
                row.push(r);
                for &k in &ranks {
                    row.push(ctx.theta(k, r)?);
                }
                body.push_str(&csv_row(&row));
            }
            sink.main(body.as_bytes())?;
        }
    }
    Ok(())
}

fn fixed_point(a: &FixedPointArgs, sink: &mut Sink) -> Result<()> {
    let sys = RankSystem::new(a.weights.resolve()?)?;
    match a.mode {
        Mode::Exo => {
            let nus = a
                .nu
                .as_ref()
                .ok_or_else(|| Error::Config("exogenous fixed points need --nu".into()))?;
            let mut body = String::from("nu,R,slope,stability\n");
            for &nu in nus {
                let r = sys.solve_exo_fixed_point(nu, a.tol)?;
                let slope = sys.exo_slope(r)?;
                let stability = if slope.abs() < 1.0 { Stability::Attracting } else { Stability::Marginal };
                body.push_str(&format!("{},{},{},{stability}\n", fmt_f64(nu), fmt_f64(r), fmt_f64(slope)));
            }
            sink.main(body.as_bytes())
        }
        Mode::Endo => {
            let report = sys.find_endo_fixed_points(a.scan_grid, a.tol)?;
            for w in &report.warnings {
                sink.note(&format!("warning: {w}\n"))?;
            }
            let mut body = String::from("R,slope,stability\n");
            for p in &report.points {
                body.push_str(&format!("{},{},{}\n", fmt_f64(p.location), fmt_f64(p.slope), p.stability));
            }
            sink.main(body.as_bytes())
        }
    }
}

fn iterate(a: &IterateArgs, sink: &mut Sink) -> Result<()> {
    let sys = RankSystem::new(a.weights.resolve()?)?;
    let path = match a.mode {
        Mode::Exo => {
            let nu = a.nu.ok_or_else(|| Error::Config("exogenous iteration needs --nu".into()))?;
            sys.iterate_exo(a.r0, nu, a.steps)?
        }
        Mode::Endo => sys.iterate_endo(a.r0, a.steps)?,
    };
    let mut body = String::from("t,r\n");
    for (t, r) in path.iter().enumerate() {
        body.push_str(&format!("{t},{}\n", fmt_f64(*r)));
    }
    sink.main(body.as_bytes())
}

fn limit(a: &LimitArgs, sink: &mut Sink) -> Result<()> {
    let sys = RankSystem::new(a.weights.resolve()?)?;
    let table = sys.limit_cdf(a.mode, &a.driver.to_distribution()?, a.grid)?;
    sink.main(&sampled_csv(&table)?)
}

fn asymptote(a: &AsymptoteArgs, sink: &mut Sink) -> Result<()> {
    let mut family = PQSequenceFamily::from_preset(&a.preset)?;
    if let Some(p) = a.p {
        family = family.with_p(p);
    }
    let report = validate_pq(&family, &a.n_ladder)?;
    sink.note(&report.to_string())?;
    if a.validate_only {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        return sink.main(text.as_bytes());
    }
    if !report.passed() {
        return Err(Error::Config(format!(
            "{} is not a (p,q) family on this ladder",
            family.name
        )));
    }
    let rows = convergence_table(&family, &a.n_ladder, &a.nu_grid)?;
    let mut body = String::from("n,nu,Rstar,limit,gap\n");
    for r in rows {
        if r.at_threshold {
            sink.note(&format!("note: nu = {} sits at the threshold p/q for n = {}\n", r.nu, r.n))?;
        }
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_f64(r.nu),
            fmt_f64(r.rstar),
            fmt_f64(r.limit),
            fmt_f64(r.gap)
        ));
    }
    sink.main(body.as_bytes())
}

fn exact(a: &ExactArgs, sink: &mut Sink) -> Result<()> {
    let driver = a.driver.to_distribution()?;
    let rows = comparison_table(a.n, &driver, a.grid)?;
    let mut body = String::from("x,exact,approx\n");
    for r in &rows {
        body.push_str(&csv_row(&[r.x, r.exact, r.approx]));
    }
    sink.main(body.as_bytes())?;
    if driver == DistributionSpec::Uniform {
        let (exact_mean, approx_mean) = compare_means(a.n)?;
        let second_quad = second_orderstat_mean_by_quadrature(a.n)?;
        let summary = serde_json::json!({
            "n": a.n,
            "mean": { "exact": exact_mean, "approx": approx_mean },
            "second_lowest_mean": {
                "exact": 1.0,
                "approx": second_orderstat_mean(a.n),
                "approx_by_quadrature": second_quad,
            },
        });
        sink.summary(&summary)?;
        sink.note(&format!(
            "{:<22} {:>12} {:>12}\n{:<22} {:>12.9} {:>12.9}\n{:<22} {:>12.9} {:>12.9}\n",
            "statistic", "exact", "approx", "mean", exact_mean, approx_mean, "second-lowest mean", 1.0,
            second_orderstat_mean(a.n)
        ))?;
    }
    Ok(())
}

fn simulate(a: &SimArgs, sink: &mut Sink) -> Result<()> {
    let config = a.config()?;
    let run = run_detailed(&config)?;
    let mut body = Vec::new();
    run.cdf.write_csv(&mut body, a.grid)?;
    sink.main(&body)?;

    let mut ks = serde_json::Map::new();
    let driver = config.driver.clone().unwrap_or(DistributionSpec::Uniform);
    if let Some(w) = &config.weights {
        let sys = RankSystem::new(w.clone())?;
        let mode = if config.mode == SimMode::RankExo { Mode::Exo } else { Mode::Endo };
        let law = if mode == Mode::Exo { driver.clone() } else { config.initial.clone().unwrap_or(DistributionSpec::Uniform) };
        let analytic = sys.limit_cdf(mode, &law, a.grid)?;
        ks.insert("analytic".into(), ks_distance(&run.cdf, &analytic).into());
        if mode == Mode::Exo && is_min_only(w) {
            let exact = exact_limit_cdf(w.len(), &driver)?;
            ks.insert("exact".into(), ks_distance(&run.cdf, &exact).into());
        }
    }
    let summary = serde_json::json!({
        "seed": config.seed,
        "mode": config.mode.to_string(),
        "n": config.n,
        "samples": run.cdf.len(),
        "mean": run.cdf.mean(),
        "replica_means": run.replica_means,
        "standard_error": run.standard_error(),
        "ks": ks,
        "steps_per_second": run.step_rate(),
    });
    sink.summary(&summary)
}

fn is_min_only(w: &WeightVector) -> bool {
    w.alphas()[0] == 1.0 && w.alphas()[1..].iter().all(|&a| a == 0.0)
}

fn compare(a: &SimArgs, sink: &mut Sink) -> Result<()> {
    let config = a.config()?;
    let run = run_detailed(&config)?;
    let driver = config.driver.clone().unwrap_or(DistributionSpec::Uniform);
    let xs = uniform_grid(a.grid)?;
    let (analytic, exact): (Vec<f64>, Option<DistributionSpec>) = match &config.weights {
        Some(w) => {
            let sys = RankSystem::new(w.clone())?;
            if config.mode == SimMode::RankExo {
                let exact = is_min_only(w).then(|| exact_limit_cdf(w.len(), &driver)).transpose()?;
                (sys.limit_cdf(Mode::Exo, &driver, a.grid)?.cdf, exact)
            } else {
                let init = config.initial.clone().unwrap_or(DistributionSpec::Uniform);
                (sys.limit_cdf(Mode::Endo, &init, a.grid)?.cdf, None)
            }
        }
        // Bak-Sneppen on a ring is compared with the (2,3) threshold law.
        None => (
            xs.iter().map(|&x| large_n_limit(2.0, 3.0, driver.cdf(x))).collect::<Result<_>>()?,
            None,
        ),
    };
    let mut body = String::from("x,empirical,analytic,exact\n");
    for (x, an) in xs.iter().zip(&analytic) {
        let ex = exact.as_ref().map_or(f64::NAN, |e| e.cdf(*x));
        body.push_str(&csv_row(&[*x, run.cdf.eval(*x), *an, ex]));
    }
    sink.main(body.as_bytes())?;
    let mut ks = serde_json::Map::new();
    let analytic_cdf = SampledCdf::new(xs, analytic, None)?;
    ks.insert("analytic".into(), ks_distance(&run.cdf, &analytic_cdf).into());
    if let Some(e) = &exact {
        ks.insert("exact".into(), ks_distance(&run.cdf, e).into());
    }
    sink.summary(&serde_json::json!({
        "seed": config.seed,
        "mode": config.mode.to_string(),
        "mean": run.cdf.mean(),
        "ks": ks,
        "steps_per_second": run.step_rate(),
    }))
}
