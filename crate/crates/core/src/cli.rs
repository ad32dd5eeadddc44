//! Command-line front end.
//!
//! Flags may also come from a `key = value` file given with `--config`; the
//! file entries are spliced in ahead of the real arguments, so flags on the
//! command line win.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    check_regularity_lowerbound, estimate_uniform_holder, l1_rate_study, single_omega_convergence,
    HolderReport, RateReport, RegularityCheck,
};
use crate::brownian::{BrownianPath, DyadicGrid, HaarCoefficients, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::exponent::ExponentSpec;
use crate::kernel::{haar_eval, KernelContext, QuadraturePolicy};
use crate::rng::{replicate_seed, stream_id, NormalStream, DOMAIN_AUX};
use crate::simulator::{haar_partial_levels, mean_kernel_sum, simulate, Scheme, TimeGrid};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "MPRE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mpre", version, about = "Simulate multifractional processes with random exponent")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scheme: tilde (left point), hat (frozen exponent) or haar (truncated series).
    #[arg(long, global = true, default_value = "hat")]
    scheme: String,
    /// Discretization level J.
    #[arg(long = "J", global = true, default_value_t = 12)]
    level: u32,
    /// Reference level for convergence studies.
    #[arg(long = "J-ref", global = true, default_value_t = 16)]
    ref_level: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 0)]
    master_seed: u64,
    /// const:<H>, sin:<a>:<b>:<f>, rl:<H>:<a>:<b>[:indep] or file:<path>.
    #[arg(long, global = true, default_value = "const:0.7")]
    exponent: String,
    /// dyadic:<level> or list:<t1>,<t2>,...; defaults to dyadic:min(J,10).
    #[arg(long, global = true)]
    times: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, global = true, default_value_t = 20)]
    n_seeds: usize,
    /// Hölder windows as a:b,c:d.
    #[arg(long, global = true, default_value = "0:1")]
    windows: String,
    #[arg(long, global = true)]
    j_min: Option<u32>,
    #[arg(long, global = true)]
    j_max: Option<u32>,
    /// Probe time of the L¹ study.
    #[arg(long, global = true, default_value_t = 0.7)]
    t_probe: f64,
    #[arg(long, global = true, value_enum, default_value_t = Study::Sup)]
    study: Study,
    /// Allowed shortfall of a Hölder estimate below min A.
    #[arg(long, global = true, default_value_t = 0.1)]
    tolerance: f64,
    /// Absolute quadrature tolerance of kernel integrals.
    #[arg(long, global = true, default_value_t = 1e-7)]
    abs_tol: f64,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write t,X(t),A(t) triples to this file.
    #[arg(long, global = true)]
    emit_plot_data: Option<PathBuf>,
    /// key = value file of defaults for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Simulate one path.
    Simulate,
    /// Convergence study against a reference path or in L¹.
    Convergence,
    /// Windowed Hölder exponent estimates.
    Holder,
    /// Haar inner products of the kernel with their bound.
    Coeffs,
    /// Fast invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// CSV for series, aligned text for reports.
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    /// Sup-distances to a reference path on one trajectory.
    Sup,
    /// Monte Carlo L¹ error between the Haar and left-point schemes.
    L1,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Convergence => "convergence",
            Command::Holder => "holder",
            Command::Coeffs => "coeffs",
            Command::Selftest => "selftest",
        }
    }
}

/// Validated, fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scheme: Scheme,
    pub level: u32,
    pub ref_level: u32,
    pub seed: u64,
    pub master_seed: u64,
    pub exponent: ExponentSpec,
    pub times: TimeGrid,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub n_seeds: usize,
    pub windows: Vec<(f64, f64)>,
    pub j_min: u32,
    pub j_max: u32,
    pub t_probe: f64,
    pub study: Study,
    pub tolerance: f64,
    pub abs_tol: f64,
    pub threads: Option<usize>,
    pub emit_plot_data: Option<PathBuf>,
}

impl RunConfig {
    /// Resolved settings as ordered key/value pairs. Thread count and output
    /// paths are left out: they never change results.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let windows: Vec<String> = self.windows.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        [
            ("command", self.command.name().to_string()),
            ("scheme", self.scheme.to_string()),
            ("J", self.level.to_string()),
            ("J_ref", self.ref_level.to_string()),
            ("seed", self.seed.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("exponent", self.exponent.to_string()),
            ("times", self.times.to_string()),
            ("format", format!("{:?}", self.format).to_lowercase()),
            ("n_seeds", self.n_seeds.to_string()),
            ("windows", windows.join(",")),
            ("j_min", self.j_min.to_string()),
            ("j_max", self.j_max.to_string()),
            ("t_probe", self.t_probe.to_string()),
            ("study", format!("{:?}", self.study).to_lowercase()),
            ("tolerance", self.tolerance.to_string()),
            ("abs_tol", self.abs_tol.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn policy(&self) -> QuadraturePolicy<f64> {
        QuadraturePolicy {
            abs_tol: self.abs_tol,
            ..QuadraturePolicy::default()
        }
    }
}

/// Reads `key = value` lines (`#` comments) into `--key value` arguments.
fn config_file_args(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let mut args = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("{}:{}: expected key = value", path.display(), n + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(Error::Parse("config files cannot include other config files".into()));
        }
        args.push(format!("--{key}").into());
        args.push(value.trim().into());
    }
    Ok(args)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

fn parse_windows(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad window `{w}`; expected a:b")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad window bound `{s}`")))
            };
            let (a, b) = (num(a)?, num(b)?);
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::Domain(format!("window {a}:{b} is not inside [0,1]")));
            }
            Ok((a, b))
        })
        .collect()
}

fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("cannot write {}: no directory {}", path.display(), parent.display()),
        )));
    }
    if path.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("cannot write {}: it is a directory", path.display()),
        )));
    }
    Ok(())
}

/// Parses and validates arguments (the first item is the program name).
pub fn parse_config<I, S>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut full = args.clone();
    if let Some(path) = find_config(&args) {
        let extra = config_file_args(&path)?;
        full.splice(1..1, extra);
    }
    let cli = Cli::try_parse_from(full).map_err(|e| Error::Parse(e.to_string()))?;
    resolve(cli)
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let scheme: Scheme = cli.scheme.parse()?;
    let exponent = ExponentSpec::parse(&cli.exponent)?;
    if cli.level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level: cli.level,
            max: MAX_LEVEL,
        });
    }
    // Hölder estimates always use the full level-J grid.
    let times = match (&cli.times, cli.command) {
        (_, Command::Holder) => TimeGrid::Dyadic(cli.level),
        (Some(t), _) => TimeGrid::parse(t)?,
        (None, _) => TimeGrid::Dyadic(cli.level.min(10)),
    };
    let windows = parse_windows(&cli.windows)?;
    let (j_min, j_max) = match cli.command {
        Command::Convergence => (cli.j_min.unwrap_or(6.min(cli.level)), cli.j_max.unwrap_or(cli.level)),
        Command::Holder => {
            let j_max = cli.j_max.unwrap_or(cli.level.saturating_sub(2));
            (cli.j_min.unwrap_or(j_max.saturating_sub(3)), j_max)
        }
        _ => (cli.j_min.unwrap_or(0), cli.j_max.unwrap_or(cli.level.min(6))),
    };
    if j_min > j_max {
        return Err(Error::Parse(format!("j-min {j_min} exceeds j-max {j_max}")));
    }
    if cli.command == Command::Convergence {
        if cli.study == Study::Sup && cli.ref_level < j_max + 4 {
            return Err(Error::BoundViolation(format!(
                "J_ref must exceed J by ≥ 4 (J = {j_max}, J_ref = {})",
                cli.ref_level
            )));
        }
        if j_max > cli.level {
            return Err(Error::Parse(format!("j-max {j_max} exceeds J = {}", cli.level)));
        }
    }
    if cli.command == Command::Holder && j_max + 2 > cli.level {
        return Err(Error::InsufficientResolution {
            level: cli.level,
            required: j_max + 2,
        });
    }
    if !(cli.abs_tol > 0.0) {
        return Err(Error::Parse("abs-tol must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cli.t_probe) {
        return Err(Error::Domain(format!("t-probe {} outside [0,1]", cli.t_probe)));
    }
    if cli.n_seeds == 0 {
        return Err(Error::Parse("n-seeds must be positive".into()));
    }
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::Parse(format!("{THREADS_ENV}={v} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(Error::Parse("thread count must be positive".into()));
    }
    for p in cli.out.iter().chain(&cli.emit_plot_data) {
        check_writable(p)?;
    }
    Ok(RunConfig {
        command: cli.command,
        scheme,
        level: cli.level,
        ref_level: cli.ref_level,
        seed: cli.seed,
        master_seed: cli.master_seed,
        exponent,
        times,
        out: cli.out,
        format: cli.format,
        n_seeds: cli.n_seeds,
        windows,
        j_min,
        j_max,
        t_probe: cli.t_probe,
        study: cli.study,
        tolerance: cli.tolerance,
        abs_tol: cli.abs_tol,
        threads,
        emit_plot_data: cli.emit_plot_data,
    })
}

/// Executes the configured command inside a pool of the requested size.
pub fn run(config: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))?;
    let body = pool.install(|| match config.command {
        Command::Simulate => run_simulate(config),
        Command::Convergence => run_convergence(config),
        Command::Holder => run_holder(config),
        Command::Coeffs => run_coeffs(config),
        Command::Selftest => run_selftest(),
    })?;
    let mut out: Box<dyn Write> = match &config.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    out.write_all(body.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&args) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    match parse_config(args).and_then(|c| run(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn json<S: Serialize>(config: &RunConfig, key: &str, value: &S) -> Result<String> {
    let meta: serde_json::Map<String, serde_json::Value> = config
        .metadata()
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect();
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), meta.into());
    doc.insert(
        key.into(),
        serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?,
    );
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn text_header(config: &RunConfig) -> String {
    config
        .metadata()
        .iter()
        .map(|(k, v)| format!("# {k}={v}\n"))
        .collect()
}

fn run_simulate(config: &RunConfig) -> Result<String> {
    let path = BrownianPath::<f64>::sample(config.seed, config.level)?;
    let exponent = config.exponent.build(&path)?;
    let times = config.times.points::<f64>();
    let series = simulate(config.scheme, &path, &exponent, &times, config.policy())?;
    if let Some(p) = &config.emit_plot_data {
        let mut w = BufWriter::new(File::create(p)?);
        series.write_plot_data(&mut w, &exponent)?;
        w.flush()?;
    }
    match config.format {
        Format::Json => json(config, "series", &series),
        Format::Csv => {
            let mut buf = Vec::new();
            series.write_csv(&mut buf, &config.metadata())?;
            Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
        }
    }
}

fn rate_table(out: &mut String, r: &RateReport<f64>) {
    let _ = writeln!(out, "{} (n_seeds = {})", r.statistic, r.n_seeds);
    let _ = writeln!(out, "{:>4}  {:>14}", "J", "error");
    for (j, e) in r.levels.iter().zip(&r.errors) {
        let _ = writeln!(out, "{j:>4}  {e:>14.6e}");
    }
    match (r.fitted_slope, r.slope_stderr) {
        (Some(s), Some(se)) => {
            let _ = writeln!(out, "slope {s:.4} ± {se:.4}  (target {:.4})", r.target_slope);
        }
        _ => {
            let _ = writeln!(out, "slope unavailable  (target {:.4})", r.target_slope);
        }
    }
}

fn run_convergence(config: &RunConfig) -> Result<String> {
    let levels: Vec<u32> = (config.j_min..=config.j_max).collect();
    match config.study {
        Study::Sup => {
            let times = config.times.points::<f64>();
            let r = single_omega_convergence(config.seed, &config.exponent, &levels, config.ref_level, &times)?;
            match config.format {
                Format::Json => json(config, "report", &r),
                Format::Csv => {
                    let mut s = text_header(config);
                    rate_table(&mut s, &r.tilde);
                    s.push('\n');
                    rate_table(&mut s, &r.hat);
                    Ok(s)
                }
            }
        }
        Study::L1 => {
            let r = l1_rate_study(
                &config.exponent,
                &levels,
                config.t_probe,
                config.n_seeds,
                config.master_seed,
                config.policy(),
            )?;
            match config.format {
                Format::Json => json(config, "report", &r),
                Format::Csv => {
                    let mut s = text_header(config);
                    rate_table(&mut s, &r);
                    Ok(s)
                }
            }
        }
    }
}

/// Per-seed Hölder reports and their window means.
#[derive(Debug, Clone, Serialize)]
pub struct HolderStudy {
    pub seeds: Vec<u64>,
    /// `per_seed[i][w]`.
    pub per_seed: Vec<Vec<HolderReport<f64>>>,
    pub mean_estimate: Vec<f64>,
    /// Present when the exponent is regular enough for the lower-bound check.
    pub lower_bound: Option<Vec<RegularityCheck<f64>>>,
}

fn run_holder(config: &RunConfig) -> Result<String> {
    let times = DyadicGrid::new(config.level)?.points::<f64>();
    let seeds: Vec<u64> = (0..config.n_seeds)
        .map(|i| replicate_seed(config.master_seed, i))
        .collect();
    let mut per_seed = Vec::new();
    let mut checks = Vec::new();
    let mut regular = true;
    for &seed in &seeds {
        let path = BrownianPath::<f64>::sample(seed, config.level)?;
        let exponent = config.exponent.build(&path)?;
        let series = simulate(config.scheme, &path, &exponent, &times, config.policy())?;
        let levels = config.j_min..=config.j_max;
        if exponent.meta.gamma > 0.5 {
            let c = check_regularity_lowerbound(&series, &exponent, &config.windows, levels, config.tolerance)?;
            per_seed.push(c.windows.clone());
            checks.push(c);
        } else {
            regular = false;
            per_seed.push(
                config
                    .windows
                    .iter()
                    .map(|&w| estimate_uniform_holder(&series, w, levels.clone()))
                    .collect::<Result<_>>()?,
            );
        }
    }
    let n = seeds.len() as f64;
    let mean_estimate = (0..config.windows.len())
        .map(|w| per_seed.iter().map(|r| r[w].estimate).sum::<f64>() / n)
        .collect();
    let study = HolderStudy {
        seeds,
        per_seed,
        mean_estimate,
        lower_bound: regular.then_some(checks),
    };
    match config.format {
        Format::Json => json(config, "report", &study),
        Format::Csv => {
            let mut s = text_header(config);
            let _ = writeln!(
                s,
                "{:>20}  {:>8}  {:>8}  {:>8}  {:>4}",
                "seed", "window", "estimate", "min_A", "ok"
            );
            for (i, seed) in study.seeds.iter().enumerate() {
                for (w, r) in study.per_seed[i].iter().enumerate() {
                    let (lo, hi) = config.windows[w];
                    let ok = match &study.lower_bound {
                        Some(c) => if c[i].passes[w] { "yes" } else { "no" },
                        None => "-",
                    };
                    let min_a = r.min_a.map_or("-".to_string(), |a| format!("{a:.4}"));
                    let _ = writeln!(
                        s,
                        "{seed:>20}  {:>8}  {:>8.4}  {min_a:>8}  {ok:>4}",
                        format!("{lo}:{hi}"),
                        r.estimate
                    );
                }
            }
            for (w, m) in study.mean_estimate.iter().enumerate() {
                let (lo, hi) = config.windows[w];
                let _ = writeln!(s, "mean estimate on {lo}:{hi} = {m:.4}");
            }
            Ok(s)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CoefficientRow {
    j: u32,
    k: usize,
    t: f64,
    inner_product: f64,
    bound: f64,
}

fn run_coeffs(config: &RunConfig) -> Result<String> {
    let path = BrownianPath::<f64>::sample(config.seed, config.level)?;
    let exponent = config.exponent.build(&path)?;
    let ctx = KernelContext::new(&exponent, config.policy())?;
    let times = config.times.points::<f64>();
    let mut rows = Vec::new();
    for j in config.j_min..=config.j_max {
        let bound = 2f64.powf(-(j as f64) / 2.0);
        for k in 0..1usize << j {
            for &t in &times {
                rows.push(CoefficientRow {
                    j,
                    k,
                    t,
                    inner_product: ctx.wavelet_coefficient(t, j, k),
                    bound,
                });
            }
        }
    }
    match config.format {
        Format::Json => json(config, "coefficients", &rows),
        Format::Csv => {
            let mut s = text_header(config);
            s.push_str("j,k,t,inner_product,bound_2^{-j/2}\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{:e},{:e}", r.j, r.k, r.t, r.inner_product, r.bound);
            }
            Ok(s)
        }
    }
}

/// One line of the self-test report.
#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
}

/// The fast invariant suite behind `selftest`.
pub fn selftest_checks() -> Result<Vec<SelfCheck>> {
    let mut checks = Vec::new();
    let mut push = |name: &str, worst: f64, limit: f64| {
        checks.push(SelfCheck {
            name: name.into(),
            worst,
            limit,
            passed: worst <= limit,
        });
    };

    // Haar coefficients against the inner products ∫h_{j,k} dB on the fine grid.
    let mut worst: f64 = 0.0;
    for seed in 0..4 {
        let level = 10;
        let path = BrownianPath::<f64>::sample(seed, level)?;
        let coeffs = HaarCoefficients::from_path(&path)?;
        worst = worst.max((coeffs.eta0 - path.values()[1 << level]).abs());
        let grid = path.grid();
        for j in 0..level {
            for k in 0..1usize << j {
                let direct: f64 = path
                    .increments()
                    .iter()
                    .enumerate()
                    .map(|(l, &d)| haar_eval(j, k, grid.point::<f64>(l)).unwrap() * d)
                    .sum();
                worst = worst.max((direct - coeffs.get(j, k)).abs());
            }
        }
    }
    push("haar coefficient identity", worst, 1e-12);

    // Truncated Haar series against the cell-mean sum.
    let specs = [ExponentSpec::Constant(0.7), ExponentSpec::Sinusoid { a: 0.6, b: 0.9, frequency: 1.0 }];
    let mut worst: f64 = 0.0;
    for spec in &specs {
        for seed in 0..2 {
            let path = BrownianPath::<f64>::sample(seed, 6)?;
            let exponent = spec.build(&path)?;
            let ctx = KernelContext::with_defaults(&exponent);
            let coeffs = HaarCoefficients::from_path(&path)?;
            for t in (DyadicGrid { level: 4 }).points::<f64>() {
                let partial = haar_partial_levels(&coeffs, &ctx, t, 6);
                for (j, &x) in partial.iter().enumerate() {
                    let coarse = path.coarsen(j as u32)?;
                    worst = worst.max((x - mean_kernel_sum(&coarse, &ctx, t)).abs());
                }
            }
        }
    }
    push("haar series equals cell-mean sum (J <= 6)", worst, 1e-7);

    // |<K_t, h_{j,k}>| <= 2^{-j/2} on random (t, j, k).
    let mut rng = NormalStream::new(0x5e1f, stream_id(DOMAIN_AUX, 0));
    let mut worst = f64::NEG_INFINITY;
    for spec in &specs {
        let path = BrownianPath::<f64>::sample(1, 8)?;
        let exponent = spec.build(&path)?;
        let ctx = KernelContext::with_defaults(&exponent);
        for _ in 0..300 {
            let t = rng.next_uniform();
            let j = (rng.next_uniform() * 9.0) as u32;
            let k = ((rng.next_uniform() * (1u64 << j) as f64) as usize).min((1 << j) - 1);
            let c = ctx.wavelet_coefficient(t, j, k);
            worst = worst.max(c.abs() - 2f64.powf(-(j as f64) / 2.0));
        }
    }
    push("|<K_t,h_jk>| - 2^{-j/2}", worst, 0.0);

    // Coefficient-sum bound on a few times.
    let mut worst = f64::NEG_INFINITY;
    for spec in &specs {
        let path = BrownianPath::<f64>::sample(2, 8)?;
        let exponent = spec.build(&path)?;
        let ctx = KernelContext::with_defaults(&exponent);
        for t in [0.3, 0.55, 0.9, 1.0] {
            for j in 0..6 {
                worst = worst.max(ctx.coefficient_sum(t, j) - ctx.coefficient_sum_bound(j));
            }
        }
    }
    push("coefficient sum minus its bound", worst, 0.0);
    Ok(checks)
}

fn run_selftest() -> Result<String> {
    let checks = selftest_checks()?;
    let mut s = String::new();
    for c in &checks {
        let _ = writeln!(
            s,
            "{} {:<44} worst {:>12.4e}  limit {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.limit
        );
    }
    if let Some(c) = checks.iter().find(|c| !c.passed) {
        print!("{s}");
        return Err(Error::CheckFailed(c.name.clone()));
    }
    Ok(s)
}
