//! Command-line front end.
//!
//! Every command writes one configuration line first: a `#` comment in CSV
//! mode, a `{"config": …}` record in JSON mode. CSV output then has a single
//! column header; JSON output is one record per line. Flags can also be set
//! through `CMSP_*` environment variables (see `--help`).
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for computational errors.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::curves::{catalog, find_curve, CurveSpec};
use crate::error::Error;
use crate::frobenius::cache::TraceCache;
use crate::frobenius::{cm_ap, frobenius_record, FrobeniusRecord};
use crate::kernel::{kernel_k, r_closed_form, r_numeric, ContourOptions, SmoothingParams};
use crate::minorant::{selberg_minorant, verify_minorant};
use crate::scan::{
    cm_measure, distribution_from_records, empirical_distribution, least_prime_in_records,
    least_prime_in_sector, linnik_survey, InertPolicy, SectorQuery,
};
use crate::sums::{fourier_lower_bound_with, sum_s_with, SumConfig, DEFAULT_BUDGET};

/// Largest `--limit` accepted by the prime scans.
pub const HARD_LIMIT: u64 = 1 << 36;

#[derive(Debug, Parser)]
#[command(name = "cmsp", version, about = "Sato-Tate angles and prime sectors for CM elliptic curves")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CMSP_THREADS")]
    pub threads: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true, env = "CMSP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory holding per-curve trace tables.
    #[arg(long, global = true, env = "CMSP_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Output format; analytic commands default to json, the rest to csv.
    #[arg(long, global = true, env = "CMSP_FORMAT", value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Include,
    SplitOnly,
}

impl From<Policy> for InertPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Include => InertPolicy::Include,
            Policy::SplitOnly => InertPolicy::SplitOnly,
        }
    }
}

impl Policy {
    fn as_str(self) -> &'static str {
        match self {
            Policy::Include => "include",
            Policy::SplitOnly => "split-only",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the curve catalog.
    Catalog,
    /// Trace of Frobenius a_p.
    Ap(PrimeArgs),
    /// Sato-Tate angle θ_p.
    Theta(PrimeArgs),
    /// Least good prime with angle in the interval.
    LeastPrime(LeastPrimeArgs),
    /// Fraction of good primes up to the limit with angle in the interval.
    Distribution(DistributionArgs),
    /// Least primes over curves × intervals, with a log-log line fit.
    Survey(SurveyArgs),
    /// Trigonometric minorant of an interval.
    Minorant(MinorantArgs),
    /// The smoothing kernel K(s).
    Kernel(KernelArgs),
    /// The smoothing weight R(y).
    SmoothingR(SmoothingRArgs),
    /// The smoothed sector sum S.
    SumS(SumArgs),
    /// S against its Fourier lower bound.
    FourierBound(FourierArgs),
    /// Manage the trace cache.
    Cache(CacheArgs),
}

#[derive(Debug, Args)]
pub struct PrimeArgs {
    #[arg(long, env = "CMSP_CURVE", value_parser = parse_curve)]
    pub curve: CurveSpec,
    #[arg(long)]
    pub p: u64,
}

#[derive(Debug, Args)]
pub struct LeastPrimeArgs {
    #[arg(long, env = "CMSP_CURVE", value_parser = parse_curve)]
    pub curve: CurveSpec,
    /// `a,b` in radians or as `aPI/b` fractions, e.g. `0.49PI,0.51PI` or `PI/4,PI/2`.
    #[arg(long, value_parser = parse_interval)]
    pub interval: (f64, f64),
    #[arg(long, env = "CMSP_LIMIT", default_value_t = 1_000_000, value_parser = parse_limit)]
    pub limit: u64,
    /// First integer examined.
    #[arg(long, default_value_t = 2)]
    pub start: u64,
    #[arg(long, value_enum, default_value_t = Policy::Include)]
    pub policy: Policy,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    #[arg(long, env = "CMSP_CURVE", value_parser = parse_curve)]
    pub curve: CurveSpec,
    #[arg(long, value_parser = parse_interval)]
    pub interval: (f64, f64),
    #[arg(long, env = "CMSP_LIMIT", default_value_t = 1_000_000, value_parser = parse_limit)]
    pub limit: u64,
}

#[derive(Debug, Args)]
pub struct SurveyArgs {
    /// Curve labels, comma separated; default is the whole catalog.
    #[arg(long, value_delimiter = ',', value_parser = parse_curve)]
    pub curve: Vec<CurveSpec>,
    /// Repeat for each interval.
    #[arg(long, required = true, value_parser = parse_interval)]
    pub interval: Vec<(f64, f64)>,
    #[arg(long, env = "CMSP_LIMIT", default_value_t = 1_000_000, value_parser = parse_limit)]
    pub limit: u64,
    #[arg(long, value_enum, default_value_t = Policy::Include)]
    pub policy: Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffFormat {
    Csv,
}

#[derive(Debug, Args)]
pub struct MinorantArgs {
    #[arg(long, value_parser = parse_angle)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_angle)]
    pub beta: f64,
    #[arg(long = "M")]
    pub m: usize,
    /// List every coefficient b_n.
    #[arg(long, value_enum)]
    pub emit_coeffs: Option<CoeffFormat>,
    /// Check the minorant on this many grid points in [0, π].
    #[arg(long)]
    pub verify: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SmoothingArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long = "A", default_value_t = 4.0)]
    pub a: f64,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub s: Complex64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
}

#[derive(Debug, Args)]
pub struct SmoothingRArgs {
    #[arg(long)]
    pub y: f64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// Also integrate K(s)² y^{-s} numerically.
    #[arg(long)]
    pub numeric: bool,
    /// Cutoff height for --numeric.
    #[arg(long, default_value_t = 2e4)]
    pub t_max: f64,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[arg(long, env = "CMSP_CURVE", value_parser = parse_curve)]
    pub curve: CurveSpec,
    #[arg(long, value_parser = parse_angle)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_angle)]
    pub beta: f64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// Largest x^A allowed.
    #[arg(long, env = "CMSP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: f64,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[command(flatten)]
    pub sum: SumArgs,
    #[arg(long = "M")]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheAction {
    Build,
    Verify,
    Clear,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[arg(value_enum)]
    pub action: CacheAction,
    #[arg(long, env = "CMSP_CURVE", value_parser = parse_curve)]
    pub curve: CurveSpec,
    #[arg(long, env = "CMSP_LIMIT", default_value_t = 1_000_000, value_parser = parse_limit)]
    pub limit: u64,
    /// Share of rows recomputed by `verify`.
    #[arg(long, default_value_t = 0.01)]
    pub fraction: f64,
}

fn parse_curve(s: &str) -> std::result::Result<CurveSpec, String> {
    find_curve(s.trim()).map_err(|e| e.to_string())
}

fn parse_limit(s: &str) -> std::result::Result<u64, String> {
    let n: u64 = s
        .trim()
        .parse()
        .or_else(|_| s.trim().parse::<f64>().map(|f| f as u64))
        .map_err(|_| format!("not an integer: {s:?}"))?;
    if !(2..=HARD_LIMIT).contains(&n) {
        return Err(format!("must be in [2, {HARD_LIMIT}]"));
    }
    Ok(n)
}

/// Radians, or a multiple of π written `PI`, `aPI`, `PI/b`, `aPI/b`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let bad = || format!("not an angle: {s:?}");
    if let Some(pos) = t.find("PI") {
        let coef = match &t[..pos] {
            "" => 1.0,
            "-" => -1.0,
            c => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &t[pos + 2..];
        let denom = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        if denom == 0.0 {
            return Err(bad());
        }
        return Ok(coef * PI / denom);
    }
    t.parse::<f64>().map_err(|_| bad())
}

pub fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let (a, b) = (parse_angle(a)?, parse_angle(b)?);
    if !(0.0 <= a && a < b && b <= PI * (1.0 + 1e-15)) {
        return Err(format!("need 0 <= a < b <= PI, got [{a}, {b}]"));
    }
    Ok((a, b.min(PI)))
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got {s:?}"))?;
    let re = re.trim().parse::<f64>().map_err(|_| format!("bad real part {re:?}"))?;
    let im = im.trim().parse::<f64>().map_err(|_| format!("bad imaginary part {im:?}"))?;
    Ok(Complex64::new(re, im))
}

/// A failure, tagged with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(flag: &str, e: impl std::fmt::Display) -> CliResult<T> {
    Err(Failure::Usage(format!("{flag}: {e}")))
}

fn smoothing(args: &SmoothingArgs) -> CliResult<SmoothingParams> {
    SmoothingParams::new(args.x, args.a).or_else(|e| usage("--x/--A", e))
}

struct Output<'a> {
    format: Format,
    out: &'a mut dyn Write,
    columns: Vec<&'static str>,
}

impl<'a> Output<'a> {
    fn new(format: Format, out: &'a mut dyn Write, command: &str, config: &[(&str, Value)]) -> std::io::Result<Self> {
        match format {
            Format::Csv => {
                let mut line = format!("# cmsp {command}");
                for (k, v) in config {
                    line.push_str(&format!(" {k}={}", plain(v)));
                }
                writeln!(out, "{line}")?;
            }
            Format::Json => {
                let mut cfg = Map::new();
                cfg.insert("command".into(), json!(command));
                for (k, v) in config {
                    cfg.insert((*k).into(), v.clone());
                }
                writeln!(out, "{}", json!({ "config": cfg }))?;
            }
        }
        Ok(Self {
            format,
            out,
            columns: Vec::new(),
        })
    }

    fn columns(&mut self, cols: &[&'static str]) -> std::io::Result<()> {
        self.columns = cols.to_vec();
        if self.format == Format::Csv {
            writeln!(self.out, "{}", cols.join(","))?;
        }
        Ok(())
    }

    fn row(&mut self, values: Vec<Value>) -> std::io::Result<()> {
        debug_assert_eq!(values.len(), self.columns.len());
        match self.format {
            Format::Csv => {
                let cells: Vec<String> = values.iter().map(plain).collect();
                writeln!(self.out, "{}", cells.join(","))
            }
            Format::Json => {
                let rec: Map<String, Value> = self
                    .columns
                    .iter()
                    .map(|c| c.to_string())
                    .zip(values)
                    .collect();
                writeln!(self.out, "{}", Value::Object(rec))
            }
        }
    }

    /// Trailing summary: a `# name k=v …` line in CSV, a `{"name": {…}}`
    /// record in JSON.
    fn footer(&mut self, name: &str, fields: &[(&str, Value)]) -> std::io::Result<()> {
        match self.format {
            Format::Csv => {
                let mut line = format!("# {name}");
                for (k, v) in fields {
                    line.push_str(&format!(" {k}={}", plain(v)));
                }
                writeln!(self.out, "{line}")
            }
            Format::Json => {
                let m: Map<String, Value> =
                    fields.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect();
                let mut rec = Map::new();
                rec.insert(name.into(), Value::Object(m));
                writeln!(self.out, "{}", Value::Object(rec))
            }
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn record_values(rec: &Option<FrobeniusRecord>) -> Vec<Value> {
    match rec {
        Some(r) => vec![json!(r.p), json!(r.a_p), json!(r.theta), json!(r.split.as_str())],
        None => vec![Value::Null; 4],
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => usage("--threads", e),
        },
        None => dispatch(&cli, &mut buf),
    };
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let io = |e: std::io::Error| Failure::Compute(Error::Io(e));
    let tabular = cli.format.unwrap_or(Format::Csv);
    let analytic = cli.format.unwrap_or(Format::Json);
    let cache = cli.cache_dir.as_ref().map(TraceCache::new);
    let cache_cfg = || json!(cli.cache_dir.as_ref().map(|d| d.display().to_string()));

    match &cli.command {
        Command::Catalog => {
            let mut o = Output::new(tabular, out, "catalog", &[]).map_err(io)?;
            o.columns(&["label", "a4", "a6", "conductor", "d_k", "bad_primes", "ainvs"])
                .map_err(io)?;
            for c in catalog() {
                let bad: Vec<String> = c.bad_primes.iter().map(|p| p.to_string()).collect();
                let ainvs: Vec<String> = c.ainvs.iter().map(|a| a.to_string()).collect();
                o.row(vec![
                    json!(c.label),
                    json!(c.a4),
                    json!(c.a6),
                    json!(c.conductor),
                    json!(c.field.discriminant()),
                    json!(bad.join(";")),
                    json!(ainvs.join(";")),
                ])
                .map_err(io)?;
            }
        }
        Command::Ap(a) | Command::Theta(a) => {
            let is_ap = matches!(cli.command, Command::Ap(_));
            let name = if is_ap { "ap" } else { "theta" };
            if !crate::arith::is_prime(a.p) {
                return usage("--p", format!("{} is not prime", a.p));
            }
            let config = [("curve", json!(a.curve.label)), ("p", json!(a.p))];
            let mut o = Output::new(tabular, out, name, &config).map_err(io)?;
            if is_ap {
                let ap = cm_ap(&a.curve, a.p)?;
                o.columns(&["p", "a_p"]).map_err(io)?;
                o.row(vec![json!(a.p), json!(ap)]).map_err(io)?;
            } else {
                let rec = frobenius_record(&a.curve, a.p)?;
                o.columns(&["p", "theta"]).map_err(io)?;
                o.row(vec![json!(a.p), json!(rec.theta)]).map_err(io)?;
            }
        }
        Command::LeastPrime(a) => {
            let (alpha, beta) = a.interval;
            let q = SectorQuery::new(alpha, beta, a.limit, a.policy.into())
                .or_else(|e| usage("--interval", e))?
                .starting_at(a.start);
            let config = [
                ("curve", json!(a.curve.label)),
                ("alpha", json!(alpha)),
                ("beta", json!(beta)),
                ("start", json!(q.start)),
                ("limit", json!(a.limit)),
                ("policy", json!(a.policy.as_str())),
                ("cache_dir", cache_cfg()),
            ];
            let report = match &cache {
                Some(c) => {
                    let cached = c.load_or_build(&a.curve, a.limit)?;
                    least_prime_in_records(&cached.records(&a.curve)?, &q)
                }
                None => least_prime_in_sector(&a.curve, &q)?,
            };
            let mut o = Output::new(tabular, out, "least-prime", &config).map_err(io)?;
            o.columns(&["curve", "found", "p", "a_p", "theta", "split", "primes_scanned"])
                .map_err(io)?;
            let mut row = vec![json!(a.curve.label), json!(report.found.is_some())];
            row.extend(record_values(&report.found));
            row.push(json!(report.primes_scanned));
            o.row(row).map_err(io)?;
        }
        Command::Distribution(a) => {
            let (alpha, beta) = a.interval;
            let config = [
                ("curve", json!(a.curve.label)),
                ("alpha", json!(alpha)),
                ("beta", json!(beta)),
                ("limit", json!(a.limit)),
                ("cache_dir", cache_cfg()),
            ];
            let d = match &cache {
                Some(c) => {
                    let cached = c.load_or_build(&a.curve, a.limit)?;
                    distribution_from_records(&cached.records(&a.curve)?, a.limit, alpha, beta)
                }
                None => empirical_distribution(&a.curve, a.limit, alpha, beta)?,
            };
            let mut o = Output::new(tabular, out, "distribution", &config).map_err(io)?;
            o.columns(&["curve", "count", "total", "fraction", "cm_measure"]).map_err(io)?;
            o.row(vec![
                json!(a.curve.label),
                json!(d.count),
                json!(d.total),
                json!(d.fraction),
                json!(cm_measure(alpha, beta)),
            ])
            .map_err(io)?;
        }
        Command::Survey(a) => {
            let curves = if a.curve.is_empty() { catalog() } else { a.curve.clone() };
            let labels: Vec<&str> = curves.iter().map(|c| c.label.as_str()).collect();
            let ivs: Vec<String> = a.interval.iter().map(|(x, y)| format!("{x}:{y}")).collect();
            let config = [
                ("curves", json!(labels.join(";"))),
                ("intervals", json!(ivs.join(";"))),
                ("limit", json!(a.limit)),
                ("policy", json!(a.policy.as_str())),
            ];
            let survey = linnik_survey(&curves, &a.interval, a.limit, a.policy.into())?;
            let mut o = Output::new(tabular, out, "survey", &config).map_err(io)?;
            o.columns(&["curve", "alpha", "beta", "scale", "p_min"]).map_err(io)?;
            for r in &survey.rows {
                o.row(vec![
                    json!(r.curve),
                    json!(r.alpha),
                    json!(r.beta),
                    json!(r.scale),
                    json!(r.p_min),
                ])
                .map_err(io)?;
            }
            let (slope, intercept, points) = match survey.fit {
                Some(f) => (json!(f.slope), json!(f.intercept), json!(f.points)),
                None => (Value::Null, Value::Null, json!(0)),
            };
            o.footer(
                "fit",
                &[
                    ("slope", slope),
                    ("intercept", intercept),
                    ("points", points),
                    ("not_found", json!(survey.not_found)),
                ],
            )
            .map_err(io)?;
        }
        Command::Minorant(a) => {
            let poly = match selberg_minorant(a.alpha, a.beta, a.m) {
                Ok(p) => p,
                Err(e @ (Error::DegenerateInterval { .. } | Error::InvalidInput(_))) => {
                    return usage("--alpha/--beta", e)
                }
                Err(e) => return Err(e.into()),
            };
            let config = [
                ("alpha", json!(a.alpha)),
                ("beta", json!(a.beta)),
                ("M", json!(a.m)),
                ("verify", json!(a.verify)),
            ];
            let check = match a.verify {
                Some(n) => Some(verify_minorant(&poly, a.alpha, a.beta, n).or_else(|e| usage("--verify", e))?),
                None => None,
            };
            let mut o = Output::new(analytic, out, "minorant", &config).map_err(io)?;
            if a.emit_coeffs.is_some() {
                o.columns(&["n", "b_n"]).map_err(io)?;
                for (n, b) in poly.coefficients().iter().enumerate() {
                    o.row(vec![json!(n), json!(b)]).map_err(io)?;
                }
            } else {
                o.columns(&["alpha", "beta", "M", "b_0", "value_at_midpoint"]).map_err(io)?;
                o.row(vec![
                    json!(a.alpha),
                    json!(a.beta),
                    json!(a.m),
                    json!(poly.coefficient(0)),
                    json!(poly.evaluate((a.alpha + a.beta) / 2.0)),
                ])
                .map_err(io)?;
            }
            if let Some(c) = check {
                o.footer(
                    "verify",
                    &[
                        ("max_violation", json!(c.max_violation)),
                        ("worst_theta", json!(c.worst_theta)),
                        ("coefficient_excess", json!(c.coefficient_excess)),
                        ("coefficient_violations", json!(c.coefficient_violations.len())),
                        ("symmetric", json!(c.symmetric)),
                    ],
                )
                .map_err(io)?;
            }
        }
        Command::Kernel(a) => {
            let p = smoothing(&a.smoothing)?;
            let k = kernel_k(a.s, &p);
            let config = [("x", json!(p.x())), ("A", json!(p.a()))];
            let mut o = Output::new(analytic, out, "kernel", &config).map_err(io)?;
            o.columns(&["s_re", "s_im", "x", "A", "k_re", "k_im", "abs"]).map_err(io)?;
            o.row(vec![
                json!(a.s.re),
                json!(a.s.im),
                json!(p.x()),
                json!(p.a()),
                json!(k.re),
                json!(k.im),
                json!(k.norm()),
            ])
            .map_err(io)?;
        }
        Command::SmoothingR(a) => {
            let p = smoothing(&a.smoothing)?;
            if a.y.is_nan() || a.y <= 0.0 {
                return usage("--y", "must be positive");
            }
            let config = [
                ("x", json!(p.x())),
                ("A", json!(p.a())),
                ("numeric", json!(a.numeric)),
                ("t_max", json!(a.t_max)),
            ];
            let numeric = if a.numeric {
                let opts = ContourOptions {
                    t_max: a.t_max,
                    ..ContourOptions::default()
                };
                Some(r_numeric(a.y, &p, &opts).or_else(|e| usage("--t-max", e))?)
            } else {
                None
            };
            let mut o = Output::new(analytic, out, "smoothing-r", &config).map_err(io)?;
            o.columns(&["y", "x", "A", "r", "r_numeric", "error_estimate", "truncation_warning"])
                .map_err(io)?;
            o.row(vec![
                json!(a.y),
                json!(p.x()),
                json!(p.a()),
                json!(r_closed_form(a.y, &p)),
                json!(numeric.map(|n| n.value)),
                json!(numeric.map(|n| n.error_estimate)),
                json!(numeric.map(|n| n.warning.is_some())),
            ])
            .map_err(io)?;
        }
        Command::SumS(a) => {
            let p = smoothing(&a.smoothing)?;
            check_interval(a.alpha, a.beta)?;
            let cfg = SumConfig { budget: a.budget };
            let s = sum_s_with(&a.curve, a.alpha, a.beta, &p, &cfg)?;
            let config = sum_config(a, &p);
            let mut o = Output::new(analytic, out, "sum-s", &config).map_err(io)?;
            o.columns(&["curve", "alpha", "beta", "x", "A", "s"]).map_err(io)?;
            o.row(vec![
                json!(a.curve.label),
                json!(a.alpha),
                json!(a.beta),
                json!(p.x()),
                json!(p.a()),
                json!(s),
            ])
            .map_err(io)?;
        }
        Command::FourierBound(a) => {
            let s = &a.sum;
            let p = smoothing(&s.smoothing)?;
            check_interval(s.alpha, s.beta)?;
            let cfg = SumConfig { budget: s.budget };
            let fb = match fourier_lower_bound_with(&s.curve, s.alpha, s.beta, &p, a.m, &cfg) {
                Err(e @ Error::DegenerateInterval { .. }) => return usage("--alpha/--beta", e),
                r => r?,
            };
            let mut config = sum_config(s, &p);
            config.push(("M", json!(a.m)));
            let mut o = Output::new(analytic, out, "fourier-bound", &config).map_err(io)?;
            o.columns(&["curve", "alpha", "beta", "x", "A", "M", "s", "bound", "margin"])
                .map_err(io)?;
            o.row(vec![
                json!(s.curve.label),
                json!(s.alpha),
                json!(s.beta),
                json!(p.x()),
                json!(p.a()),
                json!(a.m),
                json!(fb.s),
                json!(fb.bound),
                json!(fb.margin),
            ])
            .map_err(io)?;
        }
        Command::Cache(a) => {
            let Some(cache) = cache else {
                return usage("--cache-dir", "required for cache commands");
            };
            let label = &a.curve.label;
            let mut config = vec![("curve", json!(label)), ("cache_dir", cache_cfg())];
            match a.action {
                CacheAction::Build => {
                    config.push(("limit", json!(a.limit)));
                    let built = cache.build(&a.curve, a.limit)?;
                    let mut o = Output::new(tabular, out, "cache build", &config).map_err(io)?;
                    o.columns(&["curve", "limit", "rows"]).map_err(io)?;
                    o.row(vec![json!(label), json!(built.limit), json!(built.rows.len())])
                        .map_err(io)?;
                }
                CacheAction::Verify => {
                    config.push(("fraction", json!(a.fraction)));
                    config.push(("seed", json!(cli.seed)));
                    let report = match cache.verify(&a.curve, a.fraction, cli.seed) {
                        Err(e @ Error::InvalidInput(_)) => return usage("--fraction/--cache-dir", e),
                        r => r?,
                    };
                    let mut o = Output::new(tabular, out, "cache verify", &config).map_err(io)?;
                    o.columns(&["p", "cached", "actual"]).map_err(io)?;
                    for m in &report.mismatches {
                        o.row(vec![json!(m.p), json!(m.cached), json!(m.actual)]).map_err(io)?;
                    }
                    o.footer(
                        "summary",
                        &[
                            ("rows", json!(report.rows)),
                            ("checked", json!(report.checked)),
                            ("mismatches", json!(report.mismatches.len())),
                        ],
                    )
                    .map_err(io)?;
                    if !report.mismatches.is_empty() {
                        return Err(Failure::Compute(Error::CorruptCache {
                            path: cache.path_for(label),
                            reason: format!("{} mismatching rows", report.mismatches.len()),
                        }));
                    }
                }
                CacheAction::Clear => {
                    let removed = cache.clear(label)?;
                    let mut o = Output::new(tabular, out, "cache clear", &config).map_err(io)?;
                    o.columns(&["curve", "removed"]).map_err(io)?;
                    o.row(vec![json!(label), json!(removed)]).map_err(io)?;
                }
            }
        }
    }
    Ok(())
}

fn check_interval(alpha: f64, beta: f64) -> CliResult<()> {
    if !(0.0 <= alpha && alpha < beta && beta <= PI * (1.0 + 1e-15)) {
        return usage("--alpha/--beta", format!("need 0 <= alpha < beta <= PI, got [{alpha}, {beta}]"));
    }
    Ok(())
}

fn sum_config(a: &SumArgs, p: &SmoothingParams) -> Vec<(&'static str, Value)> {
    vec![
        ("curve", json!(a.curve.label)),
        ("alpha", json!(a.alpha)),
        ("beta", json!(a.beta)),
        ("x", json!(p.x())),
        ("A", json!(p.a())),
        ("budget", json!(a.budget)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert_eq!(parse_angle("PI/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("0.49PI").unwrap(), 0.49 * PI);
        assert_eq!(parse_angle("3PI/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("PI/0").is_err());
        assert!(parse_angle("xPI").is_err());
        assert!(parse_angle("PI4").is_err());
    }

    #[test]
    fn intervals() {
        assert_eq!(parse_interval("0,PI/4").unwrap(), (0.0, PI / 4.0));
        assert_eq!(parse_interval(" PI/2 , PI ").unwrap(), (PI / 2.0, PI));
        assert!(parse_interval("1,0.5").is_err());
        assert!(parse_interval("0,4").is_err());
        assert!(parse_interval("0.3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
