//! The `pslab` command-line front end.
//!
//! Exit codes: 0 success, 1 invariant failure (or a computation that could
//! not finish), 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{PrimeSum, WeightMode};
use crate::gamma::{assemble_report, enumerate_solutions, FourierSettings, GammaContext, ReportOptions};
use crate::kernel::{build_kernel, default_grid};
use crate::output::{envelope, write_atomic, Cell, Csv};
use crate::params::{derive_instance, Overrides, ProblemInstance, Violation};
use crate::primes::sieve_range;
use crate::sieve::{build_rosser, collapse_weights, frak_values};
use crate::verify::{self, Fault, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pslab", version, about = "Prime triples near p1^c + p2^c + p3^c = N, at desk scale")]
pub struct Cli {
    /// Worker threads (falls back to PSLAB_THREADS, then all cores).
    #[arg(long, global = true, env = "PSLAB_THREADS")]
    pub threads: Option<usize>,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Exponent c.
    #[arg(long)]
    pub c: Option<f64>,
    /// Target N.
    #[arg(long)]
    pub n: Option<f64>,
    /// Window exponent E in Δ = (log N)^-E.
    #[arg(long = "e-power")]
    pub e_power: Option<f64>,
    /// Replace a derived parameter, `key=value` (repeatable).
    #[arg(long = "override", short = 'O', value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Flat `key = value` file with c, n, e_power and override keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Keep at most this many solutions (the total count is always exact).
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
    /// Skip the Fourier-side quantities.
    #[arg(long)]
    pub no_fourier: bool,
    /// Relative target for the truncated Fourier tail.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Fixed truncation point of the Fourier integrals.
    #[arg(long)]
    pub x_cut: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// plus, minus, moebius or unsieved.
    #[arg(long, default_value = "unsieved")]
    pub mode: WeightMode,
}

#[derive(Debug, Clone, Args)]
pub struct SieveArgs {
    #[arg(long)]
    pub z: f64,
    /// Sieve level D.
    #[arg(long = "d-level")]
    pub d_level: f64,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 0.875)]
    pub a: f64,
    #[arg(long, default_value_t = 0.125)]
    pub dk: f64,
    #[arg(long, default_value_t = 3)]
    pub r: u32,
    /// One x per line; defaults to 10^4 log-spaced points on [1e-3, 1e6].
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrimesArgs {
    #[arg(long)]
    pub lo: f64,
    #[arg(long)]
    pub hi: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// params, primes, kernel, sieve, expsum, gamma or all (repeatable).
    #[arg(long, default_value = "all")]
    pub suite: Vec<String>,
    /// Seed for the randomized trials.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FaultArg {
    Sandwich,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive every parameter and list constraint violations.
    Derive(InstanceArgs),
    /// Like derive, but exit 1 when the instance is not admissible.
    Validate(InstanceArgs),
    /// Enumerate solution triples (CSV: p1,p2,p3,value,omega1,omega2,omega3).
    Solve(SolveArgs),
    /// Full report of direct and Fourier-side counts.
    Report(ReportArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Weighted prime sum L(x) on a grid (CSV: x,re,im,abs).
    Grid(GridArgs),
    /// Rosser weights (CSV: d,lambda_plus,lambda_minus).
    SieveTable(SieveArgs),
    /// Sieve main-term sums and sieve functions.
    SieveSummary(SieveArgs),
    /// Kernel transform and its bound (CSV: x,theta_hat,bound).
    KernelDump(KernelArgs),
    /// Primes with p + 2 factor counts (CSV: p,log_p,omega_p_plus_2).
    PrimesDump(PrimesArgs),
    #[command(subcommand)]
    Gamma(GammaCommand),
    #[command(subcommand)]
    Expsum(ExpsumCommand),
    #[command(subcommand)]
    Kernel(KernelCommand),
    #[command(subcommand)]
    Primes(PrimesCommand),
    #[command(subcommand)]
    Sieve(SieveCommand),
}

#[derive(Debug, Subcommand)]
pub enum GammaCommand {
    /// Same as `pslab report`.
    Report(ReportArgs),
    /// Same as `pslab solve`.
    Solve(SolveArgs),
}

#[derive(Debug, Subcommand)]
pub enum ExpsumCommand {
    /// Same as `pslab grid`.
    Grid(GridArgs),
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Same as `pslab kernel-dump`.
    Dump(KernelArgs),
}

#[derive(Debug, Subcommand)]
pub enum PrimesCommand {
    /// Same as `pslab primes-dump`.
    Dump(PrimesArgs),
}

#[derive(Debug, Subcommand)]
pub enum SieveCommand {
    /// Same as `pslab sieve-table`.
    Table(SieveArgs),
    /// Same as `pslab sieve-summary`.
    Summary(SieveArgs),
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("config line {}: `{}` is not a number", lineno + 1, v.trim())))?;
        out.push((k.trim().replace('-', "_"), v));
    }
    Ok(out)
}

impl InstanceArgs {
    /// Config file first, then flags on top.
    pub fn resolve(&self) -> Result<ProblemInstance> {
        let (mut c, mut n, mut e) = (None, None, None);
        let mut ov = Overrides::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (k, v) in parse_config(&text)? {
                match k.as_str() {
                    "c" => c = Some(v),
                    "n" => n = Some(v),
                    "e_power" | "e" => e = Some(v),
                    _ => ov.set(&k, v)?,
                }
            }
        }
        c = self.c.or(c);
        n = self.n.or(n);
        e = self.e_power.or(e);
        for a in &self.overrides {
            ov.parse_assignment(a)?;
        }
        let c = c.ok_or_else(|| Error::Usage("missing --c".into()))?;
        let n = n.ok_or_else(|| Error::Usage("missing --n".into()))?;
        derive_instance(c, n, e.unwrap_or(1.0), &ov)
    }
}

#[derive(Serialize)]
struct DerivePayload {
    params: ProblemInstance,
    defaults_used: bool,
    validation: Vec<Violation>,
}

struct Ctx {
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => write_atomic(p, text),
            None => {
                use std::io::Write;
                match std::io::stdout().lock().write_all(text.as_bytes()) {
                    // A closed pipe (`| head`) is the reader's choice, not a failure.
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                    _ => Ok(()),
                }
            }
        }
    }

    fn json_only(&self, what: &str) -> Result<()> {
        match self.format {
            Some(Format::Csv) => Err(Error::Usage(format!("{what} only writes JSON"))),
            _ => Ok(()),
        }
    }

    fn tabular(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }
}

/// Rows as a CSV table or a JSON array of objects.
fn emit_table(ctx: &Ctx, kind: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<()> {
    match ctx.tabular() {
        Format::Csv => {
            let mut csv = Csv::new(header);
            for r in rows {
                csv.row(r);
            }
            ctx.emit(&csv.finish())
        }
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .into_iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, c)| {
                            let v = match c {
                                Cell::Int(i) => serde_json::Value::from(i as i64),
                                Cell::Float(f) => serde_json::Value::from(f),
                            };
                            (h.to_string(), v)
                        })
                        .collect()
                })
                .collect();
            ctx.emit(&envelope(kind, &objs)?)
        }
    }
}

fn read_grid(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Usage(format!("{}: `{l}` is not a number", path.display())))
        })
        .collect()
}

fn cmd_derive(ctx: &Ctx, args: &InstanceArgs, strict: bool) -> Result<i32> {
    ctx.json_only("derive")?;
    let inst = args.resolve()?;
    let validation = inst.validate();
    let failed = !validation.is_empty();
    for v in &validation {
        eprintln!("warning: {}: {}", v.constraint, v.message);
    }
    let payload = DerivePayload {
        defaults_used: inst.used_defaults(),
        params: inst,
        validation,
    };
    ctx.emit(&envelope("params", &payload)?)?;
    Ok(if strict && failed { EXIT_INVARIANT } else { EXIT_OK })
}

fn cmd_solve(ctx: &Ctx, args: &SolveArgs) -> Result<i32> {
    let inst = args.instance.resolve()?;
    let g = GammaContext::new(&inst)?;
    let list = enumerate_solutions(&g, args.cap);
    eprintln!(
        "{} solutions{}",
        list.count,
        if list.truncated { format!(" ({} written)", list.solutions.len()) } else { String::new() }
    );
    match ctx.tabular() {
        Format::Csv => {
            let mut csv = Csv::new(&["p1", "p2", "p3", "value", "omega1", "omega2", "omega3"]);
            for s in &list.solutions {
                csv.row([
                    s.p1.into(),
                    s.p2.into(),
                    s.p3.into(),
                    s.value.into(),
                    s.omegas[0].into(),
                    s.omegas[1].into(),
                    s.omegas[2].into(),
                ]);
            }
            ctx.emit(&csv.finish())?;
        }
        Format::Json => ctx.emit(&envelope("solutions", &list)?)?,
    }
    Ok(EXIT_OK)
}

fn cmd_report(ctx: &Ctx, args: &ReportArgs) -> Result<i32> {
    ctx.json_only("report")?;
    let inst = args.instance.resolve()?;
    let opts = ReportOptions {
        cap: args.cap,
        fourier: !args.no_fourier,
        settings: FourierSettings {
            x_cut: args.x_cut,
            tol: args.tol,
            ..FourierSettings::default()
        },
    };
    let rep = assemble_report(&inst, &opts)?;
    for f in rep.flags.iter().filter(|f| !f.holds) {
        eprintln!("violated: {} (lhs {}, rhs {})", f.name, f.lhs, f.rhs);
    }
    ctx.emit(&envelope("gamma_report", &rep)?)?;
    Ok(if rep.exact_inequalities_hold { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> Result<i32> {
    ctx.json_only("verify")?;
    let mut suites = Vec::new();
    for s in &args.suite {
        if s == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(s.parse()?);
        }
    }
    let rep = verify::run(&VerifyOptions {
        suites,
        seed: args.seed,
        fault: args.inject_fault.map(|FaultArg::Sandwich| Fault::Sandwich),
    });
    for c in &rep.checks {
        eprintln!(
            "{} {}/{}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite.name(),
            c.name,
            c.detail
        );
    }
    ctx.emit(&envelope("verify", &rep)?)?;
    Ok(if rep.all_passed() { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_grid(ctx: &Ctx, args: &GridArgs) -> Result<i32> {
    let inst = args.instance.resolve()?;
    let table = sieve_range(inst.lower(), inst.x)?;
    let table = match args.mode {
        WeightMode::Plus | WeightMode::Minus => collapse_weights(&build_rosser(inst.d_level, inst.z)?, table),
        _ => table,
    };
    let sum = PrimeSum::new(&inst, &table, args.mode)?;
    let xs: Vec<f64> = match args.points {
        0 => Vec::new(),
        1 => vec![args.x_min],
        n => (0..n)
            .map(|i| args.x_min + (args.x_max - args.x_min) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let rows = xs
        .into_iter()
        .map(|x| {
            let v = sum.eval(x);
            vec![x.into(), v.re.into(), v.im.into(), v.norm().into()]
        })
        .collect();
    emit_table(ctx, "grid", &["x", "re", "im", "abs"], rows)?;
    Ok(EXIT_OK)
}

fn cmd_sieve_table(ctx: &Ctx, args: &SieveArgs) -> Result<i32> {
    let w = build_rosser(args.d_level, args.z)?;
    let rows = w
        .rows()
        .into_iter()
        .map(|(d, p, m)| vec![d.into(), p.into(), m.into()])
        .collect();
    emit_table(ctx, "sieve_table", &["d", "lambda_plus", "lambda_minus"], rows)?;
    Ok(EXIT_OK)
}

fn cmd_sieve_summary(ctx: &Ctx, args: &SieveArgs) -> Result<i32> {
    ctx.json_only("sieve-summary")?;
    let w = build_rosser(args.d_level, args.z)?;
    let s = frak_values(&w);
    ctx.emit(&envelope("sieve_summary", &s)?)?;
    Ok(if s.sandwich_holds() { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_kernel_dump(ctx: &Ctx, args: &KernelArgs) -> Result<i32> {
    let k = build_kernel(args.a, args.dk, args.r)?;
    let grid = match &args.grid_file {
        Some(p) => read_grid(p)?,
        None => default_grid(),
    };
    let rows = grid
        .into_iter()
        .map(|x| vec![x.into(), k.theta_hat(x).into(), k.bound(x).into()])
        .collect();
    emit_table(ctx, "kernel_dump", &["x", "theta_hat", "bound"], rows)?;
    Ok(EXIT_OK)
}

fn cmd_primes_dump(ctx: &Ctx, args: &PrimesArgs) -> Result<i32> {
    let t = sieve_range(args.lo, args.hi)?;
    let rows = (0..t.len())
        .map(|i| vec![t.primes[i].into(), t.logp[i].into(), t.omega_p2[i].into()])
        .collect();
    emit_table(ctx, "primes", &["p", "log_p", "omega_p_plus_2"], rows)?;
    Ok(EXIT_OK)
}

fn dispatch(ctx: &Ctx, cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Derive(a) => cmd_derive(ctx, a, false),
        Command::Validate(a) => cmd_derive(ctx, a, true),
        Command::Solve(a) | Command::Gamma(GammaCommand::Solve(a)) => cmd_solve(ctx, a),
        Command::Report(a) | Command::Gamma(GammaCommand::Report(a)) => cmd_report(ctx, a),
        Command::Verify(a) => cmd_verify(ctx, a),
        Command::Grid(a) | Command::Expsum(ExpsumCommand::Grid(a)) => cmd_grid(ctx, a),
        Command::SieveTable(a) | Command::Sieve(SieveCommand::Table(a)) => cmd_sieve_table(ctx, a),
        Command::SieveSummary(a) | Command::Sieve(SieveCommand::Summary(a)) => cmd_sieve_summary(ctx, a),
        Command::KernelDump(a) | Command::Kernel(KernelCommand::Dump(a)) => cmd_kernel_dump(ctx, a),
        Command::PrimesDump(a) | Command::Primes(PrimesCommand::Dump(a)) => cmd_primes_dump(ctx, a),
    }
}

/// Exit code for an error that escaped a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::InvalidParams(_) | Error::Domain(_) => EXIT_USAGE,
        _ => EXIT_INVARIANT,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: usage: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // Fails only if a pool already exists, which keeps its own size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Ctx {
        out: cli.out,
        format: cli.format,
    };
    match dispatch(&ctx, &cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
