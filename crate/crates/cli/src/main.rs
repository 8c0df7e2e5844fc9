//! `ghost`: ghost coefficients, Newton polygons and verification sweeps from
//! the command line.
//!
//! Exit codes: 0 on success or an all-pass sweep, 1 when a sweep finds a
//! counterexample or a polygon cannot be certified, 2 on usage errors.

mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghost_slopes::suites::{self, Suite, SweepConfig};
use ghost_slopes::{GhostContext, GhostSeries, GlobalMultiplicity, Rat, WeightPoint};

use config::ConfigFile;
use error::CliError;
use output::{CoeffReport, NpReport, Rendered, VerifyReport};

#[derive(Parser, Debug)]
#[command(name = "ghost", version, about = "Ghost series slopes and their verifiers")]
struct Cli {
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zeros and degree of the n-th ghost coefficient.
    Coeff(Params),
    /// Newton polygon of the ghost series at a Gaussian point.
    Np(Params),
    /// Run a named verification sweep.
    Verify {
        /// One of: duality, vertex, gouvea, gm, dist, halo, mahler, delta,
        /// harmonic, al-theta-pstab, corank, companion.
        suite: String,
        #[command(flatten)]
        params: Params,
    },
}

/// Every tunable. Each subcommand reads the ones it needs.
#[derive(Args, Debug, Default, Clone)]
struct Params {
    /// Prime; `verify` accepts a comma-separated list.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    a: Option<i64>,
    #[arg(long)]
    b: Option<i64>,
    #[arg(long)]
    seps: Option<i64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    center: Option<i64>,
    /// Exact rational such as `3/2`, or `inf`.
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    /// Stretch factor of the global polygon; plain ghost polygon when absent.
    #[arg(long)]
    stretch: Option<u64>,
    #[arg(long)]
    m_prime: Option<u64>,
    #[arg(long)]
    m_second: Option<u64>,
    /// Upper bound on the weight index k•.
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long, alias = "pairs")]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated closeness exponents for the GM sweep.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    slack: Option<f64>,
    /// Comma-separated k• values for the distribution sweep.
    #[arg(long)]
    points: Option<String>,
    /// Comma-separated radii for the halo sweep.
    #[arg(long)]
    radii: Option<String>,
}

impl Params {
    fn merge(&mut self, file: &ConfigFile) -> Result<(), CliError> {
        file.fill(&mut self.p, "p")?;
        file.fill(&mut self.a, "a")?;
        file.fill(&mut self.b, "b")?;
        file.fill(&mut self.seps, "seps")?;
        file.fill(&mut self.n, "n")?;
        file.fill(&mut self.center, "center")?;
        file.fill(&mut self.radius, "radius")?;
        file.fill(&mut self.count, "count")?;
        file.fill(&mut self.stretch, "stretch")?;
        file.fill(&mut self.m_prime, "m-prime")?;
        file.fill(&mut self.m_second, "m-second")?;
        file.fill(&mut self.kmax, "kmax")?;
        file.fill(&mut self.nmax, "nmax")?;
        file.fill(&mut self.samples, "samples")?;
        file.fill(&mut self.seed, "seed")?;
        file.fill(&mut self.m, "m")?;
        file.fill(&mut self.slack, "slack")?;
        file.fill(&mut self.points, "points")?;
        file.fill(&mut self.radii, "radii")?;
        Ok(())
    }

    fn context(&self) -> Result<GhostContext, CliError> {
        let p = required(&self.p, "p")?;
        let p: u64 = p.trim().parse().map_err(|_| CliError::Usage(format!("--p {p:?} is not a prime")))?;
        let a = required(&self.a, "a")?;
        Ok(GhostContext::new(p, *a, self.b.unwrap_or(0), self.seps.unwrap_or(0))?)
    }

    fn sweep(&self, suite: Suite) -> Result<SweepConfig, CliError> {
        let mut cfg = SweepConfig::defaults(suite);
        if let Some(ps) = &self.p {
            cfg.primes = parse_list(ps, "p")?;
        }
        if self.a.is_some() {
            cfg.a = self.a;
        }
        if self.seps.is_some() {
            cfg.s = self.seps;
        }
        if let Some(k) = self.kmax {
            if k < 0 {
                return Err(CliError::Usage("--kmax must be nonnegative".into()));
            }
            cfg.kb_max = k;
        }
        if let Some(n) = self.nmax {
            if n == 0 {
                return Err(CliError::Usage("--nmax must be positive".into()));
            }
            cfg.n_max = n;
        }
        cfg.samples = self.samples.unwrap_or(cfg.samples);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if let Some(m) = &self.m {
            cfg.m_values = parse_list(m, "m")?;
        }
        if let Some(c) = self.slack {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::Usage("--slack must be a positive number".into()));
            }
            cfg.slack = c;
        }
        if let Some(pts) = &self.points {
            cfg.dist_points = parse_list(pts, "points")?;
        }
        if let Some(r) = &self.radii {
            cfg.radii = parse_list(r, "radii")?;
        }
        Ok(cfg)
    }
}

fn required<'a, T>(slot: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    slot.as_ref().ok_or_else(|| CliError::Usage(format!("missing --{name}")))
}

fn parse_list<T: FromStr>(raw: &str, name: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("--{name}: cannot parse {t:?}"))))
        .collect()
}

fn coeff(params: &Params) -> Result<Rendered, CliError> {
    let ctx = params.context()?;
    let n = *required(&params.n, "n")?;
    let g = ctx.ghost_coefficient(n)?;
    Ok(Rendered::ok(CoeffReport::new(&ctx, g)))
}

fn np(params: &Params) -> Result<Rendered, CliError> {
    let ctx = params.context()?;
    let center = *required(&params.center, "center")?;
    let radius: Rat = params.radius.as_deref().unwrap_or("inf").parse()?;
    let count = params.count.unwrap_or(10);
    let w = WeightPoint::new(center, radius)?;
    let series = GhostSeries::new(ctx.clone());
    let polygon = match params.stretch {
        None => series.ghost_np(&w, count)?,
        Some(m) => {
            let mult = match (params.m_prime, params.m_second) {
                (None, None) => GlobalMultiplicity::nonsplit(m),
                (Some(a), Some(b)) if a + b == m => GlobalMultiplicity::split(a, b),
                _ => return Err(CliError::Usage("--m-prime and --m-second must both be given and sum to --stretch".into())),
            };
            series.global_np(&w, mult, count)?
        }
    };
    Ok(Rendered::ok(NpReport::new(&ctx, &w, count, &polygon)))
}

fn verify(suite: &str, params: &Params) -> Result<Rendered, CliError> {
    let suite: Suite = suite.parse().map_err(|_| CliError::Usage(format!("unknown suite {suite:?}")))?;
    let cfg = params.sweep(suite)?;
    let report = suites::run(suite, &cfg)?;
    let passed = report.tally.ok();
    let rendered = VerifyReport::new(&cfg, report);
    Ok(if passed { Rendered::ok(rendered) } else { Rendered::counterexample(rendered) })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut format = cli.format;
    file.fill(&mut format, "format")?;
    let mut out = cli.out;
    file.fill(&mut out, "out")?;
    let rendered = match cli.command {
        Command::Coeff(mut p) => {
            p.merge(&file)?;
            coeff(&p)?
        }
        Command::Np(mut p) => {
            p.merge(&file)?;
            np(&p)?
        }
        Command::Verify { suite, mut params } => {
            params.merge(&file)?;
            verify(&suite, &params)?
        }
    };
    rendered.write(format.unwrap_or(Format::Json), out.as_deref())?;
    Ok(ExitCode::from(rendered.exit_code()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ghost: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
