//! Command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 on usage or configuration errors,
//! 2 when a checked property is violated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::approx::ApproxConfig;
use crate::domains::{feasibility_bound, sample_a, sample_aminus, DomainSpec};
use crate::error::{Error, Result};
use crate::geometry::{operator_samples, solve_bowl, BowlProfile, OperatorSample};
use crate::properties::{
    check_cor25, check_lemma23, check_lemma24, check_lemma26, check_lemma27, PropertyReport,
    DEFAULT_DELTA_GRID,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// `bowl` requires `max lhs22 <= LHS22_TOL`.
pub const LHS22_TOL: f64 = 1e-4;
/// `bowl` requires `term24 <= TERM24_TOL`.
pub const TERM24_TOL: f64 = 1e-10;
/// Slack on unit-norm and curvature-sum identities in `bowl`.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "smoothmin", version, about = "Smooth minimum campaigns and bowl soliton checks")]
pub struct Cli {
    /// Worker threads for campaigns (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run randomized property campaigns and write JSON reports.
    Verify(VerifyArgs),
    /// Integrate the bowl soliton and export profile and operator CSVs.
    Bowl(BowlArgs),
    /// Draw seeded points from an admissible cone.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    Lemma23,
    Lemma24,
    Cor25,
    Lemma26,
    Lemma27,
    All,
}

impl Lemma {
    fn id(self) -> &'static str {
        match self {
            Lemma::Lemma23 => "lemma23",
            Lemma::Lemma24 => "lemma24",
            Lemma::Cor25 => "cor25",
            Lemma::Lemma26 => "lemma26",
            Lemma::Lemma27 => "lemma27",
            Lemma::All => "all",
        }
    }

    fn expand(self) -> Vec<Lemma> {
        match self {
            Lemma::All => vec![
                Lemma::Lemma23,
                Lemma::Lemma24,
                Lemma::Cor25,
                Lemma::Lemma26,
                Lemma::Lemma27,
            ],
            l => vec![l],
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub lemma: Lemma,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Defaults to 0.5 for n = 2 and 0.9 beta_max(n, alpha) otherwise.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    /// Strictly decreasing, comma separated; used by lemma26.
    #[arg(long, value_delimiter = ',')]
    pub delta_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving `<lemma>.json`; reports go to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BowlArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 30.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    /// Residuals of the continuum identities must stay below `constant * step^2`.
    #[arg(long, default_value_t = 10.0)]
    pub residual_constant: f64,
    #[arg(long, default_value = "bowl")]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainKind {
    #[value(name = "A")]
    A,
    #[value(name = "Aminus")]
    Aminus,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub domain: DomainKind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Defaults as for `verify`.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: RunParams,
    pub version: String,
    /// RFC 3339, UTC. Not part of the reproducibility contract.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, params: RunParams) -> Self {
        Self {
            command: command.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "# manifest {}\n",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

/// A report file: the report's fields with the manifest alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(flatten)]
    pub report: PropertyReport,
    pub manifest: RunManifest,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        // Fails only if a global pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let outcome = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Bowl(a) => cmd_bowl(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Violation(m)) => {
            eprintln!("violation: {m}");
            EXIT_VIOLATION
        }
    }
}

/// `beta` if given, else 0.5 for `n = 2` and `0.9 beta_max(n, alpha)` beyond.
pub fn default_beta(n: usize, alpha: f64, beta: Option<f64>) -> Result<f64> {
    match beta {
        Some(b) => Ok(b),
        None if n <= 2 => Ok(0.5),
        None => Ok(0.9 * feasibility_bound(n, alpha)?),
    }
}

fn cmd_verify(a: &VerifyArgs) -> std::result::Result<(), Failure> {
    let beta = default_beta(a.n, a.alpha, a.beta)?;
    let spec = DomainSpec::new(a.n, a.alpha, beta)?;
    let grid = a.delta_grid.clone().unwrap_or_else(|| DEFAULT_DELTA_GRID.to_vec());
    let lemmas = a.lemma.expand();
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
    }

    let mut failed = Vec::new();
    for lemma in lemmas {
        if a.lemma == Lemma::All && lemma == Lemma::Lemma24 && a.n < 3 {
            eprintln!("lemma24: skipped, needs n >= 3");
            continue;
        }
        let report = match lemma {
            Lemma::Lemma23 => check_lemma23(&spec.with_n(2), a.delta, a.seed, a.samples)?,
            Lemma::Lemma24 => check_lemma24(&spec, a.delta, a.seed, a.samples)?,
            Lemma::Cor25 => check_cor25(&spec, a.delta, a.seed, a.samples)?,
            Lemma::Lemma26 => check_lemma26(&spec, &grid, a.seed, a.samples)?,
            Lemma::Lemma27 => check_lemma27(&spec, a.delta, a.seed, a.samples)?,
            Lemma::All => unreachable!("expanded above"),
        };
        let params = RunParams {
            lemma: Some(lemma.id().to_string()),
            n: report.spec.n,
            alpha: Some(spec.alpha),
            beta: Some(report.spec.beta),
            delta: report.delta,
            delta_grid: report.delta_grid.clone(),
            seed: Some(a.seed),
            samples: Some(a.samples),
            ..RunParams::default()
        };
        eprintln!("{}", summary_line(&report));
        if !report.passed() {
            failed.push(lemma.id());
        }
        let file = ReportFile {
            report,
            manifest: RunManifest::new("verify", params),
        };
        let json = serde_json::to_string_pretty(&file).expect("report serializes");
        match &a.out {
            Some(dir) => fs::write(dir.join(format!("{}.json", lemma.id())), json + "\n")?,
            None => println!("{json}"),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("properties violated in {}", failed.join(", "))))
    }
}

fn summary_line(r: &PropertyReport) -> String {
    let worst = r
        .worst_margin
        .map_or_else(|| "none".to_string(), |w| format!("{w:.3e}"));
    format!(
        "{}: {} (samples {}, violations {}, worst margin {})",
        r.lemma_id,
        if r.passed() { "PASS" } else { "FAIL" },
        r.samples_tested,
        r.violations,
        worst
    )
}

/// Full-precision float for CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

pub const PROFILE_COLUMNS: [&str; 9] =
    ["r", "u", "u_p", "u_pp", "kappa_rad", "kappa_ang", "H", "nu_e", "tau_e"];
pub const OPERATOR_COLUMNS: [&str; 11] = [
    "r",
    "mu_n",
    "Q_delta",
    "L_H",
    "L_mu",
    "L_Q",
    "term24",
    "residual18",
    "residual21",
    "lhs22",
    "rhs22",
];

pub fn profile_csv(p: &BowlProfile, manifest: &RunManifest) -> String {
    let mut s = manifest.csv_line();
    s.push_str(&PROFILE_COLUMNS.join(","));
    s.push('\n');
    for i in 0..p.len() {
        csv_row(
            &mut s,
            &[
                p.r_grid[i],
                p.u[i],
                p.u_p[i],
                p.u_pp[i],
                p.kappa_rad[i],
                p.kappa_ang[i],
                p.h[i],
                p.nu_e[i],
                p.tau_e[i],
            ],
        );
    }
    s
}

pub fn operator_csv(samples: &[OperatorSample], manifest: &RunManifest) -> String {
    let mut s = manifest.csv_line();
    s.push_str(&OPERATOR_COLUMNS.join(","));
    s.push('\n');
    for o in samples {
        csv_row(
            &mut s,
            &[
                o.r,
                o.mu_n,
                o.q_delta,
                o.l_h,
                o.l_mu,
                o.l_q,
                o.term24,
                o.residual18,
                o.residual21,
                o.lhs22,
                o.rhs22,
            ],
        );
    }
    s
}

/// Failed invariants of a bowl run, one message each.
pub fn bowl_failures(p: &BowlProfile, ops: &[OperatorSample], residual_constant: f64) -> Vec<String> {
    let mut f = Vec::new();
    let nf = (p.n - 1) as f64;
    for i in 0..p.len() {
        let r = p.r_grid[i];
        if (p.h[i] - p.kappa_rad[i] - nf * p.kappa_ang[i]).abs() > IDENTITY_TOL {
            f.push(format!("H != sum of curvatures at r = {r}"));
        }
        if (p.nu_e[i].powi(2) + p.tau_e[i].powi(2) - 1.0).abs() > IDENTITY_TOL {
            f.push(format!("nu_e^2 + tau_e^2 != 1 at r = {r}"));
        }
        let (kr, ka) = (p.kappa_rad[i], p.kappa_ang[i]);
        if !(kr > 0.0 && ka > 0.0 && kr < 1.0 && ka < 1.0) {
            f.push(format!("curvature outside (0, 1) at r = {r}"));
        }
    }
    let bound = residual_constant * p.step * p.step;
    let q_max = 1.0 / nf;
    let mut worst = |name: &str, v: f64, limit: f64| {
        if !(v <= limit) {
            f.push(format!("{name} = {v:e} exceeds {limit:e}"));
        }
    };
    let max_of = |g: &dyn Fn(&OperatorSample) -> f64| {
        ops.iter().map(g).fold(f64::NEG_INFINITY, f64::max)
    };
    worst("max |residual18|", max_of(&|o| o.residual18.abs()), bound);
    worst("max |residual21|", max_of(&|o| o.residual21.abs()), bound);
    worst("max |lhs22 - rhs22|", max_of(&|o| (o.lhs22 - o.rhs22).abs()), bound);
    worst("max lhs22", max_of(&|o| o.lhs22), LHS22_TOL);
    worst("max term24", max_of(&|o| o.term24), TERM24_TOL);
    worst("max Q_delta", max_of(&|o| o.q_delta), q_max + IDENTITY_TOL);
    let q_min = -max_of(&|o| -o.q_delta);
    if !(q_min > 0.0) {
        f.push(format!("min Q_delta = {q_min:e} is not positive"));
    }
    f
}

fn cmd_bowl(a: &BowlArgs) -> std::result::Result<(), Failure> {
    let profile = solve_bowl(a.n, a.rmax, a.step)?;
    let cfg = ApproxConfig::new(a.n, a.delta)?;
    let ops = operator_samples(&profile, &cfg)?;
    let manifest = RunManifest::new(
        "bowl",
        RunParams {
            n: a.n,
            delta: Some(a.delta),
            r_max: Some(a.rmax),
            step: Some(a.step),
            residual_constant: Some(a.residual_constant),
            ..RunParams::default()
        },
    );
    let prefix = a.out_prefix.to_string_lossy().into_owned();
    write_file(Path::new(&format!("{prefix}_profile.csv")), &profile_csv(&profile, &manifest))?;
    write_file(Path::new(&format!("{prefix}_operator.csv")), &operator_csv(&ops, &manifest))?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "bowl n = {} step = {}: translator residual {:.3e}, two-convexity ratio {:.6}",
        a.n,
        a.step,
        profile.translator_residual(),
        profile.two_convexity_ratio()
    );
    print!("{summary}");
    let failures = bowl_failures(&profile, &ops, a.residual_constant);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(failures.join("; ")))
    }
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)
}

fn cmd_sample(a: &SampleArgs) -> std::result::Result<(), Failure> {
    let beta = default_beta(a.n, a.alpha, a.beta)?;
    let spec = DomainSpec::new(a.n, a.alpha, beta)?;
    let (name, points) = match a.domain {
        DomainKind::A => ("A", sample_a(&spec, a.seed, a.count)?),
        DomainKind::Aminus => ("Aminus", sample_aminus(&spec, a.seed, a.count)?),
    };
    let manifest = RunManifest::new(
        "sample",
        RunParams {
            domain: Some(name.to_string()),
            n: a.n,
            alpha: Some(a.alpha),
            beta: Some(beta),
            seed: Some(a.seed),
            samples: Some(a.count),
            ..RunParams::default()
        },
    );
    let mut s = manifest.csv_line();
    let header: Vec<String> = (1..=a.n).map(|i| format!("x{i}")).collect();
    s.push_str(&header.join(","));
    s.push('\n');
    let mut outside = 0usize;
    for p in &points {
        let member = match a.domain {
            DomainKind::A => spec.contains(p),
            DomainKind::Aminus => spec.contains_minus(p),
        };
        if !member {
            outside += 1;
        }
        csv_row(&mut s, p.coords());
    }
    match &a.out {
        Some(path) => write_file(path, &s)?,
        None => print!("{s}"),
    }
    if outside > 0 {
        return Err(Failure::Violation(format!("{outside} sampled rows fail membership")));
    }
    Ok(())
}
