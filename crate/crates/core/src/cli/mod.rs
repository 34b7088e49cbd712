//! Batch front end: `thirring-lab <group> <command> [flags]`.
//!
//! Parameters come from the command's defaults, then the `[group-command]`
//! section of `--config`, then flags. Every run writes its payloads and a
//! `*.manifest.json` echoing the resolved parameters into the output
//! directory (`--out`, else `out_dir` in the config, else `$THIRRING_LAB_OUT`,
//! else `./thirring-lab-out`).
//!
//! Exit codes: 0 success, 1 contract or configuration error, 2 numerical
//! failure, 3 a `verify` check failed.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use self::commands::*;
use self::config::{check_section, resolve, FileConfig, SectionCheck};
use self::output::OutputSet;
use crate::error::{LabError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "THIRRING_LAB_OUT";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "thirring-lab", version, about = "Exact Thirring correlators, Ising exponents and Monte Carlo")]
pub struct Cli {
    /// TOML file with `seed`, `out_dir` and one flat section per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub group: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Exact correlators of the massless model.
    #[command(subcommand)]
    Thirring(ThirringCmd),
    /// Property suites; exit code 3 when a check fails.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Exact nearest-neighbour Ising solver.
    #[command(subcommand)]
    Ising(IsingCmd),
    /// Monte Carlo for the perturbed and double Ising models.
    #[command(subcommand)]
    Mc(McCmd),
    /// Exponent fits.
    #[command(subcommand)]
    Fit(FitCmd),
    /// Derived reports.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
pub enum ThirringCmd {
    /// Anomaly coefficients nu, nu_bar, a, a_bar and eta.
    Anomalies(AnomaliesArgs),
    /// Two-point function on a radial grid.
    Eval2(Eval2Args),
    /// n-point functions at random configurations.
    Evaln(EvalnArgs),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    Axioms(AxiomsArgs),
    Bosonization(BosonizationArgs),
    Wti(WtiArgs),
}

#[derive(Debug, Subcommand)]
pub enum IsingCmd {
    /// Energy correlator and exponent fit from the Pfaffian solver.
    Exact(IsingExactArgs),
}

#[derive(Debug, Subcommand)]
pub enum McCmd {
    /// Connected correlators of the energy observables.
    Run(McRunArgs),
    /// Critical temperature from Binder cumulant crossings.
    LocateTc(LocateTcArgs),
}

#[derive(Debug, Subcommand)]
pub enum FitCmd {
    Powerlaw(FitArgs),
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Product of the O+ and O- exponents.
    Kadanoff(KadanoffArgs),
}

/// Section names with the validators of their parameter sets.
pub fn sections() -> Vec<(&'static str, SectionCheck)> {
    vec![
        ("thirring-anomalies", check_section::<AnomaliesParams>),
        ("thirring-eval2", check_section::<Eval2Params>),
        ("thirring-evaln", check_section::<EvalnParams>),
        ("verify-axioms", check_section::<AxiomsParams>),
        ("verify-bosonization", check_section::<BosonizationParams>),
        ("verify-wti", check_section::<WtiParams>),
        ("ising-exact", check_section::<IsingExactParams>),
        ("mc-run", check_section::<McRunParams>),
        ("mc-locate-tc", check_section::<LocateTcParams>),
        ("fit-powerlaw", check_section::<FitParams>),
        ("report-kadanoff", check_section::<KadanoffParams>),
    ]
}

fn section_name(group: &Group) -> &'static str {
    match group {
        Group::Thirring(ThirringCmd::Anomalies(_)) => "thirring-anomalies",
        Group::Thirring(ThirringCmd::Eval2(_)) => "thirring-eval2",
        Group::Thirring(ThirringCmd::Evaln(_)) => "thirring-evaln",
        Group::Verify(VerifyCmd::Axioms(_)) => "verify-axioms",
        Group::Verify(VerifyCmd::Bosonization(_)) => "verify-bosonization",
        Group::Verify(VerifyCmd::Wti(_)) => "verify-wti",
        Group::Ising(IsingCmd::Exact(_)) => "ising-exact",
        Group::Mc(McCmd::Run(_)) => "mc-run",
        Group::Mc(McCmd::LocateTc(_)) => "mc-locate-tc",
        Group::Fit(FitCmd::Powerlaw(_)) => "fit-powerlaw",
        Group::Report(ReportCmd::Kadanoff(_)) => "report-kadanoff",
    }
}

struct Resolved {
    seed: u64,
    out_dir: PathBuf,
    file: FileConfig,
}

impl Resolved {
    fn params<P, O>(&self, name: &str, flags: &O) -> Result<P>
    where
        P: serde::de::DeserializeOwned + Serialize + Default,
        O: Serialize,
    {
        resolve(self.file.section(name), flags)
    }
}

/// Runs one command and returns its outcome, the resolved parameters and the
/// manifest path.
fn execute(cli: &Cli) -> Result<(Outcome, std::path::PathBuf)> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path, &sections())?,
        None => FileConfig::default(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| file.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("thirring-lab-out"));
    let r = Resolved {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out_dir,
        file,
    };
    let name = section_name(&cli.group);
    let mut out = OutputSet::new(&r.out_dir, name)?;
    let seed = r.seed;

    fn echo<P: Serialize>(p: &P) -> serde_json::Value {
        serde_json::to_value(p).expect("parameters serialize")
    }
    let (outcome, params) = match &cli.group {
        Group::Thirring(ThirringCmd::Anomalies(a)) => {
            let p: AnomaliesParams = r.params(name, a)?;
            (thirring_anomalies(&p, &mut out)?, echo(&p))
        }
        Group::Thirring(ThirringCmd::Eval2(a)) => {
            let p: Eval2Params = r.params(name, a)?;
            (thirring_eval2(&p, &mut out)?, echo(&p))
        }
        Group::Thirring(ThirringCmd::Evaln(a)) => {
            let p: EvalnParams = r.params(name, a)?;
            (thirring_evaln(&p, seed, &mut out)?, echo(&p))
        }
        Group::Verify(VerifyCmd::Axioms(a)) => {
            let p: AxiomsParams = r.params(name, a)?;
            (verify_axioms(&p, seed, &mut out)?, echo(&p))
        }
        Group::Verify(VerifyCmd::Bosonization(a)) => {
            let p: BosonizationParams = r.params(name, a)?;
            (verify_bosonization(&p, seed, &mut out)?, echo(&p))
        }
        Group::Verify(VerifyCmd::Wti(a)) => {
            let p: WtiParams = r.params(name, a)?;
            (verify_wti(&p, &mut out)?, echo(&p))
        }
        Group::Ising(IsingCmd::Exact(a)) => {
            let p: IsingExactParams = r.params(name, a)?;
            (ising_exact(&p, &mut out)?, echo(&p))
        }
        Group::Mc(McCmd::Run(a)) => {
            let p: McRunParams = r.params(name, a)?;
            (mc_run(&p, seed, &mut out)?, echo(&p))
        }
        Group::Mc(McCmd::LocateTc(a)) => {
            let p: LocateTcParams = r.params(name, a)?;
            (mc_locate_tc(&p, seed, &mut out)?, echo(&p))
        }
        Group::Fit(FitCmd::Powerlaw(a)) => {
            let p: FitParams = r.params(name, a)?;
            (fit_powerlaw(&p, &mut out)?, echo(&p))
        }
        Group::Report(ReportCmd::Kadanoff(a)) => {
            let p: KadanoffParams = r.params(name, a)?;
            (report_kadanoff(&p, &mut out)?, echo(&p))
        }
    };
    let config = json!({ "seed": seed, "out_dir": r.out_dir, "section": name, "params": params });
    let manifest = out.finish(name, config, outcome.exit_code)?;
    Ok((outcome, manifest))
}

/// Parses `args` (including the program name), runs the command on a pool of
/// `--threads` workers and returns the process exit code. Diagnostics go to
/// standard error, the JSON summary to standard output.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("thirring-lab: --threads must be positive");
            return 1;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("thirring-lab: cannot start worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok((outcome, manifest)) => {
            let text = serde_json::to_string_pretty(&outcome.summary).unwrap_or_default();
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{text}");
            if outcome.exit_code == 3 {
                eprintln!("thirring-lab: checks failed, see {}", manifest.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("thirring-lab: {e}");
            e.exit_code()
        }
    }
}

impl From<toml::de::Error> for LabError {
    fn from(e: toml::de::Error) -> Self {
        LabError::Config(e.to_string())
    }
}
