//! The `pbna` command-line tool.
//!
//! Exit codes: 0 feasible or success, 1 error, 2 infeasible (or a forced
//! simulation that failed to decode), 3 unsupported zero pattern, 4 oracle
//! cap exceeded.

pub mod report;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pbna_core::feasibility::{
    check_feasibility, CheckParams, FeasibilityError, FeasibilityReport, OracleMode, Outcome,
};
use pbna_core::netgraph::{parse_network, ExtendedNetwork, Network};
use pbna_core::oracle::{OracleError, DEFAULT_CAP};
use pbna_core::simulate::{run_pbna, SimError, SimParams, DEFAULT_MAX_RESAMPLES};

use report::{Report, ReportFile, SimulationReport};
use sweep::What;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    Error = 1,
    Negative = 2,
    Unsupported = 3,
    OracleCap = 4,
}

#[derive(Debug, Parser)]
#[command(
    name = "pbna",
    version,
    about = "Alignment feasibility for three unicast sessions on a DAG"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether alignment is feasible on a graph
    Check(CheckArgs),
    /// Check feasibility, then run the scheme end to end
    Simulate {
        #[command(flatten)]
        check: CheckArgs,
        /// Run even when the feasibility report is negative
        #[arg(long)]
        force: bool,
        /// Draws per network use before giving up
        #[arg(long, default_value_t = DEFAULT_MAX_RESAMPLES)]
        max_resamples: u32,
    },
    /// Exact polynomial sweeps on small graphs
    Oracle {
        graph: PathBuf,
        /// Sweep to run; identities and square terms when omitted
        #[arg(long, value_enum)]
        what: Option<WhatArg>,
        /// Bound on paths per transfer function and on terms per product
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of report files
    Schema {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Graph file (JSON)
    pub graph: PathBuf,
    /// Field degree: arithmetic over GF(2^m)
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(2..=32))]
    pub m: u32,
    /// Random evaluations per randomized test
    #[arg(long, default_value_t = 32)]
    pub trials: u32,
    #[arg(long)]
    pub seed: u64,
    /// Symbol extension parameter: 2n+1 network uses
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = OracleArg::Auto)]
    pub oracle: OracleArg,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub oracle_cap: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Auto,
    Force,
    Off,
}

impl From<OracleArg> for OracleMode {
    fn from(a: OracleArg) -> OracleMode {
        match a {
            OracleArg::Auto => OracleMode::Auto,
            OracleArg::Force => OracleMode::Force,
            OracleArg::Off => OracleMode::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhatArg {
    Identities,
    SquareTerm,
    Paths,
}

impl From<WhatArg> for What {
    fn from(a: WhatArg) -> What {
        match a {
            WhatArg::Identities => What::Identities,
            WhatArg::SquareTerm => What::SquareTerm,
            WhatArg::Paths => What::Paths,
        }
    }
}

impl CheckArgs {
    pub fn params(&self) -> CheckParams {
        CheckParams {
            m: self.m,
            trials: self.trials,
            seed: self.seed,
            n: self.n,
            oracle: self.oracle.into(),
            oracle_cap: self.oracle_cap,
        }
    }
}

/// A failure that maps to a specific exit code.
#[derive(Debug)]
struct Failure {
    exit: Exit,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure {
            exit: Exit::Error,
            error: e.into(),
        }
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    let exit = match e {
        OracleError::ScaleExceeded { .. } => Exit::OracleCap,
        OracleError::ZeroTransfer { .. } => Exit::Error,
    };
    Failure {
        exit,
        error: anyhow::Error::new(e).context("oracle"),
    }
}

fn feasibility_failure(e: FeasibilityError) -> Failure {
    match e {
        FeasibilityError::Oracle(e) => {
            let mut f = oracle_failure(e);
            f.error = f
                .error
                .context("rerun with --oracle auto or --oracle off for randomized testing");
            f
        }
        e => e.into(),
    }
}

pub fn load_graph(path: &Path) -> anyhow::Result<Network> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_network(&bytes).with_context(|| format!("invalid graph {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => stdout
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

fn outcome_exit(report: &FeasibilityReport) -> Exit {
    match report.outcome {
        Outcome::Feasible => Exit::Success,
        Outcome::Infeasible => Exit::Negative,
        Outcome::Unsupported => Exit::Unsupported,
    }
}

fn summary(report: &FeasibilityReport) -> String {
    let held = report
        .conditions
        .iter()
        .filter(|c| c.verdict == pbna_core::feasibility::Verdict::Holds)
        .count();
    let regime = serde_json::to_value(report.regime).expect("regime serializes");
    let outcome = serde_json::to_value(report.outcome).expect("outcome serializes");
    format!(
        "{} ({} regime): {held}/{} conditions hold, error bound {:e} (per randomized violation {:e}, L_dist {})",
        outcome.as_str().unwrap_or_default(),
        regime.as_str().unwrap_or_default(),
        report.conditions.len(),
        report.error_bound,
        report.error_model.per_condition,
        report.max_distance
    )
}

fn cmd_check(
    args: &CheckArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Exit, Failure> {
    let net = load_graph(&args.graph)?;
    let xnet = ExtendedNetwork::new(&net);
    let report = check_feasibility(&xnet, args.params()).map_err(feasibility_failure)?;
    let exit = outcome_exit(&report);
    writeln!(stderr, "{}", summary(&report))?;
    for note in report.notes.iter().chain(&report.warnings) {
        writeln!(stderr, "note: {note}")?;
    }
    for c in report.violated() {
        writeln!(stderr, "violated: {}", c.label)?;
    }
    let file = ReportFile::new(&net, Report::Check(report));
    emit(&file.to_json(), args.out.as_deref(), stdout)?;
    Ok(exit)
}

fn cmd_simulate(
    args: &CheckArgs,
    force: bool,
    max_resamples: u32,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Exit, Failure> {
    let net = load_graph(&args.graph)?;
    let xnet = ExtendedNetwork::new(&net);
    let feasibility = check_feasibility(&xnet, args.params()).map_err(feasibility_failure)?;
    writeln!(stderr, "{}", summary(&feasibility))?;
    let params = SimParams {
        n: args.n,
        m: args.m,
        seed: args.seed,
        max_resamples,
    };
    let (simulation, refusal, exit) = match run_pbna(&xnet, &feasibility, params, force) {
        Ok(r) => {
            let exit = if r.success {
                Exit::Success
            } else {
                Exit::Negative
            };
            let rates: Vec<String> = r.rates.iter().map(ToString::to_string).collect();
            writeln!(stderr, "rates {}, success {}", rates.join(","), r.success)?;
            for w in &r.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            (Some(r), None, exit)
        }
        Err(e @ SimError::Refused(_)) => (None, Some(e.to_string()), Exit::Negative),
        Err(e @ SimError::Unsupported(_)) => (None, Some(e.to_string()), Exit::Unsupported),
        Err(e) => return Err(e.into()),
    };
    if let Some(r) = &refusal {
        writeln!(stderr, "{r}")?;
    }
    let file = ReportFile::new(
        &net,
        Report::Simulate(Box::new(SimulationReport {
            feasibility,
            simulation,
            refusal,
        })),
    );
    emit(&file.to_json(), args.out.as_deref(), stdout)?;
    Ok(exit)
}

fn cmd_oracle(
    graph: &Path,
    what: Option<WhatArg>,
    cap: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Exit, Failure> {
    let net = load_graph(graph)?;
    let xnet = ExtendedNetwork::new(&net);
    let report = sweep::oracle_report(&xnet, cap, what.map(Into::into)).map_err(|e| {
        let mut f = oracle_failure(e);
        f.error = f.error.context(
            "graph too large for the exact oracle; use `pbna check` for randomized testing",
        );
        f
    })?;
    let file = ReportFile::new(&net, Report::Oracle(report));
    emit(&file.to_json(), out, stdout)?;
    Ok(Exit::Success)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Exit {
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args, stdout, stderr),
        Command::Simulate {
            check,
            force,
            max_resamples,
        } => cmd_simulate(check, *force, *max_resamples, stdout, stderr),
        Command::Oracle {
            graph,
            what,
            cap,
            out,
        } => cmd_oracle(graph, *what, *cap, out.as_deref(), stdout),
        Command::Schema { out } => emit(&report::schema_json(), out.as_deref(), stdout)
            .map(|_| Exit::Success)
            .map_err(Failure::from),
    };
    result.unwrap_or_else(|f| {
        let _ = writeln!(stderr, "error: {:#}", f.error);
        f.exit
    })
}

/// Parses `args` (program name first) and runs the command. Usage errors
/// exit with 1, `--help` and `--version` with 0.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            if e.use_stderr() {
                Exit::Error
            } else {
                let _ = write!(stdout, "{}", e.render());
                Exit::Success
            }
        }
    }
}
