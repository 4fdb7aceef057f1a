use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use susyqm::verify::{
    cmd_boundstates, cmd_identity, cmd_phase_equiv, cmd_potential, cmd_scatter, reports_to_csv,
    reports_to_json, run_checks, CheckName, KappaGrid, OutputFormat, RunConfig, Spacing, Table,
};
use susyqm::Error;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Reflectionless sech² potentials and their phase-equivalent cosech²
/// partners: tables and verification reports.
#[derive(Parser, Debug)]
#[command(name = "susyqm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Pair index n (potential strength 2n(2n+1)).
    #[arg(long, global = true)]
    n: Option<u32>,

    #[arg(long, global = true)]
    kappa_min: Option<f64>,

    #[arg(long, global = true)]
    kappa_max: Option<f64>,

    #[arg(long, global = true)]
    kappa_count: Option<usize>,

    #[arg(long, global = true, value_enum)]
    kappa_spacing: Option<SpacingArg>,

    /// Outer radius of radial grids.
    #[arg(long, global = true)]
    r_max: Option<f64>,

    /// Radial grid step (also the Numerov step).
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Tolerance override, NAME=VALUE with NAME a check name or `all`.
    #[arg(long = "tol", global = true, value_name = "NAME=F")]
    tol: Vec<String>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
enum Command {
    /// Tabulate V_d, V_s and the determinant-built potential.
    Potential,
    /// Tabulate bound states and partner solutions.
    Boundstates,
    /// Phase shifts by three routes on the momentum grid.
    Scatter,
    /// Overlap-matrix reconstruction of the singular potential.
    PhaseEquiv,
    /// Legendre square-sum and product identities.
    Identity,
    /// Run the verification registry.
    VerifyAll {
        /// Run only this check (repeatable).
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
        /// Permit n above the default ceiling.
        #[arg(long)]
        allow_large_n: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_tolerances(items: &[String]) -> Result<BTreeMap<CheckName, f64>, Error> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--tol expects NAME=VALUE, got '{item}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("--tol value '{value}' is not a number")))?;
        if name == "all" {
            for c in CheckName::ALL {
                out.insert(c, value);
            }
        } else {
            out.insert(name.parse()?, value);
        }
    }
    Ok(out)
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let verify = matches!(cli.command, Command::VerifyAll { .. });
    let mut cfg = RunConfig::default();
    if !verify {
        cfg.n = 1;
    }
    if !verify && cli.command != Command::Scatter {
        cfg.r_max = 10.0;
        cfg.step = 0.05;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    let mut grid = KappaGrid::default();
    if let Some(v) = cli.kappa_min {
        grid.min = v;
    }
    if let Some(v) = cli.kappa_max {
        grid.max = v;
    }
    if let Some(v) = cli.kappa_count {
        grid.count = v;
    }
    if let Some(s) = cli.kappa_spacing {
        grid.spacing = match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        };
    }
    cfg.kappa_grid = grid;
    if let Some(v) = cli.r_max {
        cfg.r_max = v;
    }
    if let Some(v) = cli.step {
        cfg.step = v;
    }
    cfg.tolerances = parse_tolerances(&cli.tol)?;
    cfg.output_format = match cli.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    if let Command::VerifyAll { allow_large_n, .. } = &cli.command {
        cfg.allow_large_n = *allow_large_n;
    }
    if let Ok(seed) = std::env::var("SUSYQM_SEED") {
        // reserved; grids are deterministic
        seed.parse::<u64>()
            .map_err(|_| Error::Config(format!("SUSYQM_SEED must be an unsigned integer, got '{seed}'")))?;
    }
    Ok(cfg)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_table(table: &Table, format: OutputFormat) -> Result<String, Error> {
    match format {
        OutputFormat::Csv => {
            for (k, v) in &table.summary {
                eprintln!("{k} = {}", v.0);
            }
            table.to_csv()
        }
        OutputFormat::Json => table.to_json().map(|s| s + "\n"),
    }
}

fn run(cli: Cli) -> ExitCode {
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("susyqm: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let table = match &cli.command {
        Command::Potential => cmd_potential(&cfg),
        Command::Boundstates => cmd_boundstates(&cfg),
        Command::Scatter => cmd_scatter(&cfg),
        Command::PhaseEquiv => cmd_phase_equiv(&cfg),
        Command::Identity => cmd_identity(&cfg),
        Command::VerifyAll { checks, .. } => return verify_all(&cfg, checks, &cli.out),
    };
    let text = match table {
        Ok(t) => {
            if cli.command == Command::Boundstates && t.rows.iter().any(|r| r.last().map(|v| v.0) == Some(0.0)) {
                eprintln!("susyqm: warning: partner states below r = 1e-3 are unreliable");
            }
            render_table(&t, cfg.output_format)
        }
        Err(e) => Err(e),
    };
    match text {
        Ok(text) => match emit(&text, &cli.out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("susyqm: {msg}");
                ExitCode::from(EXIT_FAILED)
            }
        },
        Err(e @ Error::Config(_)) => {
            eprintln!("susyqm: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("susyqm: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn verify_all(cfg: &RunConfig, names: &[String], out: &Option<PathBuf>) -> ExitCode {
    let filter = match names.iter().map(|s| s.parse()).collect::<Result<Vec<CheckName>, _>>() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("susyqm: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let runs = match run_checks(cfg, &filter) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("susyqm: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for run in &runs {
        if let Some(msg) = &run.failure {
            eprintln!("susyqm: {} did not complete: {msg}", run.report.check_name);
        }
    }
    let reports: Vec<_> = runs.into_iter().map(|r| r.report).collect();
    let text = match cfg.output_format {
        OutputFormat::Csv => reports_to_csv(&reports),
        OutputFormat::Json => reports_to_json(&reports).map(|s| s + "\n"),
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("susyqm: {e}");
            return ExitCode::from(EXIT_FAILED);
        }
    };
    if let Err(msg) = emit(&text, out) {
        eprintln!("susyqm: {msg}");
        return ExitCode::from(EXIT_FAILED);
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!(
            "susyqm: FAIL {} (error {:e} > tolerance {:e})",
            r.check_name, r.max_abs_error, r.tolerance
        );
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
