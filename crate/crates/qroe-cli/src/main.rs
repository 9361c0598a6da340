//! `qroe <subcommand> --in manifest.json --out report.json`
//!
//! Exit codes: 0 pass, 1 negative verdict, 2 unknown/budget exhausted,
//! 3 input error. Reports are deterministic for a fixed (manifest, seed,
//! tol); wall time is only embedded with `--timing`.

use anyhow::Context;
use clap::{Parser, Subcommand};
use qroe::manifest::{self, Manifest, Report, ReportStatus};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "qroe",
    about = "Finite-dimensional quantum coarse spaces, Roe algebras, and support expansion constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Input manifest (JSON). Reads stdin when omitted.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output report path. Writes stdout when omitted.
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
    /// Seed override for sampled modes.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override; the QROE_DEFAULT_TOL environment variable is
    /// honored when neither this flag nor the manifest sets one.
    #[arg(long)]
    tol: Option<f64>,
    /// Ladder depth override.
    #[arg(long)]
    depth: Option<usize>,
    /// Sample budget override for sampled modes.
    #[arg(long)]
    samples: Option<usize>,
    /// Embed wall time into the report (off by default so identical inputs
    /// produce byte-identical reports).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build a represented algebra and report its cached dimensions.
    Algebra(CommonArgs),
    /// Build a coarse structure and report the saturation ladder.
    Structure(CommonArgs),
    /// Assemble and classify the uniform Roe algebra of a structure.
    Qura(CommonArgs),
    /// Support expansion constraint verdicts and least-lambda reports.
    Suppexp(CommonArgs),
    /// Classical morphism checkers with the bridge-quantum cross-check.
    Morph(CommonArgs),
    /// Verify or search asymptotic-dimension decompositions.
    Asydim(CommonArgs),
    /// Run the curated fixture battery and print a pass matrix.
    Suite {
        /// Seed for the sampled fixtures.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the report as JSON instead of the text matrix.
        #[arg(long)]
        json: bool,
    },
}

fn load_manifest(args: &CommonArgs) -> anyhow::Result<Manifest> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?,
        None => std::io::read_to_string(std::io::stdin()).context("reading manifest from stdin")?,
    };
    let mut m = Manifest::from_json(&text)?;
    if let Some(seed) = args.seed {
        m.seed = Some(seed);
    }
    if let Some(tol) = args.tol {
        m.tol = Some(tol);
    } else if m.tol.is_none() {
        if let Ok(env_tol) = std::env::var("QROE_DEFAULT_TOL") {
            m.tol = Some(env_tol.parse().context("parsing QROE_DEFAULT_TOL")?);
        }
    }
    if let Some(depth) = args.depth {
        m.max_depth = Some(depth);
    }
    if let Some(samples) = args.samples {
        m.samples = Some(samples);
    }
    Ok(m)
}

fn emit(report: &Report, args: &CommonArgs) -> anyhow::Result<ExitCode> {
    let json = report.to_json();
    match &args.output {
        Some(path) => std::fs::write(path, json.as_bytes())
            .with_context(|| format!("writing report {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(match report.status {
        ReportStatus::Pass => ExitCode::SUCCESS,
        ReportStatus::Negative => ExitCode::from(1),
        ReportStatus::Unknown => ExitCode::from(2),
    })
}

fn run_command(
    args: &CommonArgs,
    run: impl Fn(&Manifest) -> qroe::Result<Report>,
) -> anyhow::Result<ExitCode> {
    let manifest = load_manifest(args)?;
    let start = Instant::now();
    let mut report = run(&manifest)?;
    if args.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    emit(&report, args)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Algebra(args) => run_command(args, manifest::run_algebra),
        Command::Structure(args) => run_command(args, manifest::run_structure),
        Command::Qura(args) => run_command(args, manifest::run_qura),
        Command::Suppexp(args) => run_command(args, manifest::run_suppexp),
        Command::Morph(args) => run_command(args, manifest::run_morph),
        Command::Asydim(args) => run_command(args, manifest::run_asydim),
        Command::Suite { seed, json } => {
            let report = qroe::suite::run_suite(*seed);
            if *json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("suite serializes")
                );
            } else {
                print!("{}", report.matrix());
            }
            return if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
