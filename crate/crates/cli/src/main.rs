use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::exit;

use clap::{Parser, Subcommand};
use dislocation_kg_cli::run::{EXIT_OK, EXIT_USAGE};
use dislocation_kg_cli::{current, spectrum, verify, Outcome, RunArgs, RunConfig, UsageError};

#[derive(Parser)]
#[command(
    name = "dislocation-kg",
    version,
    about = "Bound-state sweeps for a Klein-Gordon particle near a screw dislocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate slopes and energies over the sweep
    Spectrum(RunArgs),
    /// Persistent currents over a flux sweep (scenario ab)
    Current(RunArgs),
    /// Check the invariants at the configured parameters
    Verify(RunArgs),
}

fn run(cli: Cli) -> Result<(Outcome, RunArgs, RunConfig), UsageError> {
    let (args, which) = match cli.command {
        Command::Spectrum(a) => (a, 0),
        Command::Current(a) => (a, 1),
        Command::Verify(a) => (a, 2),
    };
    let cfg = RunConfig::resolve(&args)?;
    let outcome = match which {
        0 => spectrum(&cfg),
        1 => current(&cfg)?,
        _ => verify(&cfg),
    };
    Ok((outcome, args, cfg))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            exit(code);
        }
    };
    let (outcome, args, cfg) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            exit(EXIT_USAGE);
        }
    };

    let written = match &args.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.table.write(cfg.format, &mut w)?;
            w.flush()
        }),
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            outcome.table.write(cfg.format, &mut w).and_then(|_| w.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        exit(EXIT_USAGE);
    }
    if outcome.exit_code != EXIT_OK {
        let bad = outcome
            .table
            .column("status")
            .map(|c| outcome.table.rows.iter().filter(|r| !matches!(&r[c], dislocation_kg_cli::table::Cell::Text(s) if s == "OK" || s == "PASS" || s == "SKIP" || s == "KINK")).count())
            .unwrap_or(0);
        eprintln!("error: {bad} row(s) failed");
    }
    exit(outcome.exit_code);
}
