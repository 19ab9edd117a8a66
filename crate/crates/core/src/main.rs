use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pairvqe::cli::{read_csv, run_scan, shift_report, write_shift_csv, ScanSpec};

#[derive(Parser)]
#[command(name = "pairvqe", version, about = "Pair-restricted VQE dissociation scans")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scan described by an INI spec file.
    Scan {
        #[arg(long)]
        spec: PathBuf,
        /// override a spec value, e.g. --set vqe.macro_max=20
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_kv)]
        set: Vec<(String, String)>,
    },
    /// Shift a scan to match a reference CSV at one geometry.
    Shift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        geometry: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

fn run(args: Args) -> pairvqe::Result<bool> {
    match args.command {
        Command::Scan { spec, set } => {
            let spec = ScanSpec::load(&spec, &set)?;
            let out = run_scan(&spec)?;
            for r in out.rows.iter().filter(|r| !r.converged) {
                eprintln!("warning: {} at {} did not converge", r.molecule, r.geometry);
            }
            Ok(out.all_converged)
        }
        Command::Shift {
            input,
            reference,
            geometry,
            output,
        } => {
            let rows = shift_report(&read_csv(&input)?, &read_csv(&reference)?, geometry)?;
            write_shift_csv(&output, &rows)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
