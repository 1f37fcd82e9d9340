use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use xyquench_cli::{Cli, CliError, ORACLE_TOLERANCE};

/// Exit status when the oracle comparison exceeds tolerance.
const ORACLE_MISMATCH: u8 = 3;

fn execute(cli: &Cli) -> Result<Option<f64>, CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config {
                flag: "--threads",
                message: e.to_string(),
            })?;
    }
    let table = cli.command.run()?;
    match &cli.out {
        Some(path) => table.write_csv(BufWriter::new(File::create(path)?))?,
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(table.oracle_gap)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Some(gap)) => {
            eprintln!("max |formula - oracle| = {gap:.3e}");
            if gap < ORACLE_TOLERANCE {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(ORACLE_MISMATCH)
            }
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
