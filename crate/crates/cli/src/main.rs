use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use jacobi_gap_cli::config::RunConfig;
use jacobi_gap_cli::execute;

const EXIT_USAGE: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match execute(&cfg) {
        Ok(done) if done.breaches.is_empty() => ExitCode::SUCCESS,
        Ok(done) => {
            for b in &done.breaches {
                eprintln!(
                    "tolerance exceeded: row {} column {} value {} > {:e}",
                    b.row, b.column, b.value, b.tolerance
                );
            }
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
