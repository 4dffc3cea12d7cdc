use std::process::ExitCode;

use clap::Parser;
use risbc_cli::{execute, Cli, EXIT_DECODE_FAILURE, EXIT_INVALID};

fn main() -> ExitCode {
    let config = match Cli::parse().into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("risbc: error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let out = match execute(&config) {
        Ok(out) => out,
        Err(risbc::Error::RankDeficient { rank, dimension }) => {
            eprintln!("risbc: decode failure: rank {rank} of {dimension}");
            return ExitCode::from(EXIT_DECODE_FAILURE as u8);
        }
        Err(e) => {
            eprintln!("risbc: error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    for w in &out.warnings {
        eprintln!("risbc: warning: {w}");
    }
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.document) {
                eprintln!("risbc: error: --out {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None if out.summary_line.is_none() => print!("{}", out.document),
        None => {}
    }
    if let Some(line) = &out.summary_line {
        println!("{line}");
    }
    ExitCode::from(out.exit_code as u8)
}
