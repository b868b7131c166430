use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use entrysim_cli::{dispatch, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let result = dispatch(&cli, &mut lock);
    let _ = lock.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entrysim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
