use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use hogdet::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let result = execute(&cli, &mut stdout);
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hogdet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
