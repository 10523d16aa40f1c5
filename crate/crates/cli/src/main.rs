use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod app;

use app::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let CliError::Verification { output, .. } = &err {
                let _ = stdout.write_all(output.as_bytes());
            }
            eprintln!("qpath: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
