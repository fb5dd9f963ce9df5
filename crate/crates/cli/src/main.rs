use std::process::ExitCode;

use clap::Parser;
use flatpart_cli::{exit_code, run, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = run(cli);
    match &result {
        Err(CliError::Usage(e)) => eprintln!("usage error: {e:#}"),
        Err(CliError::Failed(e)) => eprintln!("error: {e:#}"),
        Ok(_) => {}
    }
    exit_code(&result)
}
