use std::process::ExitCode;

use clap::Parser;
use dpheat_cli::{emit, execute, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are input errors; 2 is reserved for numerical failures
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = execute(&cli).and_then(|text| emit(&cli, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // the validation report still goes to the output
            if let CliError::Validation { output, .. } = &err {
                let _ = emit(&cli, output);
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
