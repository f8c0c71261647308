use std::process::ExitCode;

use clap::Parser;
use twoconn::commands::EXIT_USAGE;
use twoconn::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("twoconn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
