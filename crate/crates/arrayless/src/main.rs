use std::process::ExitCode;

use arrayless::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("arrayless: {e}");
            ExitCode::from(2)
        }
    }
}
