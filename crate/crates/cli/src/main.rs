use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use fpur_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|()| out.flush().map_err(Into::into)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fpur: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
