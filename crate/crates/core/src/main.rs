use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cachecode::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);

    if let Some(msg) = &outcome.message {
        eprintln!("cachecode: {msg}");
    }
    if !outcome.body.is_empty() {
        let written = match &cli.command.output().out {
            Some(path) => {
                std::fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display()))
            }
            None => std::io::stdout()
                .write_all(outcome.body.as_bytes())
                .map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            eprintln!("cachecode: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
