use std::process::ExitCode;

use clap::Parser;
use jcdyn_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jcdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
