use std::process::ExitCode;

use clap::Parser;
use landau_spectra::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LANDAU_SPEC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.table.render());
            println!("{}", serde_json::to_string_pretty(&report.summary).unwrap_or_default());
            for b in &report.breaches {
                eprintln!("threshold breach: {b}");
            }
            if report.breaches.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
