use std::process::ExitCode;

use cdf_mise_cli::{run, Cli, RunConfig};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let report = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match report {
        Ok(report) => {
            print!("{}", report.stdout);
            for path in &report.files {
                log::info!("wrote {}", path.display());
            }
            for failure in &report.failures {
                eprintln!("validation failure: {failure}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
