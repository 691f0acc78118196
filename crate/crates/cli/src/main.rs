use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = c2lse_cli::Cli::parse();
    match c2lse_cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", c2lse_cli::error_line(&e));
            ExitCode::FAILURE
        }
    }
}
