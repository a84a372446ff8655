use std::process::ExitCode;

use cstar_flow::config::{parse_args, CliError, Invocation, SEED_ENV};
use cstar_flow::demo::run_demo;
use cstar_flow::suite::{emit_report, exit_code, run_suite};

fn run() -> Result<i32, CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    match parse_args(std::env::args_os(), env_seed.as_deref())? {
        Invocation::Verify(config) => {
            let report = run_suite(&config);
            emit_report(&report, config.format, config.out.as_deref())?;
            Ok(exit_code(&report))
        }
        Invocation::Demo(config) => {
            let outcome = run_demo(&config).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", outcome.text);
            Ok(if outcome.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cstar-flow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
