use std::process::ExitCode;

use clap::Parser;
use sim2spec::cli::{error_exit_code, run, Cli};
use sim2spec::error::EXIT_INPUT;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SIM2SPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("SIM2SPEC_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("SIM2SPEC_THREADS must be a positive integer, got `0`".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
