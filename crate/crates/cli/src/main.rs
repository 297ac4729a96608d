use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use delta_wedge_cli::params::SEED_ENV;
use delta_wedge_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, seed.as_deref(), &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
