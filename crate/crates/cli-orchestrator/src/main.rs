use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cli_orchestrator::{execute, parse_config, Command, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "nhtrap", about = "Normally hyperbolic trapping, escape functions and CAP spectra")]
struct Cli {
    /// trap-find, trap-certify, escape-check, spectrum-gap, spectrum-resolvent, flow-integrate or perturb
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("{}: {e}", cli.config.display())),
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return usage_error(format!("{}: {e}", cli.config.display())),
    };
    if let Some(c) = config.command {
        if c != cli.command {
            return usage_error(format!("config names command '{c}' but '{}' was requested", cli.command));
        }
    }
    config.command = Some(cli.command);
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = cli.out {
        config.output_dir = o;
    }
    if let Ok(w) = std::env::var("NHTRAP_WORKERS") {
        match w.parse::<usize>() {
            Ok(n) if n > 0 => config.workers = n,
            _ => return usage_error(format!("NHTRAP_WORKERS must be a positive integer, got '{w}'")),
        }
    }
    let code = execute(&config, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
