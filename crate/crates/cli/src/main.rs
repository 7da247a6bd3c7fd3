use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;
mod output;
mod verify;

use config::ConfigFile;
use output::Format;

/// Numerical experiments with Eisenstein series on Gamma_0(q).
#[derive(Parser, Debug)]
#[command(name = "eisenlab", version, about)]
struct Cli {
    /// Output format; eval and verify default to json, tables to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// TOML file with one table per command, e.g. [que-ratio]. Flags win
    /// over the file, the file over compiled defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate E(z, 1/2 + it) and |E|^2 at one point.
    Eval(commands::EvalFlags),
    /// Run one of the invariant suites.
    #[command(subcommand)]
    Verify(verify::Suite),
    /// Mass ratio of two regions against the ratio of their areas.
    QueRatio(commands::QueFlags),
    /// <|E(., 1/2+it)|^2, phi> at level one over a range of t.
    LsScan(commands::ScanFlags),
    /// Decay in q of the leading oldform term.
    OldformDecay(commands::DecayFlags),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Validation(String),
    /// A computation could not be carried out: exit code 3.
    Numerical(String),
}

impl From<eisenlab_core::Error> for CliError {
    fn from(e: eisenlab_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Where records go and in which format.
pub struct Output {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Output {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("EISENLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "EISENLAB_THREADS must be a positive integer (got '{v}')"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numerical(e.to_string()))
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    let out = Output {
        format: cli.format,
        out: cli.out,
    };
    match cli.command {
        Command::Eval(f) => commands::eval(&cfg, &out, &f).map(|_| true),
        Command::Verify(suite) => verify::run(&cfg, &out, &suite),
        Command::QueRatio(f) => commands::que_ratio(&cfg, &out, &f).map(|_| true),
        Command::LsScan(f) => commands::ls_scan(&cfg, &out, &f).map(|_| true),
        Command::OldformDecay(f) => commands::oldform_decay(&cfg, &out, &f).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
