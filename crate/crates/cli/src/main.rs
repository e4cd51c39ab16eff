mod args;
mod commands;
mod resolve;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Validation ran and did not pass (exit 1).
    Failed(String),
    /// Bad arguments, names or configs (exit 2).
    Usage(String),
    /// Filesystem problems (exit 3).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Failed(m) => write!(f, "validation failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<qds_core::Error> for CliError {
    fn from(e: qds_core::Error) -> Self {
        use qds_core::Error;
        match e {
            Error::Io(_) => CliError::Io(e.to_string()),
            Error::Format(_) => CliError::Failed(e.to_string()),
            Error::Name(_) | Error::InvalidConfig(_) | Error::Json(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::List { json } => commands::list(json),
        Command::Generate { source, overrides, out } => commands::generate(&source, &overrides, &out),
        Command::Validate {
            target,
            config,
            mode,
            overrides,
            substeps,
            tolerance,
            report,
        } => commands::validate(
            target.as_deref(),
            config.as_deref(),
            mode,
            &overrides,
            substeps,
            tolerance,
            report.as_deref(),
        ),
        Command::Inspect {
            file,
            csv_expectations,
            csv_waveforms,
        } => commands::inspect(&file, csv_expectations.as_deref(), csv_waveforms.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
