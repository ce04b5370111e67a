//! Command-line driver for descforge: synthetic data, PLS fitting,
//! descriptor selection runs and their reports.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

pub use args::Cli;
use config::Settings;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failed invocation: bad flags or configuration (exit 2) or a failure
/// while running (exit 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn message(&self) -> String {
        let text = match self {
            Self::Usage(m) => m.clone(),
            Self::Runtime(e) => format!("{e:#}"),
        };
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    /// One JSON object on one line: `{"error":"usage"|"runtime","message":…}`.
    pub fn json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            code: i32,
            message: String,
        }
        let kind = match self {
            Self::Usage(_) => "usage",
            Self::Runtime(_) => "runtime",
        };
        serde_json::to_string(&Line {
            error: kind,
            code: self.exit_code(),
            message: self.message(),
        })
        .expect("error line serialises")
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

impl From<descforge::Error> for CliError {
    fn from(e: descforge::Error) -> Self {
        Self::Runtime(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message())
    }
}

/// Runs a parsed command inside a thread pool of the requested size.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    let threads = settings.value(cli.threads, "threads", 0usize)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.into()))?;
    pool.install(|| commands::dispatch(&cli.command, cli.seed, &settings))
}

/// Parses `args`, runs, reports any error on stderr and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::usage(e.kind().to_string() + ": " + &render_clap(&e));
            eprintln!("{}", err.json_line());
            return EXIT_USAGE;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.json_line());
            err.exit_code()
        }
    }
}

fn render_clap(e: &clap::Error) -> String {
    e.render()
        .to_string()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
        .map(|l| l.trim_start_matches("error: "))
        .collect::<Vec<_>>()
        .join(" ")
}
