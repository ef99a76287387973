//! Command-line front end for the fast diffusion laboratory.
//!
//! `fdxlab <subcommand> [--config FILE] [--set key=value]... [--out PATH]
//! [--seed N] [--threads N]` reads a flat `key = value` configuration,
//! runs one experiment and writes its CSV artifact.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{parse_config, RawConfig, Subcommand};
use crate::run::{dispatch, output_path, write_artifact, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const THREADS_ENV: &str = "FDXLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Exponents,
    Norms,
    Simulate,
    Threshold,
    Decay,
    Trace,
    GronwallCheck,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Exponents => Subcommand::Exponents,
            Command::Norms => Subcommand::Norms,
            Command::Simulate => Subcommand::Simulate,
            Command::Threshold => Subcommand::Threshold,
            Command::Decay => Subcommand::Decay,
            Command::Trace => Subcommand::Trace,
            Command::GronwallCheck => Subcommand::GronwallCheck,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdxlab", version, about = "Numerical experiments for u_t = Δu^m + u^p, 0 < m < 1 < p")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override or add a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV file, or directory for `<subcommand>-<timestamp>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks (overrides the `seed` key).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for data-parallel loops (fallback: FDXLAB_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

fn threads_from_env(err: &mut dyn Write) -> Result<Option<usize>, ()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => {
                let _ = writeln!(err, "error: {THREADS_ENV}={v:?} is not a positive integer");
                Err(())
            }
        },
        Err(_) => Ok(None),
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code: 0 success, 1 domain error or failed
/// check, 2 usage or configuration error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let threads = match cli.threads {
        Some(0) => {
            let _ = writeln!(err, "error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        Some(n) => Some(n),
        None => match threads_from_env(err) {
            Ok(n) => n,
            Err(()) => return EXIT_USAGE,
        },
    };
    if let Some(n) = threads {
        fdx_core::par::set_threads(n);
    }
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => String::new(),
    };
    let sub = Subcommand::from(cli.command);
    let cfg = match RawConfig::parse(&text)
        .and_then(|raw| raw.with_overrides(&cli.set))
        .and_then(|raw| parse_config(sub, &raw, cli.seed))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let artifact = match dispatch(&cfg) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_DOMAIN;
        }
    };
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let path = output_path(cli.out.as_deref(), sub, &stamp);
    if let Err(e @ RunError::Io { .. }) = write_artifact(&path, &artifact) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_DOMAIN;
    }
    let _ = write!(out, "{}", artifact.summary);
    let _ = writeln!(out, "wrote {}", path.display());
    if artifact.ok {
        EXIT_OK
    } else {
        let _ = writeln!(err, "error: {sub} checks failed (see {})", path.display());
        EXIT_DOMAIN
    }
}
