mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;
use relpred::Error;

use crate::args::Cli;
use crate::run::{execute, RunConfig};

const EXIT_USAGE: u8 = 2;

fn exit_code(err: &Error) -> (&'static str, u8) {
    match err {
        Error::Io { .. } => ("io", 3),
        Error::Parse { .. } | Error::Json(_) => ("parse", 4),
        Error::Incompatible(_) | Error::Checkpoint(_) | Error::UnsupportedVersion { .. } => ("incompatible", 5),
        Error::Config(_) => ("config", 6),
        Error::Eval(_) | Error::Numeric(_) | Error::Diverged { .. } => ("runtime", 7),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error[usage]: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return usage_error(first);
        }
    };

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage_error(&format!("cannot start {n} worker threads: {e}"));
        }
    }

    let command = match (cli.resume_from, cli.command) {
        (Some(dir), None) => RunConfig::load(&dir).map(|mut c| {
            if let Some(into) = cli.into {
                c.set_out_dir(into);
            }
            c
        }),
        (None, Some(mut c)) => c.absolutize().map(|_| c).map_err(|e| Error::io(".", e)),
        (Some(_), Some(_)) => return usage_error("--resume-from cannot be combined with a subcommand"),
        (None, None) => return usage_error("a subcommand or --resume-from is required"),
    };

    match command.and_then(|mut c| {
        if c.out_dir().is_some() {
            c.absolutize().map_err(|e| Error::io(".", e))?;
        }
        log::info!("running {}", c.name());
        execute(&c)
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = exit_code(&e);
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{kind}]: {message}");
            ExitCode::from(code)
        }
    }
}
