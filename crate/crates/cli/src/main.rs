mod args;
mod colormap;
mod commands;
mod files;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use omnidepth_core::io::{parse_config, PipelineConfig};
use omnidepth_core::Error as CoreError;

use args::{Cli, Command};
use files::{NumericalError, UsageError};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<NumericalError>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::InvalidParameter(_) => EXIT_USAGE,
                e if e.is_numerical() => EXIT_NUMERICAL,
                _ => EXIT_IO,
            };
        }
    }
    EXIT_IO
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&files::read(path)?)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Calibrate(a) => commands::calibrate(&cfg, &a),
        Command::Project(a) => commands::project(&cfg, &a),
        Command::Complete(a) => commands::complete(&cfg, &a),
        Command::Evaluate(a) => commands::evaluate(&cfg, &a),
        Command::Convert(a) => commands::convert(&cfg, &a),
        Command::Simulate(a) => commands::simulate(&cfg, &a),
        Command::Colorize(a) => commands::colorize(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_classes() {
        let usage: anyhow::Error = UsageError("x".into()).into();
        assert_eq!(exit_code(&usage), EXIT_USAGE);
        let io: anyhow::Error = std::io::Error::other("disk").into();
        assert_eq!(exit_code(&io.context("reading f")), EXIT_IO);
        let parse: anyhow::Error = CoreError::Parse {
            line: 3,
            msg: "bad".into(),
        }
        .into();
        assert_eq!(exit_code(&parse), EXIT_IO);
        let num: anyhow::Error = CoreError::Degenerate("flat".into()).into();
        assert_eq!(exit_code(&num.context("fitting")), EXIT_NUMERICAL);
        let bad: anyhow::Error = CoreError::InvalidParameter("k".into()).into();
        assert_eq!(exit_code(&bad), EXIT_USAGE);
    }
}
