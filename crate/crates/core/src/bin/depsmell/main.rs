mod analysis;
mod args;
mod config;
mod fetch;
mod lint;
mod modeling;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use report::Output;

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = config::load(cli.config.as_deref())?;
    let out = Output { format: cli.format.or(cfg.format).unwrap_or(Format::Text), path: cli.output.clone() };
    let seed = cli.seed.or(cfg.seed).unwrap_or(config::DEFAULT_SEED);
    match &cli.command {
        Command::Lint(a) => lint::run(a, &cfg.lint, &out),
        Command::Timeline(a) => analysis::timeline(a, &out),
        Command::Features(a) => analysis::features(a, &cfg, &out),
        Command::Synth(a) => modeling::synth(a, seed, &out),
        Command::Train(a) => modeling::train(a, &cfg, seed, &out),
        Command::Eval(a) => modeling::eval(a, seed, &out),
        Command::Explain(a) => modeling::explain(a, &cfg, seed, &out),
        Command::Fetch(a) => fetch::run(a, &cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the operational-error status
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
