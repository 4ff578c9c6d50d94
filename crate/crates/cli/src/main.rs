mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::{json, to_value};

use args::{Cli, Command, SUBCOMMANDS};
use output::Run;

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let raw: Vec<_> = std::env::args_os().collect();
    let cli = Cli::parse_from(config::expand_args(raw, SUBCOMMANDS)?);
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the worker pool")?;
    }

    let (name, params) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", to_value(a)?),
        Command::Rstat(a) => ("rstat", to_value(a)?),
        Command::PhaseDiagram(a) => ("phase-diagram", to_value(a)?),
        Command::Sff(a) => ("sff", to_value(a)?),
        Command::Chi(a) => ("chi", to_value(a)?),
        Command::Collapse(a) => ("collapse", to_value(a)?),
        Command::Validate(a) => ("validate", to_value(a)?),
    };
    let mut run = Run::create(&cli.out, name, json!({ "seed": cli.seed, "args": params }))?;
    let seed = cli.seed;
    let mut code = ExitCode::SUCCESS;
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a, seed, &mut run)?,
        Command::Rstat(a) => commands::rstat(a, seed, &mut run)?,
        Command::PhaseDiagram(a) => commands::phase_diagram(a, seed, &mut run)?,
        Command::Sff(a) => commands::sff(a, seed, &mut run)?,
        Command::Chi(a) => commands::chi(a, seed, &mut run)?,
        Command::Collapse(a) => commands::collapse_cmd(a, seed, &mut run)?,
        Command::Validate(a) => {
            for c in commands::validate(a, seed, &mut run)? {
                println!("{:<4} {:<50} {:<14.6e} {}", if c.pass { "ok" } else { "FAIL" }, c.check, c.value, c.threshold);
                if !c.pass {
                    code = ExitCode::FAILURE;
                }
            }
        }
    }
    let dir = run.dir.clone();
    run.finish(seed, cli.threads)?;
    println!("{}", dir.display());
    Ok(code)
}
