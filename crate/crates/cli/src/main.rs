//! Batch front end: parameter sweeps in, figure-ready CSV/JSON artifacts out.

mod config;
mod dynamics;
mod meanfield;
mod output;
mod spectrum;
mod steady;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{CommonArgs, RunConfig};

#[derive(Parser)]
#[command(name = "ionsync", version, about = "Driven single-ion phonon laser, batch simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state observables over a parameter sweep.
    Steady {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        opts: steady::SteadyArgs,
    },
    /// Master-equation time evolution from the joint ground state.
    Dynamics {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        opts: dynamics::DynamicsArgs,
    },
    /// Liouvillian eigenspectrum, exceptional-point scans, power spectra.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        opts: spectrum::SpectrumArgs,
    },
    /// Classical fixed points, trajectories, and the phase diagram.
    Meanfield {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        opts: meanfield::MeanfieldArgs,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

type Task = Box<dyn FnOnce(&RunConfig) -> Result<bool> + Send>;

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let (common, task): (&CommonArgs, Task) =
        match &cli.command {
            Command::Steady { common, opts } => (common, {
                let opts = opts.clone();
                Box::new(move |cfg| {
                    let meta = cfg.meta("steady", &opts);
                    steady::run(cfg, &opts, &meta)
                })
            }),
            Command::Dynamics { common, opts } => (common, {
                let opts = opts.clone();
                Box::new(move |cfg| {
                    let meta = cfg.meta("dynamics", &opts);
                    dynamics::run(cfg, &opts, &meta)
                })
            }),
            Command::Spectrum { common, opts } => (common, {
                let opts = opts.clone();
                Box::new(move |cfg| {
                    let meta = cfg.meta("spectrum", &opts);
                    spectrum::run(cfg, &opts, &meta)
                })
            }),
            Command::Meanfield { common, opts } => (common, {
                let opts = opts.clone();
                Box::new(move |cfg| {
                    let meta = cfg.meta("meanfield", &opts);
                    meanfield::run(cfg, &opts, &meta)
                })
            }),
        };
    let cfg = RunConfig::resolve(common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("building the worker pool")?;
    pool.install(|| task(&cfg))
}
