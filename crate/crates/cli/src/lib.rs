//! Resumable study pipeline: corpus to retrievability and PageRank scores,
//! then bias and correlation metrics, with every artifact hashed in a
//! manifest under one work directory.

pub mod args;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod stage;

use accessrank::corpus::save_corpus;
use accessrank::synth::{self, SynthParams};
use anyhow::Context;

pub use args::{Cli, Command, StageArgs, SynthArgs};
pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::{emit_report, run_pipeline, run_stage, RunOptions, StageOutcome};
pub use report::{Metrics, MetricsReport};
pub use stage::Stage;

impl From<&SynthArgs> for SynthParams {
    fn from(a: &SynthArgs) -> Self {
        SynthParams {
            docs: a.docs,
            vocab: a.vocab,
            seed: a.seed,
            zipf_exponent: a.zipf_exponent,
            min_len: a.min_len,
            max_len: a.max_len,
            mean_outlinks: a.mean_outlinks,
            link_exponent: a.link_exponent,
            dangling_fraction: a.dangling_fraction,
            external_link_rate: a.external_link_rate,
            coupling: a.coupling,
        }
    }
}

pub fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    let docs = synth::generate(&args.into()).map_err(|e| CliError::Validation(e.to_string()))?;
    save_corpus(&args.out, &docs).with_context(|| format!("writing {}", args.out.display()))?;
    println!("synth: wrote {} documents to {}", docs.len(), args.out.display());
    Ok(())
}

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => run_synth(a),
        Command::Pipeline(a) => {
            let cfg = a.resolve()?;
            run_pipeline(&cfg, RunOptions { force: a.force, quiet: false }).map(|_| ())
        }
        cmd => {
            let a = match cmd {
                Command::Ingest(a)
                | Command::Index(a)
                | Command::GenQueries(a)
                | Command::Retrievability(a)
                | Command::Graph(a)
                | Command::Pagerank(a)
                | Command::Metrics(a)
                | Command::Report(a) => a,
                Command::Pipeline(_) | Command::Synth(_) => unreachable!(),
            };
            let stage = cmd.stage().expect("stage command");
            let cfg = a.resolve()?;
            run_stage(stage, &cfg, RunOptions { force: a.force, quiet: false }).map(|_| ())
        }
    }
}
