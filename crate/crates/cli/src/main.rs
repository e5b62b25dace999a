//! `qtypology`: runs the question typology pipeline stage by stage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qtypology::pipeline::{Pipeline, PipelineConfig, Stage};
use qtypology::Error;

#[derive(Parser)]
#[command(name = "qtypology", version, about = "Induce and analyse a typology of questions")]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true, env = "QTYPE_CONFIG")]
    config: Option<PathBuf>,

    /// Working directory for artifacts; overrides the config's `workdir`.
    #[arg(long, global = true, env = "QTYPE_WORKDIR")]
    workdir: Option<PathBuf>,

    /// With `run-all`, start from this stage instead of `ingest`.
    #[arg(long, global = true)]
    stage: Option<Stage>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Debug logging (`RUST_LOG` takes precedence).
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load, validate and filter the corpus.
    Ingest,
    /// Extract question fragments.
    Fragments,
    /// Mine, merge and link motifs.
    Motifs,
    /// Build the answer matrix, its SVD and the motif embeddings.
    Space,
    /// Cluster motif embeddings into question types.
    Fit,
    /// Assign every question a type.
    Assign,
    /// Run the statistical analyses.
    Analyze,
    /// Write the summary report.
    Report,
    /// Run every stage in order.
    RunAll,
}

mod exit {
    pub const CONFIG: u8 = 3;
    pub const MISSING_ARTIFACT: u8 = 4;
    pub const IO: u8 = 5;
    pub const BAD_DATA: u8 = 6;
    pub const COMPUTATION: u8 = 7;
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => exit::CONFIG,
        Error::MissingArtifact { .. } => exit::MISSING_ARTIFACT,
        Error::Io { .. } => exit::IO,
        Error::Json { .. }
        | Error::InvalidParse { .. }
        | Error::EmptySentence
        | Error::Corrupt(_)
        | Error::IncompatibleVersion { .. } => exit::BAD_DATA,
        Error::EmptyMatrix
        | Error::Alignment
        | Error::Unassignable
        | Error::Infeasible { .. }
        | Error::Undefined(_)
        | Error::DegenerateSample(_) => exit::COMPUTATION,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("no config given (use --config or QTYPE_CONFIG)".into()))?;
    let cfg = PipelineConfig::load(config_path)?;
    let workdir = cli
        .workdir
        .clone()
        .or_else(|| cfg.workdir.clone())
        .unwrap_or_else(|| PathBuf::from("work"));
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let pipeline = Pipeline::new(cfg, workdir)?;
    let stages: Vec<Stage> = match cli.command {
        Command::Ingest => vec![Stage::Ingest],
        Command::Fragments => vec![Stage::Fragments],
        Command::Motifs => vec![Stage::Motifs],
        Command::Space => vec![Stage::Space],
        Command::Fit => vec![Stage::Fit],
        Command::Assign => vec![Stage::Assign],
        Command::Analyze => vec![Stage::Analyze],
        Command::Report => vec![Stage::Report],
        Command::RunAll => {
            let from = cli.stage.unwrap_or(Stage::Ingest);
            Stage::ALL.into_iter().filter(|s| *s >= from).collect()
        }
    };
    for stage in stages {
        let out = pipeline.run(stage)?;
        println!("{:<10} {} ({} ms)", stage.name(), out.summary, out.manifest.elapsed_ms);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
