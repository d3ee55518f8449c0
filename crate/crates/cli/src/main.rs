use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topoband::pipeline::{self, Layout, Stage, StageError};

#[derive(Parser)]
#[command(name = "topoband", version, about = "Topological and band-power feature pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "topoband-out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the configuration and exit.
    Validate,
    /// Write the synthetic recording and events.
    Generate,
    /// Extract feature matrices from the recording.
    Features,
    /// Run the hyperparameter searches.
    Tune,
    /// Write summary, importance, MI and correlation reports.
    Report,
    /// All stages in order.
    All,
    /// Print the default configuration.
    DefaultConfig,
}

fn run(cli: &Cli) -> Result<(), StageError> {
    if let Command::DefaultConfig = cli.command {
        let text = pipeline::PipelineConfig::default()
            .to_toml()
            .map_err(|source| StageError {
                stage: Stage::Validate,
                source,
            })?;
        print!("{text}");
        return Ok(());
    }
    let cfg = match &cli.config {
        Some(path) => pipeline::load_config(path, cli.seed)?,
        None => {
            let mut cfg = pipeline::PipelineConfig::default();
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg
        }
    };
    let out = Layout::new(&cli.out);
    match cli.command {
        Command::Validate => {
            pipeline::run_stage(Stage::Validate, &cfg, &out)?;
            println!("configuration is valid");
            Ok(())
        }
        Command::Generate => pipeline::run_stage(Stage::Generate, &cfg, &out),
        Command::Features => pipeline::run_stage(Stage::Features, &cfg, &out),
        Command::Tune => pipeline::run_stage(Stage::Tune, &cfg, &out),
        Command::Report => pipeline::run_stage(Stage::Report, &cfg, &out),
        Command::All => pipeline::run_pipeline(&cfg, &out),
        Command::DefaultConfig => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
