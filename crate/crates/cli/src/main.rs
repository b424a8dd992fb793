//! `ensemble`: trace replay, REPL, grammar fuzzing and the live session service.

mod repl;
mod serve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ensemble_core::automaton::Mode;
use ensemble_core::dialogue::GestureLexicon;
use ensemble_core::harness::{fuzz, run_trace, ReplayOptions};
use ensemble_core::scene::{load_scene, Scene};
use ensemble_core::semantics::ActionTable;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ensemble", version, about = "Multimodal dialogue on an extended pushdown automaton")]
struct Cli {
    /// Write the learned gesture lexicon here when the command finishes.
    #[arg(long, global = true, value_name = "FILE")]
    save_lexicon: Option<PathBuf>,
    /// Start from a previously saved gesture lexicon.
    #[arg(long, global = true, value_name = "FILE")]
    load_lexicon: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace file and print the move log.
    Run {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "dpda")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Talk to the agent line by line.
    Repl {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Run sampled grammatical sequences and report dead inputs and violations.
    Fuzz {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve live sessions over WebSocket.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        scene: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{0}")]
    Engine(String),
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_scene(path: &Path) -> Result<Scene, CliError> {
    load_scene(&read_file(path)?).map_err(|e| CliError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_lexicon(path: Option<&Path>) -> Result<Option<GestureLexicon>, CliError> {
    path.map(|p| {
        GestureLexicon::load(p, &ActionTable::default()).map_err(|e| CliError::File {
            path: p.display().to_string(),
            message: e.to_string(),
        })
    })
    .transpose()
}

fn save_lexicon(path: Option<&Path>, lexicon: Option<&GestureLexicon>) -> Result<(), CliError> {
    match (path, lexicon) {
        (Some(p), Some(lex)) => lex.save(p).map_err(|e| CliError::File {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        _ => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let gestures = load_lexicon(cli.load_lexicon.as_deref())?;
    let save = cli.save_lexicon.as_deref();
    match cli.command {
        Command::Run { scene, trace, mode, seed } => {
            let scene = read_scene(&scene)?;
            let text = read_file(&trace)?;
            let options = ReplayOptions { mode, seed, gestures };
            let report = run_trace(scene, &text, &options).map_err(|e| CliError::Engine(e.to_string()))?;
            print!("{}", report.log());
            for m in &report.mismatches {
                eprintln!("mismatch: {m}");
            }
            for e in &report.errors {
                eprintln!("error: {}", serde_json::to_string(e).unwrap_or_default());
            }
            save_lexicon(save, report.gestures.as_ref())?;
            Ok(if report.success() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Repl { scene } => {
            let scene = read_scene(&scene)?;
            let lexicon = repl::run(scene, gestures, std::io::stdin().lock(), std::io::stdout().lock())
                .map_err(|e| CliError::Engine(e.to_string()))?;
            save_lexicon(save, Some(&lexicon))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fuzz { max_len, count, seed } => {
            let report = fuzz(max_len, count, seed).map_err(|e| CliError::Engine(e.to_string()))?;
            print!("{}", report.to_json());
            Ok(if report.clean() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Serve { port, scene } => {
            let scene = read_scene(&scene)?;
            serve::run(port, scene, gestures, save.map(Path::to_path_buf)).map_err(|e| CliError::Engine(e.to_string()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ensemble: {e}");
            ExitCode::from(2)
        }
    }
}
