use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kleinlab::experiments::{self, Command, RunArgs};

/// Experiments on Kleinian groups. Each subcommand writes `<name>.csv` and
/// `<name>.json` into `--out`.
///
/// Precedence: built-in defaults, then `--config`, then `--set`, then
/// `--seed`.
#[derive(Parser)]
#[command(name = "kleinlab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Drift of the unit-time cocycle over random starting frames.
    Lyapunov(Common),
    /// Drift along a circle of rotated frames.
    Drift(Common),
    /// Pencil inversions of linked pairs for the unit circle.
    InversionDemo(Common),
    /// Limit of the graphs along a canonical sequence.
    ClassifyLimit(Common),
    /// Trace-field integrality and boundedness verdict.
    Arithmeticity(Common),
    /// Window masses of three catalogued orbits against the volume.
    Equidist(Common),
    /// Drift of τ-chains started on a catalogued orbit.
    MainLemma(Common),
    /// Maximal inequality for the centred chain increments.
    Martingale(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// bianchi-zi (default), bianchi-zw or trivial-rep.
    #[arg(long, conflicts_with = "presentation")]
    preset: Option<String>,
    /// Presentation file with a `minpoly:` header.
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Override one config key, e.g. `--set samples=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.cmd {
        Cmd::Lyapunov(c) => (Command::Lyapunov, c),
        Cmd::Drift(c) => (Command::Drift, c),
        Cmd::InversionDemo(c) => (Command::InversionDemo, c),
        Cmd::ClassifyLimit(c) => (Command::ClassifyLimit, c),
        Cmd::Arithmeticity(c) => (Command::Arithmeticity, c),
        Cmd::Equidist(c) => (Command::Equidist, c),
        Cmd::MainLemma(c) => (Command::MainLemma, c),
        Cmd::Martingale(c) => (Command::Martingale, c),
    };
    let args = RunArgs {
        config: c.config,
        presentation: c.presentation,
        preset: c.preset,
        seed: c.seed,
        set: c.set,
        out: c.out,
    };
    match experiments::run(cmd, &args) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary["result"]).expect("summary serializes");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kleinlab {}: {e}", cmd.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
