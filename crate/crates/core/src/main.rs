use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gauge_qme::experiments::runner::{run_scenario, run_sweep, RunOptions};
use gauge_qme::experiments::scenarios::{self, Kind};
use gauge_qme::experiments::ScenarioConfig;
use gauge_qme::par::{self, ExecMode};
use gauge_qme::Error;

#[derive(Parser)]
#[command(name = "gauge-qme", version, about = "Gauge-sector exact diagonalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Config file, or the name of a built-in scenario.
    config: String,
    /// Output directory (default: the config's `output`, else $GAUGE_QME_OUT/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest sector dimension allowed (overrides the config).
    #[arg(long)]
    cap_dim: Option<usize>,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
    #[arg(long, env = "GAUGE_QME_OUT", default_value = "results", hide = true)]
    out_root: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured states and write metric series.
    Run(Common),
    /// Long-time averages over lists of N and J.
    Sweep(Common),
    /// Print the built-in scenarios.
    ListScenarios,
}

fn load(spec: &str) -> Result<ScenarioConfig, Error> {
    let path = Path::new(spec);
    if path.is_file() {
        return ScenarioConfig::parse(&std::fs::read_to_string(path)?);
    }
    match scenarios::find(spec) {
        Some(b) => b.config(),
        None => Err(Error::Config {
            line: 0,
            field: "config".into(),
            message: format!("'{spec}' is neither a file nor a built-in scenario"),
        }),
    }
}

fn execute(args: Common, sweep: bool) -> Result<(), Error> {
    let mut cfg = load(&args.config)?;
    if let Some(cap) = args.cap_dim {
        cfg.cap_dim = cap;
    }
    par::init_threads(args.threads);
    let out_dir = args
        .out
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| args.out_root.join(&cfg.scenario));
    let opts = RunOptions {
        out_dir,
        mode: if args.sequential { ExecMode::Sequential } else { ExecMode::Parallel },
    };
    let manifest = if sweep { run_sweep(&cfg, &opts)? } else { run_scenario(&cfg, &opts)? };
    println!(
        "{}: {} files in {} ({:.2} s)",
        manifest.scenario,
        manifest.files.len(),
        opts.out_dir.display(),
        manifest.wall_clock_seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::ListScenarios => {
            for b in scenarios::BUILTINS {
                let kind = match b.kind {
                    Kind::Run => "run",
                    Kind::Sweep => "sweep",
                };
                println!("{:<14} {:<6} {}", b.name, kind, b.summary());
            }
            Ok(())
        }
        Command::Run(args) => execute(args, false),
        Command::Sweep(args) => execute(args, true),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                Error::CapExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}
