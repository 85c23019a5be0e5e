use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simcore::bundle::{run_sweep, write_bundle};
use simcore::tcp::Variant;
use simcore::{run_scenario, ConfigError, Overrides, ScenarioConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "simrun", version, about = "Game traffic vs. bulk TCP on an ADSL uplink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its result bundle.
    Run {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        ftp_variant: Option<Variant>,
        #[arg(long)]
        uplink_buffer: Option<u32>,
        /// Simulated seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Run every FTP variant with 200- and 20-packet uplink buffers.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: PathBuf,
        /// Concurrent cells; defaults to one thread per cell.
        #[arg(long, env = "SIMRUN_THREADS")]
        threads: Option<usize>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario JSON; the built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        match &self.scenario {
            Some(p) => ScenarioConfig::parse_file(p),
            None => Ok(ScenarioConfig::default()),
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn run_one(cfg: &ScenarioConfig, out: &Path) -> Result<(), Failure> {
    let output = run_scenario(cfg).map_err(runtime_err)?;
    write_bundle(out, cfg, &output).map_err(runtime_err)?;
    let s = &output.summary;
    match s.wow_mean_delay_s() {
        Some(d) => println!("wow mean uplink delay: {:.1} ms", d * 1e3),
        None => println!("wow mean uplink delay: no samples"),
    }
    if let Some(f) = s.flow("ftp") {
        println!("ftp goodput: {:.1} kb/s", f.goodput_bps / 1e3);
    }
    println!("uplink drops: {}", s.uplink().drops);
    println!("results in {}", out.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
            ftp_variant,
            uplink_buffer,
            duration,
        } => {
            let mut cfg = scenario.load().map_err(config_err)?;
            cfg.apply(&Overrides {
                ftp_variant,
                uplink_buffer,
                duration_s: duration,
                seed,
            })
            .map_err(config_err)?;
            run_one(&cfg, &out)
        }
        Command::Sweep { scenario, out, threads } => {
            let cfg = scenario.load().map_err(config_err)?;
            let threads = threads.unwrap_or(usize::MAX);
            std::fs::create_dir_all(&out).map_err(runtime_err)?;
            let rows = run_sweep(&cfg, &out, threads).map_err(runtime_err)?;
            for r in rows {
                let delay = r
                    .wow_mean_delay_s
                    .map_or_else(|| "n/a".to_string(), |d| format!("{:.1} ms", d * 1e3));
                println!(
                    "{:<8} buffer {:>3}: wow delay {delay}, wow drops {}, ftp {:.1} kb/s",
                    r.variant.as_str(),
                    r.buffer,
                    r.wow_drops,
                    r.ftp_goodput_bps / 1e3
                );
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let cfg = scenario.load().map_err(config_err)?;
            println!("ok: config sha256 {}", cfg.hash());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
