use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use plugpull::sim::{Mode, ScenarioConfig};
use plugpull_cli::{batch, live};

#[derive(Parser)]
#[command(name = "plugpull", version, about = "Aerial manipulator plug-pulling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV log.
    Run {
        /// Scenario config (JSON).
        #[arg(long, env = "PLUGPULL_CONFIG")]
        config: PathBuf,
        /// Overrides the mode in the config.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run baseline and proposed modes and write the metric table. Both
    /// logs are written next to the table.
    Compare {
        #[arg(long, env = "PLUGPULL_CONFIG")]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the telemetry frames of a logged run, one JSON object per line.
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Frame rate (Hz).
        #[arg(long, default_value_t = 30.0)]
        rate: f64,
    },
    /// Live mode: serve `/ws` with a client in place of the scripted operator.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Scenario config; defaults are used when absent.
        #[arg(long, env = "PLUGPULL_CONFIG")]
        config: Option<PathBuf>,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
}

/// A config path that does not exist is a usage error (exit 2); a config
/// that fails to parse or validate is a runtime error (exit 1).
fn load_config(path: &Path) -> Result<ScenarioConfig, ExitCode> {
    if !path.is_file() {
        eprintln!("error: config file {} not found\n", path.display());
        let _ = Cli::command().print_help();
        return Err(ExitCode::from(2));
    }
    ScenarioConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

fn fail(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, mode, out } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match batch::run(&cfg, mode, &out) {
                Ok(log) => {
                    eprintln!("wrote {} rows to {}", log.rows.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Compare { config, out } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match batch::compare(&cfg, &out) {
                Ok(rows) => {
                    print!("{}", batch::format_table(&rows));
                    if let [b, p] = rows.as_slice() {
                        if let (Some(mb), Some(mp)) = (b.metrics, p.metrics) {
                            println!("overshoot reduction: {:.1}%", 100.0 * (1.0 - mp.overshoot / mb.overshoot));
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Replay { log, rate } => {
            if !(rate > 0.0 && rate.is_finite()) {
                eprintln!("error: --rate must be positive");
                return ExitCode::from(2);
            }
            match batch::replay(&log, rate) {
                Ok(frames) => {
                    for f in frames {
                        println!("{f}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Serve { port, config, speed } => {
            let cfg = match config {
                Some(path) => match load_config(&path) {
                    Ok(c) => c,
                    Err(code) => return code,
                },
                None => ScenarioConfig::default(),
            };
            if !(speed > 0.0 && speed.is_finite()) {
                eprintln!("error: --speed must be positive");
                return ExitCode::from(2);
            }
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => return fail(e.into()),
            };
            let result = rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                live::serve(listener, cfg, speed).await
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    }
}
