use std::io::{self, BufWriter, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proactive_cli::{bridge, commands, repl, CliError};
use proactive_core::RunMode;

#[derive(Parser)]
#[command(name = "proactive", version, about = "Proactive agent engine: replay, inspect and serve scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trajectory and print what the robot does in each state.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "combined")]
        mode: RunMode,
        /// Comma-separated state ids; defaults to the scenario's own.
        #[arg(long)]
        trajectory: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the JSONL trace instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Print every opportunity degree at a listed state.
    Opps {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        state: String,
        /// Lookahead; defaults to the scenario's.
        #[arg(long = "K", short = 'k')]
        horizon: Option<usize>,
    },
    /// Print each goal's shortest residual plan at a listed state.
    Plans {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        state: String,
    },
    /// Export the state graph as Graphviz DOT.
    Graph {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Step through a scenario interactively.
    Repl {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "combined")]
        mode: RunMode,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Serve the HTTP bridge for the steering UI.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        host: IpAddr,
        #[arg(long, default_value = "combined")]
        mode: RunMode,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Run {
            scenario,
            mode,
            trajectory,
            seed,
            json,
        } => {
            let sc = commands::load(&scenario)?;
            let traj = commands::parse_trajectory(trajectory.as_deref(), &sc);
            commands::run(&sc, mode, &traj, seed.unwrap_or(sc.config.seed), json, &mut out)?;
        }
        Command::Opps {
            scenario,
            state,
            horizon,
        } => {
            let sc = commands::load(&scenario)?;
            commands::opps(&sc, &state, horizon.unwrap_or(sc.config.horizon), &mut out)?;
        }
        Command::Plans { scenario, state } => {
            let sc = commands::load(&scenario)?;
            commands::plans(&sc, &state, &mut out)?;
        }
        Command::Graph { scenario, out: path } => {
            let sc = commands::load(&scenario)?;
            commands::graph(&sc, &path)?;
        }
        Command::Repl { scenario, mode, seed } => {
            let sc = commands::load(&scenario)?;
            let seed = seed.unwrap_or(sc.config.seed);
            repl::run(sc, mode, seed, io::stdin().lock(), &mut out)?;
        }
        Command::Serve {
            scenario,
            port,
            host,
            mode,
            seed,
        } => {
            let sc = commands::load(&scenario)?;
            let seed = seed.unwrap_or(sc.config.seed);
            let state = bridge::AppState::new(sc, mode, seed)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(bridge::serve(state, SocketAddr::new(host, port)))
                .map_err(|e| CliError::Internal(format!("bridge: {e}")))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROACTIVE_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) | Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
