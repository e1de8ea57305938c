//! The `room` command line: experiment presets, single traced episodes,
//! and the TCP environment service.

use std::error::Error;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use room_core::{
    preset, run_episode, run_episode_traced, run_experiment, write_summary, AnswerMode,
    CommonsenseKB, EnvConfig, EnvServer, ForgetMode, PolicyConfig, PolicyKind, ServeConfig,
};

#[derive(Parser)]
#[command(name = "room", version, about = "Room world simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset and write the per-episode CSV.
    Run {
        /// Preset name: fig1, fig2 or fig3.
        #[arg(long)]
        preset: String,
        /// Number of seeds; episodes use seeds 0..N.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-cell summary JSON path.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Environment config file (key=value lines or a flat JSON object).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Commonsense KB file; defaults to the built-in KB.
        #[arg(long)]
        kb: Option<PathBuf>,
    },
    /// Run a single episode and print its total reward.
    Episode {
        /// Policy: h1, h2, h3 or h4.
        #[arg(long)]
        policy: String,
        /// Per-agent total memory capacity.
        #[arg(long)]
        capacity: usize,
        /// Episode seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Forgetting mode: handcrafted or random.
        #[arg(long, default_value = "handcrafted")]
        forget: String,
        /// Answering mode: handcrafted or random.
        #[arg(long, default_value = "handcrafted")]
        answer: String,
        /// Number of cooperating agents.
        #[arg(long, default_value_t = 1)]
        agents: usize,
        /// Write the per-step trace (TSV) to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Environment config file (key=value lines or a flat JSON object).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Commonsense KB file; defaults to the built-in KB.
        #[arg(long)]
        kb: Option<PathBuf>,
    },
    /// Serve the environment over newline-delimited JSON on TCP.
    Serve {
        /// Port to listen on; 0 picks a free port.
        #[arg(long)]
        port: u16,
        /// Address to bind.
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Maximum number of live sessions.
        #[arg(long, default_value_t = 64)]
        max_sessions: usize,
        /// Idle seconds before a session expires.
        #[arg(long, default_value_t = 600)]
        idle_timeout_secs: u64,
        /// Commonsense KB file; defaults to the built-in KB.
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("room: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_kb(path: Option<&PathBuf>) -> Result<CommonsenseKB, Box<dyn Error>> {
    match path {
        Some(path) => Ok(CommonsenseKB::load(path)?),
        None => Ok(CommonsenseKB::builtin()),
    }
}

fn load_env(path: Option<&PathBuf>, kb: &CommonsenseKB) -> Result<EnvConfig, Box<dyn Error>> {
    let config = match path {
        Some(path) => EnvConfig::from_file(path)?,
        None => EnvConfig::default(),
    };
    config.validate(kb)?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::Run {
            preset: name,
            seeds,
            out,
            summary,
            config,
            kb,
        } => {
            let kb = load_kb(kb.as_ref())?;
            let mut spec = preset(&name, seeds)?;
            if config.is_some() {
                spec.env = load_env(config.as_ref(), &kb)?;
            }
            spec.output = Some(out);
            let result = run_experiment(&spec, &kb)?;
            if let Some(path) = summary {
                write_summary(&result.summaries, path)?;
            }
            for s in &result.summaries {
                println!(
                    "{} forget={} answer={} capacity={} agents={} mean={:.2} std={:.2} n={}",
                    s.policy, s.forget_mode, s.answer_mode, s.capacity, s.n_agents, s.mean, s.std,
                    s.n
                );
            }
            Ok(())
        }
        Command::Episode {
            policy,
            capacity,
            seed,
            forget,
            answer,
            agents,
            trace,
            config,
            kb,
        } => {
            let kb = load_kb(kb.as_ref())?;
            let env = load_env(config.as_ref(), &kb)?;
            let policy = PolicyConfig {
                kind: policy.parse::<PolicyKind>()?,
                total_capacity: capacity,
                forget_mode: forget.parse::<ForgetMode>()?,
                answer_mode: answer.parse::<AnswerMode>()?,
            };
            let result = match trace {
                Some(path) => {
                    let (result, trace) = run_episode_traced(&env, policy, agents, seed, &kb)?;
                    std::fs::write(&path, trace)
                        .map_err(|e| format!("write {}: {e}", path.display()))?;
                    result
                }
                None => run_episode(&env, policy, agents, seed, &kb)?,
            };
            println!("total_reward={}", result.total_reward);
            Ok(())
        }
        Command::Serve {
            port,
            bind,
            max_sessions,
            idle_timeout_secs,
            kb,
        } => {
            let kb = load_kb(kb.as_ref())?;
            let server = Arc::new(EnvServer::new(
                kb,
                ServeConfig {
                    max_sessions,
                    idle_timeout: Duration::from_secs(idle_timeout_secs),
                },
            ));
            let listener = TcpListener::bind((bind.as_str(), port))?;
            println!("listening on {}", listener.local_addr()?);
            server.serve(listener)?;
            Ok(())
        }
    }
}
