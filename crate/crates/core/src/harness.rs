//! Experiment runner: seeded episodes, multi-agent combined answering,
//! named presets and aggregation.
//!
//! Seeding: an episode seed feeds a splitmix64 stream whose first
//! output seeds the environment and whose next outputs seed the agents
//! in index order. Experiment cells derive their episode seeds as
//! `splitmix64(seed XOR cell_index)`, so adding cells never perturbs
//! existing ones.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::entity::{EntityName, Question};
use crate::env::{EnvConfig, EnvError, Room, StepOutput};
use crate::knowledge::CommonsenseKB;
use crate::policy::{Agent, AnswerMode, ForgetMode, PolicyConfig, PolicyError, PolicyKind};
use crate::rng::splitmix64;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("cannot write {path:?}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown preset {0:?} (expected fig1|fig2|fig3)")]
    UnknownPreset(String),
    #[error("experiment needs at least one seed")]
    NoSeeds,
}

/// One completed episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub total_reward: u64,
    pub reward_trace: Vec<u8>,
    pub config: EnvConfig,
    pub policy: PolicyConfig,
    pub seed: u64,
}

/// One experiment cell: a policy configuration and a team size. The
/// capacity in `policy` is per agent; a two-agent cell at capacity 16
/// matches a single agent at 32 in team-total memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub policy: PolicyConfig,
    pub n_agents: usize,
}

/// A full experiment: an environment template (seed and agent count
/// overridden per episode), the cells, and the episode seeds run for
/// each cell.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub env: EnvConfig,
    pub cells: Vec<Cell>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

/// One CSV row of an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub cell_index: usize,
    pub policy: PolicyConfig,
    pub n_agents: usize,
    pub seed: u64,
    pub total_reward: u64,
}

/// Per-cell aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub policy: String,
    pub forget_mode: String,
    pub answer_mode: String,
    pub capacity: usize,
    pub n_agents: usize,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Records plus their per-cell summaries, in cell order.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<EpisodeRecord>,
    pub summaries: Vec<CellSummary>,
}

fn derive_seeds(episode_seed: u64, n_agents: usize) -> (u64, Vec<u64>) {
    let mut stream = episode_seed;
    let env_seed = splitmix64(&mut stream);
    let agent_seeds = (0..n_agents).map(|_| splitmix64(&mut stream)).collect();
    (env_seed, agent_seeds)
}

/// Runs one episode to completion: every step each agent ingests its
/// own observation, the shared question is answered jointly, and the
/// reward is recorded.
pub fn run_episode(
    env: &EnvConfig,
    policy: PolicyConfig,
    n_agents: usize,
    seed: u64,
    kb: &CommonsenseKB,
) -> Result<EpisodeResult, HarnessError> {
    run_episode_inner(env, policy, n_agents, seed, kb, None)
}

/// As [`run_episode`], also rendering the per-step trace: step,
/// per-agent observation quadruples, question, answer ("-" abstains)
/// and reward, tab-separated.
pub fn run_episode_traced(
    env: &EnvConfig,
    policy: PolicyConfig,
    n_agents: usize,
    seed: u64,
    kb: &CommonsenseKB,
) -> Result<(EpisodeResult, String), HarnessError> {
    let mut trace = String::new();
    let result = run_episode_inner(env, policy, n_agents, seed, kb, Some(&mut trace))?;
    Ok((result, trace))
}

fn render_trace_line(
    step: u64,
    output: &StepOutput,
    answer: Option<&EntityName>,
    reward: u32,
) -> String {
    let mut line = step.to_string();
    for obs in &output.observations {
        line.push('\t');
        line.push_str(&obs.render_line());
    }
    line.push('\t');
    line.push_str(&output.question.to_string());
    line.push('\t');
    match answer {
        Some(name) => line.push_str(&name.to_string()),
        None => line.push('-'),
    }
    line.push('\t');
    line.push_str(&reward.to_string());
    line.push('\n');
    line
}

fn run_episode_inner(
    env: &EnvConfig,
    policy: PolicyConfig,
    n_agents: usize,
    seed: u64,
    kb: &CommonsenseKB,
    mut trace: Option<&mut String>,
) -> Result<EpisodeResult, HarnessError> {
    let (env_seed, agent_seeds) = derive_seeds(seed, n_agents);
    let mut config = env.clone();
    config.seed = env_seed;
    config.n_agents = n_agents;
    let mut agents = agent_seeds
        .iter()
        .map(|&s| Agent::new(policy, kb, s))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut room, mut output) = Room::reset(config.clone(), kb)?;
    let mut reward_trace = Vec::with_capacity(config.max_steps as usize);
    loop {
        for (agent, obs) in agents.iter_mut().zip(&output.observations) {
            agent.observe(obs.clone());
        }
        let answer = combine_answers(&mut agents, &output.question);
        let step = room.step_count();
        let result = room.step(answer.as_ref())?;
        reward_trace.push(result.reward as u8);
        if let Some(buf) = trace.as_deref_mut() {
            buf.push_str(&render_trace_line(step, &output, answer.as_ref(), result.reward));
        }
        if result.done {
            break;
        }
        output = result.output;
    }
    Ok(EpisodeResult {
        total_reward: reward_trace.iter().map(|&r| u64::from(r)).sum(),
        reward_trace,
        config,
        policy,
        seed,
    })
}

/// Joint answering over every agent's stores. A single agent answers
/// for itself. With several, handcrafted mode takes the globally latest
/// relevant episodic memory, else the globally strongest relevant
/// semantic memory (ties to the lower agent index); random mode draws
/// one entry uniformly from all stores, using agent 0's generator.
pub fn combine_answers(agents: &mut [Agent], question: &Question) -> Option<EntityName> {
    if agents.len() == 1 {
        return agents[0].answer(question);
    }
    match agents[0].config().answer_mode {
        AnswerMode::Handcrafted => {
            let mut best_episodic: Option<&crate::entity::MemoryQuadruple> = None;
            for agent in agents.iter() {
                if let Some(hit) = agent.episodic().latest(question) {
                    if best_episodic.is_none_or(|b| hit.meta > b.meta) {
                        best_episodic = Some(hit);
                    }
                }
            }
            if let Some(hit) = best_episodic {
                return Some(hit.tail.clone());
            }
            let mut best_semantic: Option<&crate::entity::MemoryQuadruple> = None;
            for agent in agents.iter() {
                if let Some(hit) = agent.semantic().strongest(question) {
                    if best_semantic.is_none_or(|b| hit.meta > b.meta) {
                        best_semantic = Some(hit);
                    }
                }
            }
            best_semantic.map(|hit| hit.tail.clone())
        }
        AnswerMode::Random => {
            let total: usize = agents
                .iter()
                .map(|a| a.episodic().len() + a.semantic().len())
                .sum();
            if total == 0 {
                return None;
            }
            let mut idx = agents[0].draw_below(total);
            for agent in agents.iter() {
                if idx < agent.episodic().len() {
                    return Some(agent.episodic().entries()[idx].tail.clone());
                }
                idx -= agent.episodic().len();
                if idx < agent.semantic().len() {
                    return Some(agent.semantic().entries().nth(idx).unwrap().tail.clone());
                }
                idx -= agent.semantic().len();
            }
            unreachable!("index within total store size")
        }
    }
}

/// The named experiment presets.
///
/// `fig1`: H1..H4 at capacity 32, handcrafted vs the three random
/// ablations. `fig2`: capacity sweep {2,4,8,16,32,64} × H1..H4.
/// `fig3`: H4 with one agent at capacity 32 vs two agents at 16 each.
pub fn preset(name: &str, n_seeds: u64) -> Result<ExperimentSpec, HarnessError> {
    let kinds = [PolicyKind::H1, PolicyKind::H2, PolicyKind::H3, PolicyKind::H4];
    let cells = match name {
        "fig1" => {
            let modes = [
                (ForgetMode::Handcrafted, AnswerMode::Handcrafted),
                (ForgetMode::Random, AnswerMode::Handcrafted),
                (ForgetMode::Handcrafted, AnswerMode::Random),
                (ForgetMode::Random, AnswerMode::Random),
            ];
            kinds
                .iter()
                .flat_map(|&kind| {
                    modes.iter().map(move |&(forget_mode, answer_mode)| Cell {
                        policy: PolicyConfig {
                            kind,
                            total_capacity: 32,
                            forget_mode,
                            answer_mode,
                        },
                        n_agents: 1,
                    })
                })
                .collect()
        }
        "fig2" => [2usize, 4, 8, 16, 32, 64]
            .iter()
            .flat_map(|&capacity| {
                kinds.iter().map(move |&kind| Cell {
                    policy: PolicyConfig::handcrafted(kind, capacity),
                    n_agents: 1,
                })
            })
            .collect(),
        "fig3" => vec![
            Cell {
                policy: PolicyConfig::handcrafted(PolicyKind::H4, 32),
                n_agents: 1,
            },
            Cell {
                policy: PolicyConfig::handcrafted(PolicyKind::H4, 16),
                n_agents: 2,
            },
        ],
        _ => return Err(HarnessError::UnknownPreset(name.to_string())),
    };
    Ok(ExperimentSpec {
        env: EnvConfig::default(),
        cells,
        seeds: (0..n_seeds).collect(),
        output: None,
    })
}

/// Runs every (cell, seed) episode, in parallel, in deterministic
/// output order; writes the CSV if the spec names an output path.
pub fn run_experiment(
    spec: &ExperimentSpec,
    kb: &CommonsenseKB,
) -> Result<ExperimentResult, HarnessError> {
    if spec.seeds.is_empty() {
        return Err(HarnessError::NoSeeds);
    }
    let jobs: Vec<(usize, &Cell, u64)> = spec
        .cells
        .iter()
        .enumerate()
        .flat_map(|(cell_index, cell)| {
            spec.seeds
                .iter()
                .map(move |&seed| (cell_index, cell, seed))
        })
        .collect();
    let records: Vec<EpisodeRecord> = jobs
        .par_iter()
        .map(|&(cell_index, cell, seed)| {
            let mut stream = seed ^ cell_index as u64;
            let episode_seed = splitmix64(&mut stream);
            let result = run_episode(&spec.env, cell.policy, cell.n_agents, episode_seed, kb)?;
            Ok(EpisodeRecord {
                cell_index,
                policy: cell.policy,
                n_agents: cell.n_agents,
                seed,
                total_reward: result.total_reward,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let summaries = summarize(&spec.cells, &records);
    if let Some(path) = &spec.output {
        write_csv(&records, path)?;
    }
    Ok(ExperimentResult { records, summaries })
}

/// Sample mean and standard deviation (n−1 denominator; 0 when n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

fn summarize(cells: &[Cell], records: &[EpisodeRecord]) -> Vec<CellSummary> {
    cells
        .iter()
        .enumerate()
        .map(|(cell_index, cell)| {
            let rewards: Vec<f64> = records
                .iter()
                .filter(|r| r.cell_index == cell_index)
                .map(|r| r.total_reward as f64)
                .collect();
            let (mean, std) = mean_std(&rewards);
            CellSummary {
                policy: cell.policy.kind.to_string(),
                forget_mode: cell.policy.forget_mode.to_string(),
                answer_mode: cell.policy.answer_mode.to_string(),
                capacity: cell.policy.total_capacity,
                n_agents: cell.n_agents,
                mean,
                std,
                n: rewards.len(),
            }
        })
        .collect()
}

/// The CSV table: fixed header, one row per episode in record order,
/// LF endings. Byte-identical across reruns.
pub fn render_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::from("policy,forget_mode,answer_mode,capacity,n_agents,seed,total_reward\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.policy.kind,
            r.policy.forget_mode,
            r.policy.answer_mode,
            r.policy.total_capacity,
            r.n_agents,
            r.seed,
            r.total_reward
        ));
    }
    out
}

pub fn write_csv(records: &[EpisodeRecord], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let path = path.as_ref();
    fs::write(path, render_csv(records)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The summary JSON: an array of per-cell objects in cell order.
pub fn render_summary(summaries: &[CellSummary]) -> String {
    let mut out = serde_json::to_string_pretty(summaries).expect("summaries serialize");
    out.push('\n');
    out
}

pub fn write_summary(
    summaries: &[CellSummary],
    path: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    let path = path.as_ref();
    fs::write(path, render_summary(summaries)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
