//! A deterministic, seedable "Room" simulator and the bounded-memory
//! agents that live in it.
//!
//! People in a room move objects around; an agent observes one person
//! per step, stores what it saw in bounded episodic and semantic
//! memory, and answers a location question each step for reward. The
//! crate provides the environment ([`env`]), the stores ([`memory`]),
//! the handcrafted policies and their random ablations ([`policy`]),
//! an experiment harness with named presets ([`harness`]), and a
//! line-delimited JSON network service ([`envd`]).
//!
//! Everything is reproducible: a fixed generator ([`rng`]) with a
//! documented draw order makes every episode a pure function of its
//! seed.

pub mod entity;
pub mod env;
pub mod envd;
pub mod harness;
pub mod knowledge;
pub mod memory;
pub mod policy;
pub mod rng;

pub use entity::{EntityError, EntityName, MemoryQuadruple, Question, Relation};
pub use env::{
    DynamicsStats, EnvConfig, EnvError, PersonState, Room, StepOutput, StepResult,
};
pub use envd::{EnvServer, ServeConfig};
pub use harness::{
    combine_answers, mean_std, preset, render_csv, render_summary, run_episode,
    run_episode_traced, run_experiment, write_csv, write_summary, Cell, CellSummary,
    EpisodeRecord, EpisodeResult, ExperimentResult, ExperimentSpec, HarnessError,
};
pub use knowledge::{CommonsenseKB, KbError};
pub use memory::{
    dump_stores, episodic_compress, EpisodicEviction, EpisodicStore, MemoryError,
    SemanticEviction, SemanticStore,
};
pub use policy::{Agent, AnswerMode, ForgetMode, PolicyConfig, PolicyError, PolicyKind};
pub use rng::Rng;
