//! The four handcrafted agents and their uniform-random ablations.
//!
//! All policies share one skeleton: observe routes the observation into
//! the stores the policy owns, answer retrieves from them. Which stores
//! exist is entirely a matter of the capacity split, so a policy
//! without (say) a semantic system simply owns a capacity-0 semantic
//! store whose insertion rejections are swallowed.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::entity::{EntityName, MemoryQuadruple, Question};
use crate::knowledge::CommonsenseKB;
use crate::memory::{
    episodic_compress, EpisodicEviction, EpisodicStore, MemoryError, SemanticEviction,
    SemanticStore,
};
use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("h3 splits capacity evenly and needs an even total, got {0}")]
    OddCapacity(usize),
    #[error("unknown policy {0:?} (expected h1|h2|h3|h4)")]
    UnknownPolicy(String),
    #[error("unknown mode {0:?} (expected handcrafted|random)")]
    UnknownMode(String),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

/// Which memory systems the agent runs and how it uses them.
///
/// H1: episodic only (forget oldest, answer latest). H2: semantic only
/// (forget weakest, answer strongest). H3: both, compressing episodic
/// overflow into semantic. H4: episodic plus a frozen pretrained
/// semantic store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    H1,
    H2,
    H3,
    H4,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            PolicyKind::H1 => "h1",
            PolicyKind::H2 => "h2",
            PolicyKind::H3 => "h3",
            PolicyKind::H4 => "h4",
        };
        f.write_str(token)
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(token: &str) -> Result<Self, PolicyError> {
        match token.to_ascii_lowercase().as_str() {
            "h1" => Ok(PolicyKind::H1),
            "h2" => Ok(PolicyKind::H2),
            "h3" => Ok(PolicyKind::H3),
            "h4" => Ok(PolicyKind::H4),
            _ => Err(PolicyError::UnknownPolicy(token.to_string())),
        }
    }
}

/// Eviction selection: the policy's stated rule, or uniform-random.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForgetMode {
    Handcrafted,
    Random,
}

/// Answer selection: the policy's stated retrieval, or a uniform draw
/// over everything the agent holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnswerMode {
    Handcrafted,
    Random,
}

impl fmt::Display for ForgetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForgetMode::Handcrafted => "handcrafted",
            ForgetMode::Random => "random",
        })
    }
}

impl FromStr for ForgetMode {
    type Err = PolicyError;

    fn from_str(token: &str) -> Result<Self, PolicyError> {
        match token.to_ascii_lowercase().as_str() {
            "handcrafted" => Ok(ForgetMode::Handcrafted),
            "random" => Ok(ForgetMode::Random),
            _ => Err(PolicyError::UnknownMode(token.to_string())),
        }
    }
}

impl fmt::Display for AnswerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerMode::Handcrafted => "handcrafted",
            AnswerMode::Random => "random",
        })
    }
}

impl FromStr for AnswerMode {
    type Err = PolicyError;

    fn from_str(token: &str) -> Result<Self, PolicyError> {
        match token.to_ascii_lowercase().as_str() {
            "handcrafted" => Ok(AnswerMode::Handcrafted),
            "random" => Ok(AnswerMode::Random),
            _ => Err(PolicyError::UnknownMode(token.to_string())),
        }
    }
}

/// A policy choice plus its total memory budget and ablation modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub total_capacity: usize,
    pub forget_mode: ForgetMode,
    pub answer_mode: AnswerMode,
}

impl PolicyConfig {
    /// The fully handcrafted configuration.
    pub fn handcrafted(kind: PolicyKind, total_capacity: usize) -> PolicyConfig {
        PolicyConfig {
            kind,
            total_capacity,
            forget_mode: ForgetMode::Handcrafted,
            answer_mode: AnswerMode::Handcrafted,
        }
    }

    /// The (episodic, semantic) capacity split. H1 and H2 give the
    /// whole budget to one system; H3 splits evenly (even total
    /// required); H4 caps semantic at the KB size and gives the rest to
    /// episodic.
    pub fn split(&self, kb_size: usize) -> Result<(usize, usize), PolicyError> {
        match self.kind {
            PolicyKind::H1 => Ok((self.total_capacity, 0)),
            PolicyKind::H2 => Ok((0, self.total_capacity)),
            PolicyKind::H3 => {
                if !self.total_capacity.is_multiple_of(2) {
                    return Err(PolicyError::OddCapacity(self.total_capacity));
                }
                Ok((self.total_capacity / 2, self.total_capacity / 2))
            }
            PolicyKind::H4 => {
                let semantic = (self.total_capacity / 2).min(kb_size);
                Ok((self.total_capacity - semantic, semantic))
            }
        }
    }
}

/// One agent: a policy plus its stores and private generator.
#[derive(Debug, Clone)]
pub struct Agent {
    config: PolicyConfig,
    episodic: EpisodicStore,
    semantic: SemanticStore,
    rng: Rng,
}

impl Agent {
    /// Builds the stores per the capacity split; H4 additionally
    /// pretrains and freezes its semantic store from the KB.
    pub fn new(config: PolicyConfig, kb: &CommonsenseKB, seed: u64) -> Result<Agent, PolicyError> {
        let (epi_cap, sem_cap) = config.split(kb.n_objects())?;
        let semantic = match config.kind {
            PolicyKind::H4 => SemanticStore::with_entries(sem_cap, kb.pretrain_semantic(sem_cap), true)?,
            _ => SemanticStore::new(sem_cap),
        };
        Ok(Agent {
            config,
            episodic: EpisodicStore::new(epi_cap),
            semantic,
            rng: Rng::from_seed(seed),
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn episodic(&self) -> &EpisodicStore {
        &self.episodic
    }

    pub fn semantic(&self) -> &SemanticStore {
        &self.semantic
    }

    /// One uniform draw from the agent's generator, for the harness's
    /// multi-agent random answering.
    pub(crate) fn draw_below(&mut self, n: usize) -> usize {
        self.rng.index_below(n)
    }

    /// Stores one observation per the policy's routing. Capacity-0
    /// rejections are swallowed: a missing memory system drops its
    /// input on the floor.
    pub fn observe(&mut self, obs: MemoryQuadruple) {
        match self.config.kind {
            PolicyKind::H1 | PolicyKind::H4 => {
                let eviction = match self.config.forget_mode {
                    ForgetMode::Handcrafted => EpisodicEviction::Oldest,
                    ForgetMode::Random => EpisodicEviction::Random,
                };
                let _ = self.episodic.add(obs, eviction, &mut self.rng);
            }
            PolicyKind::H2 => {
                let eviction = match self.config.forget_mode {
                    ForgetMode::Handcrafted => SemanticEviction::Weakest,
                    ForgetMode::Random => SemanticEviction::Random,
                };
                let _ = self.semantic.observe(&obs, eviction, &mut self.rng);
            }
            PolicyKind::H3 => match self.config.forget_mode {
                ForgetMode::Handcrafted => {
                    if self.episodic.is_full() {
                        let _ = episodic_compress(&mut self.episodic, &mut self.semantic);
                    }
                    let _ = self.episodic.add(obs, EpisodicEviction::Oldest, &mut self.rng);
                }
                ForgetMode::Random => {
                    let _ = self.episodic.add(obs, EpisodicEviction::Random, &mut self.rng);
                }
            },
        }
    }

    /// Answers from the stores without mutating them; `None` abstains.
    /// Handcrafted mode draws no randomness; random mode draws once
    /// from the agent's generator (unless it holds nothing).
    pub fn answer(&mut self, question: &Question) -> Option<EntityName> {
        match self.config.answer_mode {
            AnswerMode::Random => {
                let total = self.episodic.len() + self.semantic.len();
                if total == 0 {
                    return None;
                }
                let idx = self.rng.index_below(total);
                let tail = if idx < self.episodic.len() {
                    &self.episodic.entries()[idx].tail
                } else {
                    &self
                        .semantic
                        .entries()
                        .nth(idx - self.episodic.len())
                        .expect("index within semantic entries")
                        .tail
                };
                Some(tail.clone())
            }
            AnswerMode::Handcrafted => match self.config.kind {
                PolicyKind::H1 => self.episodic.latest(question).map(|q| q.tail.clone()),
                PolicyKind::H2 => self.semantic.strongest(question).map(|q| q.tail.clone()),
                PolicyKind::H3 | PolicyKind::H4 => self
                    .episodic
                    .latest(question)
                    .map(|q| q.tail.clone())
                    .or_else(|| self.semantic.strongest(question).map(|q| q.tail.clone())),
            },
        }
    }
}
