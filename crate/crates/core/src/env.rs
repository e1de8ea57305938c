//! The Room simulator: hidden per-person state, the four stochastic
//! dynamics, per-step observation/question emission and answer grading.
//!
//! # Draw order
//!
//! Reproducibility across implementations requires a fixed RNG draw
//! order. All draws come from one per-episode [`Rng`](crate::rng::Rng)
//! seeded with `EnvConfig::seed`, consumed exactly as follows.
//!
//! On reset, for each person in position order: one uniform object
//! index; one Bernoulli(p_commonsense); if it came up false, one uniform
//! index over the other locations. Then one uniform person index for the
//! first question.
//!
//! On step, after grading (which draws nothing): for each person in
//! position order, one Bernoulli(p_new_object); if true, one uniform
//! index over the other objects followed by the placement draws as on
//! reset; if false, one Bernoulli(p_new_location); if that is true, the
//! placement draws follow. Then, when n_people ≥ 2, one
//! Bernoulli(p_switch_person); if true, one uniform position and one
//! uniform other position, and the two people swap positions. (With a
//! single person the switch draw is skipped entirely.) Finally one
//! uniform person index for the next question. Observations draw
//! nothing.
//!
//! # Observation schedule
//!
//! Agent `i` observes the person at position
//! `(direction_i * step + offset_i) mod n_people`, where even-indexed
//! agents walk forward (`direction +1`, offset `i/2`) and odd-indexed
//! agents walk backward (`direction -1`, offset `n_people - 1 - i/2`).
//! A single agent therefore scans positions 0, 1, 2, ... and a second
//! agent scans the ring in the opposite direction.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entity::{EntityName, MemoryQuadruple, Question, Relation};
use crate::knowledge::CommonsenseKB;
use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("{0} must be positive")]
    ZeroField(&'static str),
    #[error("{name} must be a probability in [0, 1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("n_people={n_people} exceeds the KB roster of {roster} names")]
    RosterTooSmall { n_people: usize, roster: usize },
    #[error("n_objects={n_objects} exceeds the KB's {kb} facts")]
    KbTooSmall { n_objects: usize, kb: usize },
    #[error("n_objects < 2 requires p_commonsense = 1 and p_new_object = 0 (no alternative locations exist)")]
    NoAlternativeLocations,
    #[error("step called after the episode finished")]
    EpisodeDone,
    #[error("cannot read config file {path:?}: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },
    #[error("bad config JSON: {0}")]
    ConfigJson(#[from] serde_json::Error),
    #[error("config line {line_no} is not key=value: {line:?}")]
    ConfigLine { line_no: usize, line: String },
    #[error("unknown config key {0:?}")]
    UnknownConfigKey(String),
    #[error("bad value {value:?} for config key {key:?}")]
    BadConfigValue { key: String, value: String },
}

/// Episode parameters. Defaults reproduce the experiment setting:
/// 10 people, 10 objects, probabilities 0.7/0.1/0.1/0.5, 1,000 steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub n_people: usize,
    pub n_objects: usize,
    pub n_agents: usize,
    pub p_commonsense: f64,
    pub p_new_location: f64,
    pub p_new_object: f64,
    pub p_switch_person: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            n_people: 10,
            n_objects: 10,
            n_agents: 1,
            p_commonsense: 0.7,
            p_new_location: 0.1,
            p_new_object: 0.1,
            p_switch_person: 0.5,
            max_steps: 1000,
            seed: 0,
        }
    }
}

impl EnvConfig {
    /// Checks field ranges and that the KB can supply enough objects and
    /// names.
    pub fn validate(&self, kb: &CommonsenseKB) -> Result<(), EnvError> {
        for (name, value) in [
            ("n_people", self.n_people),
            ("n_objects", self.n_objects),
            ("n_agents", self.n_agents),
        ] {
            if value == 0 {
                return Err(EnvError::ZeroField(name));
            }
        }
        if self.max_steps == 0 {
            return Err(EnvError::ZeroField("max_steps"));
        }
        for (name, value) in [
            ("p_commonsense", self.p_commonsense),
            ("p_new_location", self.p_new_location),
            ("p_new_object", self.p_new_object),
            ("p_switch_person", self.p_switch_person),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EnvError::BadProbability { name, value });
            }
        }
        if self.n_people > kb.name_roster().len() {
            return Err(EnvError::RosterTooSmall {
                n_people: self.n_people,
                roster: kb.name_roster().len(),
            });
        }
        if self.n_objects > kb.n_objects() {
            return Err(EnvError::KbTooSmall {
                n_objects: self.n_objects,
                kb: kb.n_objects(),
            });
        }
        if self.n_objects < 2 && (self.p_commonsense < 1.0 || self.p_new_object > 0.0) {
            return Err(EnvError::NoAlternativeLocations);
        }
        Ok(())
    }

    /// Loads a config file: a flat JSON object, or `key=value` lines
    /// with `#` comments. Missing keys keep their defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<EnvConfig, EnvError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EnvError::ConfigIo {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(&text)?)
        } else {
            let mut config = EnvConfig::default();
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| EnvError::ConfigLine {
                    line_no: idx + 1,
                    line: line.to_string(),
                })?;
                config.set_field(key.trim(), value.trim())?;
            }
            Ok(config)
        }
    }

    /// Sets one field from its textual form. Shared by the `key=value`
    /// config format and CLI overrides.
    pub fn set_field(&mut self, key: &str, value: &str) -> Result<(), EnvError> {
        let bad = || EnvError::BadConfigValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "n_people" => self.n_people = value.parse().map_err(|_| bad())?,
            "n_objects" => self.n_objects = value.parse().map_err(|_| bad())?,
            "n_agents" => self.n_agents = value.parse().map_err(|_| bad())?,
            "p_commonsense" => self.p_commonsense = value.parse().map_err(|_| bad())?,
            "p_new_location" => self.p_new_location = value.parse().map_err(|_| bad())?,
            "p_new_object" => self.p_new_object = value.parse().map_err(|_| bad())?,
            "p_switch_person" => self.p_switch_person = value.parse().map_err(|_| bad())?,
            "max_steps" => self.max_steps = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            _ => return Err(EnvError::UnknownConfigKey(key.to_string())),
        }
        Ok(())
    }
}

/// One person's externally visible state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonState {
    pub name: String,
    pub object_base: String,
    pub location_base: String,
    pub at_commonsense: bool,
}

/// Internal person record. Object and location are indices into the
/// KB's fact list; commonsense placement is `location == object`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Person {
    name: String,
    object: usize,
    location: usize,
}

/// What the environment emits each step: one observation per agent plus
/// the shared question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutput {
    pub observations: Vec<MemoryQuadruple>,
    pub question: Question,
}

/// Counts of dynamics events in one step, for diagnostics and
/// Monte-Carlo checks. `placements` counts people whose object was
/// re-placed this step (whether or not the location value changed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DynamicsStats {
    pub placements: u32,
    pub switched: bool,
}

/// The result of advancing one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub reward: u32,
    pub output: StepOutput,
    pub done: bool,
    pub stats: DynamicsStats,
}

/// The Room: people in a ring, a step counter and a pending question.
/// Strictly sequential within an episode; independent episodes may run
/// in parallel, each owning its generator.
#[derive(Debug, Clone)]
pub struct Room {
    config: EnvConfig,
    kb: CommonsenseKB,
    people: Vec<Person>,
    step: u64,
    rng: Rng,
    pending: Question,
    done: bool,
}

impl Room {
    /// Builds the initial hidden state and emits the first observations
    /// and question.
    pub fn reset(config: EnvConfig, kb: &CommonsenseKB) -> Result<(Room, StepOutput), EnvError> {
        config.validate(kb)?;
        let mut rng = Rng::from_seed(config.seed);
        let mut people = Vec::with_capacity(config.n_people);
        for position in 0..config.n_people {
            let object = rng.index_below(config.n_objects);
            let location = Self::place(&mut rng, &config, object);
            people.push(Person {
                name: kb.name_roster()[position].clone(),
                object,
                location,
            });
        }
        let pending = Self::draw_question(&mut rng, &people, kb, config.n_people);
        let room = Room {
            config,
            kb: kb.clone(),
            people,
            step: 0,
            rng,
            pending,
            done: false,
        };
        let output = room.emit_output();
        Ok((room, output))
    }

    /// One placement draw: commonsense location with probability
    /// p_commonsense, else uniform over the other location types.
    fn place(rng: &mut Rng, config: &EnvConfig, object: usize) -> usize {
        if rng.bernoulli(config.p_commonsense) {
            object
        } else {
            rng.index_below_excluding(config.n_objects, object)
        }
    }

    fn draw_question(
        rng: &mut Rng,
        people: &[Person],
        kb: &CommonsenseKB,
        n_people: usize,
    ) -> Question {
        let person = &people[rng.index_below(n_people)];
        let head = EntityName::owned(person.name.clone(), kb.object_at(person.object))
            .expect("person name and object are valid");
        Question::new(head, Relation::at_location()).expect("question head has an owner")
    }

    /// The position agent `agent` observes at step `step`.
    fn observed_position(&self, agent: usize, step: u64) -> usize {
        let n = self.config.n_people as i64;
        let (direction, offset) = if agent.is_multiple_of(2) {
            (1i64, (agent / 2) as i64)
        } else {
            (-1i64, n - 1 - (agent / 2) as i64)
        };
        let t = (step % self.config.n_people as u64) as i64;
        (direction * t + offset).rem_euclid(n) as usize
    }

    /// Renders the current observations (no RNG) plus the pending
    /// question.
    fn emit_output(&self) -> StepOutput {
        let observations = (0..self.config.n_agents)
            .map(|agent| {
                let person = &self.people[self.observed_position(agent, self.step)];
                let head = EntityName::owned(person.name.clone(), self.kb.object_at(person.object))
                    .expect("person name and object are valid");
                let tail = EntityName::owned(
                    person.name.clone(),
                    self.kb.location_at(person.location),
                )
                .expect("person name and location are valid");
                MemoryQuadruple::new(head, Relation::at_location(), tail, self.step)
            })
            .collect();
        StepOutput {
            observations,
            question: self.pending.clone(),
        }
    }

    /// Grades `answer` against the current pending question: 1 iff the
    /// answer's base matches the queried person's true location and any
    /// owner on the answer names that person. `None` is an abstention.
    pub fn grade_answer(&self, answer: Option<&EntityName>) -> u32 {
        let Some(answer) = answer else { return 0 };
        let asked = self
            .pending
            .head()
            .owner()
            .expect("question heads always carry an owner");
        if let Some(owner) = answer.owner() {
            if owner != asked {
                return 0;
            }
        }
        let person = self
            .people
            .iter()
            .find(|p| p.name == asked)
            .expect("question names an existing person");
        if answer.base() == self.kb.location_at(person.location) {
            1
        } else {
            0
        }
    }

    /// Grades the pending answer, applies the dynamics, advances the
    /// step counter and emits the next observations and question.
    pub fn step(&mut self, answer: Option<&EntityName>) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let reward = self.grade_answer(answer);
        let stats = self.apply_dynamics();
        self.step += 1;
        self.done = self.step == self.config.max_steps;
        self.pending =
            Self::draw_question(&mut self.rng, &self.people, &self.kb, self.config.n_people);
        let output = self.emit_output();
        Ok(StepResult {
            reward,
            output,
            done: self.done,
            stats,
        })
    }

    /// Per-person object/location dynamics followed by the position
    /// switch, in the documented draw order.
    fn apply_dynamics(&mut self) -> DynamicsStats {
        let mut stats = DynamicsStats::default();
        let config = self.config.clone();
        for person in &mut self.people {
            if self.rng.bernoulli(config.p_new_object) {
                person.object = self
                    .rng
                    .index_below_excluding(config.n_objects, person.object);
                person.location = Self::place(&mut self.rng, &config, person.object);
                stats.placements += 1;
            } else if self.rng.bernoulli(config.p_new_location) {
                person.location = Self::place(&mut self.rng, &config, person.object);
                stats.placements += 1;
            }
        }
        if config.n_people >= 2 && self.rng.bernoulli(config.p_switch_person) {
            let a = self.rng.index_below(config.n_people);
            let b = self.rng.index_below_excluding(config.n_people, a);
            self.people.swap(a, b);
            stats.switched = true;
        }
        stats
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// Externally visible person states in position order.
    pub fn people(&self) -> Vec<PersonState> {
        self.people
            .iter()
            .map(|p| PersonState {
                name: p.name.clone(),
                object_base: self.kb.object_at(p.object).to_string(),
                location_base: self.kb.location_at(p.location).to_string(),
                at_commonsense: p.location == p.object,
            })
            .collect()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// The pending question awaiting an answer on the next step call.
    pub fn question(&self) -> &Question {
        &self.pending
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}
