//! Python bindings for the room simulator: the environment, the
//! bounded-memory agents, and the experiment presets.
//!
//! Observations cross the boundary as `(head, relation, tail, step)`
//! string tuples and questions as `(head, relation)` pairs, so Python
//! callers work with plain data. Build with `cargo build -p room-py`
//! and load the resulting `cdylib` as the module `room_py`.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use room_core::{
    dump_stores, preset, run_experiment, write_summary, Agent as CoreAgent, CellSummary,
    CommonsenseKB, EntityName, EnvConfig, MemoryQuadruple, PolicyConfig, Question, Relation,
    Room as CoreRoom, StepOutput,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kb() -> CommonsenseKB {
    CommonsenseKB::builtin()
}

fn policy_config(
    policy: &str,
    capacity: usize,
    forget: &str,
    answer: &str,
) -> PyResult<PolicyConfig> {
    Ok(PolicyConfig {
        kind: policy.parse().map_err(value_err)?,
        total_capacity: capacity,
        forget_mode: forget.parse().map_err(value_err)?,
        answer_mode: answer.parse().map_err(value_err)?,
    })
}

fn to_observation(obs: &MemoryQuadruple) -> (String, String, String, u64) {
    (
        obs.head.to_string(),
        obs.relation.to_string(),
        obs.tail.to_string(),
        obs.meta,
    )
}

fn parse_question(question: (String, String)) -> PyResult<Question> {
    Question::new(
        question.0.parse::<EntityName>().map_err(value_err)?,
        Relation::new(question.1),
    )
    .map_err(value_err)
}

/// Episode parameters; omitted fields keep the defaults.
#[pyclass(module = "room_py", from_py_object)]
#[derive(Clone)]
struct Config {
    inner: EnvConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (*, n_people=None, n_objects=None, n_agents=None, p_commonsense=None,
                        p_new_location=None, p_new_object=None, p_switch_person=None,
                        max_steps=None, seed=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_people: Option<usize>,
        n_objects: Option<usize>,
        n_agents: Option<usize>,
        p_commonsense: Option<f64>,
        p_new_location: Option<f64>,
        p_new_object: Option<f64>,
        p_switch_person: Option<f64>,
        max_steps: Option<u64>,
        seed: Option<u64>,
    ) -> PyResult<Config> {
        let mut inner = EnvConfig::default();
        if let Some(v) = n_people {
            inner.n_people = v;
        }
        if let Some(v) = n_objects {
            inner.n_objects = v;
        }
        if let Some(v) = n_agents {
            inner.n_agents = v;
        }
        if let Some(v) = p_commonsense {
            inner.p_commonsense = v;
        }
        if let Some(v) = p_new_location {
            inner.p_new_location = v;
        }
        if let Some(v) = p_new_object {
            inner.p_new_object = v;
        }
        if let Some(v) = p_switch_person {
            inner.p_switch_person = v;
        }
        if let Some(v) = max_steps {
            inner.max_steps = v;
        }
        if let Some(v) = seed {
            inner.seed = v;
        }
        inner.validate(&kb()).map_err(value_err)?;
        Ok(Config { inner })
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Config(n_people={}, n_objects={}, n_agents={}, p_commonsense={}, \
             p_new_location={}, p_new_object={}, p_switch_person={}, max_steps={}, seed={})",
            c.n_people,
            c.n_objects,
            c.n_agents,
            c.p_commonsense,
            c.p_new_location,
            c.p_new_object,
            c.p_switch_person,
            c.max_steps,
            c.seed
        )
    }
}

/// The environment: construction resets it, `step` advances it.
#[pyclass(module = "room_py")]
struct Room {
    inner: CoreRoom,
    output: StepOutput,
}

#[pymethods]
impl Room {
    #[new]
    #[pyo3(signature = (config=None))]
    fn new(config: Option<Config>) -> PyResult<Room> {
        let config = config.map_or_else(EnvConfig::default, |c| c.inner);
        let (inner, output) = CoreRoom::reset(config, &kb()).map_err(value_err)?;
        Ok(Room { inner, output })
    }

    /// Per-agent observations for this step, as (head, relation, tail, step).
    #[getter]
    fn observations(&self) -> Vec<(String, String, String, u64)> {
        self.output.observations.iter().map(to_observation).collect()
    }

    /// The pending question, as (head, relation).
    #[getter]
    fn question(&self) -> (String, String) {
        let q = &self.output.question;
        (q.head().to_string(), q.relation().to_string())
    }

    #[getter]
    fn step_count(&self) -> u64 {
        self.inner.step_count()
    }

    #[getter]
    fn done(&self) -> bool {
        self.inner.is_done()
    }

    /// Everyone's state: (name, object, location, at_commonsense).
    fn people(&self) -> Vec<(String, String, String, bool)> {
        self.inner
            .people()
            .into_iter()
            .map(|p| (p.name, p.object_base, p.location_base, p.at_commonsense))
            .collect()
    }

    /// Grades `answer` (None abstains), advances the world, and returns
    /// `(reward, done)`; the next observations/question replace ours.
    #[pyo3(signature = (answer=None))]
    fn step(&mut self, answer: Option<&str>) -> PyResult<(u32, bool)> {
        let parsed = answer
            .map(str::parse::<EntityName>)
            .transpose()
            .map_err(value_err)?;
        let result = self.inner.step(parsed.as_ref()).map_err(value_err)?;
        self.output = result.output;
        Ok((result.reward, result.done))
    }
}

/// One bounded-memory agent with a fixed policy.
#[pyclass(module = "room_py")]
struct Agent {
    inner: CoreAgent,
}

#[pymethods]
impl Agent {
    #[new]
    #[pyo3(signature = (policy, capacity, seed=0, *, forget="handcrafted", answer="handcrafted"))]
    fn new(policy: &str, capacity: usize, seed: u64, forget: &str, answer: &str) -> PyResult<Agent> {
        let config = policy_config(policy, capacity, forget, answer)?;
        Ok(Agent {
            inner: CoreAgent::new(config, &kb(), seed).map_err(value_err)?,
        })
    }

    /// Ingests one (head, relation, tail, step) observation.
    fn observe(&mut self, observation: (String, String, String, u64)) -> PyResult<()> {
        let (head, relation, tail, meta) = observation;
        self.inner.observe(MemoryQuadruple::new(
            head.parse().map_err(value_err)?,
            Relation::new(relation),
            tail.parse().map_err(value_err)?,
            meta,
        ));
        Ok(())
    }

    /// Answers a (head, relation) question; None abstains.
    fn answer(&mut self, question: (String, String)) -> PyResult<Option<String>> {
        let question = parse_question(question)?;
        Ok(self.inner.answer(&question).map(|tail| tail.to_string()))
    }

    /// Both stores' contents, one rendered entry per line.
    fn dump(&self) -> String {
        dump_stores(self.inner.episodic(), self.inner.semantic())
    }
}

/// One finished episode.
#[pyclass(module = "room_py")]
struct Episode {
    #[pyo3(get)]
    total_reward: u64,
    #[pyo3(get)]
    rewards: Vec<u8>,
    #[pyo3(get)]
    seed: u64,
}

#[pymethods]
impl Episode {
    fn __repr__(&self) -> String {
        format!(
            "Episode(total_reward={}, steps={}, seed={})",
            self.total_reward,
            self.rewards.len(),
            self.seed
        )
    }
}

/// One experiment cell's aggregate.
#[pyclass(module = "room_py")]
struct Summary {
    #[pyo3(get)]
    policy: String,
    #[pyo3(get)]
    forget_mode: String,
    #[pyo3(get)]
    answer_mode: String,
    #[pyo3(get)]
    capacity: usize,
    #[pyo3(get)]
    n_agents: usize,
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    std: f64,
    #[pyo3(get)]
    n: usize,
}

impl From<CellSummary> for Summary {
    fn from(s: CellSummary) -> Summary {
        Summary {
            policy: s.policy,
            forget_mode: s.forget_mode,
            answer_mode: s.answer_mode,
            capacity: s.capacity,
            n_agents: s.n_agents,
            mean: s.mean,
            std: s.std,
            n: s.n,
        }
    }
}

#[pymethods]
impl Summary {
    fn __repr__(&self) -> String {
        format!(
            "Summary(policy={:?}, forget_mode={:?}, answer_mode={:?}, capacity={}, \
             n_agents={}, mean={:.2}, std={:.2}, n={})",
            self.policy,
            self.forget_mode,
            self.answer_mode,
            self.capacity,
            self.n_agents,
            self.mean,
            self.std,
            self.n
        )
    }
}

/// Runs one full episode and returns its rewards.
#[pyfunction]
#[pyo3(signature = (policy, capacity, seed=0, *, agents=1, forget="handcrafted",
                    answer="handcrafted", config=None))]
fn run_episode(
    policy: &str,
    capacity: usize,
    seed: u64,
    agents: usize,
    forget: &str,
    answer: &str,
    config: Option<Config>,
) -> PyResult<Episode> {
    let env = config.map_or_else(EnvConfig::default, |c| c.inner);
    let policy = policy_config(policy, capacity, forget, answer)?;
    let result = room_core::run_episode(&env, policy, agents, seed, &kb()).map_err(value_err)?;
    Ok(Episode {
        total_reward: result.total_reward,
        rewards: result.reward_trace,
        seed,
    })
}

/// Runs a named preset (fig1, fig2 or fig3) over seeds 0..n_seeds,
/// optionally writing the per-episode CSV and the summary JSON.
#[pyfunction]
#[pyo3(signature = (name, n_seeds=10, *, out=None, summary_out=None))]
fn run_preset(
    name: &str,
    n_seeds: u64,
    out: Option<PathBuf>,
    summary_out: Option<PathBuf>,
) -> PyResult<Vec<Summary>> {
    let mut spec = preset(name, n_seeds).map_err(value_err)?;
    spec.output = out;
    let result = run_experiment(&spec, &kb()).map_err(value_err)?;
    if let Some(path) = summary_out {
        write_summary(&result.summaries, path).map_err(value_err)?;
    }
    Ok(result.summaries.into_iter().map(Summary::from).collect())
}

/// The built-in commonsense facts as (object, location) pairs.
#[pyfunction]
fn kb_facts() -> Vec<(String, String)> {
    kb().facts().to_vec()
}

/// The built-in name roster.
#[pyfunction]
fn kb_names() -> Vec<String> {
    kb().name_roster().to_vec()
}

#[pymodule]
fn room_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Room>()?;
    m.add_class::<Agent>()?;
    m.add_class::<Episode>()?;
    m.add_class::<Summary>()?;
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(kb_facts, m)?)?;
    m.add_function(wrap_pyfunction!(kb_names, m)?)?;
    Ok(())
}
