//! A small network service exposing the environment over
//! newline-delimited JSON, so agents in any language can run episodes
//! remotely.
//!
//! One request per line, one reply per line. Requests:
//!
//! ```text
//! {"op":"reset","config":{…EnvConfig fields…},"seed":7}
//! {"op":"step","session":"s-1","answer":"James's desk"}
//! {"op":"close","session":"s-1"}
//! ```
//!
//! Observations travel as canonical tab-separated quadruple strings,
//! the question as a `[head, relation]` pair. A missing or null
//! `answer` abstains. Errors are `{"error":<code>}` with code one of
//! `unknown_session`, `malformed`, `episode_done`, `server_full`.
//!
//! Sessions live in a shared table, are locked individually, and
//! expire lazily after an idle timeout.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::entity::EntityName;
use crate::env::{EnvConfig, EnvError, Room, StepOutput};
use crate::knowledge::CommonsenseKB;

/// Service limits; defaults: 64 sessions, 10-minute idle expiry.
#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub max_sessions: usize,
    pub idle_timeout: Duration,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            max_sessions: 64,
            idle_timeout: Duration::from_secs(600),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
enum Request {
    Reset {
        #[serde(default)]
        config: Option<EnvConfig>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Step {
        session: String,
        #[serde(default)]
        answer: Option<String>,
    },
    Close {
        session: String,
    },
}

#[derive(Debug, Serialize)]
struct ResetReply {
    session: String,
    observation: Vec<String>,
    question: (String, String),
}

#[derive(Debug, Serialize)]
struct StepReply {
    reward: u32,
    observation: Vec<String>,
    question: (String, String),
    done: bool,
}

#[derive(Debug, Serialize)]
struct CloseReply {
    closed: bool,
}

#[derive(Debug, Serialize)]
struct ErrorReply {
    error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

fn error_reply(error: &'static str, detail: Option<String>) -> String {
    serde_json::to_string(&ErrorReply { error, detail }).expect("error reply serializes")
}

fn observation_strings(output: &StepOutput) -> Vec<String> {
    output.observations.iter().map(|o| o.render_line()).collect()
}

fn question_pair(output: &StepOutput) -> (String, String) {
    (
        output.question.head().to_string(),
        output.question.relation().to_string(),
    )
}

struct Session {
    room: Room,
    last_used: Instant,
}

/// The shared service state: the KB, limits, and the session table.
pub struct EnvServer {
    kb: CommonsenseKB,
    config: ServeConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl EnvServer {
    pub fn new(kb: CommonsenseKB, config: ServeConfig) -> EnvServer {
        EnvServer {
            kb,
            config,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    /// Handles one protocol line and renders the reply (no trailing
    /// newline). Never panics on client input.
    pub fn handle_line(&self, line: &str) -> String {
        let request: Request = match serde_json::from_str(line) {
            Ok(request) => request,
            Err(e) => return error_reply("malformed", Some(e.to_string())),
        };
        match request {
            Request::Reset { config, seed } => self.handle_reset(config, seed),
            Request::Step { session, answer } => self.handle_step(&session, answer),
            Request::Close { session } => self.handle_close(&session),
        }
    }

    fn handle_reset(&self, config: Option<EnvConfig>, seed: Option<u64>) -> String {
        let mut env = config.unwrap_or_default();
        if let Some(seed) = seed {
            env.seed = seed;
        }
        let (room, output) = match Room::reset(env, &self.kb) {
            Ok(pair) => pair,
            Err(e) => return error_reply("malformed", Some(e.to_string())),
        };
        let mut sessions = self.sessions.lock().expect("session table lock");
        Self::prune_expired(&mut sessions, self.config.idle_timeout);
        if sessions.len() >= self.config.max_sessions {
            return error_reply("server_full", None);
        }
        let id = format!("s-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let reply = ResetReply {
            session: id.clone(),
            observation: observation_strings(&output),
            question: question_pair(&output),
        };
        sessions.insert(
            id,
            Arc::new(Mutex::new(Session {
                room,
                last_used: Instant::now(),
            })),
        );
        serde_json::to_string(&reply).expect("reset reply serializes")
    }

    fn handle_step(&self, session_id: &str, answer: Option<String>) -> String {
        let answer = match answer.as_deref() {
            None => None,
            Some(text) => match text.parse::<EntityName>() {
                Ok(name) => Some(name),
                Err(e) => return error_reply("malformed", Some(e.to_string())),
            },
        };
        let Some(session) = self.lookup(session_id) else {
            return error_reply("unknown_session", None);
        };
        let mut session = session.lock().expect("session lock");
        session.last_used = Instant::now();
        match session.room.step(answer.as_ref()) {
            Ok(result) => serde_json::to_string(&StepReply {
                reward: result.reward,
                observation: observation_strings(&result.output),
                question: question_pair(&result.output),
                done: result.done,
            })
            .expect("step reply serializes"),
            Err(EnvError::EpisodeDone) => error_reply("episode_done", None),
            Err(e) => error_reply("malformed", Some(e.to_string())),
        }
    }

    fn handle_close(&self, session_id: &str) -> String {
        let mut sessions = self.sessions.lock().expect("session table lock");
        Self::prune_expired(&mut sessions, self.config.idle_timeout);
        match sessions.remove(session_id) {
            Some(_) => serde_json::to_string(&CloseReply { closed: true })
                .expect("close reply serializes"),
            None => error_reply("unknown_session", None),
        }
    }

    /// Fetches a live session, expiring idle ones on the way.
    fn lookup(&self, session_id: &str) -> Option<Arc<Mutex<Session>>> {
        let mut sessions = self.sessions.lock().expect("session table lock");
        Self::prune_expired(&mut sessions, self.config.idle_timeout);
        sessions.get(session_id).cloned()
    }

    fn prune_expired(sessions: &mut HashMap<String, Arc<Mutex<Session>>>, timeout: Duration) {
        let now = Instant::now();
        sessions.retain(|_, session| {
            let session = session.lock().expect("session lock");
            now.duration_since(session.last_used) < timeout
        });
    }

    /// Accept loop: one thread per connection, one session table for
    /// all of them. Runs until the listener fails.
    pub fn serve(self: &Arc<Self>, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            let stream = stream?;
            let server = Arc::clone(self);
            std::thread::spawn(move || server.serve_connection(stream));
        }
        Ok(())
    }

    fn serve_connection(&self, stream: TcpStream) {
        // One write per reply and no Nagle batching: with the
        // request/reply ping-pong, coalescing would stall each message
        // on the peer's delayed ACK.
        let _ = stream.set_nodelay(true);
        let Ok(peer) = stream.try_clone() else { return };
        let reader = BufReader::new(stream);
        let mut writer = peer;
        for line in reader.lines() {
            let Ok(line) = line else { return };
            if line.trim().is_empty() {
                continue;
            }
            let mut reply = self.handle_line(&line);
            reply.push('\n');
            if writer.write_all(reply.as_bytes()).is_err() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn server() -> EnvServer {
        EnvServer::new(CommonsenseKB::builtin(), ServeConfig::default())
    }

    fn parse(reply: &str) -> Value {
        serde_json::from_str(reply).unwrap()
    }

    #[test]
    fn reset_then_step_round_trip() {
        let server = server();
        let reply = parse(&server.handle_line(
            r#"{"op":"reset","config":{"max_steps":5,"n_people":3},"seed":7}"#,
        ));
        let session = reply["session"].as_str().unwrap().to_string();
        assert_eq!(reply["observation"].as_array().unwrap().len(), 1);
        let obs = reply["observation"][0].as_str().unwrap();
        assert_eq!(obs.split('\t').count(), 4);
        assert_eq!(reply["question"].as_array().unwrap().len(), 2);
        assert_eq!(reply["question"][1], "AtLocation");

        let step = parse(&server.handle_line(&format!(
            r#"{{"op":"step","session":"{session}","answer":null}}"#
        )));
        assert_eq!(step["reward"], 0);
        assert_eq!(step["done"], false);

        let close = parse(&server.handle_line(&format!(r#"{{"op":"close","session":"{session}"}}"#)));
        assert_eq!(close["closed"], true);
    }

    #[test]
    fn unknown_session_code() {
        let server = server();
        let reply = parse(&server.handle_line(r#"{"op":"step","session":"nonexistent"}"#));
        assert_eq!(reply["error"], "unknown_session");
        let reply = parse(&server.handle_line(r#"{"op":"close","session":"nonexistent"}"#));
        assert_eq!(reply["error"], "unknown_session");
    }

    #[test]
    fn malformed_codes() {
        let server = server();
        assert_eq!(parse(&server.handle_line("not json"))["error"], "malformed");
        assert_eq!(
            parse(&server.handle_line(r#"{"op":"fly"}"#))["error"],
            "malformed"
        );
        assert_eq!(
            parse(&server.handle_line(r#"{"op":"reset","config":{"p_commonsense":2.0}}"#))["error"],
            "malformed"
        );
        let reply = parse(&server.handle_line(r#"{"op":"reset","config":{"max_steps":5}}"#));
        let session = reply["session"].as_str().unwrap();
        assert_eq!(
            parse(&server.handle_line(&format!(
                r#"{{"op":"step","session":"{session}","answer":"'s desk"}}"#
            )))["error"],
            "malformed"
        );
    }

    #[test]
    fn episode_done_code() {
        let server = server();
        let reply = parse(&server.handle_line(r#"{"op":"reset","config":{"max_steps":2},"seed":1}"#));
        let session = reply["session"].as_str().unwrap().to_string();
        let step = |answer: &str| {
            parse(&server.handle_line(&format!(
                r#"{{"op":"step","session":"{session}","answer":{answer}}}"#
            )))
        };
        assert_eq!(step("null")["done"], false);
        assert_eq!(step("null")["done"], true);
        assert_eq!(step("null")["error"], "episode_done");
    }

    #[test]
    fn server_full_code() {
        let server = EnvServer::new(
            CommonsenseKB::builtin(),
            ServeConfig {
                max_sessions: 1,
                ..ServeConfig::default()
            },
        );
        let first = parse(&server.handle_line(r#"{"op":"reset"}"#));
        assert!(first["session"].is_string());
        let second = parse(&server.handle_line(r#"{"op":"reset"}"#));
        assert_eq!(second["error"], "server_full");
    }

    #[test]
    fn idle_sessions_expire() {
        let server = EnvServer::new(
            CommonsenseKB::builtin(),
            ServeConfig {
                idle_timeout: Duration::ZERO,
                ..ServeConfig::default()
            },
        );
        let reply = parse(&server.handle_line(r#"{"op":"reset"}"#));
        let session = reply["session"].as_str().unwrap();
        let step = parse(&server.handle_line(&format!(r#"{{"op":"step","session":"{session}"}}"#)));
        assert_eq!(step["error"], "unknown_session");
    }

    #[test]
    fn rewards_flow_through_grading() {
        // Feed back the observed location when the question matches the
        // person just observed; the reward must be 1 in that case.
        let server = server();
        let reply = parse(&server.handle_line(r#"{"op":"reset","config":{"max_steps":50},"seed":3}"#));
        let session = reply["session"].as_str().unwrap().to_string();
        let mut observation = reply["observation"][0].as_str().unwrap().to_string();
        let mut question_head = reply["question"][0].as_str().unwrap().to_string();
        let mut matched = 0;
        let mut rewarded = 0;
        for _ in 0..50 {
            let fields: Vec<&str> = observation.split('\t').collect();
            let (head, tail) = (fields[0], fields[2]);
            let answer = if head == question_head {
                matched += 1;
                format!("\"{tail}\"")
            } else {
                "null".to_string()
            };
            let step = parse(&server.handle_line(&format!(
                r#"{{"op":"step","session":"{session}","answer":{answer}}}"#
            )));
            if step.get("error").is_some() {
                panic!("unexpected error: {step}");
            }
            if answer != "null" {
                rewarded += step["reward"].as_u64().unwrap();
            }
            if step["done"] == true {
                break;
            }
            observation = step["observation"][0].as_str().unwrap().to_string();
            question_head = step["question"][0].as_str().unwrap().to_string();
        }
        assert!(matched > 0, "no question ever matched the fresh observation");
        assert_eq!(matched, rewarded, "fresh-observation answers must all score");
    }

    #[test]
    fn tcp_round_trip() {
        let server = Arc::new(server());
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        {
            let server = Arc::clone(&server);
            std::thread::spawn(move || {
                let _ = server.serve(listener);
            });
        }
        let stream = TcpStream::connect(addr).unwrap();
        let mut writer = stream.try_clone().unwrap();
        let mut reader = BufReader::new(stream);
        writer
            .write_all(b"{\"op\":\"reset\",\"config\":{\"max_steps\":3},\"seed\":9}\n")
            .unwrap();
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let reply = parse(&line);
        let session = reply["session"].as_str().unwrap();
        writer
            .write_all(format!("{{\"op\":\"step\",\"session\":\"{session}\"}}\n").as_bytes())
            .unwrap();
        line.clear();
        reader.read_line(&mut line).unwrap();
        assert_eq!(parse(&line)["reward"], 0);
    }
}
