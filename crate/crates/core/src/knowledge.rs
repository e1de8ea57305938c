//! The commonsense knowledge base: a one-to-one object→location map plus
//! a roster of person names.
//!
//! The KB is loaded once from a small TSV file (a default ships embedded
//! in the binary) and is immutable afterwards. Fact order is the file
//! order and is meaningful: pretraining a semantic store truncates the
//! fact list in that order.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::entity::{EntityName, MemoryQuadruple, Relation};

/// Default KB contents compiled into the library so experiments run
/// without any external files.
const BUILTIN_KB: &str = include_str!("data/commonsense.tsv");

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read KB file {path:?}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("KB line {line_no} is malformed: {line:?}")]
    Malformed { line_no: usize, line: String },
    #[error("duplicate object {0:?} in KB")]
    DuplicateObject(String),
    #[error("duplicate location {0:?} in KB")]
    DuplicateLocation(String),
    #[error("duplicate name {0:?} in KB roster")]
    DuplicateName(String),
    #[error("{0:?} appears as both an object and a location")]
    ObjectLocationCollision(String),
    #[error("name {0:?} is not a single token")]
    BadName(String),
    #[error("KB contains no facts")]
    Empty,
    #[error("unknown object {0:?}")]
    UnknownObject(String),
}

/// An immutable object→location map with a name roster.
///
/// Invariants: object bases unique, location bases unique, the two sets
/// disjoint, at least one fact. Fact and roster order follow the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonsenseKB {
    facts: Vec<(String, String)>,
    name_roster: Vec<String>,
}

impl CommonsenseKB {
    /// The compiled-in default: 10 facts, 10 names.
    pub fn builtin() -> CommonsenseKB {
        Self::parse(BUILTIN_KB).expect("builtin KB is valid")
    }

    /// Loads and validates a KB file.
    pub fn load(path: impl AsRef<Path>) -> Result<CommonsenseKB, KbError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses KB text: fact lines `object<TAB>location`, roster lines
    /// `@name<TAB>PersonName`, `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<CommonsenseKB, KbError> {
        let mut facts: Vec<(String, String)> = Vec::new();
        let mut name_roster: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = || KbError::Malformed {
                line_no: idx + 1,
                line: line.to_string(),
            };
            let (left, right) = line.split_once('\t').ok_or_else(malformed)?;
            if left.is_empty() || right.is_empty() || right.contains('\t') {
                return Err(malformed());
            }
            if left == "@name" {
                let name = right.to_string();
                if name.chars().any(char::is_whitespace) || name.contains("'s") {
                    return Err(KbError::BadName(name));
                }
                if name_roster.contains(&name) {
                    return Err(KbError::DuplicateName(name));
                }
                name_roster.push(name);
            } else {
                let (object, location) = (left.to_string(), right.to_string());
                if facts.iter().any(|(o, _)| *o == object) {
                    return Err(KbError::DuplicateObject(object));
                }
                if facts.iter().any(|(_, l)| *l == location) {
                    return Err(KbError::DuplicateLocation(location));
                }
                facts.push((object, location));
            }
        }
        if facts.is_empty() {
            return Err(KbError::Empty);
        }
        for (object, _) in &facts {
            if facts.iter().any(|(_, l)| l == object) {
                return Err(KbError::ObjectLocationCollision(object.clone()));
            }
        }
        Ok(CommonsenseKB { facts, name_roster })
    }

    /// Facts in file order.
    pub fn facts(&self) -> &[(String, String)] {
        &self.facts
    }

    /// Person names in file order.
    pub fn name_roster(&self) -> &[String] {
        &self.name_roster
    }

    pub fn n_objects(&self) -> usize {
        self.facts.len()
    }

    /// Object base at `index` in file order.
    pub fn object_at(&self, index: usize) -> &str {
        &self.facts[index].0
    }

    /// Location base at `index` in file order. Because the map is
    /// one-to-one, this doubles as the enumeration of location types.
    pub fn location_at(&self, index: usize) -> &str {
        &self.facts[index].1
    }

    /// The unique commonsense location of an object.
    pub fn commonsense_location(&self, object_base: &str) -> Result<&str, KbError> {
        self.facts
            .iter()
            .find(|(o, _)| o == object_base)
            .map(|(_, l)| l.as_str())
            .ok_or_else(|| KbError::UnknownObject(object_base.to_string()))
    }

    /// The first `min(capacity, n_objects)` facts as ownerless semantic
    /// quadruples with strength 1, in file order.
    pub fn pretrain_semantic(&self, capacity: usize) -> Vec<MemoryQuadruple> {
        self.facts
            .iter()
            .take(capacity)
            .map(|(object, location)| {
                MemoryQuadruple::new(
                    EntityName::bare(object.clone()).expect("KB object is a valid base"),
                    Relation::at_location(),
                    EntityName::bare(location.clone()).expect("KB location is a valid base"),
                    1,
                )
            })
            .collect()
    }
}
