//! Owner-qualified entity names and the triple/quadruple value types.
//!
//! An [`EntityName`] is a noun that may be qualified by the single-token
//! name of its owner, rendered as `"James's laptop"`. Episodic memories
//! keep the owner; semantic memories drop it (see
//! [`MemoryQuadruple::generalized`]). The possessive marker is exactly
//! `"'s "`, which keeps parsing unambiguous without any language
//! processing.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// How a textual name or quadruple can fail to parse or validate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntityError {
    #[error("entity base is empty")]
    EmptyBase,
    #[error("entity owner is empty")]
    EmptyOwner,
    #[error("entity owner must be a single token: {0:?}")]
    OwnerNotSingleToken(String),
    #[error("entity base contains a possessive marker: {0:?}")]
    BaseHasPossessive(String),
    #[error("possessive form is missing a base: {0:?}")]
    MissingBase(String),
    #[error("question head must carry an owner")]
    OwnerRequired,
    #[error("quadruple is not in episodic form (owners required on head and tail)")]
    NotEpisodic,
    #[error("malformed quadruple line: {0:?}")]
    BadQuadrupleLine(String),
    #[error("bad meta field in quadruple line: {0:?}")]
    BadMeta(String),
}

/// True if `s` contains the possessive marker `'s` followed by a space
/// or the end of the string.
fn has_possessive_marker(s: &str) -> bool {
    s.contains("'s ") || s.ends_with("'s")
}

/// An optionally owner-qualified noun, e.g. `laptop` or `James's laptop`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityName {
    owner: Option<String>,
    base: String,
}

impl EntityName {
    /// An ownerless name.
    pub fn bare(base: impl Into<String>) -> Result<Self, EntityError> {
        Self::build(None, base.into())
    }

    /// An owner-qualified name.
    pub fn owned(owner: impl Into<String>, base: impl Into<String>) -> Result<Self, EntityError> {
        Self::build(Some(owner.into()), base.into())
    }

    fn build(owner: Option<String>, base: String) -> Result<Self, EntityError> {
        if base.is_empty() {
            return Err(EntityError::EmptyBase);
        }
        if has_possessive_marker(&base) {
            return Err(EntityError::BaseHasPossessive(base));
        }
        if let Some(o) = &owner {
            if o.is_empty() {
                return Err(EntityError::EmptyOwner);
            }
            if o.chars().any(char::is_whitespace) || has_possessive_marker(o) {
                return Err(EntityError::OwnerNotSingleToken(o.clone()));
            }
        }
        Ok(EntityName { owner, base })
    }

    pub fn owner(&self) -> Option<&str> {
        self.owner.as_deref()
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn has_owner(&self) -> bool {
        self.owner.is_some()
    }

    /// The same base with the owner removed. Idempotent.
    pub fn without_owner(&self) -> EntityName {
        EntityName {
            owner: None,
            base: self.base.clone(),
        }
    }
}

impl fmt::Display for EntityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.owner {
            Some(owner) => write!(f, "{}'s {}", owner, self.base),
            None => f.write_str(&self.base),
        }
    }
}

impl FromStr for EntityName {
    type Err = EntityError;

    /// Parses `"<base>"` or `"<owner>'s <base>"`. Round-trips with
    /// [`fmt::Display`].
    fn from_str(text: &str) -> Result<Self, EntityError> {
        if let Some(idx) = text.find("'s ") {
            let owner = &text[..idx];
            let base = &text[idx + 3..];
            if owner.is_empty() {
                return Err(EntityError::EmptyOwner);
            }
            if base.is_empty() {
                return Err(EntityError::MissingBase(text.to_string()));
            }
            Self::build(Some(owner.to_string()), base.to_string())
        } else if text.ends_with("'s") {
            Err(EntityError::MissingBase(text.to_string()))
        } else {
            Self::build(None, text.to_string())
        }
    }
}

/// The predicate of a triple. Only `AtLocation` occurs in this artifact,
/// but the relation travels explicitly so richer ontologies stay
/// representable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation(String);

pub const AT_LOCATION: &str = "AtLocation";

impl Relation {
    pub fn at_location() -> Self {
        Relation(AT_LOCATION.to_string())
    }

    pub fn new(name: impl Into<String>) -> Self {
        Relation(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A stored memory or observation: `(head, relation, tail, meta)`.
///
/// `meta` is the observation timestamp for episodic quadruples and the
/// strength count for semantic quadruples.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemoryQuadruple {
    pub head: EntityName,
    pub relation: Relation,
    pub tail: EntityName,
    pub meta: u64,
}

impl MemoryQuadruple {
    pub fn new(head: EntityName, relation: Relation, tail: EntityName, meta: u64) -> Self {
        MemoryQuadruple {
            head,
            relation,
            tail,
            meta,
        }
    }

    /// Owners present on both head and tail.
    pub fn is_episodic_form(&self) -> bool {
        self.head.has_owner() && self.tail.has_owner()
    }

    /// Owners absent on both head and tail.
    pub fn is_semantic_form(&self) -> bool {
        !self.head.has_owner() && !self.tail.has_owner()
    }

    /// The semantic image of an episodic quadruple: owners stripped from
    /// head and tail, meta reset to a strength of 1.
    ///
    /// Errors if the input is not in episodic form.
    pub fn generalized(&self) -> Result<MemoryQuadruple, EntityError> {
        if !self.is_episodic_form() {
            return Err(EntityError::NotEpisodic);
        }
        Ok(MemoryQuadruple {
            head: self.head.without_owner(),
            relation: self.relation.clone(),
            tail: self.tail.without_owner(),
            meta: 1,
        })
    }

    /// Canonical tab-separated rendering: `head\trelation\ttail\tmeta`.
    /// Used in trace logs, store dumps and the wire protocol.
    pub fn render_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.head, self.relation, self.tail, self.meta)
    }

    /// Parses the canonical tab-separated rendering.
    pub fn parse_line(line: &str) -> Result<Self, EntityError> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(EntityError::BadQuadrupleLine(line.to_string()));
        }
        let head = fields[0].parse()?;
        let relation = Relation::new(fields[1]);
        let tail = fields[2].parse()?;
        let meta = fields[3]
            .parse::<u64>()
            .map_err(|_| EntityError::BadMeta(fields[3].to_string()))?;
        Ok(MemoryQuadruple::new(head, relation, tail, meta))
    }
}

impl fmt::Display for MemoryQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_line())
    }
}

/// A `(head, relation)` pair the agent must resolve to a tail. The head
/// always carries an owner: questions are about a specific person's
/// object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Question {
    head: EntityName,
    relation: Relation,
}

impl Question {
    pub fn new(head: EntityName, relation: Relation) -> Result<Self, EntityError> {
        if !head.has_owner() {
            return Err(EntityError::OwnerRequired);
        }
        Ok(Question { head, relation })
    }

    pub fn head(&self) -> &EntityName {
        &self.head
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.head, self.relation)
    }
}
