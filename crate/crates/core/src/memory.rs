//! Bounded episodic and semantic stores: eviction, retrieval,
//! strengthening and compression.
//!
//! An episodic entry keeps its owners and carries the observation
//! timestamp in `meta`; a semantic entry is ownerless and carries a
//! strength count in `meta`. A store with capacity 0 models an agent
//! that lacks that memory system: insertions are rejected with
//! [`MemoryError::NoCapacity`] and the policy layer treats the store as
//! permanently empty.

use thiserror::Error;

use crate::entity::{MemoryQuadruple, Question};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemoryError {
    #[error("store has no capacity")]
    NoCapacity,
    #[error("store is frozen")]
    Frozen,
    #[error("expected an episodic-form quadruple (owners on head and tail)")]
    NotEpisodicForm,
    #[error("expected a semantic-form quadruple (no owners)")]
    NotSemanticForm,
    #[error("semantic strength must be at least 1")]
    ZeroStrength,
    #[error("duplicate semantic fact {0:?}")]
    DuplicateFact(String),
    #[error("{entries} entries exceed capacity {capacity}")]
    OverCapacity { entries: usize, capacity: usize },
}

/// Which episodic entry to drop when the store is full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodicEviction {
    /// Minimum timestamp; ties by earliest insertion.
    Oldest,
    /// Uniformly random entry.
    Random,
}

/// Which semantic entry to drop when the store is full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemanticEviction {
    /// Minimum strength; ties by least recently touched.
    Weakest,
    /// Uniformly random entry.
    Random,
}

/// A bounded list of episodic (owner-qualified, timestamped) memories
/// in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodicStore {
    capacity: usize,
    entries: Vec<MemoryQuadruple>,
}

impl EpisodicStore {
    pub fn new(capacity: usize) -> EpisodicStore {
        EpisodicStore {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when no further entry fits without eviction. A capacity-0
    /// store is always full.
    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[MemoryQuadruple] {
        &self.entries
    }

    /// Inserts `q`, first evicting one entry per `eviction` if the
    /// store is full. Returns the evictee.
    pub fn add(
        &mut self,
        q: MemoryQuadruple,
        eviction: EpisodicEviction,
        rng: &mut Rng,
    ) -> Result<Option<MemoryQuadruple>, MemoryError> {
        if !q.is_episodic_form() {
            return Err(MemoryError::NotEpisodicForm);
        }
        if self.capacity == 0 {
            return Err(MemoryError::NoCapacity);
        }
        let evicted = if self.is_full() {
            let idx = match eviction {
                EpisodicEviction::Oldest => self.oldest_index().expect("full store is non-empty"),
                EpisodicEviction::Random => rng.index_below(self.entries.len()),
            };
            Some(self.entries.remove(idx))
        } else {
            None
        };
        self.entries.push(q);
        Ok(evicted)
    }

    /// Index of the minimum-timestamp entry (earliest-inserted on ties).
    fn oldest_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (idx, entry) in self.entries.iter().enumerate() {
            match best {
                Some(b) if self.entries[b].meta <= entry.meta => {}
                _ => best = Some(idx),
            }
        }
        best
    }

    /// Removes and returns the oldest entry, if any.
    pub fn evict_oldest(&mut self) -> Option<MemoryQuadruple> {
        self.oldest_index().map(|idx| self.entries.remove(idx))
    }

    /// The maximum-timestamp entry whose head equals the question head
    /// (owner included); later-inserted entries win timestamp ties.
    pub fn latest(&self, question: &Question) -> Option<&MemoryQuadruple> {
        let mut best: Option<&MemoryQuadruple> = None;
        for entry in &self.entries {
            if entry.head != *question.head() {
                continue;
            }
            if best.is_none_or(|b| entry.meta >= b.meta) {
                best = Some(entry);
            }
        }
        best
    }
}

/// One semantic fact plus its touch stamp; `touched` orders eviction
/// and retrieval tie-breaks by recency of insertion or strengthening.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SemanticEntry {
    quad: MemoryQuadruple,
    touched: u64,
}

/// A bounded set of ownerless facts, unique per (head, tail), each with
/// a strength count in `meta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticStore {
    capacity: usize,
    entries: Vec<SemanticEntry>,
    frozen: bool,
    clock: u64,
}

impl SemanticStore {
    pub fn new(capacity: usize) -> SemanticStore {
        SemanticStore {
            capacity,
            entries: Vec::with_capacity(capacity),
            frozen: false,
            clock: 0,
        }
    }

    /// A store pre-populated with semantic-form entries, touched in
    /// list order. `frozen` makes every later mutation fail, which is
    /// how a pretrained store stays pristine.
    pub fn with_entries(
        capacity: usize,
        entries: Vec<MemoryQuadruple>,
        frozen: bool,
    ) -> Result<SemanticStore, MemoryError> {
        if entries.len() > capacity {
            return Err(MemoryError::OverCapacity {
                entries: entries.len(),
                capacity,
            });
        }
        let mut store = SemanticStore::new(capacity);
        for quad in entries {
            if !quad.is_semantic_form() {
                return Err(MemoryError::NotSemanticForm);
            }
            if quad.meta == 0 {
                return Err(MemoryError::ZeroStrength);
            }
            if store.position_of(&quad).is_some() {
                return Err(MemoryError::DuplicateFact(quad.render_line()));
            }
            let touched = store.tick();
            store.entries.push(SemanticEntry { quad, touched });
        }
        store.frozen = frozen;
        Ok(store)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Facts in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = &MemoryQuadruple> {
        self.entries.iter().map(|e| &e.quad)
    }

    fn tick(&mut self) -> u64 {
        let now = self.clock;
        self.clock += 1;
        now
    }

    fn position_of(&self, g: &MemoryQuadruple) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.quad.head == g.head && e.quad.tail == g.tail)
    }

    /// Ingests an episodic observation: generalizes it, strengthens the
    /// matching fact or inserts a fresh strength-1 fact, evicting one
    /// entry per `eviction` if the store is full. Returns the evictee.
    pub fn observe(
        &mut self,
        q: &MemoryQuadruple,
        eviction: SemanticEviction,
        rng: &mut Rng,
    ) -> Result<Option<MemoryQuadruple>, MemoryError> {
        if self.frozen {
            return Err(MemoryError::Frozen);
        }
        if self.capacity == 0 {
            return Err(MemoryError::NoCapacity);
        }
        let g = q.generalized().map_err(|_| MemoryError::NotEpisodicForm)?;
        if let Some(idx) = self.position_of(&g) {
            self.entries[idx].quad.meta += 1;
            self.entries[idx].touched = self.tick();
            return Ok(None);
        }
        let evicted = if self.is_full() {
            let idx = match eviction {
                SemanticEviction::Weakest => {
                    self.weakest_index().expect("full store is non-empty")
                }
                SemanticEviction::Random => rng.index_below(self.entries.len()),
            };
            Some(self.entries.remove(idx).quad)
        } else {
            None
        };
        let touched = self.tick();
        self.entries.push(SemanticEntry { quad: g, touched });
        Ok(evicted)
    }

    /// Index of the minimum-strength entry, ties by least recently
    /// touched.
    fn weakest_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (idx, entry) in self.entries.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => {
                    let cur = &self.entries[b];
                    entry.quad.meta < cur.quad.meta
                        || (entry.quad.meta == cur.quad.meta && entry.touched < cur.touched)
                }
            };
            if better {
                best = Some(idx);
            }
        }
        best
    }

    /// The maximum-strength fact whose head matches the question head's
    /// base; ties by most recently touched. The tail is ownerless.
    pub fn strongest(&self, question: &Question) -> Option<&MemoryQuadruple> {
        let base = question.head().base();
        let mut best: Option<&SemanticEntry> = None;
        for entry in &self.entries {
            if entry.quad.head.base() != base {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    entry.quad.meta > b.quad.meta
                        || (entry.quad.meta == b.quad.meta && entry.touched > b.touched)
                }
            };
            if better {
                best = Some(entry);
            }
        }
        best.map(|e| &e.quad)
    }

    /// Adds `strength` to the fact matching `g`, inserting it if
    /// absent; evicts the weakest entry first when an insert finds the
    /// store full. Compression's merge step.
    fn merge(&mut self, g: MemoryQuadruple, strength: u64) -> Result<(), MemoryError> {
        if self.frozen {
            return Err(MemoryError::Frozen);
        }
        if self.capacity == 0 {
            return Err(MemoryError::NoCapacity);
        }
        if let Some(idx) = self.position_of(&g) {
            self.entries[idx].quad.meta += strength;
            self.entries[idx].touched = self.tick();
            return Ok(());
        }
        if self.is_full() {
            let idx = self.weakest_index().expect("full store is non-empty");
            self.entries.remove(idx);
        }
        let touched = self.tick();
        self.entries.push(SemanticEntry {
            quad: MemoryQuadruple { meta: strength, ..g },
            touched,
        });
        Ok(())
    }
}

/// Compresses the largest group (size ≥ 2) of episodic entries sharing
/// a generalize-image into one semantic fact whose strength grows by
/// the group size. Group ties go to the group holding the oldest entry.
/// With nothing compressible, evicts the oldest episodic entry instead
/// and returns false.
pub fn episodic_compress(
    epi: &mut EpisodicStore,
    sem: &mut SemanticStore,
) -> Result<bool, MemoryError> {
    if sem.is_frozen() {
        return Err(MemoryError::Frozen);
    }
    struct Group {
        image: MemoryQuadruple,
        indices: Vec<usize>,
        oldest: u64,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (idx, entry) in epi.entries.iter().enumerate() {
        let image = entry
            .generalized()
            .map_err(|_| MemoryError::NotEpisodicForm)?;
        match groups
            .iter_mut()
            .find(|g| g.image.head == image.head && g.image.tail == image.tail)
        {
            Some(group) => {
                group.indices.push(idx);
                group.oldest = group.oldest.min(entry.meta);
            }
            None => groups.push(Group {
                image,
                indices: vec![idx],
                oldest: entry.meta,
            }),
        }
    }
    let mut best: Option<&Group> = None;
    for group in &groups {
        if group.indices.len() < 2 {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                group.indices.len() > b.indices.len()
                    || (group.indices.len() == b.indices.len() && group.oldest < b.oldest)
            }
        };
        if better {
            best = Some(group);
        }
    }
    let Some(group) = best else {
        epi.evict_oldest();
        return Ok(false);
    };
    let strength = group.indices.len() as u64;
    let image = group.image.clone();
    for &idx in group.indices.iter().rev() {
        epi.entries.remove(idx);
    }
    sem.merge(image, strength)?;
    Ok(true)
}

/// Renders both stores as canonical quadruple lines, episodic section
/// first, for snapshot comparisons.
pub fn dump_stores(epi: &EpisodicStore, sem: &SemanticStore) -> String {
    let mut out = String::from("# episodic\n");
    for entry in epi.entries() {
        out.push_str(&entry.render_line());
        out.push('\n');
    }
    out.push_str("# semantic\n");
    for entry in sem.entries() {
        out.push_str(&entry.render_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::{EntityName, Relation};

    fn epi_quad(owner: &str, object: &str, location: &str, t: u64) -> MemoryQuadruple {
        MemoryQuadruple::new(
            EntityName::owned(owner, object).unwrap(),
            Relation::at_location(),
            EntityName::owned(owner, location).unwrap(),
            t,
        )
    }

    fn question(owner: &str, object: &str) -> Question {
        Question::new(
            EntityName::owned(owner, object).unwrap(),
            Relation::at_location(),
        )
        .unwrap()
    }

    #[test]
    fn oldest_eviction_removes_minimum_timestamp() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(3);
        for t in 1..=3 {
            store
                .add(epi_quad("James", "laptop", "desk", t), EpisodicEviction::Oldest, &mut rng)
                .unwrap();
        }
        let evicted = store
            .add(epi_quad("Karen", "cat", "lap", 4), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        assert_eq!(evicted.unwrap().meta, 1);
        assert_eq!(store.len(), 3);
    }

    #[test]
    fn below_capacity_never_evicts() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(3);
        let evicted = store
            .add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        assert!(evicted.is_none());
    }

    #[test]
    fn zero_capacity_rejects_inserts() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(0);
        assert!(store.is_full());
        assert_eq!(
            store.add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng),
            Err(MemoryError::NoCapacity)
        );
        let mut sem = SemanticStore::new(0);
        assert_eq!(
            sem.observe(
                &epi_quad("James", "laptop", "desk", 1),
                SemanticEviction::Weakest,
                &mut rng
            ),
            Err(MemoryError::NoCapacity)
        );
    }

    #[test]
    fn episodic_rejects_ownerless_quadruples() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(3);
        let bare = MemoryQuadruple::new(
            EntityName::bare("laptop").unwrap(),
            Relation::at_location(),
            EntityName::bare("desk").unwrap(),
            1,
        );
        assert_eq!(
            store.add(bare, EpisodicEviction::Oldest, &mut rng),
            Err(MemoryError::NotEpisodicForm)
        );
    }

    #[test]
    fn latest_prefers_maximum_timestamp() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(4);
        store
            .add(epi_quad("Karen", "cat", "office", 21), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        store
            .add(epi_quad("Karen", "cat", "desk", 22), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let hit = store.latest(&question("Karen", "cat")).unwrap();
        assert_eq!(hit.meta, 22);
        assert_eq!(hit.tail, EntityName::owned("Karen", "desk").unwrap());
        assert!(store.latest(&question("Tom", "cat")).is_none());
    }

    #[test]
    fn latest_tie_goes_to_later_insertion() {
        let mut rng = Rng::from_seed(0);
        let mut store = EpisodicStore::new(4);
        store
            .add(epi_quad("Karen", "cat", "office", 5), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        store
            .add(epi_quad("Karen", "cat", "desk", 5), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let hit = store.latest(&question("Karen", "cat")).unwrap();
        assert_eq!(hit.tail, EntityName::owned("Karen", "desk").unwrap());
    }

    #[test]
    fn random_eviction_is_roughly_uniform() {
        // 1,000 random-mode adds into a full store of 32. Track which
        // slot each eviction hits via a mirror list; every slot's count
        // should sit within 3σ of the binomial mean.
        let mut rng = Rng::from_seed(1234);
        let mut store = EpisodicStore::new(32);
        let mut mirror: Vec<u64> = Vec::new();
        let mut next_t = 0u64;
        for _ in 0..32 {
            store
                .add(epi_quad("James", "laptop", "desk", next_t), EpisodicEviction::Random, &mut rng)
                .unwrap();
            mirror.push(next_t);
            next_t += 1;
        }
        let mut counts = [0u32; 32];
        for _ in 0..1000 {
            let evicted = store
                .add(epi_quad("James", "laptop", "desk", next_t), EpisodicEviction::Random, &mut rng)
                .unwrap()
                .unwrap();
            let slot = mirror.iter().position(|&t| t == evicted.meta).unwrap();
            counts[slot] += 1;
            mirror.remove(slot);
            mirror.push(next_t);
            next_t += 1;
        }
        // n=1000, p=1/32: mean 31.25, σ ≈ 5.5.
        let (lo, hi) = (31.25 - 3.0 * 5.5, 31.25 + 3.0 * 5.5);
        for (slot, &count) in counts.iter().enumerate() {
            assert!(
                (count as f64) > lo && (count as f64) < hi,
                "slot {slot} evicted {count} times, outside [{lo:.1}, {hi:.1}]"
            );
        }
    }

    #[test]
    fn observe_strengthens_matching_fact() {
        let mut rng = Rng::from_seed(0);
        let mut store = SemanticStore::new(4);
        for _ in 0..10 {
            store
                .observe(&epi_quad("James", "laptop", "desk", 1), SemanticEviction::Weakest, &mut rng)
                .unwrap();
        }
        assert_eq!(store.entries().next().unwrap().meta, 10);
        store
            .observe(&epi_quad("James", "laptop", "desk", 42), SemanticEviction::Weakest, &mut rng)
            .unwrap();
        assert_eq!(store.entries().next().unwrap().meta, 11);
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn weakest_eviction_drops_minimum_strength() {
        let mut rng = Rng::from_seed(0);
        let mut store = SemanticStore::new(2);
        for _ in 0..10 {
            store
                .observe(&epi_quad("James", "laptop", "desk", 1), SemanticEviction::Weakest, &mut rng)
                .unwrap();
        }
        for _ in 0..5 {
            store
                .observe(&epi_quad("Tom", "laptop", "garage", 2), SemanticEviction::Weakest, &mut rng)
                .unwrap();
        }
        let evicted = store
            .observe(&epi_quad("Karen", "cat", "lap", 3), SemanticEviction::Weakest, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(evicted.meta, 5);
        assert_eq!(evicted.tail, EntityName::bare("garage").unwrap());
    }

    #[test]
    fn empty_store_plain_insert() {
        let mut rng = Rng::from_seed(0);
        let mut store = SemanticStore::new(2);
        let evicted = store
            .observe(&epi_quad("James", "laptop", "desk", 9), SemanticEviction::Weakest, &mut rng)
            .unwrap();
        assert!(evicted.is_none());
        let fact = store.entries().next().unwrap();
        assert_eq!(fact.render_line(), "laptop\tAtLocation\tdesk\t1");
    }

    #[test]
    fn frozen_store_rejects_mutation() {
        let mut rng = Rng::from_seed(0);
        let facts = vec![MemoryQuadruple::new(
            EntityName::bare("laptop").unwrap(),
            Relation::at_location(),
            EntityName::bare("desk").unwrap(),
            1,
        )];
        let mut store = SemanticStore::with_entries(4, facts, true).unwrap();
        assert_eq!(
            store.observe(&epi_quad("James", "laptop", "desk", 1), SemanticEviction::Weakest, &mut rng),
            Err(MemoryError::Frozen)
        );
        assert_eq!(store.strongest(&question("James", "laptop")).unwrap().meta, 1);
    }

    #[test]
    fn strongest_prefers_maximum_strength() {
        let mut rng = Rng::from_seed(0);
        let mut store = SemanticStore::new(4);
        for _ in 0..10 {
            store
                .observe(&epi_quad("James", "laptop", "desk", 1), SemanticEviction::Weakest, &mut rng)
                .unwrap();
        }
        for _ in 0..5 {
            store
                .observe(&epi_quad("Tom", "laptop", "garage", 2), SemanticEviction::Weakest, &mut rng)
                .unwrap();
        }
        let hit = store.strongest(&question("James", "laptop")).unwrap();
        assert_eq!(hit.tail, EntityName::bare("desk").unwrap());
        assert_eq!(hit.meta, 10);
        assert!(store.strongest(&question("James", "pillow")).is_none());
    }

    #[test]
    fn strongest_tie_goes_to_most_recently_touched() {
        let mut rng = Rng::from_seed(0);
        let mut store = SemanticStore::new(4);
        store
            .observe(&epi_quad("James", "laptop", "desk", 1), SemanticEviction::Weakest, &mut rng)
            .unwrap();
        store
            .observe(&epi_quad("Tom", "laptop", "garage", 2), SemanticEviction::Weakest, &mut rng)
            .unwrap();
        let hit = store.strongest(&question("James", "laptop")).unwrap();
        assert_eq!(hit.tail, EntityName::bare("garage").unwrap());
    }

    #[test]
    fn compress_merges_largest_group() {
        let mut rng = Rng::from_seed(0);
        let mut epi = EpisodicStore::new(3);
        epi.add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Karen", "laptop", "desk", 2), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Tom", "cat", "lap", 3), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let mut sem = SemanticStore::new(3);
        assert!(episodic_compress(&mut epi, &mut sem).unwrap());
        assert_eq!(epi.len(), 1);
        assert_eq!(epi.entries()[0].meta, 3);
        let fact = sem.entries().next().unwrap();
        assert_eq!(fact.render_line(), "laptop\tAtLocation\tdesk\t2");
    }

    #[test]
    fn compress_with_no_group_falls_back_to_oldest() {
        let mut rng = Rng::from_seed(0);
        let mut epi = EpisodicStore::new(3);
        epi.add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Karen", "cat", "lap", 2), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Tom", "book", "shelf", 3), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let mut sem = SemanticStore::new(3);
        assert!(!episodic_compress(&mut epi, &mut sem).unwrap());
        assert_eq!(epi.len(), 2);
        assert!(epi.entries().iter().all(|e| e.meta != 1));
        assert!(sem.is_empty());
    }

    #[test]
    fn compress_group_tie_prefers_oldest_member() {
        let mut rng = Rng::from_seed(0);
        let mut epi = EpisodicStore::new(4);
        epi.add(epi_quad("James", "cat", "lap", 2), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Karen", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Tom", "cat", "lap", 4), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Emma", "laptop", "desk", 3), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let mut sem = SemanticStore::new(3);
        assert!(episodic_compress(&mut epi, &mut sem).unwrap());
        // Both groups have size 2; laptop@desk holds the oldest entry.
        let fact = sem.entries().next().unwrap();
        assert_eq!(fact.head, EntityName::bare("laptop").unwrap());
        assert_eq!(fact.meta, 2);
        assert_eq!(epi.len(), 2);
    }

    #[test]
    fn compress_strengthens_existing_fact() {
        let mut rng = Rng::from_seed(0);
        let mut epi = EpisodicStore::new(2);
        epi.add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        epi.add(epi_quad("Karen", "laptop", "desk", 2), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let facts = vec![MemoryQuadruple::new(
            EntityName::bare("laptop").unwrap(),
            Relation::at_location(),
            EntityName::bare("desk").unwrap(),
            7,
        )];
        let mut sem = SemanticStore::with_entries(2, facts, false).unwrap();
        assert!(episodic_compress(&mut epi, &mut sem).unwrap());
        assert_eq!(sem.entries().next().unwrap().meta, 9);
    }

    #[test]
    fn compress_rejects_frozen_semantic() {
        let mut epi = EpisodicStore::new(2);
        let mut sem = SemanticStore::with_entries(2, Vec::new(), true).unwrap();
        assert_eq!(
            episodic_compress(&mut epi, &mut sem),
            Err(MemoryError::Frozen)
        );
    }

    #[test]
    fn with_entries_validates() {
        let fact = |o: &str, l: &str, s: u64| {
            MemoryQuadruple::new(
                EntityName::bare(o).unwrap(),
                Relation::at_location(),
                EntityName::bare(l).unwrap(),
                s,
            )
        };
        assert!(matches!(
            SemanticStore::with_entries(1, vec![fact("a", "b", 1), fact("c", "d", 1)], false),
            Err(MemoryError::OverCapacity { .. })
        ));
        assert!(matches!(
            SemanticStore::with_entries(2, vec![fact("a", "b", 0)], false),
            Err(MemoryError::ZeroStrength)
        ));
        assert!(matches!(
            SemanticStore::with_entries(2, vec![fact("a", "b", 1), fact("a", "b", 2)], false),
            Err(MemoryError::DuplicateFact(_))
        ));
        let owned = MemoryQuadruple::new(
            EntityName::owned("James", "laptop").unwrap(),
            Relation::at_location(),
            EntityName::bare("desk").unwrap(),
            1,
        );
        assert!(matches!(
            SemanticStore::with_entries(2, vec![owned], false),
            Err(MemoryError::NotSemanticForm)
        ));
    }

    #[test]
    fn scaling_strengths_preserves_strongest() {
        let fact = |o: &str, l: &str, s: u64| {
            MemoryQuadruple::new(
                EntityName::bare(o).unwrap(),
                Relation::at_location(),
                EntityName::bare(l).unwrap(),
                s,
            )
        };
        let base = vec![fact("laptop", "desk", 4), fact("laptop", "garage", 2), fact("cat", "lap", 1)];
        let scaled: Vec<MemoryQuadruple> = base
            .iter()
            .cloned()
            .map(|mut q| {
                q.meta *= 5;
                q
            })
            .collect();
        let a = SemanticStore::with_entries(4, base, false).unwrap();
        let b = SemanticStore::with_entries(4, scaled, false).unwrap();
        for q in [question("James", "laptop"), question("Karen", "cat")] {
            assert_eq!(
                a.strongest(&q).unwrap().tail,
                b.strongest(&q).unwrap().tail
            );
        }
    }

    #[test]
    fn dump_renders_both_sections() {
        let mut rng = Rng::from_seed(0);
        let mut epi = EpisodicStore::new(2);
        epi.add(epi_quad("James", "laptop", "desk", 1), EpisodicEviction::Oldest, &mut rng)
            .unwrap();
        let mut sem = SemanticStore::new(2);
        sem.observe(&epi_quad("Karen", "cat", "lap", 2), SemanticEviction::Weakest, &mut rng)
            .unwrap();
        assert_eq!(
            dump_stores(&epi, &sem),
            "# episodic\nJames's laptop\tAtLocation\tJames's desk\t1\n# semantic\ncat\tAtLocation\tlap\t1\n"
        );
    }
}
