//! Candidate space: per-query-hyperedge candidate sets plus connections
//! between candidates of adjacent query hyperedges.
//!
//! A data hyperedge f is a candidate of query hyperedge e when their
//! signatures match. Candidates f of e and f' of an adjacent e' are
//! connected when f and f' are adjacent in the data hypergraph and the
//! intersection signatures agree: Sig(e ∩ e') = Sig(f ∩ f'). Every embedding
//! restricted to a candidate pair is such a connection, so pruning a
//! candidate with no live connection for some adjacent pair is sound.
//!
//! Removals go through a journal so the search can take a checkpoint before
//! branching and restore the exact candidate sets afterwards. Connection
//! sets are immutable after the build; liveness is always decided against
//! the current candidate sets.

use std::collections::{HashMap, HashSet};

use crate::hypergraph::{Hypergraph, Signature};
use crate::sigindex::SignatureIndex;

/// Journal position returned by [`CandidateSpace::checkpoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark(usize);

/// One candidate set with O(1) membership and journal-friendly removal.
/// Live candidates sit in `items`; `pos` maps a live candidate to its slot.
#[derive(Debug, Clone, Default)]
struct CandidateSet {
    items: Vec<usize>,
    pos: HashMap<usize, usize>,
}

impl CandidateSet {
    fn from_ids(ids: &[usize]) -> Self {
        Self {
            items: ids.to_vec(),
            pos: ids.iter().enumerate().map(|(i, &f)| (f, i)).collect(),
        }
    }

    fn contains(&self, f: usize) -> bool {
        self.pos.contains_key(&f)
    }

    /// Swap-removes `f`, returning the slot it occupied so the journal can
    /// undo the removal exactly.
    fn remove(&mut self, f: usize) -> usize {
        let i = self
            .pos
            .remove(&f)
            .unwrap_or_else(|| panic!("removal of non-live candidate {f}"));
        let last = self.items.len() - 1;
        self.items.swap(i, last);
        self.items.pop();
        if i < self.items.len() {
            self.pos.insert(self.items[i], i);
        }
        i
    }

    /// Reinstates `f` at `slot`, inverting [`remove`](Self::remove). Valid
    /// only in LIFO order relative to removals.
    fn restore(&mut self, f: usize, slot: usize) {
        self.items.push(f);
        let last = self.items.len() - 1;
        if slot != last {
            self.items.swap(slot, last);
            self.pos.insert(self.items[last], last);
        }
        self.pos.insert(f, slot);
    }
}

#[derive(Debug, Clone)]
pub struct CandidateSpace {
    sets: Vec<CandidateSet>,
    /// `conn[e][slot][f]` is the set of candidates of the slot-th adjacent
    /// edge of e that are connected to candidate f of e. Entries survive
    /// candidate removal; membership against the live set decides liveness.
    conn: Vec<Vec<HashMap<usize, HashSet<usize>>>>,
    /// `slot_of[e][e']` locates e' inside `adjacent_edges(e)`.
    slot_of: Vec<HashMap<usize, usize>>,
    /// Precomputed Sig(e ∩ e') per adjacency slot.
    pair_sigs: Vec<Vec<Signature>>,
    /// Removal trail: (query edge, candidate, slot it occupied).
    journal: Vec<(usize, usize, usize)>,
}

impl CandidateSpace {
    /// Builds the candidate space for `q` against `h`.
    ///
    /// Candidate sets come from signature lookup. Connections are discovered
    /// by scanning, for each candidate f, only the data hyperedges adjacent
    /// to f, never the whole opposite candidate set.
    pub fn build(q: &Hypergraph, h: &Hypergraph, idx: &SignatureIndex) -> Self {
        let m = q.edge_count();
        let sets: Vec<CandidateSet> = (0..m)
            .map(|e| CandidateSet::from_ids(idx.lookup(&q.edge_signature(e))))
            .collect();

        let mut slot_of = vec![HashMap::new(); m];
        let mut pair_sigs = vec![Vec::new(); m];
        let mut conn: Vec<Vec<HashMap<usize, HashSet<usize>>>> = vec![Vec::new(); m];
        for e in 0..m {
            for (slot, &e2) in q.adjacent_edges(e).iter().enumerate() {
                slot_of[e].insert(e2, slot);
                pair_sigs[e].push(q.intersection_signature(e, e2));
                conn[e].push(HashMap::new());
            }
        }

        let mut cs = Self {
            sets,
            conn,
            slot_of,
            pair_sigs,
            journal: Vec::new(),
        };
        for e in 0..m {
            for &e2 in q.adjacent_edges(e) {
                if e2 < e {
                    continue; // each unordered pair once
                }
                let sig = &cs.pair_sigs[e][cs.slot_of[e][&e2]];
                let mut found: Vec<(usize, usize)> = Vec::new();
                for &f in &cs.sets[e].items {
                    for &f2 in h.adjacent_edges(f) {
                        if cs.sets[e2].contains(f2) && &h.intersection_signature(f, f2) == sig {
                            found.push((f, f2));
                        }
                    }
                }
                let fwd = cs.slot_of[e][&e2];
                let back = cs.slot_of[e2][&e];
                for (f, f2) in found {
                    cs.conn[e][fwd].entry(f).or_default().insert(f2);
                    cs.conn[e2][back].entry(f2).or_default().insert(f);
                }
            }
        }
        cs
    }

    pub fn query_edge_count(&self) -> usize {
        self.sets.len()
    }

    /// Live candidates of `e`, in deterministic (mutation-order) sequence.
    pub fn live(&self, e: usize) -> &[usize] {
        &self.sets[e].items
    }

    pub fn len(&self, e: usize) -> usize {
        self.sets[e].items.len()
    }

    pub fn is_empty(&self, e: usize) -> bool {
        self.sets[e].items.is_empty()
    }

    pub fn contains(&self, e: usize, f: usize) -> bool {
        self.sets[e].contains(f)
    }

    pub fn total_candidates(&self) -> usize {
        self.sets.iter().map(|s| s.items.len()).sum()
    }

    /// Slot of `e2` in the adjacency list of `e`, if the pair is adjacent.
    pub fn adjacency_slot(&self, e: usize, e2: usize) -> Option<usize> {
        self.slot_of[e].get(&e2).copied()
    }

    /// Precomputed Sig(e ∩ e') for an adjacent pair.
    pub fn pair_signature(&self, e: usize, slot: usize) -> &Signature {
        &self.pair_sigs[e][slot]
    }

    /// Whether candidate `f` of `e` is connected to candidate `f2` of the
    /// adjacent edge `e2`. Constant-time hash probes.
    ///
    /// The pair (e, e2) must be adjacent in the query; in debug builds a
    /// non-adjacent pair is a contract violation.
    pub fn is_connected(&self, e: usize, f: usize, e2: usize, f2: usize) -> bool {
        let slot = self.adjacency_slot(e, e2);
        debug_assert!(slot.is_some(), "query edges {e} and {e2} are not adjacent");
        let Some(slot) = slot else { return false };
        self.conn[e][slot].get(&f).is_some_and(|s| s.contains(&f2))
    }

    /// Connection targets recorded at build time for candidate `f` of `e`
    /// toward adjacency slot `slot`. Includes targets that have since been
    /// removed; check liveness with [`contains`](Self::contains).
    pub fn connections(&self, e: usize, slot: usize, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.conn[e][slot].get(&f).into_iter().flatten().copied()
    }

    /// Counts connections whose both endpoints are live, each unordered pair
    /// once. Linear in the number of stored connections.
    pub fn live_connection_count(&self, q: &Hypergraph) -> usize {
        let mut n = 0;
        for e in 0..self.sets.len() {
            for (slot, &e2) in q.adjacent_edges(e).iter().enumerate() {
                if e2 < e {
                    continue;
                }
                for &f in &self.sets[e].items {
                    n += self
                        .connections(e, slot, f)
                        .filter(|&f2| self.sets[e2].contains(f2))
                        .count();
                }
            }
        }
        n
    }

    /// Journaled removal of candidate `f` from `C(e)`. Removing a candidate
    /// that is not live is a contract violation.
    pub fn remove_candidate(&mut self, e: usize, f: usize) {
        let slot = self.sets[e].remove(f);
        self.journal.push((e, f, slot));
    }

    pub fn checkpoint(&self) -> Mark {
        Mark(self.journal.len())
    }

    /// Undoes all removals after `mark`, restoring candidate sets to their
    /// exact state, including iteration order. Marks must be rolled back in
    /// LIFO order.
    pub fn rollback(&mut self, mark: Mark) {
        assert!(
            mark.0 <= self.journal.len(),
            "rollback past the end of the journal: stale or reordered mark"
        );
        while self.journal.len() > mark.0 {
            let (e, f, slot) = self.journal.pop().expect("journal entry");
            self.sets[e].restore(f, slot);
        }
    }

    /// Sorted copies of every live candidate set; used by state-restoration
    /// checks and tests.
    pub fn live_sets_sorted(&self) -> Vec<Vec<usize>> {
        self.sets
            .iter()
            .map(|s| {
                let mut v = s.items.clone();
                v.sort_unstable();
                v
            })
            .collect()
    }
}
