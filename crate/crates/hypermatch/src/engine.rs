//! Backtracking enumeration of embeddings over a filtered candidate space.
//!
//! The search maps one query hyperedge per level. After extending the
//! partial embedding it prunes the remaining candidate sets in two stages:
//! stage 1 drops candidates of adjacent unmapped hyperedges that have no
//! connection to the newly mapped pair; stage 2 drops, from every unmapped
//! hyperedge, each candidate that is incompatible with the whole partial
//! embedding. Compatibility is decided in time linear in the hyperedge size
//! by comparing incident-hyperedge bitmaps: per vertex, one bit per mapped
//! hyperedge it belongs to. Sorting (bitmap, label) pairs of the probed
//! hyperedge on both sides compares all vertex classes at once; equality
//! holds exactly when the extension stays a partial embedding.
//!
//! Stage 2 leaves only compatible candidates, so extensions need no further
//! verification. The reduced modes ([`PruneMode::None`],
//! [`PruneMode::Connectivity`]) skip it and instead verify each extension
//! with the same bitmap probe before accepting it.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::candidate_space::CandidateSpace;
use crate::hypergraph::{Hypergraph, Label};
use crate::Embedding;

/// Backtracking steps between deadline checks.
const TIMEOUT_CHECK_INTERVAL: u64 = 4096;

/// Which in-search filtering stages run. The embedding set is identical in
/// every mode; only the work differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    /// No in-search filtering; each extension is verified individually.
    None,
    /// Stage 1 only, plus per-extension verification.
    Connectivity,
    /// Stage 2 only.
    Intersection,
    /// Stage 1 and stage 2.
    Both,
}

impl PruneMode {
    pub fn stage1(self) -> bool {
        matches!(self, PruneMode::Connectivity | PruneMode::Both)
    }

    pub fn stage2(self) -> bool {
        matches!(self, PruneMode::Intersection | PruneMode::Both)
    }

    /// Without stage 2 the candidate sets may hold incompatible candidates,
    /// so every extension must be checked before it is applied.
    pub fn verifies_extensions(self) -> bool {
        !self.stage2()
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub mode: PruneMode,
    /// Stop after this many embeddings.
    pub limit: Option<u64>,
    /// Stop once this much wall time has elapsed; checked every
    /// [`TIMEOUT_CHECK_INTERVAL`] steps.
    pub timeout: Option<Duration>,
    /// Seed for shuffling the matching-order tiebreak; `None` breaks ties by
    /// lowest hyperedge id.
    pub tiebreak_seed: Option<u64>,
    /// Verify around every top-level branch that candidate sets and bitmaps
    /// are restored exactly; for tests.
    pub validate_state: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            mode: PruneMode::Both,
            limit: None,
            timeout: None,
            tiebreak_seed: None,
            validate_state: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Limit,
    Timeout,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct SearchStats {
    pub embeddings_found: u64,
    pub recursive_calls: u64,
    pub candidates_pruned_stage1: u64,
    pub candidates_pruned_stage2: u64,
    pub intersection_checks: u64,
    /// Vertices touched across all intersection checks; each check touches
    /// exactly the vertices of the two probed hyperedges.
    pub vertex_touches: u64,
    pub wall_ms: f64,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
    /// Intersection checks whose touch count differed from |e| + |f|;
    /// always zero unless the engine is broken.
    pub touch_violations: u64,
    /// State-restoration mismatches observed under
    /// [`SearchConfig::validate_state`].
    pub state_violations: u64,
}

/// Incident-hyperedge bitmaps for both graphs. `bq[u]` has bit d set when
/// query vertex u lies in the hyperedge mapped at depth d; `bh[v]` has bit d
/// set when data vertex v lies in the image of that hyperedge. Only vertices
/// of mapped or probed hyperedges are ever written, and each search branch
/// clears what it set, so the vectors stay all-zero between searches.
#[derive(Debug, Clone)]
pub struct IhbState {
    bq: Vec<u64>,
    bh: Vec<u64>,
    scratch_q: Vec<(u64, Label)>,
    scratch_h: Vec<(u64, Label)>,
}

impl IhbState {
    pub fn new(q: &Hypergraph, h: &Hypergraph) -> Self {
        Self {
            bq: vec![0; q.vertex_count()],
            bh: vec![0; h.vertex_count()],
            scratch_q: Vec::new(),
            scratch_h: Vec::new(),
        }
    }

    pub fn query_bitmap(&self, u: usize) -> u64 {
        self.bq[u]
    }

    pub fn data_bitmap(&self, v: usize) -> u64 {
        self.bh[v]
    }

    pub fn is_clear(&self) -> bool {
        self.bq.iter().all(|&b| b == 0) && self.bh.iter().all(|&b| b == 0)
    }
}

/// Sets bit `depth` on the bitmap of every vertex of the mapped pair.
/// Setting an already-set bit is a contract violation.
pub fn update_ihb(ihb: &mut IhbState, q_edge: &[usize], h_edge: &[usize], depth: usize) {
    let bit = 1u64 << depth;
    for &u in q_edge {
        debug_assert_eq!(
            ihb.bq[u] & bit,
            0,
            "depth {depth} already set on query vertex {u}"
        );
        ihb.bq[u] |= bit;
    }
    for &v in h_edge {
        debug_assert_eq!(
            ihb.bh[v] & bit,
            0,
            "depth {depth} already set on data vertex {v}"
        );
        ihb.bh[v] |= bit;
    }
}

/// Clears bit `depth` again; inverse of [`update_ihb`].
pub fn restore_ihb(ihb: &mut IhbState, q_edge: &[usize], h_edge: &[usize], depth: usize) {
    let bit = 1u64 << depth;
    for &u in q_edge {
        debug_assert_ne!(
            ihb.bq[u] & bit,
            0,
            "depth {depth} not set on query vertex {u}"
        );
        ihb.bq[u] &= !bit;
    }
    for &v in h_edge {
        debug_assert_ne!(
            ihb.bh[v] & bit,
            0,
            "depth {depth} not set on data vertex {v}"
        );
        ihb.bh[v] &= !bit;
    }
}

/// Decides whether extending the current partial embedding (of `mapped_len`
/// pairs, already reflected in `ihb`) with the pair (e, f) again yields a
/// partial embedding.
///
/// The probe temporarily sets bit `mapped_len` on the vertices of e and f,
/// collects (bitmap, label) per vertex of each hyperedge, and compares the
/// two sorted collections. It touches exactly the |e| + |f| vertices of the
/// probed pair and runs in O(|e|) for signature-matching pairs.
pub fn check_intersection(
    q: &Hypergraph,
    h: &Hypergraph,
    ihb: &mut IhbState,
    mapped_len: usize,
    e: usize,
    f: usize,
    stats: &mut SearchStats,
) -> bool {
    stats.intersection_checks += 1;
    let ev = q.edge(e);
    let fv = h.edge(f);
    if ev.len() != fv.len() {
        // Signature mismatch; cannot happen for candidate-space members.
        return false;
    }
    debug_assert!(mapped_len < u64::BITS as usize);
    let bit = 1u64 << mapped_len;
    let mut touched = 0u64;
    ihb.scratch_q.clear();
    ihb.scratch_h.clear();
    for &u in ev {
        debug_assert_eq!(
            ihb.bq[u] & bit,
            0,
            "probe bit already set on query vertex {u}"
        );
        ihb.bq[u] |= bit;
        ihb.scratch_q.push((ihb.bq[u], q.label(u)));
        touched += 1;
    }
    for &v in fv {
        debug_assert_eq!(
            ihb.bh[v] & bit,
            0,
            "probe bit already set on data vertex {v}"
        );
        ihb.bh[v] |= bit;
        ihb.scratch_h.push((ihb.bh[v], h.label(v)));
        touched += 1;
    }
    ihb.scratch_q.sort_unstable();
    ihb.scratch_h.sort_unstable();
    let compatible = ihb.scratch_q == ihb.scratch_h;
    for &u in ev {
        ihb.bq[u] &= !bit;
    }
    for &v in fv {
        ihb.bh[v] &= !bit;
    }
    if touched != (ev.len() + fv.len()) as u64 {
        stats.touch_violations += 1;
    }
    stats.vertex_touches += touched;
    compatible
}

/// The mapped prefix of an embedding: pairs in mapping order plus a direct
/// query-edge-to-image lookup.
#[derive(Debug, Clone)]
pub struct PartialEmbedding {
    pairs: Vec<(usize, usize)>,
    map: Vec<Option<usize>>,
}

impl PartialEmbedding {
    pub fn new(query_edges: usize) -> Self {
        Self {
            pairs: Vec::with_capacity(query_edges),
            map: vec![None; query_edges],
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_mapped(&self, e: usize) -> bool {
        self.map[e].is_some()
    }

    pub fn image(&self, e: usize) -> Option<usize> {
        self.map[e]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn push(&mut self, e: usize, f: usize) {
        debug_assert!(self.map[e].is_none(), "query edge {e} mapped twice");
        self.map[e] = Some(f);
        self.pairs.push((e, f));
    }

    pub fn pop(&mut self) -> (usize, usize) {
        let (e, f) = self.pairs.pop().expect("pop on empty embedding");
        self.map[e] = None;
        (e, f)
    }

    /// Complete assignment indexed by query hyperedge id.
    pub fn assignment(&self) -> Embedding {
        self.map
            .iter()
            .map(|o| o.expect("assignment of incomplete embedding"))
            .collect()
    }
}

/// Picks the next query hyperedge to map: any candidate set already down to
/// one entry first, then most unmapped adjacent hyperedges, then smallest
/// candidate set, then lowest tiebreak rank.
pub fn choose_next_edge(
    q: &Hypergraph,
    cs: &CandidateSpace,
    m: &PartialEmbedding,
    rank: &[usize],
) -> usize {
    debug_assert!(m.len() < q.edge_count(), "no unmapped hyperedge left");
    debug_assert_eq!(rank.len(), q.edge_count());
    let mut best: Option<(bool, std::cmp::Reverse<usize>, usize, usize, usize)> = None;
    for (e, &edge_rank) in rank.iter().enumerate() {
        if m.is_mapped(e) {
            continue;
        }
        let unmapped_adj = q
            .adjacent_edges(e)
            .iter()
            .filter(|&&x| !m.is_mapped(x))
            .count();
        let key = (
            cs.len(e) != 1,
            std::cmp::Reverse(unmapped_adj),
            cs.len(e),
            edge_rank,
            e,
        );
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.expect("at least one unmapped hyperedge").4
}

/// Stage 1: after mapping (e_new, f_new), drop from every unmapped hyperedge
/// adjacent to e_new the candidates with no connection to f_new. Each test
/// is a constant-time probe. Returns the number of removals.
pub fn connectivity_prune(
    q: &Hypergraph,
    cs: &mut CandidateSpace,
    m: &PartialEmbedding,
    e_new: usize,
    f_new: usize,
    stats: &mut SearchStats,
) -> u64 {
    let mut removed = 0;
    for &e in q.adjacent_edges(e_new) {
        if m.is_mapped(e) {
            continue;
        }
        for f in cs.live(e).to_vec() {
            if !cs.is_connected(e, f, e_new, f_new) {
                cs.remove_candidate(e, f);
                removed += 1;
            }
        }
    }
    stats.candidates_pruned_stage1 += removed;
    removed
}

/// Stage 2: drop, from every unmapped hyperedge, each candidate whose probe
/// against the current partial embedding fails. Aborts early and returns
/// false as soon as some candidate set is emptied, since the branch is dead
/// either way.
pub fn intersection_prune(
    q: &Hypergraph,
    h: &Hypergraph,
    ihb: &mut IhbState,
    cs: &mut CandidateSpace,
    m: &PartialEmbedding,
    stats: &mut SearchStats,
) -> bool {
    for e in 0..q.edge_count() {
        if m.is_mapped(e) {
            continue;
        }
        for f in cs.live(e).to_vec() {
            if !check_intersection(q, h, ihb, m.len(), e, f, stats) {
                cs.remove_candidate(e, f);
                stats.candidates_pruned_stage2 += 1;
                if cs.is_empty(e) {
                    return false;
                }
            }
        }
    }
    true
}

/// Enumerates every embedding of `q` in `h`, invoking `sink` once per
/// embedding with the data hyperedge ids indexed by query hyperedge id.
///
/// Expects `cs` to be freshly built (and normally pre-shrunk by
/// [`crate::filter::initial_filter`]); the space is restored to its entry
/// state before returning, whatever the mode or stop reason.
pub fn match_all<F: FnMut(&[usize])>(
    q: &Hypergraph,
    h: &Hypergraph,
    cs: &mut CandidateSpace,
    cfg: &SearchConfig,
    mut sink: F,
) -> SearchStats {
    if let Some(l) = cfg.limit {
        assert!(l >= 1, "embedding limit must be positive");
    }
    if let Some(t) = cfg.timeout {
        assert!(t > Duration::ZERO, "time limit must be positive");
    }
    assert_eq!(
        cs.query_edge_count(),
        q.edge_count(),
        "space built for another query"
    );
    debug_assert!(q.validate_query().is_ok(), "query must be validated first");

    let start = Instant::now();
    let rank = tiebreak_rank(q.edge_count(), cfg.tiebreak_seed);
    let mut search = Search {
        q,
        h,
        cs,
        ihb: IhbState::new(q, h),
        m: PartialEmbedding::new(q.edge_count()),
        cfg,
        rank,
        deadline: cfg.timeout.map(|t| start + t),
        steps: 0,
        stopped: false,
        stats: SearchStats::default(),
        sink: &mut sink,
    };
    search.run(0);
    debug_assert!(
        search.ihb.is_clear(),
        "bitmaps must be zero after the search"
    );
    if cfg.validate_state && !search.ihb.is_clear() {
        search.stats.state_violations += 1;
    }
    let mut stats = search.stats;
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    stats
}

fn tiebreak_rank(m: usize, seed: Option<u64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    if let Some(s) = seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    let mut rank = vec![0; m];
    for (i, &e) in order.iter().enumerate() {
        rank[e] = i;
    }
    rank
}

struct Search<'a, F> {
    q: &'a Hypergraph,
    h: &'a Hypergraph,
    cs: &'a mut CandidateSpace,
    ihb: IhbState,
    m: PartialEmbedding,
    cfg: &'a SearchConfig,
    rank: Vec<usize>,
    deadline: Option<Instant>,
    steps: u64,
    stopped: bool,
    stats: SearchStats,
    sink: &'a mut F,
}

type StateSnapshot = (Vec<Vec<usize>>, Vec<u64>, Vec<u64>);

impl<F: FnMut(&[usize])> Search<'_, F> {
    fn tick(&mut self) {
        self.steps += 1;
        if self.steps.is_multiple_of(TIMEOUT_CHECK_INTERVAL) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.stopped = true;
                    self.stats.truncated = true;
                    self.stats.stop_reason = Some(StopReason::Timeout);
                }
            }
        }
    }

    fn run(&mut self, depth: usize) {
        self.stats.recursive_calls += 1;
        self.tick();
        if self.stopped {
            return;
        }
        for e in 0..self.q.edge_count() {
            if !self.m.is_mapped(e) && self.cs.is_empty(e) {
                return;
            }
        }
        let e_next = choose_next_edge(self.q, self.cs, &self.m, &self.rank);
        // The loop mutates other candidate sets but never C(e_next): e_next
        // counts as mapped inside the branch. Snapshot anyway so the
        // iteration stays pinned to the branch-entry state.
        let snapshot: Vec<usize> = self.cs.live(e_next).to_vec();
        for f in snapshot {
            if self.stopped {
                break;
            }
            let guard = self.take_guard(depth);
            self.branch(depth, e_next, f);
            if let Some(g) = guard {
                self.check_guard(&g);
            }
        }
    }

    fn branch(&mut self, depth: usize, e: usize, f: usize) {
        self.tick();
        if self.stopped {
            return;
        }
        if self.cfg.mode.verifies_extensions()
            && !check_intersection(
                self.q,
                self.h,
                &mut self.ihb,
                self.m.len(),
                e,
                f,
                &mut self.stats,
            )
        {
            return;
        }
        self.m.push(e, f);
        update_ihb(&mut self.ihb, self.q.edge(e), self.h.edge(f), depth);
        if self.m.len() == self.q.edge_count() {
            self.report();
        } else {
            let mark = self.cs.checkpoint();
            if self.cfg.mode.stage1() {
                connectivity_prune(self.q, self.cs, &self.m, e, f, &mut self.stats);
            }
            if self.cfg.mode.stage2() {
                intersection_prune(
                    self.q,
                    self.h,
                    &mut self.ihb,
                    self.cs,
                    &self.m,
                    &mut self.stats,
                );
            }
            self.run(depth + 1);
            self.cs.rollback(mark);
        }
        restore_ihb(&mut self.ihb, self.q.edge(e), self.h.edge(f), depth);
        self.m.pop();
    }

    fn report(&mut self) {
        let assignment = self.m.assignment();
        debug_assert!(
            {
                let mut s = assignment.clone();
                s.sort_unstable();
                s.windows(2).all(|w| w[0] != w[1])
            },
            "embedding must be injective"
        );
        self.stats.embeddings_found += 1;
        (self.sink)(&assignment);
        if let Some(l) = self.cfg.limit {
            if self.stats.embeddings_found >= l {
                self.stopped = true;
                self.stats.truncated = true;
                self.stats.stop_reason = Some(StopReason::Limit);
            }
        }
    }

    fn take_guard(&self, depth: usize) -> Option<StateSnapshot> {
        (depth == 0 && self.cfg.validate_state).then(|| {
            (
                self.cs.live_sets_sorted(),
                self.ihb.bq.clone(),
                self.ihb.bh.clone(),
            )
        })
    }

    fn check_guard(&mut self, g: &StateSnapshot) {
        if g.0 != self.cs.live_sets_sorted() || g.1 != self.ihb.bq || g.2 != self.ihb.bh {
            self.stats.state_violations += 1;
        }
    }
}
