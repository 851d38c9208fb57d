//! Brute-force reference matchers used to cross-check the engine.
//!
//! Two independent enumerations are provided. [`oracle_subsets`] works at the
//! hyperedge level: it enumerates injective, signature-feasible hyperedge
//! assignments and accepts one exactly when every non-empty subset of the
//! assignment has equal intersection signatures on the query and data sides.
//! [`oracle_vertexiso`] works at the vertex level: it enumerates
//! label-preserving injective vertex mappings under which every query
//! hyperedge lands on a data hyperedge, then projects each mapping to its
//! hyperedge-pair set. Both must return identical embedding sets.
//!
//! Everything here favors obviousness over speed and is guarded against
//! instances too large to brute-force.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::hypergraph::Hypergraph;

pub use crate::Embedding;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScaleError {
    #[error("query has {edges} hyperedges, oracle limit is {max}")]
    QueryTooLarge { edges: usize, max: usize },
    #[error("data hypergraph has {edges} hyperedges, oracle limit is {max}")]
    DataTooLarge { edges: usize, max: usize },
    #[error("oracle work budget of {max} steps exceeded")]
    WorkExceeded { max: u64 },
}

/// Brute-force size guards. The oracles are exponential by design; these
/// bounds keep them usable on test instances only.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_query_edges: usize,
    pub max_data_edges: usize,
    pub max_steps: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_query_edges: 8,
            max_data_edges: 10_000,
            max_steps: 500_000_000,
        }
    }
}

impl OracleLimits {
    fn admit(&self, q: &Hypergraph, h: &Hypergraph) -> Result<(), ScaleError> {
        if q.edge_count() > self.max_query_edges {
            return Err(ScaleError::QueryTooLarge {
                edges: q.edge_count(),
                max: self.max_query_edges,
            });
        }
        if h.edge_count() > self.max_data_edges {
            return Err(ScaleError::DataTooLarge {
                edges: h.edge_count(),
                max: self.max_data_edges,
            });
        }
        Ok(())
    }
}

/// The full intersection predicate on a pair list: for every non-empty
/// subset S of the pairs, the signature of the intersection of the query
/// hyperedges in S equals the signature of the intersection of their data
/// hyperedges. Holds iff the pairs form a partial embedding.
pub fn subset_predicate(q: &Hypergraph, h: &Hypergraph, pairs: &[(usize, usize)]) -> bool {
    let n = pairs.len();
    assert!(n < usize::BITS as usize, "subset mask overflow");
    for mask in 1usize..(1 << n) {
        if !subset_holds(q, h, pairs, mask) {
            return false;
        }
    }
    true
}

fn subset_holds(q: &Hypergraph, h: &Hypergraph, pairs: &[(usize, usize)], mask: usize) -> bool {
    let qs: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &(e, _))| e)
        .collect();
    let hs: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &(_, f))| f)
        .collect();
    q.signature_of(&q.edges_intersection(&qs)) == h.signature_of(&h.edges_intersection(&hs))
}

/// Signature-feasible candidates per query hyperedge, by direct scan.
fn signature_candidates(q: &Hypergraph, h: &Hypergraph) -> Vec<Vec<usize>> {
    (0..q.edge_count())
        .map(|e| {
            let sig = q.edge_signature(e);
            (0..h.edge_count())
                .filter(|&f| h.edge_signature(f) == sig)
                .collect()
        })
        .collect()
}

/// Hyperedge-level reference matcher.
///
/// Enumerates injective assignments of a signature-matching data hyperedge to
/// each query hyperedge and accepts via the subset intersection predicate.
/// Prefixes that already violate the predicate on a subset containing the
/// newest pair are abandoned early; this discards no accepted assignment
/// because the predicate over a full assignment includes every prefix subset.
pub fn oracle_subsets(
    q: &Hypergraph,
    h: &Hypergraph,
    limits: &OracleLimits,
) -> Result<BTreeSet<Embedding>, ScaleError> {
    oracle_subsets_impl(q, h, limits, true)
}

fn oracle_subsets_impl(
    q: &Hypergraph,
    h: &Hypergraph,
    limits: &OracleLimits,
    prune_prefixes: bool,
) -> Result<BTreeSet<Embedding>, ScaleError> {
    limits.admit(q, h)?;
    let cands = signature_candidates(q, h);
    let mut out = BTreeSet::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; h.edge_count()];
    let mut steps = 0u64;
    extend_assignment(
        q,
        h,
        limits,
        prune_prefixes,
        &cands,
        &mut pairs,
        &mut used,
        &mut steps,
        &mut out,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend_assignment(
    q: &Hypergraph,
    h: &Hypergraph,
    limits: &OracleLimits,
    prune_prefixes: bool,
    cands: &[Vec<usize>],
    pairs: &mut Vec<(usize, usize)>,
    used: &mut [bool],
    steps: &mut u64,
    out: &mut BTreeSet<Embedding>,
) -> Result<(), ScaleError> {
    let d = pairs.len();
    if d == q.edge_count() {
        if prune_prefixes || subset_predicate(q, h, pairs) {
            out.insert(pairs.iter().map(|&(_, f)| f).collect());
        }
        return Ok(());
    }
    for &f in &cands[d] {
        if used[f] {
            continue;
        }
        *steps += 1;
        if *steps > limits.max_steps {
            return Err(ScaleError::WorkExceeded {
                max: limits.max_steps,
            });
        }
        pairs.push((d, f));
        // Only subsets containing the new pair need rechecking.
        let ok =
            !prune_prefixes || (0..1usize << d).all(|t| subset_holds(q, h, pairs, t | (1 << d)));
        if ok {
            used[f] = true;
            extend_assignment(q, h, limits, prune_prefixes, cands, pairs, used, steps, out)?;
            used[f] = false;
        }
        pairs.pop();
    }
    Ok(())
}

/// Result of the vertex-level reference matcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexIsoMatches {
    pub embeddings: BTreeSet<Embedding>,
    /// Number of distinct vertex isomorphisms before projection; several can
    /// collapse onto one embedding.
    pub isomorphism_count: u64,
}

/// Vertex-level reference matcher.
///
/// Enumerates injective label-preserving vertex mappings, query hyperedge by
/// query hyperedge: each hyperedge is bound to a signature-matching data
/// hyperedge and the still-unmapped vertices are matched by every
/// label-respecting bijection onto the unused vertices of that data
/// hyperedge. Each complete mapping is projected to its hyperedge pair set.
pub fn oracle_vertexiso(
    q: &Hypergraph,
    h: &Hypergraph,
    limits: &OracleLimits,
) -> Result<VertexIsoMatches, ScaleError> {
    limits.admit(q, h)?;
    let cands = signature_candidates(q, h);
    let order = edge_visit_order(q);
    let mut search = VertexIsoSearch {
        q,
        h,
        limits,
        cands: &cands,
        order: &order,
        phi: vec![None; q.vertex_count()],
        used: vec![false; h.vertex_count()],
        assign: vec![usize::MAX; q.edge_count()],
        steps: 0,
        out: BTreeSet::new(),
        isomorphism_count: 0,
    };
    search.edge_level(0)?;
    debug_assert!(search.phi.iter().all(Option::is_none));
    debug_assert!(!search.used.iter().any(|&u| u));
    Ok(VertexIsoMatches {
        embeddings: search.out,
        isomorphism_count: search.isomorphism_count,
    })
}

/// Visit order that keeps each hyperedge adjacent to an earlier one whenever
/// the query is connected, so vertex bindings constrain later hyperedges.
fn edge_visit_order(q: &Hypergraph) -> Vec<usize> {
    let m = q.edge_count();
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    for root in 0..m {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(e) = queue.pop_front() {
            order.push(e);
            for &n in q.adjacent_edges(e) {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    order
}

struct VertexIsoSearch<'a> {
    q: &'a Hypergraph,
    h: &'a Hypergraph,
    limits: &'a OracleLimits,
    cands: &'a [Vec<usize>],
    order: &'a [usize],
    phi: Vec<Option<usize>>,
    used: Vec<bool>,
    assign: Vec<usize>,
    steps: u64,
    out: BTreeSet<Embedding>,
    isomorphism_count: u64,
}

impl VertexIsoSearch<'_> {
    fn edge_level(&mut self, d: usize) -> Result<(), ScaleError> {
        if d == self.order.len() {
            debug_assert!(self.phi.iter().all(Option::is_some));
            self.isomorphism_count += 1;
            self.out.insert(self.assign.clone());
            return Ok(());
        }
        let e = self.order[d];
        for ci in 0..self.cands[e].len() {
            let f = self.cands[e][ci];
            self.steps += 1;
            if self.steps > self.limits.max_steps {
                return Err(ScaleError::WorkExceeded {
                    max: self.limits.max_steps,
                });
            }
            let Some(classes) = self.bind_classes(e, f) else {
                continue;
            };
            self.assign[e] = f;
            self.bind_class(d, &classes, 0, 0)?;
            self.assign[e] = usize::MAX;
        }
        Ok(())
    }

    /// Checks that `f` is consistent with the current mapping and groups the
    /// unmapped vertices of `e` with the unused vertices of `f` by label.
    /// Returns `None` when `f` cannot host `e`.
    fn bind_classes(&self, e: usize, f: usize) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
        let ev = self.q.edge(e);
        let fv = self.h.edge(f);
        // Already-mapped query vertices must land inside f; f's already-used
        // vertices must be exactly those images.
        let mut mapped_into_f = 0usize;
        for &u in ev {
            if let Some(v) = self.phi[u] {
                if fv.binary_search(&v).is_err() {
                    return None;
                }
                mapped_into_f += 1;
            }
        }
        let used_in_f = fv.iter().filter(|&&v| self.used[v]).count();
        if used_in_f != mapped_into_f {
            return None;
        }
        let mut labels: Vec<u32> = ev
            .iter()
            .filter(|&&u| self.phi[u].is_none())
            .map(|&u| self.q.label(u))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        let mut classes = Vec::with_capacity(labels.len());
        for l in labels {
            let us: Vec<usize> = ev
                .iter()
                .copied()
                .filter(|&u| self.phi[u].is_none() && self.q.label(u) == l)
                .collect();
            let vs: Vec<usize> = fv
                .iter()
                .copied()
                .filter(|&v| !self.used[v] && self.h.label(v) == l)
                .collect();
            if us.len() != vs.len() {
                return None;
            }
            classes.push((us, vs));
        }
        Some(classes)
    }

    fn bind_class(
        &mut self,
        d: usize,
        classes: &[(Vec<usize>, Vec<usize>)],
        ci: usize,
        ui: usize,
    ) -> Result<(), ScaleError> {
        if ci == classes.len() {
            return self.edge_level(d + 1);
        }
        let (us, vs) = &classes[ci];
        if ui == us.len() {
            return self.bind_class(d, classes, ci + 1, 0);
        }
        let u = us[ui];
        for &v in vs {
            if self.used[v] {
                continue;
            }
            self.phi[u] = Some(v);
            self.used[v] = true;
            self.bind_class(d, classes, ci, ui + 1)?;
            self.used[v] = false;
            self.phi[u] = None;
        }
        Ok(())
    }
}
