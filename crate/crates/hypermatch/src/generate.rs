//! Seeded random instance generators for tests and benchmarking.

use std::collections::HashSet;
use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hypergraph::{Hypergraph, Label, LabelTable};

/// Retries of the whole random walk in [`gen_query`] before giving up.
pub const WALK_RETRIES: usize = 64;
/// Per-edge retries when sampling distinct hyperedge sets.
const DEDUP_RETRIES: usize = 64;
/// Consecutive non-productive walk draws before an attempt counts as stuck.
const WALK_STALE_LIMIT: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    BadParams(String),
    #[error("could not sample a fresh hyperedge set for edge {edge} after {DEDUP_RETRIES} tries")]
    DedupExhausted { edge: usize },
    #[error(
        "no connected set of {k} hyperedges found after {retries} walk attempts; \
         the hypergraph may have no component with {k} hyperedges"
    )]
    NoConnectedSubset { k: usize, retries: usize },
}

/// Label names reused across generated instances: single letters first.
fn label_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("L{i}")
    }
}

/// Generates a simple labeled hypergraph: `edge_count` distinct hyperedges
/// with arities drawn from `arity`, over a pool of `vertex_pool` vertices
/// with labels uniform over `label_count` values. Vertices that end up in no
/// hyperedge are dropped and ids renumbered densely, so the result satisfies
/// the hypergraph invariants as parsed input would. The same seed always
/// yields the same instance; connectivity is not guaranteed.
pub fn gen_random_hypergraph(
    seed: u64,
    vertex_pool: usize,
    edge_count: usize,
    label_count: usize,
    arity: RangeInclusive<usize>,
) -> Result<(Hypergraph, LabelTable), GenError> {
    let (amin, amax) = (*arity.start(), *arity.end());
    if vertex_pool == 0 || edge_count == 0 || label_count == 0 {
        return Err(GenError::BadParams(
            "vertex pool, edge count, and label count must be positive".into(),
        ));
    }
    if amin == 0 || amin > amax {
        return Err(GenError::BadParams(format!(
            "arity range {amin}..={amax} is empty or starts at zero"
        )));
    }
    if amin > vertex_pool {
        return Err(GenError::BadParams(format!(
            "minimum arity {amin} exceeds the vertex pool {vertex_pool}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool_labels: Vec<Label> = (0..vertex_pool)
        .map(|_| rng.gen_range(0..label_count as Label))
        .collect();

    let mut taken: HashSet<Vec<usize>> = HashSet::with_capacity(edge_count);
    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(edge_count);
    for i in 0..edge_count {
        let mut accepted = false;
        for _ in 0..DEDUP_RETRIES {
            let a = rng.gen_range(amin..=amax).min(vertex_pool);
            let mut set = HashSet::with_capacity(a);
            while set.len() < a {
                set.insert(rng.gen_range(0..vertex_pool));
            }
            let mut edge: Vec<usize> = set.into_iter().collect();
            edge.sort_unstable();
            if taken.insert(edge.clone()) {
                edges.push(edge);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(GenError::DedupExhausted { edge: i });
        }
    }

    // Keep only covered vertices, renumbered densely in ascending order.
    let mut covered: Vec<usize> = edges.iter().flatten().copied().collect();
    covered.sort_unstable();
    covered.dedup();
    let mut dense = vec![usize::MAX; vertex_pool];
    for (new, &old) in covered.iter().enumerate() {
        dense[old] = new;
    }
    let vertex_labels: Vec<Label> = covered.iter().map(|&v| pool_labels[v]).collect();
    let edges: Vec<Vec<usize>> = edges
        .into_iter()
        .map(|e| e.into_iter().map(|v| dense[v]).collect())
        .collect();

    let (h, stats) = Hypergraph::new(vertex_labels, edges).expect("generated parts are valid");
    debug_assert_eq!(stats.repeated_vertices, 0);
    debug_assert_eq!(stats.duplicate_edges, 0);

    let mut table = LabelTable::new();
    for i in 0..label_count {
        table.intern(&label_name(i));
    }
    Ok((h, table))
}

/// Extracts a connected query of `k` hyperedges from `h` by random walk over
/// hyperedge adjacency: grow a set from a random start edge by repeatedly
/// picking a random edge adjacent to a random member, restarting up to
/// [`WALK_RETRIES`] times when an attempt stalls. The query keeps `h`'s label
/// ids, with vertex ids renumbered densely; the returned list holds the
/// source data hyperedge id for each query hyperedge, so the query always has
/// at least that one embedding in `h`.
pub fn gen_query(
    seed: u64,
    h: &Hypergraph,
    k: usize,
) -> Result<(Hypergraph, Vec<usize>), GenError> {
    if k == 0 {
        return Err(GenError::BadParams(
            "query needs at least one hyperedge".into(),
        ));
    }
    if k > crate::hypergraph::MAX_QUERY_EDGES {
        return Err(GenError::BadParams(format!(
            "query of {k} hyperedges exceeds the {} limit",
            crate::hypergraph::MAX_QUERY_EDGES
        )));
    }
    if h.edge_count() == 0 {
        return Err(GenError::NoConnectedSubset {
            k,
            retries: WALK_RETRIES,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..WALK_RETRIES {
        let start = rng.gen_range(0..h.edge_count());
        let mut walk = vec![start];
        let mut in_walk: HashSet<usize> = HashSet::from([start]);
        let mut stale = 0usize;
        while walk.len() < k && stale < WALK_STALE_LIMIT {
            let anchor = walk[rng.gen_range(0..walk.len())];
            let adj = h.adjacent_edges(anchor);
            if adj.is_empty() {
                stale += 1;
                continue;
            }
            let next = adj[rng.gen_range(0..adj.len())];
            if in_walk.insert(next) {
                walk.push(next);
                stale = 0;
            } else {
                stale += 1;
            }
        }
        if walk.len() == k {
            return Ok((subquery(h, &walk), walk));
        }
    }
    Err(GenError::NoConnectedSubset {
        k,
        retries: WALK_RETRIES,
    })
}

/// The subhypergraph on the hyperedges `picked` (in that order) with vertex
/// ids renumbered densely.
fn subquery(h: &Hypergraph, picked: &[usize]) -> Hypergraph {
    let mut vertices: Vec<usize> = picked
        .iter()
        .flat_map(|&e| h.edge(e).iter().copied())
        .collect();
    vertices.sort_unstable();
    vertices.dedup();
    let mut dense = vec![usize::MAX; h.vertex_count()];
    for (new, &old) in vertices.iter().enumerate() {
        dense[old] = new;
    }
    let labels: Vec<Label> = vertices.iter().map(|&v| h.label(v)).collect();
    let edges: Vec<Vec<usize>> = picked
        .iter()
        .map(|&e| h.edge(e).iter().map(|&v| dense[v]).collect())
        .collect();
    let (q, stats) = Hypergraph::new(labels, edges).expect("subquery parts are valid");
    debug_assert_eq!(stats.duplicate_edges, 0);
    q
}
