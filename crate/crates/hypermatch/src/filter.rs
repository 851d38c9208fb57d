//! Worklist filtering of the candidate space down to its pairwise fixpoint:
//! every surviving candidate keeps at least one live connection toward every
//! adjacent query hyperedge.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::candidate_space::CandidateSpace;
use crate::hypergraph::Hypergraph;

/// Counters describing one filtering run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct FilterStats {
    pub candidates_before: usize,
    pub candidates_after: usize,
    /// Live connections (unordered candidate pairs) before and after.
    pub connections_before: usize,
    pub connections_after: usize,
    /// Candidate examinations performed while popping worklist pairs; the
    /// filter's total work is proportional to this count.
    pub pairs_processed: u64,
}

/// Runs the filter with the deterministic default worklist order.
pub fn initial_filter(q: &Hypergraph, cs: &mut CandidateSpace) -> FilterStats {
    initial_filter_seeded(q, cs, None)
}

/// Runs the filter, optionally shuffling the initial worklist order. The
/// surviving candidate sets are a unique fixpoint and do not depend on the
/// order; only the processing sequence does.
///
/// The worklist holds ordered adjacent pairs (e, e'). Popping (e, e') drops
/// every candidate f of e whose recorded connections toward e' are all dead,
/// and any removal re-enqueues (e'', e) for the other edges e'' adjacent to
/// e, with a presence flag per pair to avoid duplicates in the queue.
pub fn initial_filter_seeded(
    q: &Hypergraph,
    cs: &mut CandidateSpace,
    shuffle_seed: Option<u64>,
) -> FilterStats {
    let m = q.edge_count();
    let mut stats = FilterStats {
        candidates_before: cs.total_candidates(),
        connections_before: cs.live_connection_count(q),
        ..FilterStats::default()
    };

    let mut initial: Vec<(usize, usize)> = (0..m)
        .flat_map(|e| (0..q.adjacent_edges(e).len()).map(move |slot| (e, slot)))
        .collect();
    if let Some(seed) = shuffle_seed {
        initial.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut in_queue: Vec<Vec<bool>> = (0..m)
        .map(|e| vec![true; q.adjacent_edges(e).len()])
        .collect();
    let mut queue: VecDeque<(usize, usize)> = initial.into();

    while let Some((e, slot)) = queue.pop_front() {
        in_queue[e][slot] = false;
        let e2 = q.adjacent_edges(e)[slot];
        let snapshot: Vec<usize> = cs.live(e).to_vec();
        let mut removed_any = false;
        for f in snapshot {
            stats.pairs_processed += 1;
            let alive = cs.connections(e, slot, f).any(|f2| cs.contains(e2, f2));
            if !alive {
                cs.remove_candidate(e, f);
                removed_any = true;
            }
        }
        if removed_any {
            // Candidates of edges adjacent to e may have depended on the
            // removed candidates; re-examine those pairs against e.
            for &e3 in q.adjacent_edges(e) {
                if e3 == e2 {
                    continue;
                }
                let back = cs.adjacency_slot(e3, e).expect("adjacency is symmetric");
                if !in_queue[e3][back] {
                    in_queue[e3][back] = true;
                    queue.push_back((e3, back));
                }
            }
        }
    }

    stats.candidates_after = cs.total_candidates();
    stats.connections_after = cs.live_connection_count(q);
    stats
}
