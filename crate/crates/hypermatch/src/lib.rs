//! Exact subhypergraph pattern matching on labeled hypergraphs.
//!
//! Given a small connected query hypergraph and a data hypergraph, the
//! engine enumerates every embedding: each set of (query hyperedge, data
//! hyperedge) pairs induced by a label-preserving isomorphism onto an induced
//! subhypergraph. Matching proceeds hyperedge by hyperedge instead of vertex
//! by vertex, so vertex permutations within one hyperedge correspondence do
//! not produce duplicate results.
//!
//! Pipeline: build a [`sigindex::SignatureIndex`] over the data hyperedges,
//! assemble a [`candidate_space::CandidateSpace`], shrink it to a fixpoint
//! with [`filter::initial_filter`], then enumerate with [`engine::match_all`].
//! The [`oracle`] module provides brute-force reference implementations used
//! to cross-check the engine.

pub mod candidate_space;
pub mod cli;
pub mod engine;
pub mod filter;
pub mod generate;
pub mod hypergraph;
pub mod oracle;
pub mod sigindex;

pub use hypergraph::{parse_hypergraph, parse_str, Hypergraph, Label, LabelTable, Signature};

/// An embedding, written as the data hyperedge id assigned to each query
/// hyperedge, indexed by query hyperedge id.
pub type Embedding = Vec<usize>;

#[cfg(test)]
pub(crate) mod test_fixture {
    use crate::hypergraph::{parse_hypergraph, Hypergraph, LabelTable};

    pub const FIXTURE_QUERY: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/sample_query.hg"
    ));
    pub const FIXTURE_DATA: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/sample_data.hg"
    ));

    /// Parses the sample query and data hypergraphs with a shared label table.
    pub fn fixture() -> (Hypergraph, Hypergraph, LabelTable) {
        let mut labels = LabelTable::new();
        let (h, _) = parse_hypergraph(FIXTURE_DATA.as_bytes(), &mut labels).unwrap();
        let (q, _) = parse_hypergraph(FIXTURE_QUERY.as_bytes(), &mut labels).unwrap();
        (q, h, labels)
    }
}
