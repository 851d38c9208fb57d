//! Labeled hypergraphs, their text format, and label-multiset signatures.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Interned label id. Unlabeled inputs are represented by a single shared label.
pub type Label = u32;

/// Maximum number of hyperedges a query may have; embeddings are tracked with
/// one bit per query hyperedge in a 64-bit bitmap.
pub const MAX_QUERY_EDGES: usize = 64;

/// Bidirectional mapping between label strings and dense label ids.
///
/// Matching compares label ids, so a query must be parsed against the same
/// table as its data hypergraph.
#[derive(Debug, Clone, Default)]
pub struct LabelTable {
    names: Vec<String>,
    ids: HashMap<String, Label>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, interning it if unseen.
    pub fn intern(&mut self, name: &str) -> Label {
        debug_assert!(
            !name.is_empty() && !name.contains(char::is_whitespace),
            "label must be non-empty and whitespace-free"
        );
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as Label;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<Label> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: Label) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Canonical multiset of vertex labels: the sorted list of label ids.
///
/// Two vertex sets can only correspond under a label-preserving isomorphism
/// if their signatures are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Signature(Vec<Label>);

impl Signature {
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut v: Vec<Label> = labels.into_iter().collect();
        v.sort_unstable();
        Signature(v)
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    /// Number of labels, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Counters for the normalization applied while building a hypergraph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct NormalizeStats {
    /// Vertex occurrences dropped because they repeated inside one hyperedge.
    pub repeated_vertices: usize,
    /// Hyperedges dropped because an identical vertex set appeared earlier.
    pub duplicate_edges: usize,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("hyperedge {edge} is empty")]
    EmptyEdge { edge: usize },
    #[error("hyperedge {edge} references vertex {vertex} but only {vertices} vertices exist")]
    DanglingVertex {
        edge: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("vertex {vertex} is not contained in any hyperedge")]
    UncoveredVertex { vertex: usize },
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: vertex id {vertex} out of range (|V| = {vertices})")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("line {line}: duplicate declaration for vertex {vertex}")]
    DuplicateVertex { line: usize, vertex: usize },
    #[error("expected {expected} {kind} lines, found {found}")]
    CountMismatch {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("query has no hyperedges")]
    Empty,
    #[error("query has {edges} hyperedges, the engine supports at most {MAX_QUERY_EDGES}")]
    TooManyEdges { edges: usize },
    #[error("query hyperedge adjacency graph is disconnected")]
    Disconnected,
}

/// A finite labeled hypergraph. Hyperedges are non-empty vertex sets, stored
/// as strictly ascending id lists; every vertex occurs in at least one
/// hyperedge and the edge list contains no duplicate sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_labels: Vec<Label>,
    edges: Vec<Vec<usize>>,
    /// vertex id -> ascending list of incident hyperedge ids
    incidence: Vec<Vec<usize>>,
    /// hyperedge id -> ascending list of distinct adjacent hyperedge ids
    edge_adjacency: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Builds a hypergraph from raw parts, normalizing the edge list:
    /// repeated vertices inside an edge are collapsed and later edges with an
    /// already-seen vertex set are dropped.
    pub fn new(
        vertex_labels: Vec<Label>,
        raw_edges: Vec<Vec<usize>>,
    ) -> Result<(Self, NormalizeStats), BuildError> {
        let n = vertex_labels.len();
        let mut stats = NormalizeStats::default();
        let mut edges: Vec<Vec<usize>> = Vec::with_capacity(raw_edges.len());
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, mut e) in raw_edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(BuildError::EmptyEdge { edge: i });
            }
            for &v in &e {
                if v >= n {
                    return Err(BuildError::DanglingVertex {
                        edge: i,
                        vertex: v,
                        vertices: n,
                    });
                }
            }
            e.sort_unstable();
            let before = e.len();
            e.dedup();
            stats.repeated_vertices += before - e.len();
            if seen.contains_key(&e) {
                stats.duplicate_edges += 1;
                continue;
            }
            seen.insert(e.clone(), edges.len());
            edges.push(e);
        }

        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[v].push(i);
            }
        }
        if let Some(v) = incidence.iter().position(|inc| inc.is_empty()) {
            return Err(BuildError::UncoveredVertex { vertex: v });
        }

        let mut edge_adjacency = vec![Vec::new(); edges.len()];
        for (i, e) in edges.iter().enumerate() {
            let mut adj: Vec<usize> = e
                .iter()
                .flat_map(|&v| incidence[v].iter().copied())
                .filter(|&j| j != i)
                .collect();
            adj.sort_unstable();
            adj.dedup();
            edge_adjacency[i] = adj;
        }

        Ok((
            Self {
                vertex_labels,
                edges,
                incidence,
                edge_adjacency,
            },
            stats,
        ))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: usize) -> Label {
        self.vertex_labels[v]
    }

    pub fn vertex_labels(&self) -> &[Label] {
        &self.vertex_labels
    }

    /// Vertices of hyperedge `e`, strictly ascending.
    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Hyperedges incident to vertex `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    /// Hyperedges sharing at least one vertex with `e`, ascending, excluding
    /// `e` itself.
    pub fn adjacent_edges(&self, e: usize) -> &[usize] {
        &self.edge_adjacency[e]
    }

    /// Signature of an arbitrary vertex set.
    ///
    /// Panics if a vertex id is out of range.
    pub fn signature_of(&self, vertices: &[usize]) -> Signature {
        Signature::from_labels(vertices.iter().map(|&v| self.vertex_labels[v]))
    }

    pub fn edge_signature(&self, e: usize) -> Signature {
        self.signature_of(&self.edges[e])
    }

    /// Signature of `edge(e) ∩ edge(f)`, via a linear merge of the two sorted
    /// vertex lists.
    pub fn intersection_signature(&self, e: usize, f: usize) -> Signature {
        let (a, b) = (&self.edges[e], &self.edges[f]);
        let mut labels = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    labels.push(self.vertex_labels[a[i]]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Signature::from_labels(labels)
    }

    /// Intersection of a non-empty set of hyperedges, as an ascending vertex
    /// id list.
    pub fn edges_intersection(&self, edge_ids: &[usize]) -> Vec<usize> {
        assert!(!edge_ids.is_empty(), "intersection of zero hyperedges");
        let mut acc = self.edges[edge_ids[0]].clone();
        for &e in &edge_ids[1..] {
            let other = &self.edges[e];
            acc.retain(|v| other.binary_search(v).is_ok());
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Checks the constraints a pattern must satisfy before matching: at
    /// least one hyperedge, at most [`MAX_QUERY_EDGES`], and a connected
    /// hyperedge adjacency graph.
    pub fn validate_query(&self) -> Result<(), QueryError> {
        let m = self.edges.len();
        if m == 0 {
            return Err(QueryError::Empty);
        }
        if m > MAX_QUERY_EDGES {
            return Err(QueryError::TooManyEdges { edges: m });
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(e) = stack.pop() {
            for &n in &self.edge_adjacency[e] {
                if !seen[n] {
                    seen[n] = true;
                    reached += 1;
                    stack.push(n);
                }
            }
        }
        if reached != m {
            return Err(QueryError::Disconnected);
        }
        Ok(())
    }

    /// Serializes in the same text format accepted by [`parse_hypergraph`]:
    /// vertex lines ascending by id, hyperedges in id order with ascending
    /// vertex ids.
    pub fn write_text<W: Write>(&self, labels: &LabelTable, w: &mut W) -> io::Result<()> {
        writeln!(w, "t {} {}", self.vertex_count(), self.edge_count())?;
        for (v, &l) in self.vertex_labels.iter().enumerate() {
            writeln!(w, "v {} {}", v, labels.name(l))?;
        }
        for e in &self.edges {
            write!(w, "e")?;
            for v in e {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_text(&self, labels: &LabelTable) -> String {
        let mut out = Vec::new();
        self.write_text(labels, &mut out).expect("write to vec");
        String::from_utf8(out).expect("text format is utf-8")
    }
}

/// Parses the line-oriented text format:
///
/// ```text
/// # comment
/// t <|V|> <|E|>
/// v <vertex-id> <label>     (exactly |V| lines, any order)
/// e <v> <v> ...             (exactly |E| lines, ≥ 1 vertex each)
/// ```
///
/// Labels are interned into `labels` in order of first appearance, so parsing
/// a query with the data hypergraph's table keeps label ids comparable.
pub fn parse_hypergraph<R: BufRead>(
    reader: R,
    labels: &mut LabelTable,
) -> Result<(Hypergraph, NormalizeStats), ParseError> {
    let malformed = |line: usize, msg: &str| ParseError::Malformed {
        line,
        msg: msg.to_string(),
    };

    let mut header: Option<(usize, usize)> = None;
    let mut vertex_labels: Vec<Option<Label>> = Vec::new();
    let mut vertices_seen = 0usize;
    let mut raw_edges: Vec<Vec<usize>> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let tag = tokens.next().expect("non-empty line has a first token");
        match tag {
            "t" => {
                if header.is_some() {
                    return Err(malformed(lineno, "duplicate header line"));
                }
                let nv: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(lineno, "header needs 't <|V|> <|E|>'"))?;
                let ne: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(lineno, "header needs 't <|V|> <|E|>'"))?;
                if tokens.next().is_some() {
                    return Err(malformed(lineno, "trailing tokens after header"));
                }
                header = Some((nv, ne));
                vertex_labels = vec![None; nv];
            }
            "v" => {
                let (nv, _) =
                    header.ok_or_else(|| malformed(lineno, "vertex line before header"))?;
                let v: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(lineno, "vertex line needs 'v <id> <label>'"))?;
                let label = tokens
                    .next()
                    .ok_or_else(|| malformed(lineno, "vertex line needs 'v <id> <label>'"))?;
                if tokens.next().is_some() {
                    return Err(malformed(lineno, "trailing tokens after vertex line"));
                }
                if v >= nv {
                    return Err(ParseError::VertexOutOfRange {
                        line: lineno,
                        vertex: v,
                        vertices: nv,
                    });
                }
                if vertex_labels[v].is_some() {
                    return Err(ParseError::DuplicateVertex {
                        line: lineno,
                        vertex: v,
                    });
                }
                vertex_labels[v] = Some(labels.intern(label));
                vertices_seen += 1;
            }
            "e" => {
                let (nv, ne) =
                    header.ok_or_else(|| malformed(lineno, "edge line before header"))?;
                if raw_edges.len() == ne {
                    return Err(malformed(lineno, "more edge lines than declared"));
                }
                let mut edge = Vec::new();
                for t in tokens {
                    let v: usize = t
                        .parse()
                        .map_err(|_| malformed(lineno, "edge line needs integer vertex ids"))?;
                    if v >= nv {
                        return Err(ParseError::VertexOutOfRange {
                            line: lineno,
                            vertex: v,
                            vertices: nv,
                        });
                    }
                    edge.push(v);
                }
                if edge.is_empty() {
                    return Err(malformed(lineno, "hyperedge needs at least one vertex"));
                }
                raw_edges.push(edge);
            }
            _ => return Err(malformed(lineno, "unknown line tag")),
        }
    }

    let (nv, ne) = header.ok_or_else(|| malformed(0, "missing 't <|V|> <|E|>' header"))?;
    if vertices_seen != nv {
        return Err(ParseError::CountMismatch {
            kind: "vertex",
            expected: nv,
            found: vertices_seen,
        });
    }
    if raw_edges.len() != ne {
        return Err(ParseError::CountMismatch {
            kind: "edge",
            expected: ne,
            found: raw_edges.len(),
        });
    }
    let vertex_labels: Vec<Label> = vertex_labels
        .into_iter()
        .map(|l| l.expect("all vertices declared"))
        .collect();
    let (h, stats) = Hypergraph::new(vertex_labels, raw_edges)?;
    Ok((h, stats))
}

/// Convenience wrapper that parses with a fresh label table.
pub fn parse_str(text: &str) -> Result<(Hypergraph, LabelTable, NormalizeStats), ParseError> {
    let mut labels = LabelTable::new();
    let (h, stats) = parse_hypergraph(text.as_bytes(), &mut labels)?;
    Ok((h, labels, stats))
}
