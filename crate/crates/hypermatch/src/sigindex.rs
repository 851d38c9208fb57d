//! Signature index: partitions data hyperedges by their label signature.
//!
//! Candidate sets are seeded by signature lookup, so the index is the only
//! per-dataset structure the matcher needs; no inverted vertex-to-hyperedge
//! index is kept.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hypergraph::{Hypergraph, Label, Signature};

const CACHE_MAGIC: &[u8; 8] = b"hmsigix1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache file is truncated or malformed")]
    Malformed,
    #[error("cache was built from a different input file")]
    HashMismatch,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Partition of the hyperedge ids of one hypergraph by signature. Buckets
/// are kept in signature order and each bucket lists edge ids ascending, so
/// iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureIndex {
    buckets: BTreeMap<Signature, Vec<usize>>,
}

impl SignatureIndex {
    pub fn build(h: &Hypergraph) -> Self {
        let mut buckets: BTreeMap<Signature, Vec<usize>> = BTreeMap::new();
        for e in 0..h.edge_count() {
            buckets.entry(h.edge_signature(e)).or_default().push(e);
        }
        Self { buckets }
    }

    /// Hyperedge ids whose signature equals `sig`, ascending; empty if none.
    pub fn lookup(&self, sig: &Signature) -> &[usize] {
        self.buckets.get(sig).map_or(&[], Vec::as_slice)
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Signature, &[usize])> {
        self.buckets.iter().map(|(s, v)| (s, v.as_slice()))
    }

    /// Writes a binary cache of the index, keyed by a digest of the source
    /// file bytes. [`load`](Self::load) with the same digest returns an index
    /// equal to the one that was saved.
    pub fn save(&self, path: &Path, content_hash: &[u8; 32]) -> Result<(), CacheError> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(content_hash);
        write_u64(&mut out, self.buckets.len() as u64);
        for (sig, ids) in &self.buckets {
            write_u64(&mut out, sig.len() as u64);
            for &l in sig.as_slice() {
                out.extend_from_slice(&l.to_le_bytes());
            }
            write_u64(&mut out, ids.len() as u64);
            for &id in ids {
                write_u64(&mut out, id as u64);
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path, content_hash: &[u8; 32]) -> Result<Self, CacheError> {
        let bytes = fs::read(path)?;
        let mut r = bytes.as_slice();
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(CacheError::Malformed);
        }
        let mut stored = [0u8; 32];
        read_exact(&mut r, &mut stored)?;
        if &stored != content_hash {
            return Err(CacheError::HashMismatch);
        }
        let nbuckets = read_u64(&mut r)?;
        let mut buckets = BTreeMap::new();
        for _ in 0..nbuckets {
            let siglen = read_u64(&mut r)? as usize;
            let mut labels = Vec::with_capacity(siglen);
            for _ in 0..siglen {
                let mut b = [0u8; 4];
                read_exact(&mut r, &mut b)?;
                labels.push(Label::from_le_bytes(b));
            }
            let nids = read_u64(&mut r)? as usize;
            let mut ids = Vec::with_capacity(nids);
            for _ in 0..nids {
                ids.push(read_u64(&mut r)? as usize);
            }
            buckets.insert(Signature::from_labels(labels), ids);
        }
        if !r.is_empty() {
            return Err(CacheError::Malformed);
        }
        Ok(Self { buckets })
    }
}

/// SHA-256 of the raw bytes of a hypergraph file; keys the index cache.
pub fn content_hash(bytes: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().into()
}

fn write_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn read_u64(r: &mut &[u8]) -> Result<u64, CacheError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<(), CacheError> {
    r.read_exact(buf).map_err(|_| CacheError::Malformed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::parse_str;
    use crate::test_fixture::{fixture, FIXTURE_DATA};

    #[test]
    fn fixture_buckets() {
        let (q, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        // Exactly two data edges share the query edge 0 signature.
        assert_eq!(idx.lookup(&q.edge_signature(0)), &[0, 1]);
        // The arity-3 all-A bucket holds edges 2..=5, including edge 2.
        let bucket = idx.lookup(&q.edge_signature(1));
        assert_eq!(bucket, &[2, 3, 4, 5]);
        // The arity-2 bucket backs query edge 2.
        assert_eq!(idx.lookup(&q.edge_signature(2)), &[6, 7, 8]);
        assert_eq!(idx.bucket_count(), 3);
    }

    #[test]
    fn lookup_by_own_signature_contains_edge() {
        let (_, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        for e in 0..h.edge_count() {
            assert!(idx.lookup(&h.edge_signature(e)).contains(&e));
        }
    }

    #[test]
    fn lookup_of_unknown_signature_is_empty() {
        let (_, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        assert!(idx.lookup(&Signature::from_labels([42])).is_empty());
    }

    #[test]
    fn single_edge_graph_has_one_bucket() {
        let (h, _, _) = parse_str("t 2 1\nv 0 A\nv 1 B\ne 0 1\n").unwrap();
        let idx = SignatureIndex::build(&h);
        assert_eq!(idx.bucket_count(), 1);
        assert_eq!(idx.lookup(&h.edge_signature(0)), &[0]);
    }

    #[test]
    fn build_is_idempotent() {
        let (_, h, _) = fixture();
        assert_eq!(SignatureIndex::build(&h), SignatureIndex::build(&h));
    }

    #[test]
    fn buckets_partition_the_edge_set() {
        let (_, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        let mut all: Vec<usize> = idx.iter().flat_map(|(_, ids)| ids.to_vec()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..h.edge_count()).collect::<Vec<_>>());
        for (sig, ids) in idx.iter() {
            for &e in ids {
                assert_eq!(&h.edge_signature(e), sig);
            }
        }
    }

    #[test]
    fn cache_round_trips() {
        let (_, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        let hash = content_hash(FIXTURE_DATA.as_bytes());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.sigidx");
        idx.save(&path, &hash).unwrap();
        let loaded = SignatureIndex::load(&path, &hash).unwrap();
        assert_eq!(idx, loaded);
    }

    #[test]
    fn cache_rejects_foreign_hash() {
        let (_, h, _) = fixture();
        let idx = SignatureIndex::build(&h);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.sigidx");
        idx.save(&path, &content_hash(b"one")).unwrap();
        let err = SignatureIndex::load(&path, &content_hash(b"two")).unwrap_err();
        assert!(matches!(err, CacheError::HashMismatch));
    }

    #[test]
    fn cache_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("garbage.sigidx");
        std::fs::write(&path, b"not a cache").unwrap();
        let err = SignatureIndex::load(&path, &content_hash(b"x")).unwrap_err();
        assert!(matches!(err, CacheError::Malformed));
    }
}
