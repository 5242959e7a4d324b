//! Per-variable candidate sets compressed into fixed-length bit vectors.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hash::{fnv1a64_seeded, CANDIDATE_SEED};
use crate::partition::Fragment;
use crate::query::{QueryGraph, ResolvedQuery};
use crate::term::Term;

pub const DEFAULT_BITS: u32 = 8192;

/// Bytes of the variable index and bit-length fields preceding the payload.
pub const VECTOR_HEADER_BYTES: usize = 6;

/// Fixed-length bit vector holding hashed candidates of one query variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateBitVector {
    variable: u16,
    len: u32,
    words: Vec<u64>,
}

/// Bit position of `t` in a vector of `len` bits.
pub fn candidate_bit(t: &Term, len: u32) -> u32 {
    (fnv1a64_seeded(CANDIDATE_SEED, t.lexical.as_bytes()) % u64::from(len)) as u32
}

impl CandidateBitVector {
    pub fn new(variable: u16, len: u32) -> Result<Self> {
        if len == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(CandidateBitVector { variable, len, words: vec![0; (len as usize).div_ceil(64)] })
    }

    pub fn variable(&self) -> u16 {
        self.variable
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, bit: u32) -> bool {
        bit < self.len && self.words[(bit / 64) as usize] >> (bit % 64) & 1 == 1
    }

    pub fn set(&mut self, bit: u32) {
        assert!(bit < self.len, "bit {bit} out of range {}", self.len);
        self.words[(bit / 64) as usize] |= 1 << (bit % 64);
    }

    pub fn insert(&mut self, t: &Term) {
        self.set(candidate_bit(t, self.len));
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).filter(|&b| self.get(b))
    }

    /// True iff the bit of `t` is set. Never false for an inserted term.
    pub fn admits(&self, t: &Term) -> bool {
        self.get(candidate_bit(t, self.len))
    }

    pub fn or_assign(&mut self, other: &CandidateBitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(self.len as usize, other.len as usize));
        }
        if self.variable != other.variable {
            return Err(Error::VariableMismatch(self.variable, other.variable));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    /// Exact length of [`Self::encode`].
    pub fn wire_len(&self) -> usize {
        VECTOR_HEADER_BYTES + (self.len as usize).div_ceil(8)
    }

    /// Little-endian wire form: variable u16, bit length u32, payload.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&self.variable.to_le_bytes());
        out.extend_from_slice(&self.len.to_le_bytes());
        let payload: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.extend_from_slice(&payload[..(self.len as usize).div_ceil(8)]);
        out
    }
}

/// Sets the bit of every candidate.
pub fn compress<'a>(
    cands: impl IntoIterator<Item = &'a Term>,
    variable: u16,
    len: u32,
) -> Result<CandidateBitVector> {
    let mut bv = CandidateBitVector::new(variable, len)?;
    for t in cands {
        bv.insert(t);
    }
    Ok(bv)
}

/// Bitwise OR of per-site vectors for one variable.
pub fn aggregate(vectors: &[CandidateBitVector]) -> Result<CandidateBitVector> {
    let (first, rest) = vectors.split_first().ok_or(Error::ZeroLength)?;
    let mut acc = first.clone();
    for v in rest {
        acc.or_assign(v)?;
    }
    Ok(acc)
}

/// Internal vertices of `frag` that satisfy every triple pattern touching
/// variable vertex `v`, looking only at edges stored in the fragment.
pub fn local_candidates(frag: &Fragment, q: &QueryGraph, v: usize) -> Result<BTreeSet<Term>> {
    if v >= q.vertex_count() || !q.is_variable(v) {
        return Err(Error::UnknownVariable(format!("vertex #{v}")));
    }
    let rq = ResolvedQuery::new(q, frag.vocab());
    Ok(local_candidates_resolved(frag, &rq, v))
}

pub(crate) fn local_candidates_resolved(frag: &Fragment, rq: &ResolvedQuery, v: usize) -> BTreeSet<Term> {
    let q = &rq.query;
    let adj = frag.adj();
    frag.internal_vertices()
        .iter()
        .filter(|&&x| {
            q.incident(v).iter().all(|&e| {
                let qe = q.edge(e);
                if qe.src == v && qe.dst == v {
                    adj.labels_between(x, x).iter().any(|&l| rq.label_ok(e, l))
                } else if qe.src == v {
                    adj.out(x).iter().any(|&(l, y)| rq.label_ok(e, l) && rq.vertex_ok(qe.dst, y))
                } else {
                    adj.inc(x).iter().any(|&(l, y)| rq.label_ok(e, l) && rq.vertex_ok(qe.src, y))
                }
            })
        })
        .map(|&x| frag.term(x).clone())
        .collect()
}

/// Aggregated vectors indexed by query vertex; vertices without a vector
/// (constants) are unrestricted.
#[derive(Debug, Clone, Default)]
pub struct CandidateFilter {
    vectors: Vec<Option<CandidateBitVector>>,
}

impl CandidateFilter {
    pub fn new(vertex_count: usize) -> Self {
        CandidateFilter { vectors: vec![None; vertex_count] }
    }

    pub fn set(&mut self, v: usize, bv: CandidateBitVector) {
        self.vectors[v] = Some(bv);
    }

    pub fn get(&self, v: usize) -> Option<&CandidateBitVector> {
        self.vectors.get(v).and_then(Option::as_ref)
    }

    pub fn admits(&self, v: usize, t: &Term) -> bool {
        self.get(v).is_none_or(|bv| bv.admits(t))
    }
}
