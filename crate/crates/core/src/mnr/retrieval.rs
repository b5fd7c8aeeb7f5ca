//! Nearest-neighbour name retrieval over IDF-weighted bags of context
//! subtokens.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::{candidate_order, Candidate};
use crate::corpus::MethodRecord;
use crate::java_extract::ByteSpan;
use crate::tokenize::SubtokenSeq;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("cannot build an index from an empty corpus")]
    EmptyCorpus,
    #[error("index has no entries other than the query itself")]
    EmptyIndex,
    #[error("k must be at least 1")]
    InvalidK,
}

#[derive(Debug, Clone)]
struct Entry {
    name: SubtokenSeq,
    project: String,
    path: String,
    span: ByteSpan,
    /// Sorted by term id.
    weights: Vec<(u32, f64)>,
    norm: f64,
}

/// Immutable index; queries take `&self` and can run concurrently.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    terms: HashMap<String, u32>,
    idf: Vec<f64>,
    entries: Vec<Entry>,
}

fn term_counts(record: &MethodRecord) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in record.context_tokens() {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Builds the index. Term weight is `tf * ln(N / df)` over the context
/// subtokens of each record; indicator and template words never enter.
pub fn build_retrieval_index(records: &[MethodRecord]) -> Result<RetrievalIndex, RetrievalError> {
    if records.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let mut terms: HashMap<String, u32> = HashMap::new();
    let mut df: Vec<usize> = Vec::new();
    let per_record: Vec<BTreeMap<&str, usize>> = records.iter().map(term_counts).collect();
    for counts in &per_record {
        for term in counts.keys() {
            let next = terms.len() as u32;
            let id = *terms.entry(term.to_string()).or_insert(next);
            if id as usize == df.len() {
                df.push(0);
            }
            df[id as usize] += 1;
        }
    }
    let n = records.len() as f64;
    let idf: Vec<f64> = df.iter().map(|&d| (n / d as f64).ln()).collect();

    let entries = records
        .iter()
        .zip(&per_record)
        .map(|(r, counts)| {
            let mut weights: Vec<(u32, f64)> = counts
                .iter()
                .map(|(t, &tf)| {
                    let id = terms[*t];
                    (id, tf as f64 * idf[id as usize])
                })
                .filter(|&(_, w)| w > 0.0)
                .collect();
            weights.sort_by_key(|&(id, _)| id);
            let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            Entry { name: r.name.clone(), project: r.project.clone(), path: r.path.clone(), span: r.span, weights, norm }
        })
        .collect();
    Ok(RetrievalIndex { terms, idf, entries })
}

impl RetrievalIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// IDF of a term, `None` when the term never occurs in the corpus.
    pub fn idf(&self, term: &str) -> Option<f64> {
        self.terms.get(term).map(|&id| self.idf[id as usize])
    }

    /// Ordered so that the norm is summed in a fixed order and scores are
    /// bit-for-bit reproducible across runs.
    fn query_vector(&self, record: &MethodRecord) -> (BTreeMap<u32, f64>, f64) {
        let mut vector = BTreeMap::new();
        for (term, tf) in term_counts(record) {
            if let Some(&id) = self.terms.get(term) {
                let w = tf as f64 * self.idf[id as usize];
                if w > 0.0 {
                    vector.insert(id, w);
                }
            }
        }
        let norm = vector.values().map(|w| w * w).sum::<f64>().sqrt();
        (vector, norm)
    }

    /// Cosine similarity of `record` against every indexed entry, in index order.
    pub fn scores(&self, record: &MethodRecord) -> Vec<f64> {
        let (query, qnorm) = self.query_vector(record);
        self.entries
            .iter()
            .map(|e| {
                if qnorm == 0.0 || e.norm == 0.0 {
                    return 0.0;
                }
                let dot: f64 = e.weights.iter().filter_map(|(id, w)| query.get(id).map(|q| q * w)).sum();
                (dot / (qnorm * e.norm)).clamp(0.0, 1.0)
            })
            .collect()
    }
}

/// Top-`k` distinct names among the nearest neighbours of `record`.
///
/// The query itself (same project, path and span) is never returned. A
/// name proposed by several neighbours keeps its best score.
pub fn recommend_retrieval(index: &RetrievalIndex, record: &MethodRecord, k: usize) -> Result<Vec<Candidate>, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    let scores = index.scores(record);
    let mut ranked: Vec<(usize, f64)> = index
        .entries
        .iter()
        .zip(scores)
        .enumerate()
        .filter(|(_, (e, _))| !(e.project == record.project && e.path == record.path && e.span == record.span))
        .map(|(i, (_, s))| (i, s))
        .collect();
    if ranked.is_empty() {
        return Err(RetrievalError::EmptyIndex);
    }
    ranked.sort_by(|&(i, si), &(j, sj)| {
        let (a, b) = (&index.entries[i], &index.entries[j]);
        sj.total_cmp(&si).then_with(|| a.name.cmp(&b.name)).then_with(|| (&a.project, &a.path, a.span).cmp(&(&b.project, &b.path, b.span)))
    });

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(k);
    for (i, score) in ranked {
        let name = &index.entries[i].name;
        if seen.insert(name) {
            out.push(Candidate { name: name.clone(), score });
            if out.len() == k {
                break;
            }
        }
    }
    debug_assert!(out.windows(2).all(|w| candidate_order(&w[0], &w[1]).is_le()));
    Ok(out)
}
