//! Method name recommendation: input serialization, a TF-IDF retrieval
//! baseline, and the client side of the external generator protocol.

pub mod backend;
pub mod prompt;
pub mod retrieval;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::MethodRecord;
use crate::tokenize::SubtokenSeq;

pub use backend::{recommend_backend, BackendError, BackendProcess};
pub use prompt::{serialize_contexts, serialize_with, PromptError, PromptTemplate, PromptText};
pub use retrieval::{build_retrieval_index, recommend_retrieval, RetrievalError, RetrievalIndex};

/// Default number of candidates, matching a beam width of 10.
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: SubtokenSeq,
    pub score: f64,
}

/// Descending score, ties broken by ascending name.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.name.cmp(&b.name))
}

pub fn sort_candidates(candidates: &mut [Candidate]) {
    candidates.sort_by(candidate_order);
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Anything that proposes ranked names for a method.
pub trait NameGenerator: Sync {
    fn generate(&self, record: &MethodRecord, k: usize) -> Result<Vec<Candidate>, GeneratorError>;
}

impl NameGenerator for RetrievalIndex {
    fn generate(&self, record: &MethodRecord, k: usize) -> Result<Vec<Candidate>, GeneratorError> {
        Ok(recommend_retrieval(self, record, k)?)
    }
}

impl NameGenerator for BackendProcess {
    fn generate(&self, record: &MethodRecord, k: usize) -> Result<Vec<Candidate>, GeneratorError> {
        Ok(self.recommend(record, k)?)
    }
}
