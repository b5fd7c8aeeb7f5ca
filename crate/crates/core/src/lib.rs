//! Method-naming workbench.
//!
//! Extracts multi-level method contexts from Java sources, builds corpora,
//! synthesizes hard negative names, checks name/implementation consistency
//! (classification and generate-then-compare), recommends names through a
//! retrieval baseline or an external generator process, and evaluates the
//! results.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod java_extract;
pub mod mcc;
pub mod mnr;
pub mod negsample;
pub mod quality;
pub mod tokenize;
