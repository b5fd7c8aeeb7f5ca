//! Normalized method records, truncation limits, corpus files and
//! project-disjoint splits.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::java_extract::{ByteSpan, RawMethod};
use crate::mnr::prompt::{token_count, MAX_INPUT_TOKENS};
use crate::tokenize::{split_identifier, SubtokenSeq};

pub const MAX_SIBLINGS: usize = 10;
pub const MAX_ATTRIBUTES: usize = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("method name `{0}` has no subtokens")]
    NameUnsplittable(String),
    #[error("need at least 3 distinct projects to split, found {0}")]
    TooFewProjects(usize),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

/// One method with all of its contexts as subtoken sequences.
///
/// Serialized field order is fixed and is the corpus line schema.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub name: SubtokenSeq,
    /// Parameter names, then parameter types, then the return type.
    pub signature: SubtokenSeq,
    pub body: SubtokenSeq,
    pub class_name: SubtokenSeq,
    pub siblings: Vec<SubtokenSeq>,
    /// Attribute name subtokens followed by attribute type subtokens.
    pub attributes: Vec<SubtokenSeq>,
    #[serde(rename = "project")]
    pub project: String,
    pub path: String,
    pub span: ByteSpan,
}

impl MethodRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.name.is_empty() {
            return Err("name is empty".into());
        }
        if self.siblings.len() > MAX_SIBLINGS {
            return Err(format!("{} siblings exceed the limit of {MAX_SIBLINGS}", self.siblings.len()));
        }
        if self.attributes.len() > MAX_ATTRIBUTES {
            return Err(format!("{} attributes exceed the limit of {MAX_ATTRIBUTES}", self.attributes.len()));
        }
        if self.siblings.iter().chain(&self.attributes).any(SubtokenSeq::is_empty) {
            return Err("empty sibling or attribute entry".into());
        }
        let count = token_count(self);
        if count > MAX_INPUT_TOKENS {
            return Err(format!("{count} input tokens exceed the limit of {MAX_INPUT_TOKENS}"));
        }
        if self.span.start > self.span.end {
            return Err("span start is after span end".into());
        }
        Ok(())
    }

    /// Context subtokens in serialization order, without indicator words.
    pub fn context_tokens(&self) -> impl Iterator<Item = &String> {
        self.class_name
            .iter()
            .chain(self.attributes.iter().flatten())
            .chain(self.siblings.iter().flatten())
            .chain(self.signature.iter())
            .chain(self.body.iter())
    }
}

fn split_all<'a>(idents: impl IntoIterator<Item = &'a String>) -> SubtokenSeq {
    let mut out = SubtokenSeq::empty();
    for ident in idents {
        if let Ok(seq) = split_identifier(ident) {
            out.extend(&seq);
        }
    }
    out
}

/// Splits every identifier, keeps the first ten siblings and attributes,
/// and trims contexts until the serialized input fits in 512 tokens.
///
/// Trimming order: body from its tail, then whole siblings from the tail,
/// whole attributes from the tail, class name, and as a last resort the
/// signature. The name is never trimmed.
pub fn normalize(raw: &RawMethod) -> Result<MethodRecord, CorpusError> {
    let name = split_identifier(&raw.name).map_err(|_| CorpusError::NameUnsplittable(raw.name.clone()))?;
    let signature = split_all(raw.param_names.iter().chain(&raw.param_types).chain(std::iter::once(&raw.return_type)));
    let siblings = raw.sibling_names.iter().filter_map(|s| split_identifier(s).ok()).take(MAX_SIBLINGS).collect();
    let attributes = raw.attribute_entries.iter().map(|(n, t)| split_all([n, t])).filter(|s| !s.is_empty()).take(MAX_ATTRIBUTES).collect();
    let mut record = MethodRecord {
        name,
        signature,
        body: split_all(&raw.body_identifiers),
        class_name: split_all([&raw.class_name]),
        siblings,
        attributes,
        project: raw.project_id.clone(),
        path: raw.path.clone(),
        span: raw.byte_span,
    };
    fit_budget(&mut record, MAX_INPUT_TOKENS);
    Ok(record)
}

fn trim_tail(seq: &mut SubtokenSeq, excess: usize) {
    seq.truncate(seq.len().saturating_sub(excess));
}

fn fit_budget(record: &mut MethodRecord, budget: usize) {
    let over = |r: &MethodRecord| token_count(r).saturating_sub(budget);

    let excess = over(record);
    if excess == 0 {
        return;
    }
    if record.body.len() > excess {
        trim_tail(&mut record.body, excess);
        return;
    }
    record.body = SubtokenSeq::empty();
    while over(record) > 0 && record.siblings.pop().is_some() {}
    while over(record) > 0 && record.attributes.pop().is_some() {}
    let excess = over(record);
    if excess > 0 {
        trim_tail(&mut record.class_name, excess);
    }
    let excess = over(record);
    if excess > 0 {
        trim_tail(&mut record.signature, excess);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: Vec<MethodRecord>,
    pub validation: Vec<MethodRecord>,
    pub test: Vec<MethodRecord>,
}

impl CorpusSplit {
    pub fn parts(&self) -> [&[MethodRecord]; 3] {
        [&self.train, &self.validation, &self.test]
    }
}

/// Splits records so that no project contributes to two parts.
///
/// Projects are sorted, shuffled with the seed, and the first ones seed
/// each part with a positive ratio; every remaining project then goes to
/// the part furthest below its record-count target (ties: earliest part).
/// Records keep their input order within a part.
pub fn split_by_project(records: Vec<MethodRecord>, ratios: [f64; 3], seed: u64) -> Result<CorpusSplit, CorpusError> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(CorpusError::InvalidRatios(format!("{ratios:?} has a value outside [0, 1]")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidRatios(format!("{ratios:?} sums to {sum}")));
    }

    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *sizes.entry(r.project.as_str()).or_default() += 1;
    }
    if sizes.len() < 3 {
        return Err(CorpusError::TooFewProjects(sizes.len()));
    }
    let mut projects: Vec<(&str, usize)> = sizes.into_iter().collect();
    projects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let total = records.len() as f64;
    let targets: Vec<f64> = ratios.iter().map(|r| r * total).collect();
    let mut filled = [0usize; 3];
    let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
    let mut queue = projects.into_iter();

    for part in (0..3).filter(|&p| ratios[p] > 0.0) {
        let (project, size) = queue.next().expect("at least three projects");
        filled[part] += size;
        assignment.insert(project.to_string(), part);
    }
    for (project, size) in queue {
        let mut best = 0;
        for part in 1..3 {
            let deficit = |p: usize| targets[p] - filled[p] as f64;
            if deficit(part) > deficit(best) {
                best = part;
            }
        }
        filled[best] += size;
        assignment.insert(project.to_string(), best);
    }

    let mut split = CorpusSplit::default();
    for r in records {
        match assignment[&r.project] {
            0 => split.train.push(r),
            1 => split.validation.push(r),
            _ => split.test.push(r),
        }
    }
    Ok(split)
}

pub fn write_records<W: Write>(mut out: W, records: &[MethodRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads JSON-lines records; blank lines are ignored. Line numbers in
/// errors are 1-based.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<MethodRecord>, CorpusError> {
    read_lines(input, |r: &MethodRecord| r.validate())
}

pub(crate) fn read_lines<T, R, V>(input: R, validate: V) -> Result<Vec<T>, CorpusError>
where
    T: serde::de::DeserializeOwned,
    R: BufRead,
    V: Fn(&T) -> Result<(), String>,
{
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::MalformedLine { line: line_no, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine { line: line_no, reason: e.to_string() })?;
        validate(&item).map_err(|reason| CorpusError::MalformedLine { line: line_no, reason })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_corpus(path: &Path, records: &[MethodRecord]) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    write_records(BufWriter::new(file), records).map_err(io_err)
}

pub fn read_corpus(path: &Path) -> Result<Vec<MethodRecord>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    read_records(BufReader::new(file))
}

/// Distinct project ids, sorted.
pub fn projects(records: &[MethodRecord]) -> BTreeSet<&str> {
    records.iter().map(|r| r.project.as_str()).collect()
}
