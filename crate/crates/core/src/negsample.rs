//! Hard negative sampling.
//!
//! An [`EditDistribution`] is estimated from rename pairs by aligning old
//! and new names token by token. [`corrupt_name`] then applies sampled
//! per-token edits to a consistent name to produce a related but
//! inconsistent one.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{read_lines, CorpusError, MethodRecord};
use crate::tokenize::{split_identifier, SubtokenSeq};

/// Rejection rounds before a corruption falls back to a forced replace.
pub const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Error)]
pub enum NegSampleError {
    #[error("no rename pairs given")]
    EmptyPairs,
    #[error("invalid edit distribution: {0}")]
    InvalidDistribution(String),
    #[error("cannot produce a different name: {0}")]
    DegenerateDistribution(String),
    #[error("cannot corrupt an empty name")]
    EmptyName,
    #[error("no records to sample from")]
    EmptyRecords,
    #[error("negative ratio must be positive and finite, got {0}")]
    InvalidRatio(f64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

impl From<CorpusError> for NegSampleError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::MalformedLine { line, reason } => NegSampleError::MalformedLine { line, reason },
            CorpusError::Io { path, source } => NegSampleError::Io { path, source },
            other => NegSampleError::MalformedLine { line: 0, reason: other.to_string() },
        }
    }
}

/// Token-level edit operations. The declaration order is the alignment
/// tie-break preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Keep,
    Replace,
    Delete,
    Add,
}

impl EditOp {
    pub const ALL: [EditOp; 4] = [EditOp::Keep, EditOp::Replace, EditOp::Delete, EditOp::Add];

    /// Position in `OpCounts`.
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Counts indexed by [`EditOp`] declaration order.
pub type OpCounts = [u64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditDistribution {
    pub p_keep: f64,
    pub p_add: f64,
    pub p_delete: f64,
    pub p_replace: f64,
}

impl Default for EditDistribution {
    /// A configuration default, not an estimate from real rename data.
    fn default() -> Self {
        Self { p_keep: 0.70, p_add: 0.08, p_delete: 0.10, p_replace: 0.12 }
    }
}

impl EditDistribution {
    pub fn new(p_keep: f64, p_add: f64, p_delete: f64, p_replace: f64) -> Result<Self, NegSampleError> {
        let d = Self { p_keep, p_add, p_delete, p_replace };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), NegSampleError> {
        let ps = [self.p_keep, self.p_add, self.p_delete, self.p_replace];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(NegSampleError::InvalidDistribution(format!("probabilities must lie in [0, 1]: {ps:?}")));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(NegSampleError::InvalidDistribution(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn prob(&self, op: EditOp) -> f64 {
        match op {
            EditOp::Keep => self.p_keep,
            EditOp::Add => self.p_add,
            EditOp::Delete => self.p_delete,
            EditOp::Replace => self.p_replace,
        }
    }

    pub fn from_counts(counts: &OpCounts) -> Option<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let p = |op: EditOp| counts[op.index()] as f64 / total as f64;
        Some(Self { p_keep: p(EditOp::Keep), p_add: p(EditOp::Add), p_delete: p(EditOp::Delete), p_replace: p(EditOp::Replace) })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> EditOp {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for op in [EditOp::Keep, EditOp::Add, EditOp::Delete] {
            acc += self.prob(op);
            if u < acc {
                return op;
            }
        }
        // Guard against rounding when p_replace is zero.
        if self.p_replace > 0.0 {
            EditOp::Replace
        } else {
            EditOp::ALL.into_iter().rev().find(|&op| self.prob(op) > 0.0).unwrap_or(EditOp::Keep)
        }
    }
}

/// Minimal unit-cost edit script turning `old` into `new`. Among all
/// minimal scripts the one that is lexicographically smallest under
/// keep < replace < delete < add is returned.
pub fn align(old: &[String], new: &[String]) -> Vec<EditOp> {
    let (n, m) = (old.len(), new.len());
    // cost[i][j]: minimal cost of turning old[i..] into new[j..]
    let mut cost = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            cost[i][j] = if i == n {
                (m - j) as u32
            } else if j == m {
                (n - i) as u32
            } else {
                let diag = cost[i + 1][j + 1] + u32::from(old[i] != new[j]);
                diag.min(cost[i + 1][j] + 1).min(cost[i][j + 1] + 1)
            };
        }
    }

    let mut script = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let here = cost[i][j];
        let op = if i < n && j < m && old[i] == new[j] && cost[i + 1][j + 1] == here {
            EditOp::Keep
        } else if i < n && j < m && old[i] != new[j] && cost[i + 1][j + 1] + 1 == here {
            EditOp::Replace
        } else if i < n && cost[i + 1][j] + 1 == here {
            EditOp::Delete
        } else {
            EditOp::Add
        };
        match op {
            EditOp::Keep | EditOp::Replace => {
                i += 1;
                j += 1;
            }
            EditOp::Delete => i += 1,
            EditOp::Add => j += 1,
        }
        script.push(op);
    }
    script
}

pub fn tally(script: &[EditOp]) -> OpCounts {
    let mut counts = [0; 4];
    for op in script {
        counts[op.index()] += 1;
    }
    counts
}

pub fn estimate_edit_distribution(pairs: &[(SubtokenSeq, SubtokenSeq)]) -> Result<EditDistribution, NegSampleError> {
    if pairs.is_empty() {
        return Err(NegSampleError::EmptyPairs);
    }
    let counts = pairs
        .par_iter()
        .map(|(old, new)| tally(&align(old.tokens(), new.tokens())))
        .reduce(|| [0; 4], |a, b| std::array::from_fn(|k| a[k] + b[k]));
    // Two empty names would give an empty script; treat as identity.
    Ok(EditDistribution::from_counts(&counts).unwrap_or(EditDistribution { p_keep: 1.0, p_add: 0.0, p_delete: 0.0, p_replace: 0.0 }))
}

/// Parses `old<TAB>new` identifier lines. Blank lines are skipped.
pub fn read_rename_pairs<R: BufRead>(input: R) -> Result<Vec<(SubtokenSeq, SubtokenSeq)>, NegSampleError> {
    let mut pairs = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| NegSampleError::MalformedLine { line: line_no, reason: e.to_string() })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| NegSampleError::MalformedLine { line: line_no, reason };
        let (old, new) = line.split_once('\t').ok_or_else(|| malformed("expected `old<TAB>new`".into()))?;
        let old = split_identifier(old.trim()).map_err(|e| malformed(e.to_string()))?;
        let new = split_identifier(new.trim()).map_err(|e| malformed(e.to_string()))?;
        pairs.push((old, new));
    }
    Ok(pairs)
}

pub fn read_rename_pairs_file(path: &Path) -> Result<Vec<(SubtokenSeq, SubtokenSeq)>, NegSampleError> {
    let file = File::open(path).map_err(|source| NegSampleError::Io { path: path.to_path_buf(), source })?;
    read_rename_pairs(BufReader::new(file))
}

/// Subtoken frequency table used for add and replace draws.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    cumulative: Vec<u64>,
}

impl Vocabulary {
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let mut v = Self::default();
        let mut acc = 0;
        for (token, count) in counts.into_iter().filter(|(_, c)| *c > 0) {
            acc += count;
            v.tokens.push(token);
            v.counts.push(count);
            v.cumulative.push(acc);
        }
        v
    }

    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a SubtokenSeq>) -> Self {
        let mut counts = BTreeMap::new();
        for name in names {
            for t in name {
                *counts.entry(t.clone()).or_insert(0) += 1;
            }
        }
        Self::from_counts(counts)
    }

    /// Vocabulary over the method names of `records`; pass the training
    /// split to keep negatives in-distribution.
    pub fn from_records(records: &[MethodRecord]) -> Self {
        Self::from_names(records.iter().map(|r| &r.name))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn count(&self, token: &str) -> u64 {
        self.position(token).map_or(0, |i| self.counts[i])
    }

    fn position(&self, token: &str) -> Option<usize> {
        self.tokens.binary_search_by(|t| t.as_str().cmp(token)).ok()
    }

    /// Whether some token other than `token` can be drawn.
    pub fn has_alternative(&self, token: &str) -> bool {
        self.total() > self.count(token)
    }

    fn index_at(&self, x: u64) -> usize {
        self.cumulative.partition_point(|&c| c <= x)
    }

    /// Frequency-weighted draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<&str> {
        if self.is_empty() {
            return None;
        }
        let x = rng.gen_range(0..self.total());
        Some(&self.tokens[self.index_at(x)])
    }

    /// Frequency-weighted draw conditioned on differing from `token`.
    pub fn sample_excluding<R: Rng>(&self, token: &str, rng: &mut R) -> Option<&str> {
        let Some(pos) = self.position(token) else {
            return self.sample(rng);
        };
        let span = self.total() - self.counts[pos];
        if span == 0 {
            return None;
        }
        let mut x = rng.gen_range(0..span);
        let before = self.cumulative[pos] - self.counts[pos];
        if x >= before {
            x += self.counts[pos];
        }
        Some(&self.tokens[self.index_at(x)])
    }
}

/// A corrupted name plus the bookkeeping needed to audit the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub name: SubtokenSeq,
    /// Operations drawn over every attempt, rejected ones included.
    pub draws: OpCounts,
    pub attempts: usize,
    /// True when all attempts were rejected and one token was replaced
    /// directly.
    pub forced: bool,
}

fn apply_once<R: Rng>(name: &SubtokenSeq, dist: &EditDistribution, vocab: &Vocabulary, rng: &mut R, draws: &mut OpCounts) -> Vec<String> {
    let mut out = Vec::with_capacity(name.len() + 2);
    for token in name {
        let op = dist.sample(rng);
        draws[op.index()] += 1;
        match op {
            EditOp::Keep => out.push(token.clone()),
            EditOp::Delete => {}
            EditOp::Add => {
                if let Some(t) = vocab.sample(rng) {
                    out.push(t.to_string());
                }
                out.push(token.clone());
            }
            // A vocabulary holding only this token leaves it unchanged.
            EditOp::Replace => out.push(vocab.sample_excluding(token, rng).unwrap_or(token).to_string()),
        }
    }
    out
}

pub fn corrupt_with_rng<R: Rng>(
    name: &SubtokenSeq,
    dist: &EditDistribution,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Corruption, NegSampleError> {
    if name.is_empty() {
        return Err(NegSampleError::EmptyName);
    }
    dist.validate()?;
    let replaceable: Vec<usize> = (0..name.len()).filter(|&i| vocab.has_alternative(&name.tokens()[i])).collect();
    if replaceable.is_empty() && dist.p_delete == 0.0 && dist.p_add == 0.0 {
        return Err(NegSampleError::DegenerateDistribution(if vocab.is_empty() {
            "empty vocabulary".into()
        } else {
            "vocabulary offers no replacement for any token".into()
        }));
    }

    let mut draws = [0; 4];
    for attempt in 1..=MAX_ATTEMPTS {
        let out = apply_once(name, dist, vocab, rng, &mut draws);
        if !out.is_empty() && out.as_slice() != name.tokens() {
            let name = SubtokenSeq::new(out).expect("tokens come from valid sequences");
            return Ok(Corruption { name, draws, attempts: attempt, forced: false });
        }
    }

    if replaceable.is_empty() {
        return Err(NegSampleError::DegenerateDistribution(format!(
            "{MAX_ATTEMPTS} attempts left the name unchanged and no token can be replaced"
        )));
    }
    let pos = replaceable[rng.gen_range(0..replaceable.len())];
    let mut tokens = name.tokens().to_vec();
    tokens[pos] = vocab.sample_excluding(&tokens[pos], rng).expect("position has an alternative").to_string();
    let name = SubtokenSeq::new(tokens).expect("tokens come from valid sequences");
    Ok(Corruption { name, draws, attempts: MAX_ATTEMPTS, forced: true })
}

/// Deterministic corruption of `name` under `seed`. The result is non-empty
/// and differs from `name`.
pub fn corrupt_name(name: &SubtokenSeq, dist: &EditDistribution, vocab: &Vocabulary, seed: u64) -> Result<SubtokenSeq, NegSampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(corrupt_with_rng(name, dist, vocab, &mut rng)?.name)
}

/// RNG stream for example `index`; independent of evaluation order.
pub fn example_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Consistent,
    Inconsistent,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Consistent => "consistent",
            Label::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Sampled,
}

/// A record paired with the name under test. Serializes as the corpus
/// schema plus `presented_name`, `label` and `provenance`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    #[serde(flatten)]
    pub record: MethodRecord,
    pub presented_name: SubtokenSeq,
    pub label: Label,
    pub provenance: Provenance,
}

impl LabeledExample {
    pub fn consistent(record: MethodRecord) -> Self {
        Self { presented_name: record.name.clone(), record, label: Label::Consistent, provenance: Provenance::Original }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.record.validate()?;
        if self.presented_name.is_empty() {
            return Err("presented_name is empty".into());
        }
        match (self.label, self.provenance) {
            (Label::Consistent, _) if self.presented_name != self.record.name => {
                Err("consistent example must present the record's own name".into())
            }
            (Label::Consistent, Provenance::Sampled) => Err("sampled examples are inconsistent".into()),
            (Label::Inconsistent, Provenance::Sampled) if self.presented_name == self.record.name => {
                Err("sampled negative equals the original name".into())
            }
            _ => Ok(()),
        }
    }
}

/// One consistent example per record plus `round(len * negative_ratio)`
/// sampled negatives, spread as evenly as possible over the records.
/// Records receiving the remainder are chosen by the seed. Output order is
/// shuffled by the seed.
pub fn build_mcc_dataset(
    records: &[MethodRecord],
    dist: &EditDistribution,
    vocab: &Vocabulary,
    negative_ratio: f64,
    seed: u64,
) -> Result<Vec<LabeledExample>, NegSampleError> {
    if records.is_empty() {
        return Err(NegSampleError::EmptyRecords);
    }
    if !(negative_ratio.is_finite() && negative_ratio > 0.0) {
        return Err(NegSampleError::InvalidRatio(negative_ratio));
    }
    dist.validate()?;

    let n = records.len();
    let total = (n as f64 * negative_ratio).round() as usize;
    let mut plan = vec![total / n; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut example_rng(seed, 0));
    for &i in &order[..total % n] {
        plan[i] += 1;
    }
    let jobs: Vec<usize> = plan.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c)).collect();

    let negatives = jobs
        .par_iter()
        .enumerate()
        .map(|(j, &i)| {
            let record = &records[i];
            let mut rng = example_rng(seed, j as u64 + 1);
            let c = corrupt_with_rng(&record.name, dist, vocab, &mut rng)?;
            Ok(LabeledExample {
                record: record.clone(),
                presented_name: c.name,
                label: Label::Inconsistent,
                provenance: Provenance::Sampled,
            })
        })
        .collect::<Result<Vec<_>, NegSampleError>>()?;

    let mut out: Vec<LabeledExample> = records.iter().cloned().map(LabeledExample::consistent).collect();
    out.extend(negatives);
    out.shuffle(&mut example_rng(seed, u64::MAX));
    Ok(out)
}

pub fn write_examples<W: Write>(mut out: W, examples: &[LabeledExample]) -> io::Result<()> {
    for e in examples {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_examples<R: BufRead>(input: R) -> Result<Vec<LabeledExample>, NegSampleError> {
    Ok(read_lines(input, LabeledExample::validate)?)
}

pub fn write_dataset(path: &Path, examples: &[LabeledExample]) -> Result<(), NegSampleError> {
    let io_err = |source| NegSampleError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    write_examples(BufWriter::new(file), examples).map_err(io_err)
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledExample>, NegSampleError> {
    let file = File::open(path).map_err(|source| NegSampleError::Io { path: path.to_path_buf(), source })?;
    read_examples(BufReader::new(file))
}
