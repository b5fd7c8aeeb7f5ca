//! Method name consistency checking.
//!
//! Two strategies are offered. Classification scores a (record, name) pair
//! with a logistic model over six lexical features and calls the name
//! inconsistent when the score is at least 0.5. Generate-then-compare asks
//! a [`NameGenerator`] for a fresh name and calls the current name
//! inconsistent when its lexical similarity to the fresh name falls below a
//! threshold.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::MethodRecord;
use crate::eval::{multiset_matches, prf, PrfScores};
use crate::mnr::NameGenerator;
use crate::negsample::{Label, LabeledExample};
use crate::tokenize::SubtokenSeq;

pub const MODEL_HEADER: &str = "mccmodel v1";
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum MccError {
    #[error("training data holds a single class; both labels are required")]
    SingleClassData,
    #[error("no training examples")]
    EmptyDataset,
    #[error("model has not been fitted")]
    ModelUnfitted,
    #[error("name is empty")]
    EmptyName,
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error("generator failed: {0}")]
    GeneratorFailure(String),
    #[error("model file line {line}: {reason}")]
    MalformedModel { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub const FEATURE_NAMES: [&str; 6] = ["overlap_f1", "class_overlap", "sibling_max_sim", "first_token_in_body", "name_length", "bias"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Name vs body subtoken F1.
    pub overlap_f1: f64,
    /// Name vs class name subtoken F1.
    pub class_overlap: f64,
    /// Best name vs sibling subtoken F1.
    pub sibling_max_sim: f64,
    pub first_token_in_body: f64,
    pub name_length: f64,
    pub bias: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 6] {
        [self.overlap_f1, self.class_overlap, self.sibling_max_sim, self.first_token_in_body, self.name_length, self.bias]
    }

    fn key(&self) -> [u64; 6] {
        self.to_array().map(f64::to_bits)
    }
}

fn f1(name: &SubtokenSeq, context: &SubtokenSeq) -> f64 {
    PrfScores::from_counts(multiset_matches(name, context), name.len(), context.len()).f1
}

pub fn extract_features(record: &MethodRecord, presented_name: &SubtokenSeq) -> FeatureVector {
    let first = presented_name.first();
    FeatureVector {
        overlap_f1: f1(presented_name, &record.body),
        class_overlap: f1(presented_name, &record.class_name),
        sibling_max_sim: record.siblings.iter().map(|s| f1(presented_name, s)).fold(0.0, f64::max),
        first_token_in_body: if first.is_some_and(|f| record.body.iter().any(|t| t == f)) { 1.0 } else { 0.0 },
        name_length: presented_name.len() as f64,
        bias: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Classification,
    GenerateThenCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MccVerdict {
    pub label: Label,
    /// Probability that the name is inconsistent.
    pub score: f64,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub weights: [f64; 6],
    /// SHA-256 of the training data; `None` until fitted or loaded.
    pub fitted_on: Option<String>,
}

impl ClassifierModel {
    pub fn unfitted() -> Self {
        Self { weights: [0.0; 6], fitted_on: None }
    }

    pub fn with_weights(weights: [f64; 6], fitted_on: impl Into<String>) -> Self {
        Self { weights, fitted_on: Some(fitted_on.into()) }
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted_on.is_some()
    }

    pub fn score(&self, features: &FeatureVector) -> f64 {
        sigmoid(dot(&self.weights, &features.to_array()))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MODEL_HEADER}\n");
        if let Some(d) = &self.fitted_on {
            let _ = writeln!(s, "# fitted_on: {d}");
        }
        for (name, w) in FEATURE_NAMES.iter().zip(self.weights) {
            let _ = writeln!(s, "{name}\t{w:?}");
        }
        s
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, MccError> {
        let malformed = |line: usize, reason: String| MccError::MalformedModel { line, reason };
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(l))) if l.trim_end() == MODEL_HEADER => {}
            Some((_, Ok(l))) => return Err(malformed(1, format!("expected `{MODEL_HEADER}`, found `{l}`"))),
            Some((_, Err(e))) => return Err(malformed(1, e.to_string())),
            None => return Err(malformed(1, "empty model file".into())),
        }
        let mut fitted_on = None;
        let mut weights: [Option<f64>; 6] = [None; 6];
        for (idx, line) in lines {
            let no = idx + 1;
            let line = line.map_err(|e| malformed(no, e.to_string()))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(d) = comment.trim().strip_prefix("fitted_on:") {
                    fitted_on = Some(d.trim().to_string());
                }
                continue;
            }
            let (name, value) = line.split_once('\t').ok_or_else(|| malformed(no, "expected `feature<TAB>weight`".into()))?;
            let slot = FEATURE_NAMES.iter().position(|f| *f == name).ok_or_else(|| malformed(no, format!("unknown feature `{name}`")))?;
            if weights[slot].is_some() {
                return Err(malformed(no, format!("duplicate feature `{name}`")));
            }
            let w: f64 = value.trim().parse().map_err(|_| malformed(no, format!("bad weight `{value}`")))?;
            if !w.is_finite() {
                return Err(malformed(no, format!("non-finite weight `{value}`")));
            }
            weights[slot] = Some(w);
        }
        let mut out = [0.0; 6];
        for (i, w) in weights.iter().enumerate() {
            out[i] = w.ok_or_else(|| malformed(0, format!("missing feature `{}`", FEATURE_NAMES[i])))?;
        }
        Ok(Self { weights: out, fitted_on })
    }

    pub fn save(&self, path: &Path) -> Result<(), MccError> {
        std::fs::write(path, self.to_text()).map_err(|source| MccError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, MccError> {
        let file = std::fs::File::open(path).map_err(|source| MccError::Io { path: path.to_path_buf(), source })?;
        Self::from_reader(BufReader::new(file))
    }
}

fn dot(w: &[f64; 6], x: &[f64; 6]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// -ln p(y | x) for a logit `z`, computed without overflow.
fn cross_entropy(z: f64, y: f64) -> f64 {
    // ln(1 + e^z) - y z
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - y * z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { epochs: 3000, learning_rate: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs: usize,
    pub examples: usize,
}

/// Distinct (features, label) rows with multiplicities, in a canonical
/// order so that the fit does not depend on input order.
struct Grouped {
    rows: Vec<([f64; 6], f64, f64)>,
    total: f64,
}

fn group(examples: &[LabeledExample]) -> Grouped {
    let mut map: BTreeMap<([u64; 6], bool), ([f64; 6], u64)> = BTreeMap::new();
    for e in examples {
        let f = extract_features(&e.record, &e.presented_name);
        map.entry((f.key(), e.label == Label::Inconsistent)).or_insert((f.to_array(), 0)).1 += 1;
    }
    let rows = map.into_iter().map(|((_, y), (x, c))| (x, if y { 1.0 } else { 0.0 }, c as f64)).collect();
    Grouped { rows, total: examples.len() as f64 }
}

fn mean_loss(g: &Grouped, w: &[f64; 6]) -> f64 {
    g.rows.iter().map(|(x, y, c)| c * cross_entropy(dot(w, x), *y)).sum::<f64>() / g.total
}

fn gradient(g: &Grouped, w: &[f64; 6]) -> [f64; 6] {
    let mut grad = [0.0; 6];
    for (x, y, c) in &g.rows {
        let r = c * (sigmoid(dot(w, x)) - y);
        for k in 0..6 {
            grad[k] += r * x[k];
        }
    }
    grad.map(|v| v / g.total)
}

/// Digest of the training data, independent of example order.
pub fn dataset_digest(examples: &[LabeledExample]) -> String {
    let mut lines: Vec<String> = examples.iter().map(|e| serde_json::to_string(e).expect("examples serialize")).collect();
    lines.sort();
    let mut h = Sha256::new();
    for l in &lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Logistic regression minimizing mean cross-entropy by full-batch
/// gradient descent. A step that would raise the loss is retried with half
/// the learning rate, so the loss never increases. Stops early once no step
/// helps; the report gives the epochs actually run.
pub fn fit_classifier(examples: &[LabeledExample], config: &FitConfig) -> Result<(ClassifierModel, FitReport), MccError> {
    if examples.is_empty() {
        return Err(MccError::EmptyDataset);
    }
    let positives = examples.iter().filter(|e| e.label == Label::Inconsistent).count();
    if positives == 0 || positives == examples.len() {
        return Err(MccError::SingleClassData);
    }
    let g = group(examples);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.01..0.01));
    let initial_loss = mean_loss(&g, &w);
    let mut loss = initial_loss;
    let mut epochs = 0;
    'descent: while epochs < config.epochs {
        let grad = gradient(&g, &w);
        let mut lr = config.learning_rate;
        loop {
            let next: [f64; 6] = std::array::from_fn(|k| w[k] - lr * grad[k]);
            let next_loss = mean_loss(&g, &next);
            if next_loss <= loss {
                w = next;
                loss = next_loss;
                break;
            }
            lr *= 0.5;
            if lr < 1e-12 {
                // No step lowers the loss: converged to float precision.
                break 'descent;
            }
        }
        epochs += 1;
    }
    let model = ClassifierModel { weights: w, fitted_on: Some(dataset_digest(examples)) };
    Ok((model, FitReport { initial_loss, final_loss: loss, epochs, examples: examples.len() }))
}

pub fn verdict_from_score(score: f64) -> MccVerdict {
    let label = if score >= 0.5 { Label::Inconsistent } else { Label::Consistent };
    MccVerdict { label, score, strategy: Strategy::Classification }
}

pub fn check_classification(model: &ClassifierModel, record: &MethodRecord, presented_name: &SubtokenSeq) -> Result<MccVerdict, MccError> {
    if !model.is_fitted() {
        return Err(MccError::ModelUnfitted);
    }
    if presented_name.is_empty() {
        return Err(MccError::EmptyName);
    }
    Ok(verdict_from_score(model.score(&extract_features(record, presented_name))))
}

/// Multiset subtoken F1 between two names.
pub fn lexical_similarity(a: &SubtokenSeq, b: &SubtokenSeq) -> Result<f64, MccError> {
    if a.is_empty() || b.is_empty() {
        return Err(MccError::EmptyName);
    }
    Ok(prf(a, b).map_err(|_| MccError::EmptyName)?.f1)
}

pub fn check_generate_then_compare(
    generator: &dyn NameGenerator,
    record: &MethodRecord,
    presented_name: &SubtokenSeq,
    threshold: f64,
) -> Result<MccVerdict, MccError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MccError::InvalidThreshold(threshold));
    }
    let candidates = generator.generate(record, 1).map_err(|e| MccError::GeneratorFailure(e.to_string()))?;
    let top = candidates.first().ok_or_else(|| MccError::GeneratorFailure("no candidates returned".into()))?;
    compare_with_generated(&top.name, presented_name, threshold)
}

/// Verdict for a name given an already generated top-1 name.
pub fn compare_with_generated(generated: &SubtokenSeq, presented_name: &SubtokenSeq, threshold: f64) -> Result<MccVerdict, MccError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MccError::InvalidThreshold(threshold));
    }
    let sim = lexical_similarity(generated, presented_name)?;
    let label = if sim < threshold { Label::Inconsistent } else { Label::Consistent };
    Ok(MccVerdict { label, score: 1.0 - sim, strategy: Strategy::GenerateThenCompare })
}
