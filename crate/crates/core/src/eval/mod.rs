//! Evaluation metrics: subtoken precision/recall/F1, exact match,
//! consistency-checking metrics, and the name-length analysis.
//!
//! Matches are counted on multisets, so a repeated subtoken is credited at
//! most as often as it occurs in both sequences. Corpus aggregates are the
//! unweighted mean of per-example scores.

pub mod wilcoxon;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::negsample::Label;
use crate::tokenize::SubtokenSeq;

pub use wilcoxon::{wilcoxon_exact, wilcoxon_normal, wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold name is empty")]
    EmptyGold,
    #[error("no input to evaluate")]
    EmptyInput,
    #[error("{preds} predictions for {golds} gold names")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("exact test supports at most 63 nonzero differences, got {0}")]
    TooLargeForExact(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScores {
    pub fn from_counts(matches: usize, predicted: usize, actual: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(matches, predicted);
        let recall = ratio(matches, actual);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1 }
    }
}

/// Size of the multiset intersection of two token sequences.
pub fn multiset_matches(a: &SubtokenSeq, b: &SubtokenSeq) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in a {
        *counts.entry(t).or_default() += 1;
    }
    let mut matches = 0;
    for t in b {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                matches += 1;
            }
        }
    }
    matches
}

pub fn prf(pred: &SubtokenSeq, gold: &SubtokenSeq) -> Result<PrfScores, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    Ok(PrfScores::from_counts(multiset_matches(pred, gold), pred.len(), gold.len()))
}

pub fn exact_match(pred: &SubtokenSeq, gold: &SubtokenSeq) -> bool {
    pred == gold
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    #[serde(flatten)]
    pub prf: PrfScores,
    pub exact_match: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact_match: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MccBlock {
    pub count: usize,
    pub consistent: PrfScores,
    pub inconsistent: PrfScores,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBucket {
    /// "1" .. "7", then "8+".
    pub length: String,
    pub count: usize,
    pub exact: usize,
    /// None for an empty bucket.
    pub exact_match_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBlock {
    pub buckets: Vec<LengthBucket>,
    /// Index = length, last slot collects 8 and longer. Slot 0 counts
    /// empty predictions.
    pub predicted_histogram: Vec<usize>,
    pub gold_histogram: Vec<usize>,
    pub wilcoxon: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_example: Vec<ExampleScore>,
    pub aggregates: Aggregates,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mcc: Option<MccBlock>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub length: Option<LengthBlock>,
}

fn check_lengths(preds: usize, golds: usize) -> Result<(), EvalError> {
    if preds != golds {
        return Err(EvalError::LengthMismatch { preds, golds });
    }
    if golds == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

/// Scores top-1 predictions against gold names.
pub fn evaluate_predictions(preds: &[SubtokenSeq], golds: &[SubtokenSeq]) -> Result<EvalReport, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    let per_example = preds
        .iter()
        .zip(golds)
        .map(|(p, g)| Ok(ExampleScore { prf: prf(p, g)?, exact_match: exact_match(p, g) }))
        .collect::<Result<Vec<_>, EvalError>>()?;
    let n = per_example.len() as f64;
    let mean = |f: fn(&ExampleScore) -> f64| per_example.iter().map(f).sum::<f64>() / n;
    let aggregates = Aggregates {
        count: per_example.len(),
        precision: mean(|e| e.prf.precision),
        recall: mean(|e| e.prf.recall),
        f1: mean(|e| e.prf.f1),
        exact_match: mean(|e| if e.exact_match { 1.0 } else { 0.0 }),
    };
    Ok(EvalReport { per_example, aggregates, mcc: None, length: None })
}

/// Per-class scores and accuracy over `(predicted, gold)` label pairs.
pub fn mcc_metrics(pairs: &[(Label, Label)]) -> Result<MccBlock, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let class = |positive: Label| {
        let tp = pairs.iter().filter(|(p, g)| *p == positive && *g == positive).count();
        let predicted = pairs.iter().filter(|(p, _)| *p == positive).count();
        let actual = pairs.iter().filter(|(_, g)| *g == positive).count();
        PrfScores::from_counts(tp, predicted, actual)
    };
    let correct = pairs.iter().filter(|(p, g)| p == g).count();
    Ok(MccBlock {
        count: pairs.len(),
        consistent: class(Label::Consistent),
        inconsistent: class(Label::Inconsistent),
        accuracy: correct as f64 / pairs.len() as f64,
    })
}

pub const LENGTH_BUCKETS: usize = 8;

fn bucket(len: usize) -> usize {
    len.min(LENGTH_BUCKETS)
}

/// Exact-match rate by gold length, length histograms, and a signed-rank
/// test on paired (predicted, gold) lengths.
pub fn length_analysis(preds: &[SubtokenSeq], golds: &[SubtokenSeq]) -> Result<LengthBlock, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    let mut buckets: Vec<LengthBucket> = (1..=LENGTH_BUCKETS)
        .map(|l| LengthBucket {
            length: if l == LENGTH_BUCKETS { format!("{l}+") } else { l.to_string() },
            count: 0,
            exact: 0,
            exact_match_rate: None,
        })
        .collect();
    let mut predicted_histogram = vec![0; LENGTH_BUCKETS + 1];
    let mut gold_histogram = vec![0; LENGTH_BUCKETS + 1];
    for (p, g) in preds.iter().zip(golds) {
        if g.is_empty() {
            return Err(EvalError::EmptyGold);
        }
        let b = &mut buckets[bucket(g.len()) - 1];
        b.count += 1;
        b.exact += usize::from(exact_match(p, g));
        predicted_histogram[bucket(p.len())] += 1;
        gold_histogram[bucket(g.len())] += 1;
    }
    for b in &mut buckets {
        b.exact_match_rate = (b.count > 0).then(|| b.exact as f64 / b.count as f64);
    }
    let pairs: Vec<(f64, f64)> = preds.iter().zip(golds).map(|(p, g)| (p.len() as f64, g.len() as f64)).collect();
    Ok(LengthBlock { buckets, predicted_histogram, gold_histogram, wilcoxon: wilcoxon_signed_rank(&pairs)? })
}

/// Human-readable summary of a report.
pub fn render_table(report: &EvalReport) -> String {
    let mut s = String::new();
    let a = &report.aggregates;
    let _ = writeln!(s, "{:<12}{:>10}{:>10}{:>10}{:>10}", "examples", "precision", "recall", "f1", "em");
    let _ = writeln!(s, "{:<12}{:>10.4}{:>10.4}{:>10.4}{:>10.4}", a.count, a.precision, a.recall, a.f1, a.exact_match);
    if let Some(m) = &report.mcc {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>10}{:>10}{:>10}", "class", "precision", "recall", "f1");
        for (name, c) in [("consistent", &m.consistent), ("inconsistent", &m.inconsistent)] {
            let _ = writeln!(s, "{:<14}{:>10.4}{:>10.4}{:>10.4}", name, c.precision, c.recall, c.f1);
        }
        let _ = writeln!(s, "accuracy {:.4} over {} examples", m.accuracy, m.count);
    }
    if let Some(l) = &report.length {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<8}{:>8}{:>8}{:>10}", "length", "count", "exact", "em");
        for b in &l.buckets {
            let rate = b.exact_match_rate.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(s, "{:<8}{:>8}{:>8}{:>10}", b.length, b.count, b.exact, rate);
        }
        let w = &l.wilcoxon;
        let method = match w.method {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::Normal => "normal",
        };
        let _ = writeln!(s, "wilcoxon W={} p={:.4} n={} ({method})", w.statistic, w.p_value, w.n);
    }
    s
}
