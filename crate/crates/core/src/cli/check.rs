//! The three-step naming loop: extract contexts, check each name, and
//! recommend candidates for the names found inconsistent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize, MethodRecord};
use crate::java_extract::{scan_project, ByteSpan, Diagnostic, ExtractError};
use crate::mcc::{check_classification, compare_with_generated, ClassifierModel, MccVerdict, Strategy};
use crate::mnr::{build_retrieval_index, Candidate, NameGenerator};
use crate::negsample::Label;
use crate::quality::score_subtokens;
use crate::tokenize::{join_subtokens, JoinStyle, SubtokenSeq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub name: SubtokenSeq,
    pub identifier: String,
    pub score: f64,
    pub quality: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedMethod {
    pub project: String,
    pub path: String,
    pub span: ByteSpan,
    pub current_name: SubtokenSeq,
    pub identifier: String,
    pub score: f64,
    pub strategy: Strategy,
    pub candidates: Vec<RankedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub methods_checked: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamingReport {
    pub strategy: Strategy,
    pub threshold: Option<f64>,
    pub k: usize,
    pub summary: Summary,
    pub flagged: Vec<FlaggedMethod>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub strategy: Strategy,
    /// Similarity threshold for generate-then-compare.
    pub threshold: f64,
    pub k: usize,
}

/// Records extracted from project roots plus everything that went wrong
/// along the way.
#[derive(Debug, Default)]
pub struct Extraction {
    pub records: Vec<MethodRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub failures: Vec<Failure>,
}

/// Scans and normalizes every root. A missing root is an error; files and
/// methods that cannot be processed are reported as failures.
pub fn extract_records(roots: &[PathBuf]) -> Result<Extraction, ExtractError> {
    let mut out = Extraction::default();
    for root in roots {
        let scan = scan_project(root)?;
        for f in scan.failures {
            let path = match &f {
                ExtractError::FileUnparseable { path, .. } => path.clone(),
                ExtractError::Io { path, .. } | ExtractError::RootMissing(path) => path.display().to_string(),
            };
            out.failures.push(Failure { path, reason: f.to_string() });
        }
        out.diagnostics.extend(scan.diagnostics);
        for raw in &scan.methods {
            match normalize(raw) {
                Ok(r) => out.records.push(r),
                Err(e) => out.failures.push(Failure { path: raw.path.clone(), reason: format!("{}: {e}", raw.byte_span) }),
            }
        }
    }
    Ok(out)
}

fn identifier(name: &SubtokenSeq) -> String {
    join_subtokens(name, JoinStyle::Camel).unwrap_or_default()
}

fn rank(candidates: Vec<Candidate>, record: &MethodRecord) -> Vec<RankedCandidate> {
    candidates
        .into_iter()
        .map(|c| RankedCandidate {
            identifier: identifier(&c.name),
            quality: score_subtokens(&c.name, Some(record)).map_or(0, |q| q.total),
            name: c.name,
            score: c.score,
        })
        .collect()
}

/// Checks one record. Under classification the generator is only called
/// for inconsistent verdicts; under generate-then-compare its top-1 answer
/// is the verdict itself.
fn check_one(
    record: &MethodRecord,
    model: Option<&ClassifierModel>,
    generator: &dyn NameGenerator,
    opts: &CheckOptions,
) -> anyhow::Result<(MccVerdict, Option<FlaggedMethod>)> {
    let (verdict, candidates) = match opts.strategy {
        Strategy::Classification => {
            let model = model.ok_or_else(|| anyhow::anyhow!("classification needs a fitted model"))?;
            let verdict = check_classification(model, record, &record.name)?;
            let candidates = if verdict.label == Label::Inconsistent { Some(generator.generate(record, opts.k)?) } else { None };
            (verdict, candidates)
        }
        Strategy::GenerateThenCompare => {
            let candidates = generator.generate(record, opts.k)?;
            let top = candidates.first().ok_or_else(|| anyhow::anyhow!("generator returned no candidates"))?;
            let verdict = compare_with_generated(&top.name, &record.name, opts.threshold)?;
            (verdict, Some(candidates))
        }
    };
    let flagged = match (verdict.label, candidates) {
        (Label::Inconsistent, Some(mut c)) => {
            c.truncate(opts.k);
            Some(FlaggedMethod {
                project: record.project.clone(),
                path: record.path.clone(),
                span: record.span,
                current_name: record.name.clone(),
                identifier: identifier(&record.name),
                score: verdict.score,
                strategy: verdict.strategy,
                candidates: rank(c, record),
            })
        }
        _ => None,
    };
    Ok((verdict, flagged))
}

pub fn check_records(
    records: &[MethodRecord],
    model: Option<&ClassifierModel>,
    generator: &dyn NameGenerator,
    opts: &CheckOptions,
    failures: Vec<Failure>,
) -> anyhow::Result<NamingReport> {
    let results = records.par_iter().map(|r| check_one(r, model, generator, opts)).collect::<anyhow::Result<Vec<_>>>()?;
    let inconsistent = results.iter().filter(|(v, _)| v.label == Label::Inconsistent).count();
    let mut flagged: Vec<FlaggedMethod> = results.into_iter().filter_map(|(_, f)| f).collect();
    flagged.sort_by(|a, b| (&a.project, &a.path, a.span).cmp(&(&b.project, &b.path, b.span)));
    let mut failures = failures;
    failures.sort_by(|a, b| (&a.path, &a.reason).cmp(&(&b.path, &b.reason)));
    Ok(NamingReport {
        strategy: opts.strategy,
        threshold: (opts.strategy == Strategy::GenerateThenCompare).then_some(opts.threshold),
        k: opts.k,
        summary: Summary {
            methods_checked: records.len(),
            consistent: records.len() - inconsistent,
            inconsistent,
            failures: failures.len(),
        },
        flagged,
        failures,
    })
}

/// Full loop over project roots. Without a generator, a retrieval index
/// over the extracted records themselves supplies candidates.
pub fn cmd_check(
    roots: &[PathBuf],
    model: Option<&ClassifierModel>,
    generator: Option<&dyn NameGenerator>,
    opts: &CheckOptions,
) -> anyhow::Result<NamingReport> {
    for root in roots {
        if !Path::new(root).is_dir() {
            anyhow::bail!("cannot read project root {}", root.display());
        }
    }
    let ex = extract_records(roots)?;
    for d in &ex.diagnostics {
        eprintln!("{d}");
    }
    if ex.records.is_empty() {
        return check_records(&[], model, &NoGenerator, opts, ex.failures);
    }
    match generator {
        Some(g) => check_records(&ex.records, model, g, opts, ex.failures),
        None => {
            let index = build_retrieval_index(&ex.records)?;
            check_records(&ex.records, model, &index, opts, ex.failures)
        }
    }
}

struct NoGenerator;

impl NameGenerator for NoGenerator {
    fn generate(&self, _: &MethodRecord, _: usize) -> Result<Vec<Candidate>, crate::mnr::GeneratorError> {
        Ok(Vec::new())
    }
}

pub fn render_text(report: &NamingReport) -> String {
    let mut s = String::new();
    let strategy = match report.strategy {
        Strategy::Classification => "classification".to_string(),
        Strategy::GenerateThenCompare => format!("generate-then-compare, threshold {}", report.threshold.unwrap_or_default()),
    };
    let sum = &report.summary;
    let _ = writeln!(
        s,
        "{} methods checked: {} consistent, {} inconsistent ({strategy})",
        sum.methods_checked, sum.consistent, sum.inconsistent
    );
    for f in &report.flagged {
        let _ = writeln!(s);
        let _ = writeln!(s, "{}/{} {} {}  score {:.4}", f.project, f.path, f.span, f.identifier, f.score);
        for (i, c) in f.candidates.iter().enumerate() {
            let _ = writeln!(s, "  {:>2}. {:<32} {:.4}  quality {}", i + 1, c.identifier, c.score, c.quality);
        }
    }
    if !report.failures.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "failures:");
        for f in &report.failures {
            let _ = writeln!(s, "  {}: {}", f.path, f.reason);
        }
    }
    s
}

pub fn render_machine(report: &NamingReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
