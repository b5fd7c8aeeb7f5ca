//! Command-line front end. Exit status: 0 on success, 1 on usage errors,
//! 2 on runtime errors.

pub mod check;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{read_corpus, split_by_project, write_corpus};
use crate::eval::{evaluate_predictions, length_analysis, mcc_metrics, render_table, EvalReport};
use crate::mcc::{
    check_classification, check_generate_then_compare, fit_classifier, ClassifierModel, FitConfig, Strategy, DEFAULT_THRESHOLD,
};
use crate::mnr::backend::DEFAULT_TIMEOUT;
use crate::mnr::{build_retrieval_index, BackendProcess, NameGenerator, PromptTemplate, RetrievalIndex, DEFAULT_K};
use crate::negsample::{
    build_mcc_dataset, estimate_edit_distribution, read_dataset, read_rename_pairs_file, write_dataset, EditDistribution, Vocabulary,
};
use crate::quality::{score_corpus_with, score_name_with, Lexicons};
use crate::tokenize::{join_subtokens, JoinStyle, SubtokenSeq};

pub use check::{cmd_check, CheckOptions, NamingReport};

#[derive(Debug, Parser)]
#[command(name = "namewise", version, about = "Method name extraction, consistency checking, recommendation and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract method records from Java project roots into a corpus file.
    Extract(ExtractArgs),
    /// Split a corpus into train/validation/test by project.
    Split(SplitArgs),
    /// Build a labeled consistency dataset with sampled negatives.
    Sample(SampleArgs),
    /// Fit the consistency classifier on a labeled dataset.
    Fit(FitArgs),
    /// Score name recommendation (and optionally consistency checking).
    Evaluate(EvaluateArgs),
    /// Check names in Java projects and recommend replacements.
    Check(CheckArgs),
    /// Score identifiers against the naming standards.
    Quality(QualityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Classification,
    Gtc,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Classification => Strategy::Classification,
            StrategyArg::Gtc => Strategy::GenerateThenCompare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Project root directories; each root is one project.
    #[arg(required = true)]
    pub roots: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving train.jsonl, validation.jsonl and test.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Rename pairs (`old<TAB>new` per line) to estimate the edit distribution.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Corpus whose names form the replacement vocabulary [default: --corpus].
    #[arg(long)]
    pub vocab_corpus: Option<PathBuf>,
    /// Sampled negatives per record; may exceed 1.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = FitConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = FitConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// Corpus to build the retrieval generator from.
    #[arg(long, conflicts_with = "backend")]
    pub index: Option<PathBuf>,
    /// External generator command speaking the line protocol.
    #[arg(long)]
    pub backend: Option<String>,
    /// Backend reply timeout in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
    pub timeout: f64,
    /// JSON file overriding the prompt template sent to the backend.
    #[arg(long)]
    pub template: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Records whose names are to be recommended.
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Labeled dataset for consistency-checking metrics.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Classification)]
    pub strategy: StrategyArg,
    /// Classifier model; without it classification is delegated to --backend.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Machine-readable report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Project root directories.
    #[arg(required = true)]
    pub roots: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Classification)]
    pub strategy: StrategyArg,
    /// Fitted classifier (required for classification).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Generate-then-compare similarity threshold.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Candidates per flagged method.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Generator: --index corpus or --backend command. Without either, a
    /// retrieval index over the checked projects is used.
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Report destination [default: standard output].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    /// Identifiers to score.
    pub names: Vec<String>,
    /// Score every method name in a corpus instead.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub verbs: Option<PathBuf>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub abbreviations: Option<PathBuf>,
}

/// Misuse of flags detected after parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

pub fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Extract(a) => extract(a),
        Command::Split(a) => split(a),
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Check(a) => check(a),
        Command::Quality(a) => quality(a),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn extract(a: ExtractArgs) -> anyhow::Result<()> {
    let ex = check::extract_records(&a.roots)?;
    for d in &ex.diagnostics {
        eprintln!("{d}");
    }
    for f in &ex.failures {
        eprintln!("SKIP {}: {}", f.path, f.reason);
    }
    write_corpus(&a.out, &ex.records)?;
    println!("{} records from {} project(s) written to {}", ex.records.len(), a.roots.len(), a.out.display());
    Ok(())
}

fn split(a: SplitArgs) -> anyhow::Result<()> {
    let ratios: [f64; 3] = a.ratios.as_slice().try_into().map_err(|_| usage("--ratios takes exactly three comma-separated fractions"))?;
    let records = read_corpus(&a.corpus)?;
    let split = split_by_project(records, ratios, a.seed)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    for (name, part) in ["train", "validation", "test"].iter().zip(split.parts()) {
        let path = a.out_dir.join(format!("{name}.jsonl"));
        write_corpus(&path, part)?;
        println!("{name}: {} records", part.len());
    }
    Ok(())
}

fn sample(a: SampleArgs) -> anyhow::Result<()> {
    let records = read_corpus(&a.corpus)?;
    let dist = match &a.pairs {
        Some(p) => estimate_edit_distribution(&read_rename_pairs_file(p)?)?,
        None => EditDistribution::default(),
    };
    let vocab = match &a.vocab_corpus {
        Some(p) => Vocabulary::from_records(&read_corpus(p)?),
        None => Vocabulary::from_records(&records),
    };
    let examples = build_mcc_dataset(&records, &dist, &vocab, a.ratio, a.seed)?;
    write_dataset(&a.out, &examples)?;
    println!(
        "{} examples (keep {:.4}, add {:.4}, delete {:.4}, replace {:.4}) written to {}",
        examples.len(),
        dist.p_keep,
        dist.p_add,
        dist.p_delete,
        dist.p_replace,
        a.out.display()
    );
    Ok(())
}

fn fit(a: FitArgs) -> anyhow::Result<()> {
    let examples = read_dataset(&a.dataset)?;
    let cfg = FitConfig { epochs: a.epochs, learning_rate: a.learning_rate, seed: a.seed };
    let (model, report) = fit_classifier(&examples, &cfg)?;
    model.save(&a.out)?;
    println!(
        "fitted on {} examples: loss {:.6} -> {:.6} after {} epochs",
        report.examples, report.initial_loss, report.final_loss, report.epochs
    );
    Ok(())
}

enum Generator {
    Index(RetrievalIndex),
    Backend(Box<BackendProcess>),
}

impl Generator {
    fn as_dyn(&self) -> &dyn NameGenerator {
        match self {
            Generator::Index(i) => i,
            Generator::Backend(b) => b.as_ref(),
        }
    }

    fn backend(&self) -> Option<&BackendProcess> {
        match self {
            Generator::Backend(b) => Some(b.as_ref()),
            Generator::Index(_) => None,
        }
    }
}

fn open_generator(a: &GeneratorArgs) -> anyhow::Result<Option<Generator>> {
    if let Some(path) = &a.index {
        let records = read_corpus(path)?;
        return Ok(Some(Generator::Index(build_retrieval_index(&records)?)));
    }
    if let Some(cmd) = &a.backend {
        if !(a.timeout.is_finite() && a.timeout > 0.0) {
            return Err(usage("--timeout must be positive"));
        }
        let mut backend = BackendProcess::spawn(cmd, Duration::from_secs_f64(a.timeout))?;
        if let Some(t) = &a.template {
            let text = std::fs::read_to_string(t).with_context(|| format!("cannot read {}", t.display()))?;
            let template: PromptTemplate = serde_json::from_str(&text).with_context(|| format!("invalid template {}", t.display()))?;
            backend = backend.with_template(template);
        }
        return Ok(Some(Generator::Backend(Box::new(backend))));
    }
    Ok(None)
}

fn check_k(k: usize) -> anyhow::Result<()> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    Ok(())
}

fn check_threshold(t: f64) -> anyhow::Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(usage("--threshold must lie strictly between 0 and 1"));
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    check_k(a.k)?;
    check_threshold(a.threshold)?;
    let generator = open_generator(&a.generator)?.ok_or_else(|| usage("evaluate needs --index or --backend"))?;
    let g = generator.as_dyn();
    let records = read_corpus(&a.corpus)?;

    let mut preds = Vec::with_capacity(records.len());
    for r in &records {
        let candidates = g.generate(r, a.k)?;
        preds.push(candidates.into_iter().next().map(|c| c.name).unwrap_or_else(SubtokenSeq::empty));
    }
    let golds: Vec<SubtokenSeq> = records.iter().map(|r| r.name.clone()).collect();
    let mut report: EvalReport = evaluate_predictions(&preds, &golds)?;
    report.length = Some(length_analysis(&preds, &golds)?);

    if let Some(path) = &a.dataset {
        let examples = read_dataset(path)?;
        let model = a.model.as_deref().map(ClassifierModel::load).transpose()?;
        let strategy = Strategy::from(a.strategy);
        if strategy == Strategy::Classification && model.is_none() && generator.backend().is_none() {
            return Err(usage("classification needs --model or a --backend that answers classify requests"));
        }
        let mut pairs = Vec::with_capacity(examples.len());
        for e in &examples {
            let predicted = match (strategy, &model) {
                (Strategy::Classification, Some(m)) => check_classification(m, &e.record, &e.presented_name)?.label,
                (Strategy::Classification, None) => generator.backend().expect("checked above").classify(&e.record, &e.presented_name)?.0,
                (Strategy::GenerateThenCompare, _) => check_generate_then_compare(g, &e.record, &e.presented_name, a.threshold)?.label,
            };
            pairs.push((predicted, e.label));
        }
        report.mcc = Some(mcc_metrics(&pairs)?);
    }

    print!("{}", render_table(&report));
    if let Some(out) = &a.out {
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        write_file(out, &json)?;
    }
    Ok(())
}

fn check(a: CheckArgs) -> anyhow::Result<()> {
    check_k(a.k)?;
    check_threshold(a.threshold)?;
    let strategy = Strategy::from(a.strategy);
    let model = match (&a.model, strategy) {
        (Some(p), _) => Some(ClassifierModel::load(p)?),
        (None, Strategy::Classification) => return Err(usage("--strategy classification needs --model")),
        (None, Strategy::GenerateThenCompare) => None,
    };
    let generator = open_generator(&a.generator)?;
    let opts = CheckOptions { strategy, threshold: a.threshold, k: a.k };
    let report = cmd_check(&a.roots, model.as_ref(), generator.as_ref().map(Generator::as_dyn), &opts)?;
    let text = match a.format {
        Format::Text => check::render_text(&report),
        Format::Machine => check::render_machine(&report),
    };
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn quality(a: QualityArgs) -> anyhow::Result<()> {
    let lex = Lexicons::with_overrides(a.verbs.as_deref(), a.dictionary.as_deref(), a.abbreviations.as_deref())?;
    let names: Vec<String> = match &a.corpus {
        Some(p) => read_corpus(p)?.iter().map(|r| join_subtokens(&r.name, JoinStyle::Camel)).collect::<Result<_, _>>()?,
        None => a.names.clone(),
    };
    if names.is_empty() {
        return Err(usage("give identifiers or --corpus"));
    }
    if a.corpus.is_none() {
        for n in &names {
            let s = score_name_with(&lex, n, None)?;
            let failed: Vec<&str> = s.per_standard.iter().filter(|r| !r.passed).map(|r| r.standard.as_str()).collect();
            println!("{n}\t{}\t{}", s.total, failed.join(","));
        }
    }
    let summary = score_corpus_with(&lex, &names)?;
    println!("mean {:.4} over {} names, {:.4} scoring 10", summary.mean, summary.count, summary.excellent_share);
    Ok(())
}
