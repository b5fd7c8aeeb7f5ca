//! Method name quality: ten checkable naming standards, each a pure
//! predicate, scored 0 to 10.
//!
//! 1. 2 to 7 subtokens, or at least 3 characters when a single token.
//! 2. Starts with a verb from the verb lexicon.
//! 3. lowerCamelCase, with no underscores or other separators.
//! 4. No consecutive duplicate subtokens.
//! 5. Every alphabetic subtoken is a dictionary word or a known abbreviation.
//! 6. A boolean-returning method starts with is/has/can/should.
//! 7. No filler tokens, and not just `do`.
//! 8. Does not repeat the enclosing class name verbatim.
//! 9. No numeric subtoken except a trailing one.
//! 10. Not a Java reserved word.
//!
//! Standards 6 and 8 need the method's context and pass without it.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::MethodRecord;
use crate::java_extract::{KEYWORDS, LITERAL_WORDS};
use crate::tokenize::{join_subtokens, split_identifier, JoinStyle, SubtokenSeq};

const VERBS: &str = include_str!("../data/verbs.txt");
const DICTIONARY: &str = include_str!("../data/dictionary.txt");
const ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

const BOOLEAN_PREFIXES: &[&str] = &["is", "has", "can", "should"];
const FILLERS: &[&str] = &["stuff", "thing", "things", "tmp", "foo", "bar", "baz"];

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("name is empty")]
    EmptyName,
    #[error("name `{0}` has no subtokens")]
    Unsplittable(String),
    #[error("no names to score")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standard {
    Length,
    VerbStart,
    Casing,
    NoDuplicates,
    DictionaryWords,
    BooleanPrefix,
    NoFiller,
    NoClassRepeat,
    NoInnerNumbers,
    NotReserved,
}

impl Standard {
    pub fn as_str(self) -> &'static str {
        match self {
            Standard::Length => "length",
            Standard::VerbStart => "verb_start",
            Standard::Casing => "casing",
            Standard::NoDuplicates => "no_duplicates",
            Standard::DictionaryWords => "dictionary_words",
            Standard::BooleanPrefix => "boolean_prefix",
            Standard::NoFiller => "no_filler",
            Standard::NoClassRepeat => "no_class_repeat",
            Standard::NoInnerNumbers => "no_inner_numbers",
            Standard::NotReserved => "not_reserved",
        }
    }

    pub const ALL: [Standard; 10] = [
        Standard::Length,
        Standard::VerbStart,
        Standard::Casing,
        Standard::NoDuplicates,
        Standard::DictionaryWords,
        Standard::BooleanPrefix,
        Standard::NoFiller,
        Standard::NoClassRepeat,
        Standard::NoInnerNumbers,
        Standard::NotReserved,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardResult {
    pub standard: Standard,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityScore {
    pub total: u8,
    pub per_standard: Vec<StandardResult>,
}

impl QualityScore {
    pub fn passed(&self, standard: Standard) -> bool {
        self.per_standard.iter().any(|r| r.standard == standard && r.passed)
    }
}

/// Word lists backing standards 2 and 5.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub verbs: HashSet<String>,
    pub dictionary: HashSet<String>,
    pub abbreviations: HashSet<String>,
}

fn words(text: &str) -> HashSet<String> {
    text.lines().map(|l| l.trim().to_ascii_lowercase()).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
}

impl Lexicons {
    pub fn bundled() -> &'static Lexicons {
        static LEX: OnceLock<Lexicons> = OnceLock::new();
        LEX.get_or_init(|| Lexicons { verbs: words(VERBS), dictionary: words(DICTIONARY), abbreviations: words(ABBREVIATIONS) })
    }

    /// Bundled lists with any of them replaced by a word-per-line file.
    pub fn with_overrides(verbs: Option<&Path>, dictionary: Option<&Path>, abbreviations: Option<&Path>) -> Result<Self, QualityError> {
        let load = |p: Option<&Path>, fallback: &HashSet<String>| -> Result<HashSet<String>, QualityError> {
            match p {
                Some(p) => {
                    std::fs::read_to_string(p).map(|t| words(&t)).map_err(|source| QualityError::Io { path: p.to_path_buf(), source })
                }
                None => Ok(fallback.clone()),
            }
        };
        let b = Self::bundled();
        Ok(Lexicons {
            verbs: load(verbs, &b.verbs)?,
            dictionary: load(dictionary, &b.dictionary)?,
            abbreviations: load(abbreviations, &b.abbreviations)?,
        })
    }
}

fn is_lower_camel(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric())
}

fn returns_boolean(record: &MethodRecord) -> bool {
    record.signature.last() == Some("boolean")
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn score_name(name: &str, context: Option<&MethodRecord>) -> Result<QualityScore, QualityError> {
    score_name_with(Lexicons::bundled(), name, context)
}

pub fn score_name_with(lex: &Lexicons, name: &str, context: Option<&MethodRecord>) -> Result<QualityScore, QualityError> {
    if name.is_empty() {
        return Err(QualityError::EmptyName);
    }
    let seq = split_identifier(name).map_err(|_| QualityError::Unsplittable(name.to_string()))?;
    let t = seq.tokens();
    let first = t[0].as_str();

    let check = |standard: Standard| -> bool {
        match standard {
            Standard::Length => {
                if t.len() == 1 {
                    t[0].len() >= 3
                } else {
                    (2..=7).contains(&t.len())
                }
            }
            Standard::VerbStart => lex.verbs.contains(first),
            Standard::Casing => is_lower_camel(name),
            Standard::NoDuplicates => t.windows(2).all(|w| w[0] != w[1]),
            Standard::DictionaryWords => t
                .iter()
                .filter(|s| s.bytes().all(|b| b.is_ascii_alphabetic()))
                .all(|s| lex.dictionary.contains(s) || lex.abbreviations.contains(s)),
            Standard::BooleanPrefix => context.is_none_or(|r| !returns_boolean(r) || BOOLEAN_PREFIXES.contains(&first)),
            Standard::NoFiller => !(t.len() == 1 && first == "do") && !t.iter().any(|s| FILLERS.contains(&s.as_str())),
            Standard::NoClassRepeat => context.is_none_or(|r| !contains_run(t, r.class_name.tokens())),
            Standard::NoInnerNumbers => t[..t.len() - 1].iter().all(|s| !s.bytes().all(|b| b.is_ascii_digit())),
            Standard::NotReserved => !KEYWORDS.contains(&name) && !LITERAL_WORDS.contains(&name),
        }
    };

    let per_standard: Vec<StandardResult> =
        Standard::ALL.iter().map(|&standard| StandardResult { standard, passed: check(standard) }).collect();
    let total = per_standard.iter().filter(|r| r.passed).count() as u8;
    Ok(QualityScore { total, per_standard })
}

/// Scores a subtoken sequence rendered as lowerCamelCase.
pub fn score_subtokens(name: &SubtokenSeq, context: Option<&MethodRecord>) -> Result<QualityScore, QualityError> {
    let ident = join_subtokens(name, JoinStyle::Camel).map_err(|_| QualityError::EmptyName)?;
    score_name(&ident, context)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusQuality {
    pub count: usize,
    pub mean: f64,
    /// Index = total score, 0..=10.
    pub histogram: Vec<usize>,
    /// Share of names scoring 10.
    pub excellent_share: f64,
}

pub fn score_corpus<S: AsRef<str>>(names: &[S]) -> Result<CorpusQuality, QualityError> {
    score_corpus_with(Lexicons::bundled(), names)
}

pub fn score_corpus_with<S: AsRef<str>>(lex: &Lexicons, names: &[S]) -> Result<CorpusQuality, QualityError> {
    if names.is_empty() {
        return Err(QualityError::EmptyInput);
    }
    let mut histogram = vec![0; 11];
    for n in names {
        histogram[score_name_with(lex, n.as_ref(), None)?.total as usize] += 1;
    }
    let count = names.len();
    let sum: usize = histogram.iter().enumerate().map(|(score, c)| score * c).sum();
    Ok(CorpusQuality { count, mean: sum as f64 / count as f64, excellent_share: histogram[10] as f64 / count as f64, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn failed(s: &QualityScore) -> Vec<Standard> {
        s.per_standard.iter().filter(|r| !r.passed).map(|r| r.standard).collect()
    }

    #[test]
    fn well_formed_name_scores_ten() {
        let s = score_name("getSystemProperties", None).unwrap();
        assert_eq!(failed(&s), vec![]);
        assert_eq!(s.total, 10);
    }

    #[test]
    fn single_letter_name() {
        let s = score_name("x", None).unwrap();
        assert_eq!(failed(&s), vec![Standard::Length, Standard::VerbStart, Standard::DictionaryWords]);
        assert_eq!(s.total, 7);
    }

    #[test]
    fn mixed_casing_fails() {
        let s = score_name("get_Name2value", None).unwrap();
        assert!(!s.passed(Standard::Casing));
        assert!(s.total <= 9);
    }

    #[test]
    fn context_standards() {
        let record = MethodRecord {
            name: SubtokenSeq::from_strs(&["valid"]),
            signature: SubtokenSeq::from_strs(&["user", "boolean"]),
            class_name: SubtokenSeq::from_strs(&["user"]),
            ..Default::default()
        };
        let s = score_name("checkUser", Some(&record)).unwrap();
        assert_eq!(failed(&s), vec![Standard::BooleanPrefix, Standard::NoClassRepeat]);
        let s = score_name("isValid", Some(&record)).unwrap();
        assert_eq!(s.total, 10);
    }

    #[test]
    fn other_rules() {
        assert!(!score_name("getGetName", None).unwrap().passed(Standard::NoDuplicates));
        assert!(!score_name("doStuff", None).unwrap().passed(Standard::NoFiller));
        assert!(!score_name("do", None).unwrap().passed(Standard::NoFiller));
        assert!(score_name("decodeBase64", None).unwrap().passed(Standard::NoInnerNumbers));
        assert!(!score_name("get2Name", None).unwrap().passed(Standard::NoInnerNumbers));
        assert!(!score_name("class", None).unwrap().passed(Standard::NotReserved));
        assert!(score_name("getSysProps", None).unwrap().passed(Standard::DictionaryWords));
        assert!(matches!(score_name("", None), Err(QualityError::EmptyName)));
    }

    #[test]
    fn corpus_summary() {
        let q = score_corpus(&["getName", "setValue"]).unwrap();
        assert_eq!((q.mean, q.excellent_share), (10.0, 1.0));
        // 8 + 10
        let q = score_corpus(&["getGetStuff", "getName"]).unwrap();
        assert_eq!(q.histogram[8], 1);
        assert_eq!(q.mean, 9.0);
        assert_eq!(q.histogram.iter().sum::<usize>(), 2);
        assert!(matches!(score_corpus::<&str>(&[]), Err(QualityError::EmptyInput)));
    }

    proptest! {
        #[test]
        fn totals_count_passes(name in "[a-zA-Z_][a-zA-Z0-9_]{0,20}") {
            prop_assume!(name.chars().any(|c| c.is_ascii_alphanumeric()));
            let s = score_name(&name, None).unwrap();
            prop_assert!(s.total <= 10);
            prop_assert_eq!(s.total as usize, s.per_standard.iter().filter(|r| r.passed).count());
            prop_assert_eq!(s, score_name(&name, None).unwrap());
        }

        #[test]
        fn short_name_to_verb_never_lowers(short in "[a-z]{1,2}", verb in prop::sample::select(
            Lexicons::bundled().verbs.iter().filter(|v| v.len() >= 3 && !KEYWORDS.contains(&v.as_str())).cloned().collect::<Vec<_>>()
        )) {
            // A 1-2 letter name lengthened to a real verb.
            let before = score_name(&short, None).unwrap().total;
            let after = score_name(&verb, None).unwrap().total;
            prop_assert!(after >= before, "{} {} -> {} {}", short, before, verb, after);
        }
    }
}
