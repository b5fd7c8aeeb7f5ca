//! Helpers shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use namewise::corpus::{normalize, MethodRecord};
use namewise::java_extract::{is_keyword, scan_project};
use namewise::negsample::{corrupt_with_rng, example_rng, EditDistribution, Vocabulary};
use namewise::tokenize::{join_subtokens, JoinStyle};

pub const E2E_PROJECTS: [&str; 3] = ["billing", "inventory", "messaging"];

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn copy_tree(src: &Path, dst: &Path) {
    for entry in walkdir::WalkDir::new(src) {
        let entry = entry.unwrap();
        let target = dst.join(entry.path().strip_prefix(src).unwrap());
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

pub fn project_records(root: &Path) -> Vec<MethodRecord> {
    let scan = scan_project(root).unwrap();
    assert!(scan.failures.is_empty(), "{:?}", scan.failures);
    scan.methods.iter().map(|m| normalize(m).unwrap()).collect()
}

pub fn e2e_records(base: &Path) -> Vec<MethodRecord> {
    E2E_PROJECTS.iter().flat_map(|p| project_records(&base.join(p))).collect()
}

/// Key that survives renaming: a method's position within its file.
pub type MethodKey = (String, String, usize);

pub fn keys(records: &[MethodRecord]) -> Vec<MethodKey> {
    let mut out = Vec::with_capacity(records.len());
    let mut prev: Option<(&str, &str)> = None;
    let mut ordinal = 0;
    for r in records {
        if prev == Some((&r.project, &r.path)) {
            ordinal += 1;
        } else {
            ordinal = 0;
        }
        prev = Some((&r.project, &r.path));
        out.push((r.project.clone(), r.path.clone(), ordinal));
    }
    out
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Byte offset of the declared name inside `text`: the first whole-word
/// occurrence followed by an opening parenthesis.
fn name_offset(text: &str, name: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(i) = text[from..].find(name).map(|i| i + from) {
        let end = i + name.len();
        let before_ok = i == 0 || !is_ident_byte(bytes[i - 1]);
        let after = text[end..].trim_start();
        if before_ok && (end == bytes.len() || !is_ident_byte(bytes[end])) && after.starts_with('(') {
            return Some(i);
        }
        from = i + 1;
    }
    None
}

/// Renames a seeded subset of the methods under `base` in place. Each
/// method is picked with probability `rate`; its new name is a sampled
/// corruption of the old one. Returns the keys of the renamed methods.
pub fn corrupt_tree(base: &Path, rate: f64, dist: &EditDistribution, seed: u64) -> BTreeSet<MethodKey> {
    let records = e2e_records(base);
    let vocab = Vocabulary::from_records(&records);
    let keys = keys(&records);
    let mut renamed = BTreeSet::new();
    let mut edits: Vec<(PathBuf, usize, usize, String)> = Vec::new();
    for (i, (record, key)) in records.iter().zip(&keys).enumerate() {
        let mut rng = example_rng(seed, i as u64);
        if !rng.gen_bool(rate) {
            continue;
        }
        let ident = loop {
            let c = corrupt_with_rng(&record.name, dist, &vocab, &mut rng).unwrap();
            let ident = join_subtokens(&c.name, JoinStyle::Camel).unwrap();
            if !is_keyword(&ident) {
                break ident;
            }
        };
        let file = base.join(&record.project).join(&record.path);
        let text = fs::read_to_string(&file).unwrap();
        let old = join_subtokens(&record.name, JoinStyle::Camel).unwrap();
        let span = &text[record.span.start..record.span.end];
        let at = record.span.start + name_offset(span, &old).unwrap_or_else(|| panic!("{old} not found in {}", record.path));
        edits.push((file, at, old.len(), ident));
        renamed.insert(key.clone());
    }
    edits.sort_by(|a, b| (&a.0, b.1).cmp(&(&b.0, a.1)));
    for (file, at, len, ident) in edits {
        let mut text = fs::read_to_string(&file).unwrap();
        text.replace_range(at..at + len, &ident);
        fs::write(&file, text).unwrap();
    }
    renamed
}

/// Lowercase pseudo-word `prefix` followed by `i` in base 26.
pub fn word(prefix: &str, mut i: usize) -> String {
    let mut s = String::from(prefix);
    let mut digits = Vec::new();
    loop {
        digits.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    digits.reverse();
    s.push_str(std::str::from_utf8(&digits).unwrap());
    s
}

/// Synthetic naming corpus for comparing the two consistency strategies.
///
/// Names are a verb plus a noun drawn from base vocabularies. Bodies
/// mention the name tokens among filler tokens. A synonym rewrite maps
/// every base token of a record to a disjoint synonym, leaving every
/// feature unchanged while sharing no token with any base name.
pub struct Synthetic {
    pub verbs: usize,
    pub nouns: usize,
    pub fillers: usize,
}

impl Default for Synthetic {
    fn default() -> Self {
        Self { verbs: 12, nouns: 20, fillers: 60 }
    }
}

impl Synthetic {
    fn verb(&self, i: usize) -> String {
        word("v", i)
    }

    fn noun(&self, i: usize) -> String {
        word("n", i)
    }

    /// Synonym of a base token; other tokens map to themselves.
    pub fn synonym(token: &str) -> String {
        match token.as_bytes().first() {
            Some(b'v') => format!("x{}", &token[1..]),
            Some(b'n') => format!("y{}", &token[1..]),
            _ => token.to_string(),
        }
    }

    pub fn base_record<R: Rng>(&self, rng: &mut R, project: &str, index: usize) -> MethodRecord {
        use namewise::tokenize::SubtokenSeq;
        let v = self.verb(rng.gen_range(0..self.verbs));
        let n = self.noun(rng.gen_range(0..self.nouns));
        let mut body: Vec<String> = (0..rng.gen_range(3..8)).map(|_| word("f", rng.gen_range(0..self.fillers))).collect();
        body.insert(rng.gen_range(0..=body.len()), n.clone());
        if rng.gen_bool(0.8) {
            body.insert(rng.gen_range(0..=body.len()), v.clone());
        }
        let siblings = (0..3)
            .map(|_| SubtokenSeq::new(vec![self.verb(rng.gen_range(0..self.verbs)), self.noun(rng.gen_range(0..self.nouns))]).unwrap())
            .collect();
        MethodRecord {
            name: SubtokenSeq::new(vec![v, n.clone()]).unwrap(),
            signature: SubtokenSeq::new(vec![n]).unwrap(),
            body: SubtokenSeq::new(body).unwrap(),
            class_name: SubtokenSeq::new(vec![word("c", rng.gen_range(0..8))]).unwrap(),
            siblings,
            attributes: Vec::new(),
            project: project.to_string(),
            path: format!("M{index}.java"),
            span: namewise::java_extract::ByteSpan { start: index * 100, end: index * 100 + 50 },
        }
    }

    pub fn rewrite(record: &MethodRecord) -> MethodRecord {
        use namewise::tokenize::SubtokenSeq;
        let map = |s: &SubtokenSeq| SubtokenSeq::new(s.iter().map(|t| Self::synonym(t)).collect()).unwrap();
        MethodRecord {
            name: map(&record.name),
            signature: map(&record.signature),
            body: map(&record.body),
            class_name: record.class_name.clone(),
            siblings: record.siblings.iter().map(map).collect(),
            attributes: record.attributes.iter().map(map).collect(),
            ..record.clone()
        }
    }

    /// `n` records; the odd-numbered half is synonym-rewritten.
    pub fn records(&self, n: usize, project: &str, seed: u64) -> Vec<MethodRecord> {
        let mut rng = example_rng(seed, 0);
        (0..n)
            .map(|i| {
                let r = self.base_record(&mut rng, project, i);
                if i % 2 == 1 {
                    Self::rewrite(&r)
                } else {
                    r
                }
            })
            .collect()
    }
}
