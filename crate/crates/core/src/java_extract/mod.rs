//! Method context extraction from Java sources.
//!
//! The parser covers the declaration-level subset needed to collect the
//! local context of a method (parameters, return type, body identifiers)
//! and the context of its innermost enclosing class (class name, sibling
//! method names, attributes). Bodies are only brace-balanced, never parsed.

mod lexer;
mod parser;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexer::{is_keyword, KEYWORDS, LITERAL_WORDS};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("{path}:{offset} no class declaration recoverable: {reason}")]
    FileUnparseable { path: String, offset: usize, reason: String },
    #[error("project root `{0}` does not exist or is not a directory")]
    RootMissing(PathBuf),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub project_id: String,
    pub path: String,
    pub content: String,
    /// Set when the bytes on disk were not valid UTF-8 and were decoded
    /// with replacement characters.
    pub lossy: bool,
}

impl SourceFile {
    pub fn new(project_id: impl Into<String>, path: impl Into<String>, content: impl Into<String>) -> Self {
        Self { project_id: project_id.into(), path: path.into(), content: content.into(), lossy: false }
    }

    pub fn from_bytes(project_id: impl Into<String>, path: impl Into<String>, bytes: Vec<u8>) -> Self {
        let (content, lossy) = match String::from_utf8(bytes) {
            Ok(s) => (s, false),
            Err(e) => (String::from_utf8_lossy(e.as_bytes()).into_owned(), true),
        };
        Self { project_id: project_id.into(), path: path.into(), content, lossy }
    }
}

/// Half-open byte range `[start, end)` into the source file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl From<[usize; 2]> for ByteSpan {
    fn from([start, end]: [usize; 2]) -> Self {
        Self { start, end }
    }
}

impl From<ByteSpan> for [usize; 2] {
    fn from(span: ByteSpan) -> Self {
        [span.start, span.end]
    }
}

impl fmt::Display for ByteSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMethod {
    pub name: String,
    pub param_names: Vec<String>,
    pub param_types: Vec<String>,
    pub return_type: String,
    pub body_identifiers: Vec<String>,
    pub class_name: String,
    pub sibling_names: Vec<String>,
    pub attribute_entries: Vec<(String, String)>,
    pub project_id: String,
    pub path: String,
    pub byte_span: ByteSpan,
}

/// A construct the parser skipped. Renders as `SKIP <path>:<offset> <reason>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub offset: usize,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SKIP {}:{} {}", self.path, self.offset, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileParse {
    pub methods: Vec<RawMethod>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Extracts one [`RawMethod`] per method declaration that has a body.
///
/// Constructors, initializers and bodiless (abstract or interface) methods
/// yield no record; bodiless methods still count as siblings.
pub fn parse_file(file: &SourceFile) -> Result<FileParse, ExtractError> {
    parser::parse(file)
}

#[derive(Debug, Default)]
pub struct ProjectScan {
    pub project_id: String,
    pub methods: Vec<RawMethod>,
    pub diagnostics: Vec<Diagnostic>,
    /// Files skipped entirely, in path order.
    pub failures: Vec<ExtractError>,
}

/// Parses every `.java` file under `root` in lexicographic path order.
///
/// Paths in the records are relative to `root` with `/` separators. Files
/// are parsed in parallel; the result does not depend on scheduling.
pub fn scan_project(root: &Path) -> Result<ProjectScan, ExtractError> {
    if !root.is_dir() {
        return Err(ExtractError::RootMissing(root.to_path_buf()));
    }
    let project_id = project_id_for(root);

    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| ExtractError::Io {
            path: e.path().map_or_else(|| root.to_path_buf(), Path::to_path_buf),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|e| e == "java") {
            let rel =
                path.strip_prefix(root).unwrap_or(path).components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            files.push((rel, path.to_path_buf()));
        }
    }
    files.sort();

    let results: Vec<Result<FileParse, ExtractError>> = files
        .par_iter()
        .map(|(rel, path)| {
            let bytes = fs::read(path).map_err(|source| ExtractError::Io { path: path.clone(), source })?;
            parse_file(&SourceFile::from_bytes(project_id.clone(), rel.clone(), bytes))
        })
        .collect();

    let mut scan = ProjectScan { project_id, ..Default::default() };
    for result in results {
        match result {
            Ok(parsed) => {
                scan.methods.extend(parsed.methods);
                scan.diagnostics.extend(parsed.diagnostics);
            }
            Err(e) => scan.failures.push(e),
        }
    }
    Ok(scan)
}

fn project_id_for(root: &Path) -> String {
    let resolved = fs::canonicalize(root).unwrap_or_else(|_| root.to_path_buf());
    resolved.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "root".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> FileParse {
        parse_file(&SourceFile::new("p", "A.java", src)).unwrap()
    }

    #[test]
    fn minimal_class() {
        let methods = parse("class A { void run() {} }").methods;
        assert_eq!(methods.len(), 1);
        let m = &methods[0];
        assert_eq!(m.name, "run");
        assert_eq!(m.class_name, "A");
        assert_eq!(m.return_type, "void");
        assert!(m.param_names.is_empty() && m.sibling_names.is_empty() && m.attribute_entries.is_empty());
    }

    #[test]
    fn siblings_attributes_and_body() {
        let methods = parse("class A { int x; void f(){g();} void g(){} }").methods;
        let f = &methods[0];
        assert_eq!(f.name, "f");
        assert_eq!(f.sibling_names, ["g"]);
        assert_eq!(f.attribute_entries, [("x".to_string(), "int".to_string())]);
        assert_eq!(f.body_identifiers, ["g"]);
        assert_eq!(methods[1].sibling_names, ["f"]);
    }

    #[test]
    fn interface_without_bodies_yields_nothing() {
        let parsed = parse("public interface Shape { double area(); String label(int pad); }");
        assert!(parsed.methods.is_empty());
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn no_type_declaration_is_unparseable() {
        let err = parse_file(&SourceFile::new("p", "X.java", "package a.b; import c.D;")).unwrap_err();
        assert!(matches!(err, ExtractError::FileUnparseable { .. }));
    }

    #[test]
    fn signature_and_generics() {
        let src = r#"
            package demo;
            import java.util.*;
            @SuppressWarnings("unchecked")
            public final class Repo<T extends Comparable<T>> extends Base implements Iterable<T> {
                private final Map<String, List<T>> byKey = new HashMap<String, List<T>>(), spare;
                protected static int[] counts = {1, 2}, other;
                @Override
                public <R> java.util.List<R> mapAll(final Function<? super T, ? extends R> fn, int... limits) throws IOException {
                    List<R> out = new ArrayList<>();
                    for (T item : byKey.get("a")) { out.add(fn.apply(item)); }
                    return out;
                }
                public Repo(int size) { this.size = size; }
                abstract boolean isEmpty();
            }
        "#;
        let parsed = parse(src);
        assert_eq!(parsed.methods.len(), 1, "{:?}", parsed.diagnostics);
        let m = &parsed.methods[0];
        assert_eq!(m.name, "mapAll");
        assert_eq!(m.class_name, "Repo");
        assert_eq!(m.param_names, ["fn", "limits"]);
        assert_eq!(m.param_types, ["Function", "int"]);
        assert_eq!(m.return_type, "List");
        assert_eq!(m.sibling_names, ["isEmpty"]);
        assert_eq!(
            m.attribute_entries,
            [
                ("byKey".to_string(), "Map".to_string()),
                ("spare".to_string(), "Map".to_string()),
                ("counts".to_string(), "int".to_string()),
                ("other".to_string(), "int".to_string()),
            ]
        );
        assert_eq!(
            m.body_identifiers,
            ["List", "R", "out", "ArrayList", "T", "item", "byKey", "get", "out", "add", "fn", "apply", "item", "out"]
        );
        assert!(src[m.byte_span.start..].starts_with("@Override"));
        assert!(src[..m.byte_span.end].ends_with('}'));
    }

    #[test]
    fn nested_classes_use_innermost_context() {
        let src = "class Outer { int a; void outerM() { } static class Inner { String b; void innerM() { x(); } void y() {} } }";
        let methods = parse(src).methods;
        let names: Vec<_> = methods.iter().map(|m| (m.name.as_str(), m.class_name.as_str())).collect();
        assert_eq!(names, [("outerM", "Outer"), ("innerM", "Inner"), ("y", "Inner")]);
        assert!(methods[0].sibling_names.is_empty());
        assert_eq!(methods[1].attribute_entries, [("b".to_string(), "String".to_string())]);
        assert_eq!(methods[1].sibling_names, ["y"]);
    }

    #[test]
    fn overloads_are_separate_records() {
        let methods = parse("class A { void f(int a){} void f(){} void g(){} }").methods;
        assert_eq!(methods.len(), 3);
        assert_eq!(methods[0].sibling_names, ["f", "g"]);
        assert_eq!(methods[1].sibling_names, ["f", "g"]);
        assert_eq!(methods[2].sibling_names, ["f", "f"]);
    }

    #[test]
    fn enums_records_and_lambdas() {
        let src = r#"
            enum Color { RED("r") { void paint() {} }, GREEN("g"); private final String code;
              Color(String c) { code = c; }
              String code() { return items.stream().map(s -> s.trim()).findFirst().orElse(code); } }
            record Point(int x, int y) { Point { check(x); } int sum() { return x + y; } }
        "#;
        let methods = parse(src).methods;
        assert_eq!(methods.len(), 2);
        assert_eq!(methods[0].name, "code");
        assert_eq!(methods[0].attribute_entries, [("code".to_string(), "String".to_string())]);
        assert_eq!(methods[0].body_identifiers, ["items", "stream", "map", "s", "s", "trim", "findFirst", "orElse", "code"]);
        assert_eq!(methods[1].name, "sum");
        assert_eq!(methods[1].class_name, "Point");
        assert_eq!(methods[1].attribute_entries, [("x".to_string(), "int".to_string()), ("y".to_string(), "int".to_string())]);
    }

    #[test]
    fn broken_method_is_skipped_with_diagnostic() {
        let src = "class A { void ok() { a(); } void bad(int x int y) { b(); } void fine() { c(); } }";
        let parsed = parse(src);
        let names: Vec<_> = parsed.methods.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["ok", "fine"]);
        assert_eq!(parsed.diagnostics.len(), 1);
        let d = &parsed.diagnostics[0];
        assert!(d.to_string().starts_with("SKIP A.java:"), "{d}");
    }

    #[test]
    fn keywords_and_literals_never_in_body() {
        let src =
            "class A { int f(int n) { if (n > 0) { return n * 2; } for (;;) { break; } return this.g(\"s\", 'c', 1L, true, null); } }";
        let m = &parse(src).methods[0];
        assert_eq!(m.body_identifiers, ["n", "n", "g"]);
        for id in &m.body_identifiers {
            assert!(!is_keyword(id));
        }
    }

    #[test]
    fn annotations_inside_bodies_are_skipped() {
        let src = "class A { void f() { @SuppressWarnings(\"x\") int v = compute(); } }";
        assert_eq!(parse(src).methods[0].body_identifiers, ["v", "compute"]);
    }

    #[test]
    fn anonymous_class_bodies_are_mined_not_extracted() {
        let src = "class A { Runnable make() { return new Runnable() { public void run() { go(); } }; } }";
        let methods = parse(src).methods;
        assert_eq!(methods.len(), 1);
        assert_eq!(methods[0].body_identifiers, ["Runnable", "run", "go"]);
    }

    #[test]
    fn unterminated_body_keeps_earlier_methods() {
        let parsed = parse("class A { void a() { x(); } void b() { if (y) { ");
        assert_eq!(parsed.methods.len(), 1);
        assert!(!parsed.diagnostics.is_empty());
    }

    #[test]
    fn parsing_is_deterministic() {
        let src = "class A { int x; void f(){g();} void g(){ f(); } }";
        assert_eq!(parse(src), parse(src));
    }

    #[test]
    fn lossy_decoding_is_flagged() {
        let file = SourceFile::from_bytes("p", "A.java", b"class A { void f() { \xff(); } }".to_vec());
        assert!(file.lossy);
        assert_eq!(parse_file(&file).unwrap().methods.len(), 1);
    }
}
