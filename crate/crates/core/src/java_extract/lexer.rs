//! Java tokenizer. Comments and whitespace are dropped, literals are kept
//! as opaque tokens so they never surface as identifiers.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// `true`, `false`, `null`, numbers, strings, chars, text blocks.
    Literal,
    /// Single punctuation or operator character. Multi-character operators
    /// are emitted one character at a time, which keeps `>>` splittable in
    /// generic type arguments.
    Punct(char),
    /// `...`
    Ellipsis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub reason: &'static str,
}

pub const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

pub const LITERAL_WORDS: &[&str] = &["true", "false", "null"];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Tokenizes `src`. Lexical problems do not abort: an unterminated string
/// or char literal runs to the end of its line, an unterminated comment or
/// text block runs to the end of input. Each problem is reported.
pub fn lex(src: &str) -> (Vec<Token<'_>>, Vec<LexError>) {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(bytes.len(), |p| i + p + 1);
            continue;
        }
        if src[i..].starts_with("/*") {
            match src[i + 2..].find("*/") {
                Some(p) => i = i + 2 + p + 2,
                None => {
                    errors.push(LexError { offset: start, reason: "unterminated comment" });
                    i = bytes.len();
                }
            }
            continue;
        }
        if src[i..].starts_with("\"\"\"") {
            match src[i + 3..].find("\"\"\"") {
                Some(p) => i = i + 3 + p + 3,
                None => {
                    errors.push(LexError { offset: start, reason: "unterminated text block" });
                    i = bytes.len();
                }
            }
            tokens.push(Token { kind: TokenKind::Literal, text: &src[start..i], start, end: i });
            continue;
        }
        if c == '"' || c == '\'' {
            i = match scan_quoted(bytes, i, c as u8) {
                Ok(end) => end,
                Err(end) => {
                    errors.push(LexError { offset: start, reason: "unterminated literal" });
                    end
                }
            };
            tokens.push(Token { kind: TokenKind::Literal, text: &src[start..i], start, end: i });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i = scan_number(bytes, i);
            tokens.push(Token { kind: TokenKind::Literal, text: &src[start..i], start, end: i });
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            for ch in src[i..].chars() {
                if !is_ident_part(ch) {
                    break;
                }
                j += ch.len_utf8();
            }
            let text = &src[i..j];
            let kind = if LITERAL_WORDS.contains(&text) {
                TokenKind::Literal
            } else if is_keyword(text) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token { kind, text, start, end: j });
            i = j;
            continue;
        }
        if src[i..].starts_with("...") {
            i += 3;
            tokens.push(Token { kind: TokenKind::Ellipsis, text: &src[start..i], start, end: i });
            continue;
        }
        i += c.len_utf8();
        tokens.push(Token { kind: TokenKind::Punct(c), text: &src[start..i], start, end: i });
    }
    (tokens, errors)
}

/// Returns the end of the literal, or `Err(end of line)` when unterminated.
fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> Result<usize, usize> {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return Err(i),
            b if b == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(bytes.len())
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut i = start;
    while i < bytes.len() {
        let b = bytes[i];
        let exponent_sign = (b == b'+' || b == b'-')
            && i > start
            && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P')
            && !(bytes[start] == b'0' && matches!(bytes.get(start + 1), Some(b'x' | b'X')) && matches!(bytes[i - 1], b'e' | b'E'));
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || exponent_sign {
            i += 1;
        } else {
            break;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, &str)> {
        lex(src).0.into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn literals_and_comments() {
        let toks = kinds("x = \"a // b\" + 'c' /* y */ + 1.5e-3f; // z\nnull");
        assert_eq!(
            toks,
            vec![
                (TokenKind::Ident, "x"),
                (TokenKind::Punct('='), "="),
                (TokenKind::Literal, "\"a // b\""),
                (TokenKind::Punct('+'), "+"),
                (TokenKind::Literal, "'c'"),
                (TokenKind::Punct('+'), "+"),
                (TokenKind::Literal, "1.5e-3f"),
                (TokenKind::Punct(';'), ";"),
                (TokenKind::Literal, "null"),
            ]
        );
    }

    #[test]
    fn escapes_and_text_blocks() {
        let toks = kinds(r#"s("a\"b", '\'', """x "y" z""")"#);
        assert_eq!(toks.iter().filter(|t| t.0 == TokenKind::Literal).count(), 3);
    }

    #[test]
    fn spans_are_byte_offsets() {
        let toks = lex("é foo").0;
        assert_eq!(toks[1].start, 3);
        assert_eq!(toks[1].text, "foo");
    }

    #[test]
    fn unterminated_constructs_are_reported() {
        let (toks, errs) = lex("a /* b");
        assert_eq!(toks.len(), 1);
        assert_eq!(errs[0].offset, 2);

        let (toks, errs) = lex("x = \"abc\ny;");
        assert_eq!(errs.len(), 1);
        assert_eq!(toks.last().unwrap().text, ";");
    }

    #[test]
    fn hex_literal_is_one_token() {
        assert_eq!(kinds("0xFF_00L+1"), vec![(TokenKind::Literal, "0xFF_00L"), (TokenKind::Punct('+'), "+"), (TokenKind::Literal, "1"),]);
    }
}
