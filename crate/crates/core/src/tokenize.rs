//! Identifier subtokenization.
//!
//! Identifiers are split at separators (`_`, `$`, anything non-alphanumeric),
//! at lower-to-upper camel humps, at the end of an upper-case run when the
//! run's last capital starts a new word (`HTTPResponse` -> `http`, `response`),
//! and at letter/digit boundaries. Every subtoken is lowercase ASCII.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("identifier is empty")]
    EmptyIdentifier,
    #[error("identifier `{0}` contains no alphanumeric characters")]
    Unsplittable(String),
    #[error("subtoken sequence is empty")]
    EmptySequence,
    #[error("invalid subtoken `{0}`: expected [a-z]+ or [0-9]+")]
    InvalidSubtoken(String),
}

/// Ordered lowercase subtokens. Each token is `[a-z]+` or `[0-9]+`.
///
/// An empty sequence is representable (an empty body, a missing
/// prediction); operations that need a non-empty sequence say so.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SubtokenSeq(Vec<String>);

impl SubtokenSeq {
    pub fn new(tokens: Vec<String>) -> Result<Self, TokenizeError> {
        for t in &tokens {
            if !is_valid_subtoken(t) {
                return Err(TokenizeError::InvalidSubtoken(t.clone()));
            }
        }
        Ok(Self(tokens))
    }

    /// Builds a sequence from string slices, panicking on invalid tokens.
    /// Intended for literals in tests and fixtures.
    pub fn from_strs(tokens: &[&str]) -> Self {
        Self::new(tokens.iter().map(|t| t.to_string()).collect()).expect("invalid subtoken literal")
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn first(&self) -> Option<&str> {
        self.0.first().map(String::as_str)
    }

    pub fn last(&self) -> Option<&str> {
        self.0.last().map(String::as_str)
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn extend(&mut self, other: &SubtokenSeq) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl TryFrom<Vec<String>> for SubtokenSeq {
    type Error = TokenizeError;

    fn try_from(tokens: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(tokens)
    }
}

impl From<SubtokenSeq> for Vec<String> {
    fn from(seq: SubtokenSeq) -> Self {
        seq.0
    }
}

impl<'a> IntoIterator for &'a SubtokenSeq {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for SubtokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

pub fn is_valid_subtoken(token: &str) -> bool {
    !token.is_empty() && (token.bytes().all(|b| b.is_ascii_lowercase()) || token.bytes().all(|b| b.is_ascii_digit()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinStyle {
    Camel,
    Snake,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Upper,
    Lower,
    Digit,
}

fn classify(c: char) -> Option<Class> {
    if c.is_ascii_uppercase() {
        Some(Class::Upper)
    } else if c.is_ascii_lowercase() {
        Some(Class::Lower)
    } else if c.is_ascii_digit() {
        Some(Class::Digit)
    } else {
        None
    }
}

/// Splits an identifier into lowercase subtokens.
///
/// Non-ASCII characters are lowercased first; whatever is still outside
/// `[A-Za-z0-9]` afterwards acts as a separator.
pub fn split_identifier(ident: &str) -> Result<SubtokenSeq, TokenizeError> {
    if ident.is_empty() {
        return Err(TokenizeError::EmptyIdentifier);
    }
    let chars: Vec<char> = ident
        .chars()
        .flat_map(|c| -> Box<dyn Iterator<Item = char>> {
            if c.is_ascii() {
                Box::new(std::iter::once(c))
            } else {
                Box::new(c.to_lowercase())
            }
        })
        .collect();

    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let Some(class) = classify(c) else {
            flush(&mut current, &mut tokens);
            continue;
        };
        if let Some(prev) = i.checked_sub(1).and_then(|p| classify(chars[p])) {
            let next = chars.get(i + 1).and_then(|&n| classify(n));
            let boundary = match (prev, class) {
                (Class::Lower, Class::Upper) => true,
                (Class::Digit, Class::Upper | Class::Lower) => true,
                (Class::Upper | Class::Lower, Class::Digit) => true,
                // last capital of an upper-case run starts the next word
                (Class::Upper, Class::Upper) => next == Some(Class::Lower),
                _ => false,
            };
            if boundary {
                flush(&mut current, &mut tokens);
            }
        }
        current.push(c.to_ascii_lowercase());
    }
    flush(&mut current, &mut tokens);

    if tokens.is_empty() {
        return Err(TokenizeError::Unsplittable(ident.to_string()));
    }
    Ok(SubtokenSeq(tokens))
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// Renders subtokens as an identifier.
pub fn join_subtokens(seq: &SubtokenSeq, style: JoinStyle) -> Result<String, TokenizeError> {
    if seq.is_empty() {
        return Err(TokenizeError::EmptySequence);
    }
    Ok(match style {
        JoinStyle::Snake => seq.0.join("_"),
        JoinStyle::Camel => {
            let mut out = String::new();
            for (i, token) in seq.0.iter().enumerate() {
                if i == 0 {
                    out.push_str(token);
                } else {
                    let mut chars = token.chars();
                    if let Some(first) = chars.next() {
                        out.push(first.to_ascii_uppercase());
                        out.push_str(chars.as_str());
                    }
                }
            }
            out
        }
    })
}
