//! Model input serialization: context groups prefixed with indicator words,
//! followed by a cloze-style template ending in the mask marker.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::MethodRecord;

/// Maximum serialized input length, in counted tokens.
pub const MAX_INPUT_TOKENS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("serialized contexts need {count} tokens, limit is {limit}; record was not normalized")]
    BudgetExceeded { count: usize, limit: usize },
    #[error("prompt template is invalid: {0}")]
    InvalidTemplate(String),
}

/// Indicator words and template text. Backends trained with other wording
/// can be served by overriding these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplate {
    pub class: String,
    pub attributes: String,
    pub siblings: String,
    pub signature: String,
    pub body: String,
    /// Separator between entries of the attribute and sibling groups. Not counted.
    pub separator: String,
    pub suffix: String,
    pub mask: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            class: "class:".into(),
            attributes: "attributes:".into(),
            siblings: "siblings:".into(),
            signature: "signature:".into(),
            body: "body:".into(),
            separator: ";".into(),
            suffix: "The method name is".into(),
            mask: "<MASK>".into(),
        }
    }
}

impl PromptTemplate {
    fn validate(&self) -> Result<(), PromptError> {
        let words = [&self.class, &self.attributes, &self.siblings, &self.signature, &self.body, &self.mask];
        for w in words {
            if w.is_empty() || w.split_whitespace().count() != 1 {
                return Err(PromptError::InvalidTemplate(format!("`{w}` must be a single word")));
            }
        }
        if self.separator.split_whitespace().count() != 1 {
            return Err(PromptError::InvalidTemplate("separator must be a single word".into()));
        }
        if self.suffix.contains(&self.mask) {
            return Err(PromptError::InvalidTemplate("suffix must not contain the mask".into()));
        }
        Ok(())
    }

    /// Template words counted per prompt: the suffix words plus the mask.
    pub fn template_words(&self) -> usize {
        self.suffix.split_whitespace().count() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub text: String,
    pub token_count: usize,
}

/// Counted tokens of the serialized contexts: subtokens, one indicator word
/// per non-empty group, and the template words. Group separators are not
/// counted.
pub fn token_count(record: &MethodRecord) -> usize {
    token_count_with(record, PromptTemplate::default().template_words())
}

fn token_count_with(record: &MethodRecord, template_words: usize) -> usize {
    let group = |n: usize| if n == 0 { 0 } else { n + 1 };
    group(record.class_name.len())
        + group(record.attributes.iter().map(|a| a.len()).sum())
        + group(record.siblings.iter().map(|s| s.len()).sum())
        + group(record.signature.len())
        + group(record.body.len())
        + template_words
}

pub fn serialize_contexts(record: &MethodRecord) -> Result<PromptText, PromptError> {
    serialize_with(record, &PromptTemplate::default())
}

/// Renders `class: .. attributes: .. siblings: .. signature: .. body: ..`
/// followed by the template. Empty groups are omitted with their indicator.
pub fn serialize_with(record: &MethodRecord, template: &PromptTemplate) -> Result<PromptText, PromptError> {
    template.validate()?;
    let token_count = token_count_with(record, template.template_words());
    if token_count > MAX_INPUT_TOKENS {
        return Err(PromptError::BudgetExceeded { count: token_count, limit: MAX_INPUT_TOKENS });
    }

    let mut parts: Vec<String> = Vec::new();
    let joined_groups = |entries: &[crate::tokenize::SubtokenSeq]| {
        entries.iter().filter(|e| !e.is_empty()).map(|e| e.to_string()).collect::<Vec<_>>().join(&format!(" {} ", template.separator))
    };
    if !record.class_name.is_empty() {
        parts.push(format!("{} {}", template.class, record.class_name));
    }
    if record.attributes.iter().any(|a| !a.is_empty()) {
        parts.push(format!("{} {}", template.attributes, joined_groups(&record.attributes)));
    }
    if record.siblings.iter().any(|s| !s.is_empty()) {
        parts.push(format!("{} {}", template.siblings, joined_groups(&record.siblings)));
    }
    if !record.signature.is_empty() {
        parts.push(format!("{} {}", template.signature, record.signature));
    }
    if !record.body.is_empty() {
        parts.push(format!("{} {}", template.body, record.body));
    }
    parts.push(format!("{} {}", template.suffix, template.mask));
    Ok(PromptText { text: parts.join(" "), token_count })
}
