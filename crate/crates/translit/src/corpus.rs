//! Corpus file ingestion and serialization.
//!
//! One entry per line: `WORD<TAB>target tokens[<TAB>source phoneme tokens]`.
//! The source word is uppercased, target tokens are space-separated phoneme
//! symbols, tone numerals and `.` delimiters, and the optional third column
//! carries one source phoneme per letter with `_` for letters that have
//! none. Lines starting with `#` are comments. Loading validates every line
//! and reports all problems at once; duplicates are retained.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::mapping::SourcePhonemes;
use crate::phonology::{parse_pronunciation, LanguageResource, Pronunciation, SourceWord};

/// One validated training or test example.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub word: SourceWord,
    pub target_tokens: Vec<String>,
    pub target: Pronunciation,
    pub source_phonemes: Option<SourcePhonemes>,
}

/// A problem on one corpus line (1-based line numbers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("{} invalid line(s):\n{}", .0.len(), format_issues(.0))]
    Invalid(Vec<LineIssue>),
    #[error("corpus file is empty")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

fn format_issues(issues: &[LineIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Marker used in the source-phoneme column for letters with no phoneme.
pub const NO_PHONEME: &str = "_";

pub fn load_corpus(
    path: &Path,
    resource: &LanguageResource,
) -> Result<Vec<CorpusEntry>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io(e.to_string()))?;
    parse_corpus(&text, resource)
}

pub fn parse_corpus(
    text: &str,
    resource: &LanguageResource,
) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut entries = Vec::new();
    let mut issues = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line, resource) {
            Ok(entry) => entries.push(entry),
            Err(message) => issues.push(LineIssue {
                line: line_no,
                message,
            }),
        }
    }
    if !issues.is_empty() {
        return Err(CorpusError::Invalid(issues));
    }
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(entries)
}

fn parse_line(line: &str, resource: &LanguageResource) -> Result<CorpusEntry, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(format!(
            "expected 2 or 3 tab-separated columns, found {}",
            fields.len()
        ));
    }
    let word = resource
        .classify_word(fields[0].trim())
        .map_err(|e| e.to_string())?;
    let target_tokens: Vec<String> = fields[1]
        .split_whitespace()
        .map(|t| t.to_string())
        .collect();
    let target = parse_pronunciation(&target_tokens, resource).map_err(|e| e.to_string())?;
    let source_phonemes = match fields.get(2) {
        None => None,
        Some(col) => {
            let tokens: Vec<&str> = col.split_whitespace().collect();
            if tokens.len() != word.len() {
                return Err(format!(
                    "source phoneme column has {} tokens for {} letters",
                    tokens.len(),
                    word.len()
                ));
            }
            Some(
                tokens
                    .iter()
                    .map(|t| {
                        if *t == NO_PHONEME {
                            None
                        } else {
                            Some(t.to_string())
                        }
                    })
                    .collect(),
            )
        }
    };
    Ok(CorpusEntry {
        word,
        target_tokens,
        target,
        source_phonemes,
    })
}

/// Render entries back to the file format.
pub fn serialize_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        out.push_str(&entry.word.text());
        out.push('\t');
        out.push_str(&entry.target_tokens.join(" "));
        if let Some(sp) = &entry.source_phonemes {
            out.push('\t');
            let tokens: Vec<&str> = sp
                .iter()
                .map(|t| t.as_deref().unwrap_or(NO_PHONEME))
                .collect();
            out.push_str(&tokens.join(" "));
        }
        out.push('\n');
    }
    out
}
