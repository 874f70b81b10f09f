//! Simile candidate extraction over coarse-tagged sentences.
//!
//! Pattern: `(V | A | V se) (kao | ko | k'o) A{0,max} N`. The right side ends
//! at the first noun, so "smoren kao zmaj u vatrogasnoj stanici" yields
//! "smoren kao zmaj". Matching is purely lexical on the connector; telling
//! similes from literal comparisons is the classifier's job.

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::normalize::normalize;
use crate::tagger::{CoarseTag, TaggedToken};
use crate::tokenizer::{Token, TokenKind};

/// Canonical connector written into `full_text`.
pub const CANONICAL_CONNECTOR: &str = "kao";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatcherConfig {
    connectors: BTreeSet<String>,
    pub allow_reflexive_se: bool,
    /// `None` means any number of adjectives.
    pub max_adjectives: Option<usize>,
    /// Transliterate Cyrillic to Latin before comparing and in `full_text`.
    pub transliterate: bool,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            connectors: ["kao", "ko", "k'o"].iter().map(|s| s.to_string()).collect(),
            allow_reflexive_se: true,
            max_adjectives: Some(3),
            transliterate: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("connector set must not be empty")]
pub struct EmptyConnectors;

impl MatcherConfig {
    pub fn with_connectors<I, S>(mut self, connectors: I) -> Result<Self, EmptyConnectors>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = connectors
            .into_iter()
            .map(|c| normalize(c.as_ref(), true))
            .filter(|c| !c.is_empty())
            .collect();
        if set.is_empty() {
            return Err(EmptyConnectors);
        }
        self.connectors = set;
        Ok(self)
    }

    pub fn connectors(&self) -> impl Iterator<Item = &str> {
        self.connectors.iter().map(String::as_str)
    }

    pub fn is_connector(&self, word: &str) -> bool {
        // Connectors are stored in Latin, so always fold the script here.
        self.connectors.contains(&normalize(word, true))
    }
}

/// Where a candidate came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub doc_id: String,
    /// Character offset of the sentence in its document.
    pub sentence_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimileCandidate {
    /// The verb or adjective, plus " se" for reflexive verbs; normalized.
    pub left: String,
    /// Always [`CANONICAL_CONNECTOR`].
    pub connector: String,
    /// Connector as written in the source ("k'o", "Ko", ...).
    pub connector_surface: String,
    /// Zero or more adjectives and the terminating noun; normalized.
    pub right: String,
    pub full_text: String,
    /// Token index range in the sentence, end exclusive.
    pub span: Range<usize>,
    /// Token index of the connector.
    pub connector_index: usize,
    pub source: Provenance,
}

fn is_word(t: &TaggedToken) -> bool {
    t.token.kind != TokenKind::Punctuation
}

fn has_class(t: &TaggedToken, class: CoarseTag) -> bool {
    is_word(t) && t.coarse == class
}

/// Finds every candidate in a tagged sentence, in sentence order.
pub fn extract(sentence: &[TaggedToken], config: &MatcherConfig, source: &Provenance) -> Vec<SimileCandidate> {
    let norm = |t: &TaggedToken| normalize(&t.token.text, config.transliterate);
    let mut out = Vec::new();

    for (c, tok) in sentence.iter().enumerate() {
        if !is_word(tok) || !config.is_connector(&tok.token.text) || c == 0 {
            continue;
        }

        let before = &sentence[c - 1];
        let reflexive = config.allow_reflexive_se
            && c >= 2
            && is_word(before)
            && normalize(&before.token.text, true) == "se"
            && has_class(&sentence[c - 2], CoarseTag::V);
        let start = if reflexive {
            c - 2
        } else if has_class(before, CoarseTag::V) || has_class(before, CoarseTag::A) {
            c - 1
        } else {
            continue;
        };

        let mut i = c + 1;
        let mut adjectives = 0;
        while i < sentence.len() && has_class(&sentence[i], CoarseTag::A) {
            adjectives += 1;
            i += 1;
        }
        if config.max_adjectives.is_some_and(|max| adjectives > max) {
            continue;
        }
        if i >= sentence.len() || !has_class(&sentence[i], CoarseTag::N) {
            continue;
        }
        let end = i + 1;

        let join = |r: Range<usize>| sentence[r].iter().map(norm).collect::<Vec<_>>().join(" ");
        let left = join(start..c);
        let right = join(c + 1..end);
        out.push(SimileCandidate {
            full_text: format!("{left} {CANONICAL_CONNECTOR} {right}"),
            left,
            connector: CANONICAL_CONNECTOR.to_string(),
            connector_surface: tok.token.text.clone(),
            right,
            span: start..end,
            connector_index: c,
            source: source.clone(),
        });
    }
    out
}

/// One block of the hand-annotated gold fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldSentence {
    /// 1-based line number of the block's first line.
    pub line: usize,
    pub tokens: Vec<TaggedToken>,
    /// (full_text, token span) pairs the matcher must produce.
    pub expected: Vec<(String, Range<usize>)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gold fixture line {line}: {message}")]
pub struct GoldParseError {
    pub line: usize,
    pub message: String,
}

/// Parses the gold fixture format.
///
/// Blocks are separated by blank lines. Token lines are `word<TAB>fine_tag`;
/// expectation lines are `><TAB>full_text<TAB>start<TAB>end`. Lines starting
/// with `#` are comments. A block with no `>` lines expects no candidates.
pub fn parse_gold(text: &str) -> Result<Vec<GoldSentence>, GoldParseError> {
    let mut blocks = Vec::new();
    let mut current: Option<GoldSentence> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: &str| GoldParseError {
            line: line_no,
            message: message.to_string(),
        };
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(block) = current.take() {
                blocks.push(block);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let block = current.get_or_insert_with(|| GoldSentence {
            line: line_no,
            tokens: Vec::new(),
            expected: Vec::new(),
        });
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == ">" {
            if fields.len() != 4 {
                return Err(err("expected >\\tfull_text\\tstart\\tend"));
            }
            let start: usize = fields[2].parse().map_err(|_| err("bad span start"))?;
            let end: usize = fields[3].parse().map_err(|_| err("bad span end"))?;
            if start >= end {
                return Err(err("empty span"));
            }
            block.expected.push((fields[1].to_string(), start..end));
        } else {
            if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(err("expected word\\ttag"));
            }
            if !block.expected.is_empty() {
                return Err(err("token line after expectations"));
            }
            let word = fields[0];
            let kind = if word.chars().any(char::is_alphabetic) {
                TokenKind::Word
            } else if word.chars().all(char::is_numeric) {
                TokenKind::Number
            } else {
                TokenKind::Punctuation
            };
            let mut tagged = TaggedToken::new(word, fields[1]);
            tagged.token = Token::new(word, kind);
            block.tokens.push(tagged);
        }
    }
    if let Some(block) = current {
        blocks.push(block);
    }
    for b in &blocks {
        if b.tokens.is_empty() {
            return Err(GoldParseError {
                line: b.line,
                message: "block without tokens".into(),
            });
        }
        if let Some((_, span)) = b.expected.iter().find(|(_, s)| s.end > b.tokens.len()) {
            return Err(GoldParseError {
                line: b.line,
                message: format!("span {span:?} outside sentence"),
            });
        }
    }
    Ok(blocks)
}
