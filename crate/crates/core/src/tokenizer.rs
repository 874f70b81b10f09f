//! Sentence segmentation and word tokenization.
//!
//! Internal apostrophes and hyphens stay inside a word (so the colloquial
//! connector "k'o" is a single token); every other non-alphanumeric character
//! is a token of its own. The splitter is script-agnostic.

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Punctuation,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// Byte range of the token in the text it was cut from.
    pub span: Range<usize>,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind) -> Self {
        let text = text.into();
        let len = text.len();
        Token {
            text,
            kind,
            span: 0..len,
        }
    }

    pub fn word(text: impl Into<String>) -> Self {
        Token::new(text, TokenKind::Word)
    }

    pub fn is_word(&self) -> bool {
        self.kind != TokenKind::Punctuation
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Character (not byte) offset of the sentence start in the source document.
    pub source_offset: usize,
    /// Byte range of the sentence in the source document.
    pub span: Range<usize>,
}

/// Abbreviations that end in a period without ending the sentence.
#[derive(Debug, Clone)]
pub struct Abbreviations {
    entries: HashSet<String>,
}

impl Default for Abbreviations {
    fn default() -> Self {
        Abbreviations::parse(DEFAULT_ABBREVIATIONS)
    }
}

impl Abbreviations {
    /// One abbreviation per line, trailing period optional; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_end_matches('.').to_lowercase())
            .collect();
        Abbreviations { entries }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Abbreviations::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(&word.trim_end_matches('.').to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | '»' | '”' | '’' | ')' | ']')
}

fn is_opening(c: char) -> bool {
    matches!(c, '"' | '„' | '«' | '“' | '(' | '-' | '–' | '—')
}

/// The word immediately before byte index `end` (exclusive), without leading
/// punctuation.
fn word_before(text: &str, end: usize) -> &str {
    let head = &text[..end];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    head[start..].trim_start_matches(|c: char| !c.is_alphanumeric())
}

fn is_initial(word: &str) -> bool {
    let mut chars = word.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase())
}

/// Splits `text` into sentence byte spans.
///
/// A boundary falls after a run of `. ! ? …` (plus closing quotes) that is
/// followed by whitespace and an uppercase letter, or by the end of the text.
/// A lone period after a listed abbreviation or a single-capital initial does
/// not split.
pub fn split_sentences(text: &str, abbreviations: &Abbreviations) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;

    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if !is_terminal(c) {
            i += 1;
            continue;
        }

        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_period = j == i + 1 && c == '.';
        while j < chars.len() && is_closing(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map(|&(p, _)| p).unwrap_or(text.len());

        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = if k == chars.len() {
            true
        } else if k == j {
            false
        } else {
            let next = chars[k].1;
            let opens_upper = is_opening(next) && chars.get(k + 1).is_some_and(|&(_, n)| n.is_uppercase());
            let upper = next.is_uppercase() || opens_upper;
            if upper && single_period {
                let word = word_before(text, pos);
                !(abbreviations.contains(word) || is_initial(word))
            } else {
                upper
            }
        };

        if boundary {
            if let Some(s) = start.take() {
                spans.push(s..end);
            }
        }
        i = j;
    }

    if let Some(s) = start {
        let end = text.trim_end().len();
        if end > s {
            spans.push(s..end);
        }
    }
    spans
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '’' | 'ʼ' | '-' | '‐')
}

/// Splits one sentence into tokens. Spans are byte ranges into `text`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map(|&(p, _)| p).unwrap_or(text.len());
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            tokens.push(Token {
                text: c.to_string(),
                kind: TokenKind::Punctuation,
                span: byte_at(i)..byte_at(i + 1),
            });
            i += 1;
            continue;
        }

        let begin = i;
        let mut has_letter = false;
        while i < chars.len() {
            let c = chars[i].1;
            if c.is_alphanumeric() {
                has_letter |= !c.is_numeric();
                i += 1;
                continue;
            }
            let next_alnum = chars.get(i + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
            let next_digit = chars.get(i + 1).is_some_and(|&(_, n)| n.is_numeric());
            let prev_digit = chars[i - 1].1.is_numeric();
            let numeric_sep = matches!(c, '.' | ',') && !has_letter && prev_digit && next_digit;
            if (is_joiner(c) && next_alnum) || numeric_sep {
                i += 1;
            } else {
                break;
            }
        }
        let span = byte_at(begin)..byte_at(i);
        tokens.push(Token {
            text: text[span.clone()].to_string(),
            kind: if has_letter { TokenKind::Word } else { TokenKind::Number },
            span,
        });
    }
    tokens
}

/// Segments and tokenizes a document. Token spans are document byte offsets.
pub fn sentences(text: &str, abbreviations: &Abbreviations) -> Vec<Sentence> {
    split_sentences(text, abbreviations)
        .into_iter()
        .filter_map(|span| {
            let mut tokens = tokenize(&text[span.clone()]);
            if tokens.is_empty() {
                return None;
            }
            for t in &mut tokens {
                t.span = t.span.start + span.start..t.span.end + span.start;
            }
            Some(Sentence {
                tokens,
                source_offset: text[..span.start].chars().count(),
                span,
            })
        })
        .collect()
}
