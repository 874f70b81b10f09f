//! Rule-based suffix-stripping stemmer for Serbian.
//!
//! Rules live in a plain-text table (see `data/stemmer_rules.txt`):
//!
//! ```text
//! min_stem_len=2
//! [transforms]
//! eo<TAB>el
//! [suffixes]
//! ima
//! a
//! ```
//!
//! A word is lowercased and transliterated to Latin, then transforms and
//! longest-match stripping are applied repeatedly until nothing changes, so
//! `stem` is idempotent.

use std::path::Path;

use thiserror::Error;

use crate::normalize::normalize_word;
use crate::tokenizer::tokenize;

const DEFAULT_RULES: &str = include_str!("../data/stemmer_rules.txt");

#[derive(Debug, Error)]
pub enum RuleTableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading rule table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRuleTable {
    transforms: Vec<(String, String)>,
    suffixes: Vec<String>,
    min_stem_len: usize,
}

impl StemRuleTable {
    pub fn new(
        transforms: Vec<(String, String)>,
        suffixes: Vec<String>,
        min_stem_len: usize,
    ) -> Result<Self, RuleTableError> {
        if min_stem_len == 0 {
            return Err(RuleTableError::Parse {
                line: 0,
                message: "min_stem_len must be at least 1".into(),
            });
        }
        let mut sorted: Vec<String> = Vec::with_capacity(suffixes.len());
        for s in suffixes {
            if s.is_empty() {
                return Err(RuleTableError::Parse {
                    line: 0,
                    message: "empty suffix".into(),
                });
            }
            if sorted.contains(&s) {
                return Err(RuleTableError::Parse {
                    line: 0,
                    message: format!("duplicate suffix {s:?}"),
                });
            }
            sorted.push(s);
        }
        // Longest first; ties keep file order.
        sorted.sort_by_key(|s| std::cmp::Reverse(s.chars().count()));
        Ok(StemRuleTable {
            transforms,
            suffixes: sorted,
            min_stem_len,
        })
    }

    pub fn parse(text: &str) -> Result<Self, RuleTableError> {
        #[derive(PartialEq)]
        enum Section {
            Top,
            Transforms,
            Suffixes,
        }
        let mut section = Section::Top;
        let mut transforms = Vec::new();
        let mut suffixes: Vec<String> = Vec::new();
        let mut min_stem_len = 2;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| RuleTableError::Parse { line: line_no, message };
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(value) = trimmed.strip_prefix("min_stem_len=") {
                min_stem_len = value
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad min_stem_len {value:?}")))?;
                if min_stem_len == 0 {
                    return Err(err("min_stem_len must be at least 1".into()));
                }
                continue;
            }
            match trimmed {
                "[transforms]" => section = Section::Transforms,
                "[suffixes]" => section = Section::Suffixes,
                _ if trimmed.starts_with('[') => return Err(err(format!("unknown section {trimmed}"))),
                _ => match section {
                    Section::Top => return Err(err(format!("rule outside a section: {trimmed}"))),
                    Section::Transforms => {
                        let (from, to) = trimmed
                            .split_once('\t')
                            .ok_or_else(|| err("transform needs suffix<TAB>replacement".into()))?;
                        if from.is_empty() {
                            return Err(err("empty transform suffix".into()));
                        }
                        transforms.push((from.to_lowercase(), to.to_lowercase()));
                    }
                    Section::Suffixes => {
                        let s = trimmed.to_lowercase();
                        if suffixes.contains(&s) {
                            return Err(err(format!("duplicate suffix {s:?}")));
                        }
                        suffixes.push(s);
                    }
                },
            }
        }
        StemRuleTable::new(transforms, suffixes, min_stem_len)
    }

    pub fn load(path: &Path) -> Result<Self, RuleTableError> {
        StemRuleTable::parse(&std::fs::read_to_string(path)?)
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn transforms(&self) -> &[(String, String)] {
        &self.transforms
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }
}

impl Default for StemRuleTable {
    fn default() -> Self {
        StemRuleTable::parse(DEFAULT_RULES).expect("bundled stemmer rules are valid")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stemmer {
    rules: StemRuleTable,
}

impl Stemmer {
    pub fn new(rules: StemRuleTable) -> Self {
        Stemmer { rules }
    }

    pub fn rules(&self) -> &StemRuleTable {
        &self.rules
    }

    /// One pass: first matching transform, then the longest strippable suffix.
    fn step(&self, word: &str) -> String {
        let mut w = word.to_string();
        if let Some((from, to)) = self.rules.transforms.iter().find(|(f, _)| w.ends_with(f.as_str())) {
            w.truncate(w.len() - from.len());
            w.push_str(to);
        }
        let len = w.chars().count();
        for suffix in &self.rules.suffixes {
            if w.ends_with(suffix.as_str()) && len - suffix.chars().count() >= self.rules.min_stem_len {
                w.truncate(w.len() - suffix.len());
                break;
            }
        }
        w
    }

    pub fn stem(&self, word: &str) -> String {
        let mut current = normalize_word(word);
        let len = current.chars().count();
        if len <= self.rules.min_stem_len {
            return current;
        }
        // Each stripping pass shortens the word; the bound only guards against
        // user tables whose transforms cycle.
        for _ in 0..len + 4 {
            let next = self.step(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    /// Stems every word token of `phrase`; punctuation is dropped.
    pub fn stem_phrase(&self, phrase: &str) -> String {
        tokenize(phrase)
            .iter()
            .filter(|t| t.is_word())
            .map(|t| self.stem(&t.text))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_words() {
        let s = Stemmer::default();
        assert_eq!(s.stem("radi"), "rad");
        assert_eq!(s.stem("kao"), "ka");
        assert_eq!(s.stem("konj"), "konj");
    }

    #[test]
    fn gender_forms_converge() {
        let s = Stemmer::default();
        assert_eq!(s.stem("bela"), s.stem("belo"));
        assert_eq!(s.stem("beo"), s.stem("bela"));
        assert_eq!(s.stem_phrase("bela kao sneg"), s.stem_phrase("belo kao sneg"));
    }

    #[test]
    fn phrase() {
        let s = Stemmer::default();
        assert_eq!(s.stem_phrase("radi kao konj"), "rad ka konj");
        assert_eq!(s.stem_phrase("konj"), "konj");
        assert_eq!(s.stem_phrase("radi, kao konj!"), "rad ka konj");
    }

    #[test]
    fn short_words_are_only_lowercased() {
        let s = Stemmer::default();
        assert_eq!(s.stem("Ko"), "ko");
        assert_eq!(s.stem("se"), "se");
        assert_eq!(s.stem("u"), "u");
    }

    #[test]
    fn case_and_script_insensitive() {
        let s = Stemmer::default();
        assert_eq!(s.stem("RADI"), "rad");
        assert_eq!(s.stem("ради"), "rad");
    }

    #[test]
    fn table_parse_errors_name_the_line() {
        let err = StemRuleTable::parse("[suffixes]\na\na\n").unwrap_err();
        assert!(matches!(err, RuleTableError::Parse { line: 3, .. }), "{err}");
        let err = StemRuleTable::parse("[transforms]\neo el\n").unwrap_err();
        assert!(matches!(err, RuleTableError::Parse { line: 2, .. }));
        assert!(StemRuleTable::parse("min_stem_len=0\n").is_err());
        assert!(StemRuleTable::parse("[bogus]\n").is_err());
    }

    #[test]
    fn suffixes_sorted_longest_first() {
        let t = StemRuleTable::parse("[suffixes]\na\nima\nom\n").unwrap();
        assert_eq!(t.suffixes(), ["ima", "om", "a"]);
    }

    #[test]
    fn custom_min_stem_len() {
        let t = StemRuleTable::parse("min_stem_len=3\n[suffixes]\no\n").unwrap();
        let s = Stemmer::new(t);
        assert_eq!(s.stem("kao"), "kao");
        assert_eq!(s.stem("belo"), "bel");
    }
}
