//! The six categorical features of a candidate phrase.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::matcher::{MatcherConfig, SimileCandidate, CANONICAL_CONNECTOR};
use crate::normalize::normalize_word;
use crate::stemmer::Stemmer;
use crate::tokenizer::tokenize;

use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    Whole,
    WholeStem,
    Left,
    LeftStem,
    Right,
    RightStem,
}

impl Namespace {
    pub const ALL: [Namespace; 6] = [
        Namespace::Whole,
        Namespace::WholeStem,
        Namespace::Left,
        Namespace::LeftStem,
        Namespace::Right,
        Namespace::RightStem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Namespace::Whole => "whole",
            Namespace::WholeStem => "whole_stem",
            Namespace::Left => "left",
            Namespace::LeftStem => "left_stem",
            Namespace::Right => "right",
            Namespace::RightStem => "right_stem",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Namespace {
    type Err = ClassifierError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Namespace::ALL
            .into_iter()
            .find(|ns| ns.name() == s)
            .ok_or_else(|| ClassifierError::UnknownFeature(s.to_string()))
    }
}

/// Which namespaces are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureMask(u8);

impl Default for FeatureMask {
    fn default() -> Self {
        FeatureMask::all()
    }
}

impl FeatureMask {
    pub fn all() -> Self {
        FeatureMask(Namespace::ALL.iter().fold(0, |m, ns| m | ns.bit()))
    }

    pub fn none() -> Self {
        FeatureMask(0)
    }

    pub fn only(ns: Namespace) -> Self {
        FeatureMask(ns.bit())
    }

    pub fn with(self, ns: Namespace) -> Self {
        FeatureMask(self.0 | ns.bit())
    }

    pub fn without(self, ns: Namespace) -> Self {
        FeatureMask(self.0 & !ns.bit())
    }

    pub fn contains(self, ns: Namespace) -> bool {
        self.0 & ns.bit() != 0
    }

    pub fn namespaces(self) -> impl Iterator<Item = Namespace> {
        Namespace::ALL.into_iter().filter(move |ns| self.contains(*ns))
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.namespaces().map(Namespace::name).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for FeatureMask {
    type Err = ClassifierError;
    /// Comma-separated namespace names; `all` or an empty string mean every namespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "all" {
            return Ok(FeatureMask::all());
        }
        s.split(',')
            .map(|part| part.trim().parse::<Namespace>())
            .try_fold(FeatureMask::none(), |m, ns| Ok(m.with(ns?)))
    }
}

/// Sparse indicator vector: at most one value per namespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    values: BTreeMap<Namespace, String>,
}

impl FeatureVector {
    pub fn new() -> Self {
        FeatureVector::default()
    }

    pub fn set(&mut self, ns: Namespace, value: impl Into<String>) {
        self.values.insert(ns, value.into());
    }

    pub fn get(&self, ns: Namespace) -> Option<&str> {
        self.values.get(&ns).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn namespaces(&self) -> impl Iterator<Item = Namespace> + '_ {
        self.values.keys().copied()
    }

    /// Indicator names, `namespace=value`, in namespace order.
    pub fn indicators(&self) -> impl Iterator<Item = String> + '_ {
        self.values.iter().map(|(ns, v)| format!("{}={}", ns.name(), v))
    }
}

/// Builds feature vectors; holds the stemmer used for the `*_stem` namespaces.
#[derive(Debug, Clone, Default)]
pub struct Featurizer {
    stemmer: Stemmer,
    matcher: MatcherConfig,
}

impl Featurizer {
    pub fn new(stemmer: Stemmer) -> Self {
        Featurizer {
            stemmer,
            matcher: MatcherConfig::default(),
        }
    }

    pub fn stemmer(&self) -> &Stemmer {
        &self.stemmer
    }

    /// Features from the three phrase parts, projected onto `mask`.
    pub fn from_parts(&self, whole: &str, left: &str, right: &str, mask: FeatureMask) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for ns in mask.namespaces() {
            let value = match ns {
                Namespace::Whole => whole.to_string(),
                Namespace::WholeStem => self.stemmer.stem_phrase(whole),
                Namespace::Left => left.to_string(),
                Namespace::LeftStem => self.stemmer.stem_phrase(left),
                Namespace::Right => right.to_string(),
                Namespace::RightStem => self.stemmer.stem_phrase(right),
            };
            if !value.is_empty() {
                fv.set(ns, value);
            }
        }
        fv
    }

    pub fn featurize(&self, candidate: &SimileCandidate, mask: FeatureMask) -> FeatureVector {
        self.from_parts(&candidate.full_text, &candidate.left, &candidate.right, mask)
    }

    /// Splits a raw phrase at its first connector into normalized
    /// (whole, left, right), with the connector canonicalized in `whole`.
    pub fn split_phrase(&self, phrase: &str) -> Result<(String, String, String), ClassifierError> {
        let words: Vec<String> = tokenize(phrase)
            .into_iter()
            .filter(|t| t.is_word())
            .map(|t| t.text)
            .collect();
        let at = words
            .iter()
            .position(|w| self.matcher.is_connector(w))
            .filter(|&i| i > 0 && i + 1 < words.len())
            .ok_or_else(|| ClassifierError::NoConnector(phrase.to_string()))?;
        let join = |ws: &[String]| ws.iter().map(|w| normalize_word(w)).collect::<Vec<_>>().join(" ");
        let left = join(&words[..at]);
        let right = join(&words[at + 1..]);
        Ok((format!("{left} {CANONICAL_CONNECTOR} {right}"), left, right))
    }

    pub fn featurize_phrase(&self, phrase: &str, mask: FeatureMask) -> Result<FeatureVector, ClassifierError> {
        let (whole, left, right) = self.split_phrase(phrase)?;
        Ok(self.from_parts(&whole, &left, &right, mask))
    }
}
