//! Stem-set keys and Jaccard similarity search.
//!
//! Two phrases are "the same set of words" when their sets of stems coincide,
//! which collapses gender and case variants ("beo/bela/belo kao sneg").

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matcher::{MatcherConfig, CANONICAL_CONNECTOR};
use crate::stemmer::Stemmer;
use crate::tokenizer::tokenize;

/// Default similarity at which adding an entry warns about near-duplicates.
pub const DEFAULT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum DedupError {
    #[error("phrase {0:?} contains no words")]
    NoWords(String),
    #[error("empty query")]
    EmptyQuery,
    #[error("similarity threshold {0} outside (0, 1]")]
    BadThreshold(f64),
}

/// Sorted, duplicate-free stems of a phrase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StemKey(BTreeSet<String>);

impl StemKey {
    pub fn stems(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |A ∩ B| / |A ∪ B|.
    pub fn jaccard(&self, other: &StemKey) -> f64 {
        let inter = self.0.intersection(&other.0).count();
        let union = self.0.len() + other.0.len() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl Serialize for StemKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StemKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(StemKey(s.split_whitespace().map(str::to_string).collect()))
    }
}

impl fmt::Display for StemKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.stems().collect();
        f.write_str(&parts.join(" "))
    }
}

/// Computes stem keys; connector variants are mapped to "kao" before stemming.
#[derive(Debug, Clone, Default)]
pub struct KeyMaker {
    stemmer: Stemmer,
    connectors: MatcherConfig,
}

impl KeyMaker {
    pub fn new(stemmer: Stemmer) -> Self {
        KeyMaker {
            stemmer,
            connectors: MatcherConfig::default(),
        }
    }

    pub fn stemmer(&self) -> &Stemmer {
        &self.stemmer
    }

    pub fn key_of(&self, phrase: &str) -> Result<StemKey, DedupError> {
        let stems: BTreeSet<String> = tokenize(phrase)
            .iter()
            .filter(|t| t.is_word())
            .map(|t| {
                if self.connectors.is_connector(&t.text) {
                    self.stemmer.stem(CANONICAL_CONNECTOR)
                } else {
                    self.stemmer.stem(&t.text)
                }
            })
            .collect();
        if stems.is_empty() {
            return Err(DedupError::NoWords(phrase.to_string()));
        }
        Ok(StemKey(stems))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub id: u64,
    pub similarity: f64,
}

/// In-memory id → key index.
#[derive(Debug, Clone, Default)]
pub struct DedupIndex {
    keys: KeyMaker,
    entries: BTreeMap<u64, StemKey>,
}

impl DedupIndex {
    pub fn new(keys: KeyMaker) -> Self {
        DedupIndex {
            keys,
            entries: BTreeMap::new(),
        }
    }

    pub fn key_maker(&self) -> &KeyMaker {
        &self.keys
    }

    pub fn key_of(&self, phrase: &str) -> Result<StemKey, DedupError> {
        self.keys.key_of(phrase)
    }

    pub fn insert(&mut self, id: u64, key: StemKey) {
        self.entries.insert(id, key);
    }

    pub fn remove(&mut self, id: u64) -> Option<StemKey> {
        self.entries.remove(&id)
    }

    pub fn get(&self, id: u64) -> Option<&StemKey> {
        self.entries.get(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids whose key equals `key` exactly.
    pub fn exact(&self, key: &StemKey) -> impl Iterator<Item = u64> + '_ {
        let key = key.clone();
        self.entries.iter().filter(move |(_, k)| **k == key).map(|(id, _)| *id)
    }

    /// Entries with similarity ≥ `threshold` to `query`, most similar first,
    /// ties by ascending id.
    pub fn find_similar(&self, query: &str, threshold: f64) -> Result<Vec<Match>, DedupError> {
        if query.trim().is_empty() {
            return Err(DedupError::EmptyQuery);
        }
        let key = self.keys.key_of(query)?;
        self.find_similar_key(&key, threshold)
    }

    pub fn find_similar_key(&self, key: &StemKey, threshold: f64) -> Result<Vec<Match>, DedupError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(DedupError::BadThreshold(threshold));
        }
        let mut out: Vec<Match> = self
            .entries
            .iter()
            .map(|(&id, k)| Match {
                id,
                similarity: key.jaccard(k),
            })
            .filter(|m| m.similarity >= threshold)
            .collect();
        out.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then(a.id.cmp(&b.id)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> StemKey {
        KeyMaker::default().key_of(s).unwrap()
    }

    #[test]
    fn gender_forms_share_a_key() {
        assert_eq!(key("beo kao sneg"), key("bela kao sneg"));
        assert_eq!(key("bela kao sneg"), key("belo kao sneg"));
    }

    #[test]
    fn sorted_stems() {
        assert_eq!(key("radi kao konj").to_string(), "ka konj rad");
    }

    #[test]
    fn connector_variants() {
        assert_eq!(key("radi k'o konj"), key("radi kao konj"));
        assert_eq!(key("radi ko konj"), key("radi kao konj"));
    }

    #[test]
    fn order_and_repetition_invariant() {
        assert_eq!(key("konj kao radi radi"), key("radi kao konj"));
    }

    #[test]
    fn no_words() {
        assert_eq!(
            KeyMaker::default().key_of(" ... !"),
            Err(DedupError::NoWords(" ... !".into()))
        );
    }

    #[test]
    fn search() {
        let mut idx = DedupIndex::default();
        idx.insert(1, key("radi kao konj"));
        idx.insert(2, key("beo kao sneg"));
        idx.insert(3, key("beo kao sneg"));
        let hits = idx.find_similar("bela kao sneg", DEFAULT_THRESHOLD).unwrap();
        assert_eq!(
            hits,
            vec![Match { id: 2, similarity: 1.0 }, Match { id: 3, similarity: 1.0 }]
        );

        // {lep, ka, cvet} vs {rad, ka, konj}: 1 shared of 5.
        assert_eq!(key("lep kao cvet").jaccard(&key("radi kao konj")), 0.2);
        assert!(idx.find_similar("lep kao cvet", DEFAULT_THRESHOLD).unwrap().is_empty());

        assert_eq!(idx.find_similar("", 0.5), Err(DedupError::EmptyQuery));
        assert_eq!(idx.find_similar("x", 0.0), Err(DedupError::BadThreshold(0.0)));
    }

    #[test]
    fn remove_restores_results() {
        let mut idx = DedupIndex::default();
        idx.insert(1, key("radi kao konj"));
        let before = idx.find_similar("radi kao konj", 0.1).unwrap();
        idx.insert(2, key("radi kao vol"));
        idx.remove(2);
        assert_eq!(idx.find_similar("radi kao konj", 0.1).unwrap(), before);
    }
}
