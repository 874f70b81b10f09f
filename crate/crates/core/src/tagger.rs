//! Trigram hidden-Markov part-of-speech tagger.
//!
//! Transition probabilities interpolate unigram, bigram and trigram relative
//! frequencies with weights estimated by deleted interpolation. Words seen in
//! training use their emission counts; unseen words back off to tag
//! distributions over word suffixes (up to four characters) collected from rare
//! training words, smoothed recursively towards shorter suffixes and turned into
//! emission scores by dividing out the tag prior. Decoding is Viterbi in log
//! space over (previous tag, tag) states, with sentence-boundary states at
//! both ends.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::normalize::normalize_word;
use crate::scalar::Scalar;
use crate::tokenizer::Token;

const MAGIC: &str = "SIMILE-TAGGER";
const FORMAT_VERSION: u32 = 1;
const BOS: &str = "<s>";
const EOS: &str = "</s>";

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("line {line}: malformed training line {content:?} (expected word<TAB>tag)")]
    MalformedLine { line: usize, content: String },
    #[error("line {line}: tag {tag:?} is reserved")]
    ReservedTag { line: usize, tag: String },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("not a tagger model file (bad magic header)")]
    BadMagic,
    #[error("unsupported tagger model version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("corrupt tagger model at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("truncated tagger model file")]
    Truncated,
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Coarse word class used by the simile pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoarseTag {
    /// Verb
    V,
    /// Adjective
    A,
    /// Noun
    N,
    /// Anything else
    O,
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoarseTag::V => "V",
            CoarseTag::A => "A",
            CoarseTag::N => "N",
            CoarseTag::O => "O",
        };
        f.write_str(s)
    }
}

impl FromStr for CoarseTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "V" => Ok(CoarseTag::V),
            "A" => Ok(CoarseTag::A),
            "N" => Ok(CoarseTag::N),
            "O" => Ok(CoarseTag::O),
            _ => Err(format!("unknown coarse tag {s:?}")),
        }
    }
}

/// Default coarse mapping: first character of a positional (MULTEXT-East style) tag.
pub fn coarse_of(fine_tag: &str) -> CoarseTag {
    match fine_tag.chars().next() {
        Some('V') => CoarseTag::V,
        Some('A') => CoarseTag::A,
        Some('N') => CoarseTag::N,
        _ => CoarseTag::O,
    }
}

/// Fine → coarse mapping with per-tag overrides on top of [`coarse_of`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoarseMap {
    overrides: BTreeMap<String, CoarseTag>,
}

impl CoarseMap {
    /// Parses `fine<TAB>coarse` lines; `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut overrides = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (fine, coarse) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected fine<TAB>coarse", i + 1))?;
            let coarse = coarse.trim().parse().map_err(|e| format!("line {}: {e}", i + 1))?;
            overrides.insert(fine.to_string(), coarse);
        }
        Ok(CoarseMap { overrides })
    }

    pub fn insert(&mut self, fine: impl Into<String>, coarse: CoarseTag) {
        self.overrides.insert(fine.into(), coarse);
    }

    pub fn get(&self, fine: &str) -> CoarseTag {
        self.overrides.get(fine).copied().unwrap_or_else(|| coarse_of(fine))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedToken {
    pub token: Token,
    pub fine_tag: String,
    pub coarse: CoarseTag,
}

impl TaggedToken {
    /// Builds a tagged word token with the default coarse mapping.
    pub fn new(word: &str, fine_tag: &str) -> Self {
        TaggedToken {
            token: Token::word(word),
            fine_tag: fine_tag.to_string(),
            coarse: coarse_of(fine_tag),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggerConfig {
    /// Longest suffix used for unknown words.
    pub max_suffix_len: usize,
    /// Words with at most this many occurrences feed the suffix tables.
    pub rare_threshold: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            max_suffix_len: 4,
            rare_threshold: 10,
        }
    }
}

/// A position in the transition model: a real tag or a sentence boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Bos,
    Tag(usize),
    Eos,
}

/// A tagged training sentence: (word, fine tag) pairs.
pub type TrainingSentence = Vec<(String, String)>;

/// Reads `word<TAB>tag` lines; blank lines separate sentences and `#` lines
/// without a tab are comments.
pub fn read_training_corpus<R: BufRead>(reader: R) -> Result<Vec<TrainingSentence>, TaggerError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        // "#" is a legitimate token, so only tab-free lines count as comments.
        if line.starts_with('#') && !line.contains('\t') {
            continue;
        }
        let malformed = || TaggerError::MalformedLine {
            line: i + 1,
            content: line.to_string(),
        };
        let (word, tag) = line.split_once('\t').ok_or_else(malformed)?;
        let (word, tag) = (word.trim(), tag.trim());
        if word.is_empty() || tag.is_empty() || tag.contains('\t') {
            return Err(malformed());
        }
        if tag == BOS || tag == EOS {
            return Err(TaggerError::ReservedTag {
                line: i + 1,
                tag: tag.to_string(),
            });
        }
        current.push((word.to_string(), tag.to_string()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        return Err(TaggerError::EmptyCorpus);
    }
    Ok(sentences)
}

/// Trained tagger parameters. Immutable once built; `tag` takes `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel<F> {
    config: TaggerConfig,
    tagset: Vec<String>,
    tag_index: HashMap<String, usize>,
    coarse_map: CoarseMap,
    coarse: Vec<CoarseTag>,
    sentences: u64,
    tokens: u64,
    unigram: Vec<u64>,
    bigram: HashMap<(Slot, Slot), u64>,
    trigram: HashMap<(Slot, Slot, Slot), u64>,
    emissions: HashMap<String, BTreeMap<usize, u64>>,
    suffixes: HashMap<String, Vec<u64>>,
    lambdas: [F; 3],
    theta: F,
    /// Dense log-transition table for small tagsets; see [`Self::cache_transitions`].
    log_trans: Option<Vec<F>>,
}

impl<F: Scalar> TaggerModel<F> {
    /// Counts a tagged corpus and estimates interpolation weights.
    pub fn train<I>(corpus: I, config: TaggerConfig) -> Result<Self, TaggerError>
    where
        I: IntoIterator<Item = TrainingSentence>,
    {
        let corpus: Vec<TrainingSentence> = corpus.into_iter().filter(|s| !s.is_empty()).collect();
        if corpus.is_empty() {
            return Err(TaggerError::EmptyCorpus);
        }
        let mut tagset: Vec<String> = corpus.iter().flatten().map(|(_, t)| t.clone()).collect();
        tagset.sort();
        tagset.dedup();
        if let Some(t) = tagset.iter().find(|t| *t == BOS || *t == EOS) {
            return Err(TaggerError::ReservedTag {
                line: 0,
                tag: t.clone(),
            });
        }
        let tag_index: HashMap<String, usize> = tagset.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();

        let mut unigram = vec![0u64; tagset.len()];
        let mut bigram = HashMap::new();
        let mut trigram = HashMap::new();
        let mut emissions: HashMap<String, BTreeMap<usize, u64>> = HashMap::new();
        let mut tokens = 0u64;

        for sentence in &corpus {
            let mut prev2 = Slot::Bos;
            let mut prev1 = Slot::Bos;
            for (word, tag) in sentence {
                let t = tag_index[tag];
                unigram[t] += 1;
                tokens += 1;
                *emissions.entry(normalize_word(word)).or_default().entry(t).or_default() += 1;
                *bigram.entry((prev1, Slot::Tag(t))).or_default() += 1;
                *trigram.entry((prev2, prev1, Slot::Tag(t))).or_default() += 1;
                prev2 = prev1;
                prev1 = Slot::Tag(t);
            }
            *bigram.entry((prev1, Slot::Eos)).or_default() += 1;
            *trigram.entry((prev2, prev1, Slot::Eos)).or_default() += 1;
        }

        let mut suffixes: HashMap<String, Vec<u64>> = HashMap::new();
        for (word, tags) in &emissions {
            let freq: u64 = tags.values().sum();
            if freq > config.rare_threshold {
                continue;
            }
            for suffix in suffixes_of(word, config.max_suffix_len) {
                let row = suffixes
                    .entry(suffix.to_string())
                    .or_insert_with(|| vec![0; tagset.len()]);
                for (&t, &c) in tags {
                    row[t] += c;
                }
            }
        }

        let mut model = TaggerModel {
            config,
            coarse: tagset.iter().map(|t| coarse_of(t)).collect(),
            tagset,
            tag_index,
            coarse_map: CoarseMap::default(),
            sentences: corpus.len() as u64,
            tokens,
            unigram,
            bigram,
            trigram,
            emissions,
            suffixes,
            lambdas: [F::zero(); 3],
            theta: F::zero(),
            log_trans: None,
        };
        model.lambdas = model.deleted_interpolation();
        model.theta = model.suffix_theta();
        model.cache_transitions();
        Ok(model)
    }

    /// Replaces the coarse mapping (defaults to the first-letter rule).
    pub fn with_coarse_map(mut self, map: CoarseMap) -> Self {
        self.coarse = self.tagset.iter().map(|t| map.get(t)).collect();
        self.coarse_map = map;
        self
    }

    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_index.get(tag).copied()
    }

    pub fn coarse_of_tag(&self, tag: usize) -> CoarseTag {
        self.coarse[tag]
    }

    pub fn config(&self) -> TaggerConfig {
        self.config
    }

    /// Interpolation weights (unigram, bigram, trigram).
    pub fn lambdas(&self) -> [F; 3] {
        self.lambdas
    }

    pub fn emission_count(&self, tag: &str, word: &str) -> u64 {
        let Some(t) = self.tag_id(tag) else { return 0 };
        self.emissions
            .get(&normalize_word(word))
            .and_then(|m| m.get(&t))
            .copied()
            .unwrap_or(0)
    }

    /// Trigram count; `None` stands for the sentence boundary.
    pub fn trigram_count(&self, t1: Option<&str>, t2: Option<&str>, t3: Option<&str>) -> u64 {
        let slot = |t: Option<&str>, end: Slot| match t {
            None => Some(end),
            Some(t) => self.tag_id(t).map(Slot::Tag),
        };
        match (slot(t1, Slot::Bos), slot(t2, Slot::Bos), slot(t3, Slot::Eos)) {
            (Some(a), Some(b), Some(c)) => self.trigram.get(&(a, b, c)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn suffix_counts(&self, suffix: &str) -> Option<&[u64]> {
        self.suffixes.get(suffix).map(Vec::as_slice)
    }

    pub fn is_known(&self, word: &str) -> bool {
        self.emissions.contains_key(&normalize_word(word))
    }

    fn unigram_count(&self, s: Slot) -> u64 {
        match s {
            Slot::Tag(t) => self.unigram[t],
            Slot::Bos | Slot::Eos => self.sentences,
        }
    }

    fn bigram_count(&self, a: Slot, b: Slot) -> u64 {
        self.bigram.get(&(a, b)).copied().unwrap_or(0)
    }

    /// Number of times `(a, b)` occurs as a trigram history.
    fn trigram_history(&self, a: Slot, b: Slot) -> u64 {
        if a == Slot::Bos && b == Slot::Bos {
            self.sentences
        } else {
            self.bigram_count(a, b)
        }
    }

    fn deleted_interpolation(&self) -> [F; 3] {
        // Accumulators start at one so that no order is switched off entirely
        // on a tiny corpus; every transition then keeps non-zero probability.
        let mut acc = [1u64; 3];
        let total = self.tokens + self.sentences;
        let ratio = |num: u64, den: u64| -> f64 {
            if den > 1 {
                (num as f64 - 1.0) / (den as f64 - 1.0)
            } else {
                0.0
            }
        };
        for (&(a, b, c), &f) in &self.trigram {
            let c3 = ratio(f, self.trigram_history(a, b));
            let c2 = ratio(self.bigram_count(b, c), self.unigram_count(b));
            let c1 = ratio(self.unigram_count(c), total);
            if c3 >= c2 && c3 >= c1 {
                acc[2] += f;
            } else if c2 >= c1 {
                acc[1] += f;
            } else {
                acc[0] += f;
            }
        }
        let sum: u64 = acc.iter().sum();
        acc.map(|x| F::from_count(x) / F::from_count(sum))
    }

    /// Standard deviation of the unconditional tag distribution; weight of
    /// shorter suffixes in the recursive suffix smoothing.
    fn suffix_theta(&self) -> F {
        let s = self.tagset.len();
        if s < 2 || self.tokens == 0 {
            return F::zero();
        }
        let mean = 1.0 / s as f64;
        let var: f64 = self
            .unigram
            .iter()
            .map(|&c| {
                let p = c as f64 / self.tokens as f64;
                (p - mean) * (p - mean)
            })
            .sum::<f64>()
            / (s as f64 - 1.0);
        F::from_f64_lossy(var.sqrt())
    }

    /// Interpolated P(next | prev2, prev1).
    ///
    /// Orders whose history was never observed drop out and the remaining
    /// weights are renormalized, so each distribution sums to one.
    pub fn transition_prob(&self, prev2: Slot, prev1: Slot, next: Slot) -> F {
        if matches!(next, Slot::Bos) || matches!(prev1, Slot::Eos) || matches!(prev2, Slot::Eos) {
            return F::zero();
        }
        let ratio = |n: u64, d: u64| F::from_count(n) / F::from_count(d);
        let [l1, l2, l3] = self.lambdas;
        let mut weight = l1;
        let mut p = l1 * ratio(self.unigram_count(next), self.tokens + self.sentences);
        let h2 = self.unigram_count(prev1);
        if h2 > 0 {
            weight = weight + l2;
            p = p + l2 * ratio(self.bigram_count(prev1, next), h2);
        }
        let h3 = self.trigram_history(prev2, prev1);
        if h3 > 0 {
            weight = weight + l3;
            p = p + l3 * ratio(self.trigram.get(&(prev2, prev1, next)).copied().unwrap_or(0), h3);
        }
        p / weight
    }

    pub fn log_transition(&self, prev2: Slot, prev1: Slot, next: Slot) -> F {
        let t = self.tagset.len();
        let prev = |s: Slot| match s {
            Slot::Tag(i) => Some(i),
            Slot::Bos => Some(t),
            Slot::Eos => None,
        };
        let nxt = match next {
            Slot::Tag(i) => Some(i),
            Slot::Eos => Some(t),
            Slot::Bos => None,
        };
        match (&self.log_trans, prev(prev2), prev(prev1), nxt) {
            (Some(table), Some(a), Some(b), Some(c)) => table[(a * (t + 1) + b) * (t + 1) + c],
            _ => self.transition_prob(prev2, prev1, next).ln(),
        }
    }

    /// Precomputes every log transition when the table stays small
    /// (at most 128 tags, about 2.2 million entries).
    fn cache_transitions(&mut self) {
        let t = self.tagset.len();
        self.log_trans = None;
        if t > 128 {
            return;
        }
        let prev = |i: usize| if i == t { Slot::Bos } else { Slot::Tag(i) };
        let next = |i: usize| if i == t { Slot::Eos } else { Slot::Tag(i) };
        let mut table = Vec::with_capacity((t + 1).pow(3));
        for a in 0..=t {
            for b in 0..=t {
                for c in 0..=t {
                    table.push(self.transition_prob(prev(a), prev(b), next(c)).ln());
                }
            }
        }
        self.log_trans = Some(table);
    }

    /// log P(word | tag) up to a tag-independent constant for unknown words.
    pub fn log_emission(&self, word: &str, tag: usize) -> F {
        self.emission_scores(&normalize_word(word))[tag]
    }

    fn emission_scores(&self, word: &str) -> Vec<F> {
        if let Some(counts) = self.emissions.get(word) {
            return (0..self.tagset.len())
                .map(|t| {
                    let c = counts.get(&t).copied().unwrap_or(0);
                    (F::from_count(c) / F::from_count(self.unigram[t])).ln()
                })
                .collect();
        }
        let dist = self.suffix_distribution(word);
        (0..self.tagset.len())
            .map(|t| {
                let prior = F::from_count(self.unigram[t]) / F::from_count(self.tokens);
                (dist[t] / prior).ln()
            })
            .collect()
    }

    /// P(tag | longest known suffix), recursively smoothed from the empty suffix up.
    fn suffix_distribution(&self, word: &str) -> Vec<F> {
        let n = self.tagset.len();
        let relative = |row: &[u64]| -> Option<Vec<F>> {
            let total: u64 = row.iter().sum();
            (total > 0).then(|| row.iter().map(|&c| F::from_count(c) / F::from_count(total)).collect())
        };
        let mut dist = self.suffixes.get("").and_then(|row| relative(row)).unwrap_or_else(|| {
            self.unigram
                .iter()
                .map(|&c| F::from_count(c) / F::from_count(self.tokens))
                .collect()
        });
        let one = F::one();
        for suffix in suffixes_of(word, self.config.max_suffix_len).skip(1) {
            let Some(p) = self.suffixes.get(suffix).and_then(|row| relative(row)) else {
                break;
            };
            dist = (0..n)
                .map(|t| (p[t] + self.theta * dist[t]) / (one + self.theta))
                .collect();
        }
        dist
    }

    /// Viterbi decoding. Among equally scored sequences the one that is
    /// smallest in tagset order, compared from the last token backwards, wins.
    #[allow(clippy::needless_range_loop)]
    pub fn best_path(&self, words: &[&str]) -> Vec<usize> {
        let n = words.len();
        let t = self.tagset.len();
        if n == 0 || t == 0 {
            return Vec::new();
        }
        let emissions: Vec<Vec<F>> = words.iter().map(|w| self.emission_scores(&normalize_word(w))).collect();

        // Row index `prev` ranges over tags, plus `t` for the start boundary.
        let bos = t;
        let slot = |i: usize| if i == bos { Slot::Bos } else { Slot::Tag(i) };
        let neg_inf = F::neg_infinity();
        let mut delta = vec![vec![neg_inf; t]; t + 1];
        let mut back: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);

        for c in 0..t {
            delta[bos][c] = self.log_transition(Slot::Bos, Slot::Bos, Slot::Tag(c)) + emissions[0][c];
        }
        back.push(Vec::new());

        for (i, emit) in emissions.iter().enumerate().skip(1) {
            let preds: Vec<usize> = if i == 1 { vec![bos] } else { (0..t).collect() };
            let mut next = vec![vec![neg_inf; t]; t + 1];
            let mut ptr = vec![vec![preds[0]; t]; t];
            for b in 0..t {
                // A zero emission makes every cell through it -inf whatever the
                // predecessor, and the first predecessor is kept on such ties.
                if emissions[i - 1][b] == neg_inf {
                    continue;
                }
                for c in 0..t {
                    if emit[c] == neg_inf {
                        continue;
                    }
                    let mut best: Option<(F, usize)> = None;
                    for &a in &preds {
                        let score = delta[a][b] + self.log_transition(slot(a), Slot::Tag(b), Slot::Tag(c));
                        if best.is_none_or(|(s, _)| score > s) {
                            best = Some((score, a));
                        }
                    }
                    let (score, a) = best.expect("at least one predecessor");
                    next[b][c] = score + emit[c];
                    ptr[b][c] = a;
                }
            }
            delta = next;
            back.push(ptr);
        }

        let rows: Vec<usize> = if n == 1 { vec![bos] } else { (0..t).collect() };
        let mut best: Option<(F, usize, usize)> = None;
        for c in 0..t {
            for &b in &rows {
                let score = delta[b][c] + self.log_transition(slot(b), Slot::Tag(c), Slot::Eos);
                if best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, b, c));
                }
            }
        }
        let (_, mut b, mut c) = best.expect("non-empty tagset");
        let mut path = vec![0usize; n];
        for i in (0..n).rev() {
            path[i] = c;
            if i >= 1 {
                let a = back[i][b][c];
                c = b;
                b = a;
            }
        }
        path
    }

    /// Tags a tokenized sentence.
    pub fn tag(&self, sentence: &[Token]) -> Vec<TaggedToken> {
        let words: Vec<&str> = sentence.iter().map(|t| t.text.as_str()).collect();
        self.best_path(&words)
            .into_iter()
            .zip(sentence)
            .map(|(t, token)| TaggedToken {
                token: token.clone(),
                fine_tag: self.tagset[t].clone(),
                coarse: self.coarse[t],
            })
            .collect()
    }

    /// Writes the versioned text model format.
    ///
    /// ```text
    /// SIMILE-TAGGER<TAB>1
    /// config<TAB>max_suffix_len<TAB>rare_threshold
    /// tags<TAB>t1<TAB>t2...
    /// coarse<TAB>fine<TAB>V|A|N|O      (overrides only)
    /// lambda<TAB>l1<TAB>l2<TAB>l3
    /// theta<TAB>x
    /// size<TAB>sentences<TAB>tokens
    /// uni<TAB>tag<TAB>n
    /// bi<TAB>a<TAB>b<TAB>n             (<s> and </s> mark boundaries)
    /// tri<TAB>a<TAB>b<TAB>c<TAB>n
    /// emit<TAB>tag<TAB>word<TAB>n
    /// suffix<TAB>tag<TAB>suffix<TAB>n  (suffix may be empty)
    /// end<TAB>record-count
    /// ```
    pub fn write_to<W: Write>(&self, out: W) -> Result<(), TaggerError> {
        let mut w = BufWriter::new(out);
        let mut records = 0usize;
        let name = |s: Slot| match s {
            Slot::Bos => BOS,
            Slot::Eos => EOS,
            Slot::Tag(t) => self.tagset[t].as_str(),
        };
        writeln!(w, "{MAGIC}\t{FORMAT_VERSION}")?;
        writeln!(
            w,
            "config\t{}\t{}",
            self.config.max_suffix_len, self.config.rare_threshold
        )?;
        writeln!(w, "tags\t{}", self.tagset.join("\t"))?;
        for (fine, coarse) in &self.coarse_map.overrides {
            writeln!(w, "coarse\t{fine}\t{coarse}")?;
        }
        let [l1, l2, l3] = self.lambdas.map(Scalar::to_f64_lossy);
        writeln!(w, "lambda\t{l1:?}\t{l2:?}\t{l3:?}")?;
        writeln!(w, "theta\t{:?}", self.theta.to_f64_lossy())?;
        writeln!(w, "size\t{}\t{}", self.sentences, self.tokens)?;

        for (i, c) in self.unigram.iter().enumerate() {
            writeln!(w, "uni\t{}\t{c}", self.tagset[i])?;
            records += 1;
        }
        let mut bigrams: Vec<_> = self.bigram.iter().collect();
        bigrams.sort();
        for (&(a, b), c) in bigrams {
            writeln!(w, "bi\t{}\t{}\t{c}", name(a), name(b))?;
            records += 1;
        }
        let mut trigrams: Vec<_> = self.trigram.iter().collect();
        trigrams.sort();
        for (&(a, b, c), n) in trigrams {
            writeln!(w, "tri\t{}\t{}\t{}\t{n}", name(a), name(b), name(c))?;
            records += 1;
        }
        let mut words: Vec<_> = self.emissions.iter().collect();
        words.sort_by(|a, b| a.0.cmp(b.0));
        for (word, tags) in words {
            for (&t, c) in tags {
                writeln!(w, "emit\t{}\t{word}\t{c}", self.tagset[t])?;
                records += 1;
            }
        }
        let mut suffixes: Vec<_> = self.suffixes.iter().collect();
        suffixes.sort_by(|a, b| a.0.cmp(b.0));
        for (suffix, row) in suffixes {
            for (t, &c) in row.iter().enumerate().filter(|(_, c)| **c > 0) {
                writeln!(w, "suffix\t{}\t{suffix}\t{c}", self.tagset[t])?;
                records += 1;
            }
        }
        writeln!(w, "end\t{records}")?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, TaggerError> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(TaggerError::Truncated),
        };
        let (magic, version) = header.split_once('\t').ok_or(TaggerError::BadMagic)?;
        if magic != MAGIC {
            return Err(TaggerError::BadMagic);
        }
        let version: u32 = version.trim().parse().map_err(|_| TaggerError::BadMagic)?;
        if version != FORMAT_VERSION {
            return Err(TaggerError::Version(version));
        }

        let mut config = None;
        let mut tagset: Option<Vec<String>> = None;
        let mut coarse_map = CoarseMap::default();
        let mut lambdas = None;
        let mut theta = None;
        let mut size = None;
        let mut unigram = Vec::new();
        let mut bigram = HashMap::new();
        let mut trigram = HashMap::new();
        let mut emissions: HashMap<String, BTreeMap<usize, u64>> = HashMap::new();
        let mut suffixes: HashMap<String, Vec<u64>> = HashMap::new();
        let mut records = 0usize;
        let mut ended = false;

        for (idx, line) in lines {
            let line = line?;
            let line_no = idx + 1;
            let corrupt = |message: String| TaggerError::Corrupt { line: line_no, message };
            if ended {
                return Err(corrupt("data after end marker".into()));
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let num =
                |s: &str| -> Result<u64, TaggerError> { s.parse().map_err(|_| corrupt(format!("bad count {s:?}"))) };
            let real =
                |s: &str| -> Result<f64, TaggerError> { s.parse().map_err(|_| corrupt(format!("bad number {s:?}"))) };
            let tags = tagset.as_ref();
            let tag_id = |s: &str| -> Result<usize, TaggerError> {
                tags.and_then(|ts| ts.iter().position(|t| t == s))
                    .ok_or_else(|| corrupt(format!("unknown tag {s:?}")))
            };
            let slot = |s: &str| -> Result<Slot, TaggerError> {
                match s {
                    BOS => Ok(Slot::Bos),
                    EOS => Ok(Slot::Eos),
                    _ => tag_id(s).map(Slot::Tag),
                }
            };
            match (fields[0], fields.len()) {
                ("config", 3) => {
                    config = Some(TaggerConfig {
                        max_suffix_len: num(fields[1])? as usize,
                        rare_threshold: num(fields[2])?,
                    })
                }
                ("tags", _) => {
                    let ts: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
                    unigram = vec![0; ts.len()];
                    tagset = Some(ts);
                }
                ("coarse", 3) => {
                    let c = fields[2].parse().map_err(corrupt)?;
                    coarse_map.insert(fields[1], c);
                }
                ("lambda", 4) => lambdas = Some([real(fields[1])?, real(fields[2])?, real(fields[3])?]),
                ("theta", 2) => theta = Some(real(fields[1])?),
                ("size", 3) => size = Some((num(fields[1])?, num(fields[2])?)),
                ("uni", 3) => {
                    unigram[tag_id(fields[1])?] = num(fields[2])?;
                    records += 1;
                }
                ("bi", 4) => {
                    bigram.insert((slot(fields[1])?, slot(fields[2])?), num(fields[3])?);
                    records += 1;
                }
                ("tri", 5) => {
                    trigram.insert((slot(fields[1])?, slot(fields[2])?, slot(fields[3])?), num(fields[4])?);
                    records += 1;
                }
                ("emit", 4) => {
                    let t = tag_id(fields[1])?;
                    emissions
                        .entry(fields[2].to_string())
                        .or_default()
                        .insert(t, num(fields[3])?);
                    records += 1;
                }
                ("suffix", 4) => {
                    let t = tag_id(fields[1])?;
                    let n = unigram.len();
                    suffixes.entry(fields[2].to_string()).or_insert_with(|| vec![0; n])[t] = num(fields[3])?;
                    records += 1;
                }
                ("end", 2) => {
                    if num(fields[1])? as usize != records {
                        return Err(corrupt("record count mismatch".into()));
                    }
                    ended = true;
                }
                _ => return Err(corrupt(format!("unexpected record {line:?}"))),
            }
        }
        if !ended {
            return Err(TaggerError::Truncated);
        }
        let missing = |what: &str| TaggerError::Corrupt {
            line: 0,
            message: format!("missing {what} record"),
        };
        let tagset = tagset.ok_or_else(|| missing("tags"))?;
        let config = config.ok_or_else(|| missing("config"))?;
        let lambdas = lambdas.ok_or_else(|| missing("lambda"))?;
        let theta = theta.ok_or_else(|| missing("theta"))?;
        let (sentences, tokens) = size.ok_or_else(|| missing("size"))?;
        if (lambdas.iter().sum::<f64>() - 1.0).abs() > 1e-9 || lambdas.iter().any(|&l| l < 0.0) {
            return Err(TaggerError::Corrupt {
                line: 0,
                message: "interpolation weights must be non-negative and sum to 1".into(),
            });
        }
        if unigram.iter().sum::<u64>() != tokens || sentences == 0 {
            return Err(TaggerError::Corrupt {
                line: 0,
                message: "tag counts do not match corpus size".into(),
            });
        }
        let tag_index = tagset.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut model = TaggerModel {
            config,
            coarse: tagset.iter().map(|t| coarse_map.get(t)).collect(),
            tagset,
            tag_index,
            coarse_map,
            sentences,
            tokens,
            unigram,
            bigram,
            trigram,
            emissions,
            suffixes,
            lambdas: lambdas.map(F::from_f64_lossy),
            theta: F::from_f64_lossy(theta),
            log_trans: None,
        };
        model.cache_transitions();
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), TaggerError> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        Self::read_from(BufReader::new(std::fs::File::open(path)?))
    }
}

/// Suffixes of `word` from the empty one up to `max_len` characters, always
/// leaving at least one character of stem.
fn suffixes_of(word: &str, max_len: usize) -> impl Iterator<Item = &str> {
    let chars: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
    let limit = max_len.min(chars.len().saturating_sub(1));
    (0..=limit).map(move |k| {
        if k == 0 {
            &word[word.len()..]
        } else {
            &word[chars[chars.len() - k]..]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(pairs: &[(&str, &str)]) -> TrainingSentence {
        pairs.iter().map(|(w, t)| (w.to_string(), t.to_string())).collect()
    }

    fn model(corpus: Vec<TrainingSentence>) -> TaggerModel<f64> {
        TaggerModel::train(corpus, TaggerConfig::default()).unwrap()
    }

    #[test]
    fn coarse_first_letter_rule() {
        assert_eq!(coarse_of("Vmr3s"), CoarseTag::V);
        assert_eq!(coarse_of("Ncmsn"), CoarseTag::N);
        assert_eq!(coarse_of("Agpmsn"), CoarseTag::A);
        assert_eq!(coarse_of("X"), CoarseTag::O);
    }

    #[test]
    fn coarse_override() {
        let map = CoarseMap::parse("# comment\nXf\tN\n").unwrap();
        assert_eq!(map.get("Xf"), CoarseTag::N);
        assert_eq!(map.get("Vmr3s"), CoarseTag::V);
        assert!(CoarseMap::parse("Xf\tQ\n").is_err());
    }

    #[test]
    fn single_sentence_counts() {
        let m = model(vec![sent(&[("radi", "V"), ("kao", "O"), ("konj", "N")])]);
        assert_eq!(m.emission_count("V", "radi"), 1);
        assert_eq!(m.trigram_count(None, None, Some("V")), 1);
        assert_eq!(m.trigram_count(Some("O"), Some("N"), None), 1);
    }

    #[test]
    fn doubling_the_corpus_doubles_counts() {
        let s = sent(&[("radi", "V"), ("kao", "O"), ("konj", "N")]);
        let once = model(vec![s.clone()]);
        let twice = model(vec![s.clone(), s]);
        assert_eq!(twice.emission_count("N", "konj"), 2 * once.emission_count("N", "konj"));
        assert_eq!(
            twice.trigram_count(Some("V"), Some("O"), Some("N")),
            2 * once.trigram_count(Some("V"), Some("O"), Some("N"))
        );
        assert_eq!(twice.trigram_count(None, None, Some("V")), 2);
    }

    #[test]
    fn training_errors() {
        let err = read_training_corpus("radi\tV\nkao O\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TaggerError::MalformedLine { line: 2, .. }), "{err}");
        assert!(matches!(
            read_training_corpus("\n\n".as_bytes()),
            Err(TaggerError::EmptyCorpus)
        ));
        assert!(matches!(
            TaggerModel::<f64>::train(Vec::new(), TaggerConfig::default()),
            Err(TaggerError::EmptyCorpus)
        ));
    }

    #[test]
    fn lambdas_sum_to_one() {
        let m = model(vec![
            sent(&[("radi", "V"), ("kao", "O"), ("konj", "N")]),
            sent(&[("lep", "A"), ("kao", "O"), ("cvet", "N")]),
        ]);
        let sum: f64 = m.lambdas().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unique_emission_single_word() {
        let m = model(vec![
            sent(&[("konj", "N")]),
            sent(&[("radi", "V"), ("kao", "O"), ("konj", "N")]),
        ]);
        let tagged = m.tag(&[Token::word("konj")]);
        assert_eq!(tagged[0].fine_tag, "N");
        assert_eq!(tagged[0].coarse, CoarseTag::N);
    }

    #[test]
    fn suffix_iteration() {
        let s: Vec<&str> = suffixes_of("konjčina", 4).collect();
        assert_eq!(s, ["", "a", "na", "ina", "čina"]);
        let s: Vec<&str> = suffixes_of("ko", 4).collect();
        assert_eq!(s, ["", "o"]);
    }

    #[test]
    fn model_file_rejects_garbage() {
        assert!(matches!(
            TaggerModel::<f64>::read_from("NOT-A-MODEL\t1\n".as_bytes()),
            Err(TaggerError::BadMagic)
        ));
        assert!(matches!(
            TaggerModel::<f64>::read_from("SIMILE-TAGGER\t9\n".as_bytes()),
            Err(TaggerError::Version(9))
        ));
        assert!(matches!(
            TaggerModel::<f64>::read_from("".as_bytes()),
            Err(TaggerError::Truncated)
        ));
    }

    #[test]
    fn model_file_truncation_is_detected() {
        let m = model(vec![sent(&[("radi", "V"), ("kao", "O"), ("konj", "N")])]);
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text
            .lines()
            .take(text.lines().count() - 3)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            TaggerModel::<f64>::read_from(cut.as_bytes()),
            Err(TaggerError::Truncated)
        ));
        let back = TaggerModel::<f64>::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, m);
    }
}
