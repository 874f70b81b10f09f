//! Stage glue: documents to candidate files, candidate files to the store.
//!
//! A candidate file is UTF-8 with one record per line and six tab-separated
//! fields: `full_text`, `doc_id`, `sentence_offset`, `token_span` (as
//! `start-end`, end exclusive), `left`, `right`. Tabs, newlines and
//! backslashes inside fields are written as `\t`, `\n` and `\\`.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::classifier::{Classifier, FeatureVector, Featurizer, Label};
use crate::dedup::StemKey;
use crate::ingest::Document;
use crate::matcher::{extract, MatcherConfig, Provenance as Source, SimileCandidate};
use crate::scalar::Scalar;
use crate::store::{CorpusStore, NewEntry, Origin, Provenance, Status, StoreError};
use crate::tagger::TaggerModel;
use crate::tokenizer::{sentences, Abbreviations};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("candidate file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CandidateRecord {
    pub full_text: String,
    pub doc_id: String,
    pub sentence_offset: usize,
    pub token_span: Range<usize>,
    pub left: String,
    pub right: String,
}

impl CandidateRecord {
    /// Order used in candidate files: by provenance, then text.
    fn sort_key(&self) -> (&str, usize, usize, usize, &str) {
        (
            &self.doc_id,
            self.sentence_offset,
            self.token_span.start,
            self.token_span.end,
            &self.full_text,
        )
    }
}

impl From<&SimileCandidate> for CandidateRecord {
    fn from(c: &SimileCandidate) -> Self {
        CandidateRecord {
            full_text: c.full_text.clone(),
            doc_id: c.source.doc_id.clone(),
            sentence_offset: c.source.sentence_offset,
            token_span: c.span.clone(),
            left: c.left.clone(),
            right: c.right.clone(),
        }
    }
}

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(field: &str) -> Result<String, String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

impl fmt::Display for CandidateRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}-{}\t{}\t{}",
            escape(&self.full_text),
            escape(&self.doc_id),
            self.sentence_offset,
            self.token_span.start,
            self.token_span.end,
            escape(&self.left),
            escape(&self.right)
        )
    }
}

/// Sorts records into candidate-file order.
pub fn sort_candidates(records: &mut [CandidateRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Writes records in the order given; see [`sort_candidates`].
pub fn write_candidates<W: Write>(mut out: W, records: &[CandidateRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    out.flush()
}

pub fn read_candidates<R: BufRead>(reader: R) -> Result<Vec<CandidateRecord>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| PipelineError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [full, doc, offset, span, left, right] = fields.as_slice() else {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        };
        let offset = offset
            .parse()
            .map_err(|_| err(format!("bad sentence offset {offset:?}")))?;
        let (start, end) = span
            .split_once('-')
            .and_then(|(s, e)| Some((s.parse().ok()?, e.parse().ok()?)))
            .filter(|(s, e)| s < e)
            .ok_or_else(|| err(format!("bad token span {span:?}")))?;
        out.push(CandidateRecord {
            full_text: unescape(full).map_err(err)?,
            doc_id: unescape(doc).map_err(err)?,
            sentence_offset: offset,
            token_span: start..end,
            left: unescape(left).map_err(err)?,
            right: unescape(right).map_err(err)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentExtraction {
    pub sentences: usize,
    pub candidates: Vec<CandidateRecord>,
}

/// Everything needed to turn document text into candidates.
#[derive(Debug, Clone)]
pub struct Extractor<F> {
    pub tagger: TaggerModel<F>,
    pub matcher: MatcherConfig,
    pub abbreviations: Abbreviations,
}

impl<F: Scalar> Extractor<F> {
    pub fn new(tagger: TaggerModel<F>) -> Self {
        Extractor {
            tagger,
            matcher: MatcherConfig::default(),
            abbreviations: Abbreviations::default(),
        }
    }

    /// Splits, tags and matches one document.
    pub fn extract_document(&self, doc: &Document) -> DocumentExtraction {
        let mut result = DocumentExtraction::default();
        for sentence in sentences(&doc.text, &self.abbreviations) {
            result.sentences += 1;
            let tagged = self.tagger.tag(&sentence.tokens);
            let source = Source {
                doc_id: doc.doc_id.clone(),
                sentence_offset: sentence.source_offset,
            };
            result.candidates.extend(
                extract(&tagged, &self.matcher, &source)
                    .iter()
                    .map(CandidateRecord::from),
            );
        }
        result
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClassifySummary {
    pub candidates: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Positives stored as pending.
    pub stored_pending: usize,
    /// Negatives stored as rejected.
    pub stored_rejected: usize,
    /// Candidates whose stem key was already in the store or earlier in the batch.
    pub duplicates: usize,
}

impl ClassifySummary {
    pub fn stored(&self) -> usize {
        self.stored_pending + self.stored_rejected
    }
}

/// Classifies candidates and stores every new stem key: positives as
/// pending, negatives as rejected. Keys already present are skipped, so a
/// rerun inserts nothing.
pub fn classify_into_store<F: Scalar, C: Classifier<F>>(
    records: &[CandidateRecord],
    model: &C,
    featurizer: &Featurizer,
    store: &mut CorpusStore,
    actor: &str,
) -> Result<ClassifySummary, PipelineError> {
    let mut summary = ClassifySummary {
        candidates: records.len(),
        ..ClassifySummary::default()
    };
    let mut batch: HashSet<StemKey> = HashSet::new();
    let mask = model.mask();
    for r in records {
        let fv: FeatureVector = featurizer.from_parts(&r.full_text, &r.left, &r.right, mask);
        let prediction = model.predict(&fv);
        let positive = prediction.label == Label::Simile;
        if positive {
            summary.positives += 1;
        } else {
            summary.negatives += 1;
        }
        let key = store.key_maker().key_of(&r.full_text).map_err(StoreError::from)?;
        if store.contains_key(&key) || !batch.insert(key) {
            summary.duplicates += 1;
            continue;
        }
        store.insert(
            NewEntry {
                text: r.full_text.clone(),
                origin: Origin::Mined,
                provenance: Provenance::Document {
                    doc_id: r.doc_id.clone(),
                    sentence_offset: r.sentence_offset,
                },
                status: if positive { Status::Pending } else { Status::Rejected },
                classifier_score: Some(prediction.score.to_f64_lossy()),
            },
            actor,
        )?;
        if positive {
            summary.stored_pending += 1;
        } else {
            summary.stored_rejected += 1;
        }
    }
    Ok(summary)
}

/// Counts and timings for one pass through the funnel. A stage that does
/// not see a count leaves it `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PipelineRun {
    pub run_id: String,
    pub documents: Option<usize>,
    pub sentences: Option<usize>,
    pub candidates: Option<usize>,
    pub positives: Option<usize>,
    /// Newly stored positives.
    pub stored: Option<usize>,
    /// (stage, milliseconds), in execution order.
    pub timings: Vec<(String, u128)>,
}

impl PipelineRun {
    pub fn new(run_id: impl Into<String>) -> Self {
        PipelineRun {
            run_id: run_id.into(),
            ..PipelineRun::default()
        }
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((stage.to_string(), start.elapsed().as_millis()));
        out
    }

    /// candidates ≥ positives ≥ newly stored positives, over the counts present.
    pub fn is_monotone(&self) -> bool {
        let known: Vec<usize> = [self.candidates, self.positives, self.stored]
            .into_iter()
            .flatten()
            .collect();
        known.windows(2).all(|w| w[0] >= w[1])
    }
}

impl fmt::Display for PipelineRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "run {}", self.run_id)?;
        for (label, n) in [
            ("documents", self.documents),
            ("sentences", self.sentences),
            ("candidates", self.candidates),
            ("positives", self.positives),
            ("stored", self.stored),
        ] {
            if let Some(n) = n {
                writeln!(f, "  {label:<11}{n}")?;
            }
        }
        for (stage, ms) in &self.timings {
            writeln!(f, "  {stage} took {ms} ms")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::AlwaysPositive;
    use crate::dedup::KeyMaker;

    fn record(text: &str, doc: &str, offset: usize, span: Range<usize>) -> CandidateRecord {
        let (left, right) = text.split_once(" kao ").unwrap();
        CandidateRecord {
            full_text: text.into(),
            doc_id: doc.into(),
            sentence_offset: offset,
            token_span: span,
            left: left.into(),
            right: right.into(),
        }
    }

    #[test]
    fn file_round_trip() {
        let mut recs = vec![
            record("radi kao konj", "b", 0, 1..4),
            record("lep kao cvet", "a", 10, 2..5),
            record("weird\tfield kao x\\y", "a", 3, 0..3),
        ];
        sort_candidates(&mut recs);
        assert_eq!(recs[0].sentence_offset, 3);
        let mut buf = Vec::new();
        write_candidates(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("radi kao konj\tb\t0\t1-4\tradi\tkonj\n"));
        assert_eq!(read_candidates(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn malformed_lines() {
        let e = read_candidates("a\tb\n".as_bytes()).unwrap_err();
        assert!(matches!(e, PipelineError::Parse { line: 1, .. }));
        let e = read_candidates("a kao b\td\t0\t3-1\ta\tb\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("token span"));
    }

    #[test]
    fn classify_is_idempotent() {
        let recs = vec![
            record("radi kao konj", "a", 0, 0..3),
            record("radio kao konj", "a", 9, 0..3),
            record("lep kao cvet", "b", 0, 0..3),
        ];
        let mut store = CorpusStore::in_memory(KeyMaker::default());
        let f = Featurizer::default();
        let s1 = classify_into_store::<f64, _>(&recs, &AlwaysPositive, &f, &mut store, "t").unwrap();
        assert_eq!((s1.positives, s1.stored_pending, s1.duplicates), (3, 2, 1));
        let s2 = classify_into_store::<f64, _>(&recs, &AlwaysPositive, &f, &mut store, "t").unwrap();
        assert_eq!((s2.stored(), s2.duplicates), (0, 3));
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn run_report_shows_known_counts() {
        let mut run = PipelineRun::new("r1");
        run.candidates = Some(10);
        run.positives = Some(3);
        run.stored = Some(3);
        assert!(run.is_monotone());
        let text = run.to_string();
        assert!(text.starts_with("run r1\n  candidates 10\n  positives  3\n"));
        assert!(!text.contains("documents"));
        run.stored = Some(4);
        assert!(!run.is_monotone());
        run.positives = None;
        assert!(run.is_monotone());
    }
}
