//! The curated simile corpus.
//!
//! Entries move through `pending → approved | rejected`, can be reinstated
//! (`rejected → pending`) or re-opened (`approved → pending`), and are never
//! deleted. Every change is appended to a line-oriented log file:
//!
//! ```text
//! SIMILE-STORE<TAB>1
//! {"op":"create","id":1,"at":..,"actor":"..","text":"..","stem_key":"..","status":"pending","origin":"mined","provenance":{..},"score":0.93}
//! {"op":"status","id":1,"at":..,"actor":"..","from":"pending","to":"approved"}
//! {"op":"edit","id":1,"at":..,"actor":"..","text":"..","stem_key":".."}
//! ```
//!
//! Opening a store replays the log into memory. `at` is milliseconds since the
//! Unix epoch.

use std::cmp::Ordering;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicI64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collation;
use crate::dedup::{DedupError, DedupIndex, KeyMaker, StemKey, DEFAULT_THRESHOLD};
use crate::normalize::normalize_word;

const MAGIC: &str = "SIMILE-STORE";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("entry text is empty")]
    EmptyText,
    #[error("no entry with id {0}")]
    UnknownId(u64),
    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition { from: Status, to: Status },
    #[error("page numbers start at 1 and page size must be positive")]
    InvalidPage,
    #[error("not a simile store (bad header)")]
    BadHeader,
    #[error("store version {0} is not supported")]
    Version(u32),
    #[error("corrupt store at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Key(#[from] DedupError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Approved,
    Rejected,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Pending, Status::Approved, Status::Rejected];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pending => "pending",
            Status::Approved => "approved",
            Status::Rejected => "rejected",
        }
    }

    /// Whether `self → to` is one of the four permitted moves.
    pub fn can_become(self, to: Status) -> bool {
        matches!(
            (self, to),
            (Status::Pending, Status::Approved)
                | (Status::Pending, Status::Rejected)
                | (Status::Rejected, Status::Pending)
                | (Status::Approved, Status::Pending)
        )
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Mined,
    Manual,
    Seed,
}

impl Origin {
    pub const ALL: [Origin; 3] = [Origin::Mined, Origin::Manual, Origin::Seed];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Mined => "mined",
            Origin::Manual => "manual",
            Origin::Seed => "seed",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Origin::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown origin {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Document { doc_id: String, sentence_offset: usize },
    Contributor { note: String },
    Seed { source: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "change", rename_all = "lowercase")]
pub enum Change {
    Created { status: Status },
    Status { from: Status, to: Status },
    Edited { from_text: String, to_text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub at: i64,
    pub actor: String,
    #[serde(flatten)]
    pub change: Change,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: u64,
    pub text: String,
    pub stem_key: StemKey,
    pub status: Status,
    pub origin: Origin,
    pub provenance: Provenance,
    pub classifier_score: Option<f64>,
    pub created_at: i64,
    pub updated_at: i64,
    pub history: Vec<HistoryRecord>,
}

impl CorpusEntry {
    /// Status implied by the history: the latest creation or status change.
    pub fn status_from_history(&self) -> Option<Status> {
        self.history.iter().rev().find_map(|h| match h.change {
            Change::Created { status } => Some(status),
            Change::Status { to, .. } => Some(to),
            Change::Edited { .. } => None,
        })
    }
}

/// Source of timestamps.
pub trait Clock: Send + Sync {
    fn now_millis(&self) -> i64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_millis(&self) -> i64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0)
    }
}

/// Deterministic clock advancing by one millisecond per reading.
#[derive(Debug, Default)]
pub struct TickClock(AtomicI64);

impl TickClock {
    pub fn starting_at(t: i64) -> Self {
        TickClock(AtomicI64::new(t))
    }
}

impl Clock for TickClock {
    fn now_millis(&self) -> i64 {
        self.0.fetch_add(1, AtomicOrdering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewEntry {
    pub text: String,
    pub origin: Origin,
    pub provenance: Provenance,
    pub status: Status,
    pub classifier_score: Option<f64>,
}

impl NewEntry {
    pub fn pending(text: impl Into<String>, origin: Origin, provenance: Provenance) -> Self {
        NewEntry {
            text: text.into(),
            origin,
            provenance,
            status: Status::Pending,
            classifier_score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Similar {
    pub id: u64,
    pub text: String,
    pub status: Status,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AddOutcome {
    pub id: u64,
    /// Existing entries at or above the similarity threshold.
    pub warnings: Vec<Similar>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StatusCounts {
    pub pending: usize,
    pub approved: usize,
    pub rejected: usize,
}

impl StatusCounts {
    fn bump(&mut self, s: Status) {
        match s {
            Status::Pending => self.pending += 1,
            Status::Approved => self.approved += 1,
            Status::Rejected => self.rejected += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pending + self.approved + self.rejected
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub by_status: StatusCounts,
    pub mined: StatusCounts,
    pub manual: StatusCounts,
    pub seed: StatusCounts,
    /// Seed entries whose stem key also belongs to a mined entry.
    pub seed_mined_overlap: usize,
}

impl CorpusStats {
    pub fn origin(&self, o: Origin) -> &StatusCounts {
        match o {
            Origin::Mined => &self.mined,
            Origin::Manual => &self.manual,
            Origin::Seed => &self.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub added: usize,
    /// Imported phrases whose stem key matched an existing mined entry.
    pub overlap_with_mined: usize,
    pub blank_lines: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListFilter {
    pub status: Option<Status>,
    pub origin: Option<Origin>,
    /// Matched against the normalized (lowercase, Latin) text.
    pub prefix: Option<String>,
}

impl ListFilter {
    pub fn status(status: Status) -> Self {
        ListFilter {
            status: Some(status),
            ..ListFilter::default()
        }
    }

    fn accepts(&self, e: &CorpusEntry) -> bool {
        self.status.is_none_or(|s| e.status == s)
            && self.origin.is_none_or(|o| e.origin == o)
            && self
                .prefix
                .as_ref()
                .is_none_or(|p| normalize_word(&e.text).starts_with(&normalize_word(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageRequest {
    /// 1-based.
    pub page: usize,
    pub size: usize,
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest { page: 1, size: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page<'a> {
    pub entries: Vec<&'a CorpusEntry>,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub pages: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Record {
    Create {
        id: u64,
        at: i64,
        actor: String,
        text: String,
        stem_key: StemKey,
        status: Status,
        origin: Origin,
        provenance: Provenance,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        score: Option<f64>,
    },
    Status {
        id: u64,
        at: i64,
        actor: String,
        from: Status,
        to: Status,
    },
    Edit {
        id: u64,
        at: i64,
        actor: String,
        text: String,
        stem_key: StemKey,
    },
}

/// Ordering used for listings: Serbian alphabetical, then id.
fn alphabetical(a: &CorpusEntry, b: &CorpusEntry) -> Ordering {
    collation::compare(&a.text, &b.text).then(a.id.cmp(&b.id))
}

pub struct CorpusStore {
    path: Option<PathBuf>,
    log: Option<File>,
    entries: Vec<CorpusEntry>,
    index: DedupIndex,
    threshold: f64,
    clock: Box<dyn Clock>,
}

impl fmt::Debug for CorpusStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusStore")
            .field("path", &self.path)
            .field("entries", &self.entries.len())
            .field("threshold", &self.threshold)
            .finish()
    }
}

impl CorpusStore {
    /// A store that lives only in memory.
    pub fn in_memory(keys: KeyMaker) -> Self {
        CorpusStore {
            path: None,
            log: None,
            entries: Vec::new(),
            index: DedupIndex::new(keys),
            threshold: DEFAULT_THRESHOLD,
            clock: Box::new(SystemClock),
        }
    }

    /// Opens (or creates) a store file and replays it.
    pub fn open(path: &Path, keys: KeyMaker) -> Result<Self, StoreError> {
        let mut store = CorpusStore::in_memory(keys);
        store.path = Some(path.to_path_buf());
        if path.exists() && std::fs::metadata(path)?.len() > 0 {
            store.replay(BufReader::new(File::open(path)?))?;
        } else {
            let mut f = File::create(path)?;
            writeln!(f, "{MAGIC}\t{FORMAT_VERSION}")?;
            f.sync_all()?;
        }
        store.log = Some(OpenOptions::new().append(true).open(path)?);
        Ok(store)
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    /// Similarity at which `add_entry` reports existing entries.
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self, StoreError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(DedupError::BadThreshold(threshold).into());
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn key_maker(&self) -> &KeyMaker {
        self.index.key_maker()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn get(&self, id: u64) -> Option<&CorpusEntry> {
        id.checked_sub(1).and_then(|i| self.entries.get(i as usize))
    }

    fn replay<R: BufRead>(&mut self, reader: R) -> Result<(), StoreError> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or(StoreError::BadHeader)??;
        let (magic, version) = header.split_once('\t').ok_or(StoreError::BadHeader)?;
        if magic != MAGIC {
            return Err(StoreError::BadHeader);
        }
        let version: u32 = version.trim().parse().map_err(|_| StoreError::BadHeader)?;
        if version != FORMAT_VERSION {
            return Err(StoreError::Version(version));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line_no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                line: line_no,
                message: e.to_string(),
            })?;
            self.apply(record).map_err(|e| StoreError::Corrupt {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Applies a record to the in-memory state. Stored stem keys are
    /// recomputed so that edits to the stemming rules take effect on reopen.
    fn apply(&mut self, record: Record) -> Result<(), StoreError> {
        match record {
            Record::Create {
                id,
                at,
                actor,
                text,
                stem_key,
                status,
                origin,
                provenance,
                score,
            } => {
                if id != self.entries.len() as u64 + 1 {
                    return Err(StoreError::Corrupt {
                        line: 0,
                        message: format!("unexpected id {id}"),
                    });
                }
                let key = self.index.key_of(&text)?;
                if key != stem_key {
                    log::warn!("entry {id}: stored key {stem_key} differs from {key}; using the recomputed key");
                }
                self.index.insert(id, key.clone());
                self.entries.push(CorpusEntry {
                    id,
                    text,
                    stem_key: key,
                    status,
                    origin,
                    provenance,
                    classifier_score: score,
                    created_at: at,
                    updated_at: at,
                    history: vec![HistoryRecord {
                        at,
                        actor,
                        change: Change::Created { status },
                    }],
                });
            }
            Record::Status {
                id,
                at,
                actor,
                from,
                to,
            } => {
                let e = self.entry_mut(id)?;
                if e.status != from || !from.can_become(to) {
                    return Err(StoreError::IllegalTransition { from: e.status, to });
                }
                e.status = to;
                e.updated_at = at;
                e.history.push(HistoryRecord {
                    at,
                    actor,
                    change: Change::Status { from, to },
                });
            }
            Record::Edit {
                id,
                at,
                actor,
                text,
                stem_key: _,
            } => {
                let key = self.index.key_of(&text)?;
                let e = self.entry_mut(id)?;
                let from_text = std::mem::replace(&mut e.text, text.clone());
                e.stem_key = key.clone();
                e.updated_at = at;
                e.history.push(HistoryRecord {
                    at,
                    actor,
                    change: Change::Edited {
                        from_text,
                        to_text: text,
                    },
                });
                self.index.insert(id, key);
            }
        }
        Ok(())
    }

    fn entry_mut(&mut self, id: u64) -> Result<&mut CorpusEntry, StoreError> {
        id.checked_sub(1)
            .and_then(|i| self.entries.get_mut(i as usize))
            .ok_or(StoreError::UnknownId(id))
    }

    /// Appends the record to the log, then applies it. Nothing changes in
    /// memory if the write fails.
    fn commit(&mut self, record: Record) -> Result<(), StoreError> {
        if let Some(log) = self.log.as_mut() {
            let mut line = serde_json::to_string(&record).expect("records serialize");
            line.push('\n');
            log.write_all(line.as_bytes())?;
            log.flush()?;
        }
        self.apply(record)
    }

    fn similar_to(&self, key: &StemKey, threshold: f64) -> Vec<Similar> {
        self.index
            .find_similar_key(key, threshold)
            .unwrap_or_default()
            .into_iter()
            .filter_map(|m| {
                self.get(m.id).map(|e| Similar {
                    id: e.id,
                    text: e.text.clone(),
                    status: e.status,
                    similarity: m.similarity,
                })
            })
            .collect()
    }

    /// Inserts an entry; exact-key duplicates are allowed and reported.
    pub fn insert(&mut self, new: NewEntry, actor: &str) -> Result<AddOutcome, StoreError> {
        let text = new.text.trim().to_string();
        if text.is_empty() {
            return Err(StoreError::EmptyText);
        }
        let key = self.index.key_of(&text)?;
        let warnings = self.similar_to(&key, self.threshold);
        let id = self.entries.len() as u64 + 1;
        self.commit(Record::Create {
            id,
            at: self.clock.now_millis(),
            actor: actor.to_string(),
            text,
            stem_key: key,
            status: new.status,
            origin: new.origin,
            provenance: new.provenance,
            score: new.classifier_score,
        })?;
        Ok(AddOutcome { id, warnings })
    }

    /// Adds a pending entry.
    pub fn add_entry(
        &mut self,
        text: &str,
        origin: Origin,
        provenance: Provenance,
        actor: &str,
    ) -> Result<AddOutcome, StoreError> {
        self.insert(NewEntry::pending(text, origin, provenance), actor)
    }

    pub fn set_status(&mut self, id: u64, to: Status, actor: &str) -> Result<&CorpusEntry, StoreError> {
        let from = self.get(id).ok_or(StoreError::UnknownId(id))?.status;
        if !from.can_become(to) {
            return Err(StoreError::IllegalTransition { from, to });
        }
        self.commit(Record::Status {
            id,
            at: self.clock.now_millis(),
            actor: actor.to_string(),
            from,
            to,
        })?;
        Ok(self.get(id).expect("entry exists"))
    }

    /// Replaces the text; the stem key is recomputed and the old text kept in history.
    pub fn edit_text(&mut self, id: u64, text: &str, actor: &str) -> Result<&CorpusEntry, StoreError> {
        self.get(id).ok_or(StoreError::UnknownId(id))?;
        let text = text.trim();
        if text.is_empty() {
            return Err(StoreError::EmptyText);
        }
        let key = self.index.key_of(text)?;
        self.commit(Record::Edit {
            id,
            at: self.clock.now_millis(),
            actor: actor.to_string(),
            text: text.to_string(),
            stem_key: key,
        })?;
        Ok(self.get(id).expect("entry exists"))
    }

    /// Whether any entry, in any status, has this key.
    pub fn contains_key(&self, key: &StemKey) -> bool {
        self.index.exact(key).next().is_some()
    }

    /// Adds one approved seed entry per non-blank line.
    pub fn import_seed<R: BufRead>(&mut self, lines: R, source: &str, actor: &str) -> Result<ImportReport, StoreError> {
        let phrases: Vec<String> = lines.lines().collect::<Result<_, _>>()?;
        let mined_keys: Vec<StemKey> = self
            .entries
            .iter()
            .filter(|e| e.origin == Origin::Mined)
            .map(|e| e.stem_key.clone())
            .collect();
        let mut report = ImportReport::default();
        for phrase in phrases {
            let phrase = phrase.trim();
            if phrase.is_empty() {
                report.blank_lines += 1;
                continue;
            }
            let key = self.index.key_of(phrase)?;
            if mined_keys.contains(&key) {
                report.overlap_with_mined += 1;
            }
            self.insert(
                NewEntry {
                    text: phrase.to_string(),
                    origin: Origin::Seed,
                    provenance: Provenance::Seed {
                        source: source.to_string(),
                    },
                    status: Status::Approved,
                    classifier_score: None,
                },
                actor,
            )?;
            report.added += 1;
        }
        Ok(report)
    }

    /// Entries of origin `a` whose key also occurs among entries of origin `b`.
    pub fn overlap(&self, a: Origin, b: Origin) -> usize {
        self.entries
            .iter()
            .filter(|e| e.origin == a)
            .filter(|e| {
                self.entries
                    .iter()
                    .any(|o| o.origin == b && o.id != e.id && o.stem_key == e.stem_key)
            })
            .count()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut s = CorpusStats {
            total: self.entries.len(),
            ..CorpusStats::default()
        };
        for e in &self.entries {
            s.by_status.bump(e.status);
            match e.origin {
                Origin::Mined => s.mined.bump(e.status),
                Origin::Manual => s.manual.bump(e.status),
                Origin::Seed => s.seed.bump(e.status),
            }
        }
        s.seed_mined_overlap = self.overlap(Origin::Seed, Origin::Mined);
        s
    }

    /// Filtered entries in Serbian alphabetical order, one page at a time.
    pub fn list(&self, filter: &ListFilter, page: PageRequest) -> Result<Page<'_>, StoreError> {
        if page.page == 0 || page.size == 0 {
            return Err(StoreError::InvalidPage);
        }
        let mut all: Vec<&CorpusEntry> = self.entries.iter().filter(|e| filter.accepts(e)).collect();
        all.sort_by(|a, b| alphabetical(a, b));
        let total = all.len();
        let pages = total.div_ceil(page.size);
        let entries = all
            .into_iter()
            .skip((page.page - 1).saturating_mul(page.size))
            .take(page.size)
            .collect();
        Ok(Page {
            entries,
            page: page.page,
            page_size: page.size,
            total,
            pages,
        })
    }

    /// Approved entries only.
    pub fn public_listing(&self) -> Vec<&CorpusEntry> {
        let mut v: Vec<&CorpusEntry> = self.entries.iter().filter(|e| e.status == Status::Approved).collect();
        v.sort_by(|a, b| alphabetical(a, b));
        v
    }

    /// Pending entries, oldest first.
    pub fn pending_queue(&self) -> Vec<&CorpusEntry> {
        let mut v: Vec<&CorpusEntry> = self.entries.iter().filter(|e| e.status == Status::Pending).collect();
        v.sort_by_key(|e| (e.created_at, e.id));
        v
    }

    /// Stem-based search restricted to `status` (all statuses when `None`).
    pub fn search(
        &self,
        query: &str,
        threshold: f64,
        status: Option<Status>,
    ) -> Result<Vec<(&CorpusEntry, f64)>, StoreError> {
        let hits = self.index.find_similar(query, threshold)?;
        Ok(hits
            .into_iter()
            .filter_map(|m| self.get(m.id).map(|e| (e, m.similarity)))
            .filter(|(e, _)| status.is_none_or(|s| e.status == s))
            .collect())
    }

    /// Approved texts, one per line, alphabetical.
    pub fn export_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in self.public_listing() {
            writeln!(out, "{}", e.text)?;
        }
        Ok(())
    }

    /// Approved entries as JSON lines with provenance and history.
    pub fn export_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in self.public_listing() {
            let line = serde_json::to_string(e).map_err(std::io::Error::other)?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> CorpusStore {
        CorpusStore::in_memory(KeyMaker::default()).with_clock(TickClock::starting_at(1000))
    }

    fn note() -> Provenance {
        Provenance::Contributor { note: String::new() }
    }

    #[test]
    fn add_to_empty_store_has_no_warnings() {
        let mut s = store();
        let out = s.add_entry("radi kao konj", Origin::Manual, note(), "anon").unwrap();
        assert_eq!(out.id, 1);
        assert!(out.warnings.is_empty());
        assert_eq!(s.get(1).unwrap().status, Status::Pending);
    }

    #[test]
    fn near_duplicate_warning() {
        let mut s = store();
        s.add_entry("beo kao sneg", Origin::Mined, note(), "m").unwrap();
        s.set_status(1, Status::Approved, "curator").unwrap();
        let out = s.add_entry("bela kao sneg", Origin::Manual, note(), "anon").unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].id, 1);
        assert_eq!(out.warnings[0].similarity, 1.0);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn same_text_twice() {
        let mut s = store();
        s.add_entry("radi kao konj", Origin::Manual, note(), "a").unwrap();
        let out = s.add_entry("radi kao konj", Origin::Manual, note(), "a").unwrap();
        assert_eq!(out.warnings[0].similarity, 1.0);
    }

    #[test]
    fn empty_text() {
        assert!(matches!(
            store().add_entry("  ", Origin::Manual, note(), "a"),
            Err(StoreError::EmptyText)
        ));
    }

    #[test]
    fn lifecycle_and_visibility() {
        let mut s = store();
        s.add_entry("radi kao konj", Origin::Mined, note(), "m").unwrap();
        s.add_entry("radi kao pravnik", Origin::Mined, note(), "m").unwrap();
        s.set_status(1, Status::Approved, "c").unwrap();
        s.set_status(2, Status::Rejected, "c").unwrap();
        let public: Vec<u64> = s.public_listing().iter().map(|e| e.id).collect();
        assert_eq!(public, [1]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(2).unwrap().status, Status::Rejected);

        let err = s.set_status(1, Status::Rejected, "c").unwrap_err();
        assert_eq!(err.to_string(), "illegal status transition approved -> rejected");
        s.set_status(1, Status::Pending, "c").unwrap();
        s.set_status(1, Status::Rejected, "c").unwrap();
        s.set_status(2, Status::Pending, "c").unwrap();
        assert!(matches!(
            s.set_status(9, Status::Approved, "c"),
            Err(StoreError::UnknownId(9))
        ));
        let e = s.get(1).unwrap();
        assert_eq!(e.history.len(), 4);
        assert_eq!(e.status_from_history(), Some(e.status));
    }

    #[test]
    fn edit_recomputes_key() {
        let mut s = store();
        s.add_entry("radi kao konj", Origin::Manual, note(), "a").unwrap();
        let e = s.edit_text(1, "bela kao sneg", "c").unwrap();
        assert_eq!(e.stem_key, KeyMaker::default().key_of("beo kao sneg").unwrap());
        assert!(matches!(
            &e.history[1].change,
            Change::Edited { from_text, .. } if from_text == "radi kao konj"
        ));
        assert_eq!(s.search("beo kao sneg", 1.0, None).unwrap().len(), 1);
        assert!(s.search("radi kao konj", 1.0, None).unwrap().is_empty());
    }

    #[test]
    fn stats_partition() {
        let mut s = store();
        assert_eq!(s.stats(), CorpusStats::default());
        s.add_entry("radi kao konj", Origin::Mined, note(), "m").unwrap();
        s.add_entry("lep kao cvet", Origin::Manual, note(), "m").unwrap();
        s.import_seed("gladan kao vuk\nradio kao konj\n".as_bytes(), "seed", "c")
            .unwrap();
        s.set_status(1, Status::Approved, "c").unwrap();
        let st = s.stats();
        assert_eq!(st.total, 4);
        assert_eq!(
            st.by_status.approved,
            st.mined.approved + st.manual.approved + st.seed.approved
        );
        assert_eq!(st.by_status.approved, 3);
        assert_eq!(st.seed.approved, 2);
        assert_eq!(st.seed_mined_overlap, 1);
    }

    #[test]
    fn paging() {
        let mut s = store();
        for t in ["e kao e", "a kao a", "d kao d", "b kao b", "c kao c"] {
            s.add_entry(t, Origin::Manual, note(), "a").unwrap();
        }
        let f = ListFilter::default();
        let mut seen = Vec::new();
        for p in 1..=3 {
            let page = s.list(&f, PageRequest { page: p, size: 2 }).unwrap();
            assert_eq!(page.pages, 3);
            seen.extend(page.entries.iter().map(|e| e.text.clone()));
        }
        assert_eq!(seen, ["a kao a", "b kao b", "c kao c", "d kao d", "e kao e"]);
        assert!(s.list(&f, PageRequest { page: 4, size: 2 }).unwrap().entries.is_empty());
        assert!(matches!(
            s.list(&f, PageRequest { page: 0, size: 2 }),
            Err(StoreError::InvalidPage)
        ));
    }

    #[test]
    fn prefix_filter() {
        let mut s = store();
        for t in ["beo kao sneg", "radi kao konj", "bled kao krpa"] {
            s.add_entry(t, Origin::Manual, note(), "a").unwrap();
        }
        let f = ListFilter {
            prefix: Some("b".into()),
            ..ListFilter::default()
        };
        let page = s.list(&f, PageRequest::default()).unwrap();
        let texts: Vec<&str> = page.entries.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(texts, ["beo kao sneg", "bled kao krpa"]);
    }

    #[test]
    fn pending_queue_oldest_first() {
        let mut s = store();
        for t in ["c kao c", "a kao a", "b kao b"] {
            s.add_entry(t, Origin::Manual, note(), "a").unwrap();
        }
        let q: Vec<u64> = s.pending_queue().iter().map(|e| e.id).collect();
        assert_eq!(q, [1, 2, 3]);
        s.set_status(1, Status::Approved, "c").unwrap();
        assert_eq!(s.pending_queue().len(), 2);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.log");
        {
            let mut s = CorpusStore::open(&path, KeyMaker::default()).unwrap();
            s.add_entry(
                "radi kao konj",
                Origin::Mined,
                Provenance::Document {
                    doc_id: "d1".into(),
                    sentence_offset: 4,
                },
                "m",
            )
            .unwrap();
            s.set_status(1, Status::Approved, "c").unwrap();
            s.edit_text(1, "radi k'o konj", "c").unwrap();
        }
        let s = CorpusStore::open(&path, KeyMaker::default()).unwrap();
        let e = s.get(1).unwrap();
        assert_eq!(e.text, "radi k'o konj");
        assert_eq!(e.status, Status::Approved);
        assert_eq!(e.history.len(), 3);
    }

    #[test]
    fn bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        std::fs::write(&path, "NOPE\t1\n").unwrap();
        assert!(matches!(
            CorpusStore::open(&path, KeyMaker::default()),
            Err(StoreError::BadHeader)
        ));
        std::fs::write(&path, "SIMILE-STORE\t1\n{\"op\":\"status\",\"id\":1}\n").unwrap();
        assert!(matches!(
            CorpusStore::open(&path, KeyMaker::default()),
            Err(StoreError::Corrupt { line: 2, .. })
        ));
    }
}
