//! Document sources: local text trees, a document cache, and a confined web
//! crawler.
//!
//! Sites are configured in TOML, one `[[site]]` table per site:
//!
//! ```toml
//! [[site]]
//! site_name = "primer"
//! allowed_domain = "primer.rs"
//! content_selector = "content"
//! start_urls = ["https://primer.rs/"]
//! max_pages = 200
//! politeness_delay_ms = 1000
//! ```

mod crawl;
mod html;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

pub use crawl::{crawl, CrawlOutcome, Fetcher, HttpFetcher, Response, RobotsRules, USER_AGENT};
pub use html::{decode_entities, extract_content, links};

/// Name of the manifest inside a document cache directory.
pub const MANIFEST: &str = "manifest.tsv";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0} does not exist")]
    MissingRoot(PathBuf),
    #[error("invalid source config: {0}")]
    Config(String),
    #[error("bad manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub site_name: String,
    pub allowed_domain: String,
    /// Id of the element holding the article text.
    pub content_selector: String,
    pub start_urls: Vec<String>,
    #[serde(default = "default_max_pages")]
    pub max_pages: usize,
    #[serde(default = "default_delay")]
    pub politeness_delay_ms: u64,
}

fn default_max_pages() -> usize {
    100
}

fn default_delay() -> u64 {
    1000
}

impl SourceConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.allowed_domain.trim().is_empty() {
            return Err(IngestError::Config(format!(
                "{}: allowed_domain is empty",
                self.site_name
            )));
        }
        if self.max_pages == 0 {
            return Err(IngestError::Config(format!(
                "{}: max_pages must be at least 1",
                self.site_name
            )));
        }
        if self.content_selector.is_empty() {
            return Err(IngestError::Config(format!(
                "{}: content_selector is empty",
                self.site_name
            )));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct SourcesFile {
    #[serde(default)]
    site: Vec<SourceConfig>,
}

/// Parses a TOML file of `[[site]]` tables and validates each.
pub fn parse_sources(text: &str) -> Result<Vec<SourceConfig>, IngestError> {
    let file: SourcesFile = toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
    for s in &file.site {
        s.validate()?;
    }
    Ok(file.site)
}

pub fn load_sources(path: &Path) -> Result<Vec<SourceConfig>, IngestError> {
    parse_sources(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// Path relative to the ingested root, or URL.
    pub source_locator: String,
    pub text: String,
    /// Milliseconds since the Unix epoch.
    pub fetched_at: i64,
}

impl Document {
    pub fn new(locator: &str, text: String, fetched_at: i64) -> Self {
        Document {
            doc_id: doc_id(locator),
            source_locator: locator.to_string(),
            text,
            fetched_at,
        }
    }
}

/// First 16 hex digits of the SHA-256 of the locator.
pub fn doc_id(locator: &str) -> String {
    let digest = Sha256::digest(locator.as_bytes());
    hex::encode(&digest[..8])
}

pub(crate) fn now_millis() -> i64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}

fn relative_locator(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn is_hidden(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0 && entry.file_name().to_string_lossy().starts_with('.')
}

/// Every regular file under `root`, in lexicographic path order. Hidden
/// files and directories are ignored. Invalid UTF-8 is decoded with
/// replacement characters; unreadable files are logged and skipped.
pub fn read_local(root: &Path) -> Result<Vec<Document>, IngestError> {
    if !root.exists() {
        return Err(IngestError::MissingRoot(root.to_path_buf()));
    }
    let mut docs = Vec::new();
    let walker = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| !is_hidden(e));
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                log::warn!("{e}");
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                continue;
            }
        };
        let text = match String::from_utf8(bytes) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("{}: not valid UTF-8, decoding with replacement", path.display());
                String::from_utf8_lossy(e.as_bytes()).into_owned()
            }
        };
        let fetched_at = entry
            .metadata()
            .ok()
            .and_then(|m| m.modified().ok())
            .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_millis() as i64);
        docs.push(Document::new(&relative_locator(root, path), text, fetched_at));
    }
    Ok(docs)
}

/// Per-source document counts: files grouped by their top-level directory
/// under `root`. Files directly in `root` are counted under ".".
pub fn count_by_source(docs: &[Document]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for d in docs {
        let key = match d.source_locator.split_once('/') {
            Some((top, _)) => top.to_string(),
            None => ".".to_string(),
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// Writes `docs/<doc_id>.txt` per document and a tab-separated manifest
/// (`doc_id`, `fetched_at`, `source_locator`) in the given order.
pub fn write_cache(dir: &Path, docs: &[Document]) -> Result<(), IngestError> {
    let doc_dir = dir.join("docs");
    fs::create_dir_all(&doc_dir)?;
    let mut manifest = fs::File::create(dir.join(MANIFEST))?;
    for d in docs {
        fs::write(doc_dir.join(format!("{}.txt", d.doc_id)), &d.text)?;
        writeln!(manifest, "{}\t{}\t{}", d.doc_id, d.fetched_at, d.source_locator)?;
    }
    manifest.flush()?;
    Ok(())
}

/// Reads a cache written by [`write_cache`], in manifest order.
pub fn read_cache(dir: &Path) -> Result<Vec<Document>, IngestError> {
    let manifest = fs::read_to_string(dir.join(MANIFEST))?;
    let mut docs = Vec::new();
    for (i, line) in manifest.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| IngestError::Manifest {
            line: i + 1,
            message: message.to_string(),
        };
        let mut f = line.splitn(3, '\t');
        let (Some(id), Some(at), Some(locator)) = (f.next(), f.next(), f.next()) else {
            return Err(bad("expected three fields"));
        };
        let fetched_at = at.parse().map_err(|_| bad("bad timestamp"))?;
        let text = fs::read_to_string(dir.join("docs").join(format!("{id}.txt")))?;
        docs.push(Document {
            doc_id: id.to_string(),
            source_locator: locator.to_string(),
            text,
            fetched_at,
        });
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_ids_are_stable() {
        assert_eq!(doc_id("forum/a.txt"), doc_id("forum/a.txt"));
        assert_ne!(doc_id("forum/a.txt"), doc_id("forum/b.txt"));
        assert_eq!(doc_id("").len(), 16);
        // SHA-256("abc") starts with ba7816bf8f01cfea.
        assert_eq!(doc_id("abc"), "ba7816bf8f01cfea");
    }

    #[test]
    fn local_tree_sorted_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir_all(root.join("forum")).unwrap();
        fs::create_dir_all(root.join("blog/2020")).unwrap();
        fs::create_dir_all(root.join(".git")).unwrap();
        fs::write(root.join("forum/b.txt"), "b").unwrap();
        fs::write(root.join("forum/a.txt"), "a").unwrap();
        fs::write(root.join("blog/2020/x.txt"), "x").unwrap();
        fs::write(root.join(".git/config"), "hidden").unwrap();
        fs::write(root.join("top.txt"), [0x66, 0xff, 0x6f]).unwrap();
        let docs = read_local(root).unwrap();
        let locs: Vec<&str> = docs.iter().map(|d| d.source_locator.as_str()).collect();
        assert_eq!(locs, ["blog/2020/x.txt", "forum/a.txt", "forum/b.txt", "top.txt"]);
        assert_eq!(docs[3].text, "f\u{fffd}o");
        let counts = count_by_source(&docs);
        assert_eq!(counts.get("forum"), Some(&2));
        assert_eq!(counts.get("blog"), Some(&1));
        assert_eq!(counts.get("."), Some(&1));
        assert_eq!(read_local(root).unwrap(), docs);
    }

    #[test]
    fn empty_and_missing_roots() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_local(dir.path()).unwrap().is_empty());
        assert!(matches!(
            read_local(&dir.path().join("nope")),
            Err(IngestError::MissingRoot(_))
        ));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let docs = vec![
            Document::new("http://x.rs/1", "Prvi.\nDrugi red.".into(), 5),
            Document::new("http://x.rs/2", String::new(), 6),
        ];
        write_cache(dir.path(), &docs).unwrap();
        assert_eq!(read_cache(dir.path()).unwrap(), docs);
    }

    #[test]
    fn source_config_file() {
        let text = r#"
            [[site]]
            site_name = "a"
            allowed_domain = "a.rs"
            content_selector = "content"
            start_urls = ["https://a.rs/"]

            [[site]]
            site_name = "b"
            allowed_domain = "b.rs"
            content_selector = "main"
            start_urls = ["https://b.rs/"]
            max_pages = 5
            politeness_delay_ms = 0
        "#;
        let sites = parse_sources(text).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!((sites[0].max_pages, sites[0].politeness_delay_ms), (100, 1000));
        assert_eq!((sites[1].max_pages, sites[1].politeness_delay_ms), (5, 0));

        let bad = text.replace("max_pages = 5", "max_pages = 0");
        assert!(matches!(parse_sources(&bad), Err(IngestError::Config(_))));
        let bad = text.replace("allowed_domain = \"a.rs\"", "allowed_domain = \"\"");
        assert!(matches!(parse_sources(&bad), Err(IngestError::Config(_))));
    }
}
