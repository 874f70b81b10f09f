//! Breadth-first, same-domain crawler.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::time::Duration;

use url::Url;

use super::html::{extract_content, links};
use super::{now_millis, Document, IngestError, SourceConfig};

/// Identifies the crawler in requests and in robots.txt groups.
pub const USER_AGENT: &str = "simile-miner";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    /// `Location` header, for redirects.
    pub location: Option<String>,
    pub body: String,
}

/// Performs a single GET without following redirects.
pub trait Fetcher {
    fn get(&mut self, url: &Url) -> Result<Response, String>;
}

/// Blocking HTTP client.
pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .max_redirects(0)
            .user_agent(USER_AGENT)
            .build()
            .into();
        HttpFetcher { agent }
    }
}

impl Default for HttpFetcher {
    fn default() -> Self {
        HttpFetcher::new(Duration::from_secs(20))
    }
}

impl Fetcher for HttpFetcher {
    fn get(&mut self, url: &Url) -> Result<Response, String> {
        let mut resp = self.agent.get(url.as_str()).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let location = resp
            .headers()
            .get("location")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(16 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| e.to_string())?;
        Ok(Response {
            status,
            location,
            body: String::from_utf8_lossy(&bytes).into_owned(),
        })
    }
}

type Rules = Vec<(bool, String)>;

/// Allow/disallow prefixes for one user agent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RobotsRules {
    rules: Rules,
}

impl RobotsRules {
    /// Picks the group naming `agent` (case-insensitive substring), falling
    /// back to `*`.
    pub fn parse(text: &str, agent: &str) -> Self {
        let agent = agent.to_ascii_lowercase();
        // (agents, rules) per group, in file order.
        let mut groups: Vec<(Vec<String>, Rules)> = Vec::new();
        let mut in_agents = false;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            match key.as_str() {
                "user-agent" => {
                    if !in_agents {
                        groups.push((Vec::new(), Vec::new()));
                    }
                    in_agents = true;
                    groups
                        .last_mut()
                        .expect("group exists")
                        .0
                        .push(value.to_ascii_lowercase());
                }
                "allow" | "disallow" => {
                    in_agents = false;
                    if let Some(g) = groups.last_mut() {
                        if !value.is_empty() {
                            g.1.push((key == "allow", value));
                        }
                    }
                }
                _ => {}
            }
        }
        let named = groups
            .iter()
            .find(|(agents, _)| agents.iter().any(|a| a != "*" && agent.contains(a.as_str())));
        let chosen = named.or_else(|| groups.iter().find(|(agents, _)| agents.iter().any(|a| a == "*")));
        RobotsRules {
            rules: chosen.map(|g| g.1.clone()).unwrap_or_default(),
        }
    }

    /// Longest matching prefix wins; `Allow` wins ties; no match allows.
    pub fn allows(&self, path: &str) -> bool {
        self.rules
            .iter()
            .filter(|(_, prefix)| path.starts_with(prefix.as_str()))
            .max_by_key(|(allow, prefix)| (prefix.len(), *allow))
            .is_none_or(|(allow, _)| *allow)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrawlOutcome {
    pub documents: Vec<Document>,
    /// Every URL requested, robots.txt included, in request order.
    pub requested: Vec<Url>,
    /// Links seen but not followed because they leave the domain.
    pub off_domain: usize,
    pub robots_blocked: usize,
    pub failures: usize,
}

fn in_domain(url: &Url, domain: &str) -> bool {
    let Some(host) = url.host_str() else {
        return false;
    };
    let host = host.to_ascii_lowercase();
    let domain = domain.to_ascii_lowercase();
    matches!(url.scheme(), "http" | "https") && (host == domain || host.ends_with(&format!(".{domain}")))
}

fn canonical(mut url: Url) -> Url {
    url.set_fragment(None);
    url
}

/// Crawls one site. Documents are produced in visiting order; each counts
/// against `max_pages` whether or not the content element was present.
pub fn crawl<F: Fetcher>(config: &SourceConfig, fetcher: &mut F) -> Result<CrawlOutcome, IngestError> {
    config.validate()?;
    let mut out = CrawlOutcome::default();
    let mut queue: VecDeque<Url> = VecDeque::new();
    let mut seen: HashSet<Url> = HashSet::new();
    let mut robots: BTreeMap<String, RobotsRules> = BTreeMap::new();
    let delay = Duration::from_millis(config.politeness_delay_ms);
    let mut first_request = true;

    let pause = |first: &mut bool| {
        if !*first && !delay.is_zero() {
            std::thread::sleep(delay);
        }
        *first = false;
    };

    for s in &config.start_urls {
        let url = Url::parse(s).map_err(|e| IngestError::Config(format!("bad start URL {s:?}: {e}")))?;
        if !in_domain(&url, &config.allowed_domain) {
            log::warn!("start URL {url} is outside {}; skipped", config.allowed_domain);
            out.off_domain += 1;
            continue;
        }
        let url = canonical(url);
        if seen.insert(url.clone()) {
            queue.push_back(url);
        }
    }

    while let Some(url) = queue.pop_front() {
        if out.documents.len() >= config.max_pages {
            break;
        }
        let origin = url.origin().ascii_serialization();
        if !robots.contains_key(&origin) {
            let robots_url = url.join("/robots.txt").expect("absolute URL");
            pause(&mut first_request);
            out.requested.push(robots_url.clone());
            let rules = match fetcher.get(&robots_url) {
                Ok(r) if r.status == 200 => RobotsRules::parse(&r.body, USER_AGENT),
                Ok(_) => RobotsRules::default(),
                Err(e) => {
                    log::warn!("{robots_url}: {e}");
                    RobotsRules::default()
                }
            };
            robots.insert(origin.clone(), rules);
        }
        if !robots[&origin].allows(url.path()) {
            log::info!("{url}: disallowed by robots.txt");
            out.robots_blocked += 1;
            continue;
        }

        pause(&mut first_request);
        out.requested.push(url.clone());
        let resp = match fetcher.get(&url) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{url}: {e}");
                out.failures += 1;
                continue;
            }
        };
        let mut next = Vec::new();
        match resp.status {
            200 => {
                out.documents.push(Document::new(
                    url.as_str(),
                    extract_content(&resp.body, &config.content_selector),
                    now_millis(),
                ));
                next.extend(links(&resp.body));
            }
            300..=399 => next.extend(resp.location),
            s => {
                log::warn!("{url}: HTTP {s}");
                out.failures += 1;
            }
        }
        for href in next {
            let Ok(target) = url.join(&href) else {
                continue;
            };
            if !matches!(target.scheme(), "http" | "https") {
                continue;
            }
            if !in_domain(&target, &config.allowed_domain) {
                out.off_domain += 1;
                continue;
            }
            let target = canonical(target);
            if seen.insert(target.clone()) {
                queue.push_back(target);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// In-memory site: path → (status, location, body).
    struct FakeSite {
        pages: HashMap<String, Response>,
        log: Vec<String>,
    }

    impl FakeSite {
        fn new(pages: &[(&str, &str)]) -> Self {
            FakeSite {
                pages: pages
                    .iter()
                    .map(|(u, body)| {
                        (
                            u.to_string(),
                            Response {
                                status: 200,
                                location: None,
                                body: body.to_string(),
                            },
                        )
                    })
                    .collect(),
                log: Vec::new(),
            }
        }
    }

    impl Fetcher for FakeSite {
        fn get(&mut self, url: &Url) -> Result<Response, String> {
            self.log.push(url.to_string());
            Ok(self.pages.get(url.as_str()).cloned().unwrap_or(Response {
                status: 404,
                location: None,
                body: String::new(),
            }))
        }
    }

    fn config(max_pages: usize) -> SourceConfig {
        SourceConfig {
            site_name: "t".into(),
            allowed_domain: "example.rs".into(),
            content_selector: "c".into(),
            start_urls: vec!["http://example.rs/".into()],
            max_pages,
            politeness_delay_ms: 0,
        }
    }

    fn site() -> FakeSite {
        FakeSite::new(&[
            (
                "http://example.rs/",
                r#"<div id="c">Početak.</div><a href="/a">a</a><a href="http://drugi.rs/x">off</a><a href="b#frag">b</a>"#,
            ),
            (
                "http://example.rs/a",
                r#"<div id="c">A.</div><a href="/">home</a><a href="/b">b</a>"#,
            ),
            (
                "http://example.rs/b",
                r#"<div id="c">B.</div><a href="mailto:x@y">m</a><a href="https://www.example.rs/c">c</a>"#,
            ),
            ("https://www.example.rs/c", r#"<div id="c">C.</div>"#),
        ])
    }

    #[test]
    fn bfs_within_domain() {
        let mut s = site();
        let out = crawl(&config(10), &mut s).unwrap();
        let texts: Vec<&str> = out.documents.iter().map(|d| d.text.as_str()).collect();
        assert_eq!(texts, ["Početak.", "A.", "B.", "C."]);
        assert_eq!(out.off_domain, 1);
        assert!(s.log.iter().all(|u| u.contains("example.rs")));
        assert_eq!(s.log.iter().filter(|u| u.ends_with("/b")).count(), 1);
    }

    #[test]
    fn max_pages_cap() {
        let out = crawl(&config(2), &mut site()).unwrap();
        assert_eq!(out.documents.len(), 2);
    }

    #[test]
    fn robots_rules() {
        let text = "User-agent: other\nDisallow: /\n\nUser-agent: *\nDisallow: /private\nAllow: /private/ok\n";
        let r = RobotsRules::parse(text, USER_AGENT);
        assert!(r.allows("/"));
        assert!(!r.allows("/private/x"));
        assert!(r.allows("/private/ok/1"));
        let r = RobotsRules::parse(
            "User-agent: simile-miner\nDisallow: /\nUser-agent: *\nDisallow:\n",
            USER_AGENT,
        );
        assert!(!r.allows("/a"));
        assert!(RobotsRules::parse("", USER_AGENT).allows("/anything"));
    }

    #[test]
    fn robots_disallowed_pages_are_skipped() {
        let mut s = site();
        s.pages.insert(
            "http://example.rs/robots.txt".into(),
            Response {
                status: 200,
                location: None,
                body: "User-agent: *\nDisallow: /a\n".into(),
            },
        );
        let out = crawl(&config(10), &mut s).unwrap();
        assert_eq!(out.robots_blocked, 1);
        assert!(!s.log.contains(&"http://example.rs/a".to_string()));
    }

    #[test]
    fn redirects_off_domain_are_not_followed() {
        let mut s = site();
        s.pages.insert(
            "http://example.rs/".into(),
            Response {
                status: 301,
                location: Some("http://drugi.rs/".into()),
                body: String::new(),
            },
        );
        let out = crawl(&config(10), &mut s).unwrap();
        assert!(out.documents.is_empty());
        assert!(s.log.iter().all(|u| u.contains("example.rs")));
    }
}
