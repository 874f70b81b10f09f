//! Crawls a real HTTP server bound to 127.0.0.1. The same server also
//! answers as `localhost`, so any request that escapes the allowed domain
//! shows up in the request log with that Host header.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use simile_core::ingest::{crawl, HttpFetcher, SourceConfig};

type Log = Arc<Mutex<Vec<(String, String)>>>;

fn page(port: u16, path: &str) -> (u16, Vec<(&'static str, String)>, String) {
    let off = format!("http://localhost:{port}");
    let html = |text: &str, hrefs: &[String]| {
        let anchors: String = hrefs.iter().map(|h| format!(r#"<a href="{h}">x</a>"#)).collect();
        format!(r#"<html><body><div id="menu">{anchors}</div><div id="content"><p>{text}</p></div></body></html>"#)
    };
    match path {
        "/robots.txt" => (200, vec![], "User-agent: *\nDisallow: /private\n".into()),
        "/" => (
            200,
            vec![],
            html(
                "Radi kao konj.",
                &["/a".into(), "/b#odeljak".into(), format!("{off}/spolja")],
            ),
        ),
        "/a" => (
            200,
            vec![],
            html("Lep kao cvet.", &["/".into(), "/b".into(), "/private/tajna".into()]),
        ),
        "/b" => (
            200,
            vec![],
            html("Beo kao sneg.", &["/a".into(), "/preusmeri".into(), "/van".into()]),
        ),
        "/preusmeri" => (301, vec![("Location", "/c".into())], String::new()),
        "/van" => (302, vec![("Location", format!("{off}/preko"))], String::new()),
        "/c" => (
            200,
            vec![],
            html("Gladan kao vuk.", &["mailto:a@b.rs".into(), "/a".into()]),
        ),
        p if p.starts_with("/lanac/") => {
            let n: u64 = p["/lanac/".len()..].parse().unwrap_or(0);
            (
                200,
                vec![],
                html(&format!("Strana {n}."), &[format!("/lanac/{}", n + 1)]),
            )
        }
        _ => (404, vec![], "nema".into()),
    }
}

fn serve() -> (u16, Log) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let log: Log = Arc::default();
    let log2 = Arc::clone(&log);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            stream.set_read_timeout(Some(Duration::from_secs(5))).ok();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).is_err() {
                continue;
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let mut host = String::new();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("host") {
                        host = v.trim().to_string();
                    }
                }
            }
            log2.lock().unwrap().push((host, path.clone()));
            let (status, headers, body) = page(port, &path);
            let mut resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: text/html; charset=utf-8\r\nContent-Length: {}\r\nConnection: close\r\n",
                body.len()
            );
            for (k, v) in headers {
                resp.push_str(&format!("{k}: {v}\r\n"));
            }
            resp.push_str("\r\n");
            resp.push_str(&body);
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    (port, log)
}

fn config(port: u16, start: &str, max_pages: usize) -> SourceConfig {
    SourceConfig {
        site_name: "lokal".into(),
        allowed_domain: "127.0.0.1".into(),
        content_selector: "content".into(),
        start_urls: vec![format!("http://127.0.0.1:{port}{start}")],
        max_pages,
        politeness_delay_ms: 0,
    }
}

#[test]
fn crawl_stays_on_domain_and_terminates() {
    let (port, log) = serve();
    let out = crawl(&config(port, "/", 50), &mut HttpFetcher::new(Duration::from_secs(5))).unwrap();

    let log = log.lock().unwrap().clone();
    let expected_host = format!("127.0.0.1:{port}");
    assert!(log.iter().all(|(h, _)| *h == expected_host), "{log:?}");
    let paths: Vec<&str> = log.iter().map(|(_, p)| p.as_str()).collect();
    assert_eq!(paths, ["/robots.txt", "/", "/a", "/b", "/preusmeri", "/van", "/c"]);

    let texts: Vec<&str> = out.documents.iter().map(|d| d.text.as_str()).collect();
    assert_eq!(
        texts,
        ["Radi kao konj.", "Lep kao cvet.", "Beo kao sneg.", "Gladan kao vuk."]
    );
    assert_eq!(out.robots_blocked, 1);
    assert_eq!(out.off_domain, 2);
    assert_eq!(out.requested.len(), log.len());
}

#[test]
fn max_pages_bounds_an_endless_site() {
    let (port, log) = serve();
    let out = crawl(
        &config(port, "/lanac/0", 7),
        &mut HttpFetcher::new(Duration::from_secs(5)),
    )
    .unwrap();
    assert_eq!(out.documents.len(), 7);
    assert_eq!(out.documents[6].text, "Strana 6.");
    let pages = log
        .lock()
        .unwrap()
        .iter()
        .filter(|(_, p)| p.starts_with("/lanac/"))
        .count();
    assert_eq!(pages, 7);
}
