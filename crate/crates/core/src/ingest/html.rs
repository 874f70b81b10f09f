//! A forgiving HTML scanner: enough to pull the text out of one element and
//! the links out of a page. Unclosed and stray tags are tolerated.

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
];

const RAW_TEXT: &[&str] = &["script", "style"];

/// Elements whose boundaries separate words.
const BLOCK: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "br",
    "dd",
    "div",
    "dl",
    "dt",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "td",
    "th",
    "tr",
    "ul",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Event<'a> {
    Text(&'a str),
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
}

impl Event<'_> {
    fn attr(&self, key: &str) -> Option<&str> {
        match self {
            Event::Start { attrs, .. } => attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()),
            _ => None,
        }
    }
}

/// Splits `html` into text runs and tags. Comments, doctypes and processing
/// instructions are dropped, as is the content of `script` and `style`.
pub(crate) fn scan(html: &str) -> Vec<Event<'_>> {
    let mut events = Vec::new();
    let bytes = html.as_bytes();
    let mut i = 0;
    let mut text_start = 0;
    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let rest = &html[i..];
        let next = bytes.get(i + 1).copied();
        let is_tag = matches!(next, Some(c) if c.is_ascii_alphabetic() || c == b'/' || c == b'!' || c == b'?');
        if !is_tag {
            i += 1;
            continue;
        }
        if text_start < i {
            events.push(Event::Text(&html[text_start..i]));
        }
        if let Some(comment) = rest.strip_prefix("<!--") {
            i = comment.find("-->").map_or(bytes.len(), |p| i + 4 + p + 3);
        } else if next == Some(b'!') || next == Some(b'?') {
            i = rest.find('>').map_or(bytes.len(), |p| i + p + 1);
        } else {
            let (inner, end) = match tag_end(rest) {
                Some(p) => (&html[i + 1..i + p], i + p + 1),
                None => (&html[i + 1..], bytes.len()),
            };
            let event = parse_tag(inner);
            i = end;
            if let Some(Event::Start {
                name,
                self_closing: false,
                ..
            }) = &event
            {
                if RAW_TEXT.contains(&name.as_str()) {
                    let close = format!("</{name}");
                    let lower = html[i..].to_ascii_lowercase();
                    i = match lower.find(&close) {
                        Some(p) => html[i + p..].find('>').map_or(bytes.len(), |q| i + p + q + 1),
                        None => bytes.len(),
                    };
                    text_start = i;
                    continue;
                }
            }
            if let Some(e) = event {
                events.push(e);
            }
        }
        text_start = i;
    }
    if text_start < bytes.len() {
        events.push(Event::Text(&html[text_start..]));
    }
    events
}

/// Position of the `>` closing a tag, skipping over quoted attribute values.
fn tag_end(s: &str) -> Option<usize> {
    let mut quote = None;
    for (p, c) in s.char_indices().skip(1) {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => quote = Some(c),
            (None, '>') => return Some(p),
            _ => {}
        }
    }
    None
}

fn parse_tag(inner: &str) -> Option<Event<'static>> {
    let (closing, body) = match inner.strip_prefix('/') {
        Some(b) => (true, b),
        None => (false, inner),
    };
    let name_len = body
        .find(|c: char| c.is_whitespace() || c == '/' || c == '>')
        .unwrap_or(body.len());
    let name = body[..name_len].to_ascii_lowercase();
    if name.is_empty() {
        return None;
    }
    if closing {
        return Some(Event::End { name });
    }
    let mut rest = body[name_len..].trim_end();
    let self_closing = rest.ends_with('/');
    if self_closing {
        rest = &rest[..rest.len() - 1];
    }
    Some(Event::Start {
        name,
        attrs: parse_attrs(rest),
        self_closing,
    })
}

fn parse_attrs(mut s: &str) -> Vec<(String, String)> {
    let mut attrs = Vec::new();
    loop {
        s = s.trim_start_matches(|c: char| c.is_whitespace() || c == '/');
        if s.is_empty() {
            return attrs;
        }
        let key_len = s
            .find(|c: char| c.is_whitespace() || c == '=' || c == '/')
            .unwrap_or(s.len());
        let key = s[..key_len].to_ascii_lowercase();
        s = s[key_len..].trim_start();
        let mut value = String::new();
        if let Some(after) = s.strip_prefix('=') {
            let after = after.trim_start();
            if let Some(q) = after.chars().next().filter(|c| *c == '"' || *c == '\'') {
                let body = &after[1..];
                let end = body.find(q).unwrap_or(body.len());
                value = decode_entities(&body[..end]);
                s = body.get(end + 1..).unwrap_or("");
            } else {
                let end = after.find(char::is_whitespace).unwrap_or(after.len());
                value = decode_entities(&after[..end]);
                s = &after[end..];
            }
        }
        if !key.is_empty() {
            attrs.push((key, value));
        }
    }
}

/// Decodes the named entities common in prose plus numeric references.
/// Unknown entities are left as written.
pub fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let semi = rest[1..].find(';').map(|p| p + 1).filter(|&p| p <= 10);
        let decoded = semi.and_then(|p| {
            let name = &rest[1..p];
            let c = match name {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                "ndash" => Some('–'),
                "mdash" => Some('—'),
                "hellip" => Some('…'),
                "laquo" => Some('«'),
                "raquo" => Some('»'),
                "bdquo" => Some('„'),
                "ldquo" => Some('“'),
                "rdquo" => Some('”'),
                "lsquo" => Some('‘'),
                "rsquo" => Some('’'),
                _ => {
                    let num = name.strip_prefix('#')?;
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                        None => num.parse().ok()?,
                    };
                    char::from_u32(code)
                }
            };
            c.map(|c| (c, p + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Collapses runs of spaces inside lines and drops blank lines.
fn tidy(raw: &str) -> String {
    raw.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Text of the first element whose `id` equals `selector`, with markup
/// stripped, scripts and styles dropped, and entities decoded. Block-level
/// boundaries become line breaks. Returns an empty string if no element has
/// the id.
pub fn extract_content(html: &str, selector: &str) -> String {
    let events = scan(html);
    let Some(start) = events.iter().position(|e| e.attr("id") == Some(selector)) else {
        return String::new();
    };
    let mut stack: Vec<&str> = Vec::new();
    let mut raw = String::new();
    for e in &events[start..] {
        match e {
            Event::Text(t) => raw.push_str(&decode_entities(t)),
            Event::Start { name, self_closing, .. } => {
                if BLOCK.contains(&name.as_str()) {
                    raw.push('\n');
                }
                if !*self_closing && !VOID.contains(&name.as_str()) {
                    stack.push(name);
                }
            }
            Event::End { name } => {
                if BLOCK.contains(&name.as_str()) {
                    raw.push('\n');
                }
                // Close up to the matching open tag; a stray end tag is ignored.
                if let Some(p) = stack.iter().rposition(|n| n == name) {
                    stack.truncate(p);
                }
            }
        }
        if stack.is_empty() {
            break;
        }
    }
    tidy(&raw)
}

/// `href` values of anchor elements, in document order.
pub fn links(html: &str) -> Vec<String> {
    scan(html)
        .iter()
        .filter(|e| matches!(e, Event::Start { name, .. } if name == "a"))
        .filter_map(|e| e.attr("href"))
        .map(|h| h.trim().to_string())
        .filter(|h| !h.is_empty())
        .collect()
}
