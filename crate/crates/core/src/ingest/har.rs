//! HAR 1.2 parsing and initiator resolution.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use url::Url;

use super::kind::{classify_interaction, InteractionKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitiatorType {
    Script,
    Parser,
    Other,
    Unknown,
}

impl InitiatorType {
    fn from_har(raw: Option<&str>) -> Self {
        match raw {
            Some("script") => InitiatorType::Script,
            Some("parser") => InitiatorType::Parser,
            Some("other") => InitiatorType::Other,
            _ => InitiatorType::Unknown,
        }
    }
}

/// One request from a capture, with its initiator already resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEntry {
    pub url: String,
    pub host: String,
    pub initiator_url: Option<String>,
    pub initiator_type: InitiatorType,
    pub resource_type: Option<String>,
    pub mime: Option<String>,
    pub started_at: Option<String>,
}

impl RequestEntry {
    pub fn kind(&self) -> InteractionKind {
        classify_interaction(self.resource_type.as_deref(), self.mime.as_deref())
    }
}

/// Entries dropped while parsing, by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub invalid_url: usize,
    /// data:, blob:, about: and other host-less URLs.
    pub no_host: usize,
}

impl SkipReport {
    pub fn total(&self) -> usize {
        self.invalid_url + self.no_host
    }

    pub fn absorb(&mut self, other: &SkipReport) {
        self.invalid_url += other.invalid_url;
        self.no_host += other.no_host;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub site_url: String,
    pub entries: Vec<RequestEntry>,
    pub skipped: SkipReport,
}

#[derive(Deserialize)]
struct HarDocument {
    log: HarLog,
}

#[derive(Deserialize)]
struct HarLog {
    #[serde(default)]
    pages: Vec<HarPage>,
    entries: Vec<HarEntry>,
}

#[derive(Deserialize)]
struct HarPage {
    #[serde(default)]
    title: Option<String>,
}

#[derive(Deserialize)]
struct HarEntry {
    #[serde(rename = "startedDateTime", default)]
    started: Option<String>,
    request: HarRequest,
    #[serde(default)]
    response: Option<HarResponse>,
    #[serde(rename = "_resourceType", default)]
    resource_type: Option<String>,
    #[serde(rename = "_initiator", default)]
    initiator: Option<HarInitiator>,
}

#[derive(Deserialize)]
struct HarRequest {
    url: String,
}

#[derive(Deserialize)]
struct HarResponse {
    #[serde(default)]
    content: Option<HarContent>,
    #[serde(rename = "redirectURL", default)]
    redirect_url: Option<String>,
}

#[derive(Deserialize)]
struct HarContent {
    #[serde(rename = "mimeType", default)]
    mime_type: Option<String>,
}

#[derive(Deserialize)]
struct HarInitiator {
    #[serde(rename = "type", default)]
    kind: Option<String>,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    stack: Option<HarStack>,
}

#[derive(Deserialize)]
struct HarStack {
    #[serde(rename = "callFrames", default)]
    call_frames: Vec<HarCallFrame>,
    #[serde(default)]
    parent: Option<Box<HarStack>>,
}

#[derive(Deserialize)]
struct HarCallFrame {
    #[serde(default)]
    url: String,
}

impl HarStack {
    /// The innermost frame that names a script, walking into async parents.
    fn top_url(&self) -> Option<&str> {
        let mut stack = Some(self);
        while let Some(s) = stack {
            if let Some(frame) = s.call_frames.iter().find(|f| !f.url.is_empty()) {
                return Some(&frame.url);
            }
            stack = s.parent.as_deref();
        }
        None
    }
}

enum Normalized {
    Ok(Url),
    Invalid,
    NoHost,
}

fn normalize(raw: &str) -> Normalized {
    match Url::parse(raw.trim()) {
        Ok(mut url) => match url.host_str() {
            Some(h) if !h.is_empty() => {
                url.set_fragment(None);
                Normalized::Ok(url)
            }
            _ => Normalized::NoHost,
        },
        Err(_) => Normalized::Invalid,
    }
}

fn normalize_str(raw: &str) -> Option<String> {
    match normalize(raw) {
        Normalized::Ok(u) => Some(u.to_string()),
        _ => None,
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in bytes.split(|b| *b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}

/// Parses a HAR document into a [`SessionRecord`].
///
/// Initiators resolve in priority order: a redirect source, the initiator's
/// own `url`, the top frame of its call stack, the page document for
/// parser-initiated requests. Anything else stays unknown and is attached to
/// the site root when the tree is built.
pub fn parse_har(bytes: &[u8]) -> Result<SessionRecord> {
    let doc: HarDocument = serde_json::from_slice(bytes).map_err(|e| Error::HarParse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let log = doc.log;

    let page_url = log
        .pages
        .first()
        .and_then(|p| p.title.as_deref())
        .and_then(normalize_str);

    let mut skipped = SkipReport::default();
    let mut parsed = Vec::with_capacity(log.entries.len());
    for entry in &log.entries {
        match normalize(&entry.request.url) {
            Normalized::Ok(url) => parsed.push((url, entry)),
            Normalized::Invalid => skipped.invalid_url += 1,
            Normalized::NoHost => skipped.no_host += 1,
        }
    }
    if parsed.is_empty() {
        return Err(Error::EmptySession);
    }

    let site_url = page_url.unwrap_or_else(|| {
        parsed
            .iter()
            .find(|(_, e)| e.resource_type.as_deref() == Some("document"))
            .unwrap_or(&parsed[0])
            .0
            .to_string()
    });

    // redirect target -> URL that redirected to it
    let mut redirected_from: HashMap<String, String> = HashMap::new();
    let mut entries = Vec::with_capacity(parsed.len());
    for (url, entry) in parsed {
        let url_string = url.to_string();
        let initiator = entry.initiator.as_ref();
        let initiator_type = InitiatorType::from_har(initiator.and_then(|i| i.kind.as_deref()));

        let initiator_url = redirected_from
            .get(&url_string)
            .cloned()
            .or_else(|| initiator.and_then(|i| i.url.as_deref()).and_then(normalize_str))
            .or_else(|| {
                initiator
                    .and_then(|i| i.stack.as_ref())
                    .and_then(HarStack::top_url)
                    .and_then(normalize_str)
            })
            .or_else(|| (initiator_type == InitiatorType::Parser).then(|| site_url.clone()));

        let response = entry.response.as_ref();
        if let Some(target) = response
            .and_then(|r| r.redirect_url.as_deref())
            .filter(|t| !t.is_empty())
            .and_then(|t| url.join(t).ok())
        {
            let mut target = target;
            target.set_fragment(None);
            redirected_from.insert(target.to_string(), url_string.clone());
        }

        entries.push(RequestEntry {
            host: url.host_str().unwrap_or_default().to_ascii_lowercase(),
            url: url_string,
            initiator_url,
            initiator_type,
            resource_type: entry.resource_type.clone().filter(|r| !r.is_empty()),
            mime: response
                .and_then(|r| r.content.as_ref())
                .and_then(|c| c.mime_type.clone())
                .filter(|m| !m.is_empty()),
            started_at: entry.started.clone(),
        });
    }

    Ok(SessionRecord {
        site_url,
        entries,
        skipped,
    })
}
