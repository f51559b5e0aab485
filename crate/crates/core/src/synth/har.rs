//! HAR rendering of synthetic sessions.

use serde_json::{json, Value};

use super::{InitiatorEncoding, Parent, SyntheticRequest, SyntheticSession};

fn timestamp(offset_ms: usize) -> String {
    let (s, ms) = (offset_ms / 1000, offset_ms % 1000);
    format!("2024-03-01T10:{:02}:{:02}.{ms:03}Z", (s / 60) % 60, s % 60)
}

fn initiator(session: &SyntheticSession, request: &SyntheticRequest) -> Value {
    let url = request.initiator_url.as_deref().unwrap_or(&session.page_url);
    match request.encoding {
        InitiatorEncoding::ParserUrl => json!({ "type": "parser", "url": url }),
        InitiatorEncoding::ParserBare => json!({ "type": "parser" }),
        InitiatorEncoding::OtherBare => json!({ "type": "other" }),
        InitiatorEncoding::StackTop => json!({
            "type": "script",
            "stack": { "callFrames": [
                { "functionName": "load", "url": url, "lineNumber": 3, "columnNumber": 17 },
                { "functionName": "", "url": session.page_url, "lineNumber": 0, "columnNumber": 0 }
            ] }
        }),
        InitiatorEncoding::StackParent => json!({
            "type": "script",
            "stack": {
                "callFrames": [{ "functionName": "", "url": "", "lineNumber": 0, "columnNumber": 0 }],
                "parent": {
                    "description": "setTimeout",
                    "callFrames": [{ "functionName": "fire", "url": url, "lineNumber": 12, "columnNumber": 4 }]
                }
            }
        }),
        InitiatorEncoding::ScriptUrl => json!({ "type": "script", "url": url }),
        // The redirect wins; the stale parser URL must be ignored.
        InitiatorEncoding::Redirect => json!({ "type": "parser", "url": session.page_url }),
    }
}

fn entry(
    started: String,
    url: &str,
    resource_type: Option<&str>,
    mime: &str,
    redirect: Option<&str>,
    init: Value,
) -> Value {
    let mut e = json!({
        "startedDateTime": started,
        "pageref": "page_1",
        "time": 12.5,
        "request": { "method": "GET", "url": url, "httpVersion": "h2", "headers": [], "queryString": [], "cookies": [], "headersSize": -1, "bodySize": 0 },
        "response": {
            "status": if redirect.is_some() { 302 } else { 200 },
            "statusText": "",
            "httpVersion": "h2",
            "headers": [],
            "cookies": [],
            "content": { "size": 0, "mimeType": mime },
            "redirectURL": redirect.unwrap_or(""),
            "headersSize": -1,
            "bodySize": 0
        },
        "cache": {},
        "timings": { "send": 0, "wait": 10, "receive": 2.5 },
        "_initiator": init
    });
    if let Some(rt) = resource_type {
        e["_resourceType"] = json!(rt);
    }
    e
}

pub(super) fn render(session: &SyntheticSession) -> Vec<u8> {
    let mut redirect_to: Vec<Option<&str>> = vec![None; session.requests.len()];
    for r in &session.requests {
        if let (InitiatorEncoding::Redirect, Parent::Request(p)) = (r.encoding, r.parent) {
            redirect_to[p] = Some(&r.url);
        }
    }
    let mut entries = vec![entry(
        timestamp(0),
        &session.page_url,
        Some("document"),
        "text/html",
        None,
        json!({ "type": "other" }),
    )];
    for (i, r) in session.requests.iter().enumerate() {
        entries.push(entry(
            timestamp(40 + 7 * i),
            &r.url,
            r.resource_type,
            r.mime,
            redirect_to[i],
            initiator(session, r),
        ));
    }
    let har = json!({
        "log": {
            "version": "1.2",
            "creator": { "name": "widegraph-synth", "version": env!("CARGO_PKG_VERSION") },
            "pages": [{
                "id": "page_1",
                "startedDateTime": timestamp(0),
                "title": session.page_url,
                "pageTimings": {}
            }],
            "entries": entries
        }
    });
    let mut out = serde_json::to_vec_pretty(&har).expect("json values serialize");
    out.push(b'\n');
    out
}
