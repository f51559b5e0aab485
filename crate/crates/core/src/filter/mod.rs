//! Adblock-Plus filter subset: parsing, URL matching and document labeling.
//!
//! Supported: `!` comments, `||` / `|` anchors, `*`, `^`, `@@` exceptions and
//! the options `third-party`, `~third-party`, `script`, `image`,
//! `subdocument`, `xmlhttprequest`, `domain=`. Lines using anything else
//! (cosmetic filters, regex rules, other options) are skipped whole and
//! counted in the skip report.

mod label;
mod pattern;

pub use label::{
    label_document, label_graph, read_labels, write_labels, Label, LabelClass, LabelSource, LabeledDocument, Overrides,
};
pub use pattern::{Anchor, Pattern, PreparedUrl};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{registrable_domain, InteractionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Comment,
    Header,
    ElementHiding,
    Regex,
    UnsupportedOption,
    EmptyPattern,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::Comment => "comment",
            SkipReason::Header => "header",
            SkipReason::ElementHiding => "element-hiding",
            SkipReason::Regex => "regex",
            SkipReason::UnsupportedOption => "unsupported-option",
            SkipReason::EmptyPattern => "empty-pattern",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleOptions {
    /// `Some(true)` for `third-party`, `Some(false)` for `~third-party`.
    pub third_party: Option<bool>,
    /// Request kinds the rule is restricted to; empty means all.
    pub kinds: Vec<InteractionKind>,
    pub include_domains: Vec<String>,
    pub exclude_domains: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub raw: String,
    pub pattern: Pattern,
    pub is_exception: bool,
    pub options: RuleOptions,
}

/// Page context a request is evaluated in.
#[derive(Debug, Clone, Copy)]
pub struct MatchContext<'a> {
    /// Registrable domain of the first-party page.
    pub page_domain: &'a str,
    pub kind: InteractionKind,
}

/// A request URL prepared once for matching against many rules and contexts.
#[derive(Debug, Clone)]
pub struct Request {
    prepared: PreparedUrl,
    domain: String,
}

impl Request {
    pub fn parse(url: &str) -> Option<Self> {
        let parsed = url::Url::parse(url).ok()?;
        let host = parsed.host_str()?.to_ascii_lowercase();
        Some(Request {
            prepared: PreparedUrl::new(&parsed),
            domain: registrable_domain(&host).ok()?,
        })
    }
}

fn domain_listed(page: &str, entry: &str) -> bool {
    page == entry
        || (page.len() > entry.len() && page.ends_with(entry) && page.as_bytes()[page.len() - entry.len() - 1] == b'.')
}

impl Rule {
    pub fn parse(line: &str) -> Result<Rule, SkipReason> {
        let raw = line.trim();
        if raw.starts_with('!') {
            return Err(SkipReason::Comment);
        }
        if raw.starts_with('[') {
            return Err(SkipReason::Header);
        }
        if ["##", "#@#", "#?#", "#$#", "#%#"].iter().any(|m| raw.contains(m)) {
            return Err(SkipReason::ElementHiding);
        }
        let (is_exception, body) = match raw.strip_prefix("@@") {
            Some(rest) => (true, rest),
            None => (false, raw),
        };
        let (pattern_text, options) = match body.rfind('$') {
            Some(i) => (&body[..i], parse_options(&body[i + 1..])?),
            None => (body, RuleOptions::default()),
        };
        if pattern_text.len() >= 2 && pattern_text.starts_with('/') && pattern_text.ends_with('/') {
            return Err(SkipReason::Regex);
        }
        let trimmed = pattern_text.trim_start_matches('|').trim_end_matches('|');
        if trimmed.trim_matches('*').is_empty() && options == RuleOptions::default() {
            return Err(SkipReason::EmptyPattern);
        }
        Ok(Rule {
            raw: raw.to_string(),
            pattern: Pattern::parse(pattern_text),
            is_exception,
            options,
        })
    }

    fn options_allow(&self, request: &Request, ctx: &MatchContext<'_>) -> bool {
        let o = &self.options;
        if let Some(want) = o.third_party {
            if (request.domain != ctx.page_domain) != want {
                return false;
            }
        }
        if !o.kinds.is_empty() && !o.kinds.contains(&ctx.kind) {
            return false;
        }
        if !o.include_domains.is_empty() && !o.include_domains.iter().any(|d| domain_listed(ctx.page_domain, d)) {
            return false;
        }
        !o.exclude_domains.iter().any(|d| domain_listed(ctx.page_domain, d))
    }

    pub fn matches(&self, request: &Request, ctx: &MatchContext<'_>) -> bool {
        self.options_allow(request, ctx) && self.pattern.matches(&request.prepared)
    }
}

fn parse_options(text: &str) -> Result<RuleOptions, SkipReason> {
    let mut o = RuleOptions::default();
    for opt in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let opt = opt.to_ascii_lowercase();
        match opt.as_str() {
            "third-party" => o.third_party = Some(true),
            "~third-party" => o.third_party = Some(false),
            "script" => o.kinds.push(InteractionKind::Script),
            "image" => o.kinds.push(InteractionKind::Media),
            "subdocument" => o.kinds.push(InteractionKind::Iframe),
            "xmlhttprequest" => o.kinds.push(InteractionKind::Other),
            _ => match opt.strip_prefix("domain=") {
                Some(list) => {
                    for d in list.split('|').filter(|d| !d.is_empty()) {
                        match d.strip_prefix('~') {
                            Some(ex) => o.exclude_domains.push(ex.to_string()),
                            None => o.include_domains.push(d.to_string()),
                        }
                    }
                }
                None => return Err(SkipReason::UnsupportedOption),
            },
        }
    }
    Ok(o)
}

/// One rule class (block or exception) with a hostname index for
/// `||host^`-style rules.
#[derive(Debug, Clone, Default)]
struct RuleBucket {
    rules: Vec<Rule>,
    by_host: HashMap<String, Vec<usize>>,
    generic: Vec<usize>,
}

impl RuleBucket {
    fn push(&mut self, rule: Rule) {
        let i = self.rules.len();
        match rule.pattern.host_key() {
            Some(host) => self.by_host.entry(host).or_default().push(i),
            None => self.generic.push(i),
        }
        self.rules.push(rule);
    }

    fn any_match(&self, request: &Request, ctx: &MatchContext<'_>) -> bool {
        let indexed = request
            .prepared
            .host_suffixes()
            .filter_map(|h| self.by_host.get(h))
            .flatten();
        indexed
            .chain(&self.generic)
            .any(|&i| self.rules[i].matches(request, ctx))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    blocks: RuleBucket,
    exceptions: RuleBucket,
    pub skip_report: BTreeMap<SkipReason, usize>,
}

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses rule text, one rule per line. Never fails: anything unsupported
    /// lands in the skip report.
    pub fn parse(text: &str) -> Self {
        let mut set = RuleSet::new();
        set.extend_from_text(text);
        set
    }

    /// Reads and concatenates rule files in order.
    pub fn read_files<P: AsRef<std::path::Path>>(paths: &[P]) -> crate::Result<Self> {
        let mut set = RuleSet::new();
        for p in paths {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|e| crate::Error::io(p, e))?;
            set.extend_from_text(&text);
        }
        Ok(set)
    }

    pub fn extend_from_text(&mut self, text: &str) {
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            match Rule::parse(line) {
                Ok(rule) => self.push(rule),
                Err(reason) => *self.skip_report.entry(reason).or_insert(0) += 1,
            }
        }
    }

    pub fn push(&mut self, rule: Rule) {
        if rule.is_exception {
            self.exceptions.push(rule);
        } else {
            self.blocks.push(rule);
        }
    }

    pub fn block_rules(&self) -> &[Rule] {
        &self.blocks.rules
    }

    pub fn exception_rules(&self) -> &[Rule] {
        &self.exceptions.rules
    }

    pub fn skipped(&self) -> usize {
        self.skip_report.values().sum()
    }

    /// Blocked when some block rule matches and no exception rule does.
    pub fn matches_request(&self, request: &Request, ctx: &MatchContext<'_>) -> bool {
        self.blocks.any_match(request, ctx) && !self.exceptions.any_match(request, ctx)
    }

    /// Whether any block rule matches, ignoring exceptions.
    pub fn block_rule_matches(&self, request: &Request, ctx: &MatchContext<'_>) -> bool {
        self.blocks.any_match(request, ctx)
    }

    pub fn matches(&self, url: &str, ctx: &MatchContext<'_>) -> bool {
        Request::parse(url).is_some_and(|r| self.matches_request(&r, ctx))
    }
}
