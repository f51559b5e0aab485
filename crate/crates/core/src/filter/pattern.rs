//! Adblock-Plus URL pattern compilation and matching.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    None,
    /// `|` at the start: match from the first character of the URL.
    Start,
    /// `||`: match from the start of the host or any later label.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Literal(Vec<u8>),
    Wildcard,
    /// `^`: one separator character, or the end of the URL.
    Separator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    anchor: Anchor,
    end_anchor: bool,
    tokens: Vec<Token>,
}

/// A URL prepared for matching: lowercased, with host bounds.
#[derive(Debug, Clone)]
pub struct PreparedUrl {
    pub(crate) text: Vec<u8>,
    pub(crate) host_start: usize,
    pub(crate) host_end: usize,
}

impl PreparedUrl {
    pub fn new(url: &url::Url) -> Self {
        let s = url.as_str().to_ascii_lowercase();
        PreparedUrl {
            text: s.into_bytes(),
            host_start: url[..url::Position::BeforeHost].len(),
            host_end: url[..url::Position::AfterHost].len(),
        }
    }

    pub fn host(&self) -> &str {
        std::str::from_utf8(&self.text[self.host_start..self.host_end]).unwrap_or("")
    }

    /// Host suffixes that start on a label boundary, longest first.
    pub fn host_suffixes(&self) -> impl Iterator<Item = &str> + '_ {
        let host = self.host();
        std::iter::once(host).chain(
            host.char_indices()
                .filter(|(_, c)| *c == '.')
                .map(move |(i, _)| &host[i + 1..])
                .filter(|s| !s.is_empty()),
        )
    }
}

fn is_separator(b: u8) -> bool {
    !(b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'%' | b'-'))
}

fn is_host_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-' | b'_')
}

impl Pattern {
    pub fn parse(raw: &str) -> Pattern {
        let mut body = raw;
        let anchor = if let Some(rest) = body.strip_prefix("||") {
            body = rest;
            Anchor::Domain
        } else if let Some(rest) = body.strip_prefix('|') {
            body = rest;
            Anchor::Start
        } else {
            Anchor::None
        };
        let end_anchor = match body.strip_suffix('|') {
            Some(rest) => {
                body = rest;
                true
            }
            None => false,
        };
        let mut tokens = Vec::new();
        let mut literal = Vec::new();
        for b in body.bytes() {
            match b {
                b'*' | b'^' => {
                    if !literal.is_empty() {
                        tokens.push(Token::Literal(std::mem::take(&mut literal)));
                    }
                    if b == b'^' {
                        tokens.push(Token::Separator);
                    } else if tokens.last() != Some(&Token::Wildcard) {
                        tokens.push(Token::Wildcard);
                    }
                }
                _ => literal.push(b.to_ascii_lowercase()),
            }
        }
        if !literal.is_empty() {
            tokens.push(Token::Literal(literal));
        }
        Pattern {
            anchor,
            end_anchor,
            tokens,
        }
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// For `||host^` / `||host/...`-style patterns, the exact hostname a URL
    /// must have (on a label boundary) for the pattern to match.
    pub fn host_key(&self) -> Option<String> {
        if self.anchor != Anchor::Domain {
            return None;
        }
        let Some(Token::Literal(first)) = self.tokens.first() else {
            return None;
        };
        let split = first.iter().position(|&b| !is_host_char(b)).unwrap_or(first.len());
        let (host, rest) = first.split_at(split);
        let closed = match rest.first() {
            Some(b'/') | Some(b':') => true,
            Some(_) => false,
            None => matches!(self.tokens.get(1), Some(Token::Separator)),
        };
        if !closed || host.is_empty() || host.ends_with(b".") || host.starts_with(b".") {
            return None;
        }
        String::from_utf8(host.to_vec()).ok()
    }

    pub fn matches(&self, url: &PreparedUrl) -> bool {
        let text = &url.text;
        let mut memo = Memo::new(self.tokens.len() + 1, text.len() + 1);
        match self.anchor {
            Anchor::Start => self.match_from(0, 0, text, &mut memo),
            Anchor::Domain => (url.host_start..url.host_end)
                .filter(|&p| p == url.host_start || text[p - 1] == b'.')
                .any(|p| self.match_from(0, p, text, &mut memo)),
            Anchor::None => (0..=text.len()).any(|p| self.match_from(0, p, text, &mut memo)),
        }
    }

    fn match_from(&self, ti: usize, pos: usize, text: &[u8], memo: &mut Memo) -> bool {
        if memo.failed(ti, pos) {
            return false;
        }
        let ok = match self.tokens.get(ti) {
            None => !self.end_anchor || pos == text.len(),
            Some(Token::Literal(lit)) => {
                text[pos..].starts_with(lit) && self.match_from(ti + 1, pos + lit.len(), text, memo)
            }
            Some(Token::Separator) => {
                if pos == text.len() {
                    self.match_from(ti + 1, pos, text, memo)
                } else {
                    is_separator(text[pos]) && self.match_from(ti + 1, pos + 1, text, memo)
                }
            }
            Some(Token::Wildcard) => {
                if ti + 1 == self.tokens.len() && !self.end_anchor {
                    true
                } else {
                    (pos..=text.len()).any(|p| self.match_from(ti + 1, p, text, memo))
                }
            }
        };
        if !ok {
            memo.mark(ti, pos);
        }
        ok
    }
}

/// Failed (token, position) states.
struct Memo {
    width: usize,
    bits: Vec<u64>,
}

impl Memo {
    fn new(tokens: usize, positions: usize) -> Self {
        let n = tokens * positions;
        Memo {
            width: positions,
            bits: vec![0; n.div_ceil(64)],
        }
    }

    fn failed(&self, ti: usize, pos: usize) -> bool {
        let i = ti * self.width + pos;
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    fn mark(&mut self, ti: usize, pos: usize) {
        let i = ti * self.width + pos;
        self.bits[i / 64] |= 1 << (i % 64);
    }
}
