//! Seeded synthetic web ecosystems: sites embedding trackers and benign
//! services, rendered as HAR captures together with their ground truth.

mod har;
mod truth;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filter::LabelClass;
use crate::ingest::InteractionKind;
use crate::{Error, Result};

pub use truth::{SynthSummary, HAR_DIR, TRUTH_GRAPH, TRUTH_LABELS, TRUTH_RULES};

#[derive(Debug, Clone, PartialEq)]
pub struct EcosystemConfig {
    pub n_sites: usize,
    pub n_trackers: usize,
    pub n_benign: usize,
    pub tracker_embed_prob: f64,
    pub benign_embed_prob: f64,
    /// Chance that a loaded tracker pulls in each of its partner trackers.
    pub bounce_prob: f64,
    pub seed: u64,
}

impl Default for EcosystemConfig {
    fn default() -> Self {
        EcosystemConfig {
            n_sites: 200,
            n_trackers: 90,
            n_benign: 60,
            tracker_embed_prob: 0.08,
            benign_embed_prob: 0.04,
            bounce_prob: 0.3,
            seed: 7,
        }
    }
}

impl EcosystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_sites", self.n_sites),
            ("n_trackers", self.n_trackers),
            ("n_benign", self.n_benign),
        ] {
            if n == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        for (name, p) in [
            ("tracker_embed_prob", self.tracker_embed_prob),
            ("benign_embed_prob", self.benign_embed_prob),
            ("bounce_prob", self.bounce_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = EcosystemConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || Error::Config(format!("{key}: cannot parse {value:?}"));
            match key {
                "n_sites" => c.n_sites = value.parse().map_err(|_| bad())?,
                "n_trackers" => c.n_trackers = value.parse().map_err(|_| bad())?,
                "n_benign" => c.n_benign = value.parse().map_err(|_| bad())?,
                "tracker_embed_prob" => c.tracker_embed_prob = value.parse().map_err(|_| bad())?,
                "benign_embed_prob" => c.benign_embed_prob = value.parse().map_err(|_| bad())?,
                "bounce_prob" => c.bounce_prob = value.parse().map_err(|_| bad())?,
                "seed" => c.seed = value.parse().map_err(|_| bad())?,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        format!(
            "n_sites = {}\nn_trackers = {}\nn_benign = {}\ntracker_embed_prob = {}\nbenign_embed_prob = {}\nbounce_prob = {}\nseed = {}\n",
            self.n_sites,
            self.n_trackers,
            self.n_benign,
            self.tracker_embed_prob,
            self.benign_embed_prob,
            self.bounce_prob,
            self.seed
        )
    }
}

/// A third-party host with one primary interaction kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Service {
    pub host: String,
    pub domain: String,
    pub class: LabelClass,
    pub kind: InteractionKind,
    /// Multiplier on the embed probability.
    pub popularity: f64,
    /// Query keys a tracker puts on its URLs.
    pub query_keys: Vec<&'static str>,
    /// Trackers this tracker may load (indices into the service list).
    pub partners: Vec<usize>,
    /// Asset paths a benign service serves.
    pub assets: Vec<String>,
}

/// Who caused a request, as the generator knows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    Page,
    Request(usize),
}

/// How the capture records the initiator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitiatorEncoding {
    /// `parser` with the initiating document's URL.
    ParserUrl,
    /// `parser` with no URL; only valid for the page itself.
    ParserBare,
    /// `other` with no URL; only valid for the page itself.
    OtherBare,
    /// `script` with the initiator in the top call frame.
    StackTop,
    /// `script` whose top frames are empty; the URL is in a parent stack.
    StackParent,
    /// `script` with the initiator in the `url` field.
    ScriptUrl,
    /// The parent's response redirects here.
    Redirect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRequest {
    pub url: String,
    pub host: String,
    /// Registrable domain; equals the site domain for first-party requests.
    pub domain: String,
    pub kind: InteractionKind,
    /// Capture resource type; `None` leaves the kind to the MIME type.
    pub resource_type: Option<&'static str>,
    pub mime: &'static str,
    pub parent: Parent,
    pub encoding: InitiatorEncoding,
    /// Service index for third-party requests.
    pub service: Option<usize>,
    /// URL of the initiating document or script, if not the page.
    pub initiator_url: Option<String>,
}

impl SyntheticRequest {
    pub fn is_first_party(&self) -> bool {
        self.service.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSession {
    pub site_domain: String,
    pub page_url: String,
    pub requests: Vec<SyntheticRequest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ecosystem {
    pub config: EcosystemConfig,
    pub services: Vec<Service>,
    pub sessions: Vec<SyntheticSession>,
}

const SYLLABLES: [&str; 24] = [
    "ka", "zen", "lo", "mi", "tra", "vo", "rex", "qui", "no", "pa", "sil", "dor", "ben", "fi", "gal", "hu", "jo",
    "lux", "mar", "nex", "or", "pi", "ru", "tel",
];
const SERVICE_TLDS: [&str; 6] = ["com", "net", "io", "co", "com.au", "de"];
const SITE_TLDS: [&str; 6] = ["com", "org", "net", "co.uk", "com.br", "io"];
const TRACKER_PREFIXES: [&str; 10] = [
    "px", "t", "sync", "collect", "tags", "beacon", "s", "stats", "ads", "cm",
];
const BENIGN_PREFIXES: [&str; 8] = ["static", "cdn", "fonts", "img", "assets", "player", "api", "media"];
const TRACKER_KEYS: [&str; 14] = [
    "cid", "sid", "cb", "t", "ts", "pid", "u", "r", "gdpr", "evt", "tid", "vid", "sz", "ver",
];
const ID_KEYS: [&str; 3] = ["id", "uid", "ref"];
const WORDS: [&str; 16] = [
    "main", "theme", "jquery", "react", "vendor", "bundle", "roboto", "opensans", "hero", "banner", "photo", "gallery",
    "player", "embed", "style", "icons",
];

fn exp_popularity(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    0.2 + 0.8 * -u.ln()
}

fn alnum(rng: &mut ChaCha8Rng, len: usize) -> String {
    const CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    (0..len).map(|_| CHARS[rng.gen_range(0..CHARS.len())] as char).collect()
}

fn hex(rng: &mut ChaCha8Rng, len: usize) -> String {
    const CHARS: &[u8] = b"0123456789abcdef";
    (0..len).map(|_| CHARS[rng.gen_range(0..CHARS.len())] as char).collect()
}

fn fresh_name(rng: &mut ChaCha8Rng, used: &mut HashSet<String>, tlds: &[&str]) -> String {
    loop {
        let parts = rng.gen_range(2..=3);
        let stem: String = (0..parts).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        let name = format!("{stem}.{}", tlds.choose(rng).expect("non-empty"));
        if used.insert(name.clone()) {
            return name;
        }
    }
}

fn pick_kind(rng: &mut ChaCha8Rng, weights: [u32; 4]) -> InteractionKind {
    let total: u32 = weights.iter().sum();
    let mut x = rng.gen_range(0..total);
    for (kind, w) in InteractionKind::NODE_KINDS.into_iter().zip(weights) {
        if x < w {
            return kind;
        }
        x -= w;
    }
    InteractionKind::Other
}

fn make_services(config: &EcosystemConfig, rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> Vec<Service> {
    let mut services = Vec::with_capacity(config.n_trackers + config.n_benign);
    let mut hosts = HashSet::new();
    for (class, count) in [
        (LabelClass::AdTracker, config.n_trackers),
        (LabelClass::Benign, config.n_benign),
    ] {
        let prefixes: &[&str] = if class.is_positive() {
            &TRACKER_PREFIXES
        } else {
            &BENIGN_PREFIXES
        };
        let mut domain = String::new();
        let mut on_domain = 0;
        for _ in 0..count {
            // Organisations run up to three hosts under one domain.
            if domain.is_empty() || on_domain >= 3 || rng.gen_bool(0.65) {
                domain = fresh_name(rng, used, &SERVICE_TLDS);
                on_domain = 0;
            }
            let host = loop {
                let h = format!("{}.{domain}", prefixes.choose(rng).expect("non-empty"));
                if hosts.insert(h.clone()) {
                    break h;
                }
                domain = fresh_name(rng, used, &SERVICE_TLDS);
                on_domain = 0;
            };
            on_domain += 1;
            let (kind, query_keys, assets) = if class.is_positive() {
                let mut keys: Vec<&'static str> = vec![ID_KEYS.choose(rng).copied().expect("non-empty")];
                for k in ID_KEYS {
                    if !keys.contains(&k) && rng.gen_bool(0.4) {
                        keys.push(k);
                    }
                }
                let extra = rng.gen_range(1..=3);
                keys.extend(TRACKER_KEYS.choose_multiple(rng, extra).copied());
                (pick_kind(rng, [5, 3, 1, 1]), keys, Vec::new())
            } else {
                let kind = pick_kind(rng, [3, 4, 1, 2]);
                let n = rng.gen_range(2..=5);
                let assets = (0..n).map(|_| benign_path(rng, kind)).collect();
                (kind, Vec::new(), assets)
            };
            services.push(Service {
                host,
                domain: domain.clone(),
                class,
                kind,
                popularity: exp_popularity(rng),
                query_keys,
                partners: Vec::new(),
                assets,
            });
        }
    }
    let n_trackers = config.n_trackers;
    for i in 0..n_trackers {
        let k = rng.gen_range(1..=3).min(n_trackers - 1);
        let mut others: Vec<usize> = (0..n_trackers).filter(|&j| j != i).collect();
        others.shuffle(rng);
        others.truncate(k);
        others.sort_unstable();
        services[i].partners = others;
    }
    services
}

fn benign_path(rng: &mut ChaCha8Rng, kind: InteractionKind) -> String {
    let word = WORDS.choose(rng).expect("non-empty");
    let version = format!(
        "{}.{}.{}",
        rng.gen_range(1..5),
        rng.gen_range(0..10),
        rng.gen_range(0..20)
    );
    let mut path = match kind {
        InteractionKind::Script => format!("libs/{word}/{version}/{word}.min.js"),
        InteractionKind::Media => match rng.gen_range(0..3) {
            0 => format!("fonts/{word}-regular.woff2"),
            1 => format!("images/{word}{}.jpg", rng.gen_range(1..400)),
            _ => format!("video/{word}_{}.mp4", rng.gen_range(1..50)),
        },
        InteractionKind::Iframe => format!("embed/{}", alnum(rng, 11)),
        _ => match rng.gen_range(0..2) {
            0 => format!("css/{word}.css"),
            _ => format!("v2/{word}/config.json"),
        },
    };
    if rng.gen_bool(0.15) {
        path.push_str(&format!("?v={}", rng.gen_range(1..30)));
    }
    path
}

struct SessionBuilder<'a> {
    rng: &'a mut ChaCha8Rng,
    services: &'a [Service],
    site_domain: String,
    bounce_prob: f64,
    requests: Vec<SyntheticRequest>,
    urls: HashSet<String>,
    /// Index of the first-party application script.
    app_script: usize,
}

const MAX_BOUNCE_DEPTH: usize = 3;

fn presentation(rng: &mut ChaCha8Rng, kind: InteractionKind) -> (Option<&'static str>, &'static str) {
    let (types, mime): (&[&'static str], &'static str) = match kind {
        InteractionKind::Script => (&["script"], "application/javascript"),
        InteractionKind::Media => (&["image", "font", "media"], "image/gif"),
        InteractionKind::Iframe => (&["document", "subdocument"], "text/html"),
        _ => (&["xhr", "fetch", "ping", "stylesheet", "other"], "application/json"),
    };
    if rng.gen_bool(0.1) {
        (None, mime)
    } else {
        (Some(types.choose(rng).copied().expect("non-empty")), mime)
    }
}

impl SessionBuilder<'_> {
    fn push(
        &mut self,
        url: String,
        host: String,
        domain: String,
        kind: InteractionKind,
        parent: Parent,
        service: Option<usize>,
        redirect: bool,
    ) -> usize {
        let (resource_type, mime) = presentation(self.rng, kind);
        let (encoding, initiator_url) = match parent {
            Parent::Page => (
                *[
                    InitiatorEncoding::ParserUrl,
                    InitiatorEncoding::ParserBare,
                    InitiatorEncoding::OtherBare,
                    InitiatorEncoding::StackTop,
                ]
                .choose(self.rng)
                .expect("non-empty"),
                None,
            ),
            Parent::Request(_) if redirect => (InitiatorEncoding::Redirect, None),
            Parent::Request(p) => {
                let parent = &self.requests[p];
                let encoding = if parent.kind == InteractionKind::Script {
                    *[
                        InitiatorEncoding::StackTop,
                        InitiatorEncoding::StackParent,
                        InitiatorEncoding::ScriptUrl,
                    ]
                    .choose(self.rng)
                    .expect("non-empty")
                } else {
                    InitiatorEncoding::ParserUrl
                };
                (encoding, Some(parent.url.clone()))
            }
        };
        self.urls.insert(url.clone());
        self.requests.push(SyntheticRequest {
            url,
            host,
            domain,
            kind,
            resource_type,
            mime,
            parent,
            encoding,
            service,
            initiator_url,
        });
        self.requests.len() - 1
    }

    fn unique(&mut self, make: impl Fn(&mut ChaCha8Rng) -> String) -> String {
        loop {
            let url = make(self.rng);
            if !self.urls.contains(&url) {
                return url;
            }
        }
    }

    fn tracker_query(&mut self, service: usize) -> String {
        let keys = self.services[service].query_keys.clone();
        let site = self.site_domain.clone();
        keys.iter()
            .map(|k| {
                let v = match *k {
                    "id" | "cid" | "pid" | "tid" => hex(self.rng, 12),
                    "uid" | "vid" | "u" => alnum(self.rng, 24),
                    "ref" | "r" => site.clone(),
                    "cb" | "t" | "ts" => self.rng.gen_range(100_000_000u64..999_999_999).to_string(),
                    _ => alnum(self.rng, 6),
                };
                format!("{k}={v}")
            })
            .collect::<Vec<_>>()
            .join("&")
    }

    fn tracker_url(&mut self, service: usize, path: &str) -> String {
        let host = self.services[service].host.clone();
        let query = self.tracker_query(service);
        let url = format!("https://{host}/{path}?{query}");
        if !self.urls.contains(&url) {
            return url;
        }
        // Grammars made only of site-derived values repeat; add a nonce.
        self.unique(|rng| format!("{url}&n={}", alnum(rng, 10)))
    }

    fn third_party(
        &mut self,
        service: usize,
        url: String,
        kind: InteractionKind,
        parent: Parent,
        redirect: bool,
    ) -> usize {
        let s = &self.services[service];
        let (host, domain) = (s.host.clone(), s.domain.clone());
        self.push(url, host, domain, kind, parent, Some(service), redirect)
    }

    /// Loads a tracker's primary resource and whatever it pulls in.
    fn load_tracker(&mut self, service: usize, parent: Parent, depth: usize) {
        let kind = self.services[service].kind;
        match kind {
            InteractionKind::Script => {
                let name = ["tag.js", "analytics.js", "pixel.js", "sdk.js"]
                    .choose(self.rng)
                    .copied()
                    .expect("non-empty");
                let url = self.tracker_url(service, name);
                let me = self.third_party(service, url, kind, parent, false);
                for _ in 0..self.rng.gen_range(1..=2) {
                    let beacon_kind = if self.rng.gen_bool(0.5) {
                        InteractionKind::Media
                    } else {
                        InteractionKind::Other
                    };
                    let path = if beacon_kind == InteractionKind::Media {
                        "p.gif"
                    } else {
                        "collect"
                    };
                    let url = self.tracker_url(service, path);
                    self.third_party(service, url, beacon_kind, Parent::Request(me), false);
                }
                if self.rng.gen_bool(0.05) {
                    // Same-node module load: contracts to a self-loop.
                    let url = self.tracker_url(service, "modules/ext.js");
                    self.third_party(service, url, InteractionKind::Script, Parent::Request(me), false);
                }
                if self.rng.gen_bool(0.05) {
                    // First-party cookie sync back onto the site.
                    let host = format!("www.{}", self.site_domain);
                    let query = self.tracker_query(service);
                    let url = self.unique(|rng| format!("https://{host}/__sync?{query}&n={}", alnum(rng, 8)));
                    let domain = self.site_domain.clone();
                    self.push(
                        url,
                        host,
                        domain,
                        InteractionKind::Other,
                        Parent::Request(me),
                        None,
                        false,
                    );
                }
                self.load_partners(service, me, depth, false);
            }
            InteractionKind::Media => {
                let url = self.tracker_url(service, "px.gif");
                let me = self.third_party(service, url, kind, parent, false);
                self.load_partners(service, me, depth, true);
            }
            InteractionKind::Iframe => {
                let url = self.tracker_url(service, "frame.html");
                let me = self.third_party(service, url, kind, parent, false);
                let url = self.tracker_url(service, "frame.js");
                self.third_party(service, url, InteractionKind::Script, Parent::Request(me), false);
                self.load_partners(service, me, depth, false);
            }
            _ => {
                let url = self.tracker_url(service, "v1/events");
                self.third_party(service, url, kind, parent, false);
            }
        }
    }

    /// A pixel can hand over to one partner only, by redirecting.
    fn load_partners(&mut self, service: usize, me: usize, depth: usize, via_redirect: bool) {
        if depth >= MAX_BOUNCE_DEPTH {
            return;
        }
        let partners = self.services[service].partners.clone();
        for p in partners {
            if !self.rng.gen_bool(self.bounce_prob) {
                continue;
            }
            if via_redirect {
                let url = self.tracker_url(p, "sync");
                let kind = self.services[p].kind;
                let kind = if kind == InteractionKind::Script {
                    InteractionKind::Media
                } else {
                    kind
                };
                self.third_party(p, url, kind, Parent::Request(me), true);
                return;
            }
            self.load_tracker(p, Parent::Request(me), depth + 1);
        }
    }

    fn load_benign(&mut self, service: usize, parent: Parent) {
        let s = &self.services[service];
        let kind = s.kind;
        let host = s.host.clone();
        let n = self.rng.gen_range(1..=s.assets.len().min(3));
        let assets: Vec<String> = s.assets.choose_multiple(self.rng, n).cloned().collect();
        let first = format!("https://{host}/{}", assets[0]);
        let me = self.third_party(service, first, kind, parent, false);
        for a in &assets[1..] {
            let url = format!("https://{host}/{a}");
            self.third_party(service, url, kind, parent, false);
        }
        if kind == InteractionKind::Iframe && self.rng.gen_bool(0.5) {
            // Players load their own script and sometimes another service's assets.
            let url = format!("https://{host}/player/{}.js", alnum(self.rng, 6));
            self.third_party(service, url, InteractionKind::Script, Parent::Request(me), false);
        }
    }
}

fn page_parent(rng: &mut ChaCha8Rng, app_script: usize) -> Parent {
    if rng.gen_bool(0.25) {
        Parent::Request(app_script)
    } else {
        Parent::Page
    }
}

fn embed_prob(p: f64, popularity: f64) -> f64 {
    1.0 - (1.0 - p).powf(popularity)
}

pub fn generate(config: &EcosystemConfig) -> Result<Ecosystem> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut used = HashSet::new();
    let site_domains: Vec<String> = (0..config.n_sites)
        .map(|i| {
            let tld = SITE_TLDS[i % SITE_TLDS.len()];
            let name = format!("site{i:04}.{tld}");
            used.insert(name.clone());
            name
        })
        .collect();
    let services = make_services(config, &mut rng, &mut used);
    let n_trackers = config.n_trackers;

    let mut sessions = Vec::with_capacity(config.n_sites);
    for site_domain in site_domains {
        let page_url = format!("https://www.{site_domain}/");
        let mut b = SessionBuilder {
            rng: &mut rng,
            services: &services,
            site_domain: site_domain.clone(),
            bounce_prob: config.bounce_prob,
            requests: Vec::new(),
            urls: HashSet::from([page_url.clone()]),
            app_script: 0,
        };
        let www = format!("www.{site_domain}");
        let app = format!("https://{www}/static/app.{}.js", hex(b.rng, 8));
        b.app_script = b.push(
            app,
            www.clone(),
            site_domain.clone(),
            InteractionKind::Script,
            Parent::Page,
            None,
            false,
        );
        let statics = format!("static.{site_domain}");
        let hero = format!("https://{statics}/img/hero.jpg");
        b.push(
            hero,
            statics,
            site_domain.clone(),
            InteractionKind::Media,
            Parent::Page,
            None,
            false,
        );
        let css = format!("https://{www}/css/site.css");
        b.push(
            css,
            www,
            site_domain.clone(),
            InteractionKind::Other,
            Parent::Page,
            None,
            false,
        );

        for t in 0..n_trackers {
            if b.rng
                .gen_bool(embed_prob(config.tracker_embed_prob, services[t].popularity))
            {
                let parent = page_parent(b.rng, b.app_script);
                b.load_tracker(t, parent, 0);
            }
        }
        for s in n_trackers..services.len() {
            if b.rng
                .gen_bool(embed_prob(config.benign_embed_prob, services[s].popularity))
            {
                let parent = page_parent(b.rng, b.app_script);
                b.load_benign(s, parent);
            }
        }
        let requests = b.requests;
        sessions.push(SyntheticSession {
            site_domain,
            page_url,
            requests,
        });
    }

    Ok(Ecosystem {
        config: config.clone(),
        services,
        sessions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_validation() {
        let c = EcosystemConfig::default();
        assert_eq!(EcosystemConfig::parse(&c.to_text()).unwrap(), c);
        assert!(EcosystemConfig::parse("n_sites = 0").is_err());
        assert!(EcosystemConfig::parse("bounce_prob = 1.5").is_err());
        assert!(EcosystemConfig::parse("colour = red").is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let c = EcosystemConfig {
            n_sites: 20,
            ..Default::default()
        };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let d = EcosystemConfig { seed: 8, ..c.clone() };
        assert_ne!(generate(&c).unwrap().sessions, generate(&d).unwrap().sessions);
    }

    #[test]
    fn urls_unique_within_session_where_redirected() {
        let eco = generate(&EcosystemConfig {
            n_sites: 30,
            bounce_prob: 0.8,
            ..Default::default()
        })
        .unwrap();
        for s in &eco.sessions {
            for r in s.requests.iter().filter(|r| r.encoding == InitiatorEncoding::Redirect) {
                assert_eq!(s.requests.iter().filter(|o| o.url == r.url).count(), 1);
            }
        }
    }

    #[test]
    fn trackers_have_query_grammars() {
        let eco = generate(&EcosystemConfig {
            n_sites: 10,
            ..Default::default()
        })
        .unwrap();
        for s in eco.services.iter().filter(|s| s.class.is_positive()) {
            assert!(s.query_keys.iter().any(|k| ID_KEYS.contains(k)));
        }
        for s in eco.services.iter().filter(|s| !s.class.is_positive()) {
            assert!(s.partners.is_empty());
            assert!(!s.assets.is_empty());
        }
    }
}
