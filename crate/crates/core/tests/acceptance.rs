//! End-to-end acceptance checks.
//!
//! Built without the libtest harness so every criterion prints exactly one
//! PASS/FAIL line regardless of output capture. The process exits non-zero if
//! any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error as StdError;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use widegraph::content::{build_vocabulary, tfidf, VocabRanking};
use widegraph::filter::{label_graph, Label, LabelClass, MatchContext, Request, RuleSet};
use widegraph::forest::{bootstrap_multiplicity, save_model, train, FeatureMatrix, ForestParams};
use widegraph::graph::{read_graph, DocKey, NodeKey, SubdomainDocument, WideGraph};
use widegraph::ingest::{build_tree, parse_har, InteractionKind};
use widegraph::pipeline::{
    class_mean_direct_coverage, degree_buckets, filter_eligible, run_all, RunConfig, WeightMode,
};
use widegraph::synth::{generate, Ecosystem, EcosystemConfig, TRUTH_RULES};
use widegraph::Execution;

type Outcome = Result<String, Box<dyn StdError>>;
type Criterion = (&'static str, fn(&Corpus) -> Outcome);

fn ensure(condition: bool, message: impl Into<String>) -> Result<(), Box<dyn StdError>> {
    if condition {
        Ok(())
    } else {
        Err(message.into().into())
    }
}

/// The default synthetic corpus, written once and shared by the end-to-end
/// criteria.
struct Corpus {
    dir: tempfile::TempDir,
    eco: Ecosystem,
    graph: OnceLock<WideGraph>,
}

impl Corpus {
    fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let eco = generate(&EcosystemConfig::default()).expect("default config is valid");
        eco.write(dir.path()).expect("write corpus");
        Corpus {
            dir,
            eco,
            graph: OnceLock::new(),
        }
    }

    fn graph(&self) -> &WideGraph {
        self.graph
            .get_or_init(|| pipeline_graph(&self.eco).expect("default corpus ingests"))
    }
}

fn pipeline_graph(eco: &Ecosystem) -> widegraph::Result<WideGraph> {
    let trees = (0..eco.sessions.len())
        .map(|i| build_tree(&parse_har(&eco.har_bytes(i))?))
        .collect::<widegraph::Result<Vec<_>>>()?;
    WideGraph::from_trees(&trees)
}

fn main() {
    let corpus = Corpus::new();
    let criteria: [Criterion; 8] = [
        ("graph oracle equivalence", graph_oracle),
        ("tf-idf oracle", tfidf_oracle),
        ("rule matcher vectors and monotonicity", rule_matcher),
        ("forest sanity", forest_sanity),
        ("end-to-end synthetic", end_to_end),
        ("hidden tracker discovery", hidden_trackers),
        ("eligibility filter boundary", eligibility_boundary),
        ("coverage and degree directions", directions),
    ];
    panic::set_hook(Box::new(|info| eprintln!("panic: {info}")));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(|| check(&corpus))).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{elapsed:.2}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {e} [{elapsed:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn graph_oracle(_: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut nodes_checked = 0;
    for seed in 0..50u64 {
        let config = EcosystemConfig {
            n_sites: 5 + (seed as usize * 9) % 46,
            n_trackers: 12 + (seed as usize % 5) * 6,
            n_benign: 8 + (seed as usize % 4) * 4,
            tracker_embed_prob: 0.08 + 0.04 * (seed % 4) as f64,
            benign_embed_prob: 0.05,
            bounce_prob: 0.15 * (seed % 5) as f64,
            seed,
        };
        let eco = generate(&config)?;
        let graph = pipeline_graph(&eco)?;
        let truth = eco.truth_graph();
        ensure(graph.roots == truth.roots, format!("seed {seed}: root sets differ"))?;
        ensure(
            graph.nodes.keys().eq(truth.nodes.keys()),
            format!("seed {seed}: node sets differ"),
        )?;
        ensure(
            graph.edges.keys().eq(truth.edges.keys()),
            format!("seed {seed}: edge sets differ"),
        )?;
        ensure(
            graph.documents == truth.documents,
            format!("seed {seed}: documents differ"),
        )?;

        // Brute force: count, per site, whether a node was reached at all and
        // whether the first party itself requested it.
        let mut direct: BTreeMap<NodeKey, usize> = BTreeMap::new();
        let mut indirect: BTreeMap<NodeKey, usize> = BTreeMap::new();
        for session in &eco.sessions {
            for (node, is_direct) in session.presence() {
                *indirect.entry(node.clone()).or_insert(0) += 1;
                *direct.entry(node).or_insert(0) += usize::from(is_direct);
            }
        }
        ensure(
            graph.third_party_nodes().eq(indirect.keys()),
            format!("seed {seed}: reachable third parties differ"),
        )?;
        for node in graph.third_party_nodes() {
            let c = graph.coverage(node)?;
            ensure(
                c.total_roots == eco.sessions.len()
                    && c.direct_roots == direct[node]
                    && c.indirect_roots == indirect[node],
                format!(
                    "seed {seed}: {node} coverage {}/{} {}/{} vs brute force {}/{n} {}/{n}",
                    c.direct_roots,
                    c.total_roots,
                    c.indirect_roots,
                    c.total_roots,
                    direct[node],
                    indirect[node],
                    n = eco.sessions.len()
                ),
            )?;
            nodes_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "50 corpora, {nodes_checked} node coverages exact, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

/// Lowercase, drop an http(s) scheme prefix, split on URL punctuation.
fn oracle_tokens(url: &str) -> Vec<String> {
    let lower = url.to_lowercase();
    let mut rest = lower.as_str();
    for scheme in ["https://", "http://"] {
        if let Some(r) = rest.strip_prefix(scheme) {
            rest = r;
            break;
        }
    }
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in rest.chars() {
        if "/?&=.-".contains(ch) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else {
            current.push(ch);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Token -> count over a document's URLs, with URL multiplicity.
fn oracle_counts(doc: &SubdomainDocument) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for (url, &n) in &doc.urls {
        for token in oracle_tokens(url) {
            *counts.entry(token).or_insert(0) += n;
        }
    }
    counts
}

fn tfidf_oracle(corpus: &Corpus) -> Outcome {
    let graph = corpus.graph();
    let docs: Vec<&SubdomainDocument> = graph.documents.values().collect();
    let vocab = build_vocabulary(&docs, 1000, VocabRanking::DocumentFrequency, Execution::Sequential)?;
    ensure(vocab.corpus_size == docs.len(), "vocabulary corpus size")?;
    let counts: Vec<BTreeMap<String, u64>> = docs.iter().map(|d| oracle_counts(d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nonzero = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let d = rng.gen_range(0..docs.len());
        let doc = docs[d];
        let own: Vec<&String> = counts[d].keys().filter(|t| vocab.position(t).is_some()).collect();
        let term = if trial % 2 == 0 && !own.is_empty() {
            own[rng.gen_range(0..own.len())].clone()
        } else {
            vocab.terms[rng.gen_range(0..vocab.len())].clone()
        };
        let f = counts[d].get(&term).copied().unwrap_or(0);
        let df = counts.iter().filter(|c| c.contains_key(&term)).count();
        let expected = (1.0 + f as f64).ln() * (docs.len() as f64 / (1.0 + df as f64)).ln();
        let got = tfidf(&term, doc, &vocab, false)?;
        if expected == 0.0 {
            ensure(got == 0.0, format!("{term:?} in {}: {got} vs 0", doc.host))?;
        } else {
            let rel = ((got - expected) / expected).abs();
            worst = worst.max(rel);
            ensure(rel <= 1e-12, format!("{term:?} in {}: {got} vs {expected}", doc.host))?;
            nonzero += 1;
        }
    }
    Ok(format!(
        "1000 pairs ({nonzero} non-zero), worst relative error {worst:.1e}"
    ))
}

struct Case {
    rules: &'static str,
    url: &'static str,
    page: &'static str,
    kind: InteractionKind,
    blocked: bool,
}

const fn case(
    rules: &'static str,
    url: &'static str,
    page: &'static str,
    kind: InteractionKind,
    blocked: bool,
) -> Case {
    Case {
        rules,
        url,
        page,
        kind,
        blocked,
    }
}

const S: InteractionKind = InteractionKind::Script;
const M: InteractionKind = InteractionKind::Media;
const I: InteractionKind = InteractionKind::Iframe;
const O: InteractionKind = InteractionKind::Other;

const CASES: &[Case] = &[
    // || domain anchor
    case("||ads.com^", "https://ads.com/x.js", "site.org", S, true),
    case("||ads.com^", "https://sub.ads.com/x.js", "site.org", S, true),
    case("||ads.com^", "https://badads.com/x.js", "site.org", S, false),
    case("||ads.com^", "https://ads.com.evil.org/x.js", "site.org", S, false),
    case("||ads.com^", "http://ads.com:8080/x", "site.org", S, true),
    case("||ads.com/pixel", "https://ads.com/pixel.gif", "site.org", M, true),
    case("||ads.com/pixel", "https://ads.com/img/pixel.gif", "site.org", M, false),
    // ^ separator
    case("swf^", "https://cdn.net/a.swf?v=1", "site.org", O, true),
    case("swf^", "https://cdn.net/a.swfx", "site.org", O, false),
    case("/track^", "https://cdn.net/track", "site.org", O, true),
    case("/track^", "https://cdn.net/tracker.js", "site.org", O, false),
    // | start and end anchors
    case("|https://t.io/p", "https://t.io/px", "site.org", M, true),
    case("|https://t.io/p", "http://t.io/p", "site.org", M, false),
    case(
        "|https://t.io/p",
        "https://x.io/?u=https://t.io/p",
        "site.org",
        M,
        false,
    ),
    case(".gif|", "https://cdn.net/a.gif", "site.org", M, true),
    case(".gif|", "https://cdn.net/a.gif?x=1", "site.org", M, false),
    // * wildcard and plain substrings
    case(
        "/banner/*/img",
        "https://cdn.net/banner/123/img.png",
        "site.org",
        M,
        true,
    ),
    case("/banner/*/img", "https://cdn.net/banner/img.png", "site.org", M, false),
    case(
        "||x.com/*/collect",
        "https://x.com/v2/g/collect?id=1",
        "site.org",
        O,
        true,
    ),
    case("ad_frame", "https://cdn.net/ad_frame.html", "site.org", I, true),
    case("ad_frame", "https://cdn.net/adframe.html", "site.org", I, false),
    // @@ exceptions
    case(
        "||ads.com^\n@@||ads.com/ok^",
        "https://ads.com/ok",
        "site.org",
        S,
        false,
    ),
    case(
        "||ads.com^\n@@||ads.com/ok^",
        "https://ads.com/bad",
        "site.org",
        S,
        true,
    ),
    case("@@||ads.com^", "https://ads.com/x", "site.org", S, false),
    case(
        "||ads.com^\n@@||ads.com^$domain=site.org",
        "https://ads.com/x",
        "site.org",
        S,
        false,
    ),
    case(
        "||ads.com^\n@@||ads.com^$domain=site.org",
        "https://ads.com/x",
        "other.org",
        S,
        true,
    ),
    // third-party / ~third-party
    case("||t.io^$third-party", "https://t.io/p", "site.org", S, true),
    case("||t.io^$third-party", "https://t.io/p", "t.io", S, false),
    case("||t.io^$third-party", "https://cdn.t.io/p", "t.io", S, false),
    case("||t.io^$~third-party", "https://t.io/p", "t.io", S, true),
    case("||t.io^$~third-party", "https://t.io/p", "site.org", S, false),
    // kind options
    case("||t.io^$script", "https://t.io/a.js", "site.org", S, true),
    case("||t.io^$script", "https://t.io/a.gif", "site.org", M, false),
    case("||t.io^$image", "https://t.io/a.gif", "site.org", M, true),
    case("||t.io^$image", "https://t.io/a.js", "site.org", S, false),
    case("||t.io^$subdocument", "https://t.io/f.html", "site.org", I, true),
    case("||t.io^$subdocument", "https://t.io/f.html", "site.org", O, false),
    case("||t.io^$xmlhttprequest", "https://t.io/api", "site.org", O, true),
    case("||t.io^$xmlhttprequest", "https://t.io/api", "site.org", I, false),
    case("||t.io^$script,image", "https://t.io/a.gif", "site.org", M, true),
    case("||t.io^$script,third-party", "https://t.io/a.js", "t.io", S, false),
    // domain=
    case("||t.io^$domain=news.com", "https://t.io/a", "news.com", S, true),
    case("||t.io^$domain=news.com", "https://t.io/a", "sports.news.com", S, true),
    case("||t.io^$domain=news.com", "https://t.io/a", "fakenews.com", S, false),
    case(
        "||t.io^$domain=news.com|blog.org",
        "https://t.io/a",
        "blog.org",
        S,
        true,
    ),
    case("||t.io^$domain=~news.com", "https://t.io/a", "news.com", S, false),
    case("||t.io^$domain=~news.com", "https://t.io/a", "site.org", S, true),
    // skipped rule kinds never block
    case("##.ad-banner", "https://cdn.net/ad-banner", "site.org", S, false),
    case("/ads?[0-9]/", "https://cdn.net/ads1", "site.org", S, false),
    case("||t.io^$popup", "https://t.io/a", "site.org", S, false),
];

fn rule_matcher(_: &Corpus) -> Outcome {
    for c in CASES {
        let rules = RuleSet::parse(c.rules);
        let ctx = MatchContext {
            page_domain: c.page,
            kind: c.kind,
        };
        let got = rules.matches(c.url, &ctx);
        ensure(
            got == c.blocked,
            format!("{:?} on {} (page {}, {}) gave {got}", c.rules, c.url, c.page, c.kind),
        )?;
    }

    let hosts = ["t.io", "cdn.t.io", "ads.com", "x.ads.com", "cdn.net", "site.org"];
    let paths = [
        "/",
        "/pixel.gif",
        "/a.js",
        "/collect?id=1&ref=x",
        "/ads/banner.png",
        "/f.html",
    ];
    let fragments = ["pixel", "ads", ".gif", "collect", "a.js", "/f"];
    let pages = ["site.org", "t.io", "news.com", "ads.com"];
    let options = [
        "",
        "$third-party",
        "$~third-party",
        "$script",
        "$image",
        "$domain=news.com",
        "$domain=~site.org",
    ];
    let random_rule = |rng: &mut ChaCha8Rng| -> String {
        let body = match rng.gen_range(0..4) {
            0 => format!("||{}^", hosts.choose(rng).unwrap()),
            1 => fragments.choose(rng).unwrap().to_string(),
            2 => format!("||{}{}", hosts.choose(rng).unwrap(), paths.choose(rng).unwrap()),
            _ => format!("*{}*", fragments.choose(rng).unwrap()),
        };
        format!("{body}{}", options.choose(rng).unwrap())
    };
    let blocked_brute = |rules: &RuleSet, url: &str, ctx: &MatchContext<'_>| {
        let request = Request::parse(url).unwrap();
        rules.block_rules().iter().any(|r| r.matches(&request, ctx))
            && !rules.exception_rules().iter().any(|r| r.matches(&request, ctx))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut flips = [0usize; 2];
    for trial in 0..10_000 {
        let blocks: Vec<String> = (0..rng.gen_range(0..6)).map(|_| random_rule(&mut rng)).collect();
        let exceptions: Vec<String> = (0..rng.gen_range(0..3))
            .map(|_| format!("@@{}", random_rule(&mut rng)))
            .collect();
        let extra = random_rule(&mut rng);
        let url = format!(
            "https://{}{}",
            hosts.choose(&mut rng).unwrap(),
            paths.choose(&mut rng).unwrap()
        );
        let ctx = MatchContext {
            page_domain: pages.choose(&mut rng).unwrap(),
            kind: [S, M, I, O][rng.gen_range(0..4)],
        };
        let text = |extra_block: Option<&str>, extra_exception: Option<&str>| {
            let mut lines: Vec<String> = blocks.iter().chain(&exceptions).cloned().collect();
            lines.extend(extra_block.map(String::from));
            lines.extend(extra_exception.map(|e| format!("@@{e}")));
            RuleSet::parse(&lines.join("\n"))
        };
        let base = text(None, None);
        let with_block = text(Some(&extra), None);
        let with_exception = text(None, Some(&extra));
        let before = base.matches(&url, &ctx);
        let after_block = with_block.matches(&url, &ctx);
        let after_exception = with_exception.matches(&url, &ctx);
        ensure(
            !before || after_block,
            format!("trial {trial}: adding {extra:?} unblocked {url}"),
        )?;
        ensure(
            before || !after_exception,
            format!("trial {trial}: adding @@{extra:?} blocked {url}"),
        )?;
        for set in [&base, &with_block, &with_exception] {
            ensure(
                set.matches(&url, &ctx) == blocked_brute(set, &url, &ctx),
                format!("trial {trial}: indexed and linear matching disagree on {url}"),
            )?;
        }
        flips[0] += usize::from(!before && after_block);
        flips[1] += usize::from(before && !after_exception);
    }
    Ok(format!(
        "{} curated cases; 10000 trials ({} newly blocked, {} newly allowed)",
        CASES.len(),
        flips[0],
        flips[1]
    ))
}

fn labels_of(y: &[bool]) -> Vec<LabelClass> {
    y.iter()
        .map(|&b| if b { LabelClass::AdTracker } else { LabelClass::Benign })
        .collect()
}

fn forest_sanity(_: &Corpus) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // (a) same seed, same bytes, whatever the execution mode.
    let rows: Vec<Vec<f64>> = (0..150).map(|_| (0..6).map(|_| rng.gen::<f64>()).collect()).collect();
    let y: Vec<bool> = rows.iter().map(|r| r[0] + r[1] * r[2] > 0.7).collect();
    let x = FeatureMatrix::from_rows(&rows)?;
    let mut params = ForestParams {
        n_trees: 60,
        seed: 17,
        execution: Execution::Sequential,
        ..ForestParams::default()
    };
    let first = save_model(&train(&x, &labels_of(&y), &params)?);
    let second = save_model(&train(&x, &labels_of(&y), &params)?);
    params.execution = Execution::Parallel;
    let parallel = save_model(&train(&x, &labels_of(&y), &params)?);
    ensure(first == second && first == parallel, "(a) models differ")?;

    // (b) two features, separated by the line x + y = 1 with a margin.
    let mut points = Vec::new();
    while points.len() < 600 {
        let p = [rng.gen::<f64>(), rng.gen::<f64>()];
        if (p[0] + p[1] - 1.0).abs() > 0.1 {
            points.push(p);
        }
    }
    let (train_points, test_points) = points.split_at(450);
    let label = |p: &[f64; 2]| p[0] + p[1] > 1.0;
    let model = train(
        &FeatureMatrix::from_rows(train_points)?,
        &labels_of(&train_points.iter().map(label).collect::<Vec<_>>()),
        &ForestParams {
            n_trees: 100,
            seed: 5,
            ..ForestParams::default()
        },
    )?;
    let correct = test_points
        .iter()
        .filter(|p| model.predict(&p[..]).map(|pr| pr.label.is_positive()).ok() == Some(label(p)))
        .count();
    ensure(
        correct == test_points.len(),
        format!("(b) held-out {correct}/{}", test_points.len()),
    )?;

    // (c) random labels on distinct rows: every unlimited-depth tree must fit
    // its own bootstrap sample exactly.
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
    let y: Vec<bool> = (0..200).map(|_| rng.gen()).collect();
    let params = ForestParams {
        n_trees: 50,
        seed: 23,
        max_depth: None,
        ..ForestParams::default()
    };
    let model = train(&FeatureMatrix::from_rows(&rows)?, &labels_of(&y), &params)?;
    let mut checked = 0;
    for (t, tree) in model.trees.iter().enumerate() {
        let drawn = bootstrap_multiplicity(params.seed, t, rows.len());
        for (i, row) in rows.iter().enumerate().filter(|(i, _)| drawn[*i] > 0) {
            ensure(
                tree.votes_positive(row) == y[i],
                format!("(c) tree {t} misfits bootstrap row {i}"),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "(a) identical {} byte models; (b) {correct}/{} held out; (c) {checked} bootstrap rows over 50 trees",
        first.len(),
        test_points.len()
    ))
}

fn sequential_config(dir: &Path) -> widegraph::Result<RunConfig> {
    let mut config = RunConfig::read(&dir.join("run.conf"))?;
    config.set_execution(Execution::Sequential);
    Ok(config)
}

fn end_to_end(corpus: &Corpus) -> Outcome {
    let config = sequential_config(corpus.dir.path())?;
    let start = Instant::now();
    let output = run_all(&config)?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    ensure(
        read_graph(&config.out_dir.join("graph.wg"))? == corpus.eco.truth_graph(),
        "pipeline graph differs from the generator's graph",
    )?;
    let report = output
        .reports
        .iter()
        .find(|r| r.mode == WeightMode::Unbiased && !r.corrected)
        .ok_or("no unbiased report")?;
    ensure(
        report.accuracy >= 0.9,
        format!("unbiased accuracy {:.4}", report.accuracy),
    )?;
    ensure(
        report.adtracker.precision >= 0.9,
        format!("adtracker precision {:.4}", report.adtracker.precision),
    )?;
    Ok(format!(
        "{} train / {} test, unbiased accuracy {:.4}, adtracker precision {:.4}, {:.2}s sequential",
        output.train_size,
        output.test_size,
        report.accuracy,
        report.adtracker.precision,
        elapsed.as_secs_f64()
    ))
}

fn hidden_trackers(corpus: &Corpus) -> Outcome {
    let dir = tempfile::tempdir()?;
    corpus.eco.write(dir.path())?;
    let mut trackers: Vec<&str> = corpus
        .eco
        .services
        .iter()
        .filter(|s| s.class == LabelClass::AdTracker)
        .map(|s| s.host.as_str())
        .collect();
    trackers.sort_unstable();
    trackers.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    let n_withheld = (trackers.len() as f64 * 0.2).round() as usize;
    let (withheld, kept) = trackers.split_at(n_withheld);
    let rules: String = kept.iter().map(|h| format!("||{h}^\n")).collect();
    std::fs::write(dir.path().join(TRUTH_RULES), rules)?;

    let output = run_all(&sequential_config(dir.path())?)?;
    let top: BTreeSet<&str> = output
        .candidates
        .iter()
        .take(2 * n_withheld)
        .map(|c| c.host.as_str())
        .collect();
    let recovered = withheld.iter().filter(|h| top.contains(*h)).count();
    ensure(
        2 * recovered >= n_withheld,
        format!(
            "recovered {recovered} of {n_withheld} withheld hosts in the top {}",
            2 * n_withheld
        ),
    )?;
    Ok(format!(
        "recovered {recovered}/{n_withheld} withheld tracker hosts in the top {} of {} candidates",
        2 * n_withheld,
        output.candidates.len()
    ))
}

/// A capture of `site` whose page loads each `(url, resource type, script)`
/// entry; with a script URL the request is attributed to that script.
fn har(site: &str, loads: &[(&str, &str, Option<&str>)]) -> Vec<u8> {
    let page = format!("https://www.{site}/");
    let mut entries = vec![json!({
        "request": {"url": page},
        "_resourceType": "document",
        "_initiator": {"type": "other"},
    })];
    for (url, resource_type, script) in loads {
        let initiator = match script {
            Some(s) => json!({"type": "script", "stack": {"callFrames": [{"url": s}]}}),
            None => json!({"type": "parser", "url": page}),
        };
        entries.push(json!({
            "request": {"url": url},
            "_resourceType": resource_type,
            "_initiator": initiator,
        }));
    }
    serde_json::to_vec(&json!({"log": {"pages": [{"title": page}], "entries": entries}})).unwrap()
}

fn eligibility_boundary(_: &Corpus) -> Outcome {
    const X: &str = "https://cdn.x.com/a.js";
    let fixtures = [
        har(
            "s1.com",
            &[(X, "script", None), ("https://px.v.com/1.gif", "image", Some(X))],
        ),
        har(
            "s2.com",
            &[(X, "script", None), ("https://px.v.com/2.gif", "image", Some(X))],
        ),
        har("s3.com", &[(X, "script", None)]),
        har(
            "s4.com",
            &[
                (X, "script", None),
                ("https://img.y.com/a.png", "image", None),
                ("https://pix.z.com/a.gif", "image", None),
                ("https://pix.z.com/b.gif", "image", Some(X)),
                ("https://a.w.com/1.png", "image", None),
                ("https://b.w.com/2.png", "image", Some(X)),
            ],
        ),
        har(
            "s5.com",
            &[
                ("https://img.y.com/b.png", "image", None),
                ("https://a.w.com/3.png", "image", None),
            ],
        ),
    ];
    let trees = fixtures
        .iter()
        .map(|bytes| build_tree(&parse_har(bytes)?))
        .collect::<widegraph::Result<Vec<_>>>()?;
    let graph = WideGraph::from_trees(&trees)?;

    // Distinct in-edges by construction: x from s1..s4; v from x plus Bounced
    // edges of s1 and s2; y from s4, s5; z from s4 and x; w from s4, s5 and x.
    let expected: BTreeMap<NodeKey, usize> = [
        (NodeKey::third_party("x.com", S), 4),
        (NodeKey::third_party("v.com", M), 3),
        (NodeKey::third_party("y.com", M), 2),
        (NodeKey::third_party("z.com", M), 2),
        (NodeKey::third_party("w.com", M), 3),
    ]
    .into();
    let degrees = graph.in_degrees();
    for (node, &d) in &expected {
        ensure(
            degrees.get(node) == Some(&d),
            format!("{node} in-degree {:?}, expected {d}", degrees.get(node)),
        )?;
    }

    let eligibility = filter_eligible(&graph, 3);
    let kept: BTreeSet<String> = eligibility.kept.iter().map(|d| d.key().to_string()).collect();
    let want: BTreeSet<String> = [
        "cdn.x.com[script]",
        "px.v.com[media]",
        "a.w.com[media]",
        "b.w.com[media]",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    ensure(kept == want, format!("kept {kept:?}"))?;
    ensure(
        eligibility.total == 6 && eligibility.removed == 2,
        "expected 6 documents, 2 removed",
    )?;
    for threshold in 0..7 {
        let e = filter_eligible(&graph, threshold);
        ensure(
            e.total == e.kept.len() + e.removed,
            format!("threshold {threshold}: counts do not add up"),
        )?;
        ensure(
            e.kept.iter().all(|d| degrees[&d.parent()] >= threshold),
            format!("threshold {threshold}: kept a low-degree document"),
        )?;
    }
    Ok("in-degree 2 excluded (y, z), 3 included (v, w); total = kept + removed for thresholds 0..6".into())
}

fn directions(corpus: &Corpus) -> Outcome {
    let graph = corpus.graph();
    let rules = RuleSet::parse(&corpus.eco.truth_rules());
    let labels: BTreeMap<DocKey, Label> = label_graph(&rules, graph, None, Execution::Sequential)
        .into_iter()
        .map(|l| (l.key, l.label))
        .collect();
    let [benign, tracker] = class_mean_direct_coverage(graph, &labels);
    ensure(
        tracker > benign,
        format!("mean direct coverage tracker {tracker:.4} <= benign {benign:.4}"),
    )?;

    // Pool the degree buckets into a lower and an upper half by document count.
    let buckets = degree_buckets(graph, &labels);
    let total: usize = buckets.iter().map(|b| b.adtracker + b.benign).sum();
    let mut halves = [[0usize; 2]; 2];
    let mut seen = 0;
    for b in &buckets {
        let half = usize::from(seen * 2 >= total);
        halves[half][0] += b.adtracker;
        halves[half][1] += b.benign;
        seen += b.adtracker + b.benign;
    }
    let fraction = |h: [usize; 2]| h[0] as f64 / (h[0] + h[1]).max(1) as f64;
    let (low, high) = (fraction(halves[0]), fraction(halves[1]));
    ensure(
        high > low,
        format!("tracker share high-degree {high:.3} <= low-degree {low:.3}"),
    )?;
    Ok(format!(
        "direct coverage tracker {tracker:.4} > benign {benign:.4}; tracker share high-degree {high:.3} > low-degree {low:.3}"
    ))
}
