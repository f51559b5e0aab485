use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use widegraph::filter::LabelClass;
use widegraph::forest::{load_model, save_model, train, ClassWeight, FeatureMatrix, ForestParams};
use widegraph::graph::{load_graph, save_graph, DocKey, WideGraph};
use widegraph::ingest::{build_tree, parse_har, InteractionKind};
use widegraph::pipeline::{filter_eligible, split, train_count, RunConfig, SplitSpec};
use widegraph::structural::{structural_features, StructConfig};
use widegraph::synth::{generate, EcosystemConfig};
use widegraph::Execution;

fn keys(n: usize) -> Vec<DocKey> {
    (0..n)
        .map(|i| DocKey {
            host: format!("h{i}.example"),
            kind: InteractionKind::NODE_KINDS[i % 4],
        })
        .collect()
}

fn small_graph(seed: u64, sites: usize, bounce: f64) -> WideGraph {
    let eco = generate(&EcosystemConfig {
        n_sites: sites,
        n_trackers: 15,
        n_benign: 10,
        tracker_embed_prob: 0.2,
        benign_embed_prob: 0.1,
        bounce_prob: bounce,
        seed,
    })
    .unwrap();
    let trees: Vec<_> = (0..eco.sessions.len())
        .map(|i| build_tree(&parse_har(&eco.har_bytes(i)).unwrap()).unwrap())
        .collect();
    WideGraph::from_trees(&trees).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_partitions_keys(n in 2usize..300, fraction in 0.01f64..0.99, seed in any::<u64>()) {
        let keys = keys(n);
        let spec = SplitSpec { train_fraction: fraction, seed, stratified: false };
        let a = split(&keys, &spec, None).unwrap();
        prop_assert_eq!(a.train.len(), train_count(fraction, n));
        prop_assert_eq!(a.train.len() + a.test.len(), n);
        let all: BTreeSet<&DocKey> = a.train.iter().chain(&a.test).collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(split(&keys, &spec, None).unwrap(), a);

        // Input order does not matter.
        let mut reversed = keys.clone();
        reversed.reverse();
        prop_assert_eq!(split(&reversed, &spec, None).unwrap().train, split(&keys, &spec, None).unwrap().train);
    }

    #[test]
    fn train_count_is_rounded_up_fraction(n in 0usize..100_000, fraction in 0.0f64..1.0) {
        let k = train_count(fraction, n);
        prop_assert!(k <= n);
        prop_assert!(k as f64 >= fraction * n as f64 - 1e-6);
        prop_assert!((k as f64) < fraction * n as f64 + 1.0);
    }

    #[test]
    fn model_text_round_trips(seed in any::<u64>(), rows in 4usize..40, depth in prop::option::of(1usize..6)) {
        let x: Vec<Vec<f64>> = (0..rows)
            .map(|i| vec![i as f64, ((i * 7919) % 13) as f64 * 0.5, (i % 3) as f64])
            .collect();
        let y: Vec<LabelClass> = (0..rows)
            .map(|i| if (i * 31 + seed as usize) % 5 < 2 { LabelClass::AdTracker } else { LabelClass::Benign })
            .collect();
        prop_assume!(y.iter().any(|c| c.is_positive()) && y.iter().any(|c| !c.is_positive()));
        let matrix = FeatureMatrix::from_rows(&x).unwrap();
        let model = train(&matrix, &y, &ForestParams {
            n_trees: 7,
            max_depth: depth,
            seed,
            class_weight: ClassWeight::Balanced,
            execution: Execution::Sequential,
            ..ForestParams::default()
        }).unwrap();
        let bytes = save_model(&model);
        let loaded = load_model(&bytes).unwrap();
        prop_assert_eq!(save_model(&loaded), bytes);
        for row in &x {
            prop_assert_eq!(loaded.predict(row).unwrap(), model.predict(row).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn graph_file_round_trips(seed in 0u64..1000, sites in 2usize..20, bounce in 0.0f64..0.8) {
        let graph = small_graph(seed, sites, bounce);
        let loaded = load_graph(&save_graph(&graph)).unwrap();
        prop_assert_eq!(&loaded, &graph);
    }

    #[test]
    fn eligibility_counts_add_up(seed in 0u64..1000, sites in 2usize..30, threshold in 0usize..8) {
        let graph = small_graph(seed, sites, 0.4);
        let e = filter_eligible(&graph, threshold);
        prop_assert_eq!(e.total, graph.documents.len());
        prop_assert_eq!(e.kept.len() + e.removed, e.total);
        let degrees = graph.in_degrees();
        for doc in &graph.documents {
            let kept = e.kept.iter().any(|d| d.key() == *doc.0);
            prop_assert_eq!(kept, degrees[&doc.1.parent()] >= threshold);
        }
    }

    #[test]
    fn coverage_is_bounded(seed in 0u64..1000, sites in 2usize..30) {
        let graph = small_graph(seed, sites, 0.5);
        for (node, c) in graph.coverage_all() {
            prop_assert!(!node.is_first_party());
            prop_assert!(c.direct_roots <= c.indirect_roots);
            prop_assert!(c.indirect_roots >= 1);
            prop_assert_eq!(c.total_roots, sites);
        }
    }

    #[test]
    fn structural_modes_agree(seed in 0u64..1000, sites in 3usize..25) {
        let graph = small_graph(seed, sites, 0.3);
        let config = StructConfig { execution: Execution::Sequential, ..StructConfig::default() };
        let sequential = structural_features(&graph, &config).unwrap();
        let parallel = structural_features(&graph, &StructConfig { execution: Execution::Parallel, ..config }).unwrap();
        prop_assert_eq!(sequential, parallel);
    }
}

#[test]
fn run_config_text_round_trips() {
    let base = Path::new("/data/run");
    let mut config = RunConfig::parse(
        "har_dir = captures\nrules = a.txt, b.txt\noverrides = fix.tsv\nn_trees = 40\nmtry = 5\nmax_depth = 9\nstratified = true\nexecution = sequential\nvocab_ranking = tf\n",
        base,
    )
    .unwrap();
    assert_eq!(config.har_dir, PathBuf::from("/data/run/captures"));
    assert_eq!(
        config.rules,
        vec![PathBuf::from("/data/run/a.txt"), PathBuf::from("/data/run/b.txt")]
    );
    assert_eq!(config.forest.execution, Execution::Sequential);
    assert_eq!(RunConfig::parse(&config.to_text(), base).unwrap(), config);

    config.set_execution(Execution::Parallel);
    assert_eq!(config.structural.execution, Execution::Parallel);
    assert_eq!(RunConfig::parse(&config.to_text(), base).unwrap(), config);
}

#[test]
fn ecosystem_config_text_round_trips() {
    let config = EcosystemConfig {
        n_sites: 12,
        bounce_prob: 0.25,
        seed: 99,
        ..EcosystemConfig::default()
    };
    assert_eq!(EcosystemConfig::parse(&config.to_text()).unwrap(), config);
    assert!(EcosystemConfig::parse("bounce_prob = 1.5\n").is_err());
    assert!(EcosystemConfig::parse("n_sites = 0\n").is_err());
    assert!(EcosystemConfig::parse("colour = red\n").is_err());
}
