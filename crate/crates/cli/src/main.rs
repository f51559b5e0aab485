//! `widegraph` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use widegraph::content::{build_vocabulary, VocabRanking, Vocabulary};
use widegraph::filter::{label_graph, read_labels, write_labels, LabelClass, Overrides, RuleSet};
use widegraph::forest::{read_model, train_with_oob, write_model, ClassWeight, ForestParams};
use widegraph::graph::{graph_stats, read_graph, write_graph, DocKey, SubdomainDocument, WideGraph};
use widegraph::ingest::{ingest_dir, read_trees, write_trees};
use widegraph::pipeline::{
    candidate_rules, content_table, filter_eligible, join_features, metrics, read_content_table, read_scores,
    render_candidates, run_all, score_rows, split, write_content_table, write_metrics, write_scores, BiasProxy,
    CandidateInput, Dataset, RunConfig, ScoreRow, SplitSpec, SplitTag, WeightMode, DEFAULT_MIN_IN_DEGREE,
};
use widegraph::structural::{read_struct_matrix, structural_features, write_struct_matrix, StructConfig};
use widegraph::synth::{generate, EcosystemConfig};
use widegraph::Execution;

#[derive(Parser)]
#[command(
    name = "widegraph",
    version,
    about = "Third-party tracker detection from cross-site request graphs"
)]
struct Cli {
    /// Override the execution mode (sequential|parallel).
    #[arg(long, global = true)]
    execution: Option<Execution>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a directory of HAR files into dependency trees.
    Ingest {
        #[arg(long)]
        har_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build or inspect the merged graph.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Extract per-node or per-document features.
    #[command(subcommand)]
    Features(FeaturesCommand),
    /// Label graph documents with filter-list rules.
    Label {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "rules", required = true, num_args = 1..)]
        rules: Vec<PathBuf>,
        #[arg(long)]
        overrides: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a random forest on the train split of a feature table.
    Train {
        #[command(flatten)]
        features: FeatureInputs,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 250)]
        trees: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Features per split; defaults to the rounded-up square root.
        #[arg(long)]
        mtry: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 2)]
        min_samples_split: usize,
        #[arg(long, default_value = "none")]
        class_weight: ClassWeight,
        /// Write out-of-bag scores of the training rows here.
        #[arg(long)]
        oob_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score documents with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        features: FeatureInputs,
        #[arg(long, value_enum, default_value_t = Rows::All)]
        rows: Rows,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the test split against labels.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        features: FeatureInputs,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long, default_value = "sites")]
        bias_proxy: BiasProxy,
        /// Also report metrics with manually corrected labels.
        #[arg(long)]
        overrides: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn high-scoring unlisted hosts into candidate filter rules.
    EmitRules {
        #[arg(long = "scores", required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "rules", required = true, num_args = 1..)]
        rules: Vec<PathBuf>,
        /// Keep only the first N candidates.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with known ground truth.
    Synth {
        /// key = value file; defaults are used for unset keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the whole pipeline from a key = value config file.
    RunAll {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Merge dependency trees into one graph.
    Build {
        #[arg(long)]
        trees: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary statistics.
    Stats {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Recursive neighborhood features per third-party node.
    Structural {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 0.95)]
        prune: f64,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// TF-IDF and URL features per eligible document, with split tags.
    Content(ContentArgs),
}

#[derive(Args)]
struct ContentArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1000)]
    vocab_size: usize,
    #[arg(long, default_value = "df")]
    vocab_ranking: VocabRanking,
    #[arg(long)]
    clamp_idf: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_IN_DEGREE)]
    min_in_degree: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Split each class separately; needs --labels.
    #[arg(long, requires = "labels")]
    stratified: bool,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Reuse an existing vocabulary instead of building one from the train split.
    #[arg(long, conflicts_with = "vocab_out")]
    vocab: Option<PathBuf>,
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeatureInputs {
    /// Content table from `features content`.
    #[arg(long)]
    content: PathBuf,
    /// Structural matrices from `features structural`.
    #[arg(long = "structural", num_args = 1..)]
    structural: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rows {
    Train,
    Test,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Biased,
    Unbiased,
    Both,
}

/// Bad combination of arguments detected after parsing.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already embed their cause in the message.
            let mut message = e.to_string();
            for cause in e.chain().skip(1) {
                let text = cause.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
            }
            eprintln!("error: {message}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = cli.execution.unwrap_or_default();
    match cli.command {
        Command::Ingest { har_dir, out } => {
            let report = ingest_dir(&har_dir, exec)?;
            for (path, err) in &report.failed {
                eprintln!("skipped {}: {err}", path.display());
            }
            if report.trees.is_empty() {
                bail!("no usable sessions in {}", har_dir.display());
            }
            write_trees(&out, &report.trees)?;
            println!(
                "sessions {} failed {} skipped_entries {}",
                report.trees.len(),
                report.failed.len(),
                report.skipped.total()
            );
        }
        Command::Graph(GraphCommand::Build { trees, out }) => {
            let trees = read_trees(&trees)?;
            let graph = WideGraph::from_trees(&trees)?;
            write_graph(&out, &graph)?;
            println!("nodes {} edges {}", graph.nodes.len(), graph.edges.len());
        }
        Command::Graph(GraphCommand::Stats { graph, top }) => {
            print!("{}", graph_stats(&read_graph(&graph)?, top));
        }
        Command::Features(FeaturesCommand::Structural {
            graph,
            depth,
            prune,
            directed,
            out,
        }) => {
            if !(0.0..=1.0).contains(&prune) {
                return Err(UsageError(format!("--prune {prune} not in [0, 1]")).into());
            }
            let config = StructConfig {
                depth,
                prune_threshold: prune,
                directed,
                execution: exec,
            };
            let matrix = structural_features(&read_graph(&graph)?, &config)?;
            write_struct_matrix(&out, &matrix)?;
            println!("rows {} columns {}", matrix.rows.len(), matrix.columns.len());
        }
        Command::Features(FeaturesCommand::Content(args)) => content(args, exec)?,
        Command::Label {
            graph,
            rules,
            overrides,
            out,
        } => {
            let graph = read_graph(&graph)?;
            let rules = RuleSet::read_files(&rules)?;
            let overrides = overrides.as_deref().map(Overrides::read).transpose()?;
            let labeled = label_graph(&rules, &graph, overrides.as_ref(), exec);
            write_labels(&out, &labeled)?;
            let trackers = labeled.iter().filter(|l| l.label.class.is_positive()).count();
            println!(
                "documents {} adtracker {} benign {} skipped_rules {}",
                labeled.len(),
                trackers,
                labeled.len() - trackers,
                rules.skipped()
            );
        }
        Command::Train {
            features,
            labels,
            trees,
            seed,
            mtry,
            max_depth,
            min_samples_split,
            class_weight,
            oob_out,
            out,
        } => {
            let dataset = load_dataset(&features)?;
            let labels = read_labels(&labels)?;
            let rows = dataset.rows_in(SplitTag::Train);
            let y = dataset.labels_for(&rows, &labels)?;
            let params = ForestParams {
                n_trees: trees,
                mtry,
                max_depth,
                min_samples_split,
                seed,
                class_weight,
                execution: exec,
            };
            let trained = train_with_oob(&dataset.subset(&rows), &y, &params)?;
            write_model(&out, &trained.model)?;
            if let Some(path) = oob_out {
                let scores: Vec<ScoreRow> = rows
                    .iter()
                    .zip(&trained.oob_scores)
                    .filter_map(|(&r, s)| {
                        s.map(|score| ScoreRow {
                            key: dataset.meta[r].key.clone(),
                            score,
                            label: if score > 0.5 {
                                LabelClass::AdTracker
                            } else {
                                LabelClass::Benign
                            },
                        })
                    })
                    .collect();
                write_scores(&path, &scores)?;
            }
            println!(
                "trained {} trees on {} rows x {} features",
                trees,
                rows.len(),
                dataset.names.len()
            );
        }
        Command::Predict {
            model,
            features,
            rows,
            out,
        } => {
            let model = read_model(&model)?;
            let dataset = load_dataset(&features)?;
            let rows: Vec<usize> = match rows {
                Rows::Train => dataset.rows_in(SplitTag::Train),
                Rows::Test => dataset.rows_in(SplitTag::Test),
                Rows::All => (0..dataset.meta.len()).collect(),
            };
            let scored = score_rows(&model, &dataset, &rows, exec)?;
            let out_rows: Vec<ScoreRow> = scored
                .iter()
                .map(|s| ScoreRow {
                    key: s.key.clone(),
                    score: s.prediction.score,
                    label: s.prediction.label,
                })
                .collect();
            write_scores(&out, &out_rows)?;
            let positive = out_rows.iter().filter(|r| r.label.is_positive()).count();
            println!("scored {} documents, {} predicted adtracker", out_rows.len(), positive);
        }
        Command::Evaluate {
            model,
            features,
            labels,
            mode,
            bias_proxy,
            overrides,
            out,
        } => {
            let model = read_model(&model)?;
            let dataset = load_dataset(&features)?;
            let labels = read_labels(&labels)?;
            let overrides = overrides.as_deref().map(Overrides::read).transpose()?;
            let scored = score_rows(&model, &dataset, &dataset.rows_in(SplitTag::Test), exec)?;
            if scored.is_empty() {
                bail!("feature table has no test rows");
            }
            let modes = match mode {
                ModeArg::Biased => vec![WeightMode::Biased],
                ModeArg::Unbiased => vec![WeightMode::Unbiased],
                ModeArg::Both => vec![WeightMode::Biased, WeightMode::Unbiased],
            };
            let mut reports = Vec::new();
            for corrected in std::iter::once(None).chain(overrides.as_ref().map(Some)) {
                for &m in &modes {
                    reports.push(metrics(&scored, &labels, m, bias_proxy, corrected)?);
                }
            }
            for r in &reports {
                println!("{r}");
            }
            if let Some(path) = out {
                write_metrics(&path, &reports)?;
            }
        }
        Command::EmitRules {
            scores,
            graph,
            rules,
            top,
            out,
        } => {
            let graph = read_graph(&graph)?;
            let rules = RuleSet::read_files(&rules)?;
            let mut by_key: BTreeMap<DocKey, ScoreRow> = BTreeMap::new();
            for path in &scores {
                for row in read_scores(path)? {
                    by_key.insert(row.key.clone(), row);
                }
            }
            let documents: BTreeMap<DocKey, &SubdomainDocument> =
                graph.documents.values().map(|d| (d.key(), d)).collect();
            let coverage = graph.coverage_all();
            let mut inputs = Vec::new();
            for (key, row) in &by_key {
                let document = documents
                    .get(key)
                    .with_context(|| format!("scored document {key} is not in the graph"))?;
                inputs.push(CandidateInput {
                    document,
                    score: row.score,
                    label: row.label,
                    coverage: *coverage
                        .get(&document.parent())
                        .with_context(|| format!("no coverage for {}", document.parent()))?,
                });
            }
            let mut candidates = candidate_rules(&inputs, &rules);
            if let Some(n) = top {
                candidates.truncate(n);
            }
            let text = render_candidates(&candidates);
            match out {
                Some(path) => {
                    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                    println!("{} candidate rules", candidates.len());
                }
                None => print!("{text}"),
            }
        }
        Command::Synth { config, seed, out_dir } => {
            let mut c = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    EcosystemConfig::parse(&text)?
                }
                None => EcosystemConfig::default(),
            };
            if let Some(s) = seed {
                c.seed = s;
            }
            let summary = generate(&c)?.write(&out_dir)?;
            println!(
                "har_files {} requests {} trackers {} benign {}",
                summary.har_files, summary.requests, summary.trackers, summary.benign
            );
        }
        Command::RunAll { config } => {
            let mut c = RunConfig::read(&config)?;
            if let Some(e) = cli.execution {
                c.set_execution(e);
            }
            print!("{}", run_all(&c)?);
        }
    }
    Ok(())
}

fn content(args: ContentArgs, exec: Execution) -> Result<()> {
    if !(args.train_fraction > 0.0 && args.train_fraction < 1.0) {
        return Err(UsageError(format!("--train-fraction {} not in (0, 1)", args.train_fraction)).into());
    }
    let graph = read_graph(&args.graph)?;
    let labels = args.labels.as_deref().map(read_labels).transpose()?;
    let eligible = filter_eligible(&graph, args.min_in_degree);
    if eligible.kept.is_empty() {
        bail!("no document has a parent with in-degree >= {}", args.min_in_degree);
    }
    let keys: Vec<DocKey> = eligible.kept.iter().map(|d| d.key()).collect();
    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        seed: args.seed,
        stratified: args.stratified,
    };
    let assignment = split(&keys, &spec, labels.as_ref())?;
    let tags = assignment.tags();
    let vocabulary = match &args.vocab {
        Some(path) => Vocabulary::read(path)?,
        None => {
            let train: Vec<&SubdomainDocument> = eligible
                .kept
                .iter()
                .copied()
                .filter(|d| tags.get(&d.key()) == Some(&SplitTag::Train))
                .collect();
            build_vocabulary(&train, args.vocab_size, args.vocab_ranking, exec)?
        }
    };
    if let Some(path) = &args.vocab_out {
        vocabulary.write(path)?;
    }
    let table = content_table(&eligible.kept, &tags, &vocabulary, args.clamp_idf, exec)?;
    write_content_table(&args.out, &table)?;
    println!(
        "documents {} removed {} train {} test {} features {}",
        eligible.kept.len(),
        eligible.removed,
        assignment.train.len(),
        assignment.test.len(),
        table.names.len()
    );
    Ok(())
}

fn load_dataset(inputs: &FeatureInputs) -> Result<Dataset> {
    let content = read_content_table(&inputs.content)?;
    let structural = inputs
        .structural
        .iter()
        .map(|p| read_struct_matrix(p))
        .collect::<widegraph::Result<Vec<_>>>()?;
    Ok(join_features(content, &structural)?)
}
