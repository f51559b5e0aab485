//! `key = value` run configuration.

use std::path::{Path, PathBuf};

use super::{BiasProxy, SplitSpec, DEFAULT_MIN_IN_DEGREE};
use crate::content::VocabRanking;
use crate::exec::Execution;
use crate::forest::{ClassWeight, ForestParams};
use crate::structural::StructConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub har_dir: PathBuf,
    pub out_dir: PathBuf,
    pub rules: Vec<PathBuf>,
    pub overrides: Option<PathBuf>,
    pub structural: StructConfig,
    pub vocab_size: usize,
    pub vocab_ranking: VocabRanking,
    pub clamp_idf: bool,
    pub min_in_degree: usize,
    pub split: SplitSpec,
    pub forest: ForestParams,
    pub bias_proxy: BiasProxy,
    pub top_keywords: usize,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            har_dir: PathBuf::from("har"),
            out_dir: PathBuf::from("out"),
            rules: Vec::new(),
            overrides: None,
            structural: StructConfig::default(),
            vocab_size: 1000,
            vocab_ranking: VocabRanking::DocumentFrequency,
            clamp_idf: false,
            min_in_degree: DEFAULT_MIN_IN_DEGREE,
            split: SplitSpec::default(),
            forest: ForestParams {
                seed: 1,
                ..ForestParams::default()
            },
            bias_proxy: BiasProxy::Sites,
            top_keywords: 20,
            execution: Execution::default(),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true|false, got {value:?}"))),
    }
}

fn parse_optional(key: &str, value: &str, none: &str) -> Result<Option<usize>> {
    if value == none {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

impl RunConfig {
    /// Parses `key = value` lines (`#` comments). Relative paths resolve
    /// against `base`. Unset keys keep their defaults.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        let path = |v: &str| base.join(v);
        c.har_dir = base.join(&c.har_dir);
        c.out_dir = base.join(&c.out_dir);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "har_dir" => c.har_dir = path(value),
                "out_dir" => c.out_dir = path(value),
                "rules" => {
                    c.rules = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(path)
                        .collect()
                }
                "overrides" => c.overrides = (!value.is_empty() && value != "none").then(|| path(value)),
                "depth" => c.structural.depth = parse_value(key, value)?,
                "prune" => c.structural.prune_threshold = parse_value(key, value)?,
                "directed" => c.structural.directed = parse_bool(key, value)?,
                "vocab_size" => c.vocab_size = parse_value(key, value)?,
                "vocab_ranking" => c.vocab_ranking = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                "clamp_idf" => c.clamp_idf = parse_bool(key, value)?,
                "min_in_degree" => c.min_in_degree = parse_value(key, value)?,
                "train_fraction" => c.split.train_fraction = parse_value(key, value)?,
                "split_seed" => c.split.seed = parse_value(key, value)?,
                "stratified" => c.split.stratified = parse_bool(key, value)?,
                "n_trees" => c.forest.n_trees = parse_value(key, value)?,
                "mtry" => c.forest.mtry = parse_optional(key, value, "auto")?,
                "max_depth" => c.forest.max_depth = parse_optional(key, value, "none")?,
                "min_samples_split" => c.forest.min_samples_split = parse_value(key, value)?,
                "seed" => c.forest.seed = parse_value(key, value)?,
                "class_weight" => {
                    c.forest.class_weight = value.parse::<ClassWeight>().map_err(|e| Error::Config(e.to_string()))?
                }
                "bias_proxy" => c.bias_proxy = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                "top_keywords" => c.top_keywords = parse_value(key, value)?,
                "execution" => c.execution = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        c.set_execution(c.execution);
        Ok(c)
    }

    /// Sets the execution mode of every stage.
    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
        self.structural.execution = execution;
        self.forest.execution = execution;
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Every key with its current value, in a form [`RunConfig::parse`] reads.
    pub fn to_text(&self) -> String {
        let list = |p: &[PathBuf]| p.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        let opt = |v: Option<usize>, none: &str| v.map_or(none.to_string(), |n| n.to_string());
        let ranking = match self.vocab_ranking {
            VocabRanking::DocumentFrequency => "df",
            VocabRanking::TermFrequency => "tf",
        };
        let execution = match self.execution {
            Execution::Sequential => "sequential",
            Execution::Parallel => "parallel",
        };
        [
            format!("har_dir = {}", self.har_dir.display()),
            format!("out_dir = {}", self.out_dir.display()),
            format!("rules = {}", list(&self.rules)),
            format!(
                "overrides = {}",
                self.overrides
                    .as_ref()
                    .map_or("none".into(), |p| p.display().to_string())
            ),
            format!("depth = {}", self.structural.depth),
            format!("prune = {}", self.structural.prune_threshold),
            format!("directed = {}", self.structural.directed),
            format!("vocab_size = {}", self.vocab_size),
            format!("vocab_ranking = {ranking}"),
            format!("clamp_idf = {}", self.clamp_idf),
            format!("min_in_degree = {}", self.min_in_degree),
            format!("train_fraction = {}", self.split.train_fraction),
            format!("split_seed = {}", self.split.seed),
            format!("stratified = {}", self.split.stratified),
            format!("n_trees = {}", self.forest.n_trees),
            format!("mtry = {}", opt(self.forest.mtry, "auto")),
            format!("max_depth = {}", opt(self.forest.max_depth, "none")),
            format!("min_samples_split = {}", self.forest.min_samples_split),
            format!("seed = {}", self.forest.seed),
            format!("class_weight = {}", self.forest.class_weight),
            format!("bias_proxy = {}", self.bias_proxy.as_str()),
            format!("top_keywords = {}", self.top_keywords),
            format!("execution = {execution}"),
        ]
        .iter()
        .map(|l| format!("{l}\n"))
        .collect()
    }
}
