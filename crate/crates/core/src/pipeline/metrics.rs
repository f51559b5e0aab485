//! Weighted confusion-matrix metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dataset, SplitTag};
use crate::exec::{self, Execution};
use crate::filter::{Label, LabelClass, Overrides};
use crate::forest::{ForestModel, Prediction};
use crate::graph::DocKey;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Documents weighted by popularity (see [`BiasProxy`]).
    Biased,
    /// Every document weighs 1.
    Unbiased,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biased" => Ok(WeightMode::Biased),
            "unbiased" => Ok(WeightMode::Unbiased),
            other => Err(Error::InvalidArgument(format!(
                "weight mode {other:?} (expected biased|unbiased)"
            ))),
        }
    }
}

/// Popularity measure used by [`WeightMode::Biased`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasProxy {
    /// Distinct first parties that reached the document.
    #[default]
    Sites,
    /// Raw URL occurrence count.
    Urls,
}

impl BiasProxy {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasProxy::Sites => "sites",
            BiasProxy::Urls => "urls",
        }
    }
}

impl FromStr for BiasProxy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sites" => Ok(BiasProxy::Sites),
            "urls" => Ok(BiasProxy::Urls),
            other => Err(Error::InvalidArgument(format!(
                "bias proxy {other:?} (expected sites|urls)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub key: DocKey,
    pub sites: u64,
    pub urls: u64,
    pub prediction: Prediction,
}

pub fn score_rows(model: &ForestModel, dataset: &Dataset, rows: &[usize], exec: Execution) -> Result<Vec<Scored>> {
    exec::map_slice(exec, rows, |&r| {
        let meta = &dataset.meta[r];
        model.predict(dataset.matrix.row(r)).map(|prediction| Scored {
            key: meta.key.clone(),
            sites: meta.sites,
            urls: meta.urls,
            prediction,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: WeightMode,
    pub proxy: BiasProxy,
    pub corrected: bool,
    /// `confusion[actual][predicted]`, index 0 benign, 1 adtracker.
    pub confusion: [[f64; 2]; 2],
    pub benign: ClassMetrics,
    pub adtracker: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub accuracy: f64,
    pub total: f64,
    pub documents: usize,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl MetricsReport {
    pub fn mode_name(&self) -> String {
        match self.mode {
            WeightMode::Unbiased => "unbiased".into(),
            WeightMode::Biased => format!("biased-{}", self.proxy.as_str()),
        }
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let c = &self.confusion;
        vec![
            ("accuracy", self.accuracy),
            ("benign_precision", self.benign.precision),
            ("benign_recall", self.benign.recall),
            ("adtracker_precision", self.adtracker.precision),
            ("adtracker_recall", self.adtracker.recall),
            ("macro_precision", self.macro_precision),
            ("macro_recall", self.macro_recall),
            ("true_benign", c[0][0]),
            ("false_adtracker", c[0][1]),
            ("false_benign", c[1][0]),
            ("true_adtracker", c[1][1]),
            ("total_weight", self.total),
            ("documents", self.documents as f64),
        ]
    }

    fn from_confusion(
        mode: WeightMode,
        proxy: BiasProxy,
        corrected: bool,
        confusion: [[f64; 2]; 2],
        documents: usize,
    ) -> Self {
        let c = confusion;
        let total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
        let class = |i: usize| ClassMetrics {
            precision: ratio(c[i][i], c[0][i] + c[1][i]),
            recall: ratio(c[i][i], c[i][0] + c[i][1]),
        };
        let (benign, adtracker) = (class(0), class(1));
        MetricsReport {
            mode,
            proxy,
            corrected,
            confusion,
            macro_precision: (benign.precision + adtracker.precision) / 2.0,
            macro_recall: (benign.recall + adtracker.recall) / 2.0,
            accuracy: ratio(c[0][0] + c[1][1], total),
            benign,
            adtracker,
            total,
            documents,
        }
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let corrected = if self.corrected { ", corrected" } else { "" };
        writeln!(
            f,
            "{}{corrected}: {} documents, total weight {}",
            self.mode_name(),
            self.documents,
            self.total
        )?;
        writeln!(f, "  {:<10} {:>9} {:>9}", "", "precision", "recall")?;
        writeln!(
            f,
            "  {:<10} {:>9.4} {:>9.4}",
            "benign", self.benign.precision, self.benign.recall
        )?;
        writeln!(
            f,
            "  {:<10} {:>9.4} {:>9.4}",
            "adtracker", self.adtracker.precision, self.adtracker.recall
        )?;
        writeln!(
            f,
            "  {:<10} {:>9.4} {:>9.4}",
            "macro avg", self.macro_precision, self.macro_recall
        )?;
        writeln!(f, "  accuracy {:.4}", self.accuracy)?;
        let c = &self.confusion;
        writeln!(
            f,
            "  confusion (actual x predicted): benign [{} {}] adtracker [{} {}]",
            c[0][0], c[0][1], c[1][0], c[1][1]
        )
    }
}

/// Scores predictions against labels. With `overrides`, labels are corrected
/// before scoring.
pub fn metrics(
    scored: &[Scored],
    labels: &BTreeMap<DocKey, Label>,
    mode: WeightMode,
    proxy: BiasProxy,
    overrides: Option<&Overrides>,
) -> Result<MetricsReport> {
    let mut confusion = [[0.0; 2]; 2];
    for s in scored {
        let mut label = *labels.get(&s.key).ok_or_else(|| Error::MissingData {
            what: "label",
            document: s.key.to_string(),
        })?;
        if let Some(o) = overrides {
            label = o.apply(&s.key.host, label);
        }
        let weight = match (mode, proxy) {
            (WeightMode::Unbiased, _) => 1.0,
            (WeightMode::Biased, BiasProxy::Sites) => s.sites as f64,
            (WeightMode::Biased, BiasProxy::Urls) => s.urls as f64,
        };
        let actual = usize::from(label.class == LabelClass::AdTracker);
        let predicted = usize::from(s.prediction.label == LabelClass::AdTracker);
        confusion[actual][predicted] += weight;
    }
    Ok(MetricsReport::from_confusion(
        mode,
        proxy,
        overrides.is_some(),
        confusion,
        scored.len(),
    ))
}

/// Predicts the test rows of `dataset` and scores them.
pub fn evaluate(
    model: &ForestModel,
    dataset: &Dataset,
    labels: &BTreeMap<DocKey, Label>,
    mode: WeightMode,
    proxy: BiasProxy,
    overrides: Option<&Overrides>,
    exec: Execution,
) -> Result<MetricsReport> {
    let scored = score_rows(model, dataset, &dataset.rows_in(SplitTag::Test), exec)?;
    metrics(&scored, labels, mode, proxy, overrides)
}
