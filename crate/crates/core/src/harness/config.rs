use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierConfig, ClassifierKind};
use crate::error::{Error, Result};
use crate::features::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Markdown,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Markdown => "markdown",
            OutputFormat::Json => "json",
        })
    }
}

/// Everything one benchmark run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    /// Bundled English list when `None`.
    pub stop_word_path: Option<PathBuf>,
    pub test_fraction: f64,
    pub seed: u64,
    /// Overrides `seed` when present; results are averaged over the list.
    pub seeds_for_averaging: Option<Vec<u64>>,
    /// Scheme for every classifier except naive Bayes, which always gets counts.
    pub feature_scheme: Scheme,
    /// Fit vocabulary and IDF on the whole corpus instead of the training split.
    pub fit_on_all: bool,
    /// Label-stratified hold-out split.
    pub stratified: bool,
    /// k-fold cross-validation instead of a single hold-out split.
    pub folds: Option<usize>,
    pub classifiers: Vec<ClassifierKind>,
    pub classifier_config: ClassifierConfig,
    pub output_format: OutputFormat,
    /// Write every trained model here as versioned JSON.
    pub model_dir: Option<PathBuf>,
    /// Write the first split's feature matrix here as JSONL.
    pub feature_dump: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dataset_path: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            dataset_path: dataset_path.into(),
            stop_word_path: None,
            test_fraction: 0.2,
            seed: 42,
            seeds_for_averaging: None,
            feature_scheme: Scheme::Tfidf,
            fit_on_all: false,
            stratified: false,
            folds: None,
            classifiers: ClassifierKind::ALL.to_vec(),
            classifier_config: ClassifierConfig::default(),
            output_format: OutputFormat::Markdown,
            model_dir: None,
            feature_dump: None,
        }
    }

    /// Seeds the experiment is repeated over.
    pub fn seeds(&self) -> Vec<u64> {
        self.seeds_for_averaging.clone().unwrap_or_else(|| vec![self.seed])
    }

    /// The scheme `kind` is trained on.
    pub fn scheme_for(&self, kind: ClassifierKind) -> Scheme {
        if kind == ClassifierKind::NaiveBayes {
            Scheme::Count
        } else {
            self.feature_scheme
        }
    }

    /// Applies one `key = value` setting. Keys match the command-line flags;
    /// dashes and underscores are interchangeable, and `family.name` keys set
    /// classifier hyperparameters (`knn.k = 25`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        if key.contains('.') {
            return self.classifier_config.set(&key, value);
        }
        match key.as_str() {
            "data" | "dataset" | "dataset_path" => self.dataset_path = PathBuf::from(value),
            "stop_words" | "stop_word_path" => self.stop_word_path = Some(PathBuf::from(value)),
            "test_fraction" => self.test_fraction = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "seeds" | "seeds_for_averaging" => self.seeds_for_averaging = Some(parse_list(&key, value)?),
            "scheme" | "feature_scheme" => self.feature_scheme = value.parse()?,
            "fit_on_all" => self.fit_on_all = parse_bool(&key, value)?,
            "stratified" => self.stratified = parse_bool(&key, value)?,
            "folds" => self.folds = Some(parse(&key, value)?),
            "classifiers" => {
                self.classifiers = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "format" | "output_format" => self.output_format = value.parse()?,
            "save_models" | "model_dir" => self.model_dir = Some(PathBuf::from(value)),
            "dump_features" | "feature_dump" => self.feature_dump = Some(PathBuf::from(value)),
            _ => return Err(Error::invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat config file: one `key = value` per line, `#` comments,
    /// blank lines ignored.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
                row: i + 1,
                reason: format!("expected key = value, got {line:?}"),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        if self.classifiers.is_empty() {
            return Err(Error::invalid("no classifiers selected"));
        }
        if matches!(&self.seeds_for_averaging, Some(s) if s.is_empty()) {
            return Err(Error::invalid("seed list is empty"));
        }
        if matches!(self.folds, Some(k) if k < 2) {
            return Err(Error::invalid("folds must be at least 2"));
        }
        for &kind in &self.classifiers {
            self.classifier_config.validate(kind)?;
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "" | "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::invalid(format!("bad value {value:?} for {key}"))),
    }
}
