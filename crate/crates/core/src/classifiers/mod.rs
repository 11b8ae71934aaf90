//! Eight classifier families behind one `fit` / `predict` interface.
//!
//! Every model scores only the labels seen during training (`classes`, kept
//! in fixed label order). The predicted label is the arg-max of the scores,
//! with ties going to the earlier label.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::EmotionLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVec};
use crate::scalar::Scalar;

pub mod boost;
pub mod bpn;
pub mod forest;
pub mod knn;
pub mod linear;
pub mod logistic;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

pub use boost::{BoostConfig, BoostModel};
pub use bpn::{Bpn, BpnConfig};
pub use forest::{forest_vote, Forest, ForestConfig};
pub use knn::{knn_vote, Distance, KnnConfig, KnnModel};
pub use linear::LinearModel;
pub use logistic::{lr_update, softmax_scores, LogisticConfig, LogisticModel, LrMode};
pub use naive_bayes::{NaiveBayes, NaiveBayesConfig};
pub use svm::{hinge_step, SgdConfig, SgdLoss, SvmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    NaiveBayes,
    LogisticRegression,
    LinearSvm,
    SgdLinear,
    Knn,
    RandomForest,
    GradientBoost,
    Bpn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
        ClassifierKind::LinearSvm,
        ClassifierKind::SgdLinear,
        ClassifierKind::Knn,
        ClassifierKind::RandomForest,
        ClassifierKind::GradientBoost,
        ClassifierKind::Bpn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::SgdLinear => "sgd_linear",
            ClassifierKind::Knn => "knn",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GradientBoost => "gradient_boost",
            ClassifierKind::Bpn => "bpn",
        }
    }

    /// Human-readable name for report tables.
    pub fn display_name(self, config: &ClassifierConfig) -> String {
        match self {
            ClassifierKind::NaiveBayes => "Naïve Bayes".into(),
            ClassifierKind::LogisticRegression => "Logistic Regression".into(),
            ClassifierKind::LinearSvm => "Support Vector Machine (SVM)".into(),
            ClassifierKind::SgdLinear => "Stochastic Gradient (SGD)".into(),
            ClassifierKind::Knn => format!("K-Nearest Neighbor (KNN {})", config.knn.k),
            ClassifierKind::RandomForest => format!("Random Forest (RF {})", config.random_forest.n_trees),
            ClassifierKind::GradientBoost => "Gradient Boosting".into(),
            ClassifierKind::Bpn => "Back Propagation Neural Classifier (BPN)".into(),
        }
    }

    /// Families that need at least two distinct training labels.
    pub fn is_discriminative(self) -> bool {
        !matches!(
            self,
            ClassifierKind::NaiveBayes | ClassifierKind::Knn | ClassifierKind::RandomForest
        )
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "naive_bayes" | "nb" => ClassifierKind::NaiveBayes,
            "logistic_regression" | "lr" => ClassifierKind::LogisticRegression,
            "linear_svm" | "svm" => ClassifierKind::LinearSvm,
            "sgd_linear" | "sgd" => ClassifierKind::SgdLinear,
            "knn" => ClassifierKind::Knn,
            "random_forest" | "rf" => ClassifierKind::RandomForest,
            "gradient_boost" | "boost" | "xgboost" => ClassifierKind::GradientBoost,
            "bpn" => ClassifierKind::Bpn,
            other => return Err(Error::invalid(format!("unknown classifier {other:?}"))),
        };
        Ok(k)
    }
}

/// Hyperparameters for every family; only the block matching the fitted kind
/// is used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub naive_bayes: NaiveBayesConfig,
    pub logistic_regression: LogisticConfig,
    pub linear_svm: SvmConfig,
    pub sgd_linear: SgdConfig,
    pub knn: KnnConfig,
    pub random_forest: ForestConfig,
    pub gradient_boost: BoostConfig,
    pub bpn: BpnConfig,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
}

fn parse_optional(key: &str, value: &str) -> Result<Option<usize>> {
    match value.trim().to_ascii_lowercase().as_str() {
        "" | "none" | "unbounded" | "auto" => Ok(None),
        v => parse_num(key, v).map(Some),
    }
}

impl ClassifierConfig {
    /// Sets one hyperparameter from a `family.name` key, e.g. `knn.k`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (family, name) = key
            .split_once('.')
            .ok_or_else(|| Error::invalid(format!("hyperparameter key {key:?} needs a family prefix")))?;
        let kind: ClassifierKind = family.parse()?;
        match (kind, name) {
            (ClassifierKind::NaiveBayes, "alpha") => self.naive_bayes.alpha = parse_num(key, value)?,
            (ClassifierKind::LogisticRegression, "learning_rate") => {
                self.logistic_regression.learning_rate = parse_num(key, value)?
            }
            (ClassifierKind::LogisticRegression, "epochs") => self.logistic_regression.epochs = parse_num(key, value)?,
            (ClassifierKind::LogisticRegression, "mode") => self.logistic_regression.mode = value.parse()?,
            (ClassifierKind::LinearSvm, "lambda") => self.linear_svm.lambda = parse_num(key, value)?,
            (ClassifierKind::LinearSvm, "learning_rate") => self.linear_svm.learning_rate = parse_num(key, value)?,
            (ClassifierKind::LinearSvm, "epochs") => self.linear_svm.epochs = parse_num(key, value)?,
            (ClassifierKind::SgdLinear, "loss") => self.sgd_linear.loss = value.parse()?,
            (ClassifierKind::SgdLinear, "learning_rate") => self.sgd_linear.learning_rate = parse_num(key, value)?,
            (ClassifierKind::SgdLinear, "decay") => self.sgd_linear.decay = parse_num(key, value)?,
            (ClassifierKind::SgdLinear, "epochs") => self.sgd_linear.epochs = parse_num(key, value)?,
            (ClassifierKind::Knn, "k") => self.knn.k = parse_num(key, value)?,
            (ClassifierKind::Knn, "distance") => self.knn.distance = value.parse()?,
            (ClassifierKind::RandomForest, "n_trees") => self.random_forest.n_trees = parse_num(key, value)?,
            (ClassifierKind::RandomForest, "max_depth") => self.random_forest.max_depth = parse_optional(key, value)?,
            (ClassifierKind::RandomForest, "min_samples_split") => {
                self.random_forest.min_samples_split = parse_num(key, value)?
            }
            (ClassifierKind::RandomForest, "features_per_split") => {
                self.random_forest.features_per_split = parse_optional(key, value)?
            }
            (ClassifierKind::GradientBoost, "rounds") => self.gradient_boost.rounds = parse_num(key, value)?,
            (ClassifierKind::GradientBoost, "shrinkage") => self.gradient_boost.shrinkage = parse_num(key, value)?,
            (ClassifierKind::GradientBoost, "tree_depth") => self.gradient_boost.tree_depth = parse_num(key, value)?,
            (ClassifierKind::Bpn, "hidden_units") => self.bpn.hidden_units = parse_num(key, value)?,
            (ClassifierKind::Bpn, "learning_rate") => self.bpn.learning_rate = parse_num(key, value)?,
            (ClassifierKind::Bpn, "epochs") => self.bpn.epochs = parse_num(key, value)?,
            _ => return Err(Error::invalid(format!("unknown hyperparameter {key:?}"))),
        }
        Ok(())
    }

    /// Checks the block for `kind`: counts ≥ 1 and rates > 0.
    pub fn validate(&self, kind: ClassifierKind) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{kind}.{name} must be positive, got {v}")))
            }
        };
        let count = |name: &str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{kind}.{name} must be at least 1")))
            }
        };
        match kind {
            ClassifierKind::NaiveBayes => positive("alpha", self.naive_bayes.alpha),
            ClassifierKind::LogisticRegression => {
                positive("learning_rate", self.logistic_regression.learning_rate)?;
                count("epochs", self.logistic_regression.epochs)
            }
            ClassifierKind::LinearSvm => {
                positive("lambda", self.linear_svm.lambda)?;
                positive("learning_rate", self.linear_svm.learning_rate)?;
                count("epochs", self.linear_svm.epochs)
            }
            ClassifierKind::SgdLinear => {
                positive("learning_rate", self.sgd_linear.learning_rate)?;
                if self.sgd_linear.decay.is_nan() || self.sgd_linear.decay < 0.0 {
                    return Err(Error::invalid("sgd_linear.decay must be non-negative"));
                }
                count("epochs", self.sgd_linear.epochs)
            }
            ClassifierKind::Knn => count("k", self.knn.k),
            ClassifierKind::RandomForest => {
                let c = &self.random_forest;
                count("n_trees", c.n_trees)?;
                count("min_samples_split", c.min_samples_split)?;
                c.max_depth.map_or(Ok(()), |d| count("max_depth", d))?;
                c.features_per_split.map_or(Ok(()), |f| count("features_per_split", f))
            }
            ClassifierKind::GradientBoost => {
                count("rounds", self.gradient_boost.rounds)?;
                positive("shrinkage", self.gradient_boost.shrinkage)?;
                count("tree_depth", self.gradient_boost.tree_depth)
            }
            ClassifierKind::Bpn => {
                count("hidden_units", self.bpn.hidden_units)?;
                positive("learning_rate", self.bpn.learning_rate)?;
                count("epochs", self.bpn.epochs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
#[serde(bound = "")]
pub enum ModelParams<F: Scalar> {
    NaiveBayes(NaiveBayes<F>),
    LogisticRegression(LogisticModel<F>),
    LinearSvm(LinearModel<F>),
    SgdLinear(svm::SgdModel<F>),
    Knn(KnnModel<F>),
    RandomForest(Forest<F>),
    GradientBoost(BoostModel<F>),
    Bpn(Bpn<F>),
}

/// A fitted classifier. Immutable after `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrainedModel<F: Scalar> {
    pub kind: ClassifierKind,
    pub dim: usize,
    pub classes: Vec<EmotionLabel>,
    pub params: ModelParams<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictOutcome<F> {
    pub label: EmotionLabel,
    pub scores: Vec<(EmotionLabel, F)>,
}

/// Index of the largest score; the earliest index wins ties.
pub fn argmax<F: Scalar>(scores: &[F]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Training labels mapped onto the sorted set of distinct labels.
pub(crate) fn encode_labels(y: &[EmotionLabel]) -> (Vec<EmotionLabel>, Vec<usize>) {
    let mut classes: Vec<EmotionLabel> = y.to_vec();
    classes.sort();
    classes.dedup();
    let encoded = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (classes, encoded)
}

pub fn fit<F: Scalar>(
    kind: ClassifierKind,
    config: &ClassifierConfig,
    x: &FeatureMatrix<F>,
    y: &[EmotionLabel],
    seed: u64,
) -> Result<TrainedModel<F>> {
    config.validate(kind)?;
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::invalid("cannot fit on zero examples"));
    }
    if let Some(r) = x.rows.iter().find(|r| r.dim() != x.dim) {
        return Err(Error::DimensionMismatch {
            expected: x.dim,
            actual: r.dim(),
        });
    }
    let (classes, yi) = encode_labels(y);
    if kind.is_discriminative() && classes.len() < 2 {
        return Err(Error::SingleLabel);
    }
    let k = classes.len();
    let params = match kind {
        ClassifierKind::NaiveBayes => ModelParams::NaiveBayes(NaiveBayes::fit(&config.naive_bayes, x, &yi, k)),
        ClassifierKind::LogisticRegression => {
            ModelParams::LogisticRegression(LogisticModel::fit(&config.logistic_regression, x, &yi, k, seed))
        }
        ClassifierKind::LinearSvm => ModelParams::LinearSvm(svm::fit_svm(&config.linear_svm, x, &yi, k, seed)),
        ClassifierKind::SgdLinear => ModelParams::SgdLinear(svm::fit_sgd(&config.sgd_linear, x, &yi, k, seed)),
        ClassifierKind::Knn => ModelParams::Knn(KnnModel::fit(&config.knn, x, &yi, k)?),
        ClassifierKind::RandomForest => ModelParams::RandomForest(Forest::fit(&config.random_forest, x, &yi, k, seed)),
        ClassifierKind::GradientBoost => ModelParams::GradientBoost(BoostModel::fit(&config.gradient_boost, x, &yi, k)),
        ClassifierKind::Bpn => ModelParams::Bpn(Bpn::fit(&config.bpn, x, &yi, k, seed)),
    };
    Ok(TrainedModel {
        kind,
        dim: x.dim,
        classes,
        params,
    })
}

impl<F: Scalar> TrainedModel<F> {
    /// Raw per-class scores in `classes` order.
    pub fn scores(&self, x: &SparseVec<F>) -> Result<Vec<F>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(match &self.params {
            ModelParams::NaiveBayes(m) => m.posteriors(x),
            ModelParams::LogisticRegression(m) => m.probabilities(x),
            ModelParams::LinearSvm(m) => m.margins(x),
            ModelParams::SgdLinear(m) => m.scores(x),
            ModelParams::Knn(m) => m.vote_scores(x),
            ModelParams::RandomForest(m) => m.vote_shares(x),
            ModelParams::GradientBoost(m) => m.probabilities(x),
            ModelParams::Bpn(m) => m.forward(x).1,
        })
    }

    pub fn predict(&self, x: &SparseVec<F>) -> Result<PredictOutcome<F>> {
        let scores = self.scores(x)?;
        let label = self.classes[argmax(&scores)];
        Ok(PredictOutcome {
            label,
            scores: self.classes.iter().copied().zip(scores).collect(),
        })
    }

    pub fn predict_label(&self, x: &SparseVec<F>) -> Result<EmotionLabel> {
        Ok(self.predict(x)?.label)
    }

    /// Whether this family's scores are a probability distribution.
    pub fn is_probabilistic(&self) -> bool {
        match &self.params {
            ModelParams::NaiveBayes(_)
            | ModelParams::LogisticRegression(_)
            | ModelParams::GradientBoost(_)
            | ModelParams::Bpn(_)
            | ModelParams::RandomForest(_) => true,
            ModelParams::SgdLinear(m) => m.loss == SgdLoss::Log,
            ModelParams::LinearSvm(_) | ModelParams::Knn(_) => false,
        }
    }

    /// `nb_posteriors` for a naive Bayes model, keyed by label.
    pub fn nb_posteriors(&self, x: &SparseVec<F>) -> Result<Vec<(EmotionLabel, F)>> {
        match &self.params {
            ModelParams::NaiveBayes(m) => Ok(self.classes.iter().copied().zip(m.posteriors(x)).collect()),
            _ => Err(Error::invalid(format!("{} model has no naive Bayes posteriors", self.kind))),
        }
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelFile<F: Scalar> {
    pub version: u32,
    pub config: ClassifierConfig,
    pub model: TrainedModel<F>,
}

pub fn save_model<F: Scalar>(path: impl AsRef<Path>, model: &TrainedModel<F>, config: &ClassifierConfig) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        model: model.clone(),
    };
    let text = serde_json::to_string(&file)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model<F: Scalar>(path: impl AsRef<Path>) -> Result<ModelFile<F>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile<F> = serde_json::from_str(&text)?;
    if file.version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersion(file.version));
    }
    Ok(file)
}

/// Serde adapter storing a dense weight vector as `{dim, indices, values}`
/// over its non-zero entries.
pub(crate) mod sparse_weights {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Scalar;

    #[derive(Serialize, Deserialize)]
    struct Repr<F> {
        dim: usize,
        indices: Vec<usize>,
        values: Vec<F>,
    }

    pub fn serialize<F: Scalar, S: Serializer>(rows: &[Vec<F>], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Repr<F>> = rows
            .iter()
            .map(|w| {
                let (indices, values) = w
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != F::zero())
                    .map(|(i, &v)| (i, v))
                    .unzip();
                Repr { dim: w.len(), indices, values }
            })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, F: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<F>>, D::Error> {
        let reprs = Vec::<Repr<F>>::deserialize(d)?;
        reprs
            .into_iter()
            .map(|r| {
                if r.indices.len() != r.values.len() {
                    return Err(serde::de::Error::custom("index/value length mismatch"));
                }
                let mut w = vec![F::zero(); r.dim];
                for (i, v) in r.indices.into_iter().zip(r.values) {
                    *w.get_mut(i).ok_or_else(|| serde::de::Error::custom("weight index out of range"))? = v;
                }
                Ok(w)
            })
            .collect()
    }
}
