//! Emotion-label text classification.
//!
//! The pipeline: load a labeled corpus ([`corpus`]), tokenize and drop stop
//! words ([`preprocess`]), encode as count / TF / TF-IDF vectors
//! ([`features`]), fit one of eight classifier families ([`classifiers`]),
//! and score the predictions ([`metrics`]). [`harness`] drives the whole
//! pipeline over several classifiers and seeds and renders comparison
//! reports; the `bench` binary exposes it on the command line.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the harness uses.
//!
//! ```
//! use emobench::classifiers::{fit, ClassifierConfig, ClassifierKind};
//! use emobench::features::{FittedFeatures, Scheme};
//! use emobench::preprocess::{preprocess_corpus, StopWordList};
//! use emobench::synthetic;
//!
//! let data = synthetic::separable(20, 5, 1);
//! let docs = preprocess_corpus(&data.corpus, &StopWordList::default());
//! let train: Vec<_> = data.train.iter().map(|&i| docs[i].clone()).collect();
//! let y: Vec<_> = train.iter().map(|d| d.label).collect();
//!
//! let features = FittedFeatures::<f64>::fit(&train)?;
//! let x = features.transform(&train, Scheme::Tfidf)?;
//! let model = fit(ClassifierKind::LinearSvm, &ClassifierConfig::default(), &x, &y, 42)?;
//!
//! let test = features.transform(&[docs[data.test[0]].clone()], Scheme::Tfidf)?;
//! assert_eq!(model.predict_label(&test.rows[0])?, docs[data.test[0]].label);
//! # Ok::<(), emobench::Error>(())
//! ```

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use classifiers::{fit, ClassifierConfig, ClassifierKind, PredictOutcome};
pub use corpus::{Corpus, EmotionLabel, Review, SplitPlan};
pub use error::{Error, Result};
pub use features::{Scheme, Vocabulary};
pub use metrics::{ConfusionMatrix, EvaluationReport};
pub use preprocess::{StopWordList, TokenizedReview};
pub use scalar::Scalar;

pub type SparseRow = features::SparseVec<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
pub type TfIdfModel = features::TfIdfModel<f64>;
pub type FittedFeatures = features::FittedFeatures<f64>;
pub type TrainedModel = classifiers::TrainedModel<f64>;
pub type LabelMetrics = metrics::LabelMetrics<f64>;

pub type FeatureMatrix32 = features::FeatureMatrix<f32>;
pub type TrainedModel32 = classifiers::TrainedModel<f32>;
