//! End-to-end benchmark: load, preprocess, split, featurize, train every
//! configured classifier, evaluate, rank and report.

mod config;
mod report;
pub mod verify;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{ExperimentConfig, OutputFormat};
pub use report::{
    parse_report, rank_and_recommend, render_report, BenchmarkReport, ClassifierResult, DatasetSummary, Ranking,
    RunRecord, RunSettings,
};

use crate::classifiers::{self, ClassifierKind};
use crate::corpus::{self, label_histogram, Corpus, EmotionLabel, SplitPlan};
use crate::error::{Error, Result};
use crate::features::{dump_jsonl, FeatureMatrix, FittedFeatures, Scheme};
use crate::metrics::{confusion_matrix, ConfusionMatrix, EvaluationReport};
use crate::preprocess::{preprocess_corpus, StopWordList, TokenizedReview};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BENCH_THREADS";

/// Runs `action` and returns its result with the elapsed wall-clock time in
/// milliseconds, measured on the monotonic clock.
pub fn measure_time<T>(action: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = action();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Worker count from `BENCH_THREADS`, or `None` for the rayon default.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        _ => Ok(None),
    }
}

/// Runs `f` on a pool sized by `BENCH_THREADS`.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(f))
}

pub fn environment_description() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{} {}, {cpus} logical CPUs", std::env::consts::OS, std::env::consts::ARCH)
}

fn plans(corpus: &Corpus, config: &ExperimentConfig, seed: u64) -> Result<Vec<SplitPlan>> {
    match config.folds {
        Some(k) => corpus::k_folds(corpus.len(), k, seed),
        None if config.stratified => Ok(vec![corpus::split_stratified(corpus, config.test_fraction, seed)?]),
        None => Ok(vec![corpus::split(corpus, config.test_fraction, seed)?]),
    }
}

fn pick(docs: &[TokenizedReview], indices: &[usize]) -> Vec<TokenizedReview> {
    indices.iter().map(|&i| docs[i].clone()).collect()
}

struct Prepared {
    train: FeatureMatrix<f64>,
    test: FeatureMatrix<f64>,
}

struct Evaluation {
    confusion: ConfusionMatrix,
    report: EvaluationReport,
}

fn evaluate(
    kind: ClassifierKind,
    config: &ExperimentConfig,
    data: &Prepared,
    y_train: &[EmotionLabel],
    y_test: &[EmotionLabel],
    seed: u64,
    model_path: Option<&Path>,
) -> Result<Evaluation> {
    let (model, train_ms) = measure_time(|| classifiers::fit(kind, &config.classifier_config, &data.train, y_train, seed));
    let model = model?;
    let (predicted, predict_ms) = measure_time(|| {
        data.test
            .rows
            .iter()
            .map(|x| model.predict_label(x))
            .collect::<Result<Vec<_>>>()
    });
    let confusion = confusion_matrix(y_test, &predicted?)?;
    let report = EvaluationReport::from_confusion(kind, &confusion, train_ms, predict_ms)?;
    if let Some(path) = model_path {
        classifiers::save_model(path, &model, &config.classifier_config)?;
    }
    Ok(Evaluation { confusion, report })
}

fn stdev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Runs the whole benchmark. Deterministic given the config apart from the
/// timing fields, whatever the number of worker threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let corpus = corpus::load_corpus(&config.dataset_path)?;
    let stop = match &config.stop_word_path {
        Some(p) => StopWordList::load(p)?,
        None => StopWordList::default(),
    };
    with_thread_pool(|| run_on_corpus(config, &corpus, &stop))?
}

/// [`run_experiment`] on an already loaded corpus, on the current pool.
pub fn run_on_corpus(config: &ExperimentConfig, corpus: &Corpus, stop: &StopWordList) -> Result<BenchmarkReport> {
    config.validate()?;
    let docs = preprocess_corpus(corpus, stop);
    let labels = corpus.labels();
    let seeds = config.seeds();
    let schemes: BTreeSet<Scheme> = config.classifiers.iter().map(|&k| config.scheme_for(k)).collect();
    if let Some(dir) = &config.model_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    // per_seed[s][c] = evaluations of classifier c over the plans of seed s
    let mut per_seed: Vec<Vec<Vec<Evaluation>>> = Vec::with_capacity(seeds.len());
    for (si, &seed) in seeds.iter().enumerate() {
        let plans = plans(corpus, config, seed)?;
        let mut per_classifier: Vec<Vec<Evaluation>> = config.classifiers.iter().map(|_| Vec::new()).collect();
        for (pi, plan) in plans.iter().enumerate() {
            let train_docs = pick(&docs, &plan.train_indices);
            let test_docs = pick(&docs, &plan.test_indices);
            let fitted: FittedFeatures<f64> = if config.fit_on_all {
                FittedFeatures::fit(&docs)?
            } else {
                FittedFeatures::fit(&train_docs)?
            };
            if si == 0 && pi == 0 {
                if let Some(path) = &config.feature_dump {
                    let all = fitted.transform(&docs, config.feature_scheme)?;
                    let ids: Vec<usize> = docs.iter().map(|d| d.id).collect();
                    let file = File::create(path).map_err(|e| Error::io(path, e))?;
                    dump_jsonl(&all, &ids, BufWriter::new(file))?;
                }
            }
            let prepared: Vec<(Scheme, Prepared)> = schemes
                .iter()
                .map(|&s| {
                    Ok((
                        s,
                        Prepared {
                            train: fitted.transform(&train_docs, s)?,
                            test: fitted.transform(&test_docs, s)?,
                        },
                    ))
                })
                .collect::<Result<_>>()?;
            let y_train: Vec<EmotionLabel> = plan.train_indices.iter().map(|&i| labels[i]).collect();
            let y_test: Vec<EmotionLabel> = plan.test_indices.iter().map(|&i| labels[i]).collect();
            let fold_suffix = if config.folds.is_some() { format!("-fold{pi}") } else { String::new() };

            let results: Vec<Evaluation> = config
                .classifiers
                .par_iter()
                .map(|&kind| {
                    let scheme = config.scheme_for(kind);
                    let data = &prepared.iter().find(|(s, _)| *s == scheme).expect("scheme prepared").1;
                    let model_path = config
                        .model_dir
                        .as_ref()
                        .map(|d| d.join(format!("{kind}-seed{seed}{fold_suffix}.json")));
                    evaluate(kind, config, data, &y_train, &y_test, seed, model_path.as_deref()).map_err(|e| {
                        Error::Classifier {
                            kind,
                            source: Box::new(e),
                        }
                    })
                })
                .collect::<Result<_>>()?;
            for (slot, r) in per_classifier.iter_mut().zip(results) {
                slot.push(r);
            }
        }
        per_seed.push(per_classifier);
    }

    let mut per_classifier = Vec::with_capacity(config.classifiers.len());
    for (ci, &kind) in config.classifiers.iter().enumerate() {
        let mut runs = Vec::with_capacity(seeds.len());
        let mut seed_reports = Vec::with_capacity(seeds.len());
        for (si, &seed) in seeds.iter().enumerate() {
            let evals = &per_seed[si][ci];
            let reports: Vec<EvaluationReport> = evals.iter().map(|e| e.report.clone()).collect();
            let report = EvaluationReport::mean(&reports)?;
            let mut confusion = ConfusionMatrix::default();
            for e in evals {
                confusion.add(&e.confusion);
            }
            runs.push(RunRecord {
                seed,
                test_size: confusion.total(),
                accuracy: report.accuracy,
                macro_f1: report.macro_f1,
                confusion,
                cpu_time_train_ms: report.cpu_time_train_ms,
                cpu_time_predict_ms: report.cpu_time_predict_ms,
            });
            seed_reports.push(report);
        }
        let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
        let f1s: Vec<f64> = runs.iter().map(|r| r.macro_f1).collect();
        per_classifier.push(ClassifierResult {
            kind,
            name: kind.display_name(&config.classifier_config),
            scheme: config.scheme_for(kind),
            summary: EvaluationReport::mean(&seed_reports)?,
            accuracy_stdev: stdev(&accuracies),
            macro_f1_stdev: stdev(&f1s),
            runs,
        });
    }
    per_classifier.sort_by_key(|r| r.kind);

    let summaries: Vec<EvaluationReport> = per_classifier.iter().map(|r| r.summary.clone()).collect();
    let ranking = rank_and_recommend(&summaries);
    Ok(BenchmarkReport {
        dataset: DatasetSummary {
            path: config.dataset_path.display().to_string(),
            reviews: corpus.len(),
            label_counts: label_histogram(corpus).iter().collect(),
        },
        settings: RunSettings {
            test_fraction: config.test_fraction,
            seeds,
            scheme: config.feature_scheme,
            fit_on_all: config.fit_on_all,
            stratified: config.stratified,
            folds: config.folds,
        },
        per_classifier,
        ranking: ranking.order,
        recommendation: ranking.recommended,
        environment: environment_description(),
    })
}
