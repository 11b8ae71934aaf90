use emobench::classifiers::{self, load_model, save_model, ClassifierConfig, ClassifierKind, MODEL_FORMAT_VERSION};
use emobench::corpus::EmotionLabel;
use emobench::features::{FeatureMatrix, FittedFeatures, Scheme};
use emobench::preprocess::{preprocess_corpus, StopWordList};
use emobench::{synthetic, Error};

struct Data {
    config: ClassifierConfig,
    x_count: FeatureMatrix<f64>,
    x_tfidf: FeatureMatrix<f64>,
    y: Vec<EmotionLabel>,
}

fn small_data() -> Data {
    let data = synthetic::separable(12, 0, 11);
    let docs = preprocess_corpus(&data.corpus, &StopWordList::default());
    let fitted = FittedFeatures::<f64>::fit(&docs).unwrap();
    let mut config = ClassifierConfig::default();
    config.knn.k = 5;
    config.random_forest.n_trees = 20;
    config.gradient_boost.rounds = 10;
    config.bpn.epochs = 5;
    config.logistic_regression.epochs = 10;
    config.linear_svm.epochs = 10;
    config.sgd_linear.epochs = 10;
    Data {
        config,
        x_count: fitted.transform(&docs, Scheme::Count).unwrap(),
        x_tfidf: fitted.transform(&docs, Scheme::Tfidf).unwrap(),
        y: data.corpus.labels(),
    }
}

fn matrix(d: &Data, kind: ClassifierKind) -> &FeatureMatrix<f64> {
    if kind == ClassifierKind::NaiveBayes {
        &d.x_count
    } else {
        &d.x_tfidf
    }
}

#[test]
fn fit_twice_is_bit_identical() {
    let d = small_data();
    for kind in ClassifierKind::ALL {
        let a = classifiers::fit(kind, &d.config, matrix(&d, kind), &d.y, 3).unwrap();
        let b = classifiers::fit(kind, &d.config, matrix(&d, kind), &d.y, 3).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn saved_models_load_back_equal_and_predict_the_same() {
    let d = small_data();
    let dir = tempfile::tempdir().unwrap();
    for kind in ClassifierKind::ALL {
        let x = matrix(&d, kind);
        let model = classifiers::fit(kind, &d.config, x, &d.y, 9).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&path, &model, &d.config).unwrap();
        let file = load_model::<f64>(&path).unwrap();
        assert_eq!(file.version, MODEL_FORMAT_VERSION);
        assert_eq!(file.config, d.config);
        assert_eq!(file.model, model, "{kind}");
        for row in &x.rows {
            assert_eq!(file.model.predict(row).unwrap(), model.predict(row).unwrap());
        }
    }
}

#[test]
fn model_json_names_kind_and_classes() {
    let d = small_data();
    let model = classifiers::fit(ClassifierKind::LinearSvm, &d.config, &d.x_tfidf, &d.y, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("svm.json");
    save_model(&path, &model, &d.config).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["model"]["kind"], "linear_svm");
    assert_eq!(v["model"]["classes"], serde_json::json!(["joy", "fear", "sadness", "shame", "guilt"]));
    assert_eq!(v["model"]["params"]["family"], "linear_svm");
}

#[test]
fn unknown_model_version_is_rejected() {
    let d = small_data();
    let model = classifiers::fit(ClassifierKind::NaiveBayes, &d.config, &d.x_count, &d.y, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nb.json");
    save_model(&path, &model, &d.config).unwrap();
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"version\":1", "\"version\":99", 1);
    std::fs::write(&path, text).unwrap();
    assert!(matches!(load_model::<f64>(&path), Err(Error::ModelVersion(99))));
}

#[test]
fn forest_does_not_depend_on_thread_count() {
    let d = small_data();
    let fit_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| classifiers::fit(ClassifierKind::RandomForest, &d.config, &d.x_tfidf, &d.y, 5).unwrap())
    };
    assert_eq!(fit_with(1), fit_with(4));
}

#[test]
fn probabilistic_scores_sum_to_one() {
    let d = small_data();
    for kind in ClassifierKind::ALL {
        let model = classifiers::fit(kind, &d.config, matrix(&d, kind), &d.y, 2).unwrap();
        if !model.is_probabilistic() {
            continue;
        }
        for row in &matrix(&d, kind).rows {
            let total: f64 = model.predict(row).unwrap().scores.iter().map(|(_, s)| s).sum();
            assert!((total - 1.0).abs() < 1e-9, "{kind}: {total}");
        }
    }
}

#[test]
fn f32_models_work() {
    let data = synthetic::separable(10, 5, 4);
    let docs = preprocess_corpus(&data.corpus, &StopWordList::default());
    let train: Vec<_> = data.train.iter().map(|&i| docs[i].clone()).collect();
    let test: Vec<_> = data.test.iter().map(|&i| docs[i].clone()).collect();
    let labels = data.corpus.labels();
    let y: Vec<EmotionLabel> = data.train.iter().map(|&i| labels[i]).collect();
    let fitted = FittedFeatures::<f32>::fit(&train).unwrap();
    let x = fitted.transform(&train, Scheme::Tfidf).unwrap();
    let xt = fitted.transform(&test, Scheme::Tfidf).unwrap();
    let model = classifiers::fit(ClassifierKind::LogisticRegression, &ClassifierConfig::default(), &x, &y, 1).unwrap();
    let correct = xt
        .rows
        .iter()
        .zip(&data.test)
        .filter(|(r, &i)| model.predict_label(r).unwrap() == labels[i])
        .count();
    assert_eq!(correct, data.test.len());
}
