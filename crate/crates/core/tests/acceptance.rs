//! Acceptance suite. Prints one PASS / FAIL / NOT RUN line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Criteria 7 and 8 need the ISEAR corpus in canonical CSV form; point the
//! `ISEAR_CSV` environment variable at it to run them.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emobench::classifiers::{self, lr_update, Bpn, ClassifierConfig, ClassifierKind};
use emobench::corpus::{save_corpus, Corpus, EmotionLabel};
use emobench::features::{build_vocabulary, count_vector, encode, fit_idf, FeatureMatrix, FittedFeatures, Scheme, SparseVec};
use emobench::harness::verify::{accuracy_checks, macro_consistency_check, ordering_checks, verify_config};
use emobench::harness::{parse_report, run_experiment, THREADS_ENV};
use emobench::metrics::{accuracy, confusion_matrix, macro_average, per_label_metrics};
use emobench::preprocess::{preprocess_corpus, StopWordList, TokenizedReview};
use emobench::synthetic;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn random_label(rng: &mut ChaCha8Rng) -> EmotionLabel {
    EmotionLabel::ALL[rng.gen_range(0..5)]
}

// ---------------------------------------------------------------------------
// 1. metrics

struct BruteMetrics {
    counts: [[usize; 5]; 5],
    precision: [f64; 5],
    recall: [f64; 5],
    f1: [f64; 5],
    accuracy: f64,
    macro_p: f64,
    macro_r: f64,
    macro_f1: f64,
}

fn brute_metrics(t: &[EmotionLabel], p: &[EmotionLabel]) -> BruteMetrics {
    let mut counts = [[0usize; 5]; 5];
    for (a, labela) in EmotionLabel::ALL.iter().enumerate() {
        for (b, labelb) in EmotionLabel::ALL.iter().enumerate() {
            counts[a][b] = t.iter().zip(p).filter(|(x, y)| *x == labela && *y == labelb).count();
        }
    }
    let mut precision = [0.0; 5];
    let mut recall = [0.0; 5];
    let mut f1 = [0.0; 5];
    for (i, &l) in EmotionLabel::ALL.iter().enumerate() {
        let tp = t.iter().zip(p).filter(|(x, y)| **x == l && **y == l).count() as f64;
        let fp = t.iter().zip(p).filter(|(x, y)| **x != l && **y == l).count() as f64;
        let fn_ = t.iter().zip(p).filter(|(x, y)| **x == l && **y != l).count() as f64;
        precision[i] = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        recall[i] = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        f1[i] = if precision[i] + recall[i] > 0.0 {
            2.0 * precision[i] * recall[i] / (precision[i] + recall[i])
        } else {
            0.0
        };
    }
    let correct = t.iter().zip(p).filter(|(x, y)| x == y).count() as f64;
    BruteMetrics {
        counts,
        precision,
        recall,
        f1,
        accuracy: correct / t.len() as f64,
        macro_p: precision.iter().sum::<f64>() / 5.0,
        macro_r: recall.iter().sum::<f64>() / 5.0,
        macro_f1: f1.iter().sum::<f64>() / 5.0,
    }
}

fn criterion_metrics() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = rng.gen_range(1..=200);
        let truth: Vec<EmotionLabel> = (0..n).map(|_| random_label(&mut rng)).collect();
        let pred: Vec<EmotionLabel> = truth
            .iter()
            .map(|&l| if rng.gen_bool(0.5) { l } else { random_label(&mut rng) })
            .collect();
        let oracle = brute_metrics(&truth, &pred);
        let cm = confusion_matrix(&truth, &pred).map_err(|e| e.to_string())?;
        check(cm.counts == oracle.counts, format!("case {case}: confusion counts differ"))?;
        let per = per_label_metrics::<f64>(&cm);
        for (i, l) in EmotionLabel::ALL.iter().enumerate() {
            let m = &per[l];
            check(
                close(m.precision, oracle.precision[i], 1e-12)
                    && close(m.recall, oracle.recall[i], 1e-12)
                    && close(m.f1, oracle.f1[i], 1e-12),
                format!("case {case}: {l} metrics differ"),
            )?;
        }
        let acc: f64 = accuracy(&cm).map_err(|e| e.to_string())?;
        check(close(acc, oracle.accuracy, 1e-12), format!("case {case}: accuracy differs"))?;
        let avg = macro_average(&per).map_err(|e| e.to_string())?;
        check(
            close(avg.precision, oracle.macro_p, 1e-12)
                && close(avg.recall, oracle.macro_r, 1e-12)
                && close(avg.f1, oracle.macro_f1, 1e-12),
            format!("case {case}: macro averages differ"),
        )?;
        let perm = [3usize, 0, 4, 1, 2];
        let relabel = |v: &[EmotionLabel]| -> Vec<EmotionLabel> {
            v.iter().map(|l| EmotionLabel::ALL[perm[l.index()]]).collect()
        };
        let cm2 = confusion_matrix(&relabel(&truth), &relabel(&pred)).map_err(|e| e.to_string())?;
        let acc2: f64 = accuracy(&cm2).map_err(|e| e.to_string())?;
        check(acc2 == acc, format!("case {case}: accuracy changed under relabeling"))?;
    }
    Ok("1000 random sequences match the brute-force tally".into())
}

// ---------------------------------------------------------------------------
// 2. features

fn criterion_features() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    while cases < 200 {
        let n_docs = rng.gen_range(1..=10);
        let n_terms = rng.gen_range(1..=8);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                let len = rng.gen_range(0..=6);
                (0..len).map(|_| format!("t{}", rng.gen_range(0..n_terms))).collect()
            })
            .collect();
        if docs.iter().all(Vec::is_empty) {
            continue;
        }
        cases += 1;
        let reviews: Vec<TokenizedReview> = docs
            .iter()
            .enumerate()
            .map(|(id, tokens)| TokenizedReview {
                id,
                tokens: tokens.clone(),
                label: EmotionLabel::Joy,
            })
            .collect();
        let vocab = build_vocabulary(&reviews).map_err(|e| e.to_string())?;
        let counts: Vec<_> = docs.iter().map(|d| count_vector(d, &vocab)).collect();
        let model = fit_idf::<f64>(&counts, vocab.len()).map_err(|e| e.to_string())?;
        let n = n_docs as f64;
        for (t, &idf) in model.idf.iter().enumerate() {
            check(idf >= 0.0 && idf <= n.ln(), format!("case {cases}: idf[{t}] = {idf} outside [0, ln N]"))?;
        }
        for (d, doc) in docs.iter().enumerate() {
            let tf = encode(&counts[d], &model, Scheme::Tf);
            if !doc.is_empty() {
                check(close(tf.sum(), 1.0, 1e-9), format!("case {cases}: tf row {d} sums to {}", tf.sum()))?;
            }
            let tfidf = encode(&counts[d], &model, Scheme::Tfidf);
            for t in 0..vocab.len() {
                let term = vocab.term(t).expect("term");
                let count = doc.iter().filter(|w| *w == term).count();
                let df = docs.iter().filter(|other| other.iter().any(|w| w == term)).count();
                let expected = if doc.is_empty() {
                    0.0
                } else {
                    (count as f64 / doc.len() as f64) * (n / df as f64).ln()
                };
                let got = tfidf.get(t).unwrap_or(0.0);
                check(
                    got == expected,
                    format!("case {cases}: tfidf[{d}][{term}] = {got}, recomputed {expected}"),
                )?;
            }
        }
    }
    Ok("200 micro-corpora: TF sums, IDF bounds and TF-IDF recomputation agree".into())
}

// ---------------------------------------------------------------------------
// 3. naive Bayes

fn criterion_naive_bayes() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = ClassifierConfig::default();
    for case in 0..1000 {
        let dim = rng.gen_range(1..=12);
        let n = rng.gen_range(1..=15);
        let rows: Vec<SparseVec<f64>> = (0..n)
            .map(|_| {
                let dense: Vec<f64> = (0..dim).map(|_| rng.gen_range(0..4) as f64).collect();
                SparseVec::from_dense(&dense)
            })
            .collect();
        let y: Vec<EmotionLabel> = (0..n).map(|_| random_label(&mut rng)).collect();
        let x = FeatureMatrix { dim, scheme: Scheme::Count, rows };
        let model = classifiers::fit(ClassifierKind::NaiveBayes, &config, &x, &y, 0).map_err(|e| e.to_string())?;
        let query: Vec<f64> = (0..dim).map(|_| rng.gen_range(0..5) as f64).collect();
        let post = model.nb_posteriors(&SparseVec::from_dense(&query)).map_err(|e| e.to_string())?;
        let total: f64 = post.iter().map(|(_, p)| p).sum();
        check(close(total, 1.0, 1e-9), format!("case {case}: posteriors sum to {total}"))?;
    }

    let corpus = Corpus::from_pairs([
        (EmotionLabel::Joy, "happy joy"),
        (EmotionLabel::Joy, "happy smile"),
        (EmotionLabel::Fear, "fear dark"),
        (EmotionLabel::Fear, "dark scream"),
    ])
    .map_err(|e| e.to_string())?;
    let stop = StopWordList::default();
    let docs = preprocess_corpus(&corpus, &stop);
    let fitted = FittedFeatures::<f64>::fit(&docs).map_err(|e| e.to_string())?;
    let x = fitted.transform(&docs, Scheme::Count).map_err(|e| e.to_string())?;
    let model =
        classifiers::fit(ClassifierKind::NaiveBayes, &config, &x, &corpus.labels(), 0).map_err(|e| e.to_string())?;
    let query_tokens = ["happy", "joy", "dark"];
    let query = TokenizedReview {
        id: 0,
        tokens: query_tokens.iter().map(|s| s.to_string()).collect(),
        label: EmotionLabel::Joy,
    };
    let qx = fitted.transform(&[query], Scheme::Count).map_err(|e| e.to_string())?;
    let outcome = model.predict(&qx.rows[0]).map_err(|e| e.to_string())?;
    check(outcome.label == EmotionLabel::Joy, format!("toy query predicted {}", outcome.label))?;

    // Direct enumeration: prior × Π (count + 1) / (class total + V).
    let train: Vec<(EmotionLabel, Vec<&str>)> = vec![
        (EmotionLabel::Joy, vec!["happy", "joy"]),
        (EmotionLabel::Joy, vec!["happy", "smile"]),
        (EmotionLabel::Fear, vec!["fear", "dark"]),
        (EmotionLabel::Fear, vec!["dark", "scream"]),
    ];
    let mut vocabulary: Vec<&str> = train.iter().flat_map(|(_, d)| d.iter().copied()).collect();
    vocabulary.sort_unstable();
    vocabulary.dedup();
    let v = vocabulary.len() as f64;
    let mut joint = BTreeMap::new();
    for label in [EmotionLabel::Joy, EmotionLabel::Fear] {
        let docs: Vec<&Vec<&str>> = train.iter().filter(|(l, _)| *l == label).map(|(_, d)| d).collect();
        let prior = docs.len() as f64 / train.len() as f64;
        let total = docs.iter().map(|d| d.len()).sum::<usize>() as f64;
        let mut p = prior;
        for q in query_tokens {
            let count = docs.iter().flat_map(|d| d.iter()).filter(|w| **w == q).count() as f64;
            p *= (count + 1.0) / (total + v);
        }
        joint.insert(label, p);
    }
    let evidence: f64 = joint.values().sum();
    let posts = model.nb_posteriors(&qx.rows[0]).map_err(|e| e.to_string())?;
    for (label, p) in &posts {
        let expected = joint.get(label).copied().unwrap_or(0.0) / evidence;
        check(close(*p, expected, 1e-12), format!("P({label}) = {p}, oracle {expected}"))?;
    }
    let p_joy = posts.iter().find(|(l, _)| *l == EmotionLabel::Joy).map(|(_, p)| *p).unwrap_or(0.0);
    Ok(format!("1000 random models sum to 1; toy query → Joy with P(Joy) = {p_joy:.12}"))
}

// ---------------------------------------------------------------------------
// 4. gradients

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-7 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

fn criterion_gradients() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for draw in 0..50 {
        let (inputs, hidden, outputs) = (rng.gen_range(2..=8), rng.gen_range(2..=6), rng.gen_range(2..=5));
        let mut init = ChaCha8Rng::seed_from_u64(1000 + draw);
        let mut net = Bpn::<f64>::xavier(inputs, hidden, outputs, &mut init);
        for b in net.b1.iter_mut().chain(net.b2.iter_mut()) {
            *b = rng.gen_range(-0.5..0.5);
        }
        let dense: Vec<f64> = (0..inputs)
            .map(|_| if rng.gen_bool(0.6) { rng.gen_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let x = SparseVec::from_dense(&dense);
        let mut target = vec![0.0; outputs];
        target[rng.gen_range(0..outputs)] = 1.0;
        let grad = net.gradient(&x, &target);

        let mut compare = |name: &str, analytic: &[f64], pick: fn(&mut Bpn<f64>) -> &mut Vec<f64>| -> Result<(), String> {
            for i in 0..analytic.len() {
                let original = pick(&mut net)[i];
                pick(&mut net)[i] = original + eps;
                let up = net.loss(&x, &target);
                pick(&mut net)[i] = original - eps;
                let down = net.loss(&x, &target);
                pick(&mut net)[i] = original;
                let numeric = (up - down) / (2.0 * eps);
                let err = relative_error(analytic[i], numeric);
                worst = worst.max(err);
                check(
                    err <= 1e-4,
                    format!("draw {draw}: {name}[{i}] analytic {} numeric {numeric}", analytic[i]),
                )?;
            }
            Ok(())
        };
        compare("w1", &grad.w1, |n| &mut n.w1)?;
        compare("b1", &grad.b1, |n| &mut n.b1)?;
        compare("w2", &grad.w2, |n| &mut n.w2)?;
        compare("b2", &grad.b2, |n| &mut n.b2)?;
    }

    for case in 0..200 {
        let dim = rng.gen_range(1..=10);
        let mut b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b0: f64 = rng.gen_range(-1.0..1.0);
        let dense: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect();
        let y = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
        let alpha = rng.gen_range(0.01..1.0);

        let z = b0 + b.iter().zip(&dense).map(|(w, v)| w * v).sum::<f64>();
        let p = 1.0 / (1.0 + (-z).exp());
        let expect_b0 = b0 + alpha * (y - p) * p * (1.0 - p);
        let expect_b: Vec<f64> = b
            .iter()
            .zip(&dense)
            .map(|(w, v)| w + alpha * (y - p) * p * (1.0 - p) * v)
            .collect();

        lr_update(&mut b0, &mut b, &SparseVec::from_dense(&dense), y, alpha);
        check(close(b0, expect_b0, 1e-12), format!("lr case {case}: bias {b0} vs {expect_b0}"))?;
        for (j, (got, want)) in b.iter().zip(&expect_b).enumerate() {
            check(close(*got, *want, 1e-12), format!("lr case {case}: b[{j}] {got} vs {want}"))?;
        }
    }
    Ok(format!(
        "50 network draws, worst relative error {worst:.2e}; 200 delta-rule updates match to 1e-12"
    ))
}

// ---------------------------------------------------------------------------
// 5. separability

fn criterion_separability() -> Result<String, String> {
    let data = synthetic::separable(100, 25, 5);
    let stop = StopWordList::default();
    let docs = preprocess_corpus(&data.corpus, &stop);
    let pick = |idx: &[usize]| -> Vec<TokenizedReview> { idx.iter().map(|&i| docs[i].clone()).collect() };
    let (train, test) = (pick(&data.train), pick(&data.test));
    let labels = data.corpus.labels();
    let y_train: Vec<EmotionLabel> = data.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<EmotionLabel> = data.test.iter().map(|&i| labels[i]).collect();
    let fitted = FittedFeatures::<f64>::fit(&train).map_err(|e| e.to_string())?;
    let config = ClassifierConfig::default();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for kind in ClassifierKind::ALL {
        let scheme = if kind == ClassifierKind::NaiveBayes { Scheme::Count } else { Scheme::Tfidf };
        let x_train = fitted.transform(&train, scheme).map_err(|e| e.to_string())?;
        let x_test = fitted.transform(&test, scheme).map_err(|e| e.to_string())?;
        let model = classifiers::fit(kind, &config, &x_train, &y_train, 7).map_err(|e| format!("{kind}: {e}"))?;
        let correct = x_test
            .rows
            .iter()
            .zip(&y_test)
            .filter(|(x, y)| model.predict_label(x).ok() == Some(**y))
            .count();
        let acc = correct as f64 / y_test.len() as f64;
        summary.push(format!("{kind} {acc:.3}"));
        if acc < 0.95 {
            failures.push(format!("{kind} {acc:.3}"));
        }
    }
    check(failures.is_empty(), format!("below 0.95: {}", failures.join(", ")))?;
    Ok(summary.join(", "))
}

// ---------------------------------------------------------------------------
// 6. determinism

fn bench_json(csv: &std::path::Path, threads: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["run", "--data"])
        .arg(csv)
        .args(["--format", "json"])
        .env(THREADS_ENV, threads)
        .output()
        .map_err(|e| format!("cannot start bench: {e}"))?;
    check(
        out.status.success(),
        format!("bench run failed: {}", String::from_utf8_lossy(&out.stderr)),
    )?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let report = parse_report(&text).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&report.without_timing()).map_err(|e| e.to_string())
}

fn criterion_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("synthetic.csv");
    save_corpus(&csv, &synthetic::separable(100, 25, 6).corpus).map_err(|e| e.to_string())?;
    let first = bench_json(&csv, "8")?;
    let second = bench_json(&csv, "8")?;
    let single = bench_json(&csv, "1")?;
    check(first == second, "two runs with 8 threads differ")?;
    check(first == single, "1-thread and 8-thread runs differ")?;
    Ok(format!("3 runs byte-identical after zeroing timing ({} bytes)", first.len()))
}

// ---------------------------------------------------------------------------
// 7, 8. reproduction on ISEAR

fn isear_report() -> Option<Result<emobench::harness::BenchmarkReport, String>> {
    let path = std::env::var_os("ISEAR_CSV")?;
    Some(run_experiment(&verify_config(&path)).map_err(|e| e.to_string()))
}

fn summarize(checks: &[emobench::harness::verify::Check]) -> Outcome {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.line()).collect();
    let all: Vec<String> = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if failed.is_empty() {
        Outcome::Pass(all.join("; "))
    } else {
        Outcome::Fail(failed.join("; "))
    }
}

// ---------------------------------------------------------------------------
// 9. macro average of the reference SVM table

fn criterion_macro_consistency() -> Result<String, String> {
    let precisions = [0.76, 0.54, 0.75, 0.67, 0.54];
    let by_hand = precisions.iter().sum::<f64>() / precisions.len() as f64;
    check(close(by_hand, 0.652, 1e-12), format!("hand mean {by_hand}"))?;
    let c = macro_consistency_check();
    check(c.passed, c.detail.clone())?;
    Ok(c.detail)
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "metrics oracle", outcome(criterion_metrics())),
        (2, "feature oracle", outcome(criterion_features())),
        (3, "naive Bayes correctness", outcome(criterion_naive_bayes())),
        (4, "gradient checks", outcome(criterion_gradients())),
        (5, "separability", outcome(criterion_separability())),
        (6, "determinism", outcome(criterion_determinism())),
    ];
    match isear_report() {
        None => {
            let why = "set ISEAR_CSV to a canonical ISEAR CSV to run".to_string();
            results.push((7, "reference accuracies", Outcome::NotRun(why.clone())));
            results.push((8, "ordering properties", Outcome::NotRun(why)));
        }
        Some(Err(e)) => {
            results.push((7, "reference accuracies", Outcome::Fail(e.clone())));
            results.push((8, "ordering properties", Outcome::Fail(e)));
        }
        Some(Ok(report)) => {
            results.push((7, "reference accuracies", summarize(&accuracy_checks(&report))));
            results.push((8, "ordering properties", summarize(&ordering_checks(&report))));
        }
    }
    results.push((9, "macro-average consistency", outcome(criterion_macro_consistency())));

    let mut failed = 0;
    for (n, name, o) in &results {
        let (tag, detail) = match o {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::NotRun(d) => ("NOT RUN", d),
        };
        println!("{tag} criterion {n} ({name}): {detail}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
