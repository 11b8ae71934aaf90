//! Confusion matrices and the precision / recall / F1 / accuracy family.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::corpus::{EmotionLabel, LABEL_COUNT};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rows are true labels, columns predicted labels, both in fixed label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; LABEL_COUNT]; LABEL_COUNT],
}

impl ConfusionMatrix {
    pub fn get(&self, truth: EmotionLabel, predicted: EmotionLabel) -> usize {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..LABEL_COUNT).map(|i| self.counts[i][i]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }
}

pub fn confusion_matrix(y_true: &[EmotionLabel], y_pred: &[EmotionLabel]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::invalid("cannot build a confusion matrix from zero predictions"));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        cm.counts[t.index()][p.index()] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelMetrics<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Scalar> LabelMetrics<F> {
    /// F1 is the harmonic mean of precision and recall, or 0 when both are 0.
    pub fn new(precision: F, recall: F) -> Self {
        let denom = precision + recall;
        let f1 = if denom > F::zero() {
            F::lit(2.0) * precision * recall / denom
        } else {
            F::zero()
        };
        LabelMetrics { precision, recall, f1 }
    }
}

fn ratio<F: Scalar>(num: usize, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::from_count(num) / F::from_count(den)
    }
}

/// One-vs-rest precision and recall for `label`; a zero denominator gives 0.
pub fn label_metrics<F: Scalar>(cm: &ConfusionMatrix, label: EmotionLabel) -> LabelMetrics<F> {
    let l = label.index();
    let tp = cm.counts[l][l];
    let predicted: usize = cm.counts.iter().map(|row| row[l]).sum();
    let actual: usize = cm.counts[l].iter().sum();
    LabelMetrics::new(ratio(tp, predicted), ratio(tp, actual))
}

pub fn per_label_metrics<F: Scalar>(cm: &ConfusionMatrix) -> BTreeMap<EmotionLabel, LabelMetrics<F>> {
    EmotionLabel::ALL
        .into_iter()
        .map(|l| (l, label_metrics(cm, l)))
        .collect()
}

pub fn accuracy<F: Scalar>(cm: &ConfusionMatrix) -> Result<F> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("accuracy of an empty confusion matrix"));
    }
    Ok(ratio(cm.trace(), total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

/// Unweighted means over all five labels.
pub fn macro_average<F: Scalar>(
    per_label: &BTreeMap<EmotionLabel, LabelMetrics<F>>,
) -> Result<MacroAverage<F>> {
    let mut sums = (F::zero(), F::zero(), F::zero());
    for l in EmotionLabel::ALL {
        let m = per_label
            .get(&l)
            .ok_or_else(|| Error::invalid(format!("metrics missing for label {l}")))?;
        sums.0 += m.precision;
        sums.1 += m.recall;
        sums.2 += m.f1;
    }
    let n = F::from_count(LABEL_COUNT);
    Ok(MacroAverage {
        precision: sums.0 / n,
        recall: sums.1 / n,
        f1: sums.2 / n,
    })
}

/// Quality and timing numbers for one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: ClassifierKind,
    pub per_label: BTreeMap<EmotionLabel, LabelMetrics<f64>>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub cpu_time_train_ms: f64,
    pub cpu_time_predict_ms: f64,
}

impl EvaluationReport {
    pub fn from_confusion(
        classifier: ClassifierKind,
        cm: &ConfusionMatrix,
        train_ms: f64,
        predict_ms: f64,
    ) -> Result<Self> {
        let per_label = per_label_metrics::<f64>(cm);
        let avg = macro_average(&per_label)?;
        Ok(EvaluationReport {
            classifier,
            per_label,
            macro_precision: avg.precision,
            macro_recall: avg.recall,
            macro_f1: avg.f1,
            accuracy: accuracy(cm)?,
            cpu_time_train_ms: train_ms,
            cpu_time_predict_ms: predict_ms,
        })
    }

    /// Field-wise mean of several reports for the same classifier.
    pub fn mean(reports: &[EvaluationReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero reports"))?;
        let n = reports.len() as f64;
        let avg = |f: &dyn Fn(&EvaluationReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let per_label = EmotionLabel::ALL
            .into_iter()
            .map(|l| {
                let m = LabelMetrics {
                    precision: avg(&|r| r.per_label[&l].precision),
                    recall: avg(&|r| r.per_label[&l].recall),
                    f1: avg(&|r| r.per_label[&l].f1),
                };
                (l, m)
            })
            .collect();
        Ok(EvaluationReport {
            classifier: first.classifier,
            per_label,
            macro_precision: avg(&|r| r.macro_precision),
            macro_recall: avg(&|r| r.macro_recall),
            macro_f1: avg(&|r| r.macro_f1),
            accuracy: avg(&|r| r.accuracy),
            cpu_time_train_ms: avg(&|r| r.cpu_time_train_ms),
            cpu_time_predict_ms: avg(&|r| r.cpu_time_predict_ms),
        })
    }
}
