//! Multinomial naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, SparseVec};
use crate::scalar::{log_sum_exp, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesConfig {
    pub alpha: f64,
}

impl Default for NaiveBayesConfig {
    fn default() -> Self {
        NaiveBayesConfig { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes<F> {
    /// `ln P(class)` per class.
    pub log_prior: Vec<F>,
    /// `ln P(term | class)`, one row of width V per class.
    pub log_likelihood: Vec<Vec<F>>,
}

impl<F: Scalar> NaiveBayes<F> {
    pub(crate) fn fit(config: &NaiveBayesConfig, x: &FeatureMatrix<F>, y: &[usize], n_classes: usize) -> Self {
        let alpha = F::lit(config.alpha);
        let v = x.dim;
        let mut class_docs = vec![0usize; n_classes];
        let mut term_mass = vec![vec![F::zero(); v]; n_classes];
        for (row, &c) in x.rows.iter().zip(y) {
            class_docs[c] += 1;
            for (t, val) in row.iter() {
                term_mass[c][t] += val;
            }
        }
        let n = F::from_count(y.len());
        let log_prior = class_docs.iter().map(|&d| (F::from_count(d) / n).ln()).collect();
        let log_likelihood = term_mass
            .into_iter()
            .map(|mass| {
                let total: F = mass.iter().copied().sum();
                let denom = (total + alpha * F::from_count(v)).ln();
                mass.into_iter().map(|m| (m + alpha).ln() - denom).collect()
            })
            .collect();
        NaiveBayes { log_prior, log_likelihood }
    }

    /// Unnormalised `ln P(class) + Σ xₜ ln P(t | class)`.
    pub fn joint_log_likelihood(&self, x: &SparseVec<F>) -> Vec<F> {
        self.log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(&lp, ll)| lp + x.dot_dense(ll))
            .collect()
    }

    /// Posterior class probabilities, normalised in log space.
    pub fn posteriors(&self, x: &SparseVec<F>) -> Vec<F> {
        let jll = self.joint_log_likelihood(x);
        let norm = log_sum_exp(&jll);
        jll.into_iter().map(|v| (v - norm).exp()).collect()
    }
}
