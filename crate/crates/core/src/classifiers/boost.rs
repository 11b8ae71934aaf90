//! Gradient boosting with softmax cross-entropy.
//!
//! Scores start at the class log-priors. Each round fits one least-squares
//! regression tree per class to the pseudo-residuals `y − p`, uses
//! Newton-step leaf values, and adds them with a shrinkage step. If that
//! step would raise the training loss it is halved until it does not.

use serde::{Deserialize, Serialize};

use super::tree::{grow_regression_tree, ColumnIndex, RegressionTree};
use crate::features::{FeatureMatrix, SparseVec};
use crate::scalar::{softmax_in_place, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub shrinkage: f64,
    pub tree_depth: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig { rounds: 100, shrinkage: 0.1, tree_depth: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound<F> {
    /// Multiplier actually applied to this round's trees.
    pub step: F,
    /// One tree per class.
    pub trees: Vec<RegressionTree<F>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel<F> {
    pub init: Vec<F>,
    pub rounds: Vec<BoostRound<F>>,
    /// Mean training cross-entropy after initialisation and after each round.
    pub loss_history: Vec<F>,
}

/// Mean cross-entropy of row-major scores `f` (n × k) against labels.
pub fn cross_entropy<F: Scalar>(scores: &[F], y: &[usize], k: usize) -> F {
    let mut total = F::zero();
    for (row, &c) in scores.chunks(k).zip(y) {
        total += crate::scalar::log_sum_exp(row) - row[c];
    }
    total / F::from_count(y.len())
}

/// Class-prior logits, the constant minimiser of the cross-entropy.
pub fn initial_scores<F: Scalar>(y: &[usize], k: usize) -> Vec<F> {
    let mut counts = vec![0usize; k];
    for &c in y {
        counts[c] += 1;
    }
    let n = F::from_count(y.len());
    counts.into_iter().map(|c| (F::from_count(c) / n).ln()).collect()
}

/// One boosting round. Updates `scores` (n × k, row-major) in place and
/// returns the fitted trees together with the applied step.
pub fn boost_round<F: Scalar>(
    scores: &mut [F],
    x: &FeatureMatrix<F>,
    index: &ColumnIndex<F>,
    y: &[usize],
    k: usize,
    shrinkage: F,
    depth: usize,
) -> BoostRound<F> {
    let n = y.len();
    let mut probs = scores.to_vec();
    for row in probs.chunks_mut(k) {
        softmax_in_place(row);
    }
    let leaf_scale = F::from_count(k - 1) / F::from_count(k);
    let trees: Vec<RegressionTree<F>> = (0..k)
        .map(|c| {
            let residual: Vec<F> = (0..n)
                .map(|i| {
                    let target = if y[i] == c { F::one() } else { F::zero() };
                    target - probs[i * k + c]
                })
                .collect();
            let hessian: Vec<F> = (0..n).map(|i| probs[i * k + c] * (F::one() - probs[i * k + c])).collect();
            grow_regression_tree(&x.rows, index, &residual, &hessian, depth, leaf_scale)
        })
        .collect();
    let outputs: Vec<F> = (0..n)
        .flat_map(|i| trees.iter().map(move |t| *t.leaf(&x.rows[i])).collect::<Vec<_>>())
        .collect();

    let before = cross_entropy(scores, y, k);
    let mut step = shrinkage;
    let mut candidate = vec![F::zero(); scores.len()];
    let mut accepted = false;
    for _ in 0..60 {
        for ((c, &s), &o) in candidate.iter_mut().zip(scores.iter()).zip(&outputs) {
            *c = s + step * o;
        }
        if cross_entropy(&candidate, y, k) <= before {
            accepted = true;
            break;
        }
        step /= F::lit(2.0);
    }
    if accepted {
        scores.copy_from_slice(&candidate);
    } else {
        step = F::zero();
    }
    BoostRound { step, trees }
}

impl<F: Scalar> BoostModel<F> {
    pub(crate) fn fit(config: &BoostConfig, x: &FeatureMatrix<F>, y: &[usize], k: usize) -> Self {
        let init = initial_scores::<F>(y, k);
        let mut scores: Vec<F> = (0..y.len()).flat_map(|_| init.iter().copied()).collect();
        let index = ColumnIndex::new(&x.rows);
        let shrinkage = F::lit(config.shrinkage);
        let mut loss_history = vec![cross_entropy(&scores, y, k)];
        let mut rounds = Vec::with_capacity(config.rounds);
        for _ in 0..config.rounds {
            rounds.push(boost_round(&mut scores, x, &index, y, k, shrinkage, config.tree_depth));
            loss_history.push(cross_entropy(&scores, y, k));
        }
        BoostModel { init, rounds, loss_history }
    }

    pub fn raw_scores(&self, x: &SparseVec<F>) -> Vec<F> {
        let mut s = self.init.clone();
        for round in &self.rounds {
            for (v, t) in s.iter_mut().zip(&round.trees) {
                *v += round.step * *t.leaf(x);
            }
        }
        s
    }

    pub fn probabilities(&self, x: &SparseVec<F>) -> Vec<F> {
        let mut s = self.raw_scores(x);
        softmax_in_place(&mut s);
        s
    }
}
