//! Logistic regression trained with the delta-rule update
//! `b += α (y − p) p (1 − p) x`, either one-vs-rest or as a softmax over
//! K − 1 coefficient rows against a reference class.

use serde::{Deserialize, Serialize};

use super::linear::{epoch_order, LinearModel};
use crate::error::Error;
use crate::features::{FeatureMatrix, SparseVec};
use crate::rng::{self, streams};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LrMode {
    #[default]
    OneVsRest,
    Multinomial,
}

impl std::str::FromStr for LrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "one_vs_rest" | "ovr" => Ok(LrMode::OneVsRest),
            "multinomial" | "softmax" => Ok(LrMode::Multinomial),
            other => Err(Error::invalid(format!("unknown logistic mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub mode: LrMode,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { learning_rate: 0.1, epochs: 100, mode: LrMode::OneVsRest }
    }
}

/// One delta-rule step on a binary target `y ∈ {0, 1}`. Returns the
/// prediction `p` computed before the update.
pub fn lr_update<F: Scalar>(b0: &mut F, b: &mut [F], x: &SparseVec<F>, y: F, alpha: F) -> F {
    let p = sigmoid(*b0 + x.dot_dense(b));
    let delta = alpha * (y - p) * p * (F::one() - p);
    *b0 += delta;
    for (j, xj) in x.iter() {
        b[j] += delta * xj;
    }
    p
}

/// Class probabilities from the K − 1 logits `Bᵢ · x`; the reference class
/// (implicit logit 0) is appended last.
pub fn softmax_scores<F: Scalar>(logits: &[F]) -> Vec<F> {
    let max = logits.iter().copied().fold(F::zero(), |a, b| if b > a { b } else { a });
    let mut out: Vec<F> = logits.iter().map(|&z| (z - max).exp()).collect();
    out.push((-max).exp());
    let total: F = out.iter().copied().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LogisticModel<F: Scalar> {
    pub mode: LrMode,
    /// K rows in one-vs-rest mode, K − 1 rows in multinomial mode.
    pub linear: LinearModel<F>,
}

impl<F: Scalar> LogisticModel<F> {
    pub(crate) fn fit(config: &LogisticConfig, x: &FeatureMatrix<F>, y: &[usize], k: usize, seed: u64) -> Self {
        let alpha = F::lit(config.learning_rate);
        let rows = match config.mode {
            LrMode::OneVsRest => k,
            LrMode::Multinomial => k - 1,
        };
        let mut lin = LinearModel::zeros(rows, x.dim);
        let mut rng = rng::stream(seed, streams::TRAIN_ORDER);
        let mut order = Vec::new();
        for _ in 0..config.epochs {
            epoch_order(&mut rng, x.n_rows(), &mut order);
            for &i in &order {
                let xi = &x.rows[i];
                match config.mode {
                    LrMode::OneVsRest => {
                        for c in 0..k {
                            let target = if y[i] == c { F::one() } else { F::zero() };
                            lr_update(&mut lin.bias[c], &mut lin.weights[c], xi, target, alpha);
                        }
                    }
                    LrMode::Multinomial => {
                        let probs = softmax_scores(&lin.margins(xi));
                        for c in 0..rows {
                            let target = if y[i] == c { F::one() } else { F::zero() };
                            let delta = alpha * (target - probs[c]);
                            lin.bias[c] += delta;
                            for (j, v) in xi.iter() {
                                lin.weights[c][j] += delta * v;
                            }
                        }
                    }
                }
            }
        }
        LogisticModel { mode: config.mode, linear: lin }
    }

    /// Class probabilities. One-vs-rest sigmoid outputs are rescaled to sum
    /// to one; the arg-max is unchanged.
    pub fn probabilities(&self, x: &SparseVec<F>) -> Vec<F> {
        let margins = self.linear.margins(x);
        match self.mode {
            LrMode::Multinomial => softmax_scores(&margins),
            LrMode::OneVsRest => {
                let mut p: Vec<F> = margins.into_iter().map(sigmoid).collect();
                let total: F = p.iter().copied().sum();
                p.iter_mut().for_each(|v| *v /= total);
                p
            }
        }
    }
}
