//! Linear SVM (hinge loss, λ-regularised subgradient descent) and the plain
//! SGD linear classifier (hinge or log loss, decaying step, no
//! regularisation). Both are trained one-vs-rest.

use serde::{Deserialize, Serialize};

use super::linear::{epoch_order, LinearModel, ScaledWeights};
use crate::error::Error;
use crate::features::{FeatureMatrix, SparseVec};
use crate::rng::{self, streams};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    /// Initial step η₀; step t uses η₀ / (1 + λ η₀ t).
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { lambda: 1e-4, learning_rate: 0.1, epochs: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SgdLoss {
    #[default]
    Hinge,
    Log,
}

impl std::str::FromStr for SgdLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hinge" => Ok(SgdLoss::Hinge),
            "log" | "log_loss" | "logistic" => Ok(SgdLoss::Log),
            other => Err(Error::invalid(format!("unknown sgd loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub loss: SgdLoss,
    /// η₀ in η₀ / (1 + decay · t), t counting single-example steps.
    pub learning_rate: f64,
    pub decay: f64,
    pub epochs: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { loss: SgdLoss::Hinge, learning_rate: 0.1, decay: 0.01, epochs: 100 }
    }
}

/// One hinge-loss subgradient step with `y ∈ {−1, +1}`:
/// a margin violation adds `η y x` (and `η y` to the bias) after the
/// `(1 − ηλ)` weight decay; otherwise only the decay applies.
pub fn hinge_step<F: Scalar>(b0: &mut F, b: &mut [F], x: &SparseVec<F>, y: F, eta: F, lambda: F) {
    let violated = y * (*b0 + x.dot_dense(b)) < F::one();
    let shrink = F::one() - eta * lambda;
    b.iter_mut().for_each(|w| *w *= shrink);
    if violated {
        for (j, xj) in x.iter() {
            b[j] += eta * y * xj;
        }
        *b0 += eta * y;
    }
}

fn sign_target<F: Scalar>(is_class: bool) -> F {
    if is_class {
        F::one()
    } else {
        -F::one()
    }
}

pub(crate) fn fit_svm<F: Scalar>(
    config: &SvmConfig,
    x: &FeatureMatrix<F>,
    y: &[usize],
    k: usize,
    seed: u64,
) -> LinearModel<F> {
    let eta0 = F::lit(config.learning_rate);
    let lambda = F::lit(config.lambda);
    let mut weights: Vec<ScaledWeights<F>> = (0..k).map(|_| ScaledWeights::zeros(x.dim)).collect();
    let mut bias = vec![F::zero(); k];
    let mut rng = rng::stream(seed, streams::TRAIN_ORDER);
    let mut order = Vec::new();
    let mut t = 0usize;
    for _ in 0..config.epochs {
        epoch_order(&mut rng, x.n_rows(), &mut order);
        for &i in &order {
            let eta = eta0 / (F::one() + lambda * eta0 * F::from_count(t));
            let xi = &x.rows[i];
            for c in 0..k {
                let yc = sign_target::<F>(y[i] == c);
                let violated = yc * (bias[c] + weights[c].dot(xi)) < F::one();
                weights[c].decay(F::one() - eta * lambda);
                if violated {
                    weights[c].add_scaled(xi, eta * yc);
                    bias[c] += eta * yc;
                }
            }
            t += 1;
        }
    }
    LinearModel {
        bias,
        weights: weights.into_iter().map(ScaledWeights::into_dense).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SgdModel<F: Scalar> {
    pub loss: SgdLoss,
    pub linear: LinearModel<F>,
}

impl<F: Scalar> SgdModel<F> {
    /// Margins for hinge loss; normalised sigmoid outputs for log loss.
    pub fn scores(&self, x: &SparseVec<F>) -> Vec<F> {
        let m = self.linear.margins(x);
        match self.loss {
            SgdLoss::Hinge => m,
            SgdLoss::Log => {
                let mut p: Vec<F> = m.into_iter().map(sigmoid).collect();
                let total: F = p.iter().copied().sum();
                p.iter_mut().for_each(|v| *v /= total);
                p
            }
        }
    }
}

pub(crate) fn fit_sgd<F: Scalar>(
    config: &SgdConfig,
    x: &FeatureMatrix<F>,
    y: &[usize],
    k: usize,
    seed: u64,
) -> SgdModel<F> {
    let eta0 = F::lit(config.learning_rate);
    let decay = F::lit(config.decay);
    let mut lin = LinearModel::zeros(k, x.dim);
    let mut rng = rng::stream(seed, streams::TRAIN_ORDER);
    let mut order = Vec::new();
    let mut t = 0usize;
    for _ in 0..config.epochs {
        epoch_order(&mut rng, x.n_rows(), &mut order);
        for &i in &order {
            let eta = eta0 / (F::one() + decay * F::from_count(t));
            let xi = &x.rows[i];
            for c in 0..k {
                let is_class = y[i] == c;
                let coeff = match config.loss {
                    SgdLoss::Hinge => {
                        let yc = sign_target::<F>(is_class);
                        if yc * (lin.bias[c] + xi.dot_dense(&lin.weights[c])) < F::one() {
                            eta * yc
                        } else {
                            F::zero()
                        }
                    }
                    SgdLoss::Log => {
                        let target = if is_class { F::one() } else { F::zero() };
                        let p = sigmoid(lin.bias[c] + xi.dot_dense(&lin.weights[c]));
                        eta * (target - p)
                    }
                };
                if coeff != F::zero() {
                    lin.bias[c] += coeff;
                    for (j, v) in xi.iter() {
                        lin.weights[c][j] += coeff * v;
                    }
                }
            }
            t += 1;
        }
    }
    SgdModel { loss: config.loss, linear: lin }
}
