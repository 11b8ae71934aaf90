//! Per-class linear scorers shared by the logistic, SVM and SGD families.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::features::SparseVec;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// One `(bias, weights)` pair per row; `score_r(x) = bias_r + w_r · x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LinearModel<F: Scalar> {
    pub bias: Vec<F>,
    #[serde(with = "super::sparse_weights")]
    pub weights: Vec<Vec<F>>,
}

impl<F: Scalar> LinearModel<F> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        LinearModel {
            bias: vec![F::zero(); rows],
            weights: vec![vec![F::zero(); dim]; rows],
        }
    }

    pub fn margins(&self, x: &SparseVec<F>) -> Vec<F> {
        self.bias
            .iter()
            .zip(&self.weights)
            .map(|(&b, w)| b + x.dot_dense(w))
            .collect()
    }
}

/// Visiting order for each epoch, reshuffled from the same stream.
pub(crate) fn epoch_order(rng: &mut Rng, n: usize, order: &mut Vec<usize>) {
    if order.len() != n {
        *order = (0..n).collect();
    }
    order.shuffle(rng);
}

/// Weight vector stored as `scale · v` so that multiplicative decay is O(1)
/// and additive updates touch only the non-zero input coordinates.
#[derive(Debug, Clone)]
pub(crate) struct ScaledWeights<F> {
    scale: F,
    v: Vec<F>,
}

impl<F: Scalar> ScaledWeights<F> {
    pub fn zeros(dim: usize) -> Self {
        ScaledWeights { scale: F::one(), v: vec![F::zero(); dim] }
    }

    pub fn dot(&self, x: &SparseVec<F>) -> F {
        self.scale * x.dot_dense(&self.v)
    }

    pub fn decay(&mut self, factor: F) {
        if factor == F::zero() {
            self.scale = F::one();
            self.v.iter_mut().for_each(|w| *w = F::zero());
            return;
        }
        self.scale *= factor;
        if self.scale.abs() < F::lit(1e-9) {
            self.renormalise();
        }
    }

    pub fn add_scaled(&mut self, x: &SparseVec<F>, coeff: F) {
        let c = coeff / self.scale;
        for (i, xi) in x.iter() {
            self.v[i] += c * xi;
        }
    }

    fn renormalise(&mut self) {
        let s = self.scale;
        self.v.iter_mut().for_each(|w| *w *= s);
        self.scale = F::one();
    }

    pub fn into_dense(mut self) -> Vec<F> {
        self.renormalise();
        self.v
    }
}
