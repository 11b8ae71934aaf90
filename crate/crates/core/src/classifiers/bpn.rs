//! Single-hidden-layer back-propagation network: sigmoid hidden units, a
//! softmax output layer, cross-entropy loss, per-example SGD.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::linear::epoch_order;
use crate::features::{FeatureMatrix, SparseVec};
use crate::rng::{self, streams, Rng};
use crate::scalar::{sigmoid, softmax_in_place, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpnConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for BpnConfig {
    fn default() -> Self {
        BpnConfig { hidden_units: 64, learning_rate: 0.01, epochs: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bpn<F> {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    /// Input→hidden weights, one row of `hidden` values per input feature.
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    /// Hidden→output weights, one row of `hidden` values per output.
    pub w2: Vec<F>,
    pub b2: Vec<F>,
}

/// Dense gradient of the cross-entropy loss, laid out like [`Bpn`].
#[derive(Debug, Clone, PartialEq)]
pub struct BpnGradient<F> {
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    pub w2: Vec<F>,
    pub b2: Vec<F>,
}

fn xavier<F: Scalar>(rng: &mut Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<F> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| F::lit(rng.gen_range(-limit..=limit))).collect()
}

impl<F: Scalar> Bpn<F> {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Bpn {
            inputs,
            hidden,
            outputs,
            w1: vec![F::zero(); inputs * hidden],
            b1: vec![F::zero(); hidden],
            w2: vec![F::zero(); outputs * hidden],
            b2: vec![F::zero(); outputs],
        }
    }

    /// Xavier-uniform weights, zero biases.
    pub fn xavier(inputs: usize, hidden: usize, outputs: usize, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(inputs, hidden, outputs);
        net.w1 = xavier(rng, inputs, hidden, inputs * hidden);
        net.w2 = xavier(rng, hidden, outputs, outputs * hidden);
        net
    }

    pub(crate) fn fit(config: &BpnConfig, x: &FeatureMatrix<F>, y: &[usize], k: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, streams::INIT);
        let mut net = Self::xavier(x.dim, config.hidden_units, k, &mut rng);
        let lr = F::lit(config.learning_rate);
        let mut order = Vec::new();
        let mut target = vec![F::zero(); k];
        for _ in 0..config.epochs {
            epoch_order(&mut rng, x.n_rows(), &mut order);
            for &i in &order {
                target.iter_mut().for_each(|t| *t = F::zero());
                target[y[i]] = F::one();
                net.train_step(&x.rows[i], &target, lr);
            }
        }
        net
    }

    /// Hidden activations and output probabilities.
    pub fn forward(&self, x: &SparseVec<F>) -> (Vec<F>, Vec<F>) {
        let h = self.hidden;
        let mut pre = self.b1.clone();
        for (j, xj) in x.iter() {
            let row = &self.w1[j * h..(j + 1) * h];
            for (p, &w) in pre.iter_mut().zip(row) {
                *p += w * xj;
            }
        }
        let hidden: Vec<F> = pre.into_iter().map(sigmoid).collect();
        let mut out: Vec<F> = (0..self.outputs)
            .map(|o| {
                let row = &self.w2[o * h..(o + 1) * h];
                self.b2[o] + row.iter().zip(&hidden).map(|(&w, &a)| w * a).sum::<F>()
            })
            .collect();
        softmax_in_place(&mut out);
        (hidden, out)
    }

    /// Cross-entropy `−Σ tₒ ln pₒ`.
    pub fn loss(&self, x: &SparseVec<F>, target: &[F]) -> F {
        let (_, p) = self.forward(x);
        -target
            .iter()
            .zip(&p)
            .filter(|(t, _)| **t != F::zero())
            .map(|(&t, &q)| t * q.ln())
            .sum::<F>()
    }

    /// Output and hidden deltas for one example.
    fn deltas(&self, x: &SparseVec<F>, target: &[F]) -> (Vec<F>, Vec<F>, Vec<F>) {
        let h = self.hidden;
        let (hidden, probs) = self.forward(x);
        let d_out: Vec<F> = probs.iter().zip(target).map(|(&p, &t)| p - t).collect();
        let d_hidden: Vec<F> = (0..h)
            .map(|u| {
                let back: F = (0..self.outputs).map(|o| self.w2[o * h + u] * d_out[o]).sum();
                back * hidden[u] * (F::one() - hidden[u])
            })
            .collect();
        (hidden, d_out, d_hidden)
    }

    pub fn gradient(&self, x: &SparseVec<F>, target: &[F]) -> BpnGradient<F> {
        let h = self.hidden;
        let (hidden, d_out, d_hidden) = self.deltas(x, target);
        let mut w1 = vec![F::zero(); self.inputs * h];
        for (j, xj) in x.iter() {
            for u in 0..h {
                w1[j * h + u] = d_hidden[u] * xj;
            }
        }
        let mut w2 = vec![F::zero(); self.outputs * h];
        for o in 0..self.outputs {
            for u in 0..h {
                w2[o * h + u] = d_out[o] * hidden[u];
            }
        }
        BpnGradient { w1, b1: d_hidden, w2, b2: d_out }
    }

    /// One SGD step on the cross-entropy of `(x, target)`. Only the input
    /// rows of non-zero features are touched.
    pub fn train_step(&mut self, x: &SparseVec<F>, target: &[F], learning_rate: F) {
        let h = self.hidden;
        let (hidden, d_out, d_hidden) = self.deltas(x, target);
        for o in 0..self.outputs {
            for u in 0..h {
                self.w2[o * h + u] -= learning_rate * d_out[o] * hidden[u];
            }
            self.b2[o] -= learning_rate * d_out[o];
        }
        for (j, xj) in x.iter() {
            for u in 0..h {
                self.w1[j * h + u] -= learning_rate * d_hidden[u] * xj;
            }
        }
        for u in 0..h {
            self.b1[u] -= learning_rate * d_hidden[u];
        }
    }
}
