//! Random forest: bootstrap-sampled CART trees with per-split feature
//! subsampling, combined by plurality vote.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_class_tree, ClassTree, GiniParams};
use crate::corpus::EmotionLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVec};
use crate::rng::{self, streams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// `None` means ⌈√V⌉.
    pub features_per_split: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 200, max_depth: None, min_samples_split: 2, features_per_split: None }
    }
}

/// Most frequent label; ties go to the earlier label in fixed order.
pub fn forest_vote(votes: &[EmotionLabel]) -> Result<EmotionLabel> {
    if votes.is_empty() {
        return Err(Error::invalid("forest vote over zero trees"));
    }
    let mut counts = [0usize; EmotionLabel::ALL.len()];
    for v in votes {
        counts[v.index()] += 1;
    }
    let best = (0..counts.len()).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
    Ok(EmotionLabel::ALL[best])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest<F> {
    pub n_classes: usize,
    pub trees: Vec<ClassTree<F>>,
}

impl<F: Scalar> Forest<F> {
    /// Tree `t` draws its bootstrap sample and split features from stream
    /// `(seed, FOREST_TREE_BASE + t)`, so the result does not depend on how
    /// many worker threads build the trees.
    pub(crate) fn fit(config: &ForestConfig, x: &FeatureMatrix<F>, y: &[usize], k: usize, seed: u64) -> Self {
        let n = x.n_rows();
        let params = GiniParams {
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
            features_per_split: config
                .features_per_split
                .unwrap_or_else(|| (x.dim as f64).sqrt().ceil() as usize)
                .max(1),
        };
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::stream(seed, streams::FOREST_TREE_BASE + t as u64);
                let mut weight = vec![0u32; n];
                for _ in 0..n {
                    weight[rng.gen_range(0..n)] += 1;
                }
                grow_class_tree(&x.rows, y, &weight, k, &params, &mut rng)
            })
            .collect();
        Forest { n_classes: k, trees }
    }

    pub fn votes(&self, x: &SparseVec<F>) -> Vec<usize> {
        self.trees.iter().map(|t| *t.leaf(x)).collect()
    }

    /// Fraction of trees voting for each class.
    pub fn vote_shares(&self, x: &SparseVec<F>) -> Vec<F> {
        let mut counts = vec![0usize; self.n_classes];
        for v in self.votes(x) {
            counts[v] += 1;
        }
        let n = F::from_count(self.trees.len());
        counts.into_iter().map(|c| F::from_count(c) / n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionLabel::*;

    #[test]
    fn vote_examples() {
        let mut votes = vec![Joy; 120];
        votes.extend(vec![Fear; 80]);
        assert_eq!(forest_vote(&votes).unwrap(), Joy);
        assert_eq!(forest_vote(&[Shame]).unwrap(), Shame);
        assert_eq!(forest_vote(&[Fear, Joy, Fear, Joy, Sadness]).unwrap(), Joy);
        assert!(forest_vote(&[]).is_err());
    }
}
