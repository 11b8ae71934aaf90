//! k-nearest-neighbour classification with unweighted plurality voting.

use serde::{Deserialize, Serialize};

use crate::corpus::EmotionLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Cosine,
    Euclidean,
}

impl std::str::FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(Distance::Cosine),
            "euclidean" => Ok(Distance::Euclidean),
            other => Err(Error::invalid(format!("unknown distance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub distance: Distance,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 25, distance: Distance::Cosine }
    }
}

/// Plurality label among the first `k` neighbours (sorted by ascending
/// distance). Tied labels resolve to the one with the nearest member.
pub fn knn_vote<F: Scalar>(neighbors: &[(EmotionLabel, F)], k: usize) -> Result<EmotionLabel> {
    if k == 0 || k > neighbors.len() {
        return Err(Error::invalid(format!(
            "k = {k} out of range for {} neighbours",
            neighbors.len()
        )));
    }
    let labels: Vec<usize> = neighbors[..k].iter().map(|(l, _)| l.index()).collect();
    let scores: Vec<f64> = vote_scores_from_ranked(&labels, EmotionLabel::ALL.len());
    let best = super::argmax(&scores);
    Ok(EmotionLabel::ALL[best])
}

/// Vote count per class plus a fractional bonus that is larger the nearer
/// the class's first neighbour is. The bonus stays below one vote, so the
/// arg-max is the plurality with the nearest-neighbour tie-break.
fn vote_scores_from_ranked<F: Scalar>(ranked: &[usize], n_classes: usize) -> Vec<F> {
    let k = ranked.len();
    let mut scores = vec![F::zero(); n_classes];
    let mut seen = vec![false; n_classes];
    for (pos, &c) in ranked.iter().enumerate() {
        scores[c] += F::one();
        if !seen[c] {
            seen[c] = true;
            scores[c] += F::from_count(k - pos) / F::from_count(k + 1);
        }
    }
    scores
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel<F> {
    pub k: usize,
    pub distance: Distance,
    /// Training rows; unit-normalised (zero rows kept as zero) under cosine.
    pub rows: Vec<SparseVec<F>>,
    pub classes: Vec<usize>,
    pub n_classes: usize,
}

impl<F: Scalar> KnnModel<F> {
    pub(crate) fn fit(config: &KnnConfig, x: &FeatureMatrix<F>, y: &[usize], n_classes: usize) -> Result<Self> {
        if config.k > x.n_rows() {
            return Err(Error::invalid(format!(
                "k = {} exceeds training size {}",
                config.k,
                x.n_rows()
            )));
        }
        let rows = match config.distance {
            Distance::Cosine => x.rows.iter().map(unit).collect(),
            Distance::Euclidean => x.rows.clone(),
        };
        Ok(KnnModel { k: config.k, distance: config.distance, rows, classes: y.to_vec(), n_classes })
    }

    /// Distance from `query` to every training row.
    pub fn distances(&self, query: &SparseVec<F>) -> Vec<F> {
        match self.distance {
            Distance::Cosine => {
                let q = unit(query);
                self.rows
                    .iter()
                    .map(|r| {
                        if q.is_empty() || r.is_empty() {
                            F::one()
                        } else {
                            F::one() - q.dot(r)
                        }
                    })
                    .collect()
            }
            Distance::Euclidean => self.rows.iter().map(|r| query.squared_distance(r).sqrt()).collect(),
        }
    }

    /// Indices of the `k` nearest rows ordered by (distance, row index).
    pub fn neighbors(&self, query: &SparseVec<F>) -> Vec<usize> {
        let d = self.distances(query);
        let cmp = |a: &usize, b: &usize| d[*a].partial_cmp(&d[*b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b));
        let mut idx: Vec<usize> = (0..d.len()).collect();
        if self.k < idx.len() {
            idx.select_nth_unstable_by(self.k - 1, cmp);
            idx.truncate(self.k);
        }
        idx.sort_by(cmp);
        idx
    }

    pub fn vote_scores(&self, query: &SparseVec<F>) -> Vec<F> {
        let ranked: Vec<usize> = self.neighbors(query).into_iter().map(|i| self.classes[i]).collect();
        vote_scores_from_ranked(&ranked, self.n_classes)
    }
}

fn unit<F: Scalar>(v: &SparseVec<F>) -> SparseVec<F> {
    let n = v.norm();
    if n == F::zero() {
        v.clone()
    } else {
        v.map(|x| x / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionLabel::*;

    #[test]
    fn plurality_and_ties() {
        assert_eq!(knn_vote(&[(Joy, 0.1f64), (Joy, 0.2), (Fear, 0.3)], 3).unwrap(), Joy);
        assert_eq!(knn_vote(&[(Joy, 0.1f64), (Fear, 0.2)], 2).unwrap(), Joy);
        assert_eq!(knn_vote(&[(Guilt, 0.1f64), (Joy, 0.2)], 2).unwrap(), Guilt);
        assert_eq!(knn_vote(&[(Shame, 0.1f64), (Joy, 0.2), (Joy, 0.3)], 1).unwrap(), Shame);
        assert_eq!(
            knn_vote(&[(Fear, 0.1f64), (Joy, 0.2), (Joy, 0.3), (Fear, 0.4), (Guilt, 0.5)], 4).unwrap(),
            Fear
        );
        assert!(knn_vote(&[(Joy, 0.1f64)], 2).is_err());
        assert!(knn_vote::<f64>(&[(Joy, 0.1)], 0).is_err());
    }

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix<f64> {
        let dim = rows[0].len();
        FeatureMatrix {
            dim,
            scheme: crate::features::Scheme::Tfidf,
            rows: rows.iter().map(|r| SparseVec::from_dense(r)).collect(),
        }
    }

    #[test]
    fn nearest_self() {
        let x = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7]]);
        let m = KnnModel::fit(&KnnConfig { k: 1, distance: Distance::Cosine }, &x, &[0, 1, 2], 4).unwrap();
        for (i, r) in x.rows.iter().enumerate() {
            assert_eq!(m.neighbors(r), vec![i]);
        }
    }

    #[test]
    fn zero_query_uses_lowest_index_rows() {
        let x = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 3.0]]);
        let m = KnnModel::fit(&KnnConfig { k: 3, distance: Distance::Cosine }, &x, &[0, 1, 1, 1], 4).unwrap();
        let q = SparseVec::empty(2);
        assert!(m.distances(&q).iter().all(|&d| d == 1.0));
        assert_eq!(m.neighbors(&q), vec![0, 1, 2]);
    }

    #[test]
    fn euclidean_distance() {
        let x = matrix(vec![vec![0.0, 0.0], vec![3.0, 4.0]]);
        let m = KnnModel::fit(&KnnConfig { k: 1, distance: Distance::Euclidean }, &x, &[0, 1], 4).unwrap();
        let d = m.distances(&SparseVec::from_dense(&[3.0, 0.0]));
        assert_eq!(d, vec![3.0, 4.0]);
    }

    #[test]
    fn k_larger_than_training_set_is_rejected() {
        let x = matrix(vec![vec![1.0]]);
        assert!(KnnModel::fit(&KnnConfig { k: 2, distance: Distance::Cosine }, &x, &[0], 4).is_err());
    }
}
