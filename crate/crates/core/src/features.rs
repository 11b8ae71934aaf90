//! Vocabulary, count vectors and TF / TF-IDF feature matrices.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::TokenizedReview;
use crate::scalar::Scalar;

/// Sparse vector with strictly increasing indices below `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVec<T> {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Copy> SparseVec<T> {
    pub fn empty(dim: usize) -> Self {
        SparseVec {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs in any order. Duplicate or
    /// out-of-range indices are rejected.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, T)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("duplicate sparse index {}", w[0].0)));
            }
        }
        if let Some(&(i, _)) = pairs.last() {
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: i + 1 });
            }
        }
        let (indices, values) = pairs.into_iter().unzip();
        Ok(SparseVec { dim, indices, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> Option<T> {
        self.indices.binary_search(&index).ok().map(|p| self.values[p])
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> SparseVec<U> {
        SparseVec {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<F: Scalar> SparseVec<F> {
    pub fn from_dense(values: &[F]) -> Self {
        let pairs = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != F::zero())
            .map(|(i, &v)| (i, v))
            .collect::<Vec<_>>();
        let (indices, values_nz) = pairs.into_iter().unzip();
        SparseVec {
            dim: values.len(),
            indices,
            values: values_nz,
        }
    }

    pub fn to_dense(&self) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn dot_dense(&self, dense: &[F]) -> F {
        self.iter().fold(F::zero(), |acc, (i, v)| acc + v * dense[i])
    }

    pub fn dot(&self, other: &SparseVec<F>) -> F {
        let (mut a, mut b) = (0, 0);
        let mut acc = F::zero();
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn sum(&self) -> F {
        self.values.iter().copied().sum()
    }

    pub fn norm(&self) -> F {
        self.values.iter().map(|&v| v * v).sum::<F>().sqrt()
    }

    pub fn squared_distance(&self, other: &SparseVec<F>) -> F {
        let (mut a, mut b) = (0, 0);
        let mut acc = F::zero();
        while a < self.indices.len() || b < other.indices.len() {
            let ia = self.indices.get(a).copied().unwrap_or(usize::MAX);
            let ib = other.indices.get(b).copied().unwrap_or(usize::MAX);
            let d = if ia == ib {
                let d = self.values[a] - other.values[b];
                a += 1;
                b += 1;
                d
            } else if ia < ib {
                a += 1;
                self.values[a - 1]
            } else {
                b += 1;
                other.values[b - 1]
            };
            acc += d * d;
        }
        acc
    }
}

/// Term → column index, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<String>::deserialize(d)?;
        Vocabulary::from_terms(terms).map_err(serde::de::Error::custom)
    }
}

pub fn build_vocabulary(docs: &[TokenizedReview]) -> Result<Vocabulary> {
    let mut terms = Vec::new();
    let mut index = HashMap::new();
    for tok in docs.iter().flat_map(|d| d.tokens.iter()) {
        if !index.contains_key(tok) {
            index.insert(tok.clone(), terms.len());
            terms.push(tok.clone());
        }
    }
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary { terms, index })
}

/// Occurrence counts of in-vocabulary tokens; zero entries are absent.
pub type CountVector = SparseVec<u32>;

pub fn count_vector(tokens: &[String], vocab: &Vocabulary) -> CountVector {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for t in tokens {
        if let Some(i) = vocab.get(t) {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    SparseVec::from_pairs(vocab.len(), counts.into_iter().collect())
        .expect("vocabulary indices are in range and unique")
}

/// Divides each count by the vector's total count.
pub fn term_frequency<F: Scalar>(cv: &CountVector) -> SparseVec<F> {
    let total: u64 = cv.values().iter().map(|&c| c as u64).sum();
    let total = F::from_u64(total).expect("count fits scalar");
    cv.map(|c| F::from_u32(c).expect("count fits scalar") / total)
}

/// Fitted inverse document frequencies, `idf[t] = ln(n_docs / df_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel<F> {
    pub idf: Vec<F>,
    pub n_docs: usize,
}

impl<F: Scalar> TfIdfModel<F> {
    pub fn dim(&self) -> usize {
        self.idf.len()
    }
}

/// Fits IDF weights over `dim` columns. Every column must occur in at least
/// one row.
pub fn fit_idf<F: Scalar>(rows: &[CountVector], dim: usize) -> Result<TfIdfModel<F>> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot fit IDF on zero documents"));
    }
    let mut df = vec![0usize; dim];
    for row in rows {
        if row.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: row.dim() });
        }
        for &i in row.indices() {
            df[i] += 1;
        }
    }
    if let Some(t) = df.iter().position(|&d| d == 0) {
        return Err(Error::invalid(format!("term {t} has zero document frequency")));
    }
    let n = F::from_count(rows.len());
    let idf = df.iter().map(|&d| (n / F::from_count(d)).ln()).collect();
    Ok(TfIdfModel { idf, n_docs: rows.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Count,
    Tf,
    #[default]
    Tfidf,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "count" => Ok(Scheme::Count),
            "tf" => Ok(Scheme::Tf),
            "tfidf" | "tf-idf" => Ok(Scheme::Tfidf),
            other => Err(Error::invalid(format!("unknown feature scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Count => "count",
            Scheme::Tf => "tf",
            Scheme::Tfidf => "tfidf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<F> {
    pub dim: usize,
    pub scheme: Scheme,
    pub rows: Vec<SparseVec<F>>,
}

impl<F: Scalar> FeatureMatrix<F> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix<F> {
        FeatureMatrix {
            dim: self.dim,
            scheme: self.scheme,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

pub fn encode<F: Scalar>(cv: &CountVector, model: &TfIdfModel<F>, scheme: Scheme) -> SparseVec<F> {
    match scheme {
        Scheme::Count => cv.map(|c| F::from_u32(c).expect("count fits scalar")),
        Scheme::Tf => term_frequency(cv),
        Scheme::Tfidf => {
            let tf = term_frequency::<F>(cv);
            let (indices, values) = tf
                .iter()
                .map(|(i, v)| (i, v * model.idf[i]))
                .filter(|(_, v)| *v != F::zero())
                .unzip();
            SparseVec {
                dim: tf.dim,
                indices,
                values,
            }
        }
    }
}

/// Encodes each document with the fitted vocabulary and IDF table.
/// Out-of-vocabulary tokens are dropped and empty documents give empty rows.
/// TF-IDF rows omit terms whose weight is exactly zero.
pub fn transform<F: Scalar>(
    docs: &[TokenizedReview],
    vocab: &Vocabulary,
    model: &TfIdfModel<F>,
    scheme: Scheme,
) -> Result<FeatureMatrix<F>> {
    if vocab.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: model.dim(),
        });
    }
    let rows = docs
        .par_iter()
        .map(|d| encode(&count_vector(&d.tokens, vocab), model, scheme))
        .collect();
    Ok(FeatureMatrix {
        dim: vocab.len(),
        scheme,
        rows,
    })
}

/// Vocabulary plus IDF table fitted on one set of documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFeatures<F> {
    pub vocabulary: Vocabulary,
    pub model: TfIdfModel<F>,
}

impl<F: Scalar> FittedFeatures<F> {
    pub fn fit(docs: &[TokenizedReview]) -> Result<Self> {
        let vocabulary = build_vocabulary(docs)?;
        let counts: Vec<CountVector> = docs.iter().map(|d| count_vector(&d.tokens, &vocabulary)).collect();
        let model = fit_idf(&counts, vocabulary.len())?;
        Ok(FittedFeatures { vocabulary, model })
    }

    pub fn transform(&self, docs: &[TokenizedReview], scheme: Scheme) -> Result<FeatureMatrix<F>> {
        transform(docs, &self.vocabulary, &self.model, scheme)
    }
}

#[derive(Serialize)]
struct DumpLine<'a, F> {
    id: usize,
    scheme: Scheme,
    indices: &'a [usize],
    values: &'a [F],
}

/// Writes one JSON object per row:
/// `{"id":…,"scheme":…,"indices":[…],"values":[…]}`.
pub fn dump_jsonl<F: Scalar, W: Write>(
    matrix: &FeatureMatrix<F>,
    ids: &[usize],
    mut out: W,
) -> Result<()> {
    if ids.len() != matrix.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n_rows(),
            actual: ids.len(),
        });
    }
    for (row, &id) in matrix.rows.iter().zip(ids) {
        let line = DumpLine {
            id,
            scheme: matrix.scheme,
            indices: row.indices(),
            values: row.values(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(|e| Error::io("<feature dump>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EmotionLabel;

    fn doc(tokens: &[&str]) -> TokenizedReview {
        TokenizedReview {
            id: 0,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            label: EmotionLabel::Joy,
        }
    }

    #[test]
    fn vocabulary_first_occurrence() {
        let v = build_vocabulary(&[doc(&["a", "b"]), doc(&["b", "c"])]).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.get("c"), Some(2));
        let v = build_vocabulary(&[doc(&["x", "x", "x"])]).unwrap();
        assert_eq!(v.len(), 1);
        assert!(matches!(build_vocabulary(&[doc(&[]), doc(&[])]), Err(Error::EmptyVocabulary)));
    }

    #[test]
    fn count_vector_examples() {
        let v = Vocabulary::from_terms(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let cv = count_vector(&doc(&["a", "b", "b"]).tokens, &v);
        assert_eq!(cv.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(count_vector(&[], &v).is_empty());
        let va = Vocabulary::from_terms(vec!["a".into()]).unwrap();
        assert!(count_vector(&doc(&["z"]).tokens, &va).is_empty());
    }

    #[test]
    fn term_frequency_examples() {
        let cv = SparseVec::from_pairs(2, vec![(0, 2u32), (1, 1)]).unwrap();
        let tf = term_frequency::<f64>(&cv);
        assert_eq!(tf.values(), [2.0 / 3.0, 1.0 / 3.0]);
        let cv = SparseVec::from_pairs(1, vec![(0, 5u32)]).unwrap();
        assert_eq!(term_frequency::<f64>(&cv).values(), [1.0]);
        assert!(term_frequency::<f64>(&CountVector::empty(3)).is_empty());
    }

    #[test]
    fn idf_examples() {
        let all = vec![SparseVec::from_pairs(1, vec![(0, 1u32)]).unwrap(); 3];
        assert_eq!(fit_idf::<f64>(&all, 1).unwrap().idf, vec![0.0]);

        let mut rows = vec![SparseVec::from_pairs(2, vec![(0, 1u32), (1, 1)]).unwrap()];
        rows.extend(vec![SparseVec::from_pairs(2, vec![(0, 1u32)]).unwrap(); 3]);
        let m = fit_idf::<f64>(&rows, 2).unwrap();
        assert!((m.idf[1] - 1.386294).abs() < 1e-6);

        let rows = vec![
            SparseVec::from_pairs(2, vec![(0, 1u32), (1, 1)]).unwrap(),
            SparseVec::from_pairs(2, vec![(0, 2u32)]).unwrap(),
        ];
        let m = fit_idf::<f64>(&rows, 2).unwrap();
        assert_eq!(m.idf, vec![0.0, std::f64::consts::LN_2]);
        assert!(fit_idf::<f64>(&[], 2).is_err());
    }

    #[test]
    fn transform_examples() {
        let docs = [doc(&["a"]), doc(&["a", "b"])];
        let fitted = FittedFeatures::<f64>::fit(&docs).unwrap();
        let m = fitted.transform(&docs, Scheme::Tfidf).unwrap();
        assert!(m.rows[0].is_empty());
        assert_eq!(m.rows[1].get(0), None);
        assert!((m.rows[1].get(1).unwrap() - 0.34657).abs() < 1e-5);

        let counts = fitted.transform(&docs, Scheme::Count).unwrap();
        for (row, d) in counts.rows.iter().zip(&docs) {
            let cv = count_vector(&d.tokens, &fitted.vocabulary);
            assert_eq!(row, &cv.map(|c| c as f64));
        }

        let bad = TfIdfModel { idf: vec![0.0], n_docs: 1 };
        assert!(transform(&docs, &fitted.vocabulary, &bad, Scheme::Tf).is_err());
    }

    #[test]
    fn oov_and_empty_docs_encode_to_zero_rows() {
        let fitted = FittedFeatures::<f32>::fit(&[doc(&["a", "b"])]).unwrap();
        let m = fitted.transform(&[doc(&[]), doc(&["zzz"])], Scheme::Tfidf).unwrap();
        assert!(m.rows.iter().all(|r| r.is_empty()));
    }

    #[test]
    fn sparse_distance_and_dot() {
        let a = SparseVec::from_dense(&[1.0f64, 0.0, 2.0, 0.0]);
        let b = SparseVec::from_dense(&[0.0f64, 3.0, 1.0, 0.0]);
        assert_eq!(a.dot(&b), 2.0);
        assert_eq!(a.squared_distance(&b), 1.0 + 9.0 + 1.0);
        assert_eq!(a.to_dense(), vec![1.0, 0.0, 2.0, 0.0]);
        assert!(SparseVec::from_pairs(3, vec![(1, 1.0f64), (1, 2.0)]).is_err());
        assert!(SparseVec::from_pairs(3, vec![(3, 1.0f64)]).is_err());
    }

    #[test]
    fn jsonl_dump_format() {
        let docs = [doc(&["a", "b", "b"])];
        let fitted = FittedFeatures::<f64>::fit(&docs).unwrap();
        let m = fitted.transform(&docs, Scheme::Count).unwrap();
        let mut buf = Vec::new();
        dump_jsonl(&m, &[7], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"id\":7,\"scheme\":\"count\",\"indices\":[0,1],\"values\":[1.0,2.0]}\n"
        );
    }
}
