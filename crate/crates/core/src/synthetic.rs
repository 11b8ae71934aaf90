//! Seeded synthetic corpora with a known answer.
//!
//! Every label owns a private vocabulary, so any reasonable classifier can
//! separate the labels perfectly. A few filler words shared by all labels
//! keep the documents from being trivially one-hot.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{Corpus, EmotionLabel, Review};
use crate::rng;

const WORDS_PER_LABEL: usize = 12;
const FILLER: [&str; 6] = ["morning", "street", "people", "window", "evening", "table"];

/// A corpus plus the intended train/test partition (indices into the corpus).
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// The private word list of `label`, e.g. `joyw0 … joyw11`.
pub fn label_vocabulary(label: EmotionLabel) -> Vec<String> {
    (0..WORDS_PER_LABEL).map(|i| format!("{}w{i}", label.as_str())).collect()
}

fn document(label: EmotionLabel, rng: &mut rng::Rng) -> String {
    let own = label_vocabulary(label);
    let n_own = rng.gen_range(5..=9);
    let n_filler = rng.gen_range(0..=2);
    let mut words: Vec<&str> = (0..n_own).map(|_| own[rng.gen_range(0..own.len())].as_str()).collect();
    words.extend((0..n_filler).map(|_| FILLER[rng.gen_range(0..FILLER.len())]));
    words.shuffle(rng);
    let mut text = words.join(" ");
    text.push('.');
    text
}

/// `train_per_label + test_per_label` documents for each of the five
/// labels, interleaved by label in file order. The first `train_per_label`
/// documents of every label form the training part.
pub fn separable(train_per_label: usize, test_per_label: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = rng::stream(seed, 0);
    let per_label = train_per_label + test_per_label;
    let mut reviews = Vec::with_capacity(per_label * EmotionLabel::ALL.len());
    let mut train = Vec::new();
    let mut test = Vec::new();
    for i in 0..per_label {
        for label in EmotionLabel::ALL {
            let id = reviews.len();
            reviews.push(Review {
                id,
                text: document(label, &mut rng),
                label,
            });
            if i < train_per_label {
                train.push(id);
            } else {
                test.push(id);
            }
        }
    }
    let corpus = Corpus::new(reviews).expect("synthetic reviews are valid");
    SyntheticCorpus { corpus, train, test }
}
