//! Tokenisation, punctuation stripping and stop-word removal.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::corpus::{Corpus, EmotionLabel};
use crate::error::{Error, Result};

const DEFAULT_STOP_WORDS: &str = include_str!("../data/stopwords_en.txt");

#[inline]
pub fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Set of lowercase, punctuation-free tokens to drop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWordList {
    words: HashSet<String>,
}

impl StopWordList {
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut set = HashSet::new();
        for w in words {
            let w = w.as_ref();
            if w.is_empty() || w.chars().any(|c| c.is_whitespace() || is_punctuation(c)) {
                return Err(Error::invalid(format!("invalid stop word {w:?}")));
            }
            if w.to_lowercase() != w {
                return Err(Error::invalid(format!("stop word {w:?} is not lowercase")));
            }
            set.insert(w.to_string());
        }
        if set.is_empty() {
            return Err(Error::invalid("stop-word list is empty"));
        }
        Ok(StopWordList { words: set })
    }

    /// Parses the one-token-per-line format; `#` starts a comment. Entries are
    /// lowercased on read.
    pub fn parse(text: &str) -> Result<Self> {
        let words: Vec<String> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Self::new(words)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopWordList {
    fn default() -> Self {
        Self::parse(DEFAULT_STOP_WORDS).expect("bundled stop-word list is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedReview {
    pub id: usize,
    pub tokens: Vec<String>,
    pub label: EmotionLabel,
}

/// Splits on runs of Unicode whitespace and lowercases each piece.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Removes leading and trailing punctuation; interior punctuation stays.
pub fn strip_punctuation(token: &str) -> &str {
    token.trim_matches(is_punctuation)
}

pub fn remove_stop_words(tokens: Vec<String>, stop: &StopWordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stop.contains(t)).collect()
}

/// Full per-text pipeline: tokenize, strip punctuation, drop empties and
/// stop words.
pub fn preprocess_text(text: &str, stop: &StopWordList) -> Vec<String> {
    let stripped = tokenize(text)
        .iter()
        .map(|t| strip_punctuation(t))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    remove_stop_words(stripped, stop)
}

/// Preprocesses every review. Output order and length match the corpus;
/// reviews that lose all tokens are kept with an empty token list.
pub fn preprocess_corpus(corpus: &Corpus, stop: &StopWordList) -> Vec<TokenizedReview> {
    corpus
        .reviews()
        .par_iter()
        .map(|r| TokenizedReview {
            id: r.id,
            tokens: preprocess_text(&r.text, stop),
            label: r.label,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("He was holding on tightly"),
            toks(&["he", "was", "holding", "on", "tightly"])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  two   spaces "), toks(&["two", "spaces"]));
        assert_eq!(tokenize("a\u{00a0}b\tc\nd"), toks(&["a", "b", "c", "d"]));
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_punctuation("tightly."), "tightly");
        assert_eq!(strip_punctuation("!!!"), "");
        assert_eq!(strip_punctuation("one's"), "one's");
        assert_eq!(strip_punctuation("\"end-of-term\","), "end-of-term");
        assert_eq!(strip_punctuation("«word»"), "word");
        assert_eq!(strip_punctuation("$5"), "$5");
    }

    #[test]
    fn stop_word_examples() {
        let stop = StopWordList::new(["he", "was"]).unwrap();
        assert_eq!(remove_stop_words(toks(&["he", "was", "holding"]), &stop), toks(&["holding"]));
        assert!(remove_stop_words(vec![], &stop).is_empty());
        let default = StopWordList::default();
        assert!(remove_stop_words(toks(&["a", "the", "am"]), &default).is_empty());
    }

    #[test]
    fn default_list_contains_required_words() {
        let stop = StopWordList::default();
        for w in ["a", "the", "am", "this", "that", "is", "was", "by"] {
            assert!(stop.contains(w), "{w}");
        }
        assert!(stop.len() > 150);
    }

    #[test]
    fn stop_list_file_format() {
        let s = StopWordList::parse("# comment\nFoo\n\n bar # trailing\n").unwrap();
        assert!(s.contains("foo") && s.contains("bar"));
        assert_eq!(s.len(), 2);
        assert!(StopWordList::parse("# nothing\n").is_err());
        assert!(StopWordList::new(["don't"]).is_err());
    }

    #[test]
    fn corpus_rows_stay_aligned() {
        use EmotionLabel::*;
        let c = Corpus::from_pairs([(Joy, "The!!! a"), (Fear, "I froze.")]).unwrap();
        let out = preprocess_corpus(&c, &StopWordList::default());
        assert_eq!(out.len(), 2);
        assert!(out[0].tokens.is_empty());
        assert_eq!(out[1].tokens, toks(&["froze"]));
        assert_eq!(out[1].id, 1);
    }

    #[test]
    fn sample_training_sentence() {
        let text = "My 2 year old son climbed onto the window sill and fell. I was very scared.";
        let stop = StopWordList::default();
        let out = preprocess_text(text, &stop);
        assert_eq!(out, toks(&["2", "year", "old", "son", "climbed", "window", "sill", "fell", "scared"]));
    }

    proptest! {
        #[test]
        fn output_tokens_are_clean(text in "\\PC{0,80}") {
            let stop = StopWordList::default();
            let out = preprocess_text(&text, &stop);
            for t in &out {
                prop_assert!(!t.is_empty());
                prop_assert!(!stop.contains(t));
                prop_assert!(!t.starts_with(is_punctuation));
                prop_assert!(!t.ends_with(is_punctuation));
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn preprocessing_is_idempotent(text in "[a-zA-Z .,!?'\\-\"]{0,80}") {
            let stop = StopWordList::default();
            let once = preprocess_text(&text, &stop);
            let twice = preprocess_text(&once.join(" "), &stop);
            prop_assert_eq!(once, twice);
        }
    }
}
