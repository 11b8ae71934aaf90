//! Labeled emotion corpus: loading, validation, conversion and train/test
//! splitting.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

pub const LABEL_COUNT: usize = 5;

/// The five in-scope emotion labels. The declaration order is the global
/// tie-break order used everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Joy,
    Fear,
    Sadness,
    Shame,
    Guilt,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; LABEL_COUNT] = [
        EmotionLabel::Joy,
        EmotionLabel::Fear,
        EmotionLabel::Sadness,
        EmotionLabel::Shame,
        EmotionLabel::Guilt,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Joy => "joy",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Shame => "shame",
            EmotionLabel::Guilt => "guilt",
        }
    }

    /// Capitalised name as used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            EmotionLabel::Joy => "Joy",
            EmotionLabel::Fear => "Fear",
            EmotionLabel::Sadness => "Sadness",
            EmotionLabel::Shame => "Shame",
            EmotionLabel::Guilt => "Guilt",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseLabelError(pub String);

impl fmt::Display for ParseLabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown emotion label {:?}", self.0)
    }
}

impl std::error::Error for ParseLabelError {}

impl FromStr for EmotionLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        EmotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| ParseLabelError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: usize,
    pub text: String,
    pub label: EmotionLabel,
}

/// A non-empty, ordered collection of reviews with strictly increasing ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    reviews: Vec<Review>,
}

impl Corpus {
    pub fn new(reviews: Vec<Review>) -> Result<Self> {
        if reviews.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (pos, pair) in reviews.windows(2).enumerate() {
            if pair[1].id <= pair[0].id {
                return Err(Error::invalid(format!(
                    "review ids must be strictly increasing (position {})",
                    pos + 1
                )));
            }
        }
        if let Some(r) = reviews.iter().find(|r| r.text.trim().is_empty()) {
            return Err(Error::invalid(format!("review {} has empty text", r.id)));
        }
        Ok(Corpus { reviews })
    }

    /// Builds a corpus from `(label, text)` pairs, numbering ids from 0.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (EmotionLabel, S)>,
    ) -> Result<Self> {
        let reviews = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (label, text))| Review {
                id,
                text: text.into(),
                label,
            })
            .collect();
        Corpus::new(reviews)
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn labels(&self) -> Vec<EmotionLabel> {
        self.reviews.iter().map(|r| r.label).collect()
    }
}

/// Per-label counts in fixed label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelHistogram {
    counts: [usize; LABEL_COUNT],
}

impl LabelHistogram {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a EmotionLabel>) -> Self {
        let mut counts = [0; LABEL_COUNT];
        for l in labels {
            counts[l.index()] += 1;
        }
        LabelHistogram { counts }
    }

    pub fn get(&self, label: EmotionLabel) -> usize {
        self.counts[label.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EmotionLabel, usize)> + '_ {
        EmotionLabel::ALL.into_iter().zip(self.counts.iter().copied())
    }
}

pub fn label_histogram(corpus: &Corpus) -> LabelHistogram {
    LabelHistogram::from_labels(corpus.reviews.iter().map(|r| &r.label))
}

/// Loads a canonical `label,text` CSV file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file))
}

/// Parses canonical CSV. Row numbers in errors are 1-based file lines.
pub fn read_corpus<R: Read>(reader: R) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if names != ["label", "text"] {
        return Err(Error::MalformedRow {
            row: 1,
            reason: format!("expected header `label,text`, found {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut reviews = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let label: EmotionLabel = record[0].parse().map_err(|_| Error::UnknownLabel {
            row,
            label: record[0].to_string(),
        })?;
        let text = record[1].trim();
        if text.is_empty() {
            return Err(Error::MalformedRow {
                row,
                reason: "empty review text".into(),
            });
        }
        reviews.push(Review {
            id: reviews.len(),
            text: text.to_string(),
            label,
        });
    }
    if reviews.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Corpus::new(reviews)
}

pub fn write_corpus<W: Write>(writer: W, corpus: &Corpus) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(writer);
    wtr.write_record(["label", "text"])?;
    for r in &corpus.reviews {
        wtr.write_record([r.label.as_str(), r.text.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn save_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(std::io::BufWriter::new(file), corpus)
}

/// Raw ISEAR emotion categories, in the order of the survey's `EMOT` codes.
const ISEAR_EMOTIONS: [&str; 7] = ["joy", "fear", "anger", "sadness", "disgust", "shame", "guilt"];

fn detect_delimiter(first_line: &str) -> u8 {
    let mut best = (b',', 0usize);
    for d in *b"|,\t" {
        let mut in_quotes = false;
        let mut n = 0;
        for b in first_line.bytes() {
            if b == b'"' {
                in_quotes = !in_quotes;
            } else if b == d && !in_quotes {
                n += 1;
            }
        }
        if n > best.1 {
            best = (d, n);
        }
    }
    best.0
}

fn isear_label(raw: &str) -> Option<&'static str> {
    let t = raw.trim().to_ascii_lowercase();
    if let Some(e) = ISEAR_EMOTIONS.iter().find(|e| **e == t) {
        return Some(e);
    }
    match t.parse::<usize>() {
        Ok(code @ 1..=7) => Some(ISEAR_EMOTIONS[code - 1]),
        _ => None,
    }
}

/// Converts a raw ISEAR export into canonical CSV, keeping the five
/// in-scope labels. Returns the number of rows written.
///
/// Accepted layouts: the full survey export (label column `Field1` or
/// numeric `EMOT`, text column `SIT`), a headed file with `label`/`emotion`
/// and `text`/`sentence` columns, or a headerless two-column `label,text`
/// file.
pub fn convert_isear(raw_path: impl AsRef<Path>, out_path: impl AsRef<Path>) -> Result<usize> {
    let raw_path = raw_path.as_ref();
    let bytes = std::fs::read(raw_path).map_err(|e| Error::io(raw_path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let corpus = parse_isear(&text)?;
    let out_path = out_path.as_ref();
    save_corpus(out_path, &corpus)?;
    Ok(corpus.len())
}

pub fn parse_isear(text: &str) -> Result<Corpus> {
    let first_line = text.lines().next().ok_or(Error::EmptyDataset)?;
    let delimiter = detect_delimiter(first_line);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset),
    };
    let cols: Vec<String> = first.iter().map(|c| c.trim().to_ascii_lowercase()).collect();
    let find = |names: &[&str]| cols.iter().position(|c| names.contains(&c.as_str()));
    let (label_col, text_col, header) = match (
        find(&["field1", "label", "emotion"]).or_else(|| find(&["emot"])),
        find(&["sit", "text", "sentence", "situation"]),
    ) {
        (Some(l), Some(t)) => (l, t, true),
        _ => {
            if first.len() < 2 {
                return Err(Error::MalformedRow {
                    row: 1,
                    reason: "cannot locate label and text columns".into(),
                });
            }
            if isear_label(&first[0]).is_some() {
                (0, 1, false)
            } else if isear_label(&first[1]).is_some() {
                (1, 0, false)
            } else {
                return Err(Error::MalformedRow {
                    row: 1,
                    reason: "cannot locate label and text columns".into(),
                });
            }
        }
    };

    let mut pairs = Vec::new();
    let mut handle = |row: usize, rec: &csv::StringRecord| -> Result<()> {
        let (Some(raw_label), Some(raw_text)) = (rec.get(label_col), rec.get(text_col)) else {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected at least {} columns", label_col.max(text_col) + 1),
            });
        };
        let name = isear_label(raw_label).ok_or_else(|| Error::UnknownLabel {
            row,
            label: raw_label.to_string(),
        })?;
        let Ok(label) = name.parse::<EmotionLabel>() else {
            return Ok(());
        };
        let cleaned = raw_text.split_whitespace().collect::<Vec<_>>().join(" ");
        if !cleaned.is_empty() {
            pairs.push((label, cleaned));
        }
        Ok(())
    };
    if !header {
        handle(1, &first)?;
    }
    for rec in records {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        handle(row, &rec)?;
    }
    if pairs.is_empty() {
        return Err(Error::NoInScopeRows);
    }
    Corpus::from_pairs(pairs)
}

/// A train/test partition of corpus row indices. Both index lists are sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub test_fraction: f64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Test-set size: `fraction * n` rounded half-up, kept within `1..n`.
pub fn test_size(n: usize, test_fraction: f64) -> usize {
    let raw = (test_fraction * n as f64 + 0.5).floor() as usize;
    raw.clamp(1, n - 1)
}

fn check_split_args(n: usize, test_fraction: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 reviews to split, got {n}")));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    Ok(())
}

fn plan_from_test(n: usize, seed: u64, test_fraction: f64, mut test: Vec<usize>) -> SplitPlan {
    test.sort_unstable();
    let mut is_test = vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let train_indices = (0..n).filter(|&i| !is_test[i]).collect();
    SplitPlan {
        seed,
        test_fraction,
        train_indices,
        test_indices: test,
    }
}

/// Uniform random split of `0..n` without replacement.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    check_split_args(n, test_fraction)?;
    let k = test_size(n, test_fraction);
    let mut rng = rng::stream(seed, streams::SPLIT);
    let test = index::sample(&mut rng, n, k).into_vec();
    Ok(plan_from_test(n, seed, test_fraction, test))
}

pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    split_indices(corpus.len(), test_fraction, seed)
}

/// Split that preserves label proportions. The total test size equals the
/// unstratified size; per-label quotas use largest remainders.
pub fn split_stratified(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    let n = corpus.len();
    check_split_args(n, test_fraction)?;
    let total = test_size(n, test_fraction);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); LABEL_COUNT];
    for (i, r) in corpus.reviews.iter().enumerate() {
        groups[r.label.index()].push(i);
    }
    let exact: Vec<f64> = groups.iter().map(|g| g.len() as f64 * total as f64 / n as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..LABEL_COUNT).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total - quota.iter().sum::<usize>();
    for &l in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        if quota[l] < groups[l].len() {
            quota[l] += 1;
            missing -= 1;
        }
    }
    let mut rng = rng::stream(seed, streams::SPLIT);
    let mut test = Vec::with_capacity(total);
    for (g, &q) in groups.iter().zip(&quota) {
        test.extend(index::sample(&mut rng, g.len(), q).into_iter().map(|j| g[j]));
    }
    Ok(plan_from_test(n, seed, test_fraction, test))
}

/// K-fold partition: the fold test sets are disjoint and cover `0..n`.
pub fn k_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<SplitPlan>> {
    if folds < 2 || folds > n {
        return Err(Error::invalid(format!("fold count must be in 2..={n}, got {folds}")));
    }
    let mut rng = rng::stream(seed, streams::FOLDS);
    let perm = index::sample(&mut rng, n, n).into_vec();
    let plans = (0..folds)
        .map(|f| {
            let lo = f * n / folds;
            let hi = (f + 1) * n / folds;
            plan_from_test(n, seed, 1.0 / folds as f64, perm[lo..hi].to_vec())
        })
        .collect();
    Ok(plans)
}
