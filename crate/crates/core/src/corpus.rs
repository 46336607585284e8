//! Corpus ingestion, tokenization, multi-label stratified splitting, and
//! subsampling.
//!
//! Corpora live on disk as JSON Lines: one object per line with fields
//! `"id"` (string), `"labels"` (array of strings, optional in prediction
//! mode), and `"text"` (string). Lines starting with `#` are skipped so that
//! files written by this crate can carry their producing configuration as a
//! comment.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::Error;
use crate::Result;

/// A document as read from a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    /// Label set; may be empty only in prediction mode.
    #[serde(default)]
    pub labels: BTreeSet<String>,
    pub text: String,
}

/// A document after tokenization; the unit of all vectorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub id: String,
    pub labels: BTreeSet<String>,
    pub tokens: Vec<String>,
}

impl TokenizedDocument {
    /// Tokenizes a raw document.
    pub fn from_raw(doc: &RawDocument) -> Self {
        Self {
            id: doc.id.clone(),
            labels: doc.labels.clone(),
            tokens: tokenize(&doc.text),
        }
    }
}

/// Parameters of a stratified train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of documents assigned to the train side, strictly in (0,1).
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }
}

/// Lowercases, space-pads every punctuation character (Unicode general
/// categories P*), and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut padded = String::with_capacity(lowered.len() + lowered.len() / 4);
    for ch in lowered.chars() {
        if ch.general_category_group() == GeneralCategoryGroup::Punctuation {
            padded.push(' ');
            padded.push(ch);
            padded.push(' ');
        } else {
            padded.push(ch);
        }
    }
    padded.split_whitespace().map(str::to_string).collect()
}

/// Drops every token whose corpus-wide occurrence count is below
/// `min_count`. Document ids and labels are unchanged; documents may end up
/// empty but are retained.
pub fn filter_min_count(
    corpus: &[TokenizedDocument],
    min_count: usize,
) -> Result<Vec<TokenizedDocument>> {
    if min_count < 1 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for tok in &doc.tokens {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    Ok(corpus
        .iter()
        .map(|doc| TokenizedDocument {
            id: doc.id.clone(),
            labels: doc.labels.clone(),
            tokens: doc
                .tokens
                .iter()
                .filter(|t| freq[t.as_str()] >= min_count)
                .cloned()
                .collect(),
        })
        .collect())
}

/// Greedy iterative stratification: documents are assigned in order of the
/// rarest remaining label, each going to the side where that label's deficit
/// is largest; ties break on the overall split deficit, then on seed-keyed
/// order. The train side receives exactly `round(train_fraction * n)`
/// documents.
pub fn stratified_split(
    corpus: &[TokenizedDocument],
    spec: &SplitSpec,
) -> Result<(Vec<TokenizedDocument>, Vec<TokenizedDocument>)> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot split an empty corpus"));
    }
    if let Some(doc) = corpus.iter().find(|d| d.labels.is_empty()) {
        return Err(Error::invalid(format!(
            "document {:?} has no labels; labels are required for stratification",
            doc.id
        )));
    }
    let n = corpus.len();
    let train_total = (spec.train_fraction * n as f64).round() as usize;
    let train_total = train_total.clamp(0, n);

    // Seed-keyed processing order.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    // Remaining desired counts per label and side.
    let mut label_count: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for l in &doc.labels {
            *label_count.entry(l.as_str()).or_insert(0) += 1;
        }
    }
    let mut desire_train: HashMap<&str, f64> = HashMap::new();
    let mut desire_test: HashMap<&str, f64> = HashMap::new();
    for (&l, &c) in &label_count {
        let t = spec.train_fraction * c as f64;
        desire_train.insert(l, t);
        desire_test.insert(l, c as f64 - t);
    }
    // How many unassigned documents still carry each label.
    let mut remaining: HashMap<&str, usize> = label_count.clone();

    let mut assigned: Vec<Option<bool>> = vec![None; n]; // Some(true) = train
    let mut quota_train = train_total;
    let mut quota_test = n - train_total;
    let mut unassigned = n;

    while unassigned > 0 {
        // Rarest remaining label; ties go to the lexicographically smallest.
        let target = remaining
            .iter()
            .filter(|(_, &c)| c > 0)
            .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
            .map(|(&l, _)| l);
        let Some(target) = target else { break };

        for &i in &order {
            if assigned[i].is_some() || !corpus[i].labels.contains(target) {
                continue;
            }
            let to_train = if quota_train == 0 {
                false
            } else if quota_test == 0 {
                true
            } else {
                let dt = desire_train[target];
                let dv = desire_test[target];
                if dt > dv {
                    true
                } else if dv > dt {
                    false
                } else if quota_train != quota_test {
                    quota_train > quota_test
                } else {
                    rng.gen_bool(0.5)
                }
            };
            assigned[i] = Some(to_train);
            unassigned -= 1;
            if to_train {
                quota_train -= 1;
            } else {
                quota_test -= 1;
            }
            for l in &corpus[i].labels {
                let l = l.as_str();
                *remaining.get_mut(l).unwrap() -= 1;
                if to_train {
                    *desire_train.get_mut(l).unwrap() -= 1.0;
                } else {
                    *desire_test.get_mut(l).unwrap() -= 1.0;
                }
            }
        }
    }

    let mut train = Vec::with_capacity(train_total);
    let mut test = Vec::with_capacity(n - train_total);
    for (i, doc) in corpus.iter().enumerate() {
        match assigned[i] {
            Some(true) => train.push(doc.clone()),
            Some(false) => test.push(doc.clone()),
            None => unreachable!("every labeled document gets assigned"),
        }
    }
    Ok((train, test))
}

/// Uniform sample of `n` documents without replacement, preserving the
/// original relative order.
pub fn subsample(
    corpus: &[TokenizedDocument],
    n: usize,
    seed: u64,
) -> Result<Vec<TokenizedDocument>> {
    if n < 1 || n > corpus.len() {
        return Err(Error::invalid(format!(
            "sample size {n} out of range for corpus of {}",
            corpus.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, corpus.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| corpus[i].clone()).collect())
}

/// Reads a JSONL corpus. `#`-prefixed lines and blank lines are skipped;
/// duplicate document ids are rejected.
pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<RawDocument>> {
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line)
            .map_err(|e| Error::format(&display, lineno, e.to_string()))?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::format(
                &display,
                lineno,
                format!("duplicate document id {:?}", doc.id),
            ));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes a JSONL corpus, prefixed by optional `#` comment lines.
pub fn write_corpus_jsonl(path: &Path, comments: &[String], docs: &[RawDocument]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in comments {
        writeln!(out, "#{c}")?;
    }
    for doc in docs {
        let line = serde_json::to_string(doc).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, labels: &[&str], tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: id.to_string(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn tokenize_pads_punctuation() {
        assert_eq!(tokenize("Harsh winter!"), vec!["harsh", "winter", "!"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(
            tokenize("co-occur,twice"),
            vec!["co", "-", "occur", ",", "twice"]
        );
    }

    #[test]
    fn tokenize_is_idempotent_on_its_output() {
        for text in ["Mixed CASE, with 3.14 numbers!", "ΣΤΑ ελληνικά — δύο;"] {
            let once = tokenize(text);
            let again = tokenize(&once.join(" "));
            assert_eq!(once, again);
        }
    }

    #[test]
    fn min_count_filter_drops_rare_tokens() {
        let corpus = vec![doc("1", &["l"], &["a", "b", "a"]), doc("2", &["l"], &["a", "c"])];
        let filtered = filter_min_count(&corpus, 2).unwrap();
        assert_eq!(filtered[0].tokens, vec!["a", "a"]);
        assert_eq!(filtered[1].tokens, vec!["a"]);

        let identity = filter_min_count(&corpus, 1).unwrap();
        assert_eq!(identity, corpus);

        let one = vec![doc("1", &["l"], &["x", "y"])];
        let emptied = filter_min_count(&one, 3).unwrap();
        assert!(emptied[0].tokens.is_empty());
    }

    #[test]
    fn split_is_exact_when_achievable() {
        // 10 docs, 2 labels on 5 docs each; fraction 0.8 puts 4 of each in train.
        let mut corpus = Vec::new();
        for i in 0..5 {
            corpus.push(doc(&format!("a{i}"), &["A"], &["t"]));
            corpus.push(doc(&format!("b{i}"), &["B"], &["t"]));
        }
        let spec = SplitSpec::new(0.8, 7).unwrap();
        let (train, test) = stratified_split(&corpus, &spec).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
        for label in ["A", "B"] {
            let in_train = train.iter().filter(|d| d.labels.contains(label)).count();
            assert_eq!(in_train, 4, "label {label}");
        }
    }

    #[test]
    fn split_nine_identical_docs() {
        let corpus: Vec<_> = (0..9).map(|i| doc(&i.to_string(), &["only"], &["t"])).collect();
        let spec = SplitSpec::new(8.0 / 9.0, 0).unwrap();
        let (train, test) = stratified_split(&corpus, &spec).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn split_requires_labels() {
        let corpus = vec![doc("1", &[], &["t"])];
        let spec = SplitSpec::new(0.5, 0).unwrap();
        assert!(stratified_split(&corpus, &spec).is_err());
    }

    #[test]
    fn split_spec_rejects_degenerate_fractions() {
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn subsample_is_deterministic_and_order_preserving() {
        let corpus: Vec<_> = (0..20).map(|i| doc(&i.to_string(), &["l"], &["t"])).collect();
        assert_eq!(subsample(&corpus, 20, 1).unwrap(), corpus);
        let one = subsample(&corpus, 1, 5).unwrap();
        assert_eq!(one, subsample(&corpus, 1, 5).unwrap());
        let half = subsample(&corpus, 10, 9).unwrap();
        assert_eq!(half, subsample(&corpus, 10, 9).unwrap());
        let ids: Vec<usize> = half.iter().map(|d| d.id.parse().unwrap()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
        assert!(subsample(&corpus, 21, 0).is_err());
    }
}
