//! Property tests: the corpus invariants hold for arbitrary corpora and
//! seeds, and the sparse-vector file format round-trips values exactly.

use std::collections::BTreeSet;

use embfuse::corpus::{filter_min_count, stratified_split, tokenize, SplitSpec, TokenizedDocument};
use embfuse::vector::{read_sparse_file, write_sparse_file_to, SparseRow, SparseVector};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

fn corpus_strategy() -> impl Strategy<Value = Vec<TokenizedDocument>> {
    let labels = btree_set(prop::sample::select(vec!["a", "b", "c", "d"]), 1..=3);
    let tokens = vec(prop::sample::select(vec!["w0", "w1", "w2", "w3", "w4"]), 0..12);
    // Sizes start at 4 so any fraction in [0.25, 0.75] rounds to a
    // non-degenerate split.
    vec((labels, tokens), 4..40).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, (labels, tokens))| TokenizedDocument {
                id: format!("d{i}"),
                labels: labels.into_iter().map(str::to_string).collect(),
                tokens: tokens.into_iter().map(str::to_string).collect(),
            })
            .collect()
    })
}

fn rows_strategy() -> impl Strategy<Value = Vec<SparseRow<f64>>> {
    let labels = btree_set(prop::sample::select(vec!["x", "y", "z"]), 0..=2);
    let value = (-1e6f64..1e6).prop_map(|v| if v == 0.0 { 0.5 } else { v });
    let entries = vec((0u32..32, value), 0..8).prop_map(|mut entries| {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        entries
    });
    vec((labels, entries), 0..12).prop_map(|rows| {
        rows.into_iter()
            .map(|(labels, entries)| {
                let labels: BTreeSet<String> = labels.into_iter().map(str::to_string).collect();
                (labels, SparseVector::new(32, entries).unwrap())
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn tokenize_is_idempotent(text in ".{0,60}") {
        let once = tokenize(&text);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }

    #[test]
    fn split_partitions_exactly(
        corpus in corpus_strategy(),
        fraction in 0.25f64..0.75,
        seed in 0u64..1000,
    ) {
        let spec = SplitSpec::new(fraction, seed).unwrap();
        let (train, test) = stratified_split(&corpus, &spec).unwrap();
        prop_assert_eq!(train.len(), (fraction * corpus.len() as f64).round() as usize);
        prop_assert_eq!(train.len() + test.len(), corpus.len());
        // No document lost, none duplicated.
        let mut ids: Vec<&str> = train.iter().chain(&test).map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        let mut want: Vec<&str> = corpus.iter().map(|d| d.id.as_str()).collect();
        want.sort_unstable();
        prop_assert_eq!(ids, want);
    }

    #[test]
    fn min_count_filter_is_monotone(corpus in corpus_strategy(), k in 1usize..6) {
        prop_assert_eq!(&filter_min_count(&corpus, 1).unwrap(), &corpus);
        let loose = filter_min_count(&corpus, k).unwrap();
        let tight = filter_min_count(&corpus, k + 1).unwrap();
        for (l, t) in loose.iter().zip(&tight) {
            // Raising the threshold never brings a token back.
            let kept: BTreeSet<&str> = l.tokens.iter().map(String::as_str).collect();
            prop_assert!(t.tokens.iter().all(|tok| kept.contains(tok.as_str())));
            prop_assert!(t.tokens.len() <= l.tokens.len());
        }
    }

    #[test]
    fn sparse_file_round_trips_values(rows in rows_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.vec");
        write_sparse_file_to(&path, 32, None, &[], &rows).unwrap();
        let file = read_sparse_file::<f64>(&path).unwrap();
        prop_assert_eq!(file.dim, 32);
        prop_assert_eq!(file.boundary, None);
        prop_assert_eq!(file.rows, rows);
    }
}
