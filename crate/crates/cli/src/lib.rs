//! Experiment driver binding the library modules into a batch CLI: corpus
//! splitting, vectorization, OvR training, prediction, evaluation, learning
//! curves, and hash-dimension sweeps.
//!
//! Every output file embeds the invocation that produced it as a `#`
//! comment (or a `config` field in JSON reports), so artifacts are
//! self-describing. All commands are deterministic given explicit seeds;
//! reported timings are wall clock and never part of any contract.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use embfuse::compose::{compose, compose_conc, ComposeMode};
use embfuse::corpus::{
    filter_min_count, read_corpus_jsonl, stratified_split, subsample, tokenize, write_corpus_jsonl,
    RawDocument, SplitSpec, TokenizedDocument,
};
use embfuse::embeddings::load_word2vec_text;
use embfuse::fusion::fuse;
use embfuse::metrics::{evaluate, micro_f1, EvalReport};
use embfuse::onehot::{hash_transform, TfidfModel, DEFAULT_HASH_DIM};
use embfuse::svm::{cross_validate_lambda, train_ovr, LinearModel, TrainConfig};
use embfuse::vector::{read_sparse_file, write_sparse_file_to, SparseRow};
use embfuse::{EmbeddingTable32, Error, Result, SparseVec};

/// Document representation produced by `vectorize` and the sweep commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Tfidf,
    Hash,
    Avg,
    Min,
    Max,
    Conc,
    TfidfConc,
    HashConc,
}

impl Representation {
    pub const ALL: [Representation; 8] = [
        Representation::Tfidf,
        Representation::Hash,
        Representation::Avg,
        Representation::Min,
        Representation::Max,
        Representation::Conc,
        Representation::TfidfConc,
        Representation::HashConc,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Representation::Tfidf),
            "hash" => Ok(Representation::Hash),
            "avg" => Ok(Representation::Avg),
            "min" => Ok(Representation::Min),
            "max" => Ok(Representation::Max),
            "conc" => Ok(Representation::Conc),
            "tfidf+conc" => Ok(Representation::TfidfConc),
            "hash+conc" => Ok(Representation::HashConc),
            other => Err(Error::invalid(format!(
                "unknown representation {other:?}; expected one of tfidf, hash, avg, min, max, conc, tfidf+conc, hash+conc"
            ))),
        }
    }

    pub fn needs_embeddings(self) -> bool {
        !matches!(self, Representation::Tfidf | Representation::Hash)
    }

    pub fn needs_tfidf(self) -> bool {
        matches!(self, Representation::Tfidf | Representation::TfidfConc)
    }

    pub fn needs_hash(self) -> bool {
        matches!(self, Representation::Hash | Representation::HashConc)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Representation::Tfidf => "tfidf",
            Representation::Hash => "hash",
            Representation::Avg => "avg",
            Representation::Min => "min",
            Representation::Max => "max",
            Representation::Conc => "conc",
            Representation::TfidfConc => "tfidf+conc",
            Representation::HashConc => "hash+conc",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "embfuse",
    version,
    about = "Multi-label text classification from fused sparse one-hot and composed word-embedding features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stratified train/test split of a JSONL corpus.
    Split(SplitArgs),
    /// Turn a JSONL corpus into a sparse-vector file.
    Vectorize(VectorizeArgs),
    /// Train a one-vs-rest linear SVM on a sparse-vector file.
    Train(TrainArgs),
    /// Predict label sets for a sparse-vector file.
    Predict(PredictArgs),
    /// Score predictions against a gold corpus.
    Evaluate(EvaluateArgs),
    /// Micro-F1 as a function of training-set size, per representation.
    LearningCurve(LearningCurveArgs),
    /// Micro-F1 as a function of the hashing dimension.
    HashSweep(HashSweepArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Input JSONL corpus; every document needs at least one label.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Fraction of documents assigned to the train side, strictly in (0,1).
    #[arg(long)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path for the train-side JSONL.
    #[arg(long)]
    pub train: PathBuf,
    /// Output path for the test-side JSONL.
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct VectorizeArgs {
    /// Input JSONL corpus; labels may be absent for prediction corpora.
    #[arg(long)]
    pub corpus: PathBuf,
    /// One of: tfidf, hash, avg, min, max, conc, tfidf+conc, hash+conc.
    #[arg(long)]
    pub representation: String,
    /// word2vec-text embedding table; required by the embedding modes.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Fitted tf-idf model (JSON). Loaded unless --fit-tfidf is set, in
    /// which case the model fitted on this corpus is saved here.
    #[arg(long)]
    pub tfidf_model: Option<PathBuf>,
    /// Fit the tf-idf model on this corpus instead of loading one.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub fit_tfidf: bool,
    #[arg(long, default_value_t = DEFAULT_HASH_DIM)]
    pub hash_dim: usize,
    /// L2-normalize tf-idf vectors (applies when fitting a new model).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub normalize_tfidf: bool,
    /// Scale each fused block to unit L2 norm.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub scale_blocks: bool,
    /// Drop tokens seen fewer than this many times in this corpus; 1 keeps
    /// everything.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Fail unless the produced dimension equals this value.
    #[arg(long)]
    pub dim_check: Option<usize>,
    /// Output sparse-vector file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training sparse-vector file; every row needs at least one label.
    #[arg(long)]
    pub train: PathBuf,
    /// Regularization strength; exactly one of --lambda and --cv-grid.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated lambda grid for cross-validation.
    #[arg(long)]
    pub cv_grid: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub cv_folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Epoch cap per binary problem.
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Fit an unregularized bias term per label.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub fit_bias: bool,
    /// Train the per-label problems in parallel (bitwise-identical to
    /// sequential).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub parallel: bool,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Sparse-vector file to predict; labels in it are ignored.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Output JSONL with one {"labels": [...]} object per input row.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gold JSONL corpus; provides labels and document lengths.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Predictions JSONL as written by `predict`, row-aligned with the
    /// corpus.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Model file; its label universe anchors macro-F1 and unknown-label
    /// reporting.
    #[arg(long)]
    pub model: PathBuf,
    /// Output report path (JSON); the bucket table also lands next to it
    /// with a .csv extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LearningCurveArgs {
    /// Training JSONL corpus.
    #[arg(long)]
    pub train: PathBuf,
    /// Test JSONL corpus, evaluated at every size.
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated representation list.
    #[arg(long)]
    pub representation: String,
    /// Comma-separated training-set sizes; defaults to {0.5%, 25%, 50%,
    /// 75%, 100%} of the training corpus.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HASH_DIM)]
    pub hash_dim: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub normalize_tfidf: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub scale_blocks: bool,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub fit_bias: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub parallel: bool,
    /// Output CSV: representation, size, micro_f1, train_seconds.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HashSweepArgs {
    /// Training JSONL corpus.
    #[arg(long)]
    pub train: PathBuf,
    /// Test JSONL corpus.
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated hashing dimensions.
    #[arg(long)]
    pub dims: String,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub fit_bias: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub parallel: bool,
    /// Output CSV: dim, micro_f1, train_seconds.
    #[arg(long)]
    pub out: PathBuf,
}

/// Dispatches a parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split(args) => run_split(&args),
        Command::Vectorize(args) => run_vectorize(&args),
        Command::Train(args) => run_train(&args),
        Command::Predict(args) => run_predict(&args),
        Command::Evaluate(args) => run_evaluate(&args),
        Command::LearningCurve(args) => run_learning_curve(&args),
        Command::HashSweep(args) => run_hash_sweep(&args),
    }
}

fn config_line(command: &str, fields: &[(&str, String)]) -> String {
    let mut s = format!("embfuse {command}");
    for (k, v) in fields {
        s.push_str(&format!(" --{k} {v}"));
    }
    s
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

fn run_split(args: &SplitArgs) -> Result<()> {
    let raw = read_corpus_jsonl(&args.corpus)?;
    let tokenized: Vec<TokenizedDocument> = raw.iter().map(TokenizedDocument::from_raw).collect();
    let spec = SplitSpec::new(args.train_fraction, args.seed)?;
    let (train_tok, test_tok) = stratified_split(&tokenized, &spec)?;

    let by_id: HashMap<&str, &RawDocument> = raw.iter().map(|d| (d.id.as_str(), d)).collect();
    let originals =
        |side: &[TokenizedDocument]| -> Vec<RawDocument> {
            side.iter().map(|d| by_id[d.id.as_str()].clone()).collect()
        };
    let config = config_line(
        "split",
        &[
            ("corpus", path_str(&args.corpus)),
            ("train-fraction", args.train_fraction.to_string()),
            ("seed", args.seed.to_string()),
            ("train", path_str(&args.train)),
            ("test", path_str(&args.test)),
        ],
    );
    write_corpus_jsonl(&args.train, std::slice::from_ref(&config), &originals(&train_tok))?;
    write_corpus_jsonl(&args.test, std::slice::from_ref(&config), &originals(&test_tok))?;

    let mut freq: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for d in &train_tok {
        for l in &d.labels {
            freq.entry(l.as_str()).or_default().0 += 1;
        }
    }
    for d in &test_tok {
        for l in &d.labels {
            freq.entry(l.as_str()).or_default().1 += 1;
        }
    }
    println!(
        "split {} documents into {} ({}) and {} ({})",
        raw.len(),
        path_str(&args.train),
        train_tok.len(),
        path_str(&args.test),
        test_tok.len()
    );
    println!("label\ttrain\ttest");
    for (label, (t, v)) in freq {
        println!("{label}\t{t}\t{v}");
    }
    Ok(())
}

/// Builds one sparse row per document under the given representation.
/// `table` and `tfidf` must be present when the representation needs them.
pub fn build_rows(
    rep: Representation,
    docs: &[TokenizedDocument],
    table: Option<&EmbeddingTable32>,
    tfidf: Option<&TfidfModel>,
    hash_dim: usize,
    scale_blocks: bool,
) -> Result<(usize, Option<usize>, Vec<SparseRow<f64>>)> {
    let table = |what: &str| {
        table.ok_or_else(|| Error::invalid(format!("representation {what} requires --embeddings")))
    };
    let composed = |docs: &[TokenizedDocument], mode: ComposeMode, t: &EmbeddingTable32| {
        docs.iter()
            .map(|d| {
                let c = compose::<f32, f64>(d, t, mode);
                (d.labels.clone(), SparseVec::from_dense(&c.vector))
            })
            .collect::<Vec<_>>()
    };
    match rep {
        Representation::Tfidf => {
            let model = tfidf.expect("caller fits or loads the tf-idf model");
            let rows = docs
                .iter()
                .map(|d| (d.labels.clone(), model.transform::<f64>(d)))
                .collect();
            Ok((model.vocab_size(), None, rows))
        }
        Representation::Hash => {
            let rows = docs
                .iter()
                .map(|d| Ok((d.labels.clone(), hash_transform::<f64>(d, hash_dim, false)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((hash_dim, None, rows))
        }
        Representation::Avg => {
            let t = table("avg")?;
            Ok((t.dim(), None, composed(docs, ComposeMode::Avg, t)))
        }
        Representation::Min => {
            let t = table("min")?;
            Ok((t.dim(), None, composed(docs, ComposeMode::Min, t)))
        }
        Representation::Max => {
            let t = table("max")?;
            Ok((t.dim(), None, composed(docs, ComposeMode::Max, t)))
        }
        Representation::Conc => {
            let t = table("conc")?;
            let rows = docs
                .iter()
                .map(|d| {
                    let c = compose_conc::<f32, f64>(d, t);
                    (d.labels.clone(), SparseVec::from_dense(&c.vector))
                })
                .collect();
            Ok((3 * t.dim(), None, rows))
        }
        Representation::TfidfConc | Representation::HashConc => {
            let t = table("the fused representations")?;
            let model = if rep == Representation::TfidfConc {
                Some(tfidf.expect("caller fits or loads the tf-idf model"))
            } else {
                None
            };
            let mut dim = 0;
            let mut boundary = 0;
            let mut rows = Vec::with_capacity(docs.len());
            for d in docs {
                let sparse = match model {
                    Some(m) => m.transform::<f64>(d),
                    None => hash_transform::<f64>(d, hash_dim, false)?,
                };
                let dense = compose_conc::<f32, f64>(d, t).vector;
                let fused = fuse(&sparse, &dense, scale_blocks);
                dim = fused.dim();
                boundary = fused.boundary();
                rows.push((d.labels.clone(), fused.into_vector()));
            }
            if docs.is_empty() {
                boundary = match model {
                    Some(m) => m.vocab_size(),
                    None => hash_dim,
                };
                dim = boundary + 3 * t.dim();
            }
            Ok((dim, Some(boundary), rows))
        }
    }
}

fn run_vectorize(args: &VectorizeArgs) -> Result<()> {
    let rep = Representation::parse(&args.representation)?;
    let raw = read_corpus_jsonl(&args.corpus)?;
    let mut docs: Vec<TokenizedDocument> = raw.iter().map(TokenizedDocument::from_raw).collect();
    if args.min_count > 1 {
        docs = filter_min_count(&docs, args.min_count)?;
    }

    let embeddings = if rep.needs_embeddings() {
        let path = args.embeddings.as_ref().ok_or_else(|| {
            Error::invalid(format!("representation {rep} requires --embeddings"))
        })?;
        Some(load_word2vec_text::<f32>(path)?.0)
    } else {
        None
    };
    let tfidf = if rep.needs_tfidf() {
        Some(obtain_tfidf(args, &docs)?)
    } else {
        None
    };

    let (dim, boundary, rows) = build_rows(
        rep,
        &docs,
        embeddings.as_ref(),
        tfidf.as_ref(),
        args.hash_dim,
        args.scale_blocks,
    )?;
    if let Some(expected) = args.dim_check {
        if expected != dim {
            return Err(Error::invalid(format!(
                "dim check failed: expected {expected}, produced {dim}"
            )));
        }
    }

    let mut fields = vec![
        ("corpus", path_str(&args.corpus)),
        ("representation", rep.to_string()),
    ];
    if let Some(p) = &args.embeddings {
        fields.push(("embeddings", path_str(p)));
    }
    if let Some(p) = &args.tfidf_model {
        fields.push(("tfidf-model", path_str(p)));
    }
    if rep.needs_tfidf() {
        fields.push(("fit-tfidf", args.fit_tfidf.to_string()));
    }
    if rep.needs_hash() {
        fields.push(("hash-dim", args.hash_dim.to_string()));
    }
    if rep.needs_tfidf() {
        fields.push(("normalize-tfidf", args.normalize_tfidf.to_string()));
    }
    fields.push(("scale-blocks", args.scale_blocks.to_string()));
    fields.push(("min-count", args.min_count.to_string()));
    fields.push(("out", path_str(&args.out)));
    let config = config_line("vectorize", &fields);

    write_sparse_file_to(&args.out, dim, boundary, std::slice::from_ref(&config), &rows)?;
    match boundary {
        Some(b) => println!(
            "wrote {} rows (dim {dim}, boundary {b}) to {}",
            rows.len(),
            path_str(&args.out)
        ),
        None => println!("wrote {} rows (dim {dim}) to {}", rows.len(), path_str(&args.out)),
    }
    Ok(())
}

fn obtain_tfidf(args: &VectorizeArgs, docs: &[TokenizedDocument]) -> Result<TfidfModel> {
    if args.fit_tfidf {
        let model = TfidfModel::fit(docs, args.normalize_tfidf)?;
        if let Some(path) = &args.tfidf_model {
            model.save_json(path)?;
        }
        Ok(model)
    } else if let Some(path) = &args.tfidf_model {
        TfidfModel::load_json(path)
    } else {
        TfidfModel::fit(docs, args.normalize_tfidf)
    }
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let file = read_sparse_file::<f64>(&args.train)?;
    let mut xs = Vec::with_capacity(file.rows.len());
    let mut label_sets = Vec::with_capacity(file.rows.len());
    for (i, (labels, x)) in file.rows.into_iter().enumerate() {
        if labels.is_empty() {
            return Err(Error::invalid(format!(
                "row {} of {} has no labels; training requires labeled vectors",
                i + 1,
                path_str(&args.train)
            )));
        }
        label_sets.push(labels);
        xs.push(x);
    }
    let universe: Vec<String> = label_sets
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let lambda = match (&args.lambda, &args.cv_grid) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid("--lambda and --cv-grid are mutually exclusive"))
        }
        (None, None) => return Err(Error::invalid("one of --lambda or --cv-grid is required")),
        (Some(l), None) => *l,
        (None, Some(grid)) => {
            let grid = parse_f64_list(grid, "--cv-grid")?;
            let cv_cfg = TrainConfig {
                tol: args.tol,
                max_iter: args.max_iter,
                seed: args.seed,
                fit_bias: args.fit_bias,
                parallel: args.parallel,
                ..TrainConfig::new(1.0)
            };
            let report =
                cross_validate_lambda(&xs, &label_sets, &universe, &grid, args.cv_folds, &cv_cfg)?;
            for (lambda, score) in &report.scores {
                println!("cv lambda {lambda}: micro_f1 {score:.6}");
            }
            println!("cv selected lambda {}", report.best_lambda);
            report.best_lambda
        }
    };

    let cfg = TrainConfig {
        lambda,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        fit_bias: args.fit_bias,
        parallel: args.parallel,
    };
    let model = train_ovr(&xs, &label_sets, &universe, &cfg)?;
    model.save(&args.out)?;
    println!(
        "trained {} labels on {} documents (dim {}, lambda {lambda}) -> {}",
        universe.len(),
        xs.len(),
        model.feature_dim(),
        path_str(&args.out)
    );
    Ok(())
}

/// One prediction per line, aligned with the input rows.
#[derive(Debug, Serialize, Deserialize)]
struct PredictionRow {
    labels: BTreeSet<String>,
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let model = LinearModel::load(&args.model)?;
    let file = read_sparse_file::<f64>(&args.test)?;
    if file.dim != model.feature_dim() {
        return Err(Error::Dimension {
            expected: model.feature_dim(),
            got: file.dim,
        });
    }
    let config = config_line(
        "predict",
        &[
            ("test", path_str(&args.test)),
            ("model", path_str(&args.model)),
            ("out", path_str(&args.out)),
        ],
    );
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "#{config}")?;
    let n = file.rows.len();
    for (_, x) in &file.rows {
        let labels = model.predict_multilabel(x)?;
        let line = serde_json::to_string(&PredictionRow { labels })
            .map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    println!("wrote {n} predictions to {}", path_str(&args.out));
    Ok(())
}

/// Reads a predictions JSONL file written by `predict`.
pub fn read_predictions(path: &Path) -> Result<Vec<BTreeSet<String>>> {
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let row: PredictionRow = serde_json::from_str(&line)
            .map_err(|e| Error::format(&display, lineno + 1, e.to_string()))?;
        rows.push(row.labels);
    }
    Ok(rows)
}

/// Evaluation report plus the invocation and any gold labels the model
/// cannot predict (they count as false negatives).
#[derive(Debug, Serialize)]
struct CliEvalReport {
    config: String,
    #[serde(flatten)]
    report: EvalReport,
    unknown_gold_labels: Vec<String>,
}

fn run_evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = LinearModel::load(&args.model)?;
    let raw = read_corpus_jsonl(&args.corpus)?;
    if let Some(doc) = raw.iter().find(|d| d.labels.is_empty()) {
        return Err(Error::invalid(format!(
            "gold document {:?} has no labels",
            doc.id
        )));
    }
    let gold: Vec<BTreeSet<String>> = raw.iter().map(|d| d.labels.clone()).collect();
    let doc_lengths: Vec<usize> = raw.iter().map(|d| tokenize(&d.text).len()).collect();
    let pred = read_predictions(&args.predictions)?;
    if pred.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} gold documents but {} predictions",
            gold.len(),
            pred.len()
        )));
    }

    let model_labels: BTreeSet<&str> = model.labels().iter().map(String::as_str).collect();
    let mut universe: BTreeSet<String> = model.labels().iter().cloned().collect();
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for set in &gold {
        for label in set {
            if !model_labels.contains(label.as_str()) {
                unknown.insert(label.clone());
            }
            universe.insert(label.clone());
        }
    }
    let universe: Vec<String> = universe.into_iter().collect();
    let report = evaluate(&gold, &pred, &doc_lengths, &universe)?;

    let config = config_line(
        "evaluate",
        &[
            ("corpus", path_str(&args.corpus)),
            ("predictions", path_str(&args.predictions)),
            ("model", path_str(&args.model)),
            ("out", path_str(&args.out)),
        ],
    );
    let full = CliEvalReport {
        config: config.clone(),
        report,
        unknown_gold_labels: unknown.into_iter().collect(),
    };
    let json = serde_json::to_string_pretty(&full).map_err(|e| Error::invalid(e.to_string()))?;
    std::fs::write(&args.out, json + "\n")?;

    let csv_path = args.out.with_extension("csv");
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    writeln!(csv, "#{config}")?;
    writeln!(csv, "bucket,n_docs,micro_f1")?;
    for b in &full.report.per_bucket {
        writeln!(csv, "{},{},{}", b.bucket, b.n_docs, b.micro_f1)?;
    }
    csv.flush()?;

    println!("micro_f1 {:.6}", full.report.micro_f1);
    println!("macro_f1 {:.6}", full.report.macro_f1);
    if !full.unknown_gold_labels.is_empty() {
        println!(
            "unknown gold labels (false negatives only): {}",
            full.unknown_gold_labels.join(",")
        );
    }
    println!("report -> {} and {}", path_str(&args.out), path_str(&csv_path));
    Ok(())
}

/// Everything needed to vectorize, train, and score one configuration.
pub struct PipelineSpec<'a> {
    pub rep: Representation,
    pub table: Option<&'a EmbeddingTable32>,
    pub hash_dim: usize,
    pub normalize_tfidf: bool,
    pub scale_blocks: bool,
    pub cfg: &'a TrainConfig,
}

/// Fits on `train`, scores micro-F1 on `test`, and reports the training
/// wall time in seconds.
pub fn pipeline_micro(
    spec: &PipelineSpec,
    train: &[TokenizedDocument],
    test: &[TokenizedDocument],
) -> Result<(f64, f64)> {
    let tfidf = if spec.rep.needs_tfidf() {
        Some(TfidfModel::fit(train, spec.normalize_tfidf)?)
    } else {
        None
    };
    let (_, _, train_rows) = build_rows(
        spec.rep,
        train,
        spec.table,
        tfidf.as_ref(),
        spec.hash_dim,
        spec.scale_blocks,
    )?;
    let (_, _, test_rows) = build_rows(
        spec.rep,
        test,
        spec.table,
        tfidf.as_ref(),
        spec.hash_dim,
        spec.scale_blocks,
    )?;
    let mut xs = Vec::with_capacity(train_rows.len());
    let mut label_sets = Vec::with_capacity(train_rows.len());
    for (labels, x) in train_rows {
        label_sets.push(labels);
        xs.push(x);
    }
    let universe: Vec<String> = label_sets
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let start = Instant::now();
    let model = train_ovr(&xs, &label_sets, &universe, spec.cfg)?;
    let train_seconds = start.elapsed().as_secs_f64();

    let mut gold = Vec::with_capacity(test_rows.len());
    let mut pred = Vec::with_capacity(test_rows.len());
    for (labels, x) in &test_rows {
        gold.push(labels.clone());
        pred.push(model.predict_multilabel(x)?);
    }
    Ok((micro_f1(&gold, &pred)?, train_seconds))
}

fn labeled_tokenized(path: &Path, side: &str) -> Result<Vec<TokenizedDocument>> {
    let raw = read_corpus_jsonl(path)?;
    if let Some(doc) = raw.iter().find(|d| d.labels.is_empty()) {
        return Err(Error::invalid(format!(
            "{side} document {:?} has no labels",
            doc.id
        )));
    }
    Ok(raw.iter().map(TokenizedDocument::from_raw).collect())
}

fn run_learning_curve(args: &LearningCurveArgs) -> Result<()> {
    let train = labeled_tokenized(&args.train, "train")?;
    let test = labeled_tokenized(&args.test, "test")?;
    let reps = args
        .representation
        .split(',')
        .map(|s| Representation::parse(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if reps.is_empty() {
        return Err(Error::invalid("no representations given"));
    }
    let sizes = match &args.sizes {
        Some(s) => parse_usize_list(s, "--sizes")?,
        None => default_sizes(train.len()),
    };
    if sizes.is_empty() {
        return Err(Error::invalid("no sizes given"));
    }
    for &s in &sizes {
        if s < 1 || s > train.len() {
            return Err(Error::invalid(format!(
                "size {s} out of range for training corpus of {}",
                train.len()
            )));
        }
    }
    let table = if reps.iter().any(|r| r.needs_embeddings()) {
        let path = args.embeddings.as_ref().ok_or_else(|| {
            Error::invalid("an embedding representation requires --embeddings")
        })?;
        Some(load_word2vec_text::<f32>(path)?.0)
    } else {
        None
    };
    let cfg = TrainConfig {
        seed: args.seed,
        fit_bias: args.fit_bias,
        parallel: args.parallel,
        ..TrainConfig::new(args.lambda)
    };

    let config = config_line(
        "learning-curve",
        &[
            ("train", path_str(&args.train)),
            ("test", path_str(&args.test)),
            (
                "representation",
                reps.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
            ),
            (
                "sizes",
                sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("hash-dim", args.hash_dim.to_string()),
            ("normalize-tfidf", args.normalize_tfidf.to_string()),
            ("scale-blocks", args.scale_blocks.to_string()),
            ("lambda", args.lambda.to_string()),
            ("seed", args.seed.to_string()),
            ("fit-bias", args.fit_bias.to_string()),
            ("out", path_str(&args.out)),
        ],
    );
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "#{config}")?;
    writeln!(out, "representation,size,micro_f1,train_seconds")?;
    let mut rows = 0;
    for &rep in &reps {
        for &size in &sizes {
            let sample = subsample(&train, size, args.seed)?;
            let spec = PipelineSpec {
                rep,
                table: table.as_ref(),
                hash_dim: args.hash_dim,
                normalize_tfidf: args.normalize_tfidf,
                scale_blocks: args.scale_blocks,
                cfg: &cfg,
            };
            let (micro, secs) = pipeline_micro(&spec, &sample, &test)?;
            writeln!(out, "{rep},{size},{micro},{secs:.3}")?;
            rows += 1;
        }
    }
    out.flush()?;
    println!("wrote {rows} rows to {}", path_str(&args.out));
    Ok(())
}

/// Sizes scaled from the reference curve {1, 50, 100, 150, 200} / 200 of
/// the corpus, deduplicated and capped at the corpus size.
fn default_sizes(n: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = [0.005, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| ((f * n as f64).round() as usize).clamp(1, n))
        .collect();
    sizes.dedup();
    sizes
}

fn run_hash_sweep(args: &HashSweepArgs) -> Result<()> {
    let train = labeled_tokenized(&args.train, "train")?;
    let test = labeled_tokenized(&args.test, "test")?;
    let dims = parse_usize_list(&args.dims, "--dims")?;
    if dims.is_empty() {
        return Err(Error::invalid("no dims given"));
    }
    if dims.iter().any(|&d| d < 1) {
        return Err(Error::invalid("hash dims must be at least 1"));
    }
    let cfg = TrainConfig {
        seed: args.seed,
        fit_bias: args.fit_bias,
        parallel: args.parallel,
        ..TrainConfig::new(args.lambda)
    };
    let config = config_line(
        "hash-sweep",
        &[
            ("train", path_str(&args.train)),
            ("test", path_str(&args.test)),
            (
                "dims",
                dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("lambda", args.lambda.to_string()),
            ("seed", args.seed.to_string()),
            ("fit-bias", args.fit_bias.to_string()),
            ("out", path_str(&args.out)),
        ],
    );
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "#{config}")?;
    writeln!(out, "dim,micro_f1,train_seconds")?;
    for &dim in &dims {
        let spec = PipelineSpec {
            rep: Representation::Hash,
            table: None,
            hash_dim: dim,
            normalize_tfidf: true,
            scale_blocks: true,
            cfg: &cfg,
        };
        let (micro, secs) = pipeline_micro(&spec, &train, &test)?;
        writeln!(out, "{dim},{micro},{secs:.3}")?;
    }
    out.flush()?;
    println!("wrote {} rows to {}", dims.len(), path_str(&args.out));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representation_parse_round_trips() {
        for rep in Representation::ALL {
            assert_eq!(Representation::parse(&rep.to_string()).unwrap(), rep);
        }
        assert!(Representation::parse("tf-idf").is_err());
    }

    #[test]
    fn representation_requirements() {
        use Representation::*;
        assert!(TfidfConc.needs_embeddings() && TfidfConc.needs_tfidf());
        assert!(HashConc.needs_embeddings() && HashConc.needs_hash());
        assert!(!Tfidf.needs_embeddings() && Tfidf.needs_tfidf());
        assert!(!Hash.needs_tfidf() && Hash.needs_hash());
        assert!(Avg.needs_embeddings() && !Avg.needs_tfidf() && !Avg.needs_hash());
    }

    #[test]
    fn default_sizes_scale_and_dedup() {
        assert_eq!(default_sizes(5000), vec![25, 1250, 2500, 3750, 5000]);
        assert_eq!(default_sizes(1), vec![1]);
    }

    #[test]
    fn config_line_is_copy_pasteable() {
        let line = config_line("split", &[("seed", "7".to_string())]);
        assert_eq!(line, "embfuse split --seed 7");
    }
}
