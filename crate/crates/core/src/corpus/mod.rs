//! Documents, terminal matching and ranking.

pub mod metrics;
pub mod text;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{EvalOptions, Evaluator, InferenceGraph};
use crate::interval::AbsentPolicy;
use crate::truth::{Family, FuzzyValue, Interval, TruthValue};

pub use metrics::{compare, jaccard, kendall_tau_b, precision_recall, spearman, Judgments, MetricsReport, Ratio};
pub use text::{contains_phrase, normalize_pattern, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Document { id: id.into(), text, tokens }
    }
}

/// Documents sorted by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    docs: Vec<Document>,
}

impl Corpus {
    pub fn new(mut docs: Vec<Document>) -> Self {
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        Corpus { docs }
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Reads every `*.txt` file in `dir`; the file stem is the document id.
pub fn ingest(dir: &Path) -> Result<Corpus, CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut docs = Vec::new();
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        docs.push(Document::new(id, text));
    }
    Ok(Corpus::new(docs))
}

/// Phrase match: the pattern's tokens occur contiguously in the document.
pub fn match_terminal(doc: &Document, pattern: &str) -> bool {
    contains_phrase(&doc.tokens, &tokenize(pattern))
}

fn top(family: Family) -> TruthValue {
    match family {
        Family::Scalar => TruthValue::Scalar(1.0),
        Family::Interval => TruthValue::Interval(Interval::TRUE),
        Family::Linguistic => TruthValue::Fuzzy(FuzzyValue::singleton(1.0)),
    }
}

fn absent(family: Family, policy: AbsentPolicy) -> TruthValue {
    match (family, policy) {
        (Family::Scalar, _) => TruthValue::Scalar(0.0),
        (Family::Interval, AbsentPolicy::Closed) => TruthValue::Interval(Interval::FALSE),
        (Family::Interval, AbsentPolicy::Unknown) => TruthValue::Interval(Interval::UNKNOWN),
        (Family::Linguistic, AbsentPolicy::Closed) => TruthValue::Fuzzy(FuzzyValue::singleton(0.0)),
        (Family::Linguistic, AbsentPolicy::Unknown) => TruthValue::Fuzzy(FuzzyValue::ones()),
    }
}

/// Value of every graph terminal for one document: top of the family when
/// present, otherwise bottom (closed) or unknown. Scalars have no unknown
/// and always use 0 for absent terms.
pub fn terminal_values(
    doc: &Document,
    graph: &InferenceGraph,
    family: Family,
    policy: AbsentPolicy,
) -> HashMap<String, TruthValue> {
    graph
        .terminals()
        .into_iter()
        .map(|(_, pattern)| {
            let v = if match_terminal(doc, pattern) { top(family) } else { absent(family, policy) };
            (pattern.to_string(), v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub doc: String,
    pub value: TruthValue,
    pub rank_key: f64,
    pub secondary: f64,
    /// The value is a pruning upper bound (only possible below θ).
    pub bounded: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub calculus: String,
    pub threshold: f64,
    pub entries: Vec<RankedEntry>,
    /// Documents whose evaluation failed outright, with the error.
    pub failures: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOptions {
    pub threshold: f64,
    pub prune: bool,
    pub absent: AbsentPolicy,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { threshold: 0.0, prune: true, absent: AbsentPolicy::Closed }
    }
}

/// Ranking order: rank key descending, secondary key descending, id ascending.
pub fn rank_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.rank_key
        .total_cmp(&a.rank_key)
        .then(b.secondary.total_cmp(&a.secondary))
        .then_with(|| a.doc.cmp(&b.doc))
}

/// Evaluates every document and sorts the results.
pub fn rank(corpus: &Corpus, evaluator: &Evaluator<'_>, opts: &RankOptions) -> RankedResult {
    let family = evaluator.calculus().family();
    let mut entries = Vec::with_capacity(corpus.len());
    let mut failures = Vec::new();
    for doc in corpus.documents() {
        let values = terminal_values(doc, evaluator.graph(), family, opts.absent);
        let eval_opts = EvalOptions {
            threshold: Some(opts.threshold),
            prune: opts.prune,
            doc: doc.id.clone(),
        };
        match evaluator.evaluate(&values, &eval_opts) {
            Ok(ev) => entries.push(RankedEntry {
                doc: doc.id.clone(),
                rank_key: ev.value.rank_key(),
                secondary: ev.value.secondary_key(),
                value: ev.value,
                bounded: ev.bounded,
                warnings: ev.warnings,
            }),
            Err(e) => failures.push((doc.id.clone(), e.to_string())),
        }
    }
    entries.sort_by(rank_order);
    RankedResult {
        calculus: evaluator.calculus().name(),
        threshold: opts.threshold,
        entries,
        failures,
    }
}

impl RankedResult {
    /// Ids with `rank_key >= θ`, in ranking order.
    pub fn retrieved(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.rank_key >= self.threshold)
            .map(|e| e.doc.as_str())
            .collect()
    }

    /// `doc_id<TAB>rank_key<TAB>value` lines for the retrieved documents,
    /// under a header row. Values below θ may be pruning bounds and are
    /// left out.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("doc_id\trank_key\tvalue\n");
        for e in self.entries.iter().filter(|e| e.rank_key >= self.threshold) {
            let _ = writeln!(out, "{}\t{:.6}\t{}", e.doc, e.rank_key, e.value.to_fixed_json());
        }
        out
    }

    /// Mean `β - α` over all ranked documents, for interval results.
    pub fn mean_interval_width(&self) -> Option<f64> {
        let widths: Vec<f64> = self
            .entries
            .iter()
            .map(|e| e.value.as_interval().map(|iv| iv.width()))
            .collect::<Option<_>>()?;
        if widths.is_empty() {
            None
        } else {
            Some(widths.iter().sum::<f64>() / widths.len() as f64)
        }
    }
}
