//! Command implementations behind the `evidential` binary.
//!
//! Every command writes its primary output to `out` and diagnostics to
//! `err`, so tests can drive them without spawning a process.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use evidential::corpus::metrics::{Fixed6, FixedRatio};
use evidential::corpus::{
    ingest, kendall_tau_b, jaccard, precision_recall, rank, spearman, terminal_values, Corpus, Judgments,
    RankOptions, RankedResult, Ratio,
};
use evidential::graph::{expand, explain, EvalOptions, Evaluator, InferenceGraph, NodeQuery, Trace, WeightContext};
use evidential::interval::AbsentPolicy;
use evidential::linguistic::TermDictionary;
use evidential::rules::parse_rulebase;
use evidential::{registry, Calculus, Family, TruthValue};

/// Failure of a command, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    /// 1 usage error, 2 input or validation error, 3 partial comparison failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Partial(_) => 3,
        }
    }
}

const GRAMMAR: &str = r#"Rule language:
  rulebase  := (directive | rule)*
  directive := 'threshold' DECIMAL ';'
  rule      := IDENT ':' IDENT '<-' ('implies' | 'evidence') 'weight' weight expr ('action' STRING)? ';'
  weight    := DECIMAL | '[' DECIMAL ',' DECIMAL ']' | STRING
  expr      := and ('or' and)*
  and       := unary ('and' unary)*
  unary     := 'not' unary | atom
  atom      := IDENT | STRING | '(' expr ')'
  IDENT atoms name concepts, STRING atoms are phrases searched for in documents.
  Evidence bodies are a phrase or a disjunction of phrases. '#' starts a comment.
  Action templates may use {concept}, {value}, {doc} and {rule}.

Terms file (linguistic weights and calculi):
  term <name> : (x,mu) (x,mu) ...     x from 0 to 1, '#' comments
  Hedged names (very, more-or-less, not) are generated from the declared terms.

Exit codes: 0 success, 1 usage error, 2 input or validation error,
3 partial comparison failure."#;

fn long_help() -> String {
    let mut text = String::from(GRAMMAR);
    text.push_str("\n\nCalculi:\n");
    for name in registry() {
        text.push_str("  ");
        text.push_str(&name);
        text.push('\n');
    }
    text
}

#[derive(Debug, Parser)]
#[command(name = "evidential", version, about = "Rule-based evidential retrieval under interchangeable uncertainty calculi")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and expand a rulebase, printing node and arc counts.
    Compile {
        rules: PathBuf,
        goal: String,
        /// Write the inference graph in DOT format.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Rank a corpus under one calculus and print the retrieved documents.
    Query {
        #[command(flatten)]
        input: QueryInput,
        #[arg(long)]
        calculus: String,
        /// Skip threshold pruning.
        #[arg(long)]
        no_prune: bool,
        /// Also trace and explain this document.
        #[arg(long, value_name = "DOC")]
        explain: Option<String>,
        /// Where to write the trace of --explain (default `<DOC>.trace.json`).
        #[arg(long, value_name = "FILE")]
        trace_out: Option<PathBuf>,
    },
    /// Rank a corpus under several calculi and compare the rankings.
    Compare {
        #[command(flatten)]
        input: QueryInput,
        /// Comma-separated calculus names (at least two).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        calculi: Vec<String>,
        /// CSV with header `doc_id,relevant` and 0/1 flags.
        #[arg(long, value_name = "FILE")]
        judgments: Option<PathBuf>,
    },
    /// Explain one node of a saved trace: `root`, a node id or a name.
    Explain {
        trace: PathBuf,
        node: String,
        /// Print the structured explanation as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct QueryInput {
    pub rules: PathBuf,
    /// Directory of `*.txt` documents; file stems are document ids.
    pub corpus: PathBuf,
    pub goal: String,
    /// Override the rulebase threshold.
    #[arg(long, value_name = "θ")]
    pub threshold: Option<f64>,
    /// Value of absent phrases: `closed` (false) or `unknown`.
    #[arg(long, default_value = "closed")]
    pub absent: String,
    /// Terms file for linguistic weights and calculi.
    #[arg(long, value_name = "FILE")]
    pub terms: Option<PathBuf>,
    /// Reduce interval and linguistic weights to points for scalar calculi.
    #[arg(long)]
    pub defuzzify: bool,
}

/// Parses arguments; help and version requests come back as `Ok(Err(text))`.
pub fn parse_args<I, T>(args: I) -> Result<Result<Cli, String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cmd = Cli::command().after_long_help(long_help());
    match cmd.try_get_matches_from(args) {
        Ok(m) => Cli::from_arg_matches(&m).map(Ok).map_err(|e| CliError::Usage(e.to_string())),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            Ok(Err(e.to_string()))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile { rules, goal, dot } => cmd_compile(rules, goal, dot.as_deref(), out),
        Command::Query { input, calculus, no_prune, explain, trace_out } => {
            cmd_query(input, calculus, !no_prune, explain.as_deref(), trace_out.as_deref(), out, err)
        }
        Command::Compare { input, calculi, judgments } => {
            cmd_compare(input, calculi, judgments.as_deref(), out, err).map(|_| ())
        }
        Command::Explain { trace, node, json } => cmd_explain(trace, node, *json, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("write failed: {e}")))
}

/// Parses, validates and expands a rulebase file.
pub fn load_graph(rules: &Path, goal: &str) -> Result<InferenceGraph, CliError> {
    let source = read(rules)?;
    let rb = parse_rulebase(&source).map_err(|e| CliError::Input(format!("{}: {e}", rules.display())))?;
    expand(&rb, goal).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("{}: {e}", rules.display())).collect();
        CliError::Input(lines.join("\n"))
    })
}

pub fn cmd_compile(rules: &Path, goal: &str, dot: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let graph = load_graph(rules, goal)?;
    if let Some(path) = dot {
        fs::write(path, graph.to_dot(None)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    write_out(out, &graph.stats().to_string())
}

/// Everything a query needs, loaded once and shared across calculi.
pub struct Session {
    pub graph: InferenceGraph,
    pub corpus: Corpus,
    pub terms: Option<TermDictionary>,
    pub threshold: f64,
    pub absent: AbsentPolicy,
    pub defuzzify: bool,
}

impl Session {
    pub fn load(input: &QueryInput) -> Result<Self, CliError> {
        let absent: AbsentPolicy = input
            .absent
            .parse()
            .map_err(|e| CliError::Usage(format!("--absent: {e}")))?;
        if let Some(t) = input.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Usage(format!("--threshold {t} is outside [0,1]")));
            }
        }
        let graph = load_graph(&input.rules, &input.goal)?;
        let corpus = ingest(&input.corpus).map_err(|e| CliError::Input(e.to_string()))?;
        let terms = match &input.terms {
            Some(p) => Some(
                TermDictionary::parse(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            ),
            None => None,
        };
        let threshold = input.threshold.or(graph.threshold()).unwrap_or(0.0);
        Ok(Session { graph, corpus, terms, threshold, absent, defuzzify: input.defuzzify })
    }

    pub fn calculus(&self, name: &str) -> Result<Calculus, CliError> {
        let c: Calculus = name.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        if c.family() == Family::Linguistic && self.terms.is_none() {
            return Err(CliError::Usage(format!("calculus {name} needs a terms file (--terms FILE)")));
        }
        Ok(c)
    }

    pub fn evaluator(&self, calculus: Calculus) -> Result<Evaluator<'_>, CliError> {
        let ctx = WeightContext { terms: self.terms.as_ref(), defuzzify: self.defuzzify };
        Evaluator::new(&self.graph, calculus, &ctx).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn rank(&self, evaluator: &Evaluator<'_>, prune: bool) -> RankedResult {
        rank(&self.corpus, evaluator, &RankOptions { threshold: self.threshold, prune, absent: self.absent })
    }

    /// Evaluates one document with tracing.
    pub fn trace(&self, evaluator: &Evaluator<'_>, doc: &str, prune: bool) -> Result<Trace, CliError> {
        let d = self
            .corpus
            .get(doc)
            .ok_or_else(|| CliError::Input(format!("unknown document '{doc}'")))?;
        let values = terminal_values(d, &self.graph, evaluator.calculus().family(), self.absent);
        let opts = EvalOptions { threshold: Some(self.threshold), prune, doc: doc.to_string() };
        evaluator
            .evaluate(&values, &opts)
            .map(|ev| ev.trace)
            .map_err(|e| CliError::Input(format!("{doc}: {e}")))
    }

    /// Ranking TSV, with a nearest-term column for linguistic results.
    pub fn tsv(&self, result: &RankedResult) -> String {
        let Some(terms) = self.terms.as_ref().filter(|_| result.calculus.starts_with("linguistic:")) else {
            return result.to_tsv();
        };
        let mut out = String::new();
        for (i, line) in result.to_tsv().lines().enumerate() {
            out.push_str(line);
            let term = match (i, result.entries.get(i.wrapping_sub(1)).map(|e| &e.value)) {
                (0, _) => "term".to_string(),
                (_, Some(TruthValue::Fuzzy(f))) => terms.approximate(f).map(|a| a.term).unwrap_or_default(),
                _ => String::new(),
            };
            out.push('\t');
            out.push_str(&term);
            out.push('\n');
        }
        out
    }
}

pub fn cmd_query(
    input: &QueryInput,
    calculus: &str,
    prune: bool,
    explain_doc: Option<&str>,
    trace_out: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let session = Session::load(input)?;
    let evaluator = session.evaluator(session.calculus(calculus)?)?;
    if let Some(doc) = explain_doc {
        if session.corpus.get(doc).is_none() {
            return Err(CliError::Input(format!("unknown document '{doc}'")));
        }
    }
    let result = session.rank(&evaluator, prune);
    for (doc, e) in &result.failures {
        let _ = writeln!(err, "{doc}: {e}");
    }
    write_out(out, &session.tsv(&result))?;
    let _ = writeln!(
        err,
        "retrieved {} of {} documents at threshold {:.6}",
        result.retrieved().len(),
        session.corpus.len(),
        result.threshold
    );
    if let Some(doc) = explain_doc {
        let trace = session.trace(&evaluator, doc, prune)?;
        let path = trace_out.map_or_else(|| PathBuf::from(format!("{doc}.trace.json")), Path::to_path_buf);
        let json = serde_json::to_string_pretty(&trace).expect("traces serialize");
        fs::write(&path, json).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let text = explain(&trace, &NodeQuery::Root).expect("the root is always traced").to_string();
        let _ = write!(err, "{text}");
        let _ = writeln!(err, "trace written to {}", path.display());
    }
    if result.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{} documents failed to evaluate", result.failures.len())))
    }
}

/// Metrics for one pair of calculi.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub jaccard: f64,
}

impl Serialize for PairReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("a", &self.a)?;
        m.serialize_entry("b", &self.b)?;
        m.serialize_entry("jaccard", &Fixed6(Some(self.jaccard)))?;
        m.serialize_entry("kendall", &Fixed6(self.kendall))?;
        m.serialize_entry("spearman", &Fixed6(self.spearman))?;
        m.end()
    }
}

/// Per-calculus summary of one ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct CalculusSummary {
    pub retrieved: Vec<String>,
    pub top: Option<String>,
    pub mean_interval_width: Option<f64>,
    pub precision: Option<Option<Ratio>>,
    pub recall: Option<Option<Ratio>>,
}

impl Serialize for CalculusSummary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        if let Some(w) = self.mean_interval_width {
            m.serialize_entry("mean_interval_width", &Fixed6(Some(w)))?;
        }
        if let Some(p) = self.precision {
            m.serialize_entry("precision", &FixedRatio(p))?;
        }
        if let Some(r) = self.recall {
            m.serialize_entry("recall", &FixedRatio(r))?;
        }
        m.serialize_entry("retrieved", &self.retrieved)?;
        m.serialize_entry("top", &self.top)?;
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    #[serde(serialize_with = "fixed6")]
    pub threshold: f64,
    pub calculi: BTreeMap<String, CalculusSummary>,
    pub pairs: Vec<PairReport>,
    pub failures: BTreeMap<String, String>,
}

fn fixed6<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    Fixed6(Some(*v)).serialize(s)
}

impl CompareReport {
    /// Fixed-width table of the report, for humans.
    pub fn table(&self) -> String {
        let mut t = format!("{:<44} {:>9} {:>9} {:>9} {:>9}\n", "calculus", "retrieved", "width", "precision", "recall");
        for (name, c) in &self.calculi {
            let width = Fixed6(c.mean_interval_width).render();
            let p = c.precision.map_or("-".into(), |p| FixedRatio(p).render());
            let r = c.recall.map_or("-".into(), |r| FixedRatio(r).render());
            t += &format!("{name:<44} {:>9} {width:>9} {p:>9} {r:>9}\n", c.retrieved.len());
        }
        t += &format!("\n{:<44} {:<44} {:>9} {:>9} {:>9}\n", "a", "b", "spearman", "kendall", "jaccard");
        for p in &self.pairs {
            t += &format!(
                "{:<44} {:<44} {:>9} {:>9} {:>9}\n",
                p.a,
                p.b,
                Fixed6(p.spearman).render(),
                Fixed6(p.kendall).render(),
                Fixed6(Some(p.jaccard)).render()
            );
        }
        for (name, e) in &self.failures {
            t += &format!("failed: {name}: {e}\n");
        }
        t
    }
}

/// Ranks the corpus once per calculus (without pruning, so every value is
/// exact) and compares every pair. Failing calculi are reported and skipped.
pub fn compare_calculi(
    session: &Session,
    calculi: &[String],
    judgments: Option<&Judgments>,
) -> (CompareReport, Vec<RankedResult>) {
    let mut failures = BTreeMap::new();
    let mut results = Vec::new();
    for name in calculi {
        let ranked = session
            .calculus(name)
            .and_then(|c| session.evaluator(c))
            .map(|ev| session.rank(&ev, false));
        match ranked {
            Ok(r) if r.failures.is_empty() => results.push(r),
            Ok(r) => {
                let (doc, e) = &r.failures[0];
                failures.insert(name.clone(), format!("{} documents failed, first {doc}: {e}", r.failures.len()));
            }
            Err(e) => {
                failures.insert(name.clone(), e.to_string());
            }
        }
    }
    let mut summaries = BTreeMap::new();
    for r in &results {
        let pr = judgments.map(|j| precision_recall(r, j));
        summaries.insert(
            r.calculus.clone(),
            CalculusSummary {
                retrieved: r.retrieved().into_iter().map(String::from).collect(),
                top: r.entries.first().map(|e| e.doc.clone()),
                mean_interval_width: r.mean_interval_width(),
                precision: pr.map(|p| p.0),
                recall: pr.map(|p| p.1),
            },
        );
    }
    let mut pairs = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            pairs.push(PairReport {
                a: a.calculus.clone(),
                b: b.calculus.clone(),
                spearman: spearman(a, b).expect("same corpus"),
                kendall: kendall_tau_b(a, b).expect("same corpus"),
                jaccard: jaccard(a, b),
            });
        }
    }
    let report = CompareReport { threshold: session.threshold, calculi: summaries, pairs, failures };
    (report, results)
}

pub fn cmd_compare(
    input: &QueryInput,
    calculi: &[String],
    judgments: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<CompareReport, CliError> {
    if calculi.len() < 2 {
        return Err(CliError::Usage("--calculi needs at least two calculus names".into()));
    }
    let session = Session::load(input)?;
    let judgments = match judgments {
        Some(p) => {
            let j = Judgments::load(p).map_err(|e| CliError::Input(e.to_string()))?;
            j.check(&session.corpus).map_err(|e| CliError::Input(e.to_string()))?;
            Some(j)
        }
        None => None,
    };
    let (report, _) = compare_calculi(&session, calculi, judgments.as_ref());
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    write_out(out, &json)?;
    write_out(out, "\n")?;
    let _ = write!(err, "{}", report.table());
    if report.failures.is_empty() {
        Ok(report)
    } else if report.calculi.is_empty() {
        Err(CliError::Input("every calculus failed".into()))
    } else {
        Err(CliError::Partial(format!("{} of {} calculi failed", report.failures.len(), calculi.len())))
    }
}

pub fn cmd_explain(trace: &Path, node: &str, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let trace: Trace = serde_json::from_str(&read(trace)?)
        .map_err(|e| CliError::Input(format!("{}: malformed trace: {e}", trace.display())))?;
    let query: NodeQuery = node.parse().expect("node queries always parse");
    let e = explain(&trace, &query).map_err(|e| CliError::Input(e.to_string()))?;
    let text = if json {
        serde_json::to_string_pretty(&e).expect("explanations serialize") + "\n"
    } else {
        e.to_string()
    };
    write_out(out, &text)
}
