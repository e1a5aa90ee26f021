//! Per-document evaluation of an inference graph.
//!
//! Evaluation is a memoized post-order walk. With pruning on, a conjunction
//! whose running bound already ranks below the threshold stops early and
//! reports that bound; disjunctions and evidence combinations stop once they
//! saturate. A bound is an overestimate, so it is tracked ("tainted") up to
//! the root: if a tainted root still clears the threshold the document is
//! re-evaluated without pruning, which keeps retrieved values exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{InferenceGraph, NodeId, NodeKind};
use crate::calculus::{CalcError, Calculus, Op};
use crate::linguistic::TermDictionary;
use crate::rules::WeightLiteral;
use crate::truth::{Family, FuzzyValue, Interval, TruthValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoercionError {
    #[error("rule {rule}: linguistic weight {term:?} needs a terms file")]
    MissingTerms { rule: String, term: String },
    #[error("rule {rule}: linguistic weight {term:?} is not in the terms vocabulary")]
    UnknownTerm { rule: String, term: String },
    #[error("rule {rule}: weight {weight} cannot be used under {calculus} unless defuzzification is enabled")]
    NeedsDefuzzify {
        rule: String,
        weight: String,
        calculus: String,
    },
}

/// What weight coercion may draw on.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightContext<'a> {
    pub terms: Option<&'a TermDictionary>,
    /// Reduce weights the calculus cannot represent to a point: the centroid
    /// of a linguistic term, the midpoint of an interval.
    pub defuzzify: bool,
}

/// Lifts a weight literal into the family of `calculus`.
pub fn coerce_weight(
    rule: &str,
    weight: &WeightLiteral,
    calculus: &Calculus,
    ctx: &WeightContext<'_>,
) -> Result<TruthValue, CoercionError> {
    let family = calculus.family();
    let needs_defuzzify = || CoercionError::NeedsDefuzzify {
        rule: rule.to_string(),
        weight: weight.to_string(),
        calculus: calculus.name(),
    };
    let point = |v: f64| match family {
        Family::Scalar => TruthValue::Scalar(v),
        Family::Interval => TruthValue::Interval(Interval { lo: v, hi: v }),
        Family::Linguistic => TruthValue::Fuzzy(FuzzyValue::singleton(v)),
    };
    let value = match weight {
        WeightLiteral::Scalar(w) => point(*w),
        WeightLiteral::Interval(lo, hi) => match family {
            Family::Scalar if ctx.defuzzify => TruthValue::Scalar((lo + hi) / 2.0),
            Family::Scalar => return Err(needs_defuzzify()),
            Family::Interval => TruthValue::Interval(Interval { lo: *lo, hi: *hi }),
            Family::Linguistic => TruthValue::Fuzzy(FuzzyValue::rectangle(*lo, *hi)),
        },
        WeightLiteral::Term(term) => {
            let terms = ctx.terms.ok_or_else(|| CoercionError::MissingTerms {
                rule: rule.to_string(),
                term: term.clone(),
            })?;
            let fuzzy = terms.lookup(term).ok_or_else(|| CoercionError::UnknownTerm {
                rule: rule.to_string(),
                term: term.clone(),
            })?;
            match family {
                Family::Linguistic => TruthValue::Fuzzy(fuzzy.clone()),
                _ if ctx.defuzzify => point(fuzzy.centroid()),
                _ => return Err(needs_defuzzify()),
            }
        }
    };
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value supplied for terminal {0:?}")]
    MissingTerminal(String),
    #[error("node {node} ({label}): {source}")]
    Calc {
        node: NodeId,
        label: String,
        source: CalcError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Retrieval threshold; `None` disables threshold pruning.
    pub threshold: Option<f64>,
    pub prune: bool,
    /// Document id, substituted for `{doc}` in actions.
    pub doc: String,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { threshold: None, prune: true, doc: String::new() }
    }
}

/// What a partially evaluated connective should do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneDecision {
    Continue,
    SkipRemaining,
}

/// Decides whether the remaining children of an and/or/concept node can be
/// skipped given the value accumulated so far.
pub fn prune_check(kind: &NodeKind, calculus: &Calculus, partial: &TruthValue, threshold: f64) -> PruneDecision {
    let skip = match kind {
        NodeKind::And => calculus
            .conj_upper_bound(partial)
            .is_some_and(|b| b.rank_key() < threshold),
        NodeKind::Or | NodeKind::Concept(_) => {
            calculus.saturation_is_absorbing() && partial.rank_key() >= 1.0
        }
        _ => false,
    };
    if skip {
        PruneDecision::SkipRemaining
    } else {
        PruneDecision::Continue
    }
}

/// One evaluated (or skipped) node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub node: NodeId,
    pub name: String,
    pub kind: String,
    /// `conjoin`, `disjoin`, `negate`, `detach`, `combine`, or `lookup` for terminals.
    pub op: String,
    /// The concrete function the calculus used, e.g. `min` or `frechet-mp`.
    pub function: String,
    pub inputs: Vec<TruthValue>,
    /// Rule weight after coercion; also the second input of `detach`.
    pub weight: Option<TruthValue>,
    /// Absent when the node was never evaluated.
    pub output: Option<TruthValue>,
    /// The node was skipped by pruning and has no value.
    pub pruned: bool,
    /// The output is the pruning bound, not the exact value.
    pub bounded: bool,
    /// Children left unevaluated by this node.
    pub skipped: Vec<NodeId>,
    /// The operation admitted no consistent result; the output is "unknown".
    pub inconsistent: bool,
    /// For terminals, whether the document contains the pattern.
    pub matched: Option<bool>,
    pub children: Vec<NodeId>,
    pub parents: Vec<NodeId>,
    pub actions: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub doc: String,
    pub calculus: String,
    pub root: NodeId,
    pub threshold: Option<f64>,
    pub pruning: bool,
    /// Post-order, followed by records for nodes pruning never reached.
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn record(&self, node: NodeId) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.node == node)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: TruthValue,
    /// The root value is only an upper bound (it ranks below the threshold).
    pub bounded: bool,
    /// Pruning produced a bound that cleared the threshold, so the document
    /// was evaluated again without pruning.
    pub reevaluated: bool,
    pub warnings: Vec<String>,
    pub trace: Trace,
}

/// A graph paired with a calculus and coerced rule weights.
#[derive(Debug, Clone)]
pub struct Evaluator<'g> {
    graph: &'g InferenceGraph,
    calculus: Calculus,
    weights: Vec<Option<TruthValue>>,
}

struct Run<'a> {
    opts: &'a EvalOptions,
    prune: bool,
    terminals: &'a HashMap<String, TruthValue>,
    memo: Vec<Option<(TruthValue, bool)>>,
    records: Vec<TraceRecord>,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g InferenceGraph, calculus: Calculus, ctx: &WeightContext<'_>) -> Result<Self, CoercionError> {
        let weights = graph
            .nodes()
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Rule { name, weight, .. } => coerce_weight(name, weight, &calculus, ctx).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<_, _>>()?;
        Ok(Evaluator { graph, calculus, weights })
    }

    pub fn graph(&self) -> &'g InferenceGraph {
        self.graph
    }

    pub fn calculus(&self) -> &Calculus {
        &self.calculus
    }

    /// Coerced weight of a rule node.
    pub fn weight(&self, node: NodeId) -> Option<&TruthValue> {
        self.weights.get(node).and_then(Option::as_ref)
    }

    /// Evaluates the graph for one document given its terminal values, keyed
    /// by normalized pattern.
    pub fn evaluate(&self, terminals: &HashMap<String, TruthValue>, opts: &EvalOptions) -> Result<Evaluation, EvalError> {
        let first = self.run(terminals, opts, opts.prune)?;
        let (value, tainted) = first.memo[self.graph.root()].clone().expect("root evaluated");
        let clears = opts.threshold.map_or(true, |t| value.rank_key() >= t);
        if tainted && clears {
            let second = self.run(terminals, opts, false)?;
            let (value, _) = second.memo[self.graph.root()].clone().expect("root evaluated");
            return Ok(self.finish(value, false, true, second, opts));
        }
        Ok(self.finish(value, tainted, false, first, opts))
    }

    fn finish(&self, value: TruthValue, bounded: bool, reevaluated: bool, mut run: Run<'_>, opts: &EvalOptions) -> Evaluation {
        for node in self.graph.nodes() {
            if run.memo[node.id].is_none() {
                run.records.push(TraceRecord {
                    node: node.id,
                    name: node.label(),
                    kind: node.kind.tag().to_string(),
                    op: node.kind.op().map_or("lookup", Op::name).to_string(),
                    function: self.function_name(&node.kind),
                    inputs: Vec::new(),
                    weight: self.weight(node.id).cloned(),
                    output: None,
                    pruned: true,
                    bounded: false,
                    skipped: Vec::new(),
                    inconsistent: false,
                    matched: None,
                    children: node.children.clone(),
                    parents: node.parents.clone(),
                    actions: Vec::new(),
                    warnings: Vec::new(),
                });
            }
        }
        let warnings = run.records.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
        Evaluation {
            value,
            bounded,
            reevaluated,
            warnings,
            trace: Trace {
                doc: opts.doc.clone(),
                calculus: self.calculus.name(),
                root: self.graph.root(),
                threshold: opts.threshold,
                pruning: opts.prune,
                records: run.records,
            },
        }
    }

    fn function_name(&self, kind: &NodeKind) -> String {
        kind.op().map_or_else(|| "match".to_string(), |op| self.calculus.op_name(op))
    }

    fn run<'a>(&self, terminals: &'a HashMap<String, TruthValue>, opts: &'a EvalOptions, prune: bool) -> Result<Run<'a>, EvalError> {
        let mut run = Run {
            opts,
            prune,
            terminals,
            memo: vec![None; self.graph.nodes().len()],
            records: Vec::new(),
        };
        self.eval(self.graph.root(), &mut run)?;
        Ok(run)
    }

    fn calc_err(&self, node: NodeId, source: CalcError) -> EvalError {
        EvalError::Calc { node, label: self.graph.node(node).label(), source }
    }

    fn eval(&self, id: NodeId, run: &mut Run<'_>) -> Result<(TruthValue, bool), EvalError> {
        if let Some(done) = &run.memo[id] {
            return Ok(done.clone());
        }
        let node = self.graph.node(id);
        let mut rec = TraceRecord {
            node: id,
            name: node.label(),
            kind: node.kind.tag().to_string(),
            op: node.kind.op().map_or("lookup", Op::name).to_string(),
            function: self.function_name(&node.kind),
            inputs: Vec::new(),
            weight: self.weight(id).cloned(),
            output: None,
            pruned: false,
            bounded: false,
            skipped: Vec::new(),
            inconsistent: false,
            matched: None,
            children: node.children.clone(),
            parents: node.parents.clone(),
            actions: Vec::new(),
            warnings: Vec::new(),
        };
        let mut tainted = false;

        let outcome: Result<TruthValue, CalcError> = match &node.kind {
            NodeKind::Terminal(pattern) => {
                let v = run
                    .terminals
                    .get(pattern)
                    .cloned()
                    .ok_or_else(|| EvalError::MissingTerminal(pattern.clone()))?;
                rec.matched = Some(v == self.calculus.top());
                Ok(v)
            }
            NodeKind::Not => {
                let (v, t) = self.eval(node.children[0], run)?;
                tainted |= t;
                rec.inputs.push(v);
                self.calculus.negate(&rec.inputs[0])
            }
            NodeKind::Rule { .. } => {
                let (body, t) = self.eval(node.children[0], run)?;
                tainted |= t;
                let w = self.weights[id].clone().expect("rule weight coerced");
                rec.inputs = vec![body, w];
                self.calculus.detach(&rec.inputs[0], &rec.inputs[1])
            }
            NodeKind::And | NodeKind::Or | NodeKind::Concept(_) => {
                let op = node.kind.op().expect("connective op");
                let threshold = match node.kind {
                    NodeKind::And if self.graph.is_prunable(id) => run.opts.threshold,
                    NodeKind::And => None,
                    // saturation is exact, so it needs no threshold
                    _ => Some(1.0),
                };
                let mut acc: Option<Result<TruthValue, CalcError>> = None;
                for (i, &child) in node.children.iter().enumerate() {
                    if let (true, Some(theta), Some(Ok(partial))) = (run.prune, threshold, &acc) {
                        if prune_check(&node.kind, &self.calculus, partial, theta) == PruneDecision::SkipRemaining {
                            rec.skipped = node.children[i..].to_vec();
                            break;
                        }
                    }
                    let (v, t) = self.eval(child, run)?;
                    tainted |= t;
                    acc = Some(match acc {
                        None => Ok(v.clone()),
                        Some(Ok(a)) => self.calculus.apply(op, &[&a, &v]),
                        Some(err) => err,
                    });
                    rec.inputs.push(v);
                }
                let acc = acc.expect("connectives have children");
                if !rec.skipped.is_empty() && matches!(node.kind, NodeKind::And) {
                    rec.bounded = true;
                    tainted = true;
                    acc.map(|a| self.calculus.conj_upper_bound(&a).expect("pruning implies a bound"))
                } else {
                    acc
                }
            }
        };

        let value = match outcome {
            Ok(v) => v,
            Err(e) if e.is_inconsistent_evidence() => {
                let unknown = self.calculus.unknown().ok_or_else(|| self.calc_err(id, e.clone()))?;
                rec.inconsistent = true;
                rec.warnings.push(format!("{}: {e}; value set to unknown", node.label()));
                unknown
            }
            Err(e) => return Err(self.calc_err(id, e)),
        };

        if let NodeKind::Rule { name, head, action: Some(template), .. } = &node.kind {
            rec.actions.push(
                template
                    .replace("{concept}", head)
                    .replace("{value}", &value.to_string())
                    .replace("{doc}", &run.opts.doc)
                    .replace("{rule}", name),
            );
        }

        rec.output = Some(value.clone());
        run.records.push(rec);
        run.memo[id] = Some((value.clone(), tainted));
        Ok((value, tainted))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("record for node {node}: {reason}")]
    Malformed { node: NodeId, reason: String },
    #[error("record for node {node}: {source}")]
    Calc { node: NodeId, source: CalcError },
}

/// Recomputes a record's output from its recorded inputs. Pruned records
/// have no output and replay to `None`; terminals replay to their lookup.
pub fn replay(record: &TraceRecord, calculus: &Calculus) -> Result<Option<TruthValue>, ReplayError> {
    if record.pruned {
        return Ok(None);
    }
    let malformed = |reason: String| ReplayError::Malformed { node: record.node, reason };
    if record.op == "lookup" {
        return record.output.clone().map(Some).ok_or_else(|| malformed("terminal without output".into()));
    }
    let op: Op = record.op.parse().map_err(malformed)?;
    let inputs = &record.inputs;
    let expected = match op {
        Op::Negate => inputs.len() == 1,
        Op::Detach => inputs.len() == 2,
        _ => !inputs.is_empty(),
    };
    if !expected {
        return Err(malformed(format!("{} inputs for {op}", inputs.len())));
    }
    let outcome = match op {
        Op::Negate | Op::Detach => calculus.apply(op, &inputs.iter().collect::<Vec<_>>()),
        _ => inputs[1..]
            .iter()
            .try_fold(inputs[0].clone(), |acc, v| calculus.apply(op, &[&acc, v])),
    };
    let value = match outcome {
        Ok(v) if record.bounded => calculus
            .conj_upper_bound(&v)
            .ok_or_else(|| malformed("bounded record under a calculus without bounds".into()))?,
        Ok(v) => v,
        Err(e) if e.is_inconsistent_evidence() => calculus
            .unknown()
            .ok_or_else(|| ReplayError::Calc { node: record.node, source: e })?,
        Err(e) => return Err(ReplayError::Calc { node: record.node, source: e }),
    };
    Ok(Some(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::expand;
    use crate::rules::parse_rulebase;

    fn setup(src: &str) -> InferenceGraph {
        expand(&parse_rulebase(src).unwrap(), "T").unwrap()
    }

    fn values(graph: &InferenceGraph, calculus: &Calculus, present: &[&str]) -> HashMap<String, TruthValue> {
        graph
            .terminals()
            .into_iter()
            .map(|(_, p)| {
                let v = if present.contains(&p) { calculus.top() } else { calculus.bottom() };
                (p.to_string(), v)
            })
            .collect()
    }

    fn eval(src: &str, calculus: &str, present: &[&str], threshold: Option<f64>) -> Evaluation {
        let g = setup(src);
        let c: Calculus = calculus.parse().unwrap();
        let ev = Evaluator::new(&g, c.clone(), &WeightContext::default()).unwrap();
        let opts = EvalOptions { threshold, prune: true, doc: "d1".into() };
        let out = ev.evaluate(&values(&g, &c, present), &opts).unwrap();
        for r in &out.trace.records {
            assert_eq!(replay(r, &c).unwrap(), r.output, "replay of {}", r.name);
        }
        out
    }

    #[test]
    fn identity_chain() {
        let out = eval(r#"r: T <- implies weight 1.0 "x";"#, "scalar.godel", &["x"], None);
        assert_eq!(out.value, TruthValue::Scalar(1.0));
    }

    #[test]
    fn goguen_detach_of_conjunction() {
        let src = r#"r: T <- implies weight 0.9 A and B;
                     a: A <- evidence weight 1 "a";
                     b: B <- evidence weight 1 "b";"#;
        let out = eval(src, "scalar.godel.detach=goguen", &["a", "b"], None);
        assert_eq!(out.value, TruthValue::Scalar(0.9));
    }

    #[test]
    fn absent_terminals_leave_support_pairs_unsupported() {
        // a false body gives no support either way: [0, 1 - 0 * (1 - β_w)]
        let src = r#"r: T <- implies weight 0.9 A and B;
                     a: A <- evidence weight [0.5,0.8] "a";
                     b: B <- evidence weight 1 "b";"#;
        let out = eval(src, "interval.support", &[], None);
        assert_eq!(out.value, TruthValue::Interval(Interval::UNKNOWN));
        assert_eq!(out.value.rank_key(), 0.0);
        let out = eval(src, "interval.support", &["a", "b"], None);
        assert_eq!(out.value, TruthValue::Interval(Interval { lo: 0.45, hi: 1.0 - 0.5 * 0.1 }));
    }

    #[test]
    fn prune_check_examples() {
        let min: Calculus = "scalar.godel".parse().unwrap();
        let s = TruthValue::Scalar;
        assert_eq!(prune_check(&NodeKind::And, &min, &s(0.1), 0.3), PruneDecision::SkipRemaining);
        assert_eq!(prune_check(&NodeKind::And, &min, &s(0.9), 0.3), PruneDecision::Continue);
        assert_eq!(prune_check(&NodeKind::Or, &min, &s(1.0), 0.3), PruneDecision::SkipRemaining);
        assert_eq!(prune_check(&NodeKind::Or, &min, &s(0.99), 0.3), PruneDecision::Continue);
        let ling: Calculus = "linguistic:interval.frechet".parse().unwrap();
        let f = TruthValue::Fuzzy(FuzzyValue::singleton(0.0));
        assert_eq!(prune_check(&NodeKind::And, &ling, &f, 0.3), PruneDecision::Continue);
    }

    #[test]
    fn pruned_conjunction_is_flagged_and_bounded() {
        let src = r#"r: T <- implies weight 1 A and B;
                     a: A <- evidence weight 0.1 "a";
                     b: B <- evidence weight 1 "b";"#;
        let out = eval(src, "scalar.godel", &["a", "b"], Some(0.3));
        assert!(out.bounded && !out.reevaluated);
        assert!((out.value.rank_key() - 0.1).abs() < 1e-15);
        let and = out.trace.records.iter().find(|r| r.kind == "and").unwrap();
        assert!(and.bounded);
        assert_eq!(and.skipped.len(), 1);
        let b = out.trace.records.iter().find(|r| r.name == "B").unwrap();
        assert!(b.pruned && b.output.is_none());
        assert!(out.trace.records.iter().any(|r| r.name == "\"b\"" && r.pruned));
    }

    #[test]
    fn bound_below_threshold_stays_bounded() {
        let src = r#"r: T <- implies weight 1 A and B;
                     a: A <- evidence weight 0.5 "a";
                     b: B <- evidence weight 1 "b";"#;
        let out = eval(src, "interval.frechet", &["a"], Some(0.6));
        assert!(out.bounded && !out.reevaluated);
        let out = eval(src, "interval.frechet", &["a", "b"], Some(0.4));
        assert!(!out.bounded);
        assert_eq!(out.value, TruthValue::Interval(Interval { lo: 0.5, hi: 1.0 }));
    }

    #[test]
    fn bound_clearing_threshold_triggers_exact_reevaluation() {
        let src = r#"r: T <- implies weight 1 A and B;
                     e: T <- evidence weight 0.5 "c";
                     a: A <- evidence weight 0.1 "a";
                     b: B <- evidence weight 1 "b";"#;
        let out = eval(src, "scalar.godel", &["a", "b", "c"], Some(0.3));
        assert!(out.reevaluated && !out.bounded);
        assert!(out.trace.records.iter().all(|r| !r.pruned && !r.bounded));
        assert_eq!(out.value, TruthValue::Scalar(0.5 + 0.1 * 0.5));
    }

    #[test]
    fn saturated_combination_skips_remaining_rules() {
        let src = r#"e: T <- evidence weight 1 "x";
                     r: T <- implies weight 1 A;
                     a: A <- evidence weight 1 "y";"#;
        let out = eval(src, "scalar.product", &["x", "y"], None);
        assert_eq!(out.value, TruthValue::Scalar(1.0));
        assert!(!out.bounded);
        let root = out.trace.record(out.trace.root).unwrap();
        assert_eq!(root.skipped.len(), 1);
        assert!(!root.bounded);
    }

    #[test]
    fn inconsistent_evidence_downgrades_to_unknown() {
        // body [0,0] with weight [0.2,0.3]: 0 + 0.3 - 1 < 0
        let src = r#"r: T <- evidence weight [0.2,0.3] "a";"#;
        let out = eval(src, "interval.mpmt", &[], None);
        assert_eq!(out.value, TruthValue::Interval(Interval::UNKNOWN));
        assert_eq!(out.warnings.len(), 1);
        let r = out.trace.records.iter().find(|r| r.name == "r").unwrap();
        assert!(r.inconsistent);
    }

    #[test]
    fn actions_substitute_placeholders() {
        let src = r#"r: T <- evidence weight 0.8 "x" action "matched {concept} at {value} in {doc} by {rule}";"#;
        let out = eval(src, "scalar.godel", &["x"], None);
        let r = out.trace.records.iter().find(|r| r.kind == "rule").unwrap();
        assert_eq!(r.actions, vec!["matched T at 0.800000 in d1 by r".to_string()]);
    }

    #[test]
    fn coercion_rules() {
        let terms = TermDictionary::parse("term likely: (0,0) (0.5,0) (0.75,1) (1,1)\n").unwrap();
        let ctx = WeightContext { terms: Some(&terms), defuzzify: false };
        let scalar: Calculus = "scalar.godel".parse().unwrap();
        let interval: Calculus = "interval.support".parse().unwrap();
        let ling: Calculus = "linguistic:interval.support".parse().unwrap();
        let w = WeightLiteral::Scalar(0.8);
        assert_eq!(coerce_weight("r", &w, &interval, &ctx).unwrap(), TruthValue::Interval(Interval { lo: 0.8, hi: 0.8 }));
        assert_eq!(coerce_weight("r", &w, &ling, &ctx).unwrap(), TruthValue::Fuzzy(FuzzyValue::singleton(0.8)));
        let iv = WeightLiteral::Interval(0.6, 0.9);
        assert_eq!(coerce_weight("r", &iv, &ling, &ctx).unwrap(), TruthValue::Fuzzy(FuzzyValue::rectangle(0.6, 0.9)));
        assert!(matches!(coerce_weight("r", &iv, &scalar, &ctx), Err(CoercionError::NeedsDefuzzify { .. })));
        let term = WeightLiteral::Term("very likely".into());
        assert!(matches!(coerce_weight("r", &term, &interval, &ctx), Err(CoercionError::NeedsDefuzzify { .. })));
        assert!(matches!(
            coerce_weight("r", &term, &ling, &WeightContext::default()),
            Err(CoercionError::MissingTerms { .. })
        ));
        assert!(matches!(
            coerce_weight("r", &WeightLiteral::Term("rarely".into()), &ling, &ctx),
            Err(CoercionError::UnknownTerm { .. })
        ));
        let defuzz = WeightContext { terms: Some(&terms), defuzzify: true };
        let c = terms.lookup("very likely").unwrap().centroid();
        assert_eq!(coerce_weight("r", &term, &scalar, &defuzz).unwrap(), TruthValue::Scalar(c));
        assert_eq!(coerce_weight("r", &iv, &scalar, &defuzz).unwrap(), TruthValue::Scalar(0.75));
    }

    #[test]
    fn missing_terminal_is_an_error() {
        let g = setup(r#"r: T <- evidence weight 1 "x";"#);
        let c: Calculus = "scalar.godel".parse().unwrap();
        let ev = Evaluator::new(&g, c, &WeightContext::default()).unwrap();
        assert_eq!(
            ev.evaluate(&HashMap::new(), &EvalOptions::default()),
            Err(EvalError::MissingTerminal("x".into()))
        );
    }
}
