//! Backward inference graphs.
//!
//! A validated rulebase is expanded once, from the goal concept downwards,
//! into a DAG in which every concept and every terminal pattern is a single
//! node however often it is referenced. The graph is then evaluated per
//! document under any calculus (see [`eval`]).

pub mod eval;
pub mod explain;

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::calculus::{Calculus, Op};
use crate::corpus::text::normalize_pattern;
use crate::rules::{validate, Expr, RuleKind, Rulebase, ValidationError, WeightLiteral};

pub use eval::{
    coerce_weight, replay, CoercionError, EvalError, EvalOptions, Evaluation, Evaluator, Trace,
    TraceRecord, WeightContext,
};
pub use explain::{explain, Explanation, NodeQuery, Step, UnknownNode};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Concept(String),
    Rule {
        name: String,
        head: String,
        kind: RuleKind,
        weight: WeightLiteral,
        action: Option<String>,
        /// Position of the rule in the rulebase, used for tie-breaking.
        index: usize,
    },
    And,
    Or,
    Not,
    /// A normalized terminal pattern.
    Terminal(String),
}

impl NodeKind {
    pub fn tag(&self) -> &'static str {
        match self {
            NodeKind::Concept(_) => "concept",
            NodeKind::Rule { .. } => "rule",
            NodeKind::And => "and",
            NodeKind::Or => "or",
            NodeKind::Not => "not",
            NodeKind::Terminal(_) => "terminal",
        }
    }

    /// The calculus operation this node applies, if any.
    pub fn op(&self) -> Option<Op> {
        match self {
            NodeKind::Concept(_) => Some(Op::Combine),
            NodeKind::Rule { .. } => Some(Op::Detach),
            NodeKind::And => Some(Op::Conjoin),
            NodeKind::Or => Some(Op::Disjoin),
            NodeKind::Not => Some(Op::Negate),
            NodeKind::Terminal(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub parents: Vec<NodeId>,
}

impl Node {
    /// Short human label: concept or rule name, quoted pattern, or connective.
    pub fn label(&self) -> String {
        match &self.kind {
            NodeKind::Concept(name) => name.clone(),
            NodeKind::Rule { name, .. } => name.clone(),
            NodeKind::Terminal(p) => format!("{p:?}"),
            other => other.tag().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceGraph {
    nodes: Vec<Node>,
    root: NodeId,
    topo: Vec<NodeId>,
    threshold: Option<f64>,
    prunable: Vec<bool>,
    concepts: HashMap<String, NodeId>,
    terminals: HashMap<String, NodeId>,
    rules: HashMap<String, NodeId>,
}

/// Node and arc counts of an expanded graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphStats {
    pub nodes: usize,
    pub arcs: usize,
    pub by_kind: BTreeMap<&'static str, usize>,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes\t{}", self.nodes)?;
        writeln!(f, "arcs\t{}", self.arcs)?;
        for (kind, n) in &self.by_kind {
            writeln!(f, "{kind}\t{n}")?;
        }
        Ok(())
    }
}

struct Builder<'r> {
    rulebase: &'r Rulebase,
    nodes: Vec<Node>,
    concepts: HashMap<String, NodeId>,
    terminals: HashMap<String, NodeId>,
    rules: HashMap<String, NodeId>,
}

impl Builder<'_> {
    fn push(&mut self, kind: NodeKind) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { id, kind, children: Vec::new(), parents: Vec::new() });
        id
    }

    fn link(&mut self, parent: NodeId, child: NodeId) {
        self.nodes[parent].children.push(child);
        self.nodes[child].parents.push(parent);
    }

    fn concept(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.concepts.get(name) {
            return id;
        }
        let id = self.push(NodeKind::Concept(name.to_string()));
        self.concepts.insert(name.to_string(), id);
        let rulebase = self.rulebase;
        for rule in rulebase.rules_for(name) {
            let index = rulebase
                .rules()
                .iter()
                .position(|r| std::ptr::eq(r, rule))
                .expect("rule belongs to rulebase");
            let rid = self.push(NodeKind::Rule {
                name: rule.name.clone(),
                head: rule.head.clone(),
                kind: rule.kind,
                weight: rule.weight.clone(),
                action: rule.action.clone(),
                index,
            });
            self.rules.insert(rule.name.clone(), rid);
            self.link(id, rid);
            let body = self.expr(&rule.body);
            self.link(rid, body);
        }
        id
    }

    fn expr(&mut self, e: &Expr) -> NodeId {
        match e {
            Expr::Concept(name) => self.concept(name),
            Expr::Terminal(p) => {
                let key = normalize_pattern(p);
                if let Some(&id) = self.terminals.get(&key) {
                    return id;
                }
                let id = self.push(NodeKind::Terminal(key.clone()));
                self.terminals.insert(key, id);
                id
            }
            Expr::Not(inner) => {
                let id = self.push(NodeKind::Not);
                let c = self.expr(inner);
                self.link(id, c);
                id
            }
            Expr::And(items) | Expr::Or(items) => {
                let id = self.push(if matches!(e, Expr::And(_)) { NodeKind::And } else { NodeKind::Or });
                for item in items {
                    let c = self.expr(item);
                    self.link(id, c);
                }
                id
            }
        }
    }
}

/// Validates `rulebase` for `goal` and expands it into an inference graph.
pub fn expand(rulebase: &Rulebase, goal: &str) -> Result<InferenceGraph, Vec<ValidationError>> {
    validate(rulebase, goal)?;
    let mut b = Builder {
        rulebase,
        nodes: Vec::new(),
        concepts: HashMap::new(),
        terminals: HashMap::new(),
        rules: HashMap::new(),
    };
    let root = b.concept(goal);
    let mut graph = InferenceGraph {
        nodes: b.nodes,
        root,
        topo: Vec::new(),
        threshold: rulebase.threshold(),
        prunable: Vec::new(),
        concepts: b.concepts,
        terminals: b.terminals,
        rules: b.rules,
    };
    for id in 0..graph.nodes.len() {
        if matches!(graph.nodes[id].kind, NodeKind::Concept(_)) {
            graph.nodes[id].children = order_children(&graph, id);
        }
    }
    graph.topo = graph.post_order();
    graph.prunable = graph.negation_free();
    Ok(graph)
}

/// Evaluation order of a concept's rules: evidence rules first in source
/// order, then implication rules by ascending subgraph size, ties broken by
/// source order. Non-concept nodes keep their child order.
pub fn order_children(graph: &InferenceGraph, concept: NodeId) -> Vec<NodeId> {
    let node = &graph.nodes[concept];
    if !matches!(node.kind, NodeKind::Concept(_)) {
        return node.children.clone();
    }
    let keyed: Vec<(RuleKind, usize, usize)> = node
        .children
        .iter()
        .map(|&c| match &graph.nodes[c].kind {
            NodeKind::Rule { kind, index, .. } => (*kind, graph.subgraph_size(c), *index),
            _ => unreachable!("concept children are rule nodes"),
        })
        .collect();
    order_rules(&keyed).into_iter().map(|i| node.children[i]).collect()
}

/// Sorts `(kind, subgraph size, source index)` triples into evaluation order,
/// returning positions into `rules`.
pub fn order_rules(rules: &[(RuleKind, usize, usize)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rules.len()).collect();
    order.sort_by_key(|&i| {
        let (kind, size, index) = rules[i];
        match kind {
            RuleKind::Evidence => (0, 0, index),
            RuleKind::Implies => (1, size, index),
        }
    });
    order
}

impl InferenceGraph {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Children before parents; the root comes last.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Threshold declared by the rulebase, if any.
    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    /// Whether threshold pruning may cut this node short: true iff no path
    /// from the root reaches it through a negation.
    pub fn is_prunable(&self, id: NodeId) -> bool {
        self.prunable[id]
    }

    pub fn concept(&self, name: &str) -> Option<NodeId> {
        self.concepts.get(name).copied()
    }

    /// Looks up a terminal by pattern, normalized the same way as at expansion.
    pub fn terminal(&self, pattern: &str) -> Option<NodeId> {
        self.terminals.get(&normalize_pattern(pattern)).copied()
    }

    pub fn rule(&self, name: &str) -> Option<NodeId> {
        self.rules.get(name).copied()
    }

    /// Terminal nodes as `(id, normalized pattern)`, in id order.
    pub fn terminals(&self) -> Vec<(NodeId, &str)> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Terminal(p) => Some((n.id, p.as_str())),
                _ => None,
            })
            .collect()
    }

    /// Number of distinct nodes reachable from `id`, itself included.
    pub fn subgraph_size(&self, id: NodeId) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![id];
        let mut count = 0;
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            count += 1;
            stack.extend(&self.nodes[n].children);
        }
        count
    }

    pub fn stats(&self) -> GraphStats {
        let mut by_kind = BTreeMap::new();
        for n in &self.nodes {
            *by_kind.entry(n.kind.tag()).or_insert(0) += 1;
        }
        GraphStats {
            nodes: self.nodes.len(),
            arcs: self.nodes.iter().map(|n| n.children.len()).sum(),
            by_kind,
        }
    }

    fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut done = vec![false; self.nodes.len()];
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, next)) = stack.pop() {
            if done[id] {
                continue;
            }
            if let Some(&child) = self.nodes[id].children.get(next) {
                stack.push((id, next + 1));
                if !done[child] {
                    stack.push((child, 0));
                }
            } else {
                done[id] = true;
                out.push(id);
            }
        }
        out
    }

    fn negation_free(&self) -> Vec<bool> {
        let mut under_not = vec![false; self.nodes.len()];
        // parents precede children in reverse post-order
        for &id in self.topo.iter().rev() {
            let n = &self.nodes[id];
            if under_not[id] || matches!(n.kind, NodeKind::Not) {
                for &c in &n.children {
                    under_not[c] = true;
                }
            }
        }
        under_not.iter().map(|u| !u).collect()
    }

    /// Graphviz rendering; operator names are included when a calculus is given.
    pub fn to_dot(&self, calculus: Option<&Calculus>) -> String {
        let mut out = String::from("digraph inference {\n  rankdir=BT;\n");
        for n in &self.nodes {
            let shape = match n.kind {
                NodeKind::Concept(_) => "box",
                NodeKind::Rule { .. } => "ellipse",
                NodeKind::Terminal(_) => "note",
                _ => "circle",
            };
            let mut label = format!("{} {}", n.kind.tag(), n.label());
            if let NodeKind::Rule { weight, .. } = &n.kind {
                let _ = write!(label, "\nweight {weight}");
            }
            if let (Some(c), Some(op)) = (calculus, n.kind.op()) {
                let _ = write!(label, "\n{}", c.op_name(op));
            }
            let _ = writeln!(out, "  n{} [shape={shape}, label=\"{}\"];", n.id, dot_escape(&label));
        }
        for n in &self.nodes {
            for &c in &n.children {
                let _ = writeln!(out, "  n{c} -> n{};", n.id);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}
