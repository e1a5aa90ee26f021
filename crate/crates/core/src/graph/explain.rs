use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::eval::{Trace, TraceRecord};
use super::NodeId;

/// Upper limit on the number of root paths listed for one node.
const MAX_PATHS: usize = 32;

/// Names a node of a trace: `root`, a numeric id, or a concept name, rule
/// name or terminal pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeQuery {
    Root,
    Id(NodeId),
    Name(String),
}

impl FromStr for NodeQuery {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if s == "root" {
            NodeQuery::Root
        } else if let Ok(id) = s.parse() {
            NodeQuery::Id(id)
        } else {
            NodeQuery::Name(s.to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown node '{0}'")]
pub struct UnknownNode(pub String);

pub type Step = TraceRecord;

/// How a node got its value, and where that value went.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub node: NodeId,
    pub doc: String,
    pub calculus: String,
    /// Every step beneath and including the node, children first.
    pub derivation: Vec<Step>,
    /// Paths from the node up to the root, as `(id, name)` pairs.
    pub paths: Vec<Vec<(NodeId, String)>>,
    /// More paths exist than are listed.
    pub truncated: bool,
}

fn resolve(trace: &Trace, query: &NodeQuery) -> Option<NodeId> {
    match query {
        NodeQuery::Root => Some(trace.root),
        NodeQuery::Id(id) => trace.record(*id).map(|r| r.node),
        NodeQuery::Name(name) => {
            let quoted = format!("{:?}", crate::corpus::text::normalize_pattern(name));
            // exact names first, so `Attack` finds the concept, not "attack"
            let named = || trace.records.iter().filter(|r| matches!(r.kind.as_str(), "concept" | "rule" | "terminal"));
            named()
                .find(|r| r.name == *name)
                .or_else(|| named().find(|r| r.kind == "terminal" && r.name == quoted))
                .map(|r| r.node)
        }
    }
}

/// Explains one node of a trace.
pub fn explain(trace: &Trace, query: &NodeQuery) -> Result<Explanation, UnknownNode> {
    let node = resolve(trace, query).ok_or_else(|| {
        UnknownNode(match query {
            NodeQuery::Root => "root".into(),
            NodeQuery::Id(id) => id.to_string(),
            NodeQuery::Name(n) => n.clone(),
        })
    })?;

    let mut derivation = Vec::new();
    let mut seen = vec![];
    collect(trace, node, &mut seen, &mut derivation);

    let mut paths = Vec::new();
    let mut truncated = false;
    let mut stack = vec![vec![node]];
    while let Some(path) = stack.pop() {
        let last = *path.last().expect("paths are nonempty");
        let parents = trace.record(last).map(|r| r.parents.as_slice()).unwrap_or_default();
        if parents.is_empty() {
            if paths.len() == MAX_PATHS {
                truncated = true;
                break;
            }
            paths.push(path.iter().map(|&id| (id, name_of(trace, id))).collect());
            continue;
        }
        // reversed so that the first parent is explored first
        for &p in parents.iter().rev() {
            if !path.contains(&p) {
                let mut next = path.clone();
                next.push(p);
                stack.push(next);
            }
        }
    }

    Ok(Explanation {
        node,
        doc: trace.doc.clone(),
        calculus: trace.calculus.clone(),
        derivation,
        paths,
        truncated,
    })
}

fn name_of(trace: &Trace, id: NodeId) -> String {
    trace.record(id).map_or_else(|| format!("#{id}"), |r| r.name.clone())
}

fn collect(trace: &Trace, id: NodeId, seen: &mut Vec<NodeId>, out: &mut Vec<Step>) {
    if seen.contains(&id) {
        return;
    }
    seen.push(id);
    let Some(rec) = trace.record(id) else { return };
    if !rec.pruned {
        for &c in &rec.children {
            if !rec.skipped.contains(&c) {
                collect(trace, c, seen, out);
            }
        }
    }
    out.push(rec.clone());
}

fn render_step(f: &mut fmt::Formatter<'_>, s: &Step) -> fmt::Result {
    write!(f, "  [{}] {} (node {}): ", s.kind, s.name, s.node)?;
    let Some(output) = &s.output else {
        return writeln!(f, "pruned, not evaluated");
    };
    match s.matched {
        Some(true) => write!(f, "present -> {output}")?,
        Some(false) => write!(f, "absent -> {output}")?,
        None => {
            let args: Vec<String> = match &s.weight {
                Some(w) if s.op == "detach" => {
                    vec![format!("body {}", s.inputs[0]), format!("weight {w}")]
                }
                _ => s.inputs.iter().map(ToString::to_string).collect(),
            };
            write!(f, "{} via {}({}) -> {output}", s.op, s.function, args.join(", "))?;
        }
    }
    if s.bounded {
        f.write_str(" (upper bound)")?;
    }
    if !s.skipped.is_empty() {
        let ids: Vec<String> = s.skipped.iter().map(|id| format!("node {id}")).collect();
        write!(f, " [pruned: {}]", ids.join(", "))?;
    }
    writeln!(f)?;
    for a in &s.actions {
        writeln!(f, "      action: {a}")?;
    }
    for w in &s.warnings {
        writeln!(f, "      warning: {w}")?;
    }
    Ok(())
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let me = self.derivation.last().expect("derivation ends with the node");
        match &me.output {
            Some(v) => writeln!(f, "{} (node {}) = {v}", me.name, self.node)?,
            None => writeln!(f, "{} (node {}) was pruned", me.name, self.node)?,
        }
        writeln!(f, "document {} under {}", self.doc, self.calculus)?;
        writeln!(f, "derivation:")?;
        for s in &self.derivation {
            render_step(f, s)?;
        }
        writeln!(f, "path to root:")?;
        for p in &self.paths {
            let names: Vec<&str> = p.iter().map(|(_, n)| n.as_str()).collect();
            writeln!(f, "  {}", names.join(" -> "))?;
        }
        if self.truncated {
            writeln!(f, "  ... (more paths omitted)")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{expand, EvalOptions, Evaluator, WeightContext};
    use crate::rules::parse_rulebase;
    use crate::{Calculus, TruthValue};
    use std::collections::HashMap;

    fn trace(src: &str, present: &[&str], threshold: Option<f64>) -> Trace {
        let g = expand(&parse_rulebase(src).unwrap(), "T").unwrap();
        let c: Calculus = "scalar.godel".parse().unwrap();
        let vals: HashMap<String, TruthValue> = g
            .terminals()
            .into_iter()
            .map(|(_, p)| (p.to_string(), TruthValue::Scalar(if present.contains(&p) { 1.0 } else { 0.0 })))
            .collect();
        let ev = Evaluator::new(&g, c, &WeightContext::default()).unwrap();
        let opts = EvalOptions { threshold, prune: true, doc: "d".into() };
        ev.evaluate(&vals, &opts).unwrap().trace
    }

    #[test]
    fn root_of_one_rule_graph_is_three_steps() {
        let t = trace(r#"r: T <- evidence weight 0.7 "x" action "matched {concept} at {value}";"#, &["x"], None);
        let e = explain(&t, &NodeQuery::Root).unwrap();
        let kinds: Vec<&str> = e.derivation.iter().map(|s| s.kind.as_str()).collect();
        assert_eq!(kinds, vec!["terminal", "rule", "concept"]);
        assert_eq!(e.paths, vec![vec![(0, "T".to_string())]]);
        let text = e.to_string();
        assert!(text.contains("matched T at 0.700000"), "{text}");
        assert!(text.contains("present -> 1.000000"), "{text}");
    }

    #[test]
    fn terminal_is_a_single_step_with_paths_up() {
        let t = trace(
            r#"t: T <- implies weight 1 A or B;
               a: A <- evidence weight 1 "x";
               b: B <- evidence weight 1 "x";"#,
            &[],
            None,
        );
        let e = explain(&t, &"x".parse().unwrap()).unwrap();
        assert_eq!(e.derivation.len(), 1);
        assert_eq!(e.derivation[0].matched, Some(false));
        assert_eq!(e.paths.len(), 2);
        assert!(e.paths.iter().all(|p| p.last().unwrap().1 == "T"));
    }

    #[test]
    fn pruned_steps_claim_no_value() {
        let t = trace(
            r#"t: T <- implies weight 1 A and B;
               a: A <- evidence weight 0.1 "a";
               b: B <- evidence weight 1 "b";"#,
            &["a", "b"],
            Some(0.5),
        );
        let e = explain(&t, &"B".parse().unwrap()).unwrap();
        assert!(e.to_string().contains("pruned, not evaluated"));
        let root = explain(&t, &NodeQuery::Root).unwrap().to_string();
        assert!(root.contains("(upper bound)"), "{root}");
    }

    #[test]
    fn concept_names_win_over_matching_phrases() {
        let t = trace(
            r#"t: T <- implies weight 1 Attack or "attack";
               a: Attack <- evidence weight 0.5 "bomb";"#,
            &["attack"],
            None,
        );
        let concept = explain(&t, &"Attack".parse().unwrap()).unwrap();
        assert_eq!(t.record(concept.node).unwrap().kind, "concept");
        let phrase = explain(&t, &"attack".parse().unwrap()).unwrap();
        assert_eq!(t.record(phrase.node).unwrap().kind, "terminal");
    }

    #[test]
    fn unknown_nodes() {
        let t = trace(r#"r: T <- evidence weight 1 "x";"#, &[], None);
        assert_eq!(explain(&t, &NodeQuery::Id(99)), Err(UnknownNode("99".into())));
        assert!(explain(&t, &"Nope".parse().unwrap()).is_err());
        assert_eq!(explain(&t, &NodeQuery::Id(1)).unwrap().node, 1);
    }
}
