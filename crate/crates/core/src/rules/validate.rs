use std::collections::{HashMap, HashSet};

use super::ast::{Pos, RuleKind, Rulebase, WeightLiteral};
use super::ValidationError;

/// Checks everything graph expansion relies on, reporting every problem found.
pub fn validate(rulebase: &Rulebase, goal: &str) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();

    if !rulebase.defines(goal) {
        errors.push(ValidationError::UndefinedGoal(goal.to_string()));
    }

    let mut seen: HashMap<&str, Pos> = HashMap::new();
    for rule in rulebase.rules() {
        if let Some(first) = seen.get(rule.name.as_str()) {
            errors.push(ValidationError::DuplicateRuleName {
                name: rule.name.clone(),
                pos: rule.pos,
                first: *first,
            });
        } else {
            seen.insert(&rule.name, rule.pos);
        }

        let mut reported = HashSet::new();
        for concept in rule.body.concept_refs() {
            if !rulebase.defines(concept) && reported.insert(concept) {
                errors.push(ValidationError::UndefinedConcept {
                    name: concept.to_string(),
                    rule: rule.name.clone(),
                    pos: rule.pos,
                });
            }
        }

        if let Some(reason) = weight_problem(&rule.weight) {
            errors.push(ValidationError::MalformedWeight {
                rule: rule.name.clone(),
                reason,
                pos: rule.pos,
            });
        }

        if rule.kind == RuleKind::Evidence && !rule.body.is_terminal_disjunction() {
            errors.push(ValidationError::MalformedEvidenceBody {
                rule: rule.name.clone(),
                pos: rule.pos,
            });
        }
    }

    errors.extend(find_cycles(rulebase).into_iter().map(ValidationError::CyclicRuleBase));

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn weight_problem(w: &WeightLiteral) -> Option<String> {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    match w {
        WeightLiteral::Scalar(v) if !unit(*v) => Some(format!("{v} outside [0,1]")),
        WeightLiteral::Interval(lo, hi) if !unit(*lo) || !unit(*hi) => {
            Some(format!("[{lo},{hi}] outside [0,1]"))
        }
        WeightLiteral::Interval(lo, hi) if lo > hi => Some(format!("[{lo},{hi}] violates α <= β")),
        WeightLiteral::Term(t) if t.trim().is_empty() => Some("empty linguistic term".into()),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Unseen,
    OnStack,
    Done,
}

/// Depth-first search over the concept dependency graph; each back edge
/// yields one cycle path, first concept repeated at the end.
fn find_cycles(rulebase: &Rulebase) -> Vec<Vec<String>> {
    let mut concepts: Vec<&str> = Vec::new();
    for r in rulebase.rules() {
        if !concepts.contains(&r.head.as_str()) {
            concepts.push(&r.head);
        }
    }
    let deps = |c: &str| -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in rulebase.rules_for(c) {
            for d in r.body.concept_refs() {
                if rulebase.defines(d) && !out.contains(&d) {
                    out.push(d);
                }
            }
        }
        out
    };

    let mut marks: HashMap<&str, Mark> = concepts.iter().map(|c| (*c, Mark::Unseen)).collect();
    let mut cycles = Vec::new();
    for &start in &concepts {
        if marks[start] != Mark::Unseen {
            continue;
        }
        // explicit stack of (concept, its dependencies, next index)
        let mut stack: Vec<(&str, Vec<&str>, usize)> = vec![(start, deps(start), 0)];
        marks.insert(start, Mark::OnStack);
        while let Some((node, children, idx)) = stack.last_mut() {
            if *idx == children.len() {
                marks.insert(node, Mark::Done);
                stack.pop();
                continue;
            }
            let child = children[*idx];
            *idx += 1;
            match marks[child] {
                Mark::Unseen => {
                    marks.insert(child, Mark::OnStack);
                    let d = deps(child);
                    stack.push((child, d, 0));
                }
                Mark::OnStack => {
                    let from = stack.iter().position(|(n, _, _)| *n == child).unwrap();
                    let mut path: Vec<String> = stack[from..].iter().map(|(n, _, _)| n.to_string()).collect();
                    path.push(child.to_string());
                    cycles.push(path);
                }
                Mark::Done => {}
            }
        }
    }
    cycles
}
