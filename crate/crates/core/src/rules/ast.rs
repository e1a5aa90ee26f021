use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    /// Inference from other concepts.
    Implies,
    /// Direct textual evidence.
    Evidence,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Implies => "implies",
            RuleKind::Evidence => "evidence",
        })
    }
}

/// A rule weight as written in the source.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightLiteral {
    Scalar(f64),
    Interval(f64, f64),
    /// A linguistic term such as `"very certain"`.
    Term(String),
}

impl fmt::Display for WeightLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLiteral::Scalar(v) => write!(f, "{v}"),
            WeightLiteral::Interval(lo, hi) => write!(f, "[{lo},{hi}]"),
            WeightLiteral::Term(t) => write_quoted(f, t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Concept(String),
    Terminal(String),
}

impl Expr {
    /// Concept names referenced anywhere in the expression, in order of appearance.
    pub fn concept_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Concept(name) = e {
                out.push(name.as_str());
            }
        });
        out
    }

    pub fn terminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Terminal(p) = e {
                out.push(p.as_str());
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::And(children) | Expr::Or(children) => children.iter().for_each(|c| c.visit(f)),
            Expr::Not(inner) => inner.visit(f),
            Expr::Concept(_) | Expr::Terminal(_) => {}
        }
    }

    /// A terminal, or a disjunction whose leaves are all terminals.
    pub fn is_terminal_disjunction(&self) -> bool {
        match self {
            Expr::Terminal(_) => true,
            Expr::Or(children) => children.iter().all(Expr::is_terminal_disjunction),
            _ => false,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parent_is_and: bool) -> fmt::Result {
        let needs_parens = match self {
            Expr::Or(_) => true,
            Expr::And(_) => parent_is_and,
            _ => false,
        };
        if needs_parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(children) | Expr::Or(children) => {
                let is_and = matches!(self, Expr::And(_));
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(if is_and { " and " } else { " or " })?;
                    }
                    if is_and {
                        c.fmt_child(f, true)?;
                    } else {
                        // inside an or, only nested ors need parentheses
                        match c {
                            Expr::Or(_) => write!(f, "({c})")?,
                            _ => write!(f, "{c}")?,
                        }
                    }
                }
                Ok(())
            }
            Expr::Not(inner) => match inner.as_ref() {
                Expr::And(_) | Expr::Or(_) => write!(f, "not ({inner})"),
                _ => write!(f, "not {inner}"),
            },
            Expr::Concept(name) => f.write_str(name),
            Expr::Terminal(p) => write_quoted(f, p),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for ch in s.chars() {
        match ch {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub head: String,
    pub kind: RuleKind,
    pub weight: WeightLiteral,
    pub body: Expr,
    /// Message template with `{concept}`, `{value}`, `{doc}` and `{rule}` placeholders.
    pub action: Option<String>,
    pub pos: Pos,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} <- {} weight {} {}",
            self.name, self.head, self.kind, self.weight, self.body
        )?;
        if let Some(action) = &self.action {
            f.write_str(" action ")?;
            write_quoted(f, action)?;
        }
        f.write_str(";")
    }
}

/// An ordered collection of rules plus the optional pruning threshold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rulebase {
    rules: Vec<Rule>,
    threshold: Option<f64>,
    by_head: HashMap<String, Vec<usize>>,
}

impl Rulebase {
    pub fn new(rules: Vec<Rule>, threshold: Option<f64>) -> Self {
        let mut by_head: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_head.entry(r.head.clone()).or_default().push(i);
        }
        Rulebase { rules, threshold, by_head }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    /// Rules concluding `concept`, in source order.
    pub fn rules_for<'a>(&'a self, concept: &str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.by_head
            .get(concept)
            .into_iter()
            .flatten()
            .map(move |&i| &self.rules[i])
    }

    pub fn defines(&self, concept: &str) -> bool {
        self.by_head.contains_key(concept)
    }

    /// Concepts that head a rule but are never referenced by another rule.
    pub fn goals(&self) -> Vec<String> {
        let referenced: BTreeSet<&str> =
            self.rules.iter().flat_map(|r| r.body.concept_refs()).collect();
        let mut seen = BTreeSet::new();
        self.rules
            .iter()
            .map(|r| r.head.as_str())
            .filter(|h| !referenced.contains(h) && seen.insert(*h))
            .map(str::to_string)
            .collect()
    }
}

impl fmt::Display for Rulebase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(t) = self.threshold {
            writeln!(f, "threshold {t};")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
