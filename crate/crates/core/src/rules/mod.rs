//! The rule language: lexer, parser, printer and validator.
//!
//! A rulebase is a sequence of weighted rules, optionally preceded by a
//! pruning threshold:
//!
//! ```text
//! threshold 0.3;
//! t1: Terrorism <- implies weight 0.9 Bombing and not Accident;
//! b1: Bombing   <- evidence weight [0.6,0.9] "car bomb" or "explosion"
//!                  action "saw {concept} in {doc}";
//! ```

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod validate;

use std::fmt;

use thiserror::Error;

pub use ast::{Expr, Pos, Rule, RuleKind, Rulebase, WeightLiteral};
pub use validate::validate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("unterminated string starting at {pos}")]
    UnterminatedString { pos: Pos },
    #[error("illegal character {ch:?} at {pos}")]
    IllegalCharacter { ch: char, pos: Pos },
    #[error("syntax error at {pos}: expected {}, found {found}", expected_label(.context, .expected))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
        context: String,
    },
    #[error("empty terminal pattern at {pos}")]
    EmptyTerminal { pos: Pos },
    #[error("threshold {value} at {pos} is outside [0,1]")]
    InvalidThreshold { value: f64, pos: Pos },
    #[error("second threshold directive at {pos}")]
    DuplicateThreshold { pos: Pos },
}

impl RuleError {
    pub fn pos(&self) -> Pos {
        match self {
            RuleError::UnterminatedString { pos }
            | RuleError::IllegalCharacter { pos, .. }
            | RuleError::Syntax { pos, .. }
            | RuleError::EmptyTerminal { pos }
            | RuleError::InvalidThreshold { pos, .. }
            | RuleError::DuplicateThreshold { pos } => *pos,
        }
    }
}

fn expected_label(context: &str, expected: &[String]) -> String {
    if context == "atom" {
        return "atom".to_string();
    }
    match expected {
        [one] => format!("{one} in {context}"),
        _ => format!("one of {} in {context}", expected.join(", ")),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("goal concept {0} has no rules")]
    UndefinedGoal(String),
    #[error("undefined concept {name} referenced by rule {rule} at {pos}")]
    UndefinedConcept { name: String, rule: String, pos: Pos },
    #[error("cyclic rulebase: {}", Path(.0))]
    CyclicRuleBase(Vec<String>),
    #[error("duplicate rule name {name} at {pos} (first defined at {first})")]
    DuplicateRuleName { name: String, pos: Pos, first: Pos },
    #[error("malformed weight in rule {rule} at {pos}: {reason}")]
    MalformedWeight { rule: String, reason: String, pos: Pos },
    #[error("evidence rule {rule} at {pos} must have a terminal or a disjunction of terminals as its body")]
    MalformedEvidenceBody { rule: String, pos: Pos },
}

struct Path<'a>(&'a [String]);

impl fmt::Display for Path<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" -> "))
    }
}

/// Tokenizes and parses `source` without validating it.
pub fn parse_rulebase(source: &str) -> Result<Rulebase, RuleError> {
    parser::parse(&lexer::tokenize(source)?)
}
