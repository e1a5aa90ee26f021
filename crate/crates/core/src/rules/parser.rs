//! Recursive-descent parser for the rule language.
//!
//! ```text
//! rulebase  := (directive | rule)* ;
//! directive := 'threshold' DECIMAL ';' ;
//! rule      := IDENT ':' IDENT '<-' ('implies'|'evidence') 'weight' weight expr ('action' STRING)? ';' ;
//! weight    := DECIMAL | '[' DECIMAL ',' DECIMAL ']' | STRING ;
//! expr      := or ;  or := and ('or' and)* ;  and := unary ('and' unary)* ;
//! unary     := 'not' unary | atom ;  atom := IDENT | STRING | '(' expr ')' .
//! ```

use super::ast::{Expr, Pos, Rule, RuleKind, Rulebase, WeightLiteral};
use super::lexer::{Keyword, Token, TokenKind};
use super::RuleError;

struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
}

const ATOM: &[&str] = &["identifier", "string", "'not'", "'('"];

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &'t Token {
        let t = self.peek();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str], context: &str) -> RuleError {
        let t = self.peek();
        RuleError::Syntax {
            pos: t.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.kind.to_string(),
            context: context.to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind, label: &str, context: &str) -> Result<Pos, RuleError> {
        if self.peek().kind == kind {
            Ok(self.advance().pos)
        } else {
            Err(self.error(&[label], context))
        }
    }

    fn eat_keyword(&mut self, k: Keyword) -> bool {
        if self.peek().kind == TokenKind::Keyword(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, context: &str) -> Result<(String, Pos), RuleError> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let pos = self.advance().pos;
                Ok((s.clone(), pos))
            }
            _ => Err(self.error(&["identifier"], context)),
        }
    }

    fn decimal(&mut self, context: &str) -> Result<f64, RuleError> {
        match self.peek().kind {
            TokenKind::Decimal(v) => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.error(&["number"], context)),
        }
    }

    fn rulebase(&mut self) -> Result<Rulebase, RuleError> {
        let mut rules = Vec::new();
        let mut threshold = None;
        loop {
            match &self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Keyword(Keyword::Threshold) => {
                    let pos = self.advance().pos;
                    let v = self.decimal("threshold directive")?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(RuleError::InvalidThreshold { value: v, pos });
                    }
                    if threshold.replace(v).is_some() {
                        return Err(RuleError::DuplicateThreshold { pos });
                    }
                    self.expect(TokenKind::Semicolon, "';'", "threshold directive")?;
                }
                TokenKind::Ident(_) => rules.push(self.rule()?),
                _ => return Err(self.error(&["rule name", "'threshold'"], "rulebase")),
            }
        }
        Ok(Rulebase::new(rules, threshold))
    }

    fn rule(&mut self) -> Result<Rule, RuleError> {
        let (name, pos) = self.ident("rule name")?;
        self.expect(TokenKind::Colon, "':'", "rule")?;
        let (head, _) = self.ident("rule head")?;
        self.expect(TokenKind::Arrow, "'<-'", "rule")?;
        let kind = if self.eat_keyword(Keyword::Implies) {
            RuleKind::Implies
        } else if self.eat_keyword(Keyword::Evidence) {
            RuleKind::Evidence
        } else {
            return Err(self.error(&["'implies'", "'evidence'"], "rule kind"));
        };
        if !self.eat_keyword(Keyword::Weight) {
            return Err(self.error(&["'weight'"], "rule"));
        }
        let weight = self.weight()?;
        let body = self.expr()?;
        let action = if self.eat_keyword(Keyword::Action) {
            match &self.peek().kind {
                TokenKind::Str(s) => {
                    self.advance();
                    Some(s.clone())
                }
                _ => return Err(self.error(&["string"], "action")),
            }
        } else {
            None
        };
        let expected: &[&str] = if action.is_some() {
            &["';'"]
        } else {
            &["';'", "'and'", "'or'", "'action'"]
        };
        if self.peek().kind != TokenKind::Semicolon {
            return Err(self.error(expected, "end of rule"));
        }
        self.advance();
        Ok(Rule { name, head, kind, weight, body, action, pos })
    }

    fn weight(&mut self) -> Result<WeightLiteral, RuleError> {
        match &self.peek().kind {
            TokenKind::Decimal(v) => {
                self.advance();
                Ok(WeightLiteral::Scalar(*v))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(WeightLiteral::Term(s.clone()))
            }
            TokenKind::LBracket => {
                self.advance();
                let lo = self.decimal("interval weight")?;
                self.expect(TokenKind::Comma, "','", "interval weight")?;
                let hi = self.decimal("interval weight")?;
                self.expect(TokenKind::RBracket, "']'", "interval weight")?;
                Ok(WeightLiteral::Interval(lo, hi))
            }
            _ => Err(self.error(&["number", "'['", "string"], "weight")),
        }
    }

    fn expr(&mut self) -> Result<Expr, RuleError> {
        let mut items = vec![self.and()?];
        while self.eat_keyword(Keyword::Or) {
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn and(&mut self) -> Result<Expr, RuleError> {
        let mut items = vec![self.unary()?];
        while self.eat_keyword(Keyword::And) {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self) -> Result<Expr, RuleError> {
        if self.eat_keyword(Keyword::Not) {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, RuleError> {
        let tok = self.peek();
        match &tok.kind {
            TokenKind::Ident(s) => {
                self.advance();
                Ok(Expr::Concept(s.clone()))
            }
            TokenKind::Str(s) => {
                if s.trim().is_empty() {
                    return Err(RuleError::EmptyTerminal { pos: tok.pos });
                }
                self.advance();
                Ok(Expr::Terminal(s.clone()))
            }
            TokenKind::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "')'", "parenthesised expression")?;
                Ok(e)
            }
            _ => Err(self.error(ATOM, "atom")),
        }
    }
}

/// Parses a token stream into an unvalidated rulebase.
pub fn parse(tokens: &[Token]) -> Result<Rulebase, RuleError> {
    if tokens.is_empty() {
        return Ok(Rulebase::default());
    }
    Parser { tokens, at: 0 }.rulebase()
}
