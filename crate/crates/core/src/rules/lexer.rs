use std::fmt;

use super::ast::Pos;
use super::RuleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Implies,
    Evidence,
    And,
    Or,
    Not,
    Weight,
    Action,
    Threshold,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Self> {
        Some(match s {
            "implies" => Keyword::Implies,
            "evidence" => Keyword::Evidence,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "not" => Keyword::Not,
            "weight" => Keyword::Weight,
            "action" => Keyword::Action,
            "threshold" => Keyword::Threshold,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Implies => "implies",
            Keyword::Evidence => "evidence",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::Not => "not",
            Keyword::Weight => "weight",
            Keyword::Action => "action",
            Keyword::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Decimal(f64),
    Str(String),
    Keyword(Keyword),
    Colon,
    Semicolon,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Arrow,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Decimal(v) => write!(f, "number {v}"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Keyword(k) => write!(f, "'{}'", k.as_str()),
            TokenKind::Colon => f.write_str("':'"),
            TokenKind::Semicolon => f.write_str("';'"),
            TokenKind::Comma => f.write_str("','"),
            TokenKind::LBracket => f.write_str("'['"),
            TokenKind::RBracket => f.write_str("']'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::Arrow => f.write_str("'<-'"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

/// Splits rule source into tokens; the stream always ends with [`TokenKind::Eof`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, RuleError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            match Keyword::from_ident(&ident) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(ident),
            }
        } else if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            if chars.peek() == Some(&'.') {
                text.push('.');
                bump!();
                let before = text.len();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if text.len() == before {
                    return Err(RuleError::IllegalCharacter { ch: '.', pos: Pos { line, col: col - 1 } });
                }
            }
            TokenKind::Decimal(text.parse().expect("digits form a valid decimal"))
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    None => return Err(RuleError::UnterminatedString { pos }),
                    Some('"') => break,
                    Some('\\') => match chars.peek() {
                        Some(&e @ ('"' | '\\')) => {
                            s.push(e);
                            bump!();
                        }
                        _ => s.push('\\'),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            TokenKind::Str(s)
        } else {
            bump!();
            match c {
                ':' => TokenKind::Colon,
                ';' => TokenKind::Semicolon,
                ',' => TokenKind::Comma,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '<' if chars.peek() == Some(&'-') => {
                    bump!();
                    TokenKind::Arrow
                }
                other => return Err(RuleError::IllegalCharacter { ch: other, pos }),
            }
        };
        tokens.push(Token { kind, pos });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn rule_head() {
        assert_eq!(
            kinds("r1: T <- implies"),
            vec![
                TokenKind::Ident("r1".into()),
                TokenKind::Colon,
                TokenKind::Ident("T".into()),
                TokenKind::Arrow,
                TokenKind::Keyword(Keyword::Implies),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(kinds(r#""car bomb""#), vec![TokenKind::Str("car bomb".into()), TokenKind::Eof]);
        assert_eq!(kinds(r#""say \"hi\" \\ \q""#)[0], TokenKind::Str(r#"say "hi" \ \q"#.into()));
    }

    #[test]
    fn unterminated_string() {
        assert_eq!(
            tokenize("\"abc"),
            Err(RuleError::UnterminatedString { pos: Pos { line: 1, col: 1 } })
        );
        assert!(matches!(
            tokenize("x\n  \"abc\n"),
            Err(RuleError::UnterminatedString { pos: Pos { line: 2, col: 3 } })
        ));
    }

    #[test]
    fn illegal_character_reports_position() {
        assert_eq!(
            tokenize("a\nb $"),
            Err(RuleError::IllegalCharacter { ch: '$', pos: Pos { line: 2, col: 3 } })
        );
        assert!(matches!(tokenize("a < b"), Err(RuleError::IllegalCharacter { ch: '<', .. })));
        assert!(matches!(tokenize("1."), Err(RuleError::IllegalCharacter { ch: '.', .. })));
    }

    #[test]
    fn comments_numbers_and_positions() {
        let toks = tokenize("# header\nthreshold 0.25; # trailing\n[1,0.5]").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Keyword(Keyword::Threshold));
        assert_eq!(toks[0].pos, Pos { line: 2, col: 1 });
        assert_eq!(toks[1].kind, TokenKind::Decimal(0.25));
        assert_eq!(toks[3].pos, Pos { line: 3, col: 1 });
        assert_eq!(toks[4].kind, TokenKind::Decimal(1.0));
    }
}
