//! Parser for the rule DSL.
//!
//! ```text
//! % comment
//! head(X, "const") :- body1(X, Y), not body2(Y), gt(Y, 0).
//! ```
//!
//! Variables start with an uppercase letter or `_`; a lone `_` is anonymous.
//! Constants are double-quoted strings, integers, `YYYY-MM-DD` dates, or bare
//! lowercase identifiers (read as strings).

use chrono::NaiveDate;

use super::ast::{Atom, Builtin, Literal, Rule, Term, Value};
use super::RuleError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Const(Value),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> RuleError {
        RuleError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn take_while(&mut self, mut pred: impl FnMut(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, RuleError> {
        let mut out = Vec::new();
        loop {
            let (line, column) = (self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                return Ok(out);
            };
            let tok = match c {
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                '%' => {
                    self.take_while(|c| c != '\n');
                    continue;
                }
                '(' | ')' | ',' | '.' => {
                    self.bump();
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Dot,
                    }
                }
                ':' => {
                    self.bump();
                    if self.bump() != Some('-') {
                        return Err(self.error(line, column, "expected `:-`"));
                    }
                    Tok::Neck
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => return Err(self.error(line, column, "unterminated string")),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(c @ ('"' | '\\')) => s.push(c),
                                Some(c) => s.push_str(&format!("\\{c}")),
                                None => {
                                    return Err(self.error(line, column, "unterminated string"))
                                }
                            },
                            Some(c) => s.push(c),
                        }
                    }
                    Tok::Const(Value::Str(s))
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let text = self.take_while(|c| c.is_ascii_digit() || c == '-');
                    if text.len() == 10 && text.as_bytes()[4] == b'-' && text.as_bytes()[7] == b'-'
                    {
                        let date = NaiveDate::parse_from_str(&text, "%Y-%m-%d")
                            .map_err(|e| self.error(line, column, format!("bad date `{text}`: {e}")))?;
                        Tok::Const(Value::Date(date))
                    } else {
                        let n = text
                            .parse::<i64>()
                            .map_err(|_| self.error(line, column, format!("bad number `{text}`")))?;
                        Tok::Const(Value::Int(n))
                    }
                }
                c if c.is_alphabetic() || c == '_' => {
                    let word = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    if c.is_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Ident(word)
                    }
                }
                other => {
                    return Err(self.error(line, column, format!("unexpected character `{other}`")))
                }
            };
            out.push(Spanned { tok, line, column });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
    eof: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self, RuleError> {
        let eof = text
            .lines()
            .enumerate()
            .last()
            .map(|(i, l)| (i + 1, l.chars().count() + 1))
            .unwrap_or((1, 1));
        Ok(Parser {
            toks: Lexer::new(text).tokens()?,
            pos: 0,
            anon: 0,
            eof,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    fn error(&self, message: impl Into<String>) -> RuleError {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.eof);
        RuleError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), RuleError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn rules(&mut self) -> Result<Vec<Rule>, RuleError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.rule()?);
        }
        Ok(rules)
    }

    fn rule(&mut self) -> Result<Rule, RuleError> {
        self.anon = 0;
        let head = self.atom()?;
        if Builtin::lookup(&head.predicate).is_some() {
            return Err(self.error(format!("builtin `{}` cannot be a rule head", head.predicate)));
        }
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.pos += 1;
            loop {
                body.push(self.literal()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    _ => break,
                }
            }
        }
        self.expect(Tok::Dot, "`.` at end of rule")?;
        Ok(Rule { head, body })
    }

    fn literal(&mut self) -> Result<Literal, RuleError> {
        let negated = matches!(self.peek(), Some(Tok::Ident(w)) if w == "not")
            && matches!(self.peek_at(1), Some(Tok::Ident(_)));
        if negated {
            self.pos += 1;
        }
        let atom = self.atom()?;
        Ok(match Builtin::lookup(&atom.predicate) {
            Some(builtin) => Literal::Builtin {
                builtin,
                atom,
                negated,
            },
            None if negated => Literal::Negative(atom),
            None => Literal::Positive(atom),
        })
    }

    fn atom(&mut self) -> Result<Atom, RuleError> {
        let predicate = match self.next() {
            Some(Tok::Ident(name)) => name,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected predicate name"));
            }
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.term()?);
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        _ => break,
                    }
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom { predicate, args })
    }

    fn term(&mut self) -> Result<Term, RuleError> {
        match self.next() {
            Some(Tok::Var(v)) if v == "_" => {
                self.anon += 1;
                Ok(Term::Var(format!("_{}", self.anon)))
            }
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Const(c)) => Ok(Term::Const(c)),
            Some(Tok::Ident(s)) => Ok(Term::Const(Value::Str(s))),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a variable or constant"))
            }
        }
    }
}

/// Parses rule text without validating safety or stratification.
pub fn parse_rule_list(text: &str) -> Result<Vec<Rule>, RuleError> {
    Parser::new(text)?.rules()
}

/// Parses a single (possibly negated) body literal, e.g. `not b("x")`.
pub fn parse_literal(text: &str) -> Result<Literal, RuleError> {
    let mut p = Parser::new(text)?;
    let lit = p.literal()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input after literal"));
    }
    Ok(lit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_rule() {
        let rules = parse_rule_list(
            "% a comment\nhead(X) :- body1(X, Y), not body2(Y), gt(Z, 0), days_between(2021-01-01, Y, Z).",
        )
        .unwrap();
        assert_eq!(rules.len(), 1);
        let r = &rules[0];
        assert_eq!(r.body.len(), 4);
        assert!(matches!(r.body[1], Literal::Negative(_)));
        assert!(matches!(r.body[2], Literal::Builtin { builtin: Builtin::Gt, negated: false, .. }));
        assert_eq!(
            r.to_string(),
            "head(X) :- body1(X, Y), not body2(Y), gt(Z, 0), days_between(2021-01-01, Y, Z)."
        );
    }

    #[test]
    fn constants_and_anonymous_vars() {
        let rules = parse_rule_list(r#"p(foo, "a\"b", -3, _, _) :- q(_)."#).unwrap();
        let args = &rules[0].head.args;
        assert_eq!(args[0], Term::Const(Value::str("foo")));
        assert_eq!(args[1], Term::Const(Value::str("a\"b")));
        assert_eq!(args[2], Term::Const(Value::Int(-3)));
        assert_ne!(args[3], args[4]);
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_rule_list("a(X) :- b(X).\nc(X) :- d(X)").unwrap_err();
        match err {
            RuleError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains('.'));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_rule_list("a(X) :- b(X) ; c(X).").unwrap_err();
        assert!(matches!(err, RuleError::Parse { line: 1, column: 14, .. }), "{err:?}");
    }

    #[test]
    fn builtin_head_rejected() {
        assert!(parse_rule_list("gt(X, 1) :- p(X).").is_err());
    }

    #[test]
    fn single_literal() {
        let lit = parse_literal(r#"not file_mentions("src/a.js", "https://x")"#).unwrap();
        assert!(lit.is_negated());
        assert!(parse_literal("a(X) b").is_err());
    }
}
