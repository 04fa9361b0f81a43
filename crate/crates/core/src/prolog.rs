//! A minimal reader for the Prolog subset used by fact, mode and relation
//! files: atoms, numbers, variables, lists, compound terms, the mode prefixes
//! `+ - #`, clauses `H :- B1, B2.` and directives `:- D.`

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Atom(String),
    Var(String),
    List(Vec<Term>),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, items: &[Term]) -> fmt::Result {
            for (i, t) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        }
        match self {
            Term::Atom(a) | Term::Var(a) => f.write_str(a),
            Term::List(items) => {
                f.write_str("[")?;
                join(f, items)?;
                f.write_str("]")
            }
            Term::Compound(op, args) if args.len() == 1 && matches!(op.as_str(), "+" | "-" | "#") => {
                write!(f, "{op}{}", args[0])
            }
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                join(f, args)?;
                f.write_str(")")
            }
        }
    }
}

/// A clause (`head` present) or a directive (`head` absent), with the line on
/// which it starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub line: usize,
    pub head: Option<Term>,
    pub body: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Prefix(char),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Neck,
    End,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, msg: msg.into() }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '\n' {
                self.line += 1;
                self.chars.next();
            } else if c.is_whitespace() {
                self.chars.next();
            } else if c == '%' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.chars.next();
                }
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, buf: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            buf.push(c);
            self.chars.next();
        }
    }

    fn number(&mut self, buf: &mut String) {
        self.take_while(buf, |c| c.is_ascii_digit());
        // A '.' continues the number only when a digit follows it.
        let mut look = self.chars.clone();
        if look.next() == Some('.') && look.next().is_some_and(|c| c.is_ascii_digit()) {
            buf.push('.');
            self.chars.next();
            self.take_while(buf, |c| c.is_ascii_digit());
        }
    }

    /// Next token and the line it starts on.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_trivia();
        let line = self.line;
        let Some(c) = self.chars.next() else { return Ok(None) };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '.' => Tok::End,
            ':' => {
                if self.chars.next() != Some('-') {
                    return Err(self.err("expected `:-`"));
                }
                Tok::Neck
            }
            '*' => Tok::Name("*".into()),
            '+' | '#' => Tok::Prefix(c),
            '-' => {
                if self.chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let mut buf = String::from("-");
                    self.number(&mut buf);
                    Tok::Name(buf)
                } else {
                    Tok::Prefix('-')
                }
            }
            '\'' => {
                let mut buf = String::new();
                loop {
                    match self.chars.next() {
                        Some('\'') => break,
                        Some('\n') | None => return Err(self.err("unterminated quoted atom")),
                        Some(c) => buf.push(c),
                    }
                }
                Tok::Name(buf)
            }
            c if c.is_ascii_digit() => {
                let mut buf = String::from(c);
                self.number(&mut buf);
                Tok::Name(buf)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut buf = String::from(c);
                self.take_while(&mut buf, |c| c.is_alphanumeric() || c == '_');
                if c.is_uppercase() || c == '_' {
                    Tok::Var(buf)
                } else {
                    Tok::Name(buf)
                }
            }
            other => return Err(self.err(format!("unexpected character `{other}`"))),
        };
        Ok(Some((tok, line)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&Tok>, ParseError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next()?;
        }
        Ok(self.peeked.as_ref().map(|(t, _)| t))
    }

    fn bump(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lexer.next(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump()? {
            Some((t, _)) if t == want => Ok(()),
            Some((t, line)) => Err(ParseError { line, msg: format!("expected {what}, found {t:?}") }),
            None => Err(self.lexer.err(format!("expected {what}, found end of input"))),
        }
    }

    fn args(&mut self, close: Tok) -> Result<Vec<Term>, ParseError> {
        let mut out = Vec::new();
        if self.peek()? == Some(&close) {
            self.bump()?;
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            match self.bump()? {
                Some((Tok::Comma, _)) => continue,
                Some((t, _)) if t == close => return Ok(out),
                Some((t, line)) => return Err(ParseError { line, msg: format!("unexpected {t:?} in argument list") }),
                None => return Err(self.lexer.err("unterminated argument list")),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.bump()? {
            Some((Tok::Prefix(op), _)) => Ok(Term::Compound(op.to_string(), vec![self.term()?])),
            Some((Tok::Var(v), _)) => Ok(Term::Var(v)),
            Some((Tok::LBrack, _)) => Ok(Term::List(self.args(Tok::RBrack)?)),
            Some((Tok::Name(n), _)) => {
                if self.peek()? == Some(&Tok::LParen) {
                    self.bump()?;
                    Ok(Term::Compound(n, self.args(Tok::RParen)?))
                } else {
                    Ok(Term::Atom(n))
                }
            }
            Some((t, line)) => Err(ParseError { line, msg: format!("unexpected {t:?}") }),
            None => Err(self.lexer.err("unexpected end of input")),
        }
    }

    fn body(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term()?];
        while self.peek()? == Some(&Tok::Comma) {
            self.bump()?;
            out.push(self.term()?);
        }
        Ok(out)
    }

    fn sentence(&mut self) -> Result<Option<Sentence>, ParseError> {
        let line = match self.peek()? {
            None => return Ok(None),
            Some(_) => self.peeked.as_ref().map(|(_, l)| *l).unwrap_or(self.lexer.line),
        };
        let s = if self.peek()? == Some(&Tok::Neck) {
            self.bump()?;
            Sentence { line, head: None, body: self.body()? }
        } else {
            let head = self.term()?;
            let body = if self.peek()? == Some(&Tok::Neck) {
                self.bump()?;
                self.body()?
            } else {
                Vec::new()
            };
            Sentence { line, head: Some(head), body }
        };
        self.expect(Tok::End, "`.`")?;
        Ok(Some(s))
    }
}

/// Parses every clause and directive in `text`.
pub fn parse_program(text: &str) -> Result<Vec<Sentence>, ParseError> {
    let mut p = Parser { lexer: Lexer { chars: text.chars().peekable(), line: 1 }, peeked: None };
    let mut out = Vec::new();
    while let Some(s) = p.sentence()? {
        out.push(s);
    }
    Ok(out)
}
