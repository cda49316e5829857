//! Boolean expressions and their text syntax.
//!
//! ```text
//! expr    := or
//! or      := xor  (("|" | "@|") xor)*
//! xor     := and  ("^" and)*
//! and     := unary (("&" | "@&") unary)*
//! unary   := "!" unary | atom
//! atom    := ident | "(" expr ")"
//! ```
//!
//! Operators of one precedence level associate to the left. A run of the
//! *same* k-ary operator folds into a single node, so `a @& b @& c` is the
//! three-input NAND; write `(a @& b) @& c` for the nested form. XOR is
//! binary and nests to the left.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Nand(Vec<Expr>),
    Nor(Vec<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    /// Distinct variable names, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::Xor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::And(es) | Expr::Or(es) | Expr::Nand(es) | Expr::Nor(es) => {
                es.iter().for_each(|e| e.collect_vars(out))
            }
        }
    }

    /// Evaluate directly, looking variables up with `value`.
    pub fn eval(&self, value: &impl Fn(&str) -> bool) -> bool {
        match self {
            Expr::Var(v) => value(v),
            Expr::Not(e) => !e.eval(value),
            Expr::And(es) => es.iter().all(|e| e.eval(value)),
            Expr::Or(es) => es.iter().any(|e| e.eval(value)),
            Expr::Nand(es) => !es.iter().all(|e| e.eval(value)),
            Expr::Nor(es) => !es.iter().any(|e| e.eval(value)),
            Expr::Xor(a, b) => a.eval(value) != b.eval(value),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, es: &[Expr], op: &str| {
            f.write_str("(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        };
        match self {
            Expr::Var(v) => f.write_str(v),
            Expr::Not(e) => write!(f, "!{e}"),
            Expr::And(es) => join(f, es, "&"),
            Expr::Or(es) => join(f, es, "|"),
            Expr::Nand(es) => join(f, es, "@&"),
            Expr::Nor(es) => join(f, es, "@|"),
            Expr::Xor(a, b) => write!(f, "({a} ^ {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected {found} at position {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    And,
    Nand,
    Xor,
    Or,
    Nor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    Op(Op),
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier {s:?}"),
            Token::Not => f.write_str("'!'"),
            Token::Op(Op::And) => f.write_str("'&'"),
            Token::Op(Op::Nand) => f.write_str("'@&'"),
            Token::Op(Op::Xor) => f.write_str("'^'"),
            Token::Op(Op::Or) => f.write_str("'|'"),
            Token::Op(Op::Nor) => f.write_str("'@|'"),
            Token::LParen => f.write_str("'('"),
            Token::RParen => f.write_str("')'"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Token::Not,
            b'&' => Token::Op(Op::And),
            b'^' => Token::Op(Op::Xor),
            b'|' => Token::Op(Op::Or),
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'@' => match bytes.get(i + 1) {
                Some(b'&') => {
                    i += 1;
                    Token::Op(Op::Nand)
                }
                Some(b'|') => {
                    i += 1;
                    Token::Op(Op::Nor)
                }
                _ => return Err(ParseError::Unexpected { pos: i, found: "'@'".into() }),
            },
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Token::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(ParseError::Unexpected { pos: i, found: format!("{ch:?}") });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(_, t)| t)
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.tokens.get(self.at) {
            Some((pos, tok)) => ParseError::Unexpected { pos: *pos, found: tok.to_string() },
            None => ParseError::UnexpectedEnd { expected },
        }
    }

    /// One left-associative level over `ops`, folding runs of one operator.
    fn level(&mut self, ops: &[Op], next: fn(&mut Self) -> Result<Expr, ParseError>) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        let mut run: Option<(Op, Vec<Expr>)> = None;
        while let Some(Token::Op(op)) = self.peek().cloned() {
            if !ops.contains(&op) {
                break;
            }
            self.at += 1;
            let rhs = next(self)?;
            match &mut run {
                Some((current, operands)) if *current == op && op != Op::Xor => operands.push(rhs),
                _ => {
                    if let Some((current, operands)) = run.take() {
                        lhs = build(current, operands);
                    }
                    run = Some((op, vec![lhs.clone(), rhs]));
                }
            }
        }
        Ok(match run {
            Some((op, operands)) => build(op, operands),
            None => lhs,
        })
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        self.level(&[Op::Or, Op::Nor], Self::xor)
    }

    fn xor(&mut self) -> Result<Expr, ParseError> {
        self.level(&[Op::Xor], Self::and)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        self.level(&[Op::And, Op::Nand], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Not) => {
                self.at += 1;
                Ok(Expr::not(self.unary()?))
            }
            Some(Token::Ident(name)) => {
                let e = Expr::var(name);
                self.at += 1;
                Ok(e)
            }
            Some(Token::LParen) => {
                self.at += 1;
                let e = self.or()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.at += 1;
                        Ok(e)
                    }
                    _ => Err(self.unexpected("')'")),
                }
            }
            _ => Err(self.unexpected("an identifier, '!' or '('")),
        }
    }
}

fn build(op: Op, mut operands: Vec<Expr>) -> Expr {
    match op {
        Op::And => Expr::And(operands),
        Op::Nand => Expr::Nand(operands),
        Op::Or => Expr::Or(operands),
        Op::Nor => Expr::Nor(operands),
        Op::Xor => {
            let b = operands.pop().expect("binary");
            let a = operands.pop().expect("binary");
            Expr::xor(a, b)
        }
    }
}

/// Parse an expression; errors carry the byte offset of the offending token.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { tokens, at: 0 };
    let e = p.or()?;
    if p.at < p.tokens.len() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}
