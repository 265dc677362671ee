//! A small closed-form expression grammar for drift fields and first-order
//! terms: numeric literals, named variables, `+`, `-`, `*`, unary minus,
//! parentheses, and `sin`/`cos`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
        }
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }
}

/// Parses `src` against the given variable names (e.g. `["x1", "x2"]`).
pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        vars,
        src,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::ExprParse(format!(
            "unexpected trailing input at token {:?} in `{}`",
            p.tokens[p.pos], src
        )));
    }
    Ok(e)
}

/// Parses a comma-separated list of expressions (vector-valued fields).
pub fn parse_components(src: &str, vars: &[&str]) -> Result<Vec<Expr>> {
    src.split(',').map(|part| parse(part, vars)).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::ExprParse(format!("bad number `{text}` in `{src}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(Error::ExprParse(format!(
                    "unexpected character `{other}` in `{src}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            other => Err(Error::ExprParse(format!(
                "expected {t:?}, found {other:?} in `{}`",
                self.src
            ))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "sin" => {
                    self.expect(Token::LParen)?;
                    let e = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Sin(Box::new(e)))
                }
                "cos" => {
                    self.expect(Token::LParen)?;
                    let e = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Cos(Box::new(e)))
                }
                _ => {
                    if let Some(i) = self.vars.iter().position(|v| *v == name) {
                        Ok(Expr::Var(i))
                    } else {
                        Err(Error::ExprParse(format!(
                            "unknown identifier `{name}` in `{}` (variables: {:?})",
                            self.src, self.vars
                        )))
                    }
                }
            },
            other => Err(Error::ExprParse(format!(
                "unexpected token {other:?} in `{}`",
                self.src
            ))),
        }
    }
}
