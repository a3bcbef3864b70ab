// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form integrands in `x` and `y`.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := ("-" | "+") unary | power
//! power := atom ("^" unary)?
//! atom  := number | "x" | "y" | "pi" | func "(" expr ")" | "(" expr ")"
//! func  := "sin" | "cos" | "exp" | "sqrt"
//! ```
//!
//! `−`, `×`, `÷` and `π` are accepted as aliases. Powers associate to the
//! right and bind tighter than unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::Point2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn apply(self, a: f64) -> f64 {
        match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Sqrt => a.sqrt(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::X => p.x,
            Expr::Y => p.y,
            Expr::Neg(a) => -a.eval(p),
            Expr::Call(f, a) => f.apply(a.eval(p)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(p), b.eval(p));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        let tokens = lex(s)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(Error::Expression(format!("unexpected {t} at token {}", p.pos + 1))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(c) => write!(f, "number {c}"),
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Op(c) => write!(f, "`{c}`"),
            Token::Open => f.write_str("`(`"),
            Token::Close => f.write_str("`)`"),
        }
    }
}

fn lex(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' | '.' => {
                let mut end = i;
                let mut prev = ' ';
                while let Some(&(j, d)) = chars.peek() {
                    let exp_sign = (d == '+' || d == '-') && (prev == 'e' || prev == 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        end = j + d.len_utf8();
                        prev = d;
                        chars.next();
                    } else {
                        break;
                    }
                }
                let text = &s[i..end];
                let v = text.parse::<f64>().map_err(|_| Error::Expression(format!("bad number `{text}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_alphabetic() => {
                let mut name = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_alphanumeric() {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(if name == "π" { Token::Ident("pi".into()) } else { Token::Ident(name) });
            }
            '+' | '-' | '*' | '/' | '^' | '−' | '×' | '÷' => {
                let op = match c {
                    '−' => '-',
                    '×' => '*',
                    '÷' => '/',
                    c => c,
                };
                out.push(Token::Op(op));
                chars.next();
            }
            '(' => {
                out.push(Token::Open);
                chars.next();
            }
            ')' => {
                out.push(Token::Close);
                chars.next();
            }
            c => return Err(Error::Expression(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(c)) => Ok(Expr::Num(c)),
            Some(Token::Open) => {
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                let func = match name.as_str() {
                    "x" => return Ok(Expr::X),
                    "y" => return Ok(Expr::Y),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "sqrt" => Func::Sqrt,
                    _ => return Err(Error::Expression(format!("unknown name `{name}`"))),
                };
                if self.next() != Some(Token::Open) {
                    return Err(Error::Expression(format!("`{name}` must be followed by `(`")));
                }
                let arg = self.expr()?;
                self.close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(t) => Err(Error::Expression(format!("unexpected {t}"))),
            None => Err(Error::Expression("unexpected end of input".into())),
        }
    }

    fn close(&mut self) -> Result<()> {
        match self.next() {
            Some(Token::Close) => Ok(()),
            _ => Err(Error::Expression("missing `)`".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn at(s: &str, x: f64, y: f64) -> f64 {
        s.parse::<Expr>().unwrap().eval(Point2::new(x, y))
    }

    #[test]
    fn precedence() {
        assert_eq!(at("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(at("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(at("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(at("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(at("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(at("(1 - y) * x", 2.0, 3.0), -4.0);
        assert_eq!(at("1.5e-1 + 2E1", 0.0, 0.0), 20.15);
    }

    #[test]
    fn test_integrand() {
        let (x, y) = (0.3, 0.7);
        let want = (PI / 2.0 * x).sin() * (PI * y).cos() * x.exp();
        assert_eq!(at("sin(pi/2*x)*cos(pi*y)*exp(x)", x, y), want);
        assert_eq!(at("sin(π/2 × x) × cos(π × y) × exp(x)", x, y), want);
        assert_eq!(at("sqrt(x*x + y*y)", 3.0, 4.0), 5.0);
        assert_eq!(at("x − y ÷ 2", 1.0, 1.0), 0.5);
    }

    #[test]
    fn errors() {
        for bad in ["", "x +", "sin x", "foo(x)", "(x", "x)", "1..2", "x $ y", "2 3"] {
            let e = bad.parse::<Expr>().unwrap_err();
            assert!(matches!(e, Error::Expression(_)), "{bad}");
        }
    }

    #[test]
    fn display_reparses() {
        let e: Expr = "-sin(x)^2 + 3/(y - 1)".parse().unwrap();
        let again: Expr = e.to_string().parse().unwrap();
        for p in [Point2::new(0.2, 0.3), Point2::new(-1.0, 4.0)] {
            assert_eq!(e.eval(p), again.eval(p));
        }
    }
}
