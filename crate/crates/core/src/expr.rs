//! Single-variable expression functions: the integrands.
//!
//! Expressions are trees over the variable `t` with real constants, the four
//! arithmetic operators, integer powers, and the unary functions `sin`,
//! `cos`, `exp`, `log`, `sqrt`. The closed-form language keeps classical
//! derivatives exact (symbolic) at dense points instead of
//! finite-difference approximations.
//!
//! Grammar (standard infix, left-associative, `^` > unary `-` > `*`,`/` >
//! `+`,`-`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] integer)*
//! atom   := number | 't' | name '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Unary primitives. All of them are differentiable on their real domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// An expression tree in the variable `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parse an expression from its textual form.
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            (Token::End, _) => Ok(e),
            (tok, at) => Err(Error::Syntax {
                pos: at,
                msg: format!("unexpected {tok}"),
            }),
        }
    }

    /// Evaluate at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var => t,
            Expr::Neg(x) => -x.eval(t)?,
            Expr::Add(l, r) => l.eval(t)? + r.eval(t)?,
            Expr::Sub(l, r) => l.eval(t)? - r.eval(t)?,
            Expr::Mul(l, r) => l.eval(t)? * r.eval(t)?,
            Expr::Div(l, r) => {
                let d = r.eval(t)?;
                if d == 0.0 {
                    return Err(Error::Domain(format!("division by zero at t = {t}")));
                }
                l.eval(t)? / d
            }
            Expr::Pow(b, n) => {
                let v = b.eval(t)?;
                if *n < 0 && v == 0.0 {
                    return Err(Error::Domain(format!(
                        "zero base with negative exponent at t = {t}"
                    )));
                }
                v.powi(*n)
            }
            Expr::Call(func, x) => {
                let v = x.eval(t)?;
                match func {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::Domain(format!("log of {v} at t = {t}")));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(Error::Domain(format!("sqrt of {v} at t = {t}")));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Classical derivative as a new expression tree, constant-folded.
    /// Every primitive in the language is differentiable on its domain, so
    /// this cannot fail.
    pub fn diff(&self) -> Expr {
        self.diff_raw().simplified()
    }

    fn diff_raw(&self) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var => Num(1.0),
            Neg(x) => Neg(Box::new(x.diff_raw())),
            Add(l, r) => Add(Box::new(l.diff_raw()), Box::new(r.diff_raw())),
            Sub(l, r) => Sub(Box::new(l.diff_raw()), Box::new(r.diff_raw())),
            Mul(l, r) => Add(
                Box::new(Mul(Box::new(l.diff_raw()), r.clone())),
                Box::new(Mul(l.clone(), Box::new(r.diff_raw()))),
            ),
            Div(l, r) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(l.diff_raw()), r.clone())),
                    Box::new(Mul(l.clone(), Box::new(r.diff_raw()))),
                )),
                Box::new(Pow(r.clone(), 2)),
            ),
            Pow(b, n) => Mul(
                Box::new(Mul(Box::new(Num(f64::from(*n))), Box::new(Pow(b.clone(), n - 1)))),
                Box::new(b.diff_raw()),
            ),
            Call(Func::Sin, x) => Mul(
                Box::new(Call(Func::Cos, x.clone())),
                Box::new(x.diff_raw()),
            ),
            Call(Func::Cos, x) => Neg(Box::new(Mul(
                Box::new(Call(Func::Sin, x.clone())),
                Box::new(x.diff_raw()),
            ))),
            Call(Func::Exp, x) => Mul(
                Box::new(Call(Func::Exp, x.clone())),
                Box::new(x.diff_raw()),
            ),
            Call(Func::Log, x) => Div(Box::new(x.diff_raw()), x.clone()),
            Call(Func::Sqrt, x) => Div(
                Box::new(x.diff_raw()),
                Box::new(Mul(
                    Box::new(Num(2.0)),
                    Box::new(Call(Func::Sqrt, x.clone())),
                )),
            ),
        }
    }

    /// Bottom-up constant folding and identity pruning. Folds only when the
    /// result stays finite.
    pub fn simplified(&self) -> Expr {
        use Expr::*;
        let num = |v: f64| -> Option<Expr> { v.is_finite().then_some(Num(v)) };
        match self {
            Num(_) | Var => self.clone(),
            Neg(x) => match x.simplified() {
                Num(v) => num(-v).unwrap_or_else(|| Neg(Box::new(Num(v)))),
                Neg(inner) => *inner,
                s => Neg(Box::new(s)),
            },
            Add(l, r) => match (l.simplified(), r.simplified()) {
                (Num(a), Num(b)) if (a + b).is_finite() => Num(a + b),
                (Num(0.0), s) | (s, Num(0.0)) => s,
                (a, b) => Add(Box::new(a), Box::new(b)),
            },
            Sub(l, r) => match (l.simplified(), r.simplified()) {
                (Num(a), Num(b)) if (a - b).is_finite() => Num(a - b),
                (s, Num(0.0)) => s,
                (Num(0.0), s) => Neg(Box::new(s)).simplified(),
                (a, b) => Sub(Box::new(a), Box::new(b)),
            },
            Mul(l, r) => match (l.simplified(), r.simplified()) {
                (Num(a), Num(b)) if (a * b).is_finite() => Num(a * b),
                (Num(0.0), _) | (_, Num(0.0)) => Num(0.0),
                (Num(1.0), s) | (s, Num(1.0)) => s,
                (Num(-1.0), s) | (s, Num(-1.0)) => Neg(Box::new(s)),
                (a, b) => Mul(Box::new(a), Box::new(b)),
            },
            Div(l, r) => match (l.simplified(), r.simplified()) {
                (Num(a), Num(b)) if b != 0.0 && (a / b).is_finite() => Num(a / b),
                (Num(0.0), _) => Num(0.0),
                (s, Num(1.0)) => s,
                (a, b) => Div(Box::new(a), Box::new(b)),
            },
            Pow(b, n) => match (b.simplified(), *n) {
                (_, 0) => Num(1.0),
                (s, 1) => s,
                (Num(v), n) if (n >= 0 || v != 0.0) && v.powi(n).is_finite() => Num(v.powi(n)),
                (s, n) => Pow(Box::new(s), n),
            },
            Call(func, x) => match x.simplified() {
                Num(v) => match self.clone() {
                    Call(f, _) => {
                        let folded = Call(f, Box::new(Num(v)));
                        match folded.eval(0.0) {
                            Ok(w) if w.is_finite() => Num(w),
                            _ => folded,
                        }
                    }
                    _ => unreachable!(),
                },
                s => Call(*func, Box::new(s)),
            },
        }
    }

    /// True when the expression stays within the operator subset that is
    /// smooth on any real interval: no division, `log`, `sqrt`, or negative
    /// powers.
    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var => true,
            Expr::Neg(x) => x.is_smooth(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => l.is_smooth() && r.is_smooth(),
            Expr::Div(..) => false,
            Expr::Pow(b, n) => *n >= 0 && b.is_smooth(),
            Expr::Call(Func::Log | Func::Sqrt, _) => false,
            Expr::Call(_, x) => x.is_smooth(),
        }
    }

    /// The polynomial `c[0] + c[1] t + c[2] t^2 + ...`.
    pub fn polynomial(coeffs: &[f64]) -> Expr {
        let mut acc: Option<Expr> = None;
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = match j {
                0 => Expr::Num(c),
                1 => Expr::Mul(Box::new(Expr::Num(c)), Box::new(Expr::Var)),
                _ => Expr::Mul(
                    Box::new(Expr::Num(c)),
                    Box::new(Expr::Pow(Box::new(Expr::Var), j as i32)),
                ),
            };
            acc = Some(match acc {
                None => term,
                Some(sum) => Expr::Add(Box::new(sum), Box::new(term)),
            });
        }
        acc.unwrap_or(Expr::Num(0.0))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(x) => {
                write!(f, "-")?;
                child(f, x, x.precedence() < prec)
            }
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                child(f, l, l.precedence() < prec)?;
                write!(f, " {op} ")?;
                // same-precedence right children keep their parentheses so
                // the left-associative parser rebuilds the same tree
                child(f, r, r.precedence() <= prec)
            }
            Expr::Pow(b, n) => {
                child(f, b, b.precedence() < prec)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, x) => write!(f, "{}({x})", func.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "identifier '{s}'"),
            Token::Plus => write!(f, "'+'"),
            Token::Minus => write!(f, "'-'"),
            Token::Star => write!(f, "'*'"),
            Token::Slash => write!(f, "'/'"),
            Token::Caret => write!(f, "'^'"),
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Token::Plus, start));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, start));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, start));
                i += 1;
            }
            '/' => {
                out.push((Token::Slash, start));
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, start));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, start));
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                // optional exponent
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        j = k;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let s = &text[i..j];
                let v: f64 = s.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("bad number literal '{s}'"),
                })?;
                out.push((Token::Num(v), start));
                i = j;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                out.push((Token::Ident(text[i..j].to_string()), start));
                i = j;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (&Token, usize) {
        let (t, p) = &self.tokens[self.pos];
        (t, *p)
    }

    fn bump(&mut self) -> (Token, usize) {
        let item = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        item
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().0 {
                Token::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek().0, Token::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while matches!(self.peek().0, Token::Caret) {
            self.bump();
            let negative = if matches!(self.peek().0, Token::Minus) {
                self.bump();
                true
            } else {
                false
            };
            let (tok, at) = self.bump();
            let n = match tok {
                Token::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
                Token::Num(v) => {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("exponent must be an integer, got {v}"),
                    })
                }
                other => {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("expected integer exponent, got {other}"),
                    })
                }
            };
            base = Expr::Pow(Box::new(base), if negative { -n } else { n });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, at) = self.bump();
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Ident(name) if name == "t" => Ok(Expr::Var),
            Token::Ident(name) => {
                let is_call = matches!(self.peek().0, Token::LParen);
                let Some(func) = Func::from_name(&name) else {
                    return if is_call {
                        Err(Error::UnknownFunction(name))
                    } else {
                        Err(Error::Syntax {
                            pos: at,
                            msg: format!("unknown identifier '{name}' (the variable is 't')"),
                        })
                    };
                };
                if !is_call {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("expected '(' after '{name}'"),
                    });
                }
                self.bump(); // '('
                let arg = self.expr()?;
                let (tok, at) = self.bump();
                if tok != Token::RParen {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("expected ')', got {tok}"),
                    });
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Token::LParen => {
                let inner = self.expr()?;
                let (tok, at) = self.bump();
                if tok != Token::RParen {
                    return Err(Error::Syntax {
                        pos: at,
                        msg: format!("expected ')', got {tok}"),
                    });
                }
                Ok(inner)
            }
            other => Err(Error::Syntax {
                pos: at,
                msg: format!("expected a value, got {other}"),
            }),
        }
    }
}
