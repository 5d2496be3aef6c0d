//! Complex function expressions in one variable, used for closed-form
//! continuations (`log(1+u)`) and oracle functions (`exp(-1/z)`).
//!
//! Supports `+ - * / ^`, unary minus, parentheses, the constants `i`, `pi`,
//! `e`, and the functions `log exp sqrt sin cos`.

use std::sync::Arc;

use gevrey_core::Complex64;

use crate::parse::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    Var,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Log,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

/// A parsed expression; cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Arc<Node>,
    source: String,
}

impl Expr {
    pub fn parse(text: &str, var: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        if toks.is_empty() {
            return Err(ParseError {
                position: 1,
                message: "empty expression".into(),
            });
        }
        let mut p = P {
            toks,
            at: 0,
            var,
            end: text.chars().count() + 1,
        };
        let root = p.sum()?;
        if p.at < p.toks.len() {
            return Err(p.error("unexpected token"));
        }
        Ok(Self {
            root: Arc::new(root),
            source: text.to_string(),
        })
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        eval(&self.root, x)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn eval(n: &Node, x: Complex64) -> Complex64 {
    match n {
        Node::Const(c) => *c,
        Node::Var => x,
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => {
                    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= i32::MAX as f64 {
                        a.powi(b.re as i32)
                    } else {
                        a.powc(b)
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, x);
            match f {
                Func::Log => a.ln(),
                Func::Exp => a.exp(),
                Func::Sqrt => a.sqrt(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum T {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(T, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when digits follow, so `2e` stays `2 * e`
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let v = lit.parse().map_err(|_| ParseError {
                position: pos,
                message: format!("malformed number '{lit}'"),
            })?;
            out.push((T::Num(v), pos));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((T::Ident(chars[start..i].iter().collect()), pos));
        } else if "+-*/^()".contains(c) {
            out.push((T::Op(c), pos));
            i += 1;
        } else {
            return Err(ParseError {
                position: pos,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct P<'a> {
    toks: Vec<(T, usize)>,
    at: usize,
    var: &'a str,
    end: usize,
}

impl P<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            position: self.toks.get(self.at).map_or(self.end, |t| t.1),
            message: message.into(),
        }
    }

    fn op(&self) -> Option<char> {
        match self.toks.get(self.at) {
            Some((T::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.op() {
            self.at += 1;
            acc = Node::Bin(c, Box::new(acc), Box::new(self.term()?));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.op() {
                Some(c @ ('*' | '/')) => {
                    self.at += 1;
                    acc = Node::Bin(c, Box::new(acc), Box::new(self.unary()?));
                }
                // implicit product: `2 u`, `2(1+u)`, `2 pi`
                None if matches!(self.toks.get(self.at), Some((T::Num(_) | T::Ident(_), _))) => {
                    acc = Node::Bin('*', Box::new(acc), Box::new(self.unary()?));
                }
                Some('(') => {
                    acc = Node::Bin('*', Box::new(acc), Box::new(self.unary()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.op() {
            Some('-') => {
                self.at += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.at += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.op() == Some('^') {
            self.at += 1;
            // right associative; binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some((tok, _)) = self.toks.get(self.at).cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        match tok {
            T::Num(v) => {
                self.at += 1;
                Ok(Node::Const(Complex64::new(v, 0.0)))
            }
            T::Op('(') => {
                self.at += 1;
                let inner = self.sum()?;
                if self.op() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.at += 1;
                Ok(inner)
            }
            T::Ident(name) => {
                let func = match name.as_str() {
                    "log" | "ln" => Some(Func::Log),
                    "exp" => Some(Func::Exp),
                    "sqrt" => Some(Func::Sqrt),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    self.at += 1;
                    if self.op() != Some('(') {
                        return Err(self.error("expected '(' after function name"));
                    }
                    let arg = self.atom()?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                let node = match name.as_str() {
                    n if n == self.var => Node::Var,
                    "i" => Node::Const(Complex64::new(0.0, 1.0)),
                    "pi" => Node::Const(Complex64::new(std::f64::consts::PI, 0.0)),
                    "e" => Node::Const(Complex64::new(std::f64::consts::E, 0.0)),
                    _ => return Err(self.error(&format!("unknown identifier '{name}'"))),
                };
                self.at += 1;
                Ok(node)
            }
            T::Op(_) => Err(self.error("expected a number, identifier or '('")),
        }
    }
}
