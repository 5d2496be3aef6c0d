//! Operator expressions in `z` and `D = ∂_z`.
//!
//! Grammar (whitespace insensitive, `*` optional between factors):
//!
//! ```text
//! expr    := sign? product (('+' | '-') product)*
//! product := power ('*'? power)*
//! power   := primary ('^' int)?
//! primary := number | 'z' | 'i' | 'D' | '(' expr ')'
//! ```
//!
//! Products are evaluated in the Weyl algebra, so `D*z` is `z*D + 1`.

use std::fmt::Write as _;

use gevrey_core::{Complex64, FormalPowerSeries, LinearOperator};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Z,
    I,
    D,
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            'z' => Tok::Z,
            'i' => Tok::I,
            'D' => Tok::D,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::Open,
            ')' => Tok::Close,
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
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
                let literal: String = chars[start..i].iter().collect();
                let value: f64 = literal.parse().map_err(|_| ParseError {
                    position: pos,
                    message: format!("malformed number '{literal}'"),
                })?;
                out.push((Tok::Num(value), pos));
                continue;
            }
            other => return err(pos, format!("unexpected character '{other}'")),
        };
        out.push((tok, pos));
        i += 1;
    }
    Ok(out)
}

/// Element of the Weyl algebra: `terms[j][k]` is the coefficient of `zᵏ Dʲ`.
#[derive(Debug, Clone, PartialEq)]
struct Weyl {
    terms: Vec<Vec<Complex64>>,
}

impl Weyl {
    fn scalar(c: Complex64) -> Self {
        Self {
            terms: vec![vec![c]],
        }
    }

    fn z() -> Self {
        Self {
            terms: vec![vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
        }
    }

    fn d() -> Self {
        Self {
            terms: vec![vec![], vec![Complex64::new(1.0, 0.0)]],
        }
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.terms.len().max(other.terms.len());
        let empty = Vec::new();
        let terms = (0..n)
            .map(|j| {
                let a = self.terms.get(j).unwrap_or(&empty);
                let b = other.terms.get(j).unwrap_or(&empty);
                let zero = Complex64::new(0.0, 0.0);
                (0..a.len().max(b.len()))
                    .map(|k| a.get(k).copied().unwrap_or(zero) + b.get(k).copied().unwrap_or(zero))
                    .collect()
            })
            .collect();
        Self { terms }
    }

    fn neg(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|p| p.iter().map(|c| -c).collect())
                .collect(),
        }
    }

    /// `(a Dʲ)(b Dᵏ) = a Σₗ C(j,l) b⁽ˡ⁾ D^{j−l+k}`.
    fn mul(&self, other: &Self) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = Weyl { terms: Vec::new() };
        for (j, a) in self.terms.iter().enumerate() {
            if a.iter().all(|c| *c == zero) {
                continue;
            }
            for (k, b) in other.terms.iter().enumerate() {
                let mut deriv = b.clone();
                let mut binom = 1.0;
                for l in 0..=j {
                    if l > 0 {
                        binom = binom * (j + 1 - l) as f64 / l as f64;
                        deriv = derivative(&deriv);
                    }
                    if deriv.is_empty() {
                        break;
                    }
                    let prod = poly_mul(a, &deriv);
                    let mut term = vec![Vec::new(); j - l + k + 1];
                    term[j - l + k] = prod.iter().map(|c| c * binom).collect();
                    out = out.add(&Weyl { terms: term });
                }
            }
        }
        out
    }

    fn pow(&self, e: u32) -> Self {
        let mut out = Weyl::scalar(Complex64::new(1.0, 0.0));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }
}

fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn expr(&mut self) -> Result<Weyl, ParseError> {
        let negate = match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                true
            }
            Some(Tok::Plus) => {
                self.at += 1;
                false
            }
            _ => false,
        };
        let first = self.product()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = acc.add(&self.product()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Weyl, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(Tok::Num(_) | Tok::Z | Tok::I | Tok::D | Tok::Open) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Weyl, ParseError> {
        let is_d = matches!(self.peek(), Some(Tok::D));
        let base = self.primary()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.at += 1;
        let pos = self.pos();
        let negative = matches!(self.peek(), Some(Tok::Minus));
        if negative {
            self.at += 1;
        }
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v <= 64.0 => {
                self.at += 1;
                if negative && v != 0.0 {
                    let what = if is_d { "D" } else { "a factor" };
                    return err(pos, format!("negative power of {what} is not allowed"));
                }
                Ok(base.pow(v as u32))
            }
            Some(Tok::Num(_)) => err(pos, "exponent must be an integer between 0 and 64"),
            _ => err(pos, "expected an integer exponent after '^'"),
        }
    }

    fn primary(&mut self) -> Result<Weyl, ParseError> {
        let pos = self.pos();
        let tok = self.peek().cloned();
        self.at += 1;
        match tok {
            Some(Tok::Num(v)) => Ok(Weyl::scalar(Complex64::new(v, 0.0))),
            Some(Tok::I) => Ok(Weyl::scalar(Complex64::new(0.0, 1.0))),
            Some(Tok::Z) => Ok(Weyl::z()),
            Some(Tok::D) => Ok(Weyl::d()),
            Some(Tok::Open) => {
                let inner = self.expr()?;
                if !matches!(self.peek(), Some(Tok::Close)) {
                    return err(self.pos(), "expected ')'");
                }
                self.at += 1;
                Ok(inner)
            }
            Some(Tok::Close) => err(pos, "unexpected ')'"),
            Some(_) => err(pos, "expected a number, 'z', 'i', 'D' or '('"),
            None => err(pos, "unexpected end of input"),
        }
    }
}

/// Parses an operator expression such as `"z^2*D + 1"`.
pub fn parse_operator(text: &str) -> Result<LinearOperator, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return err(1, "empty operator expression");
    }
    let mut parser = Parser {
        toks,
        at: 0,
        end: text.chars().count() + 1,
    };
    let weyl = parser.expr()?;
    if parser.at < parser.toks.len() {
        return err(parser.pos(), "unexpected token");
    }
    let zero = Complex64::new(0.0, 0.0);
    let coeffs: Vec<Option<FormalPowerSeries>> = weyl
        .terms
        .into_iter()
        .map(|mut p| {
            while p.last() == Some(&zero) {
                p.pop();
            }
            if p.is_empty() {
                None
            } else {
                Some(FormalPowerSeries::polynomial(p).expect("nonempty"))
            }
        })
        .collect();
    LinearOperator::new(coeffs).map_err(|e| ParseError {
        position: 1,
        message: e.to_string(),
    })
}

fn write_real(out: &mut String, x: f64) {
    // `{:?}` is the shortest representation that parses back to the same bits
    let _ = write!(out, "{x:?}");
}

fn write_complex(out: &mut String, c: Complex64) {
    match (c.re != 0.0, c.im != 0.0) {
        (_, false) => write_real(out, c.re),
        (false, true) => {
            out.push('(');
            write_real(out, c.im);
            out.push_str("*i)");
        }
        (true, true) => {
            out.push('(');
            write_real(out, c.re);
            out.push_str(if c.im < 0.0 { "-" } else { "+" });
            write_real(out, c.im.abs());
            out.push_str("*i)");
        }
    }
}

/// Canonical text of an operator, highest derivative first. Parsing the
/// output reproduces the operator exactly.
pub fn print_operator(op: &LinearOperator) -> String {
    let mut terms = Vec::new();
    for j in (0..=op.order()).rev() {
        let Some(c) = op.coeff(j) else { continue };
        let mut poly = String::new();
        for (k, a) in c.coeffs().iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !poly.is_empty() {
                poly.push_str(" + ");
            }
            let mut coeff = String::new();
            write_complex(&mut coeff, *a);
            if coeff.starts_with('-') {
                coeff = format!("({coeff})");
            }
            poly.push_str(&coeff);
            match k {
                0 => {}
                1 => poly.push_str("*z"),
                _ => {
                    let _ = write!(poly, "*z^{k}");
                }
            }
        }
        // a lone parenthesized constant needs no second pair
        if !(poly.starts_with('(') && poly.ends_with(')') && !poly.contains(" + ")) {
            poly = format!("({poly})");
        }
        let term = match j {
            0 => poly,
            1 => format!("{poly}*D"),
            _ => format!("{poly}*D^{j}"),
        };
        terms.push(term);
    }
    terms.join(" + ")
}
