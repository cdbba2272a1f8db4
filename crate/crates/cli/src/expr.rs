//! Arithmetic expressions for numeric config values such as `0.3*omega0`
//! or `2*pi/10`.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, decimal literals,
//! named constants and the functions `sqrt exp ln sin cos`. `^` binds
//! tighter than unary minus and is right associative.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("unexpected {found} at offset {offset}")]
    Unexpected { offset: usize, found: String },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("expression nests deeper than {MAX_DEPTH} levels")]
    TooDeep,
    #[error("expression evaluates to a non-finite value")]
    NonFinite,
}

/// Nesting bound; keeps recursion finite on adversarial input.
pub const MAX_DEPTH: usize = 64;

/// Named constants visible to expressions. `pi` is always defined.
#[derive(Debug, Clone)]
pub struct Scope {
    names: BTreeMap<String, f64>,
}

impl Default for Scope {
    fn default() -> Self {
        let mut names = BTreeMap::new();
        names.insert("pi".to_string(), std::f64::consts::PI);
        Self { names }
    }
}

impl Scope {
    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.names.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.get(name).copied()
    }
}

/// Evaluates `src` in `scope`; the result is finite.
pub fn evaluate(src: &str, scope: &Scope) -> Result<f64, ExprError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, scope, depth: 0 };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected());
    }
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::NonFinite)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    scope: &'a Scope,
    depth: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> ExprError {
        let found = match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = String::from_utf8_lossy(&self.src[self.pos..]);
                format!("{:?}", rest.chars().next().unwrap_or('?'))
            }
        };
        ExprError::Unexpected { offset: self.pos, found }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ExprError::TooDeep)
        } else {
            Ok(())
        }
    }

    fn sum(&mut self) -> Result<f64, ExprError> {
        let mut acc = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64, ExprError> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            self.enter()?;
            let v = -self.unary()?;
            self.depth -= 1;
            return Ok(v);
        }
        self.power()
    }

    fn power(&mut self) -> Result<f64, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.enter()?;
            let exp = self.unary()?;
            self.depth -= 1;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.enter()?;
                let v = self.sum()?;
                self.depth -= 1;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            _ => Err(self.unexpected()),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.src.get(p.pos).is_some_and(u8::is_ascii_digit) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        // the slice is ASCII by construction
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| {
            self.pos = start;
            self.unexpected()
        })
    }

    fn name(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let func: Option<fn(f64) -> f64> = match name {
            "sqrt" => Some(f64::sqrt),
            "exp" => Some(f64::exp),
            "ln" => Some(f64::ln),
            "sin" => Some(f64::sin),
            "cos" => Some(f64::cos),
            _ => None,
        };
        match func {
            Some(f) => {
                self.expect(b'(')?;
                self.enter()?;
                let v = self.sum()?;
                self.depth -= 1;
                self.expect(b')')?;
                Ok(f(v))
            }
            None => self.scope.get(name).ok_or_else(|| ExprError::UnknownName(name.to_string())),
        }
    }
}
