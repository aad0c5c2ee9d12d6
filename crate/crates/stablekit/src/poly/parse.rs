use num_rational::BigRational;

use super::{default_vars, Polynomial};
use crate::coeff::{parse_rational, Coefficient, GaussRat};
use crate::error::{Error, Result};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 1000;
const MAX_DEGREE: u32 = 4096;
const MAX_DEPTH: usize = 128;
const MAX_TERMS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k];
        let start = k;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                k += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, k)),
            b'-' => out.push((Tok::Minus, k)),
            b'*' => out.push((Tok::Star, k)),
            b'/' => out.push((Tok::Slash, k)),
            b'^' => out.push((Tok::Caret, k)),
            b'(' => out.push((Tok::LParen, k)),
            b')' => out.push((Tok::RParen, k)),
            b'0'..=b'9' | b'.' => {
                while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                    k += 1;
                }
                let s = &text[start..k];
                let r = parse_rational(s).ok_or_else(|| Error::Parse { pos: start, msg: format!("bad number `{s}`") })?;
                out.push((Tok::Num(r), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                    k += 1;
                }
                out.push((Tok::Ident(text[start..k].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[k..].chars().next().unwrap();
                return Err(Error::Parse { pos: k, msg: format!("unexpected character `{ch}`") });
            }
        }
        k += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    vars: &'a [String],
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.at += 1;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.at += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    let rhs = self.unary()?;
                    acc = self.checked_mul(&acc, &rhs)?;
                }
                Some(Tok::Slash) => {
                    self.at += 1;
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    let c = match (rhs.degree(), rhs.terms().next()) {
                        (Some(0), Some((_, c))) => c.clone(),
                        (None, _) => return Err(Error::Parse { pos, msg: "division by zero".into() }),
                        _ => return Err(Error::Parse { pos, msg: "division by a non-constant".into() }),
                    };
                    acc = acc.scale(&c.inv().unwrap());
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let rhs = self.unary()?;
                    acc = self.checked_mul(&acc, &rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn checked_mul(&self, a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
        if a.num_terms().saturating_mul(b.num_terms()) > MAX_TERMS * 8 {
            return self.err("expression too large");
        }
        if a.degree().unwrap_or(0) + b.degree().unwrap_or(0) > MAX_DEGREE {
            return self.err("degree too large");
        }
        let p = a * b;
        if p.num_terms() > MAX_TERMS {
            return self.err("expression too large");
        }
        Ok(p)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                self.nest(|p| Ok(-&p.unary()?))
            }
            Some(Tok::Plus) => {
                self.at += 1;
                self.nest(|p| p.unary())
            }
            _ => self.power(),
        }
    }

    fn nest(&mut self, f: impl FnOnce(&mut Self) -> Result<Polynomial>) -> Result<Polynomial> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        let r = f(self);
        self.depth -= 1;
        r
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.at += 1;
        let pos = self.pos();
        let e = match self.peek() {
            Some(Tok::Num(r)) if r.is_integer() => r.to_integer(),
            _ => return self.err("exponent must be a nonnegative integer"),
        };
        self.at += 1;
        let e: u32 = match u32::try_from(&e) {
            Ok(v) if v <= MAX_EXPONENT => v,
            _ => return Err(Error::Parse { pos, msg: format!("exponent larger than {MAX_EXPONENT}") }),
        };
        if self.peek() == Some(&Tok::Caret) {
            return self.err("chained exponents need parentheses");
        }
        if base.degree().unwrap_or(0).saturating_mul(e) > MAX_DEGREE {
            return Err(Error::Parse { pos, msg: "degree too large".into() });
        }
        if base.num_terms() > 1 && e > 1 {
            let est = (base.num_terms() as f64).powf(e.min(64) as f64);
            let bound = ((base.degree().unwrap_or(0) * e + 1) as f64).powi(base.nvars() as i32);
            if est.min(bound) > MAX_TERMS as f64 {
                return Err(Error::Parse { pos, msg: "expression too large".into() });
            }
        }
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.at += 1;
                Ok(Polynomial::constant(self.vars, Coefficient::Exact(GaussRat::real(r))))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if name == "i" {
                    return Ok(Polynomial::constant(self.vars, Coefficient::i()));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(k) => Ok(Polynomial::var(self.vars, k)),
                    None => Err(Error::UnknownVariable { name, pos }),
                }
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.nest(|p| p.expr())?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(inner)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse polynomial text over the given variable names.
///
/// Accepts integers, decimals, `a/b`, the unit `i`, `+ - * / ^` (nonnegative integer
/// exponents, division by constants only), parentheses and implicit multiplication.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<Polynomial> {
    if vars.iter().any(|v| v == "i") {
        return Err(Error::Invalid("`i` is reserved for the imaginary unit".into()));
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), vars, depth: 0 };
    if p.toks.is_empty() {
        return p.err("empty input");
    }
    let out = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

/// Parse with variables `z1..zd`, where `d` is the largest index used (at least `min_vars`).
pub fn parse_poly_auto(text: &str, min_vars: usize) -> Result<Polynomial> {
    let toks = lex(text)?;
    let mut d = min_vars;
    for (t, pos) in &toks {
        if let Tok::Ident(name) = t {
            if name == "i" {
                continue;
            }
            let idx = name.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()).filter(|&k| (1..=4).contains(&k));
            match idx {
                Some(k) => d = d.max(k),
                None => return Err(Error::UnknownVariable { name: name.clone(), pos: *pos }),
            }
        }
    }
    parse_poly(text, &default_vars(d))
}
