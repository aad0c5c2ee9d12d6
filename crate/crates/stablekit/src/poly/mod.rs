//! Sparse multivariate polynomials over Q(i) (with float fallback).
//!
//! Terms are kept in graded order: total degree ascending, and inside one degree
//! the monomial with the larger exponent of the first variable comes first.

mod json;
mod parse;
mod transform;

pub mod gcd;
pub mod local;
pub mod series;
pub mod univariate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::coeff::{Coefficient, GaussRat};
use crate::error::{Error, Result};

pub use json::{PolyJson, TermJson};
pub use parse::{parse_poly, parse_poly_auto, MAX_EXPONENT};
pub use series::{compose_branch, Branch, Composition, TruncatedSeries, VanishingOrder};
pub use transform::{cayley_transfer, inverse_cayley, reflect, split_real_imag, Domain, Reflection};

/// Exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Graded lexicographic comparison (the usual leading-term order).
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Standard variable names `z1, ..., zd`.
pub fn default_vars(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("z{k}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Coefficient>,
}

impl Polynomial {
    pub fn zero(vars: &[String]) -> Self {
        Polynomial { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[String], c: Coefficient) -> Self {
        let mut p = Polynomial::zero(vars);
        p.add_term(Monomial::one(vars.len()), c);
        p
    }

    pub fn one(vars: &[String]) -> Self {
        Polynomial::constant(vars, Coefficient::one())
    }

    /// The coordinate function `z_k` (0-based index).
    pub fn var(vars: &[String], k: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[k] = 1;
        Polynomial::monomial(vars, e, Coefficient::one())
    }

    pub fn monomial(vars: &[String], exps: Vec<u32>, c: Coefficient) -> Self {
        let mut p = Polynomial::zero(vars);
        p.add_term(Monomial(exps), c);
        p
    }

    /// Build from `(exponents, coefficient)` pairs; repeated monomials are summed.
    pub fn from_terms(vars: &[String], terms: impl IntoIterator<Item = (Vec<u32>, Coefficient)>) -> Self {
        let mut p = Polynomial::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length must match variable count");
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Parse with the default variables `z1, z2`.
    pub fn parse2(text: &str) -> Result<Self> {
        parse_poly(text, &default_vars(2))
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Coefficient {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(|c| c.is_exact())
    }

    /// Whether every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    pub fn require_exact(&self, what: &str) -> Result<()> {
        if self.is_exact() {
            Ok(())
        } else {
            Err(Error::NonExact(what.to_string()))
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Lowest total degree of a term (order of vanishing at the origin).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|m| m.0[k]).max().unwrap_or(0)
    }

    pub fn multidegree(&self) -> Vec<u32> {
        (0..self.nvars()).map(|k| self.degree_in(k)).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Coefficient)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coefficient) -> Coefficient) -> Self {
        let mut p = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), f(c));
        }
        p
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        self.map_coeffs(|x| x * c)
    }

    /// Coefficient-wise conjugate, i.e. `conj(p(conj z))`.
    pub fn conj_coeffs(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }

    pub fn to_approx(&self) -> Self {
        self.map_coeffs(|c| c.to_approx())
    }

    /// Drop float coefficients of modulus at most `tol` times the largest one.
    pub fn clean(&self, rel_tol: f64) -> Self {
        let tol = rel_tol * self.max_abs_coeff();
        self.map_coeffs(|c| c.clean(tol))
    }

    pub fn with_vars(&self, vars: &[String]) -> Result<Self> {
        if vars.len() != self.nvars() {
            return Err(Error::VariableMismatch { expected: self.nvars(), found: vars.len() });
        }
        Ok(Polynomial { vars: vars.to_vec(), terms: self.terms.clone() })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Polynomial::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, point: &[Coefficient]) -> Coefficient {
        let mut acc = Coefficient::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = &t * &x.pow(e);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn eval_exact(&self, point: &[GaussRat]) -> Option<GaussRat> {
        let pt: Vec<Coefficient> = point.iter().cloned().map(Coefficient::Exact).collect();
        match self.eval(&pt) {
            Coefficient::Exact(g) => Some(g),
            Coefficient::Approx(_) => None,
        }
    }

    pub fn eval_c64(&self, point: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= x.powu(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Partial derivative in variable `k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut p = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[k] > 0 {
                let mut e = m.0.clone();
                let f = Coefficient::int(e[k] as i64);
                e[k] -= 1;
                p.add_term(Monomial(e), c * &f);
            }
        }
        p
    }

    /// Homogeneous component of total degree `j`.
    pub fn homogeneous_part(&self, j: u32) -> Self {
        let mut p = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.degree() == j {
                p.terms.insert(m.clone(), c.clone());
            }
        }
        p
    }

    /// Terms of total degree below `n`.
    pub fn truncate_degree(&self, n: u32) -> Self {
        let mut p = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.degree() < n {
                p.terms.insert(m.clone(), c.clone());
            }
        }
        p
    }

    /// Substitute polynomial images for every variable (all images share one variable set).
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars());
        let out_vars = images[0].vars.clone();
        let mut caches: Vec<Vec<Polynomial>> = images.iter().map(|im| vec![Polynomial::one(&im.vars)]).collect();
        let mut acc = Polynomial::zero(&out_vars);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(&out_vars, c.clone());
            for (k, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while caches[k].len() <= e as usize {
                    let next = caches[k].last().unwrap() * &images[k];
                    caches[k].push(next);
                }
                t = &t * &caches[k][e as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// `p(center + z)`.
    pub fn shift(&self, center: &[Coefficient]) -> Polynomial {
        let images: Vec<Polynomial> = (0..self.nvars())
            .map(|k| &Polynomial::var(&self.vars, k) + &Polynomial::constant(&self.vars, center[k].clone()))
            .collect();
        self.substitute(&images)
    }

    /// `p(c_1 z_1, ..., c_d z_d)`.
    pub fn scale_vars(&self, c: &[Coefficient]) -> Polynomial {
        let mut p = Polynomial::zero(&self.vars);
        for (m, v) in &self.terms {
            let mut t = v.clone();
            for (k, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &c[k].pow(e);
                }
            }
            p.add_term(m.clone(), t);
        }
        p
    }

    /// Coefficients of `p` as a polynomial in `z_k`: `p = sum_j c_j z_k^j`.
    pub fn coeffs_in(&self, k: usize) -> Vec<Polynomial> {
        let n = self.degree_in(k) as usize;
        let mut out = vec![Polynomial::zero(&self.vars); if self.is_zero() { 0 } else { n + 1 }];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let j = e[k] as usize;
            e[k] = 0;
            out[j].terms.insert(Monomial(e), c.clone());
        }
        out
    }

    /// Multivariate division by a single divisor (grlex leading terms).
    /// Returns `(quotient, remainder)`; the remainder is zero iff `d` divides `self`.
    pub fn div_rem(&self, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let (lm, lc) = d.leading_term().ok_or(Error::ZeroPolynomial)?;
        let lm = lm.clone();
        let lc_inv = lc.inv().ok_or(Error::ZeroPolynomial)?;
        let mut p = self.clone();
        let mut q = Polynomial::zero(&self.vars);
        let mut r = Polynomial::zero(&self.vars);
        while let Some((m, c)) = p.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            if lm.divides(&m) {
                let e: Vec<u32> = m.0.iter().zip(&lm.0).map(|(a, b)| a - b).collect();
                let t = Polynomial::monomial(&self.vars, e, &c * &lc_inv);
                q = &q + &t;
                p = &p - &(&t * d);
            } else {
                r.add_term(m.clone(), c);
            }
            p.terms.remove(&m);
        }
        Ok((q, r))
    }

    /// Exact quotient when `d` divides `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        let (q, r) = self.div_rem(d).ok()?;
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Remove the largest monomial factor; returns the cofactor and the exponents removed.
    pub fn strip_monomial_factor(&self) -> (Polynomial, Vec<u32>) {
        if self.is_zero() {
            return (self.clone(), vec![0; self.nvars()]);
        }
        let mins: Vec<u32> = (0..self.nvars()).map(|k| self.terms.keys().map(|m| m.0[k]).min().unwrap()).collect();
        let mut p = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let e: Vec<u32> = m.0.iter().zip(&mins).map(|(a, b)| a - b).collect();
            p.terms.insert(Monomial(e), c.clone());
        }
        (p, mins)
    }

    /// Divide every coefficient by the one of the leading term.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            Some((_, c)) => {
                let inv = c.inv().unwrap();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), -c);
        }
        p
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let e: Vec<u32> = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                p.add_term(Monomial(e), c1 * c2);
            }
        }
        p
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.map_coeffs(|c| -c)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, o: Polynomial) -> Polynomial {
        &self + &o
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, o: Polynomial) -> Polynomial {
        &self - &o
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn monomial_string(vars: &[String], m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (v, &e) in vars.iter().zip(&m.0) {
        match e {
            0 => {}
            1 => parts.push(v.clone()),
            _ => parts.push(format!("{v}^{e}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mono = monomial_string(&self.vars, m);
            let (neg, mag) = match c {
                // negative real or negative imaginary: print the sign as the operator
                Coefficient::Exact(g)
                    if (num_traits::Zero::is_zero(&g.im) && num_traits::Signed::is_negative(&g.re))
                        || (num_traits::Zero::is_zero(&g.re) && num_traits::Signed::is_negative(&g.im)) =>
                {
                    (true, Coefficient::Exact(-g))
                }
                Coefficient::Approx(z) if (z.im == 0.0 && z.re < 0.0) || (z.re == 0.0 && z.im < 0.0) => {
                    (true, Coefficient::Approx(-z))
                }
                _ => (false, c.clone()),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let cs = mag.to_string();
            if mono.is_empty() {
                write!(f, "{cs}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{cs}*{mono}")?;
            }
        }
        Ok(())
    }
}
