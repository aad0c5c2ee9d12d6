//! Truncated power series in `t = z^{1/m}` and composition of polynomials with branches.

use serde::Serialize;

use super::Polynomial;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// `sum_k c_k t^k` with `t = z^{1/ramification}`.
///
/// With `trunc = Some(T)` only the coefficients of `t^0 .. t^{T-1}` are known; the
/// remainder is `O(t^T)`. With `trunc = None` the series is a polynomial in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<Coefficient>,
    pub ramification: u32,
    pub trunc: Option<usize>,
}

/// Order of vanishing of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingOrder {
    Exact(usize),
    AtLeast(usize),
    Infinite,
}

impl VanishingOrder {
    pub fn certified(self) -> Result<usize> {
        match self {
            VanishingOrder::Exact(k) => Ok(k),
            VanishingOrder::AtLeast(t) => Err(Error::TruncationTooShort(t)),
            VanishingOrder::Infinite => Err(Error::Precondition("series vanishes identically".into())),
        }
    }
}

impl TruncatedSeries {
    pub fn exact(coeffs: Vec<Coefficient>, ramification: u32) -> Self {
        let mut s = TruncatedSeries { coeffs, ramification, trunc: None };
        s.trim();
        s
    }

    pub fn truncated(mut coeffs: Vec<Coefficient>, ramification: u32, trunc: usize) -> Self {
        coeffs.resize(trunc, Coefficient::zero());
        TruncatedSeries { coeffs, ramification, trunc: Some(trunc) }
    }

    pub fn constant(c: Coefficient, ramification: u32) -> Self {
        TruncatedSeries::exact(vec![c], ramification)
    }

    /// `t^k`.
    pub fn monomial(k: usize, ramification: u32) -> Self {
        let mut c = vec![Coefficient::zero(); k + 1];
        c[k] = Coefficient::one();
        TruncatedSeries::exact(c, ramification)
    }

    fn trim(&mut self) {
        if self.trunc.is_none() {
            while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                self.coeffs.pop();
            }
        }
    }

    pub fn get(&self, k: usize) -> Coefficient {
        self.coeffs.get(k).cloned().unwrap_or_else(Coefficient::zero)
    }

    /// Whether the coefficient of `t^k` is determined.
    pub fn known(&self, k: usize) -> bool {
        self.trunc.is_none_or(|t| k < t)
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    /// First index with a nonzero coefficient among the known ones.
    fn leading_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Order of the known part, counting the truncation as the order of an unknown tail.
    fn order_bound(&self) -> Option<usize> {
        match (self.leading_index(), self.trunc) {
            (Some(k), _) => Some(k),
            (None, Some(t)) => Some(t),
            (None, None) => None,
        }
    }

    pub fn add(&self, o: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.ramification, o.ramification);
        let trunc = match (self.trunc, o.trunc) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let len = match trunc {
            Some(t) => t,
            None => self.coeffs.len().max(o.coeffs.len()),
        };
        let coeffs = (0..len).map(|k| &self.get(k) + &o.get(k)).collect();
        let mut s = TruncatedSeries { coeffs, ramification: self.ramification, trunc };
        s.trim();
        s
    }

    pub fn neg(&self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &TruncatedSeries) -> TruncatedSeries {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Coefficient) -> TruncatedSeries {
        let mut s = TruncatedSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect(), ..self.clone() };
        s.trim();
        s
    }

    pub fn mul(&self, o: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.ramification, o.ramification);
        let trunc = match (self.trunc, o.trunc) {
            (None, None) => None,
            (Some(ta), None) => o.order_bound().map(|ob| ta + ob),
            (None, Some(tb)) => self.order_bound().map(|oa| tb + oa),
            (Some(ta), Some(tb)) => Some((ta + o.order_bound().unwrap()).min(tb + self.order_bound().unwrap())),
        };
        let len = match trunc {
            Some(t) => t,
            None => (self.coeffs.len() + o.coeffs.len()).saturating_sub(1),
        };
        let mut coeffs = vec![Coefficient::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        let mut s = TruncatedSeries { coeffs, ramification: self.ramification, trunc };
        s.trim();
        s
    }

    /// Cut to `O(t^n)`.
    pub fn truncate(&self, n: usize) -> TruncatedSeries {
        let n = self.trunc.map_or(n, |t| t.min(n));
        let mut c = self.coeffs.clone();
        c.resize(n, Coefficient::zero());
        TruncatedSeries { coeffs: c, ramification: self.ramification, trunc: Some(n) }
    }

    /// Order of vanishing; float coefficients below `tol` count as zero.
    pub fn valuation(&self, tol: f64) -> VanishingOrder {
        self.valuation_with(|_, c| c.is_negligible(tol))
    }

    fn valuation_with(&self, negligible: impl Fn(usize, &Coefficient) -> bool) -> VanishingOrder {
        for (k, c) in self.coeffs.iter().enumerate() {
            if !self.known(k) {
                break;
            }
            if !negligible(k, c) {
                return VanishingOrder::Exact(k);
            }
        }
        match self.trunc {
            Some(t) => VanishingOrder::AtLeast(t),
            None => VanishingOrder::Infinite,
        }
    }

    /// `outer(self)`; requires `self` to vanish at `t = 0`.
    pub fn compose_into(&self, outer: &TruncatedSeries) -> TruncatedSeries {
        assert!(self.get(0).is_zero(), "inner series must vanish at the origin");
        let mut acc = TruncatedSeries { coeffs: vec![], ramification: self.ramification, trunc: None };
        let top = outer.coeffs.len();
        for k in (0..top).rev() {
            acc = acc.mul(self);
            acc = acc.add(&TruncatedSeries::constant(outer.get(k), self.ramification));
        }
        if let Some(t) = outer.trunc {
            let ord = self.order_bound().unwrap_or(usize::MAX / 4);
            acc = acc.truncate(t.saturating_mul(ord.max(1)));
        }
        acc
    }

    /// Functional inverse modulo `t^n` of a series `a t + ...` with `a != 0` (ramification 1).
    pub fn functional_inverse(&self, n: usize) -> Result<TruncatedSeries> {
        if !self.get(0).is_zero() {
            return Err(Error::Precondition("series must vanish at the origin".into()));
        }
        let a = self.get(1);
        let a_inv = a.inv().ok_or_else(|| Error::Precondition("series must have a nonzero linear term".into()))?;
        let mut tail = self.truncate(n);
        tail.coeffs[1] = Coefficient::zero();
        let s = TruncatedSeries::monomial(1, 1).truncate(n);
        let mut r = s.scale(&a_inv);
        for _ in 0..n {
            r = s.sub(&r.compose_into(&tail)).scale(&a_inv).truncate(n);
        }
        Ok(r)
    }
}

/// A local branch `t -> (t^m, y(t))` of a plane curve through the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub y: TruncatedSeries,
}

impl Branch {
    pub fn new(y: TruncatedSeries) -> Self {
        Branch { y }
    }

    pub fn ramification(&self) -> u32 {
        self.y.ramification
    }
}

/// Result of substituting a branch into a polynomial.
#[derive(Clone, Debug)]
pub struct Composition {
    pub series: TruncatedSeries,
    pub order: VanishingOrder,
}

/// Compose `p(z1, z2)` with a branch `(t^m, y(t))`, tracking the valid truncation order.
pub fn compose_branch(p: &Polynomial, branch: &Branch) -> Result<Composition> {
    if p.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: p.nvars() });
    }
    let m = branch.ramification() as usize;
    let y = &branch.y;
    let rows = p.coeffs_in(1);
    let as_series = |q: &Polynomial, abs: bool| {
        let mut c = vec![Coefficient::zero(); m * q.degree_in(0) as usize + 1];
        for (mono, v) in q.terms() {
            c[m * mono.0[0] as usize] = if abs { Coefficient::Approx(v.abs().into()) } else { v.clone() };
        }
        TruncatedSeries::exact(c, branch.ramification())
    };
    let horner = |abs: bool, y: &TruncatedSeries| {
        let mut acc = TruncatedSeries::exact(vec![], branch.ramification());
        for r in rows.iter().rev() {
            acc = acc.mul(y).add(&as_series(r, abs));
        }
        acc
    };
    let series = horner(false, y);
    let exact = p.is_exact() && y.is_exact();
    let order = if exact {
        series.valuation(0.0)
    } else {
        let y_abs = TruncatedSeries { coeffs: y.coeffs.iter().map(|c| Coefficient::Approx(c.abs().into())).collect(), ..y.clone() };
        let mag = horner(true, &y_abs);
        series.valuation_with(|k, c| c.abs() <= 1e-9 * mag.get(k).abs().max(f64::MIN_POSITIVE))
    };
    Ok(Composition { series, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRat;
    use num_complex::Complex64;

    fn ints(v: &[i64]) -> Vec<Coefficient> {
        v.iter().map(|&k| Coefficient::int(k)).collect()
    }

    #[test]
    fn product_truncation_is_worst_case_valid() {
        let a = TruncatedSeries::truncated(ints(&[0, 1, 2]), 1, 3);
        let b = TruncatedSeries::truncated(ints(&[0, 0, 1, 5]), 1, 4);
        let c = a.mul(&b);
        assert_eq!(c.trunc, Some(5));
        assert_eq!(c.get(3), Coefficient::int(1));
        assert_eq!(c.get(4), Coefficient::int(7));
    }

    #[test]
    fn reversion_of_odd_segment() {
        let q = TruncatedSeries::exact(ints(&[0, 1, 0, 4, 0, 24]), 1);
        let r = q.functional_inverse(6).unwrap();
        assert_eq!(r.coeffs, ints(&[0, 1, 0, -4, 0, 24]));
    }

    #[test]
    fn reflected_factor_vanishes_to_second_order() {
        // branch of z1 + z2 - 2 i z1 z2 is z2 = -z1/(1 - 2 i z1)
        let mut y = vec![Coefficient::zero()];
        for k in 1..12 {
            let c = -&Coefficient::gauss(0, 2).pow(k - 1);
            y.push(c);
        }
        let br = Branch::new(TruncatedSeries::truncated(y, 1, 12));
        let pbar = Polynomial::parse2("z1 + z2 + 2*i*z1*z2").unwrap();
        let c = compose_branch(&pbar, &br).unwrap();
        assert_eq!(c.order, VanishingOrder::Exact(2));
        assert_eq!(c.series.get(2), Coefficient::gauss(0, -4));
        let p = Polynomial::parse2("z1 + z2 - 2*i*z1*z2").unwrap();
        assert_eq!(compose_branch(&p, &br).unwrap().order, VanishingOrder::AtLeast(12));
    }

    #[test]
    fn ramified_branch_with_float_coefficient() {
        let c = 2f64.sqrt();
        let y = vec![
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::int(-1),
            Coefficient::zero(),
            Coefficient::gauss(0, -1),
            Coefficient::Approx(Complex64::new(-c, 0.0)),
        ];
        let br = Branch::new(TruncatedSeries::truncated(y, 2, 10));
        let p = Polynomial::parse2("(z2 + z1 + i*z1^2)^2 - 2*z1^5").unwrap();
        let out = compose_branch(&p, &br).unwrap();
        assert!(matches!(out.order, VanishingOrder::AtLeast(k) if k >= 10));
        let _ = GaussRat::zero();
    }

    #[test]
    fn exact_line_vanishes_identically() {
        let br = Branch::new(TruncatedSeries::exact(ints(&[0, -1]), 1));
        let p = Polynomial::parse2("z1 + z2").unwrap();
        assert_eq!(compose_branch(&p, &br).unwrap().order, VanishingOrder::Infinite);
    }
}
