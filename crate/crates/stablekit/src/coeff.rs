//! Scalar types: exact Gaussian rationals and the mixed exact/float coefficient.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Convert a big rational to the nearest-ish f64, safe for huge numerators and denominators.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (r.numer().clone(), r.denom().clone() << shift as usize)
    } else {
        (r.numer().clone() << (-shift) as usize, r.denom().clone())
    };
    let q = (n / d).to_f64().unwrap_or(0.0);
    q * 2f64.powi(shift as i32)
}

/// Best rational approximation of `x` with denominator at most `max_den` (continued fractions).
pub fn rationalize(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut v = x.abs();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(sign * h1), BigInt::from(k1)))
}

/// Parse "a", "-a", "a/b" or a plain decimal such as "0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n = BigInt::from_str(a.trim()).ok()?;
        let d = BigInt::from_str(b.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], i64::from_str(&s[k + 1..]).ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if exp.abs() > 4000 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    if neg {
        n = -n;
    }
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact element of Q(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        GaussRat::real(BigRational::new(n.into(), d.into()))
    }

    pub fn i() -> Self {
        GaussRat::from_i64(0, 1)
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        GaussRat::from_i64(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRat::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Try to recognise a float as a Gaussian rational with bounded denominators.
    pub fn recognise(z: Complex64, max_den: i64) -> Option<Self> {
        Some(GaussRat::new(rationalize(z.re, max_den)?, rationalize(z.im, max_den)?))
    }

    /// Exact square root of a non-negative rational if it is a perfect square.
    pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
        if r.is_negative() {
            return None;
        }
        let n = r.numer().sqrt();
        let d = r.denom().sqrt();
        if &n * &n == *r.numer() && &d * &d == *r.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }

    pub fn re_string(&self) -> String {
        fmt_rat(&self.re)
    }

    pub fn im_string(&self) -> String {
        fmt_rat(&self.im)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_rat(&self.im))
                }
            }
            (false, false) => {
                let im = if self.im.is_negative() {
                    format!("- {}", fmt_rat(&-&self.im))
                } else {
                    format!("+ {}", fmt_rat(&self.im))
                };
                write!(f, "({} {}*i)", fmt_rat(&self.re), im)
            }
        }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn div(self, o: &GaussRat) -> GaussRat {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -&self.re, im: -&self.im }
    }
}

/// Working precision attached to a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Exact,
    Double,
}

/// A polynomial or series coefficient: exact when it can be, double precision otherwise.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Exact(GaussRat),
    Approx(Complex64),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Exact(GaussRat::zero())
    }

    pub fn one() -> Self {
        Coefficient::Exact(GaussRat::one())
    }

    pub fn i() -> Self {
        Coefficient::Exact(GaussRat::i())
    }

    pub fn int(n: i64) -> Self {
        Coefficient::Exact(GaussRat::from_i64(n, 0))
    }

    pub fn gauss(re: i64, im: i64) -> Self {
        Coefficient::Exact(GaussRat::from_i64(re, im))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Coefficient::Exact(GaussRat::ratio(n, d))
    }

    pub fn precision(&self) -> Precision {
        match self {
            Coefficient::Exact(_) => Precision::Exact,
            Coefficient::Approx(_) => Precision::Double,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussRat> {
        match self {
            Coefficient::Exact(g) => Some(g),
            Coefficient::Approx(_) => None,
        }
    }

    /// Exact zero test for exact values, bitwise zero for floats.
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(g) => g.is_zero(),
            Coefficient::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Exact(g) => g.is_one(),
            Coefficient::Approx(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Coefficient::Exact(g) => g.to_c64(),
            Coefficient::Approx(z) => *z,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn conj(&self) -> Self {
        match self {
            Coefficient::Exact(g) => Coefficient::Exact(g.conj()),
            Coefficient::Approx(z) => Coefficient::Approx(z.conj()),
        }
    }

    /// Real part, keeping exactness.
    pub fn re(&self) -> Self {
        match self {
            Coefficient::Exact(g) => Coefficient::Exact(GaussRat::real(g.re.clone())),
            Coefficient::Approx(z) => Coefficient::Approx(Complex64::new(z.re, 0.0)),
        }
    }

    /// Exactly real (exact) or with vanishing imaginary part (float).
    pub fn is_real(&self) -> bool {
        match self {
            Coefficient::Exact(g) => g.is_real(),
            Coefficient::Approx(z) => z.im == 0.0,
        }
    }

    pub fn to_approx(&self) -> Self {
        Coefficient::Approx(self.to_c64())
    }

    /// Multiplicative inverse; `None` for an exact zero.
    pub fn inv(&self) -> Option<Self> {
        match self {
            Coefficient::Exact(g) => g.inv().map(Coefficient::Exact),
            Coefficient::Approx(z) => {
                if z.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(Coefficient::Approx(z.inv()))
                }
            }
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        match self {
            Coefficient::Exact(g) => Coefficient::Exact(g.pow(e)),
            Coefficient::Approx(z) => Coefficient::Approx(z.powu(e)),
        }
    }

    /// Replace float entries of size below `tol` by exact zero; round tiny imaginary parts.
    pub fn clean(&self, tol: f64) -> Self {
        match self {
            Coefficient::Exact(_) => self.clone(),
            Coefficient::Approx(z) => {
                if z.norm() <= tol {
                    Coefficient::zero()
                } else {
                    let re = if z.re.abs() <= tol { 0.0 } else { z.re };
                    let im = if z.im.abs() <= tol { 0.0 } else { z.im };
                    Coefficient::Approx(Complex64::new(re, im))
                }
            }
        }
    }

    /// `{"re", "im"}` with exact rational strings, or floats tagged with their precision.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Coefficient::Exact(g) => serde_json::json!({ "re": g.re_string(), "im": g.im_string() }),
            Coefficient::Approx(z) => serde_json::json!({ "re": z.re, "im": z.im, "precision": "double" }),
        }
    }

    /// Whether the value is zero up to `tol` (exact values are compared exactly).
    pub fn is_negligible(&self, tol: f64) -> bool {
        match self {
            Coefficient::Exact(g) => g.is_zero(),
            Coefficient::Approx(z) => z.norm() <= tol,
        }
    }
}

impl From<GaussRat> for Coefficient {
    fn from(g: GaussRat) -> Self {
        Coefficient::Exact(g)
    }
}

impl From<Complex64> for Coefficient {
    fn from(z: Complex64) -> Self {
        Coefficient::Approx(z)
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::int(n)
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => a == b,
            _ => self.to_c64() == other.to_c64(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(g) => write!(f, "{g}"),
            Coefficient::Approx(z) => {
                if z.im == 0.0 {
                    write!(f, "{:e}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{:e}*i", z.im)
                } else {
                    write!(f, "({:e} + {:e}*i)", z.re, z.im)
                }
            }
        }
    }
}

macro_rules! coeff_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Coefficient> for &'a Coefficient {
            type Output = Coefficient;
            fn $m(self, o: &Coefficient) -> Coefficient {
                match (self, o) {
                    (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(a.$m(b)),
                    _ => Coefficient::Approx(self.to_c64().$m(o.to_c64())),
                }
            }
        }
        impl $tr for Coefficient {
            type Output = Coefficient;
            fn $m(self, o: Coefficient) -> Coefficient {
                (&self).$m(&o)
            }
        }
    };
}

coeff_binop!(Add, add);
coeff_binop!(Sub, sub);
coeff_binop!(Mul, mul);
coeff_binop!(Div, div);

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        match self {
            Coefficient::Exact(g) => Coefficient::Exact(-g),
            Coefficient::Approx(z) => Coefficient::Approx(-z),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_arith() {
        let a = GaussRat::from_i64(1, 2);
        let b = GaussRat::from_i64(3, -1);
        assert_eq!(&a * &b, GaussRat::from_i64(5, 5));
        assert_eq!(&(&a / &b) * &b, a);
        assert_eq!(GaussRat::i().pow(2), GaussRat::from_i64(-1, 0));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("1.5e2").unwrap(), BigRational::from_integer(150.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn recognise_simple_fraction() {
        let g = GaussRat::recognise(Complex64::new(0.75, -1.0 / 3.0), 1000).unwrap();
        assert_eq!(g, GaussRat::new(BigRational::new(3.into(), 4.into()), BigRational::new((-1).into(), 3.into())));
    }

    #[test]
    fn mixed_promotes_to_float() {
        let a = Coefficient::int(2);
        let b = Coefficient::Approx(Complex64::new(0.5, 0.0));
        let c = &a * &b;
        assert!(!c.is_exact());
        assert_eq!(c.to_c64(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn huge_rational_to_float() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399));
        assert!((rat_to_f64(&big) - 10.0).abs() < 1e-12);
    }
}
