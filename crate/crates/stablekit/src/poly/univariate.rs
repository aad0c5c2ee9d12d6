//! Dense univariate polynomials and their roots.

use num_complex::Complex64;

use super::{Monomial, Polynomial};
use crate::coeff::{Coefficient, GaussRat};
use crate::error::{Error, Result};

/// Coefficients from the constant term upwards.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly(pub Vec<Coefficient>);

impl UPoly {
    pub fn new(mut c: Vec<Coefficient>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn zero() -> Self {
        UPoly(vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn lead(&self) -> Coefficient {
        self.0.last().cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(|c| c.is_exact())
    }

    /// View a polynomial that only involves variable `k` as univariate.
    pub fn from_poly(p: &Polynomial, k: usize) -> Result<Self> {
        let mut c = vec![Coefficient::zero(); p.degree_in(k) as usize + 1];
        for (m, v) in p.terms() {
            if m.0.iter().enumerate().any(|(j, &e)| j != k && e > 0) {
                return Err(Error::Precondition("polynomial is not univariate".into()));
            }
            c[m.0[k] as usize] = v.clone();
        }
        Ok(UPoly::new(c))
    }

    /// Embed as a polynomial in variable `k` of `vars`.
    pub fn to_poly(&self, vars: &[String], k: usize) -> Polynomial {
        let mut p = Polynomial::zero(vars);
        for (j, c) in self.0.iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[k] = j as u32;
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    pub fn eval(&self, x: &Coefficient) -> Coefficient {
        let mut acc = Coefficient::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * x + c.to_c64();
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(j, c)| c * &Coefficient::int(j as i64)).collect())
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        let get = |p: &UPoly, k: usize| p.0.get(k).cloned().unwrap_or_else(Coefficient::zero);
        UPoly::new((0..n).map(|k| &get(self, k) + &get(o, k)).collect())
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.scale(&Coefficient::int(-1)))
    }

    pub fn scale(&self, c: &Coefficient) -> UPoly {
        UPoly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Coefficient::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        UPoly::new(c)
    }

    /// Euclidean division by a nonzero divisor.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = d.lead().inv().unwrap();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Coefficient::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&c * dc);
                }
            }
            r[k + dd] = Coefficient::zero();
            q[k] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().inv().unwrap())
    }

    /// Monic gcd by the Euclidean algorithm (exact coefficients).
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun square-free decomposition: `(factor, multiplicity)` with monic factors.
    pub fn squarefree(&self) -> Vec<(UPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        let a0 = self.gcd(&d);
        let mut b = self.div_rem(&a0).0;
        let mut c = d.div_rem(&a0).0;
        let mut dd = c.sub(&b.derivative());
        let mut k = 1;
        loop {
            let a = b.gcd(&dd);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = dd.div_rem(&a).0;
            dd = c.sub(&b.derivative());
            k += 1;
        }
        out
    }

    /// Roots with multiplicities; exact roots are recognised when they lie in Q(i).
    pub fn roots(&self) -> Vec<(Coefficient, usize)> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        if self.is_exact() {
            let mut out = Vec::new();
            for (f, mult) in self.squarefree() {
                let fc: Vec<Complex64> = f.0.iter().map(|c| c.to_c64()).collect();
                for z in aberth(&fc) {
                    out.push((recognise_root(&f, z), mult));
                }
            }
            sort_roots(&mut out);
            out
        } else {
            let fc: Vec<Complex64> = self.0.iter().map(|c| c.to_c64()).collect();
            let mut out: Vec<(Coefficient, usize)> =
                cluster(&aberth(&fc), 1e-6).into_iter().map(|(z, m)| (Coefficient::Approx(z), m)).collect();
            sort_roots(&mut out);
            out
        }
    }
}

fn sort_roots(r: &mut [(Coefficient, usize)]) {
    r.sort_by(|a, b| {
        let (x, y) = (a.0.to_c64(), b.0.to_c64());
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
}

/// Replace a float root by an exact Gaussian rational when one checks out exactly.
pub fn recognise_root(f: &UPoly, z: Complex64) -> Coefficient {
    for den in [1i64, 12, 360, 5040, 1_000_000] {
        if let Some(g) = GaussRat::recognise(z, den) {
            if (g.to_c64() - z).norm() <= 1e-7 * (1.0 + z.norm()) && f.eval(&Coefficient::Exact(g.clone())).is_zero() {
                return Coefficient::Exact(g);
            }
        }
    }
    Coefficient::Approx(z)
}

/// Group numerically coincident roots; the cluster mean is returned with the cluster size.
pub fn cluster(roots: &[Complex64], rel_tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                if members.iter().any(|&k| (roots[k] - roots[j]).norm() <= rel_tol * (1.0 + roots[k].norm())) {
                    members.push(j);
                    used[j] = true;
                    grew = true;
                }
            }
        }
        let mean = members.iter().map(|&k| roots[k]).sum::<Complex64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    out
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All complex roots (with repetition) by the Aberth-Ehrlich iteration.
pub fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let mut zeros = 0;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zeros += 1;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return out;
    }
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    if n == 1 {
        out.push(-c[0]);
        return out;
    }
    let radius = c[..n].iter().enumerate().map(|(k, a)| a.norm().powf(1.0 / (n - k) as f64)).fold(0.0f64, f64::max).max(1e-12);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4)).collect();
    for _ in 0..800 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner_with_derivative(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(&c, *zi);
            let step = p / dp;
            if step.is_finite() && step.norm() < 1e-6 * (1.0 + zi.norm()) {
                let cand = *zi - step;
                if horner_with_derivative(&c, cand).0.norm() <= p.norm() {
                    *zi = cand;
                }
            }
        }
    }
    out.extend(z);
    out
}

/// Real roots in `(lo, hi)`: nearly-real complex roots, polished by Newton's method.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let scale = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = Vec::new();
    for z in aberth(&c) {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..4 {
            let (p, dp) = horner_with_derivative(&c, Complex64::new(x, 0.0));
            if dp.re != 0.0 {
                let nx = x - p.re / dp.re;
                if nx.is_finite() && (nx - x).abs() < 1e-3 * (1.0 + x.abs()) {
                    x = nx;
                }
            }
        }
        if x > lo && x < hi && scale > 0.0 {
            out.push(x);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: &[i64]) -> UPoly {
        UPoly::new(v.iter().map(|&k| Coefficient::int(k)).collect())
    }

    #[test]
    fn aberth_finds_quadratic_roots() {
        let r = aberth(&[Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0), Complex64::new(1.0, 0.0)]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2.0 + 3f64.sqrt()).abs() < 1e-14);
        assert!((re[1] + 2.0 - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exact_roots_with_multiplicity() {
        // (x - 1)^2 (x + 1/2) (x^2 + 1)
        let p = u(&[-1, 1]).mul(&u(&[-1, 1])).mul(&UPoly::new(vec![Coefficient::ratio(1, 2), Coefficient::one()])).mul(&u(&[1, 0, 1]));
        let r = p.roots();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|(c, _)| c.is_exact()));
        assert!(r.contains(&(Coefficient::int(1), 2)));
        assert!(r.contains(&(Coefficient::ratio(-1, 2), 1)));
        assert!(r.contains(&(Coefficient::gauss(0, 1), 1)));
    }

    #[test]
    fn gcd_and_division() {
        let a = u(&[-1, 0, 1]);
        let b = u(&[1, 2, 1]);
        assert_eq!(a.gcd(&b), u(&[1, 1]));
        let (q, r) = a.div_rem(&u(&[1, 1]));
        assert_eq!(q, u(&[-1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn real_roots_window() {
        let r = real_roots_in(&[-6.0, 11.0, -6.0, 1.0], 0.0, 2.5);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }
}
