use serde::{Deserialize, Serialize};

use super::{Monomial, Polynomial};
use crate::coeff::{Coefficient, GaussRat};
use crate::error::{Error, Result};

/// Where stability is measured: the polydisk or the product of upper half-planes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Disk,
    #[serde(alias = "uhp")]
    UpperHalfPlane,
}

/// Which reflection an operation used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    /// `conj(p(conj z))`
    Bar,
    /// `z^n conj(p(1/conj z))`
    Tilde,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Disk => "disk",
            Domain::UpperHalfPlane => "uhp",
        }
    }

    pub fn reflection(self) -> Reflection {
        match self {
            Domain::Disk => Reflection::Tilde,
            Domain::UpperHalfPlane => Reflection::Bar,
        }
    }
}

fn check_multidegree(p: &Polynomial, n: &[u32]) -> Result<()> {
    if n.len() != p.nvars() {
        return Err(Error::VariableMismatch { expected: p.nvars(), found: n.len() });
    }
    for (k, (&d, &nk)) in p.multidegree().iter().zip(n).enumerate() {
        if d > nk {
            return Err(Error::DegreeExceedsMultidegree { var: k });
        }
    }
    Ok(())
}

/// Reflection of `p` adapted to the domain. For the disk, `n` defaults to the multidegree.
pub fn reflect(p: &Polynomial, domain: Domain, n: Option<&[u32]>) -> Result<Polynomial> {
    match domain {
        Domain::UpperHalfPlane => Ok(p.conj_coeffs()),
        Domain::Disk => {
            let md = p.multidegree();
            let n = n.unwrap_or(&md);
            check_multidegree(p, n)?;
            let mut out = Polynomial::zero(p.vars());
            for (m, c) in p.terms() {
                let e: Vec<u32> = n.iter().zip(&m.0).map(|(a, b)| a - b).collect();
                out.add_term(Monomial(e), c.conj());
            }
            Ok(out)
        }
    }
}

fn linear(vars: &[String], k: usize, c0: Coefficient, c1: Coefficient) -> Polynomial {
    &Polynomial::constant(vars, c0) + &Polynomial::var(vars, k).scale(&c1)
}

fn powers(base: &Polynomial, n: u32) -> Vec<Polynomial> {
    let mut out = vec![Polynomial::one(base.vars())];
    for _ in 0..n {
        let next = out.last().unwrap() * base;
        out.push(next);
    }
    out
}

/// Move a polydisk polynomial to the upper half-plane:
/// `P(z) = prod_j (1 - i z_j)^{n_j} p((1 + i z)/(1 - i z))`.
pub fn cayley_transfer(p: &Polynomial, n: &[u32]) -> Result<Polynomial> {
    check_multidegree(p, n)?;
    let vars = p.vars();
    let i = Coefficient::i();
    let plus: Vec<Vec<Polynomial>> =
        (0..vars.len()).map(|k| powers(&linear(vars, k, Coefficient::one(), i.clone()), n[k])).collect();
    let minus: Vec<Vec<Polynomial>> =
        (0..vars.len()).map(|k| powers(&linear(vars, k, Coefficient::one(), -&i), n[k])).collect();
    let mut out = Polynomial::zero(vars);
    for (m, c) in p.terms() {
        let mut t = Polynomial::constant(vars, c.clone());
        for k in 0..vars.len() {
            let a = m.0[k] as usize;
            t = &t * &plus[k][a];
            t = &t * &minus[k][n[k] as usize - a];
        }
        out = &out + &t;
    }
    Ok(out)
}

/// Inverse of [`cayley_transfer`]: `p(w) = prod_j ((1 + w_j)/2)^{n_j} P(i (1 - w)/(1 + w))`.
pub fn inverse_cayley(big_p: &Polynomial, n: &[u32]) -> Result<Polynomial> {
    check_multidegree(big_p, n)?;
    let vars = big_p.vars();
    let plus: Vec<Vec<Polynomial>> =
        (0..vars.len()).map(|k| powers(&linear(vars, k, Coefficient::one(), Coefficient::one()), n[k])).collect();
    let minus: Vec<Vec<Polynomial>> =
        (0..vars.len()).map(|k| powers(&linear(vars, k, Coefficient::one(), Coefficient::int(-1)), n[k])).collect();
    let total: u32 = n.iter().sum();
    let half_pow = Coefficient::Exact(GaussRat::ratio(1, 2).pow(total));
    let mut out = Polynomial::zero(vars);
    for (m, c) in big_p.terms() {
        let deg = m.degree();
        let mut t = Polynomial::constant(vars, c * &Coefficient::i().pow(deg));
        for k in 0..vars.len() {
            let a = m.0[k] as usize;
            t = &t * &minus[k][a];
            t = &t * &plus[k][n[k] as usize - a];
        }
        out = &out + &t;
    }
    Ok(out.scale(&half_pow))
}

/// Split `P = A + i B` with `A = (P + conj P)/2`, `B = (P - conj P)/(2i)` real polynomials.
pub fn split_real_imag(p: &Polynomial) -> (Polynomial, Polynomial) {
    let mut a = Polynomial::zero(p.vars());
    let mut b = Polynomial::zero(p.vars());
    for (m, c) in p.terms() {
        match c {
            Coefficient::Exact(g) => {
                a.add_term(m.clone(), Coefficient::Exact(GaussRat::real(g.re.clone())));
                b.add_term(m.clone(), Coefficient::Exact(GaussRat::real(g.im.clone())));
            }
            Coefficient::Approx(z) => {
                a.add_term(m.clone(), Coefficient::Approx(num_complex::Complex64::new(z.re, 0.0)));
                b.add_term(m.clone(), Coefficient::Approx(num_complex::Complex64::new(z.im, 0.0)));
            }
        }
    }
    (a, b)
}
