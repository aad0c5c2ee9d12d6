//! Exact gcd and resultants of bivariate polynomials over Q(i).

use super::univariate::UPoly;
use super::{Monomial, Polynomial};
use crate::coeff::{Coefficient, GaussRat};
use crate::error::{Error, Result};

type Bi = Vec<UPoly>;

fn to_bi(p: &Polynomial) -> Bi {
    let n = p.degree_in(1) as usize;
    let mut rows: Vec<Vec<Coefficient>> = vec![vec![]; if p.is_zero() { 0 } else { n + 1 }];
    for (m, c) in p.terms() {
        let row = &mut rows[m.0[1] as usize];
        let k = m.0[0] as usize;
        if row.len() <= k {
            row.resize(k + 1, Coefficient::zero());
        }
        row[k] = c.clone();
    }
    rows.into_iter().map(UPoly::new).collect()
}

fn from_bi(b: &[UPoly], vars: &[String]) -> Polynomial {
    let mut p = Polynomial::zero(vars);
    for (j, row) in b.iter().enumerate() {
        for (k, c) in row.0.iter().enumerate() {
            p.add_term(Monomial(vec![k as u32, j as u32]), c.clone());
        }
    }
    p
}

fn trim(mut b: Bi) -> Bi {
    while b.last().is_some_and(|r| r.is_zero()) {
        b.pop();
    }
    b
}

fn content(b: &Bi) -> UPoly {
    let mut g = UPoly::zero();
    for r in b {
        g = g.gcd(r);
        if g.degree() == Some(0) {
            break;
        }
    }
    g
}

fn primitive(b: &Bi) -> Bi {
    let c = content(b);
    if c.is_zero() {
        return b.clone();
    }
    b.iter().map(|r| r.div_rem(&c).0).collect()
}

fn prem(a: &Bi, b: &Bi) -> Bi {
    let n = b.len() - 1;
    let lb = b[n].clone();
    let mut r = a.clone();
    while r.len() > n {
        let m = r.len() - 1;
        let lr = r[m].clone();
        let mut next: Bi = r.iter().map(|x| x.mul(&lb)).collect();
        for (j, bj) in b.iter().enumerate() {
            next[m - n + j] = next[m - n + j].sub(&bj.mul(&lr));
        }
        next.pop();
        r = trim(next);
    }
    r
}

/// Greatest common divisor of two polynomials in `(z1, z2)`, normalised to a monic
/// leading term. Both inputs must have exact coefficients.
pub fn gcd2(p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
    if p.nvars() != 2 || q.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: p.nvars().max(q.nvars()) });
    }
    p.require_exact("gcd needs exact coefficients")?;
    q.require_exact("gcd needs exact coefficients")?;
    if p.is_zero() {
        return Ok(q.monic());
    }
    if q.is_zero() {
        return Ok(p.monic());
    }
    let (a, b) = (to_bi(p), to_bi(q));
    let (ca, cb) = (content(&a), content(&b));
    let mut a = primitive(&a);
    let mut b = primitive(&b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        if b.len() == 1 {
            a = vec![UPoly::new(vec![Coefficient::one()])];
            break;
        }
        let r = prem(&a, &b);
        a = b;
        b = if r.is_empty() { r } else { primitive(&r) };
    }
    let c = ca.gcd(&cb);
    let g: Bi = a.iter().map(|r| r.mul(&c)).collect();
    Ok(from_bi(&g, p.vars()).monic())
}

/// Split `p = content(z1) * primitive` with respect to `z2`.
pub fn primitive_z2(p: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    p.require_exact("content needs exact coefficients")?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let b = to_bi(p);
    let c = content(&b).monic();
    let prim: Bi = b.iter().map(|r| r.div_rem(&c).0).collect();
    Ok((c.to_poly(p.vars(), 0), from_bi(&prim, p.vars())))
}

fn det(mut m: Vec<Vec<GaussRat>>) -> GaussRat {
    let n = m.len();
    let mut d = GaussRat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return GaussRat::zero();
        };
        if piv != col {
            m.swap(piv, col);
            d = -&d;
        }
        let inv = m[col][col].inv().unwrap();
        d = &d * &m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    d
}

fn sylvester_det(a: &[GaussRat], b: &[GaussRat]) -> GaussRat {
    let na = a.len() - 1;
    let nb = b.len() - 1;
    let n = na + nb;
    if n == 0 {
        return GaussRat::one();
    }
    let mut m = vec![vec![GaussRat::zero(); n]; n];
    for r in 0..nb {
        for (k, c) in a.iter().rev().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..na {
        for (k, c) in b.iter().rev().enumerate() {
            m[nb + r][r + k] = c.clone();
        }
    }
    det(m)
}

/// Resultant with respect to `z2`, as a univariate polynomial in `z1`.
pub fn resultant_z2(p: &Polynomial, q: &Polynomial) -> Result<UPoly> {
    p.require_exact("resultant needs exact coefficients")?;
    q.require_exact("resultant needs exact coefficients")?;
    if p.is_zero() || q.is_zero() {
        return Ok(UPoly::zero());
    }
    let (np, nq) = (p.degree_in(1) as usize, q.degree_in(1) as usize);
    let bound = np * q.degree_in(0) as usize + nq * p.degree_in(0) as usize;
    let (pb, qb) = (to_bi(p), to_bi(q));
    let eval_rows = |b: &Bi, n: usize, x: &Coefficient| -> Vec<GaussRat> {
        (0..=n)
            .map(|j| match b.get(j).map(|r| r.eval(x)) {
                Some(Coefficient::Exact(g)) => g,
                _ => GaussRat::zero(),
            })
            .collect()
    };
    let nodes: Vec<GaussRat> = (0..=bound as i64).map(|k| GaussRat::from_i64(k, 0)).collect();
    let values: Vec<GaussRat> = nodes
        .iter()
        .map(|x| {
            let xc = Coefficient::Exact(x.clone());
            sylvester_det(&eval_rows(&pb, np, &xc), &eval_rows(&qb, nq, &xc))
        })
        .collect();
    Ok(interpolate(&nodes, &values))
}

/// Newton interpolation through `(x_k, y_k)`.
pub fn interpolate(xs: &[GaussRat], ys: &[GaussRat]) -> UPoly {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            let num = &dd[k] - &dd[k - 1];
            let den = &xs[k] - &xs[k - level];
            dd[k] = &num / &den;
        }
    }
    let mut acc = UPoly::zero();
    for k in (0..n).rev() {
        let lin = UPoly::new(vec![Coefficient::Exact(-&xs[k]), Coefficient::one()]);
        acc = acc.mul(&lin).add(&UPoly::new(vec![Coefficient::Exact(dd[k].clone())]));
    }
    acc
}
