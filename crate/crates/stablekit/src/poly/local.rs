//! Linear algebra in the local ring at the origin, truncated modulo powers of the
//! maximal ideal. Used to decide membership in m-primary ideals and to measure
//! colengths such as local intersection multiplicities.

use std::collections::BTreeMap;

use super::{Monomial, Polynomial};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

type Vector = BTreeMap<Monomial, Coefficient>;

/// Row-reduced spanning set of a subspace of `C[z] / m^n`.
struct Reduced {
    rows: Vec<(Monomial, Vector)>,
    tol: f64,
}

impl Reduced {
    fn new(tol: f64) -> Self {
        Reduced { rows: Vec::new(), tol }
    }

    fn reduce(&self, mut v: Vector) -> Vector {
        for (piv, row) in &self.rows {
            if let Some(c) = v.get(piv).cloned() {
                for (m, x) in row {
                    let nv = &v.get(m).cloned().unwrap_or_else(Coefficient::zero) - &(&c * x);
                    if nv.is_negligible(self.tol) {
                        v.remove(m);
                    } else {
                        v.insert(m.clone(), nv);
                    }
                }
                v.remove(piv);
            }
        }
        v
    }

    fn insert(&mut self, v: Vector) -> bool {
        let v = self.reduce(v);
        let Some((piv, c)) = v.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(m, c)| (m.clone(), c.clone()))
        else {
            return false;
        };
        let inv = c.inv().unwrap();
        let row: Vector = v.into_iter().map(|(m, x)| (m, &x * &inv)).collect();
        for (_, other) in self.rows.iter_mut() {
            if let Some(f) = other.get(&piv).cloned() {
                for (m, x) in &row {
                    let nv = &other.get(m).cloned().unwrap_or_else(Coefficient::zero) - &(&f * x);
                    if nv.is_negligible(self.tol) {
                        other.remove(m);
                    } else {
                        other.insert(m.clone(), nv);
                    }
                }
                other.remove(&piv);
            }
        }
        self.rows.push((piv, row));
        true
    }
}

fn monomials_below(nvars: usize, n: u32) -> Vec<Vec<u32>> {
    let mut out = vec![];
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(prefix, left - 1, budget - e, out);
            prefix.pop();
        }
    }
    if n > 0 {
        rec(&mut vec![], nvars, n - 1, &mut out);
    }
    out
}

fn truncated_vector(p: &Polynomial, n: u32) -> Vector {
    p.terms().filter(|(m, _)| m.degree() < n).map(|(m, c)| (m.clone(), c.clone())).collect()
}

fn span_mod(gens: &[Polynomial], n: u32, tol: f64) -> Reduced {
    let mut red = Reduced::new(tol);
    let nv = gens[0].nvars();
    for g in gens {
        let Some(ord) = g.order() else { continue };
        if ord >= n {
            continue;
        }
        for e in monomials_below(nv, n - ord) {
            let shifted = &Polynomial::monomial(g.vars(), e, Coefficient::one()) * g;
            red.insert(truncated_vector(&shifted, n));
        }
    }
    red
}

fn tol_for(gens: &[Polynomial]) -> f64 {
    if gens.iter().all(|g| g.is_exact()) {
        0.0
    } else {
        1e-9 * gens.iter().map(|g| g.max_abs_coeff()).fold(1.0, f64::max)
    }
}

/// `dim C[z] / (I + m^n)` for the ideal generated by `gens` (polynomials centred at the origin).
pub fn quotient_dimension_mod(gens: &[Polynomial], n: u32) -> usize {
    if gens.is_empty() {
        return monomials_below(1, n).len();
    }
    let total = monomials_below(gens[0].nvars(), n).len();
    total - span_mod(gens, n, tol_for(gens)).rows.len()
}

/// Colength `dim R_0 / I` of an m-primary ideal, together with an `n` with `m^n ⊆ I`.
/// Errors if the dimension has not stabilised by `max_n` (ideal not m-primary).
pub fn local_colength(gens: &[Polynomial], max_n: u32) -> Result<(usize, u32)> {
    if gens.is_empty() {
        return Err(Error::Precondition("no generators".into()));
    }
    if gens.iter().any(|g| g.order() == Some(0)) {
        return Ok((0, 0));
    }
    let mut prev = quotient_dimension_mod(gens, 1);
    for n in 1..max_n {
        let next = quotient_dimension_mod(gens, n + 1);
        if next == prev {
            return Ok((prev, n));
        }
        prev = next;
    }
    Err(Error::Precondition(format!("ideal is not primary to the maximal ideal within order {max_n}")))
}

/// Whether `f` lies in the ideal generated by `gens` in the local ring at the origin.
/// The ideal must be m-primary; `max_n` bounds the search for its stabilisation order.
pub fn local_membership(f: &Polynomial, gens: &[Polynomial], max_n: u32) -> Result<bool> {
    let (_, n) = local_colength(gens, max_n)?;
    if n == 0 {
        return Ok(true);
    }
    let red = span_mod(gens, n, tol_for(gens));
    let mut red_tol = red;
    if !f.is_exact() {
        red_tol.tol = red_tol.tol.max(1e-9 * f.max_abs_coeff());
    }
    Ok(red_tol.reduce(truncated_vector(f, n)).is_empty())
}

/// Remainder of `f` modulo the ideal in the local ring, as a polynomial in the
/// monomials that are not pivots of the reduced span.
pub fn local_normal_form(f: &Polynomial, gens: &[Polynomial], max_n: u32) -> Result<Polynomial> {
    let (_, n) = local_colength(gens, max_n)?;
    if n == 0 {
        return Ok(Polynomial::zero(f.vars()));
    }
    let mut red = span_mod(gens, n, tol_for(gens));
    if !f.is_exact() {
        red.tol = red.tol.max(1e-9 * f.max_abs_coeff());
    }
    let v = red.reduce(truncated_vector(f, n));
    Ok(Polynomial::from_terms(f.vars(), v.into_iter().map(|(m, c)| (m.0, c))))
}

/// Smallest `k` with `z_var^k` in the ideal (local ring at the origin).
pub fn minimal_power_in_ideal(gens: &[Polynomial], var: usize, max_n: u32) -> Result<u32> {
    let (_, n) = local_colength(gens, max_n)?;
    let red = span_mod(gens, n.max(1), tol_for(gens));
    for k in 0..=n {
        let mut e = vec![0; gens[0].nvars()];
        e[var] = k;
        let v = truncated_vector(&Polynomial::monomial(gens[0].vars(), e, Coefficient::one()), n);
        if red.reduce(v).is_empty() {
            return Ok(k);
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse2(s).unwrap()
    }

    #[test]
    fn colength_of_monomial_ideal() {
        let (d, _) = local_colength(&[p("z1^3"), p("z2^2")], 20).unwrap();
        assert_eq!(d, 6);
    }

    #[test]
    fn intersection_of_line_with_its_reflection() {
        // local intersection multiplicity of the half-plane line and its conjugate
        let (d, _) = local_colength(&[p("z1 + z2 - 2*i*z1*z2"), p("z1 + z2 + 2*i*z1*z2")], 20).unwrap();
        assert_eq!(d, 2);
    }

    #[test]
    fn membership_and_power() {
        let g = [p("z2 + z1"), p("z1^2")];
        assert!(local_membership(&p("z1*z2"), &g, 20).unwrap());
        assert!(!local_membership(&p("z1"), &g, 20).unwrap());
        assert_eq!(minimal_power_in_ideal(&g, 0, 20).unwrap(), 2);
    }

    #[test]
    fn non_primary_ideal_is_reported() {
        assert!(local_colength(&[p("z1*z2")], 8).is_err());
    }
}
