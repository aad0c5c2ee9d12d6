//! Numerical stability certificates on the polydisk and poly upper half-plane, and the
//! exact split of a stable polynomial into its pure and symmetric factors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::poly::gcd::gcd2;
use crate::poly::univariate::aberth;
use crate::poly::{inverse_cayley, reflect, Domain, Polynomial};

/// Outcome of a stability scan.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    NoZerosFound,
    /// A point strictly inside the domain where `p` is numerically zero.
    ZeroFound(Vec<Complex64>),
    Inconclusive(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::NoZerosFound => "no_zeros_found",
            Verdict::ZeroFound(_) => "zero_found",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    /// Radial steps per free variable.
    pub radial: usize,
    /// Angular steps per free variable.
    pub angular: usize,
    /// Distance from the unit circle below which a root counts as a contact.
    pub tol: f64,
}

impl Resolution {
    pub fn from_grid(n: usize) -> Self {
        let n = n.max(2);
        Resolution { radial: n, angular: 4 * n, tol: 1e-7 }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution::from_grid(16)
    }
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub domain: Domain,
    pub verdict: Verdict,
    pub resolution: Resolution,
    /// Roots of the solved variable strictly inside the disk, per slice: one block of
    /// grid slices for each variable in turn.
    pub slice_counts: Vec<usize>,
    /// Boundary slices with a root on the unit circle (largest over the solved variables).
    pub boundary_contacts: usize,
}

impl StabilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        let nonzero: Vec<serde_json::Value> = self
            .slice_counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(k, c)| json!([k, c]))
            .collect();
        let mut v = json!({
            "domain": self.domain.name(),
            "verdict": self.verdict.label(),
            "grid": { "radial": self.resolution.radial, "angular": self.resolution.angular, "tol": self.resolution.tol },
            "slices": self.slice_counts.len(),
            "nonzero_slice_counts": nonzero,
            "boundary_contacts": self.boundary_contacts,
        });
        match &self.verdict {
            Verdict::ZeroFound(w) => {
                v["witness"] = json!(w.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>());
            }
            Verdict::Inconclusive(r) => v["reason"] = json!(r),
            Verdict::NoZerosFound => {}
        }
        v
    }
}

/// Coefficients of `p` as a polynomial in variable `solved`, the others fixed to `head`.
struct SliceEval {
    terms: Vec<(Vec<u32>, Complex64)>,
    solved: usize,
    deg: usize,
}

impl SliceEval {
    fn new(p: &Polynomial, solved: usize) -> Self {
        let terms = p.terms().map(|(m, c)| (m.0.clone(), c.to_c64())).collect();
        SliceEval { terms, solved, deg: p.degree_in(solved) as usize }
    }

    fn coeffs(&self, head: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.deg + 1];
        for (e, c) in &self.terms {
            let mut t = *c;
            let others = e.iter().enumerate().filter(|(i, _)| *i != self.solved).map(|(_, k)| k);
            for (z, k) in head.iter().zip(others) {
                t *= z.powu(*k);
            }
            out[e[self.solved] as usize] += t;
        }
        out
    }
}

fn disk_grid(free: usize, res: &Resolution) -> Vec<(Vec<Complex64>, bool)> {
    let mut one = vec![(Complex64::new(0.0, 0.0), false)];
    for r in 1..=res.radial {
        let rad = r as f64 / res.radial as f64;
        for a in 0..res.angular {
            // offset the angle so grid points avoid the real axis symmetry
            let th = std::f64::consts::TAU * (a as f64 + 0.37) / res.angular as f64;
            one.push((Complex64::from_polar(rad, th), r == res.radial));
        }
    }
    let mut out = vec![(vec![], false)];
    for _ in 0..free {
        let mut next = Vec::with_capacity(out.len() * one.len());
        for (head, on_b) in &out {
            for (z, b) in &one {
                let mut h = head.clone();
                h.push(*z);
                next.push((h, *on_b || *b));
            }
        }
        out = next;
    }
    out
}

enum SliceResult {
    Clean(usize),
    Inside(usize, Complex64),
    Contact(usize),
    Ambiguous,
}

fn scan_slice(eval: &SliceEval, head: &[Complex64], on_boundary: bool, tol: f64) -> SliceResult {
    let c = eval.coeffs(head);
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        // p vanishes identically on this slice
        return if on_boundary { SliceResult::Contact(0) } else { SliceResult::Ambiguous };
    }
    let mut trimmed = c.clone();
    while trimmed.len() > 1 && trimmed.last().unwrap().norm() <= 1e-13 * scale {
        trimmed.pop();
    }
    let roots = if trimmed.len() > 1 { aberth(&trimmed) } else { vec![] };
    let mut inside = 0;
    let mut contact = 0;
    let mut witness = None;
    for z in roots {
        let r = z.norm();
        if r < 1.0 - tol {
            inside += 1;
            witness.get_or_insert(z);
        } else if (r - 1.0).abs() <= tol {
            contact += 1;
        }
    }
    match (on_boundary, witness) {
        (false, Some(w)) => SliceResult::Inside(inside, w),
        (false, None) if contact > 0 => SliceResult::Ambiguous,
        (true, _) if contact > 0 || inside > 0 => SliceResult::Contact(inside),
        _ => SliceResult::Clean(inside),
    }
}

fn to_halfplane(w: Complex64) -> Complex64 {
    Complex64::i() * (1.0 - w) / (1.0 + w)
}

/// Scan slices of the closed domain and count zeros of the last variable inside it.
///
/// Half-plane input is moved to the polydisk first. More boundary contacts than an
/// atoral polynomial can have are reported as a zero curve on the distinguished boundary.
pub fn check_stable(p: &Polynomial, domain: Domain, res: Resolution) -> Result<StabilityReport> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let d = p.nvars();
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!("stability scans support 1 to 3 variables, got {d}")));
    }
    if res.radial == 0 || res.angular == 0 {
        return Err(Error::Invalid("resolution must be positive".into()));
    }
    let disk = match domain {
        Domain::Disk => p.clone(),
        Domain::UpperHalfPlane => inverse_cayley(p, &p.multidegree())?,
    };
    let grid = disk_grid(d - 1, &res);
    let mut counts = Vec::with_capacity(d * grid.len());
    let mut contacts = 0;
    let mut ambiguous = 0;
    let mut witness = None;
    // every variable takes a turn as the solved one, so zero sets such as {z1 = c}
    // that no slice in z2 meets are still found
    for solved in 0..d {
        let eval = SliceEval::new(&disk, solved);
        let results: Vec<SliceResult> =
            grid.par_iter().map(|(head, on_b)| scan_slice(&eval, head, *on_b, res.tol)).collect();
        let mut turn_contacts = 0;
        for (k, r) in results.iter().enumerate() {
            match r {
                SliceResult::Clean(n) => counts.push(*n),
                SliceResult::Inside(n, z) => {
                    counts.push(*n);
                    if witness.is_none() {
                        let mut w = grid[k].0.clone();
                        w.insert(solved, *z);
                        witness = Some(w);
                    }
                }
                SliceResult::Contact(n) => {
                    counts.push(*n);
                    turn_contacts += 1;
                }
                SliceResult::Ambiguous => {
                    counts.push(0);
                    ambiguous += 1;
                }
            }
        }
        contacts = contacts.max(turn_contacts);
    }
    let md = disk.multidegree();
    let atoral_bound = if d == 1 { md[0] as usize } else { 2 * md.iter().map(|&x| x as usize).product::<usize>() };
    let verdict = if let Some(w) = witness {
        let w = match domain {
            Domain::Disk => w,
            Domain::UpperHalfPlane => w.into_iter().map(to_halfplane).collect(),
        };
        Verdict::ZeroFound(w)
    } else if ambiguous > 0 {
        Verdict::Inconclusive(format!("{ambiguous} slices have a root within tolerance of the boundary"))
    } else if contacts > atoral_bound {
        Verdict::Inconclusive(format!("{contacts} boundary slices meet the zero set: zero curve on the distinguished boundary"))
    } else {
        Verdict::NoZerosFound
    };
    Ok(StabilityReport { domain, verdict, resolution: res, slice_counts: counts, boundary_contacts: contacts })
}

/// `p = pure_part * symmetric_part`, where the symmetric part is the gcd of `p` with its
/// reflection and the pure part shares no factor with its own reflection.
#[derive(Clone, Debug)]
pub struct DichotomySplit {
    pub pure_part: Polynomial,
    pub symmetric_part: Polynomial,
    /// `reflection(symmetric_part) = unimodular_const * symmetric_part`.
    pub unimodular_const: Coefficient,
}

pub fn dichotomy_split(p: &Polynomial, domain: Domain) -> Result<DichotomySplit> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    p.require_exact("dichotomy split needs exact coefficients")?;
    let r = reflect(p, domain, None)?;
    let g = gcd2(p, &r)?;
    let pure = p.div_exact(&g).ok_or_else(|| Error::Numerical("gcd does not divide p".into()))?;
    let rg = reflect(&g, domain, None)?;
    let (lm, lc) = g.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
    let unimodular_const = &rg.coeff(&lm.0) * &lc.inv().unwrap();
    if rg != g.scale(&unimodular_const) {
        return Err(Error::Numerical("common factor is not a multiple of its reflection".into()));
    }
    Ok(DichotomySplit { pure_part: pure, symmetric_part: g, unimodular_const })
}
