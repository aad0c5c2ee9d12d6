//! Newton–Puiseux expansion of plane curves at a point.
//!
//! Branches are returned as `t -> (t^m, -phi(t))`, i.e. as factors `z2 + phi(z1^{1/m})`.
//! A branch of pure stable type has the shape `phi(t) = q(t^m) + t^{2mL} psi(t)` with a real
//! polynomial `q` (the segment), an even cutoff `2L` and `Im psi(0) > 0`.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::coeff::{rationalize, Coefficient, GaussRat};
use crate::error::{Error, Result};
use crate::homog::{decompose, normalize_lowest};
use crate::poly::gcd::{gcd2, primitive_z2};
use crate::poly::univariate::UPoly;
use crate::poly::{split_real_imag, Branch, Polynomial, TruncatedSeries};

const MAX_DEPTH: usize = 64;

/// Coefficients `rows[j][i]` of `x^i y^j`.
type Dense = Vec<Vec<Coefficient>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchKind {
    PureStable,
    RealStable,
    /// Neither pattern was recognised; the string says why.
    Indeterminate(String),
}

impl BranchKind {
    pub fn label(&self) -> &'static str {
        match self {
            BranchKind::PureStable => "pure_stable",
            BranchKind::RealStable => "real_stable",
            BranchKind::Indeterminate(_) => "indeterminate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PuiseuxBranch {
    /// Ramification `M_j` of the branch.
    pub multiplicity: u32,
    /// `phi(t)`; the branch is `z1 = t^m`, `z2 = -phi(t)`.
    pub series: TruncatedSeries,
    pub kind: BranchKind,
    /// Coefficients of the segment `q(z1)` in powers of `z1`.
    pub segment: Vec<Coefficient>,
    /// `2L` for pure branches.
    pub cutoff: Option<u32>,
    /// `psi(t)` for pure branches (empty otherwise).
    pub psi: TruncatedSeries,
    /// Largest `|p(z1, z2)| / |p|` over sample points on the branch with `|z1| = 1e-2`.
    pub residual: f64,
}

impl PuiseuxBranch {
    pub fn is_pure(&self) -> bool {
        self.kind == BranchKind::PureStable
    }

    /// The segment as a polynomial in the first variable.
    pub fn segment_poly(&self, vars: &[String]) -> Polynomial {
        let mut p = Polynomial::zero(vars);
        for (k, c) in self.segment.iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[0] = k as u32;
            p = &p + &Polynomial::monomial(vars, e, c.clone());
        }
        p
    }

    /// The parametrisation `(t^m, -phi(t))` for composition.
    pub fn to_branch(&self) -> Branch {
        Branch::new(self.series.neg())
    }

    /// `phi` at `t`, using the known coefficients.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.series.coeffs.iter().rev() {
            acc = acc * t + c.to_c64();
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let known = self.series.coeffs.len();
        json!({
            "multiplicity": self.multiplicity,
            "type": self.kind.label(),
            "note": match &self.kind { BranchKind::Indeterminate(r) => Some(r.clone()), _ => None },
            "cutoff": self.cutoff,
            "segment": self.segment.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "psi": self.psi.coeffs.iter().take(4).map(|c| c.to_json()).collect::<Vec<_>>(),
            "series_known_terms": known,
            "residual": self.residual,
        })
    }
}

#[derive(Clone, Debug)]
pub struct LocalFactorization {
    pub center: Vec<Coefficient>,
    /// Order of vanishing of `p` at the center.
    pub order: u32,
    /// Exponents of `z1`, `z2` dividing the shifted polynomial (not expanded into branches).
    pub monomial_factors: [u32; 2],
    pub branches: Vec<PuiseuxBranch>,
    /// Value of the local unit at the center.
    pub unit_value: Coefficient,
    /// Order in `z1` to which every branch is known.
    pub truncation: usize,
}

impl LocalFactorization {
    pub fn all_pure(&self) -> bool {
        !self.branches.is_empty() && self.branches.iter().all(|b| b.is_pure())
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.branches.iter().map(|b| b.multiplicity).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "center": self.center.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "M": self.order,
            "monomial_factors": self.monomial_factors,
            "unit_value": self.unit_value.to_json(),
            "truncation": self.truncation,
            "branches": self.branches.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PuiseuxOptions {
    /// Initial order in `z1` to which branches are expanded.
    pub order: usize,
    /// Expansion is doubled up to this order while a branch is not yet classified.
    pub max_order: usize,
}

impl PuiseuxOptions {
    pub fn new(order: usize) -> Self {
        PuiseuxOptions { order: order.max(2), max_order: (2 * order).max(16) }
    }

    /// Expand exactly to `order` with no retries.
    pub fn fixed(order: usize) -> Self {
        PuiseuxOptions { order: order.max(2), max_order: order.max(2) }
    }
}

// ---------------------------------------------------------------------------
// truncated series helpers on coefficient vectors

fn smul(a: &[Coefficient], b: &[Coefficient], n: usize) -> Vec<Coefficient> {
    let mut out = vec![Coefficient::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            if !y.is_zero() {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
    }
    out
}

fn sinv(a: &[Coefficient], n: usize) -> Vec<Coefficient> {
    let a0 = a[0].inv().expect("series inverse needs a unit constant term");
    let mut b = vec![Coefficient::zero(); n];
    b[0] = a0.clone();
    for k in 1..n {
        let mut s = Coefficient::zero();
        for i in 1..=k.min(a.len() - 1) {
            if !a[i].is_zero() && !b[k - i].is_zero() {
                s = &s + &(&a[i] * &b[k - i]);
            }
        }
        b[k] = -&(&s * &a0);
    }
    b
}

fn series_of(row: &[Coefficient], n: usize) -> Vec<Coefficient> {
    let mut v: Vec<Coefficient> = row.iter().take(n).cloned().collect();
    v.resize(n, Coefficient::zero());
    v
}

/// `f(x, y(x)) mod x^n`.
fn seval(f: &Dense, y: &[Coefficient], n: usize) -> Vec<Coefficient> {
    let mut acc = vec![Coefficient::zero(); n];
    for row in f.iter().rev() {
        acc = smul(&acc, y, n);
        for (k, c) in row.iter().enumerate().take(n) {
            acc[k] = &acc[k] + c;
        }
    }
    acc
}

/// `f(x, y(x))` without truncation, `y` a polynomial.
fn peval(f: &Dense, y: &[Coefficient]) -> Vec<Coefficient> {
    let mut acc: Vec<Coefficient> = vec![];
    for row in f.iter().rev() {
        let mut next = vec![Coefficient::zero(); (acc.len() + y.len()).max(row.len())];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                next[i + j] = &next[i + j] + &(a * b);
            }
        }
        for (k, c) in row.iter().enumerate() {
            next[k] = &next[k] + c;
        }
        acc = next;
    }
    acc
}

fn dense_dy(f: &Dense) -> Dense {
    f.iter().enumerate().skip(1).map(|(j, row)| row.iter().map(|c| c * &Coefficient::int(j as i64)).collect()).collect()
}

// ---------------------------------------------------------------------------
// Newton polygon iteration

struct Raw {
    y: Vec<Coefficient>,
    m: u32,
    trunc: Option<usize>,
}

fn dense_of(p: &Polynomial) -> Dense {
    let dy = p.degree_in(1) as usize;
    let dx = p.degree_in(0) as usize;
    let mut f = vec![vec![Coefficient::zero(); dx + 1]; dy + 1];
    for (m, c) in p.terms() {
        f[m.0[1] as usize][m.0[0] as usize] = c.clone();
    }
    f
}

fn dense_tol(f: &Dense) -> f64 {
    let exact = f.iter().flatten().all(|c| c.is_exact());
    if exact {
        0.0
    } else {
        1e-11 * f.iter().flatten().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

fn clean_dense(f: Dense, tol: f64) -> Dense {
    let mut f: Dense = f
        .into_iter()
        .map(|row| {
            let mut row: Vec<Coefficient> = row.into_iter().map(|c| if c.is_negligible(tol) { Coefficient::zero() } else { c }).collect();
            while row.last().is_some_and(|c| c.is_zero()) {
                row.pop();
            }
            row
        })
        .collect();
    while f.last().is_some_and(|r| r.is_empty()) {
        f.pop();
    }
    f
}

fn first_nonzero(row: &[Coefficient]) -> Option<usize> {
    row.iter().position(|c| !c.is_zero())
}

/// Lower convex hull of the Newton polygon between `j = 0` and `j = n`, as `(ja, ia, jb, ib)`.
fn newton_edges(f: &Dense, n: usize) -> Vec<(usize, usize, usize, usize)> {
    let pts: Vec<(i64, i64)> =
        (0..=n).filter_map(|j| f.get(j).and_then(|r| first_nonzero(r)).map(|i| (j as i64, i as i64))).collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| (w[0].0 as usize, w[0].1 as usize, w[1].0 as usize, w[1].1 as usize))
        .collect()
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut r: i128 = 1;
    for t in 0..k {
        r = r * (n - t) as i128 / (t + 1) as i128;
    }
    r as i64
}

/// `f(x^q, x^p (c + y)) / x^k`.
fn substitute(f: &Dense, c: &Coefficient, p: usize, q: usize, k: usize) -> Dense {
    let dy = f.len() - 1;
    let mut cpow = vec![Coefficient::one()];
    for _ in 0..dy {
        let next = cpow.last().unwrap() * c;
        cpow.push(next);
    }
    let mut width = 0;
    for (j, row) in f.iter().enumerate() {
        if let Some(last) = row.iter().rposition(|c| !c.is_zero()) {
            width = width.max(q * last + p * j + 1 - k);
        }
    }
    let mut out = vec![vec![Coefficient::zero(); width]; dy + 1];
    for (j, row) in f.iter().enumerate() {
        for (i, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let i1 = q * i + p * j - k;
            for l in 0..=j {
                let t = &(a * &cpow[j - l]) * &Coefficient::int(binomial(j, l));
                out[l][i1] = &out[l][i1] + &t;
            }
        }
    }
    out
}

fn qth_root(u: &Coefficient, q: usize) -> Coefficient {
    if q == 1 {
        return u.clone();
    }
    let z = u.to_c64().powf(1.0 / q as f64);
    if u.is_exact() {
        for den in [1i64, 2, 3, 4, 6, 12, 60, 840] {
            if let Some(g) = GaussRat::recognise(z, den) {
                let c = Coefficient::Exact(g);
                if c.pow(q as u32) == *u {
                    return c;
                }
            }
        }
    }
    Coefficient::Approx(z)
}

fn regular_branch(f: &Dense, order: usize) -> Raw {
    let fy = dense_dy(f);
    let mut y = vec![Coefficient::zero(); order];
    let mut prec = 1;
    while prec < order {
        prec = (2 * prec).min(order);
        let g = seval(f, &y[..prec], prec);
        let d = seval(&fy, &y[..prec], prec);
        let corr = smul(&g, &sinv(&d, prec), prec);
        for k in 0..prec {
            y[k] = &y[k] - &corr[k];
        }
    }
    let exact = y.iter().all(|c| c.is_exact()) && f.iter().flatten().all(|c| c.is_exact());
    if exact {
        let top = y.iter().rposition(|c| !c.is_zero()).map(|k| k + 1).unwrap_or(0);
        if top < order && peval(f, &y[..top]).iter().all(|c| c.is_zero()) {
            return Raw { y: y[..top].to_vec(), m: 1, trunc: None };
        }
    }
    Raw { y, m: 1, trunc: Some(order) }
}

fn lift(ch: Raw, c: &Coefficient, p: usize, q: usize) -> Raw {
    let s = ch.m as usize * p;
    let mut y = vec![Coefficient::zero(); s + ch.y.len().max(1)];
    y[s] = c.clone();
    for (k, v) in ch.y.iter().enumerate() {
        y[s + k] = &y[s + k] + v;
    }
    Raw { y, m: ch.m * q as u32, trunc: ch.trunc.map(|t| t + s) }
}

/// All roots `y(x)` with `y(0) = 0` of `f(x, y) = 0`, expanded modulo `x^order`.
fn solve(f: Dense, order: i64, depth: usize) -> Result<Vec<Raw>> {
    if depth > MAX_DEPTH {
        return Err(Error::Numerical("Newton polygon iteration did not separate the branches".into()));
    }
    let tol = dense_tol(&f);
    let mut f = clean_dense(f, tol);
    let mut out = Vec::new();
    let Some(mut n) = (0..f.len()).find(|&j| f[j].first().is_some_and(|c| !c.is_zero())) else {
        return Err(Error::Numerical("curve contains the axis z1 = 0".into()));
    };
    if n == 0 {
        return Ok(out);
    }
    if f[0].is_empty() {
        out.push(Raw { y: vec![], m: 1, trunc: None });
        f.remove(0);
        n -= 1;
        if n == 0 {
            return Ok(out);
        }
    }
    let order = order.max(1) as usize;
    if n == 1 {
        out.push(regular_branch(&f, order));
        return Ok(out);
    }
    for (ja, ia, jb, ib) in newton_edges(&f, n) {
        let (dj, di) = (jb - ja, ia - ib);
        let g = dj.gcd(&di);
        let (q, p) = (dj / g, di / g);
        let face = UPoly::new(
            (0..=g).map(|s| f[ja + s * q].get(ia - s * p).cloned().unwrap_or_else(Coefficient::zero)).collect(),
        );
        for (u, r) in face.roots() {
            let c = qth_root(&u, q);
            let mut f1 = substitute(&f, &c, p, q, q * ia + p * ja);
            if !c.is_exact() || tol > 0.0 {
                for row in f1.iter_mut().take(r) {
                    if let Some(x) = row.first_mut() {
                        *x = Coefficient::zero();
                    }
                }
            }
            let children = solve(f1, q as i64 * order as i64 - p as i64, depth + 1)?;
            out.extend(children.into_iter().map(|ch| lift(ch, &c, p, q)));
        }
    }
    Ok(out)
}

/// Squarefree decomposition in `z2` of a primitive polynomial (Yun).
fn squarefree_z2(p: &Polynomial) -> Result<Vec<(Polynomial, usize)>> {
    let div = |a: &Polynomial, b: &Polynomial| a.div_exact(b).ok_or_else(|| Error::Numerical("inexact division in squarefree split".into()));
    let dp = p.derivative(1);
    let g = gcd2(p, &dp)?;
    let mut b = div(p, &g)?;
    let c = div(&dp, &g)?;
    let mut d = &c - &b.derivative(1);
    let mut out = Vec::new();
    let mut k = 1;
    while b.degree_in(1) > 0 {
        let a = gcd2(&b, &d)?;
        b = div(&b, &a)?;
        let c = div(&d, &a)?;
        d = &c - &b.derivative(1);
        if a.degree_in(1) > 0 {
            out.push((a, k));
        }
        k += 1;
        if k > 64 {
            return Err(Error::Numerical("squarefree split did not terminate".into()));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// classification

enum Class {
    Pure(u32),
    Real,
    Odd(String),
    NeedMore,
}

fn real_tol(c: &Coefficient) -> f64 {
    1e-9 * c.abs().max(1.0)
}

fn is_real_c(c: &Coefficient) -> bool {
    match c {
        Coefficient::Exact(g) => g.is_real(),
        Coefficient::Approx(z) => z.im.abs() <= real_tol(c),
    }
}

fn is_zero_c(c: &Coefficient) -> bool {
    c.is_negligible(1e-12)
}

fn classify(phi: &[Coefficient], m: u32, exact_poly: bool) -> Class {
    let m = m as usize;
    for (k, c) in phi.iter().enumerate() {
        if is_zero_c(c) {
            continue;
        }
        let lattice = k % m == 0;
        if lattice && is_real_c(c) {
            continue;
        }
        if lattice && (k / m) % 2 == 0 && c.to_c64().im > 0.0 {
            return Class::Pure((k / m) as u32);
        }
        return Class::Odd(format!("coefficient of t^{k} breaks the stable pattern"));
    }
    if exact_poly || m > 1 {
        if m == 1 {
            Class::Real
        } else if exact_poly {
            Class::Odd("ramified branch with real coefficients".into())
        } else {
            Class::NeedMore
        }
    } else {
        Class::NeedMore
    }
}

fn clean_real(c: &Coefficient) -> Coefficient {
    match c {
        Coefficient::Approx(z) if z.im.abs() <= real_tol(c) => Coefficient::Approx(Complex64::new(z.re, 0.0)),
        _ => c.clone(),
    }
}

fn residual(p: &Polynomial, phi: &[Coefficient], m: u32) -> f64 {
    let norm = p.max_abs_coeff().max(f64::MIN_POSITIVE);
    let rho = 1e-2f64.powf(1.0 / m as f64);
    let mut worst: f64 = 0.0;
    for a in 0..8 {
        let t = Complex64::from_polar(rho, std::f64::consts::TAU * (a as f64 + 0.5) / 8.0);
        let mut y = Complex64::new(0.0, 0.0);
        for c in phi.iter().rev() {
            y = y * t + c.to_c64();
        }
        let v = p.eval_c64(&[t.powu(m), -y]).norm();
        worst = worst.max(v / norm);
    }
    worst
}

fn build_branch(shifted: &Polynomial, raw: &Raw, final_pass: bool) -> Option<PuiseuxBranch> {
    let m = raw.m;
    let mut phi: Vec<Coefficient> = raw.y.iter().map(|c| -c).collect();
    let known = raw.trunc.unwrap_or(phi.len());
    phi.resize(known.max(phi.len()), Coefficient::zero());
    phi.truncate(known);
    let class = classify(&phi, m, raw.trunc.is_none());
    let (kind, cutoff) = match class {
        Class::Pure(c) => (BranchKind::PureStable, Some(c)),
        Class::Real => (BranchKind::RealStable, None),
        Class::Odd(r) => (BranchKind::Indeterminate(r), None),
        Class::NeedMore if !final_pass => return None,
        Class::NeedMore if m == 1 => (BranchKind::RealStable, None),
        Class::NeedMore => (BranchKind::Indeterminate("ramified branch real to the computed order".into()), None),
    };
    let mu = m as usize;
    let split = cutoff.map(|c| c as usize * mu).unwrap_or(phi.len());
    for c in phi.iter_mut().take(split) {
        *c = clean_real(c);
    }
    let segment: Vec<Coefficient> = match kind {
        BranchKind::Indeterminate(_) => vec![],
        _ => {
            let mut s: Vec<Coefficient> = (0..split).step_by(mu).map(|k| phi[k].clone()).collect();
            while s.last().is_some_and(|c| c.is_zero()) && cutoff.is_none() {
                s.pop();
            }
            s
        }
    };
    let psi = match cutoff {
        Some(_) => {
            let tail = phi[split..].to_vec();
            match raw.trunc {
                Some(t) => TruncatedSeries::truncated(tail, m, t - split),
                None => TruncatedSeries::exact(tail, m),
            }
        }
        None => TruncatedSeries::truncated(vec![], m, 0),
    };
    let series = match raw.trunc {
        Some(t) => TruncatedSeries::truncated(phi.clone(), m, t),
        None => TruncatedSeries::exact(phi.clone(), m),
    };
    let residual = residual(shifted, &phi, m);
    Some(PuiseuxBranch { multiplicity: m, series, kind, segment, cutoff, psi, residual })
}

fn sort_key(b: &PuiseuxBranch) -> Vec<f64> {
    let mut k: Vec<f64> = b.series.coeffs.iter().take(12).flat_map(|c| {
        let z = c.to_c64();
        [z.re, z.im]
    }).collect();
    k.insert(0, b.multiplicity as f64);
    k
}

/// Factor a polynomial already centred at the origin.
pub fn factorize_at_origin(shifted: &Polynomial, opts: PuiseuxOptions) -> Result<LocalFactorization> {
    if shifted.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: shifted.nvars() });
    }
    let order = shifted.order().ok_or(Error::ZeroPolynomial)?;
    if order == 0 {
        return Err(Error::NotAZero);
    }
    let (core, mono) = shifted.strip_monomial_factor();
    let unit_value = (0..=core.degree_in(1))
        .map(|j| core.coeff(&[0, j]))
        .find(|c| !c.is_zero())
        .ok_or_else(|| Error::Numerical("curve contains the axis z1 = 0".into()))?;
    let factors: Vec<(Polynomial, usize)> = if core.is_exact() && core.degree_in(1) > 0 {
        let (_, prim) = primitive_z2(&core)?;
        squarefree_z2(&prim)?
    } else if core.degree_in(1) > 0 {
        vec![(core.clone(), 1)]
    } else {
        vec![]
    };
    let mut t = opts.order;
    loop {
        let final_pass = t >= opts.max_order;
        let mut branches = Vec::new();
        let mut incomplete = false;
        for (f, mult) in &factors {
            if f.coeff(&[0, 0]).is_negligible(1e-12 * f.max_abs_coeff()) {
                for raw in solve(dense_of(f), t as i64, 0)? {
                    match build_branch(shifted, &raw, final_pass) {
                        Some(b) => {
                            for _ in 0..*mult {
                                branches.push(b.clone());
                            }
                        }
                        None => incomplete = true,
                    }
                }
            }
        }
        if incomplete && !final_pass {
            t = (2 * t).min(opts.max_order);
            continue;
        }
        branches.sort_by(|a, b| {
            let (ka, kb) = (sort_key(a), sort_key(b));
            ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        return Ok(LocalFactorization {
            center: vec![Coefficient::zero(), Coefficient::zero()],
            order,
            monomial_factors: [mono[0], mono[1]],
            branches,
            unit_value,
            truncation: t,
        });
    }
}

/// Local factorization of `p` at `center` into Puiseux branches, expanded to order `order` in `z1`.
pub fn puiseux_factorize(p: &Polynomial, center: &[Coefficient], order: usize) -> Result<LocalFactorization> {
    puiseux_factorize_with(p, center, PuiseuxOptions::new(order))
}

pub fn puiseux_factorize_with(p: &Polynomial, center: &[Coefficient], opts: PuiseuxOptions) -> Result<LocalFactorization> {
    if p.nvars() != 2 || center.len() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: p.nvars().max(center.len()) });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut shifted = p.shift(center);
    let c0 = shifted.coeff(&[0, 0]);
    if !c0.is_zero() {
        if c0.is_negligible(1e-12 * p.max_abs_coeff().max(1.0)) {
            shifted = shifted.clean(1e-14);
        } else {
            return Err(Error::NotAZero);
        }
    }
    let mut f = factorize_at_origin(&shifted, opts)?;
    f.center = center.to_vec();
    Ok(f)
}

// ---------------------------------------------------------------------------
// contact orders and variable switching

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactOrders {
    pub k: u32,
    pub k_min: u32,
    /// `(2L_j, M_j)` per branch.
    pub fine: Vec<(u32, u32)>,
}

impl ContactOrders {
    pub fn to_json(&self) -> Value {
        json!({ "K": self.k, "K_min": self.k_min, "fine": self.fine })
    }
}

pub fn contact_orders(fact: &LocalFactorization) -> Result<ContactOrders> {
    if fact.branches.is_empty() {
        return Err(Error::Precondition("no branches through the point".into()));
    }
    let mut fine = Vec::new();
    for b in &fact.branches {
        match (b.is_pure(), b.cutoff) {
            (true, Some(c)) => fine.push((c, b.multiplicity)),
            _ => return Err(Error::Precondition(format!("branch of {} type has no contact order", b.kind.label()))),
        }
    }
    let k = fine.iter().map(|f| f.0).max().unwrap();
    let k_min = fine.iter().map(|f| f.0).min().unwrap();
    Ok(ContactOrders { k, k_min, fine })
}

/// Factorization data with `z1` as the dependent variable: segments become
/// `-I(q)(-z2)` where `I(q)` is the functional inverse below the cutoff.
pub fn switch_variables(fact: &LocalFactorization) -> Result<LocalFactorization> {
    let mut branches = Vec::new();
    for b in &fact.branches {
        let cutoff = match (b.is_pure(), b.cutoff) {
            (true, Some(c)) => c as usize,
            _ => return Err(Error::Precondition("switching needs pure branches".into())),
        };
        let q = TruncatedSeries::exact(b.segment.clone(), 1);
        if q.get(1).is_zero() {
            return Err(Error::Precondition("segment has no linear term".into()));
        }
        let inv = q.functional_inverse(cutoff)?;
        let segment: Vec<Coefficient> =
            (0..cutoff).map(|k| if k % 2 == 0 { -&inv.get(k) } else { inv.get(k) }).collect();
        let m = b.multiplicity;
        let mut phi = vec![Coefficient::zero(); cutoff * m as usize];
        for (k, c) in segment.iter().enumerate() {
            phi[k * m as usize] = c.clone();
        }
        branches.push(PuiseuxBranch {
            multiplicity: m,
            series: TruncatedSeries::truncated(phi, m, cutoff * m as usize),
            kind: BranchKind::PureStable,
            segment,
            cutoff: Some(cutoff as u32),
            psi: TruncatedSeries::truncated(vec![], m, 0),
            residual: f64::NAN,
        });
    }
    Ok(LocalFactorization {
        center: fact.center.iter().rev().cloned().collect(),
        order: fact.order,
        monomial_factors: [fact.monomial_factors[1], fact.monomial_factors[0]],
        branches,
        unit_value: fact.unit_value.clone(),
        truncation: fact.truncation,
    })
}

// ---------------------------------------------------------------------------
// lower bound certificates

#[derive(Clone, Debug)]
pub struct LowerBoundCertificate {
    /// Smallest observed `Im h(z) / |z|^{2L}`.
    pub c_hat: f64,
    pub radius: f64,
    pub samples: usize,
    pub violations: usize,
    pub cutoff: u32,
}

impl LowerBoundCertificate {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.c_hat > 0.0
    }

    pub fn to_json(&self) -> Value {
        json!({ "c_hat": self.c_hat, "radius": self.radius, "samples": self.samples, "violations": self.violations, "cutoff": self.cutoff })
    }
}

/// Sample `Im h(z) / |z|^{2L}` on `0 < |z| <= radius`, `Im z >= 0`, for every determination of `z^{1/m}`.
pub fn verify_branch_lower_bound(branch: &PuiseuxBranch, radius: f64, samples: usize) -> Result<LowerBoundCertificate> {
    let cutoff = match (branch.is_pure(), branch.cutoff) {
        (true, Some(c)) => c,
        _ => return Err(Error::Precondition("lower bound needs a pure branch".into())),
    };
    if !(radius > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let m = branch.multiplicity;
    let n_theta = 101.min(samples.max(2));
    let n_rad = (samples / n_theta).max(1);
    let mut c_hat = f64::INFINITY;
    let mut violations = 0;
    let mut count = 0;
    for a in 0..n_rad {
        let frac = if n_rad == 1 { 0.0 } else { a as f64 / (n_rad - 1) as f64 };
        let rho = radius * 10f64.powf(-3.0 * frac);
        for b in 0..n_theta {
            let th = std::f64::consts::PI * b as f64 / (n_theta - 1) as f64;
            for k in 0..m {
                let root = Complex64::from_polar(rho.powf(1.0 / m as f64), (th + std::f64::consts::TAU * k as f64) / m as f64);
                let h = branch.eval(root);
                let ratio = h.im / rho.powi(cutoff as i32);
                if h.im <= 0.0 {
                    violations += 1;
                }
                c_hat = c_hat.min(ratio);
                count += 1;
            }
        }
    }
    let cert = LowerBoundCertificate { c_hat, radius, samples: count, violations, cutoff };
    if !cert.holds() {
        return Err(Error::Numerical(format!("positivity fails at {violations} of {count} samples")));
    }
    Ok(cert)
}

// ---------------------------------------------------------------------------
// perturbed level sets A + tB

fn exact_t(t: f64) -> Coefficient {
    match rationalize(t, 1_000_000) {
        Some(r) if (crate::coeff::rat_to_f64(&r) - t).abs() <= 1e-15 * t.abs().max(1.0) => Coefficient::Exact(GaussRat::real(r)),
        _ => match BigRational::from_float(t) {
            Some(r) => Coefficient::Exact(GaussRat::real(r)),
            None => Coefficient::Approx(Complex64::new(t, 0.0)),
        },
    }
}

/// `A` and `B` of the normalised polynomial centred at the origin.
pub fn normalized_split(p: &Polynomial, center: &[Coefficient]) -> Result<(Polynomial, Polynomial)> {
    let n = normalize_lowest(&decompose(p, center)?)?;
    Ok(split_real_imag(&n.shifted()))
}

fn close(a: &Coefficient, b: &Coefficient) -> bool {
    match (a, b) {
        (Coefficient::Exact(x), Coefficient::Exact(y)) => x == y,
        _ => (a.to_c64() - b.to_c64()).norm() <= 1e-7 * (1.0 + a.abs().max(b.abs())),
    }
}

#[derive(Clone, Debug)]
pub struct TSample {
    pub t: f64,
    /// Reason the sample was set aside, if it was.
    pub exceptional: Option<String>,
    /// Coefficient of `t^{2mL}` of the matched branch, per branch of `p`.
    pub cutoff_coeffs: Vec<Coefficient>,
}

#[derive(Clone, Debug)]
pub struct SegmentMatchReport {
    pub samples: Vec<TSample>,
    /// Per branch of `p`: the cutoff coefficient differs across two regular samples.
    pub non_extension: Vec<bool>,
    /// Lowest degree of `B` (one more than the order of `p` when `p` is pure).
    pub b_order: Option<u32>,
    pub order: u32,
    pub success: bool,
}

impl SegmentMatchReport {
    pub fn to_json(&self) -> Value {
        json!({
            "success": self.success,
            "M": self.order,
            "B_order": self.b_order,
            "non_extension": self.non_extension,
            "samples": self.samples.iter().map(|s| json!({
                "t": s.t,
                "exceptional": s.exceptional,
                "cutoff_coeffs": s.cutoff_coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Factor `A + tB` for each sample `t` and check that its branches start with the
/// segments of `p` and that the coefficient at each cutoff moves with `t`.
pub fn match_perturbed_segments(
    p: &Polynomial,
    center: &[Coefficient],
    t_samples: &[f64],
    order: usize,
) -> Result<SegmentMatchReport> {
    let mut distinct: Vec<f64> = t_samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Invalid("at least three distinct values of t are needed".into()));
    }
    let fact = puiseux_factorize(p, center, order)?;
    let co = contact_orders(&fact)?;
    let (a, b) = normalized_split(p, center)?;
    let order_t = co.k as usize + 2;
    let mut samples = Vec::new();
    for &t in t_samples {
        let f = &a + &b.scale(&exact_t(t));
        let mut sample = TSample { t, exceptional: None, cutoff_coeffs: vec![] };
        match factorize_at_origin(&f, PuiseuxOptions::fixed(order_t)) {
            Err(e) => sample.exceptional = Some(e.to_string()),
            Ok(ft) => {
                let mut used = vec![false; ft.branches.len()];
                for pb in &fact.branches {
                    let m = pb.multiplicity as usize;
                    let cut = pb.cutoff.unwrap() as usize * m;
                    let found = ft.branches.iter().enumerate().position(|(k, tb)| {
                        !used[k]
                            && tb.multiplicity == pb.multiplicity
                            && tb.series.coeffs.len() > cut
                            && (0..cut).all(|j| close(&tb.series.get(j), &pb.series.get(j).re()))
                    });
                    match found {
                        Some(k) => {
                            used[k] = true;
                            sample.cutoff_coeffs.push(ft.branches[k].series.get(cut));
                        }
                        None => {
                            sample.exceptional = Some("a segment of p has no matching branch".into());
                            break;
                        }
                    }
                }
                if sample.exceptional.is_none() && used.iter().any(|u| !u) {
                    sample.exceptional = Some("extra branches through the point".into());
                }
            }
        }
        samples.push(sample);
    }
    let regular: Vec<&TSample> = samples.iter().filter(|s| s.exceptional.is_none()).collect();
    let non_extension: Vec<bool> = (0..fact.branches.len())
        .map(|j| {
            regular.iter().any(|s| regular.iter().any(|r| !close(&s.cutoff_coeffs[j], &r.cutoff_coeffs[j])))
        })
        .collect();
    let exceptional = samples.len() - regular.len();
    let success = regular.len() >= 2
        && exceptional <= 2 * fact.order as usize
        && non_extension.iter().all(|x| *x);
    Ok(SegmentMatchReport { samples, non_extension, b_order: b.order(), order: fact.order, success })
}

#[derive(Clone, Debug)]
pub struct UnitAffineReport {
    pub k_min: u32,
    pub vacuous: bool,
    /// Highest homogeneous degree checked (`K_min - 2`).
    pub degree: u32,
    /// Largest second divided difference in `t` over the checked coefficients.
    pub max_second_difference: f64,
    pub affine: bool,
}

impl UnitAffineReport {
    pub fn to_json(&self) -> Value {
        json!({
            "K_min": self.k_min,
            "vacuous": self.vacuous,
            "degree": self.degree,
            "max_second_difference": self.max_second_difference,
            "affine": self.affine,
        })
    }
}

/// Polynomial in `z2` with coefficients that are series in `z1` modulo `z1^n`.
type SeriesPoly = Vec<Vec<Coefficient>>;

fn weierstrass(fact: &LocalFactorization, n: usize) -> SeriesPoly {
    let mut w: SeriesPoly = vec![series_of(&[Coefficient::one()], n)];
    let mul_factor = |w: &SeriesPoly, root: &[Coefficient]| -> SeriesPoly {
        // w * (z2 + root)
        let mut out = vec![vec![Coefficient::zero(); n]; w.len() + 1];
        for (j, c) in w.iter().enumerate() {
            let r = smul(c, root, n);
            for k in 0..n {
                out[j][k] = &out[j][k] + &r[k];
                out[j + 1][k] = &out[j + 1][k] + &c[k];
            }
        }
        out
    };
    for _ in 0..fact.monomial_factors[1] {
        w = mul_factor(&w, &vec![Coefficient::zero(); n]);
    }
    for b in &fact.branches {
        let m = b.multiplicity as usize;
        if m == 1 {
            w = mul_factor(&w, &series_of(&b.series.coeffs, n));
            continue;
        }
        // product over conjugates, as series in t, then back to z1 = t^m
        let nt = n * m;
        let mut g: SeriesPoly = vec![series_of(&[Coefficient::one()], nt)];
        for k in 0..m {
            let w_k = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            let root: Vec<Coefficient> = (0..nt)
                .map(|j| {
                    let c = b.series.get(j);
                    if c.is_zero() { c } else { Coefficient::Approx(c.to_c64() * w_k.powu(j as u32)) }
                })
                .collect();
            let mut out = vec![vec![Coefficient::zero(); nt]; g.len() + 1];
            for (j, c) in g.iter().enumerate() {
                let r = smul(c, &root, nt);
                for i in 0..nt {
                    out[j][i] = &out[j][i] + &r[i];
                    out[j + 1][i] = &out[j + 1][i] + &c[i];
                }
            }
            g = out;
        }
        let down: SeriesPoly = g.iter().map(|c| (0..n).map(|k| c[k * m].clone()).collect()).collect();
        let mut out = vec![vec![Coefficient::zero(); n]; w.len() + down.len() - 1];
        for (i, a) in w.iter().enumerate() {
            for (j, b) in down.iter().enumerate() {
                let r = smul(a, b, n);
                for k in 0..n {
                    out[i + j][k] = &out[i + j][k] + &r[k];
                }
            }
        }
        w = out;
    }
    w
}

/// Quotient of `f` by the monic `w` in `z2`, coefficients modulo `z1^n`.
fn divide_monic(f: &Polynomial, w: &SeriesPoly, n: usize) -> SeriesPoly {
    let rows = f.coeffs_in(1);
    let mut rem: SeriesPoly = rows
        .iter()
        .map(|r| {
            let mut v = vec![Coefficient::zero(); n];
            for (m, c) in r.terms() {
                if (m.0[0] as usize) < n {
                    v[m.0[0] as usize] = c.clone();
                }
            }
            v
        })
        .collect();
    let dw = w.len() - 1;
    if rem.len() <= dw {
        return vec![];
    }
    let mut quo = vec![vec![Coefficient::zero(); n]; rem.len() - dw];
    for j in (dw..rem.len()).rev() {
        let lead = rem[j].clone();
        quo[j - dw] = lead.clone();
        for (k, wk) in w.iter().enumerate() {
            let r = smul(&lead, wk, n);
            for i in 0..n {
                rem[j - dw + k][i] = &rem[j - dw + k][i] - &r[i];
            }
        }
    }
    quo
}

/// Divide `A + tB` by its branch product for three values of `t` and check that the
/// homogeneous parts of the unit up to degree `K_min - 2` are affine in `t`.
pub fn unit_affine_check(p: &Polynomial, center: &[Coefficient], t_samples: &[f64], order: usize) -> Result<UnitAffineReport> {
    if t_samples.len() < 3 {
        return Err(Error::Invalid("three values of t are needed".into()));
    }
    let fact = puiseux_factorize(p, center, order)?;
    let co = contact_orders(&fact)?;
    if co.k_min < 4 {
        return Ok(UnitAffineReport { k_min: co.k_min, vacuous: true, degree: 0, max_second_difference: 0.0, affine: true });
    }
    let (a, b) = normalized_split(p, center)?;
    let degree = co.k_min - 2;
    let n = degree as usize + 1;
    let ts: Vec<f64> = t_samples[..3].to_vec();
    let mut units = Vec::new();
    for &t in &ts {
        let f = &a + &b.scale(&exact_t(t));
        let ft = factorize_at_origin(&f, PuiseuxOptions::fixed(co.k as usize + 2))?;
        let w = weierstrass(&ft, n);
        units.push(divide_monic(&f, &w, n));
    }
    let tc: Vec<Coefficient> = ts.iter().map(|t| exact_t(*t)).collect();
    let get = |u: &SeriesPoly, i: usize, j: usize| u.get(j).and_then(|r| r.get(i)).cloned().unwrap_or_else(Coefficient::zero);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for deg in 0..=degree as usize {
        for j in 0..=deg {
            let i = deg - j;
            let u: Vec<Coefficient> = units.iter().map(|un| get(un, i, j)).collect();
            let d01 = &(&u[1] - &u[0]) / &(&tc[1] - &tc[0]);
            let d12 = &(&u[2] - &u[1]) / &(&tc[2] - &tc[1]);
            let dd = &(&d12 - &d01) / &(&tc[2] - &tc[0]);
            worst = worst.max(dd.abs());
            scale = scale.max(u.iter().map(|c| c.abs()).fold(0.0, f64::max));
        }
    }
    let affine = worst <= 1e-8 * scale.max(1.0);
    Ok(UnitAffineReport { k_min: co.k_min, vacuous: false, degree, max_second_difference: worst, affine })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse2(s).unwrap()
    }

    fn origin() -> Vec<Coefficient> {
        vec![Coefficient::zero(), Coefficient::zero()]
    }

    fn contact_six() -> Polynomial {
        p("z1 + z2 - 2*z1^3 - 6*z1^2*z2 - i*(z1^2 + z1*z2 - 4*z1^3*z2)")
    }

    #[test]
    fn line_branch_is_exact() {
        let f = puiseux_factorize(&p("z1 + z2 - 2*i*z1*z2"), &origin(), 6).unwrap();
        assert_eq!(f.branches.len(), 1);
        let b = &f.branches[0];
        assert!(b.is_pure());
        assert_eq!(b.cutoff, Some(2));
        assert_eq!(b.segment, vec![Coefficient::zero(), Coefficient::one()]);
        assert_eq!(b.psi.get(0), Coefficient::gauss(0, 2));
    }

    #[test]
    fn cubic_segment_and_cutoff() {
        let f = puiseux_factorize(&contact_six(), &origin(), 10).unwrap();
        let b = &f.branches[0];
        assert_eq!(b.cutoff, Some(6));
        let seg: Vec<Coefficient> = [0, 1, 0, 4, 0, 24].iter().map(|&k| Coefficient::int(k)).collect();
        assert_eq!(b.segment, seg);
        assert_eq!(b.psi.get(0), Coefficient::gauss(0, 8));
        assert_eq!(b.series.get(7), Coefficient::int(136));
        assert_eq!(b.series.get(8), Coefficient::gauss(0, 88));
        assert_eq!(b.series.get(9), Coefficient::int(760));
    }

    #[test]
    fn ramified_branch_from_square() {
        // (z2 + z1 + i z1^2)^2 - 2 z1^5
        let f = puiseux_factorize(&p("(z2 + z1 + i*z1^2)^2 - 2*z1^5"), &origin(), 6).unwrap();
        assert_eq!(f.branches.len(), 1);
        let b = &f.branches[0];
        assert_eq!(b.multiplicity, 2);
        assert_eq!(b.cutoff, Some(2));
        assert!(b.is_pure());
        assert!((b.series.get(5).abs() - 2f64.sqrt()).abs() < 1e-12);
        let co = contact_orders(&f).unwrap();
        assert_eq!((co.k, co.k_min), (2, 2));
    }

    #[test]
    fn repeated_factor_gives_repeated_branches() {
        let f = puiseux_factorize(&p("(z1 + z2 - 2*i*z1*z2)^2"), &origin(), 6).unwrap();
        assert_eq!(f.branches.len(), 2);
        assert_eq!(f.total_multiplicity(), 2);
    }

    #[test]
    fn real_branches_of_a_real_quadratic() {
        let f = puiseux_factorize(&p("4*(z2^2 + 4*z1*z2 + z1^2 - 2*z1^2*z2^2)"), &origin(), 6).unwrap();
        assert_eq!(f.branches.len(), 2);
        assert!(f.branches.iter().all(|b| b.kind == BranchKind::RealStable));
        let s0 = f.branches[0].segment[1].to_c64().re;
        assert!((s0 - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!(contact_orders(&f).is_err());
    }

    #[test]
    fn switching_inverts_segment() {
        let f = puiseux_factorize(&contact_six(), &origin(), 8).unwrap();
        let s = switch_variables(&f).unwrap();
        let seg: Vec<Coefficient> = [0, 1, 0, -4, 0, 24].iter().map(|&k| Coefficient::int(k)).collect();
        assert_eq!(s.branches[0].segment, seg);
        let back = switch_variables(&s).unwrap();
        assert_eq!(back.branches[0].segment, f.branches[0].segment);
    }

    #[test]
    fn lower_bound_for_simple_branch() {
        let f = puiseux_factorize(&p("z2 + z1 + i*z1^2"), &origin(), 6).unwrap();
        let c = verify_branch_lower_bound(&f.branches[0], 0.125, 2000).unwrap();
        assert!(c.c_hat >= 0.5);
        let r = puiseux_factorize(&p("z2 + z1"), &origin(), 6).unwrap();
        assert!(verify_branch_lower_bound(&r.branches[0], 0.125, 100).is_err());
    }

    #[test]
    fn perturbed_segments_of_line() {
        let r = match_perturbed_segments(&p("z1 + z2 - 2*i*z1*z2"), &origin(), &[1.0, 2.0, 5.0], 6).unwrap();
        assert!(r.success);
        assert_eq!(r.b_order, Some(2));
    }

    #[test]
    fn unit_affine_on_cubic_example() {
        let r = unit_affine_check(&contact_six(), &origin(), &[1.0, 2.0, 3.0], 8).unwrap();
        assert!(!r.vacuous);
        assert_eq!(r.degree, 4);
        assert!(r.affine, "second difference {}", r.max_second_difference);
        let v = unit_affine_check(&p("z1 + z2 - 2*i*z1*z2"), &origin(), &[1.0, 2.0, 3.0], 6).unwrap();
        assert!(v.vacuous);
    }
}
