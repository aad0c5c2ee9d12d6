//! Intersection multiplicities at zeros on the torus, z1-derivative integrability
//! indices with witness numerators, and a shell-quadrature estimator that checks
//! a numerator's cutoff numerically.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::homog::decompose;
use crate::poly::gcd::resultant_z2;
use crate::poly::local::{local_colength, minimal_power_in_ideal};
use crate::poly::series::compose_branch;
use crate::poly::univariate::{aberth, UPoly};
use crate::poly::{cayley_transfer, reflect, Domain, Polynomial};
use crate::puiseux::{contact_orders, puiseux_factorize, LocalFactorization};

const PUISEUX_ORDER: usize = 16;
const MAX_LOCAL_ORDER: u32 = 80;
const CIRCLE_TOL: f64 = 1e-7;

/// An extended positive rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Finite(Ratio<i64>),
    Infinite,
}

impl Index {
    pub fn value(&self) -> f64 {
        match self {
            Index::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Index::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Index::Finite(_))
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Index::Finite(a), Index::Finite(b)) => a.cmp(b),
            (Index::Finite(_), Index::Infinite) => Ordering::Less,
            (Index::Infinite, Index::Finite(_)) => Ordering::Greater,
            (Index::Infinite, Index::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Index::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Index::Infinite => write!(f, "inf"),
        }
    }
}

/// Indices `(K+1)/(K-n)` for `n = 0..K-1`, followed by infinity.
pub fn indices_for_contact_order(k: u32) -> Vec<Index> {
    let k = k as i64;
    let mut out: Vec<Index> = (0..k).map(|n| Index::Finite(Ratio::new(k + 1, k - n))).collect();
    out.push(Index::Infinite);
    out
}

/// A zero of `p` on the torus with its local invariants.
#[derive(Clone, Debug)]
pub struct TorusZero {
    pub point: Vec<Coefficient>,
    /// Order of vanishing.
    pub order: u32,
    /// Contact order `K`.
    pub contact: u32,
    /// Intersection multiplicity of `p` and its reflection.
    pub multiplicity: usize,
}

impl TorusZero {
    pub fn to_json(&self) -> Value {
        json!({
            "point": self.point.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "M": self.order,
            "K": self.contact,
            "N": self.multiplicity,
        })
    }
}

#[derive(Clone, Debug)]
pub struct IndexEntry {
    pub index: Index,
    /// Zero responsible for the index (`None` for the global infinity witnessed by `p`).
    pub zero: Option<usize>,
    /// Power of `(z2 - tau2)` in the witness.
    pub power: u32,
    pub witness: Polynomial,
}

#[derive(Clone, Debug)]
pub struct IntegrabilityProfile {
    pub zeros: Vec<TorusZero>,
    /// Distinct indices in increasing order, each with one witness.
    pub indices: Vec<IndexEntry>,
    /// Correction factor `r` used for each zero's witnesses.
    pub corrections: Vec<Polynomial>,
    /// Some zero vanishes to order two or more; the list is then a candidate superset.
    pub upper_bounded_only: bool,
}

impl IntegrabilityProfile {
    pub fn index_values(&self) -> Vec<Index> {
        self.indices.iter().map(|e| e.index).collect()
    }

    pub fn finite_count(&self) -> usize {
        self.indices.iter().filter(|e| e.index.is_finite()).count()
    }

    /// Number of finite indices is at most the total intersection multiplicity.
    pub fn count_bound_holds(&self) -> bool {
        self.finite_count() <= self.zeros.iter().map(|z| z.multiplicity).sum::<usize>()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "zeros": self.zeros.iter().map(|z| z.to_json()).collect::<Vec<_>>(),
            "indices": self.indices.iter().map(|e| e.index.to_string()).collect::<Vec<_>>(),
            "witnesses": self.indices.iter().map(|e| json!({
                "index": e.index.to_string(),
                "zero": e.zero,
                "power": e.power,
                "numerator": e.witness.to_string(),
            })).collect::<Vec<_>>(),
            "corrections": self.corrections.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "status": if self.upper_bounded_only { "candidate_superset" } else { "exact" },
            "count_bound_holds": self.count_bound_holds(),
        })
    }
}

fn on_circle(z: &Coefficient) -> bool {
    match z.as_exact() {
        Some(g) => g.norm_sqr() == num_rational::BigRational::from_integer(1.into()),
        None => (z.abs() - 1.0).abs() < CIRCLE_TOL,
    }
}

/// `p(a, z2)` as a univariate polynomial in `z2`.
fn slice_at(p: &Polynomial, a: &Coefficient) -> UPoly {
    let c: Vec<Coefficient> = p
        .coeffs_in(1)
        .iter()
        .map(|row| {
            let mut acc = Coefficient::zero();
            for (m, v) in row.terms() {
                acc = &acc + &(v * &a.pow(m.0[0]));
            }
            acc
        })
        .collect();
    UPoly::new(c)
}

/// Common zeros of `p` and its reflection on the torus, ordered by argument.
pub fn torus_zeros(p: &Polynomial) -> Result<Vec<Vec<Coefficient>>> {
    if p.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: p.nvars() });
    }
    if !p.is_exact() {
        return Err(Error::NonExact("locating torus zeros needs exact coefficients".into()));
    }
    let pt = reflect(p, Domain::Disk, None)?;
    let res = resultant_z2(p, &pt)?;
    if res.is_zero() {
        return Err(Error::Precondition("p shares a factor with its reflection (toral component)".into()));
    }
    let mut out: Vec<Vec<Coefficient>> = Vec::new();
    for (a, _) in res.roots() {
        if !on_circle(&a) {
            continue;
        }
        let (sp, st) = (slice_at(p, &a), slice_at(&pt, &a));
        for (b, _) in sp.roots() {
            if !on_circle(&b) {
                continue;
            }
            let vt = st.eval(&b);
            let scale = pt.max_abs_coeff().max(1.0);
            if vt.is_zero() || (!vt.is_exact() && vt.abs() < 1e-6 * scale) {
                let z = vec![a.clone(), b];
                if !out.iter().any(|w| w.iter().zip(&z).all(|(x, y)| (x.to_c64() - y.to_c64()).norm() < 1e-6)) {
                    out.push(z);
                }
            }
        }
    }
    out.sort_by(|u, v| {
        let key = |w: &Vec<Coefficient>| (w[0].to_c64().arg(), w[1].to_c64().arg());
        let (a, b) = (key(u), key(v));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
    Ok(out)
}

/// `n` used for the Cayley transfer of a pair of numerators sharing one frame.
fn common_degree(polys: &[&Polynomial]) -> Vec<u32> {
    let mut n = vec![0u32; 2];
    for p in polys {
        for (k, d) in p.multidegree().into_iter().enumerate() {
            n[k] = n[k].max(d);
        }
    }
    n
}

/// Cayley image of `p` in the chart sending the origin to `tau`.
pub fn cayley_at(p: &Polynomial, tau: &[Coefficient], n: &[u32]) -> Result<Polynomial> {
    cayley_transfer(&p.scale_vars(tau), n)
}

fn local_factorization(p: &Polynomial, tau: &[Coefficient]) -> Result<(Polynomial, LocalFactorization)> {
    let big_p = cayley_at(p, tau, &p.multidegree())?;
    let zero = vec![Coefficient::zero(), Coefficient::zero()];
    let fact = puiseux_factorize(&big_p, &zero, PUISEUX_ORDER)?;
    Ok((big_p, fact))
}

fn branch_sum(big_p: &Polynomial, fact: &LocalFactorization) -> Result<Option<usize>> {
    if fact.monomial_factors != [0, 0] {
        return Ok(None);
    }
    let reflected = big_p.conj_coeffs();
    let mut total = 0;
    for b in &fact.branches {
        total += compose_branch(&reflected, &b.to_branch())?.order.certified()?;
    }
    Ok(Some(total))
}

/// `N_tau(p, p~)`: the sum over branches of `p` (in the half-plane chart at `tau`)
/// of the vanishing order of the reflected polynomial along the branch. Falls back
/// to the local quotient dimension when the factorization has monomial factors.
pub fn intersection_multiplicity(p: &Polynomial, tau: &[Coefficient]) -> Result<usize> {
    check_zero(p, tau)?;
    let (big_p, fact) = local_factorization(p, tau)?;
    match branch_sum(&big_p, &fact)? {
        Some(n) => Ok(n),
        None => quotient_multiplicity(p, tau),
    }
}

/// `dim R_tau / (p, p~)` by linear algebra in the local ring.
pub fn quotient_multiplicity(p: &Polynomial, tau: &[Coefficient]) -> Result<usize> {
    let pt = reflect(p, Domain::Disk, None)?;
    Ok(local_colength(&[p.shift(tau), pt.shift(tau)], MAX_LOCAL_ORDER)?.0)
}

fn check_zero(p: &Polynomial, tau: &[Coefficient]) -> Result<()> {
    if tau.len() != 2 || p.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: tau.len() });
    }
    let v = p.eval(tau);
    if !(v.is_zero() || (!v.is_exact() && v.abs() < 1e-9 * p.max_abs_coeff().max(1.0))) {
        return Err(Error::NotAZero);
    }
    if !tau.iter().all(on_circle) {
        return Err(Error::Precondition("point is not on the torus".into()));
    }
    Ok(())
}

/// Local invariants of `p` at a torus zero.
pub fn analyze_zero(p: &Polynomial, tau: &[Coefficient]) -> Result<TorusZero> {
    check_zero(p, tau)?;
    let order = decompose(p, tau)?.order;
    let (big_p, fact) = local_factorization(p, tau)?;
    let contact = contact_orders(&fact)?.k;
    let multiplicity = match branch_sum(&big_p, &fact)? {
        Some(n) => n,
        None => quotient_multiplicity(p, tau)?,
    };
    Ok(TorusZero { point: tau.to_vec(), order, contact, multiplicity })
}

/// A polynomial in one coordinate lying in `(p, p~) R_lambda` and not vanishing at `tau`:
/// `(z_k - lambda_k)^m` with the smallest such `m`, using the first coordinate where
/// `tau` and `lambda` differ.
pub fn separating_factor(p: &Polynomial, lambda: &[Coefficient], tau: &[Coefficient]) -> Result<Polynomial> {
    let k = (0..2)
        .find(|&k| (lambda[k].to_c64() - tau[k].to_c64()).norm() > 1e-9)
        .ok_or_else(|| Error::Precondition("zeros coincide".into()))?;
    let pt = reflect(p, Domain::Disk, None)?;
    let gens = [p.shift(lambda), pt.shift(lambda)];
    let m = minimal_power_in_ideal(&gens, k, MAX_LOCAL_ORDER)?;
    let lin = &Polynomial::var(p.vars(), k) - &Polynomial::constant(p.vars(), lambda[k].clone());
    Ok(lin.pow(m))
}

/// Whether `f` lies in `(p, p~) R_tau`.
pub fn in_reflection_ideal(f: &Polynomial, p: &Polynomial, tau: &[Coefficient]) -> Result<bool> {
    let pt = reflect(p, Domain::Disk, None)?;
    crate::poly::local::local_membership(&f.shift(tau), &[p.shift(tau), pt.shift(tau)], MAX_LOCAL_ORDER)
}

/// Enumerate z1-derivative integrability indices with witness numerators.
pub fn derivative_integrability_indices(p: &Polynomial) -> Result<IntegrabilityProfile> {
    let points = torus_zeros(p)?;
    let zeros: Vec<TorusZero> = points.iter().map(|tau| analyze_zero(p, tau)).collect::<Result<_>>()?;
    let pt = reflect(p, Domain::Disk, None)?;
    let vars = p.vars();
    let mut corrections = Vec::new();
    for (j, z) in zeros.iter().enumerate() {
        let mut r = Polynomial::one(vars);
        for (l, other) in zeros.iter().enumerate() {
            if l != j {
                r = &r * &separating_factor(p, &other.point, &z.point)?;
            }
        }
        corrections.push(r);
    }
    let mut entries: Vec<IndexEntry> = Vec::new();
    for (j, z) in zeros.iter().enumerate() {
        let lin = &Polynomial::var(vars, 1) - &Polynomial::constant(vars, z.point[1].clone());
        for (n, index) in indices_for_contact_order(z.contact).into_iter().enumerate() {
            if !index.is_finite() {
                continue;
            }
            let witness = &(&corrections[j] * &lin.pow(n as u32)) * &pt;
            entries.push(IndexEntry { index, zero: Some(j), power: n as u32, witness });
        }
    }
    entries.push(IndexEntry { index: Index::Infinite, zero: None, power: 0, witness: p.clone() });
    entries.sort_by(|a, b| a.index.cmp(&b.index).then(a.zero.cmp(&b.zero)));
    entries.dedup_by(|a, b| a.index == b.index);
    let upper_bounded_only = zeros.iter().any(|z| z.order >= 2);
    Ok(IntegrabilityProfile { zeros, indices: entries, corrections, upper_bounded_only })
}

// ---------------------------------------------------------------------------
// shell quadrature

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureParams {
    /// Half-width in the Cayley chart of the neighbourhood split into shells.
    pub outer: f64,
    pub max_shells: usize,
    pub min_shells: usize,
    /// Smallest usable peak width relative to the shell radius.
    pub width_floor: f64,
    /// Nodes per direction of the bulk tensor rule.
    pub bulk_nodes: usize,
    /// Decay exponents within this band of zero are reported as borderline.
    pub band: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { outer: 0.1, max_shells: 20, min_shells: 6, width_floor: 1e-10, bulk_nodes: 48, band: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Finite,
    Divergent,
    Borderline,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::Finite => "finite",
            Classification::Divergent => "divergent",
            Classification::Borderline => "borderline",
        }
    }
}

/// Shell data for one zero and one exponent.
#[derive(Clone, Debug)]
pub struct ShellSeries {
    pub zero: usize,
    pub exponent: f64,
    /// `(outer radius, sum)` per dyadic shell, outermost first.
    pub shells: Vec<(f64, f64)>,
    /// Fitted decay exponent `e` with shell sums `~ 2^{-e s}`.
    pub decay: f64,
    pub verdict: Classification,
}

#[derive(Clone, Debug)]
pub struct CutoffEstimate {
    pub exponent: f64,
    pub verdict: Classification,
    /// Bulk integral plus all computed shells; a lower bound when divergent.
    pub partial_integral: f64,
    pub per_zero: Vec<ShellSeries>,
}

#[derive(Clone, Debug)]
pub struct CutoffReport {
    pub zeros: Vec<Vec<Coefficient>>,
    pub estimates: Vec<CutoffEstimate>,
    pub params: QuadratureParams,
}

impl CutoffReport {
    pub fn to_json(&self) -> Value {
        json!({
            "zeros": self.zeros.iter().map(|z| z.iter().map(|c| c.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "params": {
                "outer": self.params.outer,
                "max_shells": self.params.max_shells,
                "min_shells": self.params.min_shells,
                "width_floor": self.params.width_floor,
                "bulk_nodes": self.params.bulk_nodes,
                "band": self.params.band,
            },
            "estimates": self.estimates.iter().map(|e| json!({
                "p": e.exponent,
                "verdict": e.verdict.label(),
                "partial_integral": e.partial_integral,
                "per_zero": e.per_zero.iter().map(|s| json!({
                    "zero": s.zero,
                    "decay": s.decay,
                    "verdict": s.verdict.label(),
                    "shells": s.shells.len(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Rows `zero,p,shell,radius,sum`.
    pub fn shell_rows(&self) -> Vec<(usize, f64, usize, f64, f64)> {
        let mut rows = Vec::new();
        for e in &self.estimates {
            for s in &e.per_zero {
                for (k, &(r, v)) in s.shells.iter().enumerate() {
                    rows.push((s.zero, e.exponent, k, r, v));
                }
            }
        }
        rows
    }
}

/// Dense coefficients `rows[b][a]` of `x1^a x2^b` for fast evaluation.
struct Dense {
    rows: Vec<Vec<Complex64>>,
}

impl Dense {
    fn new(p: &Polynomial) -> Self {
        let (d1, d2) = (p.degree_in(0) as usize, p.degree_in(1) as usize);
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); d1 + 1]; d2 + 1];
        for (m, c) in p.terms() {
            rows[m.0[1] as usize][m.0[0] as usize] = c.to_c64();
        }
        Dense { rows }
    }

    /// Univariate coefficients in `x1` at fixed `x2`.
    fn slice(&self, x2: f64) -> Vec<Complex64> {
        let n = self.rows.first().map_or(0, |r| r.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for row in self.rows.iter().rev() {
            for (o, c) in out.iter_mut().zip(row) {
                *o = *o * x2 + c;
            }
        }
        out
    }
}

fn horner2(c: &[Complex64], x: f64) -> (Complex64, Complex64) {
    let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// `|d/dz1 (q/p)|` in a Cayley chart, including the Jacobian factor.
struct ChartIntegrand {
    num: Dense,
    den: Dense,
}

impl ChartIntegrand {
    /// Values `(weight, |d/dz1 f|)` along the line `x2 = const`, `x1` in `[-1, 1]`,
    /// graded towards the poles of `q/p` near the real axis.
    fn line(&self, x2: f64) -> Vec<(f64, f64)> {
        let qs = self.num.slice(x2);
        let ps = self.den.slice(x2);
        let mut cuts = vec![-1.0, 1.0];
        for r in aberth(&ps) {
            if r.re.abs() > 1.5 || r.im.abs() > 0.5 {
                continue;
            }
            let w = r.im.abs().max(1e-300);
            let mut h = w / 4.0;
            while h < 4.0 {
                cuts.push(r.re - h);
                cuts.push(r.re + h);
                h *= 2.0;
            }
            cuts.push(r.re);
        }
        let mut cuts: Vec<f64> = cuts.into_iter().filter(|c| (-1.0..=1.0).contains(c)).collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let mut out = Vec::with_capacity(8 * cuts.len());
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            if half <= 0.0 {
                continue;
            }
            for (x, wt) in GL8_X.iter().zip(&GL8_W) {
                let x1 = mid + half * x;
                let (q, dq) = horner2(&qs, x1);
                let (p, dp) = horner2(&ps, x1);
                let d = (dq * p - q * dp) / (p * p);
                let jac = (1.0 + x1 * x1) / 2.0;
                // |dz1| |dz2| = 4 dx1 dx2 / ((1 + x1^2)(1 + x2^2))
                let measure = 4.0 / ((1.0 + x1 * x1) * (1.0 + x2 * x2));
                out.push((wt * half * measure, d.norm() * jac));
            }
        }
        out
    }
}

fn fit_decay(sums: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        sums.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(s, &v)| (s as f64, v.log2())).collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let tail = &pts[pts.len() / 2..];
    let tail = if tail.len() < 3 { &pts[..] } else { tail };
    let n = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in tail {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    -num / den
}

fn classify(decay: f64, band: f64) -> Classification {
    if decay > band {
        Classification::Finite
    } else if decay < -band {
        Classification::Divergent
    } else {
        Classification::Borderline
    }
}

/// Estimate the integrability of `d/dz1 (q/p)` on the torus for each exponent.
///
/// Near every zero the integral is split into dyadic shells in the second coordinate
/// of the Cayley chart; the inner integral is graded towards the poles of `q/p`.
/// Shell sums decaying like `2^{-e s}` with `e > band` mean finite, `e < -band` divergent.
pub fn integrability_cutoff_estimate(
    q: &Polynomial,
    p: &Polynomial,
    exponents: &[f64],
    params: QuadratureParams,
) -> Result<CutoffReport> {
    let zeros = torus_zeros(p)?;
    let n = common_degree(&[p, q]);
    let proportional = is_multiple(q, p);
    let mut contacts = Vec::new();
    for tau in &zeros {
        contacts.push(analyze_zero(p, tau)?.contact);
    }
    let charts: Vec<ChartIntegrand> = zeros
        .iter()
        .map(|tau| {
            Ok(ChartIntegrand { num: Dense::new(&cayley_at(q, tau, &n)?), den: Dense::new(&cayley_at(p, tau, &n)?) })
        })
        .collect::<Result<_>>()?;

    // per zero: per shell, the list of (weight, value)
    let mut shell_data: Vec<Vec<(f64, Vec<(f64, f64)>)>> = Vec::new();
    for (j, chart) in charts.iter().enumerate() {
        let k = contacts[j].max(2) as f64;
        let depth = ((params.outer / params.width_floor.powf(1.0 / (k - 1.0))).log2().floor() as usize)
            .clamp(params.min_shells, params.max_shells);
        let shells: Vec<(f64, Vec<(f64, f64)>)> = (0..depth)
            .into_par_iter()
            .map(|s| {
                let r = params.outer * 0.5f64.powi(s as i32);
                let mut vals = Vec::new();
                for (u, wu) in GL8_X.iter().zip(&GL8_W) {
                    let t = 0.5 + 0.5 * u;
                    let x2 = r * 0.5f64.powf(t);
                    let dx = 0.5 * wu * x2 * std::f64::consts::LN_2;
                    for sign in [1.0, -1.0] {
                        for (w, v) in chart.line(sign * x2) {
                            vals.push((w * dx, v));
                        }
                    }
                }
                (r, vals)
            })
            .collect();
        shell_data.push(shells);
    }

    let bulk = bulk_values(q, p, &zeros, params.outer, params.bulk_nodes);

    let mut estimates = Vec::new();
    for &e in exponents {
        let mut per_zero = Vec::new();
        let mut total: f64 = bulk.iter().map(|(w, v)| w * v.powf(e)).sum();
        for (j, shells) in shell_data.iter().enumerate() {
            let sums: Vec<(f64, f64)> =
                shells.iter().map(|(r, vals)| (*r, vals.iter().map(|(w, v)| w * v.powf(e)).sum())).collect();
            total += sums.iter().map(|s| s.1).sum::<f64>();
            let (decay, verdict) = if proportional {
                (f64::INFINITY, Classification::Finite)
            } else {
                let d = fit_decay(&sums.iter().map(|s| s.1).collect::<Vec<_>>());
                (d, classify(d, params.band))
            };
            per_zero.push(ShellSeries { zero: j, exponent: e, shells: sums, decay, verdict });
        }
        let verdict = if per_zero.iter().any(|s| s.verdict == Classification::Divergent) {
            Classification::Divergent
        } else if per_zero.iter().any(|s| s.verdict == Classification::Borderline) {
            Classification::Borderline
        } else {
            Classification::Finite
        };
        estimates.push(CutoffEstimate { exponent: e, verdict, partial_integral: total, per_zero });
    }
    Ok(CutoffReport { zeros, estimates, params })
}

/// `q = c p` for a constant `c`, so the derivative vanishes identically.
fn is_multiple(q: &Polynomial, p: &Polynomial) -> bool {
    let Some((m, c)) = p.leading_term() else { return false };
    let ratio = Coefficient::Approx(q.coeff(&m.0).to_c64() / c.to_c64());
    let diff = &q.to_approx() - &p.to_approx().scale(&ratio);
    diff.max_abs_coeff() <= 1e-12 * q.max_abs_coeff().max(1.0)
}

/// Tensor Gauss rule on the torus outside the shell neighbourhoods: `(weight, |d/dz1 f|)`.
fn bulk_values(
    q: &Polynomial,
    p: &Polynomial,
    zeros: &[Vec<Coefficient>],
    outer: f64,
    nodes: usize,
) -> Vec<(f64, f64)> {
    let (q1, p1) = (q.derivative(0).to_approx(), p.derivative(0).to_approx());
    let (qa, pa) = (q.to_approx(), p.to_approx());
    let panels = nodes.div_ceil(8).max(1);
    let h = 2.0 * std::f64::consts::PI / panels as f64;
    let mut angles = Vec::new();
    for k in 0..panels {
        let mid = -std::f64::consts::PI + h * (k as f64 + 0.5);
        for (x, w) in GL8_X.iter().zip(&GL8_W) {
            angles.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    let taus: Vec<[f64; 2]> = zeros.iter().map(|t| [t[0].to_c64().arg(), t[1].to_c64().arg()]).collect();
    // a point belongs to a chart window when |x1| <= 1 and |x2| <= outer, x = tan(angle / 2)
    let inside = |a1: f64, a2: f64| {
        taus.iter().any(|t| {
            let d1 = wrap(a1 - t[0]);
            let d2 = wrap(a2 - t[1]);
            (d1 / 2.0).tan().abs() <= 1.0 && (d2 / 2.0).tan().abs() <= outer
        })
    };
    let mut out = Vec::new();
    for &(a1, w1) in &angles {
        for &(a2, w2) in &angles {
            if inside(a1, a2) {
                continue;
            }
            let z = [Complex64::from_polar(1.0, a1), Complex64::from_polar(1.0, a2)];
            let (pv, qv) = (pa.eval_c64(&z), qa.eval_c64(&z));
            let d = (q1.eval_c64(&z) * pv - qv * p1.eval_c64(&z)) / (pv * pv);
            out.push((w1 * w2, d.norm()));
        }
    }
    out
}

fn wrap(a: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut x = a % tau;
    if x > std::f64::consts::PI {
        x -= tau;
    } else if x < -std::f64::consts::PI {
        x += tau;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse2(s).unwrap()
    }

    fn pt(x: i64, y: i64) -> Vec<Coefficient> {
        vec![Coefficient::int(x), Coefficient::int(y)]
    }

    fn show(v: &[Index]) -> Vec<String> {
        v.iter().map(|i| i.to_string()).collect()
    }

    #[test]
    fn index_lists() {
        assert_eq!(show(&indices_for_contact_order(2)), ["3/2", "3", "inf"]);
        assert_eq!(show(&indices_for_contact_order(4)), ["5/4", "5/3", "5/2", "5", "inf"]);
    }

    #[test]
    fn line_profile() {
        let f = p("2 - z1 - z2");
        assert_eq!(torus_zeros(&f).unwrap(), vec![pt(1, 1)]);
        assert_eq!(intersection_multiplicity(&f, &pt(1, 1)).unwrap(), 2);
        assert_eq!(quotient_multiplicity(&f, &pt(1, 1)).unwrap(), 2);
        let prof = derivative_integrability_indices(&f).unwrap();
        assert_eq!(show(&prof.index_values()), ["3/2", "3", "inf"]);
        assert!(prof.count_bound_holds() && !prof.upper_bounded_only);
    }

    #[test]
    fn contact_four_profile() {
        let f = p("4 - 3*z1 - z2 - z1*z2 + z1^2");
        assert_eq!(intersection_multiplicity(&f, &pt(1, 1)).unwrap(), 4);
        let prof = derivative_integrability_indices(&f).unwrap();
        assert_eq!(show(&prof.index_values()), ["5/4", "5/3", "5/2", "5", "inf"]);
    }

    #[test]
    fn two_zero_profile() {
        let f = p("4 - z2 + z1*z2 - 3*z1^2*z2 - z1^3*z2");
        let prof = derivative_integrability_indices(&f).unwrap();
        let k: Vec<u32> = prof.zeros.iter().map(|z| z.contact).collect();
        assert_eq!(prof.zeros.iter().map(|z| z.point.clone()).collect::<Vec<_>>(), vec![pt(1, 1), pt(-1, 1)]);
        assert_eq!(k, [2, 4]);
        assert_eq!(prof.zeros[1].multiplicity, 4);
        assert_eq!(quotient_multiplicity(&f, &pt(-1, 1)).unwrap(), 4);
        assert_eq!(show(&prof.index_values()), ["5/4", "3/2", "5/3", "5/2", "3", "5", "inf"]);
        let r = p("(1 + z1)*(1 + z1*z2)");
        assert!(in_reflection_ideal(&r, &f, &pt(-1, 1)).unwrap());
        assert!(!r.eval(&pt(1, 1)).is_zero());
        // the correction used for the zero at (1,1) lies in the ideal at (-1,1)
        assert!(in_reflection_ideal(&prof.corrections[0], &f, &pt(-1, 1)).unwrap());
        assert!(!prof.corrections[0].eval(&pt(1, 1)).is_zero());
    }

    #[test]
    fn quadrature_straddles_three_halves() {
        let f = p("2 - z1 - z2");
        let ft = reflect(&f, Domain::Disk, None).unwrap();
        let rep = integrability_cutoff_estimate(&ft, &f, &[1.4, 1.6], QuadratureParams::default()).unwrap();
        assert_eq!(rep.estimates[0].verdict, Classification::Finite, "{:?}", rep.estimates[0].per_zero[0].decay);
        assert_eq!(rep.estimates[1].verdict, Classification::Divergent, "{:?}", rep.estimates[1].per_zero[0].decay);
        let sq = &p("(z2 - 1)^2") * &ft;
        let rep = integrability_cutoff_estimate(&sq, &f, &[10.0], QuadratureParams::default()).unwrap();
        assert_eq!(rep.estimates[0].verdict, Classification::Finite);
        let rep = integrability_cutoff_estimate(&f, &f, &[3.0], QuadratureParams::default()).unwrap();
        assert_eq!(rep.estimates[0].verdict, Classification::Finite);
    }

    #[test]
    fn predicted_decay_rate() {
        // shell sums decay like 2^{-e s} with e = (K+1) - (K-n) p
        let f = p("2 - z1 - z2");
        let ft = reflect(&f, Domain::Disk, None).unwrap();
        let rep = integrability_cutoff_estimate(&ft, &f, &[1.0, 1.25], QuadratureParams::default()).unwrap();
        for (est, want) in rep.estimates.iter().zip([1.0, 0.5]) {
            assert!((est.per_zero[0].decay - want).abs() < 0.03, "{} vs {want}", est.per_zero[0].decay);
        }
    }
}
