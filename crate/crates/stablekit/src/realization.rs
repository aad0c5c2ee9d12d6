//! Positive-imaginary-part realizations `g(w) = c - <(w_P + S)^{-1} alpha, beta>` with
//! `w_P = w1 P + w2 (I - P)`: validation, evaluation, the kernel/range split of `S`
//! and the horn slopes carried by the compression of `P` to `Ker(S)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};

type C = Complex64;

const RANK_GAP: f64 = 1e3;

/// A complex number as `{ "re": x, "im": y }`; plain numbers are accepted on input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexJson(pub C);

impl Serialize for ComplexJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        json!({ "re": self.0.re, "im": self.0.im }).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Value::deserialize(d)?;
        let num = |x: Option<&Value>| -> std::result::Result<f64, D::Error> {
            match x {
                None => Ok(0.0),
                Some(x) => x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| D::Error::custom("expected a finite number")),
            }
        };
        match &v {
            Value::Number(_) => Ok(ComplexJson(C::new(num(Some(&v))?, 0.0))),
            Value::Object(m) if m.contains_key("re") && m.keys().all(|k| k == "re" || k == "im") => {
                Ok(ComplexJson(C::new(num(m.get("re"))?, num(m.get("im"))?)))
            }
            _ => Err(D::Error::custom("expected a number or {\"re\", \"im\"}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RealizationJson {
    n: usize,
    c: ComplexJson,
    alpha: Vec<ComplexJson>,
    beta: Vec<ComplexJson>,
    #[serde(rename = "S")]
    s: Vec<Vec<ComplexJson>>,
    #[serde(rename = "P")]
    p: Vec<Vec<ComplexJson>>,
}

/// Largest accepted entry magnitude in a realization.
pub const MAX_ENTRY: f64 = 1e150;

#[derive(Clone, Debug, PartialEq)]
pub struct PipRealization {
    pub c: C,
    pub alpha: DVector<C>,
    pub beta: DVector<C>,
    pub s: DMatrix<C>,
    pub p: DMatrix<C>,
}

fn matrix_from_rows(rows: &[Vec<ComplexJson>], n: usize, what: &str) -> Result<DMatrix<C>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid(format!("{what} must be {n} x {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].0))
}

fn rows_of(m: &DMatrix<C>) -> Vec<Vec<ComplexJson>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| ComplexJson(m[(i, j)])).collect()).collect()
}

impl PipRealization {
    pub fn new(c: C, alpha: DVector<C>, beta: DVector<C>, s: DMatrix<C>, p: DMatrix<C>) -> Result<Self> {
        let n = alpha.len();
        if beta.len() != n || s.shape() != (n, n) || p.shape() != (n, n) {
            return Err(Error::Invalid(format!("inconsistent dimensions for n = {n}")));
        }
        // products of entries must stay finite for the SVD and eigen solvers
        let tame = |z: &C| z.re.abs() <= MAX_ENTRY && z.im.abs() <= MAX_ENTRY;
        if !(tame(&c) && alpha.iter().chain(beta.iter()).chain(s.iter()).chain(p.iter()).all(tame)) {
            return Err(Error::Invalid(format!("entries must be finite with magnitude at most {MAX_ENTRY:e}")));
        }
        Ok(PipRealization { c, alpha, beta, s, p })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: RealizationJson = serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
        if j.alpha.len() != j.n || j.beta.len() != j.n {
            return Err(Error::Invalid(format!("alpha and beta must have length {}", j.n)));
        }
        let alpha = DVector::from_iterator(j.n, j.alpha.iter().map(|z| z.0));
        let beta = DVector::from_iterator(j.n, j.beta.iter().map(|z| z.0));
        PipRealization::new(j.c.0, alpha, beta, matrix_from_rows(&j.s, j.n, "S")?, matrix_from_rows(&j.p, j.n, "P")?)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(RealizationJson {
            n: self.n(),
            c: ComplexJson(self.c),
            alpha: self.alpha.iter().map(|&z| ComplexJson(z)).collect(),
            beta: self.beta.iter().map(|&z| ComplexJson(z)).collect(),
            s: rows_of(&self.s),
            p: rows_of(&self.p),
        })
        .expect("realization serialises")
    }

    /// The block matrix `T = [[c, beta*], [alpha, S]]`.
    pub fn t_matrix(&self) -> DMatrix<C> {
        let n = self.n();
        let mut t = DMatrix::zeros(n + 1, n + 1);
        t[(0, 0)] = self.c;
        for k in 0..n {
            t[(0, k + 1)] = self.beta[k].conj();
            t[(k + 1, 0)] = self.alpha[k];
        }
        t.view_mut((1, 1), (n, n)).copy_from(&self.s);
        t
    }

    fn w_p(&self, w: [C; 2]) -> DMatrix<C> {
        let id = DMatrix::<C>::identity(self.n(), self.n());
        &self.p * w[0] + (&id - &self.p) * w[1]
    }

    /// A random valid realization whose `S` has a kernel of dimension `kernel_dim`,
    /// built from a stream of uniform samples in `[0, 1)`.
    pub fn random_with(n: usize, kernel_dim: usize, next: &mut impl FnMut() -> f64) -> Self {
        assert!(kernel_dim <= n);
        let r = n - kernel_dim;
        let mut g = |scale: f64| C::new(scale * (2.0 * next() - 1.0), scale * (2.0 * next() - 1.0));
        // [[c, b*], [a, S_hat]] = H + i G G*  on the range block
        let h = DMatrix::from_fn(r + 1, r + 1, |_, _| g(1.0));
        let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
        let gm = DMatrix::from_fn(r + 1, r + 1, |_, _| g(1.0));
        let t_small = h + (&gm * gm.adjoint()) * C::new(0.0, 1.0);
        let u = random_unitary(n, &mut g);
        let mut s_block = DMatrix::zeros(n, n);
        s_block.view_mut((0, 0), (r, r)).copy_from(&t_small.view((1, 1), (r, r)));
        let mut a = DVector::zeros(n);
        let mut b = DVector::zeros(n);
        for k in 0..r {
            a[k] = t_small[(k + 1, 0)];
            b[k] = t_small[(0, k + 1)].conj();
        }
        let s = &u * s_block * u.adjoint();
        let q = random_unitary(n, &mut g);
        let rank_p = ((next() * (n + 1) as f64) as usize).min(n);
        let qk = q.columns(0, rank_p).into_owned();
        let p = &qk * qk.adjoint();
        PipRealization { c: t_small[(0, 0)], alpha: &u * a, beta: &u * b, s, p }
    }
}

fn random_unitary(n: usize, g: &mut impl FnMut(f64) -> C) -> DMatrix<C> {
    let m = DMatrix::from_fn(n, n, |_, _| g(1.0));
    m.qr().q()
}

fn hermitian_min_eig(m: &DMatrix<C>) -> f64 {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `Im M = (M - M*) / 2i`.
fn im_part(m: &DMatrix<C>) -> DMatrix<C> {
    (m - m.adjoint()) * C::new(0.0, -0.5)
}

/// `g(w)` by a linear solve with the global resolvent.
pub fn eval_realization(r: &PipRealization, w: [C; 2]) -> Result<C> {
    let m = r.w_p(w) + &r.s;
    let x = m.lu().solve(&r.alpha).ok_or_else(|| Error::Numerical("w_P + S is singular".into()))?;
    Ok(r.c - r.beta.dotc(&x))
}

/// Deterministic sample points in the product of upper half-planes, spread over scales.
pub fn half_plane_samples(count: usize) -> Vec<[C; 2]> {
    // additive recurrence with the plastic-number generalisation in four dimensions
    let phi = 1.167_303_978_261_418_7f64;
    let a: Vec<f64> = (1..=4).map(|k| 1.0 / phi.powi(k)).collect();
    (0..count)
        .map(|k| {
            let u: Vec<f64> = a.iter().map(|ak| (0.5 + ak * (k + 1) as f64).fract()).collect();
            let x = |t: f64| (std::f64::consts::PI * (t - 0.5)).tan().clamp(-1e6, 1e6);
            let y = |t: f64| 10f64.powf(-8.0 + 12.0 * t);
            [C::new(x(u[0]), y(u[1])), C::new(x(u[2]), y(u[3]))]
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub im_t_min_eigenvalue: f64,
    pub projection_error: f64,
    pub samples: usize,
    pub min_im_g: f64,
    /// `g(it, it)` for decreasing `t`, as `(t, value)`.
    pub diagonal: Vec<(f64, C)>,
    /// Limit at the origin when it exists.
    pub limit: Option<C>,
    /// `beta` or `alpha` has a component in `Ker(S)`, so the diagonal limit blows up.
    pub divergent: bool,
    pub tol: f64,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.im_t_min_eigenvalue >= -self.tol && self.projection_error <= self.tol && self.min_im_g >= -self.tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid(),
            "im_T_min_eigenvalue": self.im_t_min_eigenvalue,
            "projection_error": self.projection_error,
            "samples": self.samples,
            "min_im_g": self.min_im_g,
            "limit": self.limit.map(|z| json!({ "re": z.re, "im": z.im })),
            "divergent": self.divergent,
            "diagonal": self.diagonal.iter().map(|(t, z)| json!({ "t": t, "re": z.re, "im": z.im })).collect::<Vec<_>>(),
            "tol": self.tol,
        })
    }
}

/// Check `Im T >= 0`, the projection property and the Pick property on `samples`
/// points; report the diagonal limit at the origin.
pub fn validate_pip(r: &PipRealization, samples: usize, tol: f64) -> Result<ValidationReport> {
    let im_t_min_eigenvalue = hermitian_min_eig(&im_part(&r.t_matrix()));
    let proj = (&r.p * &r.p - &r.p).norm().max((&r.p - r.p.adjoint()).norm());
    let pts = half_plane_samples(samples);
    let min_im_g = pts
        .par_iter()
        .map(|w| eval_realization(r, *w).map(|g| g.im).unwrap_or(f64::NEG_INFINITY))
        .reduce(|| f64::INFINITY, f64::min);
    let diagonal: Vec<(f64, C)> = (1..=8)
        .map(|k| {
            let t = 10f64.powi(-k);
            let it = C::new(0.0, t);
            (t, eval_realization(r, [it, it]).unwrap_or(C::new(f64::NAN, f64::NAN)))
        })
        .collect();
    let (divergent, limit) = match kernel_split(&r.s) {
        Ok(sp) => {
            let kb = sp.kernel.adjoint();
            let leak = (&kb * &r.beta).norm().max((&kb * &r.alpha).norm());
            let scale = r.alpha.norm().max(r.beta.norm()).max(1.0);
            if leak > 1e-9 * scale {
                (true, None)
            } else {
                let (a_hat, b_hat) = (sp.range.adjoint() * &r.alpha, sp.range.adjoint() * &r.beta);
                let s_hat = sp.range.adjoint() * &r.s * &sp.range;
                let lim = if s_hat.nrows() == 0 {
                    Some(r.c)
                } else {
                    s_hat.lu().solve(&a_hat).map(|x| r.c - b_hat.dotc(&x))
                };
                (false, lim)
            }
        }
        Err(_) => (false, None),
    };
    Ok(ValidationReport { im_t_min_eigenvalue, projection_error: proj, samples, min_im_g, diagonal, limit, divergent, tol })
}

struct Split {
    range: DMatrix<C>,
    kernel: DMatrix<C>,
    singular_values: Vec<f64>,
}

/// Orthonormal bases of `Ker(S)^perp` and `Ker(S)` from the SVD, with the rank decided
/// by a singular-value gap of at least `RANK_GAP^2`.
fn kernel_split(s: &DMatrix<C>) -> Result<Split> {
    let n = s.nrows();
    if n == 0 {
        return Ok(Split { range: DMatrix::zeros(0, 0), kernel: DMatrix::zeros(0, 0), singular_values: vec![] });
    }
    let svd = s.clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let top = sv[0].max(1.0);
    // below `zero_tol` is zero; above `zero_tol * RANK_GAP^2` is nonzero; between is undecided
    let zero_tol = 1e-12 * top;
    let sure = zero_tol * RANK_GAP * RANK_GAP;
    let rank = sv.iter().filter(|&&x| x > zero_tol).count();
    let sure_rank = sv.iter().filter(|&&x| x > sure).count();
    if rank != sure_rank {
        return Err(Error::Numerical(format!("ambiguous rank of S: candidates {sure_rank} and {rank} (singular values {sv:?})")));
    }
    let col = |k: usize| v_t.row(order[k]).adjoint();
    let basis = |ks: std::ops::Range<usize>| {
        let mut m = DMatrix::zeros(n, ks.len());
        for (j, k) in ks.enumerate() {
            m.set_column(j, &col(k));
        }
        m
    };
    let (range, kernel) = (basis(0..rank), basis(rank..n));
    Ok(Split { range, kernel, singular_values: sv })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HornSlope {
    Finite(f64),
    /// `t = 0`: the trivial horn `|x2| <= B x1^2`.
    Zero,
    /// `t = 1`: the trivial horn `|x1| <= B x2^2`.
    Infinite,
}

impl HornSlope {
    pub fn from_eigenvalue(t: f64, tol: f64) -> Self {
        if t.abs() <= tol {
            HornSlope::Zero
        } else if (1.0 - t).abs() <= tol {
            HornSlope::Infinite
        } else {
            HornSlope::Finite(-t / (1.0 - t))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            HornSlope::Finite(a) => *a,
            HornSlope::Zero => 0.0,
            HornSlope::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalSplit {
    pub range_basis: DMatrix<C>,
    pub kernel_basis: DMatrix<C>,
    pub singular_values: Vec<f64>,
    /// Compression of `S` to `Ker(S)^perp`.
    pub s_hat: DMatrix<C>,
    /// Compression of `P` to `Ker(S)`.
    pub y: DMatrix<C>,
    pub y_eigenvalues: Vec<f64>,
    pub horn_slopes: Vec<HornSlope>,
    /// `max ||S* k||` over the kernel basis.
    pub kernel_symmetry_error: f64,
    /// Largest coordinate of `alpha`, `beta` on the kernel basis.
    pub range_leak: f64,
    /// Smallest singular value of `S_hat` and the smallest eigenvalue of `Im S_hat`.
    pub s_hat_min_singular: f64,
    pub s_hat_im_min_eigenvalue: f64,
    /// Constants of the horn argument: `||S_hat^{-1}||` and the smallest gap between
    /// distinct eigenvalues of `Y` (0 when `Y` has at most one distinct eigenvalue).
    pub s_hat_inverse_norm: f64,
    pub y_eigen_gap: f64,
}

impl LocalSplit {
    pub fn invariants_hold(&self, tol: f64) -> bool {
        self.kernel_symmetry_error <= tol && self.range_leak <= tol && self.s_hat_im_min_eigenvalue >= -tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.range_basis.ncols(),
            "kernel_dim": self.kernel_basis.ncols(),
            "singular_values": self.singular_values,
            "Y_eigenvalues": self.y_eigenvalues,
            "horn_slopes": self.horn_slopes.iter().map(|h| match h {
                HornSlope::Infinite => json!("inf"),
                other => json!(other.value()),
            }).collect::<Vec<_>>(),
            "kernel_symmetry_error": self.kernel_symmetry_error,
            "range_leak": self.range_leak,
            "S_hat_min_singular": self.s_hat_min_singular,
            "S_hat_im_min_eigenvalue": self.s_hat_im_min_eigenvalue,
            "S_hat_inverse_norm": self.s_hat_inverse_norm,
            "Y_eigen_gap": self.y_eigen_gap,
        })
    }
}

/// Split `C^n = Ker(S)^perp + Ker(S)` and compress `S` and `P`.
pub fn local_split(r: &PipRealization) -> Result<LocalSplit> {
    let sp = kernel_split(&r.s)?;
    let (u_r, u_k) = (&sp.range, &sp.kernel);
    let s_hat = u_r.adjoint() * &r.s * u_r;
    let y = u_k.adjoint() * &r.p * u_k;
    let mut y_eigenvalues: Vec<f64> =
        if y.nrows() == 0 { vec![] } else { ((&y + y.adjoint()) * C::new(0.5, 0.0)).symmetric_eigenvalues().iter().cloned().collect() };
    y_eigenvalues.sort_by(f64::total_cmp);
    let horn_slopes = y_eigenvalues.iter().map(|&t| HornSlope::from_eigenvalue(t, 1e-9)).collect();
    let kernel_symmetry_error =
        (0..u_k.ncols()).map(|k| (r.s.adjoint() * u_k.column(k)).norm()).fold(0.0, f64::max);
    let range_leak = (u_k.adjoint() * &r.alpha).camax().max((u_k.adjoint() * &r.beta).camax());
    let (s_hat_min_singular, s_hat_inverse_norm) = if s_hat.nrows() == 0 {
        (f64::INFINITY, 0.0)
    } else {
        let sv = s_hat.singular_values();
        let m = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        (m, 1.0 / m)
    };
    let s_hat_im_min_eigenvalue = if s_hat.nrows() == 0 { 0.0 } else { hermitian_min_eig(&im_part(&s_hat)) };
    let mut distinct = y_eigenvalues.clone();
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let y_eigen_gap = distinct.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let y_eigen_gap = if y_eigen_gap.is_finite() { y_eigen_gap } else { 0.0 };
    Ok(LocalSplit {
        range_basis: sp.range,
        kernel_basis: sp.kernel,
        singular_values: sp.singular_values,
        s_hat,
        y,
        y_eigenvalues,
        horn_slopes,
        kernel_symmetry_error,
        range_leak,
        s_hat_min_singular,
        s_hat_im_min_eigenvalue,
        s_hat_inverse_norm,
        y_eigen_gap,
    })
}

/// `g(w)` on the split: `c - <(S_hat + w22 - w21 w11^{-1} w12)^{-1} alpha_hat, beta_hat>`,
/// block 1 being `Ker(S)`.
///
/// The Schur complement is eliminated inside one pivoted LU solve of
/// `[[w11, w12], [w21, w22 + S_hat]] (y, x) = (0, alpha_hat)`; forming it explicitly loses
/// up to `log10(|w1| / |w2|)` digits to cancellation.
pub fn eval_local(r: &PipRealization, split: &LocalSplit, w: [C; 2]) -> Result<C> {
    let (u_r, u_k) = (&split.range_basis, &split.kernel_basis);
    let (nr, nk) = (u_r.ncols(), u_k.ncols());
    if nr == 0 {
        return Ok(r.c);
    }
    let wp = r.w_p(w);
    if nk > 0 {
        let w11 = u_k.adjoint() * &wp * u_k;
        let sv = w11.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if !(lo > 1e-14 * hi) {
            return Err(Error::Numerical("w11 is singular at this point".into()));
        }
    }
    let mut u = DMatrix::zeros(r.n(), nk + nr);
    u.view_mut((0, 0), (r.n(), nk)).copy_from(u_k);
    u.view_mut((0, nk), (r.n(), nr)).copy_from(u_r);
    let mut m = u.adjoint() * &wp * &u;
    let mut corner = m.view_mut((nk, nk), (nr, nr));
    corner += &split.s_hat;
    let mut rhs = DVector::zeros(nk + nr);
    rhs.rows_mut(nk, nr).copy_from(&(u_r.adjoint() * &r.alpha));
    let b_hat = u_r.adjoint() * &r.beta;
    let z = m.lu().solve(&rhs).ok_or_else(|| Error::Numerical("local block is singular".into()))?;
    Ok(r.c - b_hat.dotc(&z.rows(nk, nr).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_example() -> PipRealization {
        let one = DVector::from_element(1, C::new(1.0, 0.0));
        PipRealization::new(
            C::new(0.0, 1.0),
            one.clone(),
            one,
            DMatrix::from_element(1, 1, C::new(0.0, 1.0)),
            DMatrix::from_element(1, 1, C::new(1.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn scalar_value_and_limit() {
        let r = scalar_example();
        let i = C::new(0.0, 1.0);
        let g = eval_realization(&r, [i, i]).unwrap();
        assert!((g - C::new(0.0, 1.5)).norm() < 1e-15);
        let w = [C::new(0.3, 0.2), C::new(-1.0, 4.0)];
        let closed = i - C::new(1.0, 0.0) / (w[0] + i);
        assert!((eval_realization(&r, w).unwrap() - closed).norm() < 1e-14);
        let v = validate_pip(&r, 500, 1e-10).unwrap();
        assert!(v.valid() && !v.divergent);
        assert!((v.limit.unwrap() - C::new(0.0, 2.0)).norm() < 1e-12);
        assert!((v.diagonal.last().unwrap().1 - C::new(0.0, 2.0)).norm() < 1e-6);
    }

    #[test]
    fn constant_function() {
        let z = DVector::zeros(2);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(0.0, 1.0), C::new(1.0, 2.0)]));
        let p = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]));
        let good = PipRealization::new(C::new(0.5, 0.25), z.clone(), z.clone(), s.clone(), p.clone()).unwrap();
        assert!(validate_pip(&good, 200, 1e-10).unwrap().valid());
        let bad = PipRealization::new(C::new(0.5, -0.25), z.clone(), z, s, p).unwrap();
        assert!(!validate_pip(&bad, 200, 1e-10).unwrap().valid());
    }

    #[test]
    fn kernel_mass_in_beta_diverges() {
        // S = diag(i, 0); alpha = beta = (1, 1)
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(0.0, 1.0), C::new(0.0, 0.0)]));
        let p = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]));
        let ab = DVector::from_element(2, C::new(1.0, 0.0));
        let r = PipRealization::new(C::new(0.0, 1.0), ab.clone(), ab, s, p).unwrap();
        let v = validate_pip(&r, 200, 1e-10).unwrap();
        assert!(v.divergent && v.limit.is_none());
        // the kernel term behaves like -1/(it)
        let (t1, g1) = v.diagonal[5];
        let (t2, g2) = v.diagonal[6];
        assert!(((g2.norm() * t2) / (g1.norm() * t1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn invertible_s_has_no_horns() {
        let r = scalar_example();
        let sp = local_split(&r).unwrap();
        assert_eq!(sp.kernel_basis.ncols(), 0);
        assert!(sp.horn_slopes.is_empty());
        assert!(sp.invariants_hold(1e-12));
    }

    fn two_by_two(t: f64) -> PipRealization {
        // kernel spanned by e2; P = projection onto (sqrt(t), sqrt(1-t)) mixes kernel and range
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 1.0), C::new(0.0, 0.0)]));
        let v = DVector::from_vec(vec![C::new((1.0 - t).sqrt(), 0.0), C::new(t.sqrt(), 0.0)]);
        let p = &v * v.adjoint();
        let a = DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        PipRealization::new(C::new(0.0, 2.0), a.clone(), a, s, p).unwrap()
    }

    #[test]
    fn half_eigenvalue_gives_slope_minus_one() {
        let sp = local_split(&two_by_two(0.5)).unwrap();
        assert_eq!(sp.kernel_basis.ncols(), 1);
        assert!((sp.y_eigenvalues[0] - 0.5).abs() < 1e-12);
        match sp.horn_slopes[0] {
            HornSlope::Finite(a) => assert!((a + 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_eigenvalue_gives_trivial_horn() {
        let sp = local_split(&two_by_two(0.0)).unwrap();
        assert_eq!(sp.horn_slopes, vec![HornSlope::Zero]);
    }

    #[test]
    fn formulas_agree_on_split() {
        let r = two_by_two(0.3);
        let sp = local_split(&r).unwrap();
        for w in half_plane_samples(100) {
            let (g, h) = (eval_realization(&r, w).unwrap(), eval_local(&r, &sp, w).unwrap());
            assert!((g - h).norm() <= 1e-9 * g.norm().max(1.0), "{g} vs {h}");
        }
    }

    #[test]
    fn local_form_is_the_explicit_schur_complement() {
        let r = two_by_two(0.3);
        let sp = local_split(&r).unwrap();
        let w = [C::new(0.4, 0.7), C::new(-1.2, 0.3)];
        let wp = r.w_p(w);
        let (u_r, u_k) = (&sp.range_basis, &sp.kernel_basis);
        let w11 = u_k.adjoint() * &wp * u_k;
        let sc = u_r.adjoint() * &wp * u_r - u_r.adjoint() * &wp * u_k * w11.try_inverse().unwrap() * u_k.adjoint() * &wp * u_r;
        let x = (&sp.s_hat + sc).try_inverse().unwrap() * (u_r.adjoint() * &r.alpha);
        let g = r.c - (u_r.adjoint() * &r.beta).dotc(&x);
        assert!((eval_local(&r, &sp, w).unwrap() - g).norm() < 1e-13);
    }

    #[test]
    fn ambiguous_rank_is_reported() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 0.0), C::new(1e-8, 0.0)]));
        let z = DVector::zeros(2);
        let r = PipRealization::new(C::new(0.0, 1.0), z.clone(), z, s, DMatrix::identity(2, 2)).unwrap();
        let e = local_split(&r).unwrap_err().to_string();
        assert!(e.contains("ambiguous"), "{e}");
    }

    #[test]
    fn json_roundtrip() {
        let r = two_by_two(0.25);
        let text = r.to_json().to_string();
        assert_eq!(PipRealization::from_json_str(&text).unwrap(), r);
        let plain = r#"{"n":1,"c":{"re":0,"im":1},"alpha":[1],"beta":[1],"S":[[{"re":0,"im":1}]],"P":[[1]]}"#;
        assert_eq!(PipRealization::from_json_str(plain).unwrap(), scalar_example());
        assert!(PipRealization::from_json_str(r#"{"n":2,"c":0,"alpha":[1],"beta":[1],"S":[[1]],"P":[[1]]}"#).is_err());
    }
}
