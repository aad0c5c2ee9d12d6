//! Homogeneous expansion at a point, unimodular normalisation of the lowest part,
//! tangent slopes of binary forms and the interlacing test between the real and
//! imaginary parts.

use num_complex::Complex64;
use num_rational::BigRational;

use crate::coeff::{Coefficient, GaussRat};
use crate::error::{Error, Result};
use crate::poly::univariate::UPoly;
use crate::poly::{split_real_imag, Polynomial};

/// `p(center + z) = sum_{j >= M} P_j(z)`.
#[derive(Clone, Debug)]
pub struct HomogeneousDecomposition {
    pub center: Vec<Coefficient>,
    pub order: u32,
    /// `parts[j]` is the homogeneous part of degree `order + j`.
    pub parts: Vec<Polynomial>,
}

impl HomogeneousDecomposition {
    /// Homogeneous part of total degree `j` (zero outside the stored range).
    pub fn part(&self, j: u32) -> Polynomial {
        if j < self.order {
            return Polynomial::zero(self.parts[0].vars());
        }
        self.parts.get((j - self.order) as usize).cloned().unwrap_or_else(|| Polynomial::zero(self.parts[0].vars()))
    }

    pub fn lowest(&self) -> &Polynomial {
        &self.parts[0]
    }

    /// Sum of all parts, i.e. the shifted polynomial.
    pub fn shifted(&self) -> Polynomial {
        self.parts.iter().fold(Polynomial::zero(self.parts[0].vars()), |a, b| &a + b)
    }
}

/// Expand `p` around `center`. The center must be a zero of `p`.
pub fn decompose(p: &Polynomial, center: &[Coefficient]) -> Result<HomogeneousDecomposition> {
    if center.len() != p.nvars() {
        return Err(Error::VariableMismatch { expected: p.nvars(), found: center.len() });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let shifted = p.shift(center);
    let order = shifted.order().unwrap();
    if order == 0 {
        let v = shifted.coeff(&vec![0; p.nvars()]);
        if !v.is_negligible(1e-12 * p.max_abs_coeff().max(1.0)) {
            return Err(Error::NotAZero);
        }
    }
    let shifted = if order == 0 { shifted.clean(1e-13) } else { shifted };
    decompose_shifted(&shifted, center)
}

/// Decomposition of a polynomial already centred at the origin (any order, zero allowed).
pub fn decompose_shifted(shifted: &Polynomial, center: &[Coefficient]) -> Result<HomogeneousDecomposition> {
    let order = shifted.order().ok_or(Error::ZeroPolynomial)?;
    let top = shifted.degree().unwrap();
    let parts = (order..=top).map(|j| shifted.homogeneous_part(j)).collect();
    Ok(HomogeneousDecomposition { center: center.to_vec(), order, parts })
}

/// Normalised decomposition: the parts of `p / c`, where `c` is the coefficient of
/// `z2^M` in the lowest part (or its leading coefficient), so that the lowest part
/// is real. `mu = conj(c)/|c|` is the unimodular constant; the parts differ from
/// `mu * P_j` by the positive factor `1/|c|`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub mu: Coefficient,
    pub scale: Coefficient,
    pub decomposition: HomogeneousDecomposition,
}

impl Normalized {
    pub fn real_part(&self, j: u32) -> Polynomial {
        split_real_imag(&self.decomposition.part(j)).0
    }

    pub fn imag_part(&self, j: u32) -> Polynomial {
        split_real_imag(&self.decomposition.part(j)).1
    }

    /// The whole normalised polynomial, centred at the origin.
    pub fn shifted(&self) -> Polynomial {
        self.decomposition.shifted()
    }
}

fn unimodular_of(c: &Coefficient) -> Coefficient {
    match c {
        Coefficient::Exact(g) => match GaussRat::rational_sqrt(&g.norm_sqr()) {
            Some(r) => {
                let conj = g.conj();
                Coefficient::Exact(GaussRat::new(&conj.re / &r, &conj.im / &r))
            }
            None => {
                let z = g.to_c64();
                Coefficient::Approx(z.conj() / z.norm())
            }
        },
        Coefficient::Approx(z) => Coefficient::Approx(z.conj() / z.norm()),
    }
}

/// Find the unimodular multiple that makes the lowest homogeneous part real.
pub fn normalize_lowest(dec: &HomogeneousDecomposition) -> Result<Normalized> {
    let low = dec.lowest();
    let m = dec.order;
    let nv = low.nvars();
    let mut pure = vec![0; nv];
    pure[nv - 1] = m;
    let c = {
        let c = low.coeff(&pure);
        if c.is_zero() {
            low.leading_term().map(|(_, c)| c.clone()).ok_or(Error::ZeroPolynomial)?
        } else {
            c
        }
    };
    let scale = c.inv().ok_or(Error::ZeroPolynomial)?;
    let scaled = low.scale(&scale);
    let tol = 1e-9 * scaled.max_abs_coeff().max(1.0);
    for (_, v) in scaled.terms() {
        let real = match v {
            Coefficient::Exact(g) => g.is_real(),
            Coefficient::Approx(z) => z.im.abs() <= tol,
        };
        if !real {
            return Err(Error::Precondition("lowest homogeneous part has no real unimodular multiple".into()));
        }
    }
    let parts = dec
        .parts
        .iter()
        .enumerate()
        .map(|(j, q)| {
            let s = q.scale(&scale);
            if j == 0 {
                s.map_coeffs(|v| v.re())
            } else {
                s
            }
        })
        .collect();
    Ok(Normalized {
        mu: unimodular_of(&c),
        scale,
        decomposition: HomogeneousDecomposition { center: dec.center.clone(), order: dec.order, parts },
    })
}

/// A tangent slope `a` of a factor `z2 + a z1`; `Infinite` stands for a factor `z1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Slope {
    Finite(Coefficient),
    Infinite,
}

impl Slope {
    pub fn value(&self) -> f64 {
        match self {
            Slope::Finite(c) => c.to_c64().re,
            Slope::Infinite => f64::INFINITY,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Slope::Finite(c) => c.is_exact(),
            Slope::Infinite => true,
        }
    }

    fn exact(&self) -> Option<BigRational> {
        match self {
            Slope::Finite(Coefficient::Exact(g)) => Some(g.re.clone()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Slope::Infinite => serde_json::Value::String("inf".into()),
            Slope::Finite(c) => serde_json::json!(c.to_c64().re),
        }
    }
}

/// `H = c z1^r prod_j (z2 + a_j z1)`, slopes sorted with infinite ones last.
#[derive(Clone, Debug)]
pub struct SlopeProfile {
    pub c: Coefficient,
    pub slopes: Vec<Slope>,
}

impl SlopeProfile {
    pub fn infinite_count(&self) -> usize {
        self.slopes.iter().filter(|s| **s == Slope::Infinite).count()
    }
}

/// Factor a real binary form into linear factors and report their slopes.
/// Errors on non-homogeneous input and on non-real slopes.
pub fn tangent_slopes(h: &Polynomial) -> Result<SlopeProfile> {
    if h.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: h.nvars() });
    }
    let m = h.degree().ok_or(Error::ZeroPolynomial)?;
    if h.order() != Some(m) {
        return Err(Error::Precondition("form is not homogeneous".into()));
    }
    let r = h.terms().map(|(mono, _)| mono.0[0]).min().unwrap();
    // H(1, z2) as a polynomial in z2
    let mut c = vec![Coefficient::zero(); (m - r + 1) as usize];
    for (mono, v) in h.terms() {
        c[mono.0[1] as usize] = v.clone();
    }
    let dehom = UPoly::new(c);
    let lead = dehom.lead();
    let norm = h.max_abs_coeff();
    let mut slopes = Vec::new();
    for (root, mult) in dehom.roots() {
        let a = -&root;
        let real = match &a {
            Coefficient::Exact(g) => g.is_real(),
            Coefficient::Approx(z) => z.im.abs() <= 1e-7 * (1.0 + z.re.abs()),
        };
        if !real {
            return Err(Error::Precondition(format!("non-real tangent slope {a}")));
        }
        let a = match a {
            Coefficient::Approx(z) => {
                let x = Complex64::new(z.re, 0.0);
                let resid = dehom.eval_c64(-x).norm();
                let tol = 1e-10 * norm * (1.0 + z.re.abs()).powi((m - r) as i32);
                if resid > tol && mult == 1 {
                    return Err(Error::Numerical(format!("slope residual {resid:e} exceeds tolerance")));
                }
                Coefficient::Approx(x)
            }
            exact => exact,
        };
        for _ in 0..mult {
            slopes.push(Slope::Finite(a.clone()));
        }
    }
    slopes.sort_by(|x, y| x.value().total_cmp(&y.value()));
    for _ in 0..r {
        slopes.push(Slope::Infinite);
    }
    Ok(SlopeProfile { c: lead, slopes })
}

#[derive(Clone, Debug)]
pub struct InterlacingVerdict {
    pub interlaced: bool,
    pub slopes_a: Option<SlopeProfile>,
    pub slopes_b: Option<SlopeProfile>,
    pub reason: Option<String>,
}

fn le(a: &Slope, b: &Slope) -> bool {
    match (a, b) {
        (_, Slope::Infinite) => true,
        (Slope::Infinite, Slope::Finite(_)) => false,
        _ => match (a.exact(), b.exact()) {
            (Some(x), Some(y)) => x <= y,
            _ => a.value() <= b.value() + 1e-9 * (1.0 + a.value().abs().max(b.value().abs())),
        },
    }
}

/// Check `b_1 <= a_1 <= b_2 <= ... <= a_M <= b_{M+1}` for the slopes of `A_M` and `B_{M+1}`.
pub fn interlacing_check(a_m: &Polynomial, b_next: &Polynomial) -> InterlacingVerdict {
    let fail = |reason: String, sa, sb| InterlacingVerdict { interlaced: false, slopes_a: sa, slopes_b: sb, reason: Some(reason) };
    let sa = match tangent_slopes(a_m) {
        Ok(s) => s,
        Err(e) => return fail(format!("A: {e}"), None, None),
    };
    let sb = match tangent_slopes(b_next) {
        Ok(s) => s,
        Err(e) => return fail(format!("B: {e}"), Some(sa), None),
    };
    let (m, n) = (sa.slopes.len(), sb.slopes.len());
    if n != m + 1 {
        return fail(format!("degrees {m} and {n} are not consecutive"), Some(sa), Some(sb));
    }
    let (r, s) = (sa.infinite_count(), sb.infinite_count());
    if s != r && s != r + 1 {
        return fail(format!("{r} infinite slopes in A against {s} in B"), Some(sa), Some(sb));
    }
    for k in 0..m {
        if !le(&sb.slopes[k], &sa.slopes[k]) || !le(&sa.slopes[k], &sb.slopes[k + 1]) {
            return fail(format!("slopes fail to interlace at position {}", k + 1), Some(sa), Some(sb));
        }
    }
    InterlacingVerdict { interlaced: true, slopes_a: Some(sa), slopes_b: Some(sb), reason: None }
}

/// Everything the `homog` command reports for one point.
#[derive(Clone, Debug)]
pub struct HomogReport {
    pub order: u32,
    pub mu: Coefficient,
    pub a_m: Polynomial,
    pub b_next: Polynomial,
    pub verdict: InterlacingVerdict,
}

pub fn homog_report(p: &Polynomial, center: &[Coefficient]) -> Result<HomogReport> {
    let dec = decompose(p, center)?;
    let norm = normalize_lowest(&dec)?;
    let m = dec.order;
    let a_m = norm.real_part(m);
    let b_next = norm.imag_part(m + 1);
    let verdict = interlacing_check(&a_m, &b_next);
    Ok(HomogReport { order: m, mu: norm.mu, a_m, b_next, verdict })
}

impl HomogReport {
    pub fn to_json(&self) -> serde_json::Value {
        let slopes = |s: &Option<SlopeProfile>| match s {
            Some(p) => serde_json::Value::Array(p.slopes.iter().map(|x| x.to_json()).collect()),
            None => serde_json::Value::Null,
        };
        let mu = self.mu.to_c64();
        serde_json::json!({
            "M": self.order,
            "mu": {"re": mu.re, "im": mu.im},
            "A_M": self.a_m.to_string(),
            "B_next": self.b_next.to_string(),
            "slopes_A": slopes(&self.verdict.slopes_a),
            "slopes_B": slopes(&self.verdict.slopes_b),
            "interlaced": self.verdict.interlaced,
            "reason": self.verdict.reason,
        })
    }
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

    #[test]
    fn linear_example_at_corner() {
        let d = decompose(&p("2 - z1 - z2"), &[Coefficient::int(1), Coefficient::int(1)]).unwrap();
        assert_eq!(d.order, 1);
        assert_eq!(d.parts[0], p("-z1 - z2"));
    }

    #[test]
    fn not_a_zero_is_reported() {
        assert_eq!(decompose(&p("2 - z1 - z2"), &origin()).unwrap_err(), Error::NotAZero);
        assert_eq!(decompose(&p("0"), &origin()).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn unimodular_constant_for_imaginary_part() {
        let d = decompose(&p("i*(z1 + z2) + z1^2"), &origin()).unwrap();
        let n = normalize_lowest(&d).unwrap();
        assert_eq!(n.mu, Coefficient::gauss(0, -1));
        assert_eq!(n.real_part(1), p("z1 + z2"));
    }

    #[test]
    fn slopes_of_quadratic_and_cubic() {
        let s = tangent_slopes(&p("-4*(z2^2 + 4*z1*z2 + z1^2)")).unwrap();
        assert_eq!(s.c, Coefficient::int(-4));
        assert!((s.slopes[0].value() - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!((s.slopes[1].value() - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        let t = tangent_slopes(&p("4*z1*z2*(z1 + z2)")).unwrap();
        assert_eq!(t.c, Coefficient::int(4));
        assert_eq!(t.slopes, vec![Slope::Finite(Coefficient::int(0)), Slope::Finite(Coefficient::int(1)), Slope::Infinite]);
        let u = tangent_slopes(&p("z2^3")).unwrap();
        assert_eq!(u.slopes, vec![Slope::Finite(Coefficient::int(0)); 3]);
    }

    #[test]
    fn interlacing_cases() {
        assert!(interlacing_check(&p("z2^2 + 4*z1*z2 + z1^2"), &p("4*z1*z2*(z1 + z2)")).interlaced);
        assert!(interlacing_check(&p("z1 + z2"), &p("-z1*(z1 + z2)")).interlaced);
        let v = interlacing_check(&p("z1 + z2"), &p("z1^2 + z2^2"));
        assert!(!v.interlaced);
        assert!(v.reason.unwrap().contains("non-real"));
        assert!(!interlacing_check(&p("z2^2 + 4*z1*z2 + z1^2"), &p("z2^3")).interlaced);
    }
}
