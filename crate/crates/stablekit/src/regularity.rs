//! Boundary behaviour of `f = q/p` at a zero of `p`: boundedness along
//! non-tangential approach, the limit value, directional derivatives and the
//! polynomial jet obtained from the homogeneous expansion of `f(center + lambda z)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::homog::{decompose, decompose_shifted, HomogeneousDecomposition};
use crate::poly::{Domain, Polynomial};
use crate::puiseux::{contact_orders, normalized_split, puiseux_factorize};

/// Homogeneous part `F_k = numerator / P_M^power` of the expansion of `f`.
#[derive(Clone, Debug)]
pub struct JetPart {
    pub degree: u32,
    pub numerator: Polynomial,
    /// Remaining power of `P_M` in the denominator after cancellation; 0 means polynomial.
    pub power: u32,
}

impl JetPart {
    pub fn is_polynomial(&self) -> bool {
        self.power == 0
    }

    pub fn eval_c64(&self, z: &[Complex64], p_m: &Polynomial) -> Complex64 {
        self.numerator.eval_c64(z) / p_m.eval_c64(z).powu(self.power)
    }
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub center: Vec<Coefficient>,
    /// Order of vanishing of `p`.
    pub m: u32,
    /// Order of vanishing of `q` (`None` for `q = 0`).
    pub n: Option<u32>,
    pub nt_bounded: bool,
    pub nt_limit: Option<Coefficient>,
    /// `(Q_{M+1} - b P_{M+1}, P_M)`.
    pub directional_form: Option<(Polynomial, Polynomial)>,
    /// Largest `k <= k_max` with `F_1..F_k` polynomial.
    pub ck_order: Option<u32>,
    /// True when every part up to `k_max` is polynomial, so `ck_order` is only a lower bound.
    pub ck_lower_bound_only: bool,
    pub jet: Option<Polynomial>,
    pub parts: Vec<JetPart>,
    pub gradient_exists: bool,
    /// False when divisibility was decided with a tolerance on float coefficients.
    pub exact: bool,
    pub lowest_p: Polynomial,
}

impl RegularityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "center": self.center.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "M": self.m,
            "N": self.n,
            "nt_bounded": self.nt_bounded,
            "nt_limit": self.nt_limit.as_ref().map(|c| c.to_json()),
            "directional_form": self.directional_form.as_ref().map(|(a, b)| json!({
                "numerator": a.to_string(),
                "denominator": b.to_string(),
            })),
            "ck_order": self.ck_order,
            "ck_lower_bound_only": self.ck_lower_bound_only,
            "jet": self.jet.as_ref().map(|j| j.to_string()),
            "parts": self.parts.iter().map(|f| json!({
                "degree": f.degree,
                "polynomial": f.is_polynomial(),
                "numerator": f.numerator.to_string(),
                "denominator_power": f.power,
            })).collect::<Vec<_>>(),
            "gradient_exists": self.gradient_exists,
            "exact": self.exact,
        })
    }
}

fn divides(num: &Polynomial, d: &Polynomial, exact: bool) -> Option<Polynomial> {
    if num.is_zero() {
        return Some(num.clone());
    }
    if exact {
        return num.div_exact(d);
    }
    let (q, r) = num.div_rem(d).ok()?;
    let scale = num.max_abs_coeff().max(1e-300);
    (r.max_abs_coeff() <= 1e-9 * scale).then_some(q)
}

fn limit_ratio(q_m: &Polynomial, p_m: &Polynomial, exact: bool) -> Option<Coefficient> {
    if q_m.is_zero() {
        return Some(Coefficient::zero());
    }
    let (lm, lc) = p_m.leading_term()?;
    let b = &q_m.coeff(&lm.0) / lc;
    let diff = q_m - &p_m.scale(&b);
    let ok = if exact { diff.is_zero() } else { diff.max_abs_coeff() <= 1e-9 * q_m.max_abs_coeff() };
    ok.then_some(b)
}

fn expansion(q: &Polynomial, center: &[Coefficient]) -> Option<HomogeneousDecomposition> {
    if q.is_zero() {
        None
    } else {
        decompose_shifted(&q.shift(center), center).ok()
    }
}

/// Homogeneous analysis of `q/p` at `center` up to order `k_max`.
pub fn analyze_regularity(q: &Polynomial, p: &Polynomial, center: &[Coefficient], k_max: u32) -> Result<RegularityReport> {
    if q.nvars() != p.nvars() {
        return Err(Error::VariableMismatch { expected: p.nvars(), found: q.nvars() });
    }
    let dp = decompose(p, center)?;
    let dq = expansion(q, center);
    let exact = p.is_exact() && q.is_exact() && center.iter().all(|c| c.is_exact());
    let m = dp.order;
    let n = dq.as_ref().map(|d| d.order);
    let qpart = |j: u32| dq.as_ref().map(|d| d.part(j)).unwrap_or_else(|| Polynomial::zero(p.vars()));
    let p_m = dp.lowest().clone();
    let nt_bounded = n.is_none_or(|n| n >= m);
    let mut report = RegularityReport {
        center: center.to_vec(),
        m,
        n,
        nt_bounded,
        nt_limit: None,
        directional_form: None,
        ck_order: None,
        ck_lower_bound_only: false,
        jet: None,
        parts: vec![],
        gradient_exists: false,
        exact,
        lowest_p: p_m.clone(),
    };
    if !nt_bounded {
        return Ok(report);
    }
    let Some(b) = limit_ratio(&qpart(m), &p_m, exact) else {
        return Ok(report);
    };
    let dir_num = &qpart(m + 1) - &dp.part(m + 1).scale(&b);
    report.gradient_exists = divides(&dir_num, &p_m, exact).is_some();
    report.directional_form = Some((dir_num, p_m.clone()));
    report.nt_limit = Some(b.clone());

    // sum_i P_{M+i} F_{k-i} = Q_{M+k}; with F_k = N_k / P_M^k:
    // N_k = Q_{M+k} P_M^{k-1} - sum_{i=1..k} P_{M+i} N_{k-i} P_M^{i-1}.
    let mut nums: Vec<Polynomial> = vec![Polynomial::constant(p.vars(), b.clone())];
    let mut pm_pow: Vec<Polynomial> = vec![Polynomial::one(p.vars())];
    let mut parts = Vec::new();
    let mut ck = 0;
    let mut broken = false;
    for k in 1..=k_max {
        pm_pow.push(&pm_pow[k as usize - 1] * &p_m);
        let mut nk = &qpart(m + k) * &pm_pow[k as usize - 1];
        for i in 1..=k {
            let t = &(&dp.part(m + i) * &nums[(k - i) as usize]) * &pm_pow[i as usize - 1];
            nk = &nk - &t;
        }
        nums.push(nk.clone());
        let mut reduced = nk;
        let mut power = k;
        while power > 0 {
            match divides(&reduced, &p_m, exact) {
                Some(r) => {
                    reduced = r;
                    power -= 1;
                }
                None => break,
            }
        }
        if power == 0 && !broken {
            ck = k;
        } else {
            broken = true;
        }
        parts.push(JetPart { degree: k, numerator: reduced, power });
    }
    report.ck_order = Some(ck);
    report.ck_lower_bound_only = !broken;
    let mut jet = Polynomial::constant(p.vars(), b);
    for f in parts.iter().take(ck as usize) {
        jet = &jet + &f.numerator;
    }
    report.jet = Some(jet);
    report.parts = parts;
    Ok(report)
}

/// `D_v f(center) = lim_{r -> 0+} (f(center + r v) - b) / r`.
pub fn directional_derivative(q: &Polynomial, p: &Polynomial, center: &[Coefficient], v: &[Complex64]) -> Result<Complex64> {
    let rep = analyze_regularity(q, p, center, 0)?;
    let (num, den) = rep
        .directional_form
        .ok_or_else(|| Error::Precondition("f has no non-tangential limit at the point".into()))?;
    let d = den.eval_c64(v);
    if d.norm() == 0.0 {
        return Err(Error::Numerical("lowest part of p vanishes in the direction".into()));
    }
    Ok(num.eval_c64(v) / d)
}

/// Derivative of `f` at `tau` on the torus in the inward direction `-delta`,
/// i.e. `lim_{r -> 0+} (f(tau - r delta) - f*(tau)) / r`.
pub fn disk_directional_derivative(q: &Polynomial, p: &Polynomial, tau: &[Coefficient], delta: &[Complex64]) -> Result<Complex64> {
    let v: Vec<Complex64> = delta.iter().map(|d| -d).collect();
    directional_derivative(q, p, tau, &v)
}

/// Approach directions for the sampling fan around a boundary point.
pub(crate) fn fan_directions(domain: Domain, tau: &[Complex64], apertures: &[f64]) -> Vec<Vec<Complex64>> {
    let angles = [0.25, 0.5, 0.75];
    let mut out = Vec::new();
    for &c in apertures {
        for &a1 in &angles {
            for &a2 in &angles {
                for scale in [1.0, c] {
                    let v = match domain {
                        Domain::UpperHalfPlane => vec![
                            Complex64::from_polar(1.0, std::f64::consts::PI * a1),
                            Complex64::from_polar(scale, std::f64::consts::PI * a2),
                        ],
                        // inward: -tau_k * w with Re w > 0
                        Domain::Disk => vec![
                            -tau[0] * Complex64::from_polar(1.0, std::f64::consts::PI * (a1 - 0.5)),
                            -tau[1] * Complex64::from_polar(scale, std::f64::consts::PI * (a2 - 0.5)),
                        ],
                    };
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Per dyadic radius `2^{-m}`, the largest `|f - F| / r^{k+1}` over the fan.
/// `f - F` is evaluated as `(q - F p) / p` in coordinates centred at the point.
pub fn jet_error_profile(q: &Polynomial, p: &Polynomial, report: &RegularityReport, domain: Domain) -> Vec<(f64, f64)> {
    let tau: Vec<Complex64> = report.center.iter().map(|c| c.to_c64()).collect();
    let jet = match &report.jet {
        Some(j) => j.clone(),
        None => return vec![],
    };
    let ps = p.shift(&report.center);
    let resid = &q.shift(&report.center) - &(&jet * &ps);
    let k = report.ck_order.unwrap_or(0) as i32;
    let dirs = fan_directions(domain, &tau, &[2.0, 10.0]);
    (4..=16)
        .into_par_iter()
        .map(|mexp| {
            let r = 2f64.powi(-mexp);
            let worst = dirs
                .iter()
                .map(|v| {
                    let w: Vec<Complex64> = v.iter().map(|d| d * r).collect();
                    (resid.eval_c64(&w) / ps.eval_c64(&w)).norm() / r.powi(k + 1)
                })
                .fold(0.0, f64::max);
            (r, worst)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct UcoCrosscheck {
    pub k_min: u32,
    pub ck_order: u32,
    pub holds: bool,
    pub tight: bool,
    /// Order of the boundary-interpolation class implied by `K_min`.
    pub interpolation_order: u32,
}

impl UcoCrosscheck {
    pub fn to_json(&self) -> Value {
        json!({
            "K_min": self.k_min,
            "ck_order": self.ck_order,
            "holds": self.holds,
            "tight": self.tight,
            "interpolation_order": self.interpolation_order,
        })
    }
}

/// Compare the regularity of `-B/A` with the bound `K_min - 2` from the contact orders.
pub fn uco_regularity_crosscheck(p: &Polynomial, center: &[Coefficient]) -> Result<UcoCrosscheck> {
    let fact = puiseux_factorize(p, center, 12)?;
    let co = contact_orders(&fact)?;
    let (a, b) = normalized_split(p, center)?;
    let origin = vec![Coefficient::zero(); 2];
    let rep = analyze_regularity(&-&b, &a, &origin, co.k_min + 2)?;
    let ck = rep.ck_order.unwrap_or(0);
    let bound = co.k_min.saturating_sub(2);
    Ok(UcoCrosscheck {
        k_min: co.k_min,
        ck_order: ck,
        holds: ck >= bound,
        tight: ck == bound,
        interpolation_order: co.k_min / 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse2(s).unwrap()
    }

    fn pt(a: i64, b: i64) -> Vec<Coefficient> {
        vec![Coefficient::int(a), Coefficient::int(b)]
    }

    #[test]
    fn limit_of_simple_quotient() {
        let r = analyze_regularity(&p("(z1 - 1)*(z2 - 1)"), &p("2 - z1 - z2"), &pt(1, 1), 3).unwrap();
        assert!(r.nt_bounded);
        assert_eq!(r.nt_limit, Some(Coefficient::zero()));
    }

    #[test]
    fn cubic_example_jet() {
        let a = p("z1 + z2 - 2*z1^3 - 6*z1^2*z2");
        let b = p("-(z1^2 + z1*z2 - 4*z1^3*z2)");
        let r = analyze_regularity(&-&b, &a, &pt(0, 0), 5).unwrap();
        assert_eq!(r.ck_order, Some(4));
        assert!(!r.ck_lower_bound_only);
        let polys: Vec<Polynomial> = r.parts[..4].iter().map(|f| f.numerator.clone()).collect();
        assert_eq!(polys, vec![p("z1"), p("0"), p("2*z1^3"), p("0")]);
        let f5 = &r.parts[4];
        assert_eq!(f5.power, 1);
        assert_eq!(f5.numerator, p("4*z1^5*(z1 + 3*z2)"));
    }

    #[test]
    fn constant_quotient() {
        let d = p("2 - z1 - z2");
        let r = analyze_regularity(&d, &d, &pt(1, 1), 4).unwrap();
        assert_eq!(r.nt_limit, Some(Coefficient::one()));
        assert_eq!(r.ck_order, Some(4));
        assert!(r.ck_lower_bound_only);
        assert_eq!(r.jet, Some(p("1")));
    }

    #[test]
    fn unbounded_quotient() {
        let r = analyze_regularity(&p("1"), &p("2 - z1 - z2"), &pt(1, 1), 2).unwrap();
        assert!(!r.nt_bounded);
        assert!(r.nt_limit.is_none());
    }

    #[test]
    fn inward_derivative_matches_limit() {
        let q = p("(1 - z1)*(2*z1*z2 - z1 - z2) + 2 - z1 - z2");
        let d = p("2 - z1 - z2");
        let delta = [Complex64::new(0.7, 0.2), Complex64::new(0.4, -0.1)];
        let v = disk_directional_derivative(&q, &d, &pt(1, 1), &delta).unwrap();
        assert!((v + delta[0]).norm() < 1e-12);
        // (f - 1)/r in shifted coordinates, avoiding cancellation near (1,1)
        let r = 1e-7;
        let w = [-delta[0] * r, -delta[1] * r];
        let num = (&q - &d).shift(&pt(1, 1));
        let fd = num.eval_c64(&w) / d.shift(&pt(1, 1)).eval_c64(&w) / r;
        assert!((fd - v).norm() < 1e-6);
        assert!(analyze_regularity(&q, &d, &pt(1, 1), 1).unwrap().gradient_exists);
    }

    #[test]
    fn inner_function_has_no_gradient() {
        let q = p("2*z1*z2 - z1 - z2");
        let d = p("2 - z1 - z2");
        let one = Complex64::new(1.0, 0.0);
        let v = disk_directional_derivative(&q, &d, &pt(1, 1), &[one, one]).unwrap();
        assert!((v - one).norm() < 1e-12);
        assert!(!analyze_regularity(&q, &d, &pt(1, 1), 2).unwrap().gradient_exists);
    }

    #[test]
    fn crosscheck_is_tight_on_cubic_example() {
        let c = uco_regularity_crosscheck(&p("z1 + z2 - 2*z1^3 - 6*z1^2*z2 - i*(z1^2 + z1*z2 - 4*z1^3*z2)"), &pt(0, 0)).unwrap();
        assert_eq!((c.k_min, c.ck_order), (6, 4));
        assert!(c.tight);
        let v = uco_regularity_crosscheck(&p("z1 + z2 - 2*i*z1*z2"), &pt(0, 0)).unwrap();
        assert_eq!(v.k_min, 2);
        assert!(v.holds);
    }

    #[test]
    fn jet_error_stays_bounded() {
        let a = p("z1 + z2 - 2*z1^3 - 6*z1^2*z2");
        let b = p("-(z1^2 + z1*z2 - 4*z1^3*z2)");
        let q = -&b;
        let r = analyze_regularity(&q, &a, &pt(0, 0), 5).unwrap();
        let prof = jet_error_profile(&q, &a, &r, Domain::UpperHalfPlane);
        let small: Vec<f64> = prof.iter().filter(|(r, _)| *r < 1e-2).map(|x| x.1).collect();
        let hi = small.iter().cloned().fold(0.0, f64::max);
        assert!(hi.is_finite() && hi < 1e3, "{prof:?}");
    }
}
