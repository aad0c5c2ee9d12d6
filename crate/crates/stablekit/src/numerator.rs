//! Admissible numerators: the product ideal built from the initial segments of a
//! pure stable polynomial, the surrogate `[p]`, normal forms modulo the ideal and
//! the resulting boundedness decision for `f/p` near the point.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::poly::local::{local_colength, local_membership};
use crate::poly::{Domain, Polynomial};
use crate::puiseux::{puiseux_factorize, LocalFactorization};
use crate::regularity::fan_directions;

const MAX_LOCAL_ORDER: u32 = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    Order1,
    RepeatedSegments,
    DoublePoint,
    OrdinaryMultiplePoint,
    General,
}

impl CaseTag {
    pub fn label(self) -> &'static str {
        match self {
            CaseTag::Order1 => "order1",
            CaseTag::RepeatedSegments => "repeated_segments",
            CaseTag::DoublePoint => "double_point",
            CaseTag::OrdinaryMultiplePoint => "ordinary_multiple_point",
            CaseTag::General => "general",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Segment {
    /// `q(z1)`.
    pub q: Polynomial,
    pub cutoff: u32,
    pub multiplicity: u32,
}

impl Segment {
    /// `z2 + q(z1)`.
    pub fn factor(&self) -> Polynomial {
        &Polynomial::var(self.q.vars(), 1) + &self.q
    }
}

#[derive(Clone, Debug)]
pub struct IdealPresentation {
    pub segments: Vec<Segment>,
    pub generators: Vec<Polynomial>,
    pub case_tag: CaseTag,
    /// Factors `z2 + q_j` in the order used by the normal form (the last one is divided out first).
    order: Vec<Segment>,
    /// Degree bound for `f_n`, `n = 0..M-1`.
    bounds: Vec<u32>,
}

impl IdealPresentation {
    pub fn degree_bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.segments.iter().map(|s| s.multiplicity).sum()
    }

    /// `dim R_0 / I`.
    pub fn colength(&self) -> Result<usize> {
        local_colength(&self.generators, MAX_LOCAL_ORDER).map(|x| x.0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "case": self.case_tag.label(),
            "segments": self.segments.iter().map(|s| json!({
                "q": s.q.to_string(),
                "cutoff": s.cutoff,
                "multiplicity": s.multiplicity,
            })).collect::<Vec<_>>(),
            "generators": self.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "degree_bounds": self.bounds,
        })
    }
}

fn order_of(p: &Polynomial) -> Option<u32> {
    p.clean(1e-12).order()
}

fn same_poly(a: &Polynomial, b: &Polynomial) -> bool {
    let d = a - b;
    d.is_zero() || (!d.is_exact() && d.max_abs_coeff() <= 1e-9 * a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0))
}

fn z1_pow(vars: &[String], k: u32) -> Polynomial {
    Polynomial::monomial(vars, vec![k, 0], Coefficient::one())
}

fn product(ps: &[Polynomial], vars: &[String]) -> Polynomial {
    ps.iter().fold(Polynomial::one(vars), |a, b| &a * b)
}

/// Expanded product of the ideals `(z2 + q_j, z1^{2L_j})`, dropping generators that
/// are multiples of others.
fn expanded_generators(list: &[Segment], vars: &[String]) -> Vec<Polynomial> {
    let mut gens = vec![Polynomial::one(vars)];
    for s in list {
        let (w, z) = (s.factor(), z1_pow(vars, s.cutoff));
        gens = gens.iter().flat_map(|g| [g * &w, g * &z]).collect();
    }
    let mut keep: Vec<Polynomial> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let redundant = gens.iter().enumerate().any(|(j, h)| {
            j != i && (!same_poly(g, h) || j < i) && g.div_exact(h).is_some()
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    keep
}

/// Product ideal of the initial segments of a factorization centred at the origin.
pub fn segment_ideal(fact: &LocalFactorization) -> Result<IdealPresentation> {
    if !fact.all_pure() {
        return Err(Error::Precondition("segment ideal needs pure branches".into()));
    }
    let vars = crate::poly::default_vars(2);
    let segments: Vec<Segment> = fact
        .branches
        .iter()
        .map(|b| Segment { q: b.segment_poly(&vars), cutoff: b.cutoff.unwrap(), multiplicity: b.multiplicity })
        .collect();
    // one entry per factor of the product, cutoffs ascending
    let mut list: Vec<Segment> = segments
        .iter()
        .flat_map(|s| std::iter::repeat_n(Segment { multiplicity: 1, ..s.clone() }, s.multiplicity as usize))
        .collect();
    list.sort_by_key(|s| s.cutoff);
    let m = list.len();
    let all_same = list.iter().all(|s| same_poly(&s.q, &list[0].q));
    let linear_distinct = (0..m).all(|a| (0..m).all(|b| a == b || order_of(&(&list[a].q - &list[b].q)) == Some(1)));
    let case_tag = if m == 1 {
        CaseTag::Order1
    } else if all_same {
        CaseTag::RepeatedSegments
    } else if m == 2 {
        CaseTag::DoublePoint
    } else if linear_distinct {
        CaseTag::OrdinaryMultiplePoint
    } else {
        CaseTag::General
    };
    let ws: Vec<Polynomial> = list.iter().map(|s| s.factor()).collect();
    let (generators, bounds) = match case_tag {
        CaseTag::Order1 | CaseTag::RepeatedSegments => {
            let s: Vec<u32> = std::iter::once(0).chain(list.iter().scan(0, |acc, x| {
                *acc += x.cutoff;
                Some(*acc)
            })).collect();
            let gens = (0..=m).map(|k| &z1_pow(&vars, s[k]) * &ws[0].pow((m - k) as u32)).collect();
            (gens, (0..m).map(|n| s[m - n]).collect())
        }
        CaseTag::DoublePoint => {
            let (c1, c2) = (list[0].cutoff, list[1].cutoff);
            let k = order_of(&(&list[0].q - &list[1].q)).unwrap();
            let n = c1.min(k);
            let gens = vec![&ws[0] * &ws[1], &z1_pow(&vars, c1) * &ws[1], z1_pow(&vars, c2 + n)];
            (gens, vec![c2 + n, c1])
        }
        CaseTag::OrdinaryMultiplePoint => {
            let mut gens = vec![product(&ws, &vars)];
            for n in 1..=m {
                gens.push(&z1_pow(&vars, list[n - 1].cutoff + n as u32 - 1) * &product(&ws[n..], &vars));
            }
            (gens, (0..m).map(|n| list[m - n - 1].cutoff + (m - n - 1) as u32).collect())
        }
        CaseTag::General => (expanded_generators(&list, &vars), vec![]),
    };
    Ok(IdealPresentation { segments, generators, case_tag, order: list, bounds })
}

/// `[p] = prod_j (z2 + q_j(z1) + i z1^{2L_j})^{M_j}`.
pub fn surrogate_poly(fact: &LocalFactorization) -> Result<Polynomial> {
    if !fact.all_pure() {
        return Err(Error::Precondition("surrogate needs pure branches".into()));
    }
    let vars = crate::poly::default_vars(2);
    let mut out = Polynomial::one(&vars);
    for b in &fact.branches {
        let f = &(&Polynomial::var(&vars, 1) + &b.segment_poly(&vars))
            + &Polynomial::monomial(&vars, vec![b.cutoff.unwrap(), 0], Coefficient::i());
        out = &out * &f.pow(b.multiplicity);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    /// `f_n(z1)`, `n = 0..M-1`, truncated to the degree bounds of the case.
    pub coefficient_series: Vec<Polynomial>,
    pub residual_zero: bool,
}

impl NormalForm {
    pub fn to_json(&self) -> Value {
        json!({
            "residual_zero": self.residual_zero,
            "coefficients": self.coefficient_series.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Divide by `z2 + q(z1)` in `z2`: returns `(quotient, f(z1, -q(z1)))`.
fn divide_by_segment(f: &Polynomial, q: &Polynomial) -> (Polynomial, Polynomial) {
    let c = f.coeffs_in(1);
    let vars = f.vars();
    if c.is_empty() {
        return (Polynomial::zero(vars), Polynomial::zero(vars));
    }
    let d = c.len() - 1;
    let mut b = vec![Polynomial::zero(vars); d.max(1)];
    if d == 0 {
        return (Polynomial::zero(vars), c[0].clone());
    }
    b[d - 1] = c[d].clone();
    for k in (1..d).rev() {
        b[k - 1] = &c[k] - &(q * &b[k]);
    }
    let rem = &c[0] - &(q * &b[0]);
    let z2 = Polynomial::var(vars, 1);
    let mut quo = Polynomial::zero(vars);
    for bk in b.iter().rev() {
        quo = &(&quo * &z2) + bk;
    }
    (quo, rem)
}

fn truncate_z1(f: &Polynomial, bound: u32) -> Polynomial {
    let tol = if f.is_exact() { 0.0 } else { 1e-10 * f.max_abs_coeff().max(1.0) };
    Polynomial::from_terms(
        f.vars(),
        f.terms().filter(|(m, c)| m.0[0] < bound && !c.is_negligible(tol)).map(|(m, c)| (m.0.clone(), c.clone())),
    )
}

/// Normal form of `f` (centred at the origin) modulo the ideal.
pub fn reduce_mod_ideal(f: &Polynomial, ideal: &IdealPresentation) -> Result<NormalForm> {
    if ideal.case_tag == CaseTag::General {
        return Err(Error::Unsupported("no normal form for mixed segments".into()));
    }
    let m = ideal.order.len();
    let mut rest = f.clone();
    let mut coeffs = Vec::with_capacity(m);
    for n in 0..m {
        let seg = &ideal.order[m - 1 - n];
        let (quo, rem) = divide_by_segment(&rest, &seg.q);
        coeffs.push(truncate_z1(&rem, ideal.bounds[n]));
        rest = quo;
    }
    let residual_zero = coeffs.iter().all(|c| c.is_zero());
    Ok(NormalForm { coefficient_series: coeffs, residual_zero })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Unbounded,
    /// Membership holds only up to a float tolerance.
    ConjecturallyBounded,
    /// Mixed segments, not in the ideal: undecided.
    Unknown,
}

impl Boundedness {
    pub fn label(self) -> &'static str {
        match self {
            Boundedness::Bounded => "bounded",
            Boundedness::Unbounded => "unbounded",
            Boundedness::ConjecturallyBounded => "conjecturally_bounded",
            Boundedness::Unknown => "unknown",
        }
    }
}

/// `|f/p|` along a curve approaching the point.
#[derive(Clone, Debug)]
pub struct WitnessCurve {
    pub description: String,
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log |f/p|` against `log x`.
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct BoundednessReport {
    pub verdict: Boundedness,
    pub case_tag: CaseTag,
    pub ideal: IdealPresentation,
    pub normal_form: Option<NormalForm>,
    pub witness: Option<WitnessCurve>,
    /// `(r, max |f/p|)` over the approach fan at radius `r`.
    pub sampled_sup: Vec<(f64, f64)>,
    pub note: Option<String>,
}

impl BoundednessReport {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.label(),
            "case": self.case_tag.label(),
            "ideal": self.ideal.to_json(),
            "normal_form": self.normal_form.as_ref().map(|n| n.to_json()),
            "witness": self.witness.as_ref().map(|w| json!({
                "curve": w.description,
                "slope": w.slope,
                "samples": w.samples,
            })),
            "sampled_sup": self.sampled_sup,
            "note": self.note,
        })
    }
}

fn loglog_slope(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `|f/p|` along `z2 = t x^{2L} - q(x)` for `x` from `1e-1` down to `1e-3`.
pub fn witness_curve(f: &Polynomial, p: &Polynomial, seg: &Segment, t: f64) -> WitnessCurve {
    let samples: Vec<(f64, f64)> = (0..9)
        .map(|k| {
            let x = 10f64.powf(-1.0 - 0.25 * k as f64);
            let eta = x.powi(seg.cutoff as i32 + 2);
            let z1 = Complex64::new(x, eta);
            let z2 = -seg.q.eval_c64(&[z1, Complex64::new(0.0, 0.0)]) + t * x.powi(seg.cutoff as i32) + Complex64::new(0.0, eta);
            let z = [z1, z2];
            (x, (f.eval_c64(&z) / p.eval_c64(&z)).norm())
        })
        .collect();
    WitnessCurve {
        description: format!("z2 = {t} z1^{} - ({})", seg.cutoff, seg.q),
        slope: loglog_slope(&samples),
        samples,
    }
}

/// `(r, max |f/p|)` over approach directions at radii `0.1 * 2^{-m}`.
pub fn sampled_sup(f: &Polynomial, p: &Polynomial) -> Vec<(f64, f64)> {
    let zero = [Complex64::new(0.0, 0.0); 2];
    let dirs = fan_directions(Domain::UpperHalfPlane, &zero, &[10.0]);
    (0..=12)
        .map(|m| {
            let r = 0.1 * 2f64.powi(-m);
            let worst = dirs
                .iter()
                .map(|v| {
                    let n = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let z: Vec<Complex64> = v.iter().map(|x| x * (r / n)).collect();
                    (f.eval_c64(&z) / p.eval_c64(&z)).norm()
                })
                .fold(0.0, f64::max);
            (r, worst)
        })
        .collect()
}

/// Decide whether `f/p` is bounded near `center` (half-plane setting).
pub fn is_locally_bounded(f: &Polynomial, p: &Polynomial, center: &[Coefficient]) -> Result<BoundednessReport> {
    let fact = puiseux_factorize(p, center, 16)?;
    let ideal = segment_ideal(&fact)?;
    let fs = f.shift(center);
    let ps = p.shift(center);
    let exact = ideal.generators.iter().all(|g| g.is_exact()) && fs.is_exact();
    let sup = sampled_sup(&fs, &ps);
    let steepest = |t: f64| {
        ideal
            .order
            .iter()
            .map(|s| witness_curve(&fs, &ps, s, t))
            .min_by(|a, b| a.slope.total_cmp(&b.slope))
    };
    let (verdict, normal_form, witness, note) = if ideal.case_tag == CaseTag::General {
        if local_membership(&fs, &ideal.generators, MAX_LOCAL_ORDER)? {
            let v = if exact { Boundedness::Bounded } else { Boundedness::ConjecturallyBounded };
            (v, None, None, None)
        } else {
            let note = "outside the segment ideal; the decision for mixed segments is conjectural".to_string();
            (Boundedness::Unknown, None, steepest(0.0), Some(note))
        }
    } else {
        let nf = reduce_mod_ideal(&fs, &ideal)?;
        if nf.residual_zero {
            let v = if exact { Boundedness::Bounded } else { Boundedness::ConjecturallyBounded };
            (v, Some(nf), None, None)
        } else {
            let w = [steepest(0.0), steepest(1.0)].into_iter().flatten().min_by(|a, b| a.slope.total_cmp(&b.slope));
            (Boundedness::Unbounded, Some(nf), w, None)
        }
    };
    Ok(BoundednessReport { verdict, case_tag: ideal.case_tag, ideal, normal_form, witness, sampled_sup: sup, note })
}

/// Largest `|p/[p]|` and `|[p]/p|` over the approach fan.
pub fn surrogate_ratio_bounds(p: &Polynomial, center: &[Coefficient], fact: &LocalFactorization) -> Result<(f64, f64)> {
    let s = surrogate_poly(fact)?;
    let ps = p.shift(center);
    let a = sampled_sup(&ps, &s).iter().map(|x| x.1).fold(0.0, f64::max);
    let b = sampled_sup(&s, &ps).iter().map(|x| x.1).fold(0.0, f64::max);
    Ok((a, b))
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

    fn ideal_of(s: &str) -> IdealPresentation {
        segment_ideal(&puiseux_factorize(&p(s), &origin(), 12).unwrap()).unwrap()
    }

    const CONTACT_SIX: &str = "z1 + z2 - 2*z1^3 - 6*z1^2*z2 - i*(z1^2 + z1*z2 - 4*z1^3*z2)";

    #[test]
    fn order_one_generators() {
        let i = ideal_of(CONTACT_SIX);
        assert_eq!(i.case_tag, CaseTag::Order1);
        assert_eq!(i.generators, vec![p("z2 + z1 + 4*z1^3 + 24*z1^5"), p("z1^6")]);
        assert_eq!(i.colength().unwrap(), 6);
        let line = ideal_of("z1 + z2 - 2*i*z1*z2");
        assert_eq!(line.generators, vec![p("z2 + z1"), p("z1^2")]);
        assert_eq!(line.colength().unwrap(), 2);
    }

    #[test]
    fn repeated_segments_generators() {
        // z2 + z1 with cutoffs 2 and 4
        let i = ideal_of("(z2 + z1 + i*z1^2)*(z2 + z1 + i*z1^4)");
        assert_eq!(i.case_tag, CaseTag::RepeatedSegments);
        assert_eq!(i.generators, vec![p("(z2 + z1)^2"), p("z1^2*(z2 + z1)"), p("z1^6")]);
        assert_eq!(i.degree_bounds(), &[6, 2]);
    }

    #[test]
    fn reductions() {
        let i = ideal_of("z1 + z2 - 2*i*z1*z2");
        assert!(reduce_mod_ideal(&p("z1*z2"), &i).unwrap().residual_zero);
        let nf = reduce_mod_ideal(&p("z1"), &i).unwrap();
        assert!(!nf.residual_zero);
        assert_eq!(nf.coefficient_series[0], p("z1"));
        assert!(reduce_mod_ideal(&p("0"), &i).unwrap().residual_zero);
    }

    #[test]
    fn normal_form_agrees_with_membership() {
        for s in [CONTACT_SIX, "(z2 + z1 + i*z1^2)*(z2 - z1 + i*z1^4)", "(z2 + z1 + i*z1^2)*(z2 + 2*z1 + i*z1^2)*(z2 + 3*z1 + i*z1^4)"] {
            let i = ideal_of(s);
            assert_ne!(i.case_tag, CaseTag::General);
            for f in ["z1^3", "z1*z2", "z2^2", "z1^2*z2^2", "z1^5 + z2", "z1^8", "z1^4*z2", "z2^3"] {
                let f = p(f);
                let nf = reduce_mod_ideal(&f, &i).unwrap();
                assert_eq!(nf.residual_zero, local_membership(&f, &i.generators, 80).unwrap(), "{s} {f}");
            }
        }
    }

    #[test]
    fn double_and_multiple_point_tags() {
        assert_eq!(ideal_of("(z2 + z1 + i*z1^2)*(z2 - z1 + i*z1^4)").case_tag, CaseTag::DoublePoint);
        let omp = ideal_of("(z2 + z1 + i*z1^2)*(z2 + 2*z1 + i*z1^2)*(z2 + 3*z1 + i*z1^4)");
        assert_eq!(omp.case_tag, CaseTag::OrdinaryMultiplePoint);
        assert_eq!(omp.degree_bounds(), &[6, 3, 2]);
        let gen = ideal_of("(z2 + z1 + i*z1^2)*(z2 + z1 + z1^2 + i*z1^4)*(z2 + 2*z1 + i*z1^2)");
        assert_eq!(gen.case_tag, CaseTag::General);
    }

    #[test]
    fn surrogate_of_examples() {
        let f = puiseux_factorize(&p(CONTACT_SIX), &origin(), 12).unwrap();
        assert_eq!(surrogate_poly(&f).unwrap(), p("z2 + z1 + 4*z1^3 + 24*z1^5 + i*z1^6"));
        let (a, b) = surrogate_ratio_bounds(&p(CONTACT_SIX), &origin(), &f).unwrap();
        assert!(a < 50.0 && b < 50.0, "{a} {b}");
        let g = puiseux_factorize(&p("z1 + z2 - 2*i*z1*z2"), &origin(), 8).unwrap();
        assert_eq!(surrogate_poly(&g).unwrap(), p("z2 + z1 + i*z1^2"));
    }

    #[test]
    fn boundedness_of_cayley_numerators() {
        let den = p("-2*i*(z1 + z2 - 2*i*z1*z2)");
        let ok = is_locally_bounded(&p("-4*z1*z2"), &den, &origin()).unwrap();
        assert_eq!(ok.verdict, Boundedness::Bounded);
        let bad = is_locally_bounded(&p("z1"), &den, &origin()).unwrap();
        assert_eq!(bad.verdict, Boundedness::Unbounded);
        let w = bad.witness.unwrap();
        assert!((w.slope + 1.0).abs() < 0.05, "{}", w.slope);
        let refl = is_locally_bounded(&p("2*i*(z1 + z2 + 2*i*z1*z2)"), &den, &origin()).unwrap();
        assert_eq!(refl.verdict, Boundedness::Bounded);
    }
}
