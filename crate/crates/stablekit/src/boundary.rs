//! Level sets of `A + tB` near a boundary zero, level regions between two values
//! of `A/B`, and horn regions with membership tests for point sequences.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::poly::series::TruncatedSeries;
use crate::poly::univariate::{real_roots_in, UPoly};
use crate::poly::Polynomial;
use crate::puiseux::{normalized_split, puiseux_factorize};

const COLLISION: f64 = 1e-9;

/// Sampling window `(0, r) x (-R, R)` (both signs of `x1` for tracing).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Samples of `x1` per sign.
    pub samples: usize,
    /// Geometric spacing `r, r q, r q^2, ...` down to `r * 1e-4` instead of uniform.
    pub geometric: bool,
}

impl Window {
    pub fn new(r: f64, big_r: f64) -> Self {
        Window { r, big_r, samples: 200, geometric: false }
    }

    fn positive_grid(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        if self.geometric {
            let q = 1e-4f64.powf(1.0 / (n - 1) as f64);
            let mut v: Vec<f64> = (0..n).map(|k| self.r * q.powi(k as i32)).collect();
            v.reverse();
            v
        } else {
            (1..=n).map(|k| self.r * k as f64 / n as f64).collect()
        }
    }
}

fn real_coeffs(p: &Polynomial) -> Vec<Vec<f64>> {
    let (d1, d2) = (p.degree_in(0) as usize, p.degree_in(1) as usize);
    let mut rows = vec![vec![0.0; d1 + 1]; d2 + 1];
    for (m, c) in p.terms() {
        rows[m.0[1] as usize][m.0[0] as usize] = c.to_c64().re;
    }
    rows
}

/// Coefficients in `x2` of a real polynomial at fixed `x1`.
fn slice(rows: &[Vec<f64>], x1: f64) -> Vec<f64> {
    rows.iter().map(|r| r.iter().rev().fold(0.0, |acc, c| acc * x1 + c)).collect()
}

fn eval_real(rows: &[Vec<f64>], x: [f64; 2]) -> f64 {
    slice(rows, x[0]).iter().rev().fold(0.0, |acc, c| acc * x[1] + c)
}

fn add_scaled(a: &[Vec<f64>], b: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    let rows = a.len().max(b.len());
    let cols = a.iter().chain(b).map(|r| r.len()).max().unwrap_or(0);
    let mut out = vec![vec![0.0; cols]; rows];
    for (j, r) in a.iter().enumerate() {
        for (i, c) in r.iter().enumerate() {
            out[j][i] += c;
        }
    }
    for (j, r) in b.iter().enumerate() {
        for (i, c) in r.iter().enumerate() {
            out[j][i] += t * c;
        }
    }
    out
}

/// Real roots in `x2` inside the window, refining `x1` within its cell when two collide.
fn roots_at(rows: &[Vec<f64>], x1: f64, cell: f64, big_r: f64) -> (f64, Vec<f64>, bool) {
    let collide = |v: &[f64]| v.windows(2).any(|w| (w[1] - w[0]).abs() < COLLISION * (1.0 + w[0].abs()));
    let roots = real_roots_in(&slice(rows, x1), -big_r, big_r);
    if !collide(&roots) {
        return (x1, roots, false);
    }
    for k in 1..=4 {
        let x = x1 - cell * k as f64 / 5.0;
        let r = real_roots_in(&slice(rows, x), -big_r, big_r);
        if !collide(&r) {
            return (x, r, false);
        }
    }
    (x1, roots, true)
}

/// Branches of `A + tB = 0` on both sides of `x1 = 0`.
#[derive(Clone, Debug)]
pub struct TracedCurve {
    pub t: f64,
    /// Order of vanishing `M`, the expected number of branches.
    pub expected: usize,
    /// `(x1, sorted x2 roots)`.
    pub samples: Vec<(f64, Vec<f64>)>,
    /// `x1` values where the root count differed from `M`.
    pub count_mismatch: Vec<f64>,
    /// `x1` values where roots could not be separated.
    pub collisions: Vec<f64>,
}

impl TracedCurve {
    /// Rows `(t, x1, branch_index, x2)`.
    pub fn rows(&self) -> Vec<(f64, f64, usize, f64)> {
        let mut out = Vec::new();
        for (x1, roots) in &self.samples {
            for (j, x2) in roots.iter().enumerate() {
                out.push((self.t, *x1, j, *x2));
            }
        }
        out
    }

    /// Branch `j` for `x1 > 0` as `(x1, x2)` pairs.
    pub fn branch(&self, j: usize) -> Vec<(f64, f64)> {
        self.samples.iter().filter(|(x1, r)| *x1 > 0.0 && r.len() == self.expected).map(|(x1, r)| (*x1, r[j])).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "t": self.t,
            "branches": self.expected,
            "samples": self.samples.len(),
            "count_mismatch": self.count_mismatch.len(),
            "collisions": self.collisions.len(),
        })
    }
}

fn trace_rows(rows: &[Vec<f64>], t: f64, expected: usize, window: &Window) -> TracedCurve {
    let grid = window.positive_grid();
    let mut xs: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
    xs.extend(grid.iter().copied());
    let cell = if window.geometric { 0.0 } else { window.r / window.samples.max(2) as f64 };
    let mut samples = Vec::new();
    let (mut count_mismatch, mut collisions) = (Vec::new(), Vec::new());
    for x1 in xs {
        let c = if cell > 0.0 { cell * x1.signum() } else { x1.abs() * 0.05 * x1.signum() };
        let (x, roots, collided) = roots_at(rows, x1, c, window.big_r);
        if collided {
            collisions.push(x);
        }
        if roots.len() != expected {
            count_mismatch.push(x);
        }
        samples.push((x, roots));
    }
    TracedCurve { t, expected, samples, count_mismatch, collisions }
}

/// Trace the real level sets `A + tB = 0` of `p` (normalised at `center`) in the window.
/// Branch indices follow increasing `x2` at each sampled `x1`.
pub fn trace_level_sets(p: &Polynomial, center: &[Coefficient], t_values: &[f64], window: Window) -> Result<Vec<TracedCurve>> {
    if p.nvars() != 2 {
        return Err(Error::VariableMismatch { expected: 2, found: p.nvars() });
    }
    let (a, b) = normalized_split(p, center)?;
    let m = a.order().unwrap_or(0) as usize;
    let (ar, br) = (real_coeffs(&a), real_coeffs(&b));
    let curves: Vec<TracedCurve> = t_values.par_iter().map(|&t| trace_rows(&add_scaled(&ar, &br, t), t, m, &window)).collect();
    for c in &curves {
        let near: Vec<&f64> = c.count_mismatch.iter().filter(|x| x.abs() < window.r / 4.0).collect();
        if !near.is_empty() && near.len() * 2 > c.samples.len() / 4 {
            return Err(Error::Numerical(format!(
                "level set t = {} has a root count different from {} near the origin; shrink the window",
                c.t, m
            )));
        }
    }
    Ok(curves)
}

/// Slope of each traced branch at the origin, extrapolated linearly in `x1` from the
/// two samples nearest `x1 = 0+`.
pub fn traced_slopes(curve: &TracedCurve) -> Vec<f64> {
    let mut pos: Vec<&(f64, Vec<f64>)> = curve.samples.iter().filter(|(x1, r)| *x1 > 0.0 && r.len() == curve.expected).collect();
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    match pos.as_slice() {
        [(xa, ra), (xb, rb), ..] => {
            ra.iter().zip(rb).map(|(ya, yb)| (xb * ya / xa - xa * yb / xb) / (xb - xa)).collect()
        }
        [(x1, r)] => r.iter().map(|x2| x2 / x1).collect(),
        [] => vec![],
    }
}

// ---------------------------------------------------------------------------
// level regions

#[derive(Clone, Debug)]
pub struct PinchFit {
    /// Lowest power of `x1` where the paired branch series differ.
    pub order: Option<usize>,
    /// Largest sampled `|psi(x1; s1) - psi(x1; s2)| / x1^2`.
    pub quadratic_constant: f64,
}

#[derive(Clone, Debug)]
pub struct LevelRegion {
    pub s1: f64,
    pub s2: f64,
    pub window: Window,
    /// Branch series `x2 = -psi(x1)` of `A - s1 B` and `A - s2 B`, paired by order for `x1 > 0`.
    pub branch_pairs: Vec<(TruncatedSeries, TruncatedSeries)>,
    pub pinching: Vec<PinchFit>,
    /// Sign of `(A - s1 B)(A - s2 B)` alternates correctly between sampled endpoints.
    pub sandwich: bool,
    /// Endpoint labels scanned upward alternate between `s1` and `s2`.
    pub interlacing: bool,
    /// Which value the upward scan meets first (1 or 2), when consistent.
    pub first_endpoint: Option<u8>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl LevelRegion {
    /// Endpoint intervals of the region slice at `x1`.
    pub fn intervals(&self, x1: f64) -> Vec<(f64, f64)> {
        let lo = real_roots_in(&slice(&add_scaled(&self.a, &self.b, -self.s1), x1), -self.window.big_r, self.window.big_r);
        let hi = real_roots_in(&slice(&add_scaled(&self.a, &self.b, -self.s2), x1), -self.window.big_r, self.window.big_r);
        lo.iter().zip(&hi).map(|(&u, &v)| (u.min(v), u.max(v))).collect()
    }

    /// Membership through the paired branch intervals.
    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        self.intervals(x[0]).iter().any(|&(u, v)| x[1] >= u - tol && x[1] <= v + tol)
    }

    /// Direct predicate `s1 <= A/B <= s2`.
    pub fn ratio_in_range(&self, x: [f64; 2], tol: f64) -> bool {
        let (a, b) = (eval_real(&self.a, x), eval_real(&self.b, x));
        if b == 0.0 {
            return a == 0.0;
        }
        let r = a / b;
        r >= self.s1 - tol && r <= self.s2 + tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s1": self.s1,
            "s2": self.s2,
            "window": self.window,
            "pairs": self.branch_pairs.len(),
            "pinching": self.pinching.iter().map(|f| json!({ "order": f.order, "quadratic_constant": f.quadratic_constant })).collect::<Vec<_>>(),
            "sandwich": self.sandwich,
            "interlacing": self.interlacing,
            "first_endpoint": self.first_endpoint,
        })
    }
}

fn series_value(s: &TruncatedSeries, x1: f64) -> f64 {
    let t = x1.powf(1.0 / s.ramification as f64);
    s.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c.to_c64()).re
}

fn branch_series(f: &Polynomial) -> Result<Vec<TruncatedSeries>> {
    let zero = vec![Coefficient::zero(), Coefficient::zero()];
    let fact = puiseux_factorize(f, &zero, 12)?;
    let mut series: Vec<TruncatedSeries> = fact.branches.into_iter().map(|b| b.series.neg()).collect();
    let probe = 1e-3;
    series.sort_by(|a, b| series_value(a, probe).total_cmp(&series_value(b, probe)));
    Ok(series)
}

/// The region `{ s1 <= A/B <= s2 }` near the origin, with branch pairing and checks.
pub fn level_region(p: &Polynomial, center: &[Coefficient], s1: f64, s2: f64, window: Window) -> Result<LevelRegion> {
    if s1 > s2 {
        return Err(Error::Precondition("level region needs s1 <= s2".into()));
    }
    let (a, b) = normalized_split(p, center)?;
    let lower = branch_series(&(&a - &b.scale(&Coefficient::Approx(Complex64::new(s1, 0.0)))))?;
    let upper = branch_series(&(&a - &b.scale(&Coefficient::Approx(Complex64::new(s2, 0.0)))))?;
    if lower.len() != upper.len() {
        return Err(Error::Numerical(format!("branch counts differ: {} vs {}", lower.len(), upper.len())));
    }
    let mut region = LevelRegion {
        s1,
        s2,
        window,
        branch_pairs: lower.into_iter().zip(upper).collect(),
        pinching: vec![],
        sandwich: true,
        interlacing: true,
        first_endpoint: None,
        a: real_coeffs(&a),
        b: real_coeffs(&b),
    };
    let grid = window.positive_grid();
    region.pinching = region
        .branch_pairs
        .iter()
        .map(|(l, u)| {
            let diff = l.sub(u);
            let order = diff.coeffs.iter().position(|c| c.abs() > 1e-9).map(|k| k / l.ramification.max(1) as usize);
            let quadratic_constant =
                grid.iter().map(|&x| (series_value(l, x) - series_value(u, x)).abs() / (x * x)).fold(0.0, f64::max);
            PinchFit { order, quadratic_constant }
        })
        .collect();
    let (f1, f2) = (add_scaled(&region.a, &region.b, -s1), add_scaled(&region.a, &region.b, -s2));
    let mut first = None;
    for &x1 in &grid {
        let mut ends: Vec<(f64, u8)> = real_roots_in(&slice(&f1, x1), -window.big_r, window.big_r).into_iter().map(|x| (x, 1)).collect();
        ends.extend(real_roots_in(&slice(&f2, x1), -window.big_r, window.big_r).into_iter().map(|x| (x, 2)));
        ends.sort_by(|u, v| u.0.total_cmp(&v.0));
        if s1 == s2 {
            continue;
        }
        let labels: Vec<u8> = ends.iter().map(|e| e.1).collect();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            region.interlacing = false;
        }
        if let Some(&l) = labels.first() {
            match first {
                None => first = Some(l),
                Some(f) if f != l => region.interlacing = false,
                _ => {}
            }
        }
        // inside a pair the product is non-positive, between pairs positive
        for (k, w) in ends.windows(2).enumerate() {
            let mid = [x1, 0.5 * (w[0].0 + w[1].0)];
            let prod = eval_real(&f1, mid) * eval_real(&f2, mid);
            let inside = k % 2 == 0;
            if (inside && prod > 0.0) || (!inside && prod < 0.0) {
                region.sandwich = false;
            }
        }
    }
    region.first_endpoint = if region.interlacing { first } else { None };
    Ok(region)
}

// ---------------------------------------------------------------------------
// horns

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HornKind {
    /// `|x2 - a x1| <= B x1^2`.
    NonTrivial(f64),
    /// `|x2| <= B x1^2` (slope 0).
    TrivialAlongX1,
    /// `|x1| <= B x2^2` (infinite slope).
    TrivialAlongX2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Horn {
    pub kind: HornKind,
    pub b: f64,
    pub radius: f64,
}

impl Horn {
    pub fn with_slope(a: f64, b: f64, radius: f64) -> Self {
        let kind = if a == 0.0 {
            HornKind::TrivialAlongX1
        } else if a.is_infinite() {
            HornKind::TrivialAlongX2
        } else {
            HornKind::NonTrivial(a)
        };
        Horn { kind, b, radius }
    }

    pub fn slope(&self) -> f64 {
        match self.kind {
            HornKind::NonTrivial(a) => a,
            HornKind::TrivialAlongX1 => 0.0,
            HornKind::TrivialAlongX2 => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        if x[0].hypot(x[1]) > self.radius {
            return false;
        }
        match self.kind {
            HornKind::NonTrivial(a) => (x[1] - a * x[0]).abs() <= self.b * x[0] * x[0],
            HornKind::TrivialAlongX1 => x[1].abs() <= self.b * x[0] * x[0],
            HornKind::TrivialAlongX2 => x[0].abs() <= self.b * x[1] * x[1],
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HornJson {
    slope: Value,
    #[serde(rename = "B")]
    b: f64,
    radius: f64,
}

impl Serialize for Horn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let slope = match self.kind {
            HornKind::TrivialAlongX2 => json!("inf"),
            _ => json!(self.slope()),
        };
        HornJson { slope, b: self.b, radius: self.radius }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Horn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let h = HornJson::deserialize(d)?;
        let a = match &h.slope {
            Value::String(s) if s == "inf" => f64::INFINITY,
            Value::Number(n) => n.as_f64().ok_or_else(|| D::Error::custom("bad slope"))?,
            _ => return Err(D::Error::custom("slope must be a number or \"inf\"")),
        };
        if !(h.b > 0.0 && h.b.is_finite()) || !(h.radius > 0.0) || a.is_nan() {
            return Err(D::Error::custom("horn needs B > 0 and radius > 0"));
        }
        Ok(Horn::with_slope(a, h.b, h.radius))
    }
}

/// Horn JSON: one horn object or an array of them.
pub fn parse_horns(text: &str) -> Result<Vec<Horn>> {
    let err = |e: serde_json::Error| Error::Parse { pos: e.column(), msg: e.to_string() };
    let v: Value = serde_json::from_str(text).map_err(err)?;
    let horns: Vec<Horn> = match v {
        Value::Array(_) => serde_json::from_value(v).map_err(err)?,
        other => vec![serde_json::from_value(other).map_err(err)?],
    };
    if horns.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "no horns given".into() });
    }
    Ok(horns)
}

#[derive(Clone, Debug)]
pub struct HornClassification {
    /// First horn containing each point.
    pub membership: Vec<Option<usize>>,
    /// Index from which every (selected) point is a member; `None` if the tail escapes.
    pub trapped_from: Option<usize>,
}

impl HornClassification {
    pub fn all_members(&self) -> bool {
        self.membership.iter().all(|m| m.is_some())
    }

    pub fn trapped(&self) -> bool {
        self.trapped_from.is_some()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "membership": self.membership,
            "all_members": self.all_members(),
            "trapped": self.trapped(),
            "trapped_from": self.trapped_from,
        })
    }
}

/// Optional value filter for a sequence: only points with `|f(x) - target| < eps` count.
#[derive(Clone, Debug)]
pub struct ValueFilter {
    pub values: Vec<Complex64>,
    pub target: Complex64,
    pub eps: f64,
}

/// Membership of each point in the union of horns, and whether the sequence is
/// eventually trapped: all selected points from some index on are members.
pub fn horn_classify(points: &[[f64; 2]], horns: &[Horn], filter: Option<&ValueFilter>) -> Result<HornClassification> {
    if let Some(f) = filter {
        if f.values.len() != points.len() {
            return Err(Error::Invalid("value list length differs from point list".into()));
        }
    }
    let membership: Vec<Option<usize>> = points.iter().map(|x| horns.iter().position(|h| h.contains(*x))).collect();
    let selected = |k: usize| filter.is_none_or(|f| (f.values[k] - f.target).norm() < f.eps);
    let last_escape = (0..points.len()).rev().find(|&k| selected(k) && membership[k].is_none());
    let trapped_from = match last_escape {
        None => Some(0),
        Some(k) if k + 1 < points.len() && (k + 1..points.len()).any(selected) => Some(k + 1),
        _ => None,
    };
    Ok(HornClassification { membership, trapped_from })
}

/// Smallest `B` with every point within `radius` inside the slope-`a` horn.
pub fn fit_horn_constant(points: &[[f64; 2]], a: f64, radius: f64) -> f64 {
    points
        .iter()
        .filter(|x| x[0].hypot(x[1]) <= radius && x[0] != 0.0)
        .map(|x| (x[1] - a * x[0]).abs() / (x[0] * x[0]))
        .fold(0.0, f64::max)
}

/// Points of `{ q = lambda p }` on the torus near `(1, 1)` in angle coordinates,
/// one per unimodular root `z2` with `|arg z2| < pi/2`, for each `theta1`.
pub fn torus_level_points(q: &Polynomial, p: &Polynomial, lambda: Complex64, theta1: &[f64]) -> Vec<[f64; 2]> {
    let f = &q.to_approx() - &p.to_approx().scale(&Coefficient::Approx(lambda));
    let rows = f.coeffs_in(1);
    let mut out = Vec::new();
    for &th in theta1 {
        let z1 = Complex64::from_polar(1.0, th);
        let c: Vec<Coefficient> = rows.iter().map(|r| Coefficient::Approx(r.eval_c64(&[z1, Complex64::new(0.0, 0.0)]))).collect();
        for (z2, _) in UPoly::new(c).roots() {
            let z2 = z2.to_c64();
            if (z2.norm() - 1.0).abs() < 1e-8 && z2.arg().abs() < std::f64::consts::FRAC_PI_2 {
                out.push([th, z2.arg()]);
            }
        }
    }
    out
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
    fn line_traces_match_closed_form() {
        let f = p("z1 + z2 - 2*i*z1*z2");
        let curves = trace_level_sets(&f, &origin(), &[-1.0, 0.0, 1.0], Window::new(0.2, 1.0)).unwrap();
        for c in &curves {
            assert_eq!(c.expected, 1);
            assert!(c.count_mismatch.is_empty());
            for (x1, r) in &c.samples {
                let want = -x1 / (1.0 - 2.0 * c.t * x1);
                assert!((r[0] - want).abs() < 1e-12, "t={} x1={x1}: {} vs {want}", c.t, r[0]);
            }
        }
    }

    #[test]
    fn line_region_is_a_pinched_strip() {
        let f = p("z1 + z2 - 2*i*z1*z2");
        let reg = level_region(&f, &origin(), -1.0, 1.0, Window::new(0.2, 1.0)).unwrap();
        assert_eq!(reg.branch_pairs.len(), 1);
        assert_eq!(reg.pinching[0].order, Some(2));
        assert!(reg.sandwich && reg.interlacing);
        let iv = reg.intervals(0.1);
        let (a, b): (f64, f64) = (-0.1 / (1.0 + 0.2), -0.1 / (1.0 - 0.2));
        assert!((iv[0].0 - b.min(a)).abs() < 1e-12 && (iv[0].1 - b.max(a)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_region_has_zero_width() {
        let f = p("z1 + z2 - 2*i*z1*z2");
        let reg = level_region(&f, &origin(), 0.5, 0.5, Window::new(0.2, 1.0)).unwrap();
        let iv = reg.intervals(0.1);
        assert!((iv[0].1 - iv[0].0).abs() < 1e-14);
        assert_eq!(reg.pinching[0].order, None);
    }

    #[test]
    fn horn_predicates() {
        let h = Horn::with_slope(-1.0, 2.0, 1.0);
        for k in 1..50 {
            let x = 0.5 / k as f64;
            assert!(h.contains([x, -x + x * x]));
        }
        let t0 = Horn::with_slope(0.0, 1.0, 1.0);
        assert!(t0.contains([0.1, 0.01]) && !t0.contains([0.1, 0.011]));
        let ti = Horn::with_slope(f64::INFINITY, 1.0, 1.0);
        assert!(ti.contains([0.01, 0.1]) && !ti.contains([0.011, 0.1]));
        assert!(!h.contains([2.0, -2.0]));
    }

    #[test]
    fn horn_json_roundtrip() {
        for h in [Horn::with_slope(-1.0, 2.0, 0.5), Horn::with_slope(0.0, 1.0, 1.0), Horn::with_slope(f64::INFINITY, 3.0, 1.0)] {
            let s = serde_json::to_string(&h).unwrap();
            assert_eq!(serde_json::from_str::<Horn>(&s).unwrap(), h);
        }
        assert!(serde_json::from_str::<Horn>(r#"{"slope":"up","B":1,"radius":1}"#).is_err());
    }

    #[test]
    fn three_halves_offset_escapes() {
        let pts: Vec<[f64; 2]> = (1..200).map(|k| 0.1 * 0.97f64.powi(k)).map(|x| [x, -x + x.powf(1.5)]).collect();
        let c = horn_classify(&pts, &[Horn::with_slope(-1.0, 5.0, 1.0)], None).unwrap();
        assert!(!c.trapped());
        let pts: Vec<[f64; 2]> = (1..200).map(|k| 0.1 * 0.97f64.powi(k)).map(|x| [x, -x + 0.5 * x * x]).collect();
        let c = horn_classify(&pts, &[Horn::with_slope(-1.0, 1.0, 1.0)], None).unwrap();
        assert!(c.trapped() && c.all_members());
    }

    #[test]
    fn value_filter_selects_points() {
        let pts = [[0.1, 0.1], [0.01, -0.01]];
        let f = ValueFilter { values: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], target: Complex64::new(1.0, 0.0), eps: 0.1 };
        let c = horn_classify(&pts, &[Horn::with_slope(-1.0, 1.0, 1.0)], Some(&f)).unwrap();
        assert_eq!(c.membership, vec![None, Some(0)]);
        assert_eq!(c.trapped_from, Some(0));
    }

    #[test]
    fn unit_level_set_is_the_antidiagonal() {
        let f = p("2 - z1 - z2");
        let q = p("(z1 - 1)*(z2 - 1)");
        let th: Vec<f64> = (1..20).map(|k| 0.01 * k as f64).collect();
        let pts = torus_level_points(&q, &f, Complex64::new(1.0, 0.0), &th);
        assert_eq!(pts.len(), th.len());
        for x in pts {
            assert!((x[1] + x[0]).abs() < 1e-10);
        }
    }
}
