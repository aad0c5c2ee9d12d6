use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::time::Instant;

use stablekit::boundary::{
    fit_horn_constant, horn_classify, parse_horns, level_region, torus_level_points, trace_level_sets, traced_slopes, Window,
};
use stablekit::homog::{decompose, homog_report};
use stablekit::integrability::{
    cayley_at, derivative_integrability_indices, integrability_cutoff_estimate, torus_zeros, Classification,
    QuadratureParams,
};
use stablekit::numerator::{is_locally_bounded, Boundedness};
use stablekit::puiseux::{
    contact_orders, match_perturbed_segments, puiseux_factorize, unit_affine_check, verify_branch_lower_bound, BranchKind,
};
use stablekit::realization::{local_split, validate_pip, PipRealization};
use stablekit::regularity::{analyze_regularity, jet_error_profile, uco_regularity_crosscheck};
use stablekit::stability::{check_stable, dichotomy_split, Resolution, Verdict};
use stablekit::{Coefficient, Domain, Polynomial};

use crate::cli::{Command, Local};
use crate::input::{file_or_inline, load_points, load_poly, parse_center, parse_complex, parse_list, parse_pair};

/// What a subcommand produced.
pub struct Outcome {
    pub result: Value,
    pub input: Value,
    pub config: Value,
    pub inconclusive: bool,
    /// A check the input failed; reported with exit status 1.
    pub failure: Option<String>,
    /// CSV text, and the file it goes to (`None`: standard output unless JSON was asked for).
    pub csv: Option<(Option<String>, String)>,
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    fn new(result: Value, input: Value, config: Value) -> Self {
        Outcome { result, input, config, inconclusive: false, failure: None, csv: None, timings: vec![] }
    }
}

struct Clock {
    stages: Vec<(String, f64)>,
}

impl Clock {
    fn new() -> Self {
        Clock { stages: vec![] }
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), t0.elapsed().as_secs_f64()));
        out
    }
}

fn origin() -> Vec<Coefficient> {
    vec![Coefficient::zero(), Coefficient::zero()]
}

fn default_center(domain: Domain) -> Vec<Coefficient> {
    match domain {
        Domain::Disk => vec![Coefficient::one(), Coefficient::one()],
        Domain::UpperHalfPlane => origin(),
    }
}

fn center_json(c: &[Coefficient]) -> Value {
    Value::Array(c.iter().map(|x| x.to_json()).collect())
}

fn max_degree(polys: &[&Polynomial]) -> Vec<u32> {
    let mut n = vec![0, 0];
    for p in polys {
        for (k, d) in p.multidegree().into_iter().enumerate() {
            n[k] = n[k].max(d);
        }
    }
    n
}

/// The polynomials in half-plane coordinates with the analysed point, moving disk
/// inputs to the Cayley chart at the center.
fn to_chart(polys: &[&Polynomial], domain: Domain, center: &[Coefficient]) -> Result<(Vec<Polynomial>, Vec<Coefficient>)> {
    match domain {
        Domain::UpperHalfPlane => Ok((polys.iter().map(|p| (*p).clone()).collect(), center.to_vec())),
        Domain::Disk => {
            let n = max_degree(polys);
            let charts = polys.iter().map(|p| cayley_at(p, center, &n)).collect::<stablekit::Result<Vec<_>>>()?;
            Ok((charts, origin()))
        }
    }
}

fn local_setup(local: &Local) -> Result<(Polynomial, Domain, Vec<Coefficient>)> {
    let p = load_poly(&local.den)?;
    if p.is_zero() {
        return Err(stablekit::Error::ZeroPolynomial.into());
    }
    let domain: Domain = local.domain.into();
    let center = match &local.center {
        Some(c) => parse_center(c)?,
        None => default_center(domain),
    };
    Ok((p, domain, center))
}

fn local_input(p: &Polynomial, domain: Domain, center: &[Coefficient]) -> Value {
    json!({ "den": p.to_string(), "domain": domain.name(), "center": center_json(center) })
}

fn chart_note(domain: Domain, chart: &Polynomial) -> Value {
    match domain {
        Domain::Disk => json!(chart.to_string()),
        Domain::UpperHalfPlane => Value::Null,
    }
}

fn or_error(r: stablekit::Result<Value>, errors: &mut Vec<String>, stage: &str) -> Value {
    r.unwrap_or_else(|e| {
        errors.push(format!("{stage}: {e}"));
        json!({ "error": e.to_string() })
    })
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Stability { den, domain, grid, tol } => stability(den, (*domain).into(), *grid, *tol),
        Command::Homog { local } => homog(local),
        Command::Puiseux { local, order, t, perturb, seed, radius } => puiseux(local, *order, t.as_deref(), *perturb, *seed, *radius),
        Command::Regularity { local, num, kmax } => regularity(local, num, *kmax),
        Command::Numerator { local, num } => numerator(local, num),
        Command::Integrability { den, num, enumerate: _, p, csv } => integrability(den, num.as_deref(), p, csv.as_deref()),
        Command::Trace { local, t, window, samples, geometric, region, csv } => {
            trace(local, t, window, *samples, *geometric, region.as_deref(), csv.as_deref())
        }
        Command::Horn { horns, points, den, num, lambda, fit_slope } => {
            horn(horns, points.as_deref(), den.as_deref(), num.as_deref(), lambda.as_deref(), *fit_slope)
        }
        Command::Realize { file, check, split, samples, tol } => realize(file, *check, *split, *samples, *tol),
        Command::Full { den, num, domain, center, order, grid, kmax } => {
            full(den, num.as_deref(), (*domain).into(), center.as_deref(), *order, *grid, *kmax)
        }
    }
}

fn stability(den: &str, domain: Domain, grid: usize, tol: Option<f64>) -> Result<Outcome> {
    let p = load_poly(den)?;
    let mut res = Resolution::from_grid(grid);
    if let Some(t) = tol {
        res.tol = t;
    }
    let report = check_stable(&p, domain, res)?;
    let mut out = Outcome::new(
        report.to_json(),
        json!({ "den": p.to_string(), "domain": domain.name() }),
        json!({ "grid": grid, "tol": res.tol }),
    );
    out.inconclusive = matches!(report.verdict, Verdict::Inconclusive(_));
    Ok(out)
}

fn homog(local: &Local) -> Result<Outcome> {
    let (p, domain, center) = local_setup(local)?;
    let (charts, c) = to_chart(&[&p], domain, &center)?;
    let chart = &charts[0];
    let dec = decompose(chart, &c)?;
    let mut result = homog_report(chart, &c)?.to_json();
    result["parts"] = json!(dec.parts.iter().take(3).map(|q| q.to_string()).collect::<Vec<_>>());
    result["chart"] = chart_note(domain, chart);
    Ok(Outcome::new(result, local_input(&p, domain, &center), json!({})))
}

fn perturbation_values(t: Option<&str>, perturb: Option<usize>, seed: u64) -> Result<Option<Vec<f64>>> {
    if let Some(t) = t {
        return Ok(Some(parse_list(t)?));
    }
    Ok(perturb.map(|k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()
    }))
}

fn puiseux(local: &Local, order: usize, t: Option<&str>, perturb: Option<usize>, seed: u64, radius: f64) -> Result<Outcome> {
    let (p, domain, center) = local_setup(local)?;
    let (charts, c) = to_chart(&[&p], domain, &center)?;
    let chart = &charts[0];
    let fact = puiseux_factorize(chart, &c, order)?;
    let mut errors = Vec::new();
    let contact = or_error(contact_orders(&fact).map(|k| k.to_json()), &mut errors, "contact_orders");
    let certificates: Vec<Value> = fact
        .branches
        .iter()
        .filter(|b| b.is_pure())
        .map(|b| or_error(verify_branch_lower_bound(b, radius, 10_000).map(|c| c.to_json()), &mut errors, "lower_bound"))
        .collect();
    let mut result = json!({
        "factorization": fact.to_json(),
        "contact_orders": contact,
        "lower_bounds": certificates,
        "chart": chart_note(domain, chart),
    });
    let ts = perturbation_values(t, perturb, seed)?;
    if let Some(ts) = &ts {
        result["perturbation"] = or_error(match_perturbed_segments(chart, &c, ts, order).map(|r| r.to_json()), &mut errors, "perturbation");
        result["unit_affine"] = or_error(unit_affine_check(chart, &c, ts, order).map(|r| r.to_json()), &mut errors, "unit_affine");
    }
    let mut out = Outcome::new(
        result,
        local_input(&p, domain, &center),
        json!({ "order": order, "radius": radius, "seed": seed, "t": ts }),
    );
    out.inconclusive = fact.branches.iter().any(|b| matches!(b.kind, BranchKind::Indeterminate(_)));
    Ok(out)
}

fn regularity(local: &Local, num: &str, kmax: u32) -> Result<Outcome> {
    let (p, domain, center) = local_setup(local)?;
    let q = load_poly(num)?;
    let (charts, c) = to_chart(&[&p, &q], domain, &center)?;
    let (pc, qc) = (&charts[0], &charts[1]);
    let report = analyze_regularity(qc, pc, &c, kmax)?;
    let profile = jet_error_profile(qc, pc, &report, Domain::UpperHalfPlane);
    let mut errors = Vec::new();
    let uco = or_error(uco_regularity_crosscheck(pc, &c).map(|u| u.to_json()), &mut errors, "uco");
    let result = json!({
        "report": report.to_json(),
        "jet_error_profile": profile,
        "uco_crosscheck": uco,
        "chart_den": chart_note(domain, pc),
        "chart_num": chart_note(domain, qc),
    });
    let mut input = local_input(&p, domain, &center);
    input["num"] = json!(q.to_string());
    Ok(Outcome::new(result, input, json!({ "kmax": kmax })))
}

fn numerator(local: &Local, num: &str) -> Result<Outcome> {
    let (p, domain, center) = local_setup(local)?;
    let q = load_poly(num)?;
    let (charts, c) = to_chart(&[&p, &q], domain, &center)?;
    let report = is_locally_bounded(&charts[1], &charts[0], &c)?;
    let mut input = local_input(&p, domain, &center);
    input["num"] = json!(q.to_string());
    let mut out = Outcome::new(report.to_json(), input, json!({}));
    out.inconclusive = report.verdict == Boundedness::Unknown;
    Ok(out)
}

fn integrability(den: &str, num: Option<&str>, exps: &str, csv: Option<&str>) -> Result<Outcome> {
    let p = load_poly(den)?;
    match num {
        Some(num) => {
            let q = load_poly(num)?;
            let exps = parse_list(exps)?;
            let params = QuadratureParams::default();
            let report = integrability_cutoff_estimate(&q, &p, &exps, params)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["zero", "p", "shell", "radius", "sum"])?;
            for (z, e, s, r, v) in report.shell_rows() {
                w.serialize((z, e, s, r, v))?;
            }
            let text = String::from_utf8(w.into_inner()?)?;
            let mut out = Outcome::new(report.to_json(), json!({ "den": p.to_string(), "num": q.to_string() }), json!({ "p": exps }));
            out.inconclusive = report.estimates.iter().any(|e| e.verdict == Classification::Borderline);
            if let Some(path) = csv {
                out.csv = Some((Some(path.to_string()), text));
            }
            Ok(out)
        }
        None => {
            let profile = derivative_integrability_indices(&p)?;
            Ok(Outcome::new(profile.to_json(), json!({ "den": p.to_string() }), json!({})))
        }
    }
}

fn trace(local: &Local, t: &str, window: &str, samples: usize, geometric: bool, region: Option<&str>, csv: Option<&str>) -> Result<Outcome> {
    let (p, domain, center) = local_setup(local)?;
    let (charts, c) = to_chart(&[&p], domain, &center)?;
    let chart = &charts[0];
    let ts = parse_list(t)?;
    let (r, big_r) = parse_pair(window, "window")?;
    if !(r > 0.0 && big_r > 0.0) {
        bail!("window entries must be positive");
    }
    let win = Window { r, big_r, samples, geometric };
    let curves = trace_level_sets(chart, &c, &ts, win)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "x1", "branch_index", "x2"])?;
    for curve in &curves {
        for row in curve.rows() {
            w.serialize(row)?;
        }
    }
    let text = String::from_utf8(w.into_inner()?)?;
    let mut result = json!({
        "curves": curves.iter().map(|k| {
            let mut v = k.to_json();
            v["slopes"] = json!(traced_slopes(k));
            v
        }).collect::<Vec<_>>(),
        "chart": chart_note(domain, chart),
    });
    let mut config = json!({ "t": ts, "window": win });
    if let Some(reg) = region {
        let (s1, s2) = parse_pair(reg, "region")?;
        result["region"] = level_region(chart, &c, s1, s2, win)?.to_json();
        config["region"] = json!([s1, s2]);
    }
    let mut out = Outcome::new(result, local_input(&p, domain, &center), config);
    out.inconclusive = curves.iter().any(|k| !k.count_mismatch.is_empty());
    out.csv = Some((csv.map(str::to_string), text));
    Ok(out)
}

fn horn(
    horns: &str,
    points: Option<&str>,
    den: Option<&str>,
    num: Option<&str>,
    lambda: Option<&str>,
    fit_slope: Option<f64>,
) -> Result<Outcome> {
    let horns = parse_horns(&file_or_inline(horns)?).map_err(|e| anyhow!("horn JSON: {e}"))?;
    let (pts, input) = match (points, den, num, lambda) {
        (Some(pts), _, _, _) => (load_points(pts)?, json!({ "points": pts })),
        (None, Some(d), Some(n), Some(l)) => {
            let (p, q, lam) = (load_poly(d)?, load_poly(n)?, parse_complex(l)?);
            let theta: Vec<f64> = (0..400).map(|k| 0.2 * 0.98f64.powi(k)).flat_map(|t| [t, -t]).collect();
            let mut pts = torus_level_points(&q, &p, lam, &theta);
            pts.sort_by(|u, v| v[0].hypot(v[1]).total_cmp(&u[0].hypot(u[1])));
            (pts, json!({ "den": p.to_string(), "num": q.to_string(), "lambda": [lam.re, lam.im] }))
        }
        _ => bail!("give --points, or --den with --num and --lambda"),
    };
    let cls = horn_classify(&pts, &horns, None)?;
    let mut result = cls.to_json();
    result["points"] = json!(pts.len());
    if let Some(a) = fit_slope {
        result["fitted_B"] = json!(fit_horn_constant(&pts, a, horns[0].radius));
    }
    Ok(Outcome::new(result, input, json!({ "horns": horns })))
}

fn realize(file: &str, check: bool, split: bool, samples: usize, tol: f64) -> Result<Outcome> {
    let r = PipRealization::from_json_str(&file_or_inline(file)?)?;
    let (check, split) = if check || split { (check, split) } else { (true, true) };
    let mut result = Map::new();
    let mut out_failure = None;
    let mut inconclusive = false;
    if check {
        let v = validate_pip(&r, samples, tol)?;
        if !v.valid() {
            out_failure = Some("realization fails the positivity checks".to_string());
        }
        result.insert("check".into(), v.to_json());
    }
    if split {
        let s = match local_split(&r) {
            Ok(s) => {
                let mut j = s.to_json();
                j["invariants_hold"] = json!(s.invariants_hold(1e-9));
                j
            }
            Err(e) => {
                inconclusive = true;
                json!({ "error": e.to_string() })
            }
        };
        result.insert("split".into(), s);
    }
    let mut out = Outcome::new(Value::Object(result), json!({ "n": r.n() }), json!({ "samples": samples, "tol": tol }));
    out.failure = out_failure;
    out.inconclusive = inconclusive;
    Ok(out)
}

fn full(den: &str, num: Option<&str>, domain: Domain, center: Option<&str>, order: usize, grid: usize, kmax: u32) -> Result<Outcome> {
    let p = load_poly(den)?;
    if p.is_zero() {
        return Err(stablekit::Error::ZeroPolynomial.into());
    }
    let q = num.map(load_poly).transpose()?;
    let mut clock = Clock::new();
    let mut errors = Vec::new();
    let mut inconclusive = false;

    let stab = clock.time("stability", || check_stable(&p, domain, Resolution::from_grid(grid)))?;
    inconclusive |= matches!(stab.verdict, Verdict::Inconclusive(_));
    let dich = clock.time("dichotomy", || {
        dichotomy_split(&p, domain).map(|d| {
            json!({
                "pure_part": d.pure_part.to_string(),
                "symmetric_part": d.symmetric_part.to_string(),
                "unimodular_const": d.unimodular_const.to_json(),
            })
        })
    });
    let dich = or_error(dich, &mut errors, "dichotomy");

    let zeros: Vec<Vec<Coefficient>> = match center {
        Some(c) => {
            let c = parse_center(c)?;
            if !p.eval(&c).is_zero() {
                return Err(stablekit::Error::NotAZero.into());
            }
            vec![c]
        }
        None => match domain {
            Domain::Disk => clock.time("torus_zeros", || torus_zeros(&p))?,
            Domain::UpperHalfPlane => {
                if p.eval(&origin()).is_zero() {
                    vec![origin()]
                } else {
                    vec![]
                }
            }
        },
    };

    let mut per_zero = Vec::new();
    for (j, tau) in zeros.iter().enumerate() {
        let mut polys = vec![&p];
        if let Some(q) = &q {
            polys.push(q);
        }
        let (charts, c) = to_chart(&polys, domain, tau)?;
        let pc = &charts[0];
        let mut entry = json!({ "point": center_json(tau), "chart": chart_note(domain, pc) });
        let tag = |s: &str| format!("zero {j}: {s}");
        entry["homog"] = or_error(clock.time(&tag("homog"), || homog_report(pc, &c).map(|h| h.to_json())), &mut errors, &tag("homog"));
        let fact = clock.time(&tag("puiseux"), || puiseux_factorize(pc, &c, order));
        match &fact {
            Ok(f) => {
                inconclusive |= f.branches.iter().any(|b| matches!(b.kind, BranchKind::Indeterminate(_)));
                entry["puiseux"] = f.to_json();
                entry["contact_orders"] = or_error(contact_orders(f).map(|k| k.to_json()), &mut errors, &tag("contact_orders"));
            }
            Err(e) => {
                errors.push(tag(&format!("puiseux: {e}")));
                entry["puiseux"] = json!({ "error": e.to_string() });
            }
        }
        entry["uco_crosscheck"] = or_error(
            clock.time(&tag("uco"), || uco_regularity_crosscheck(pc, &c).map(|u| u.to_json())),
            &mut errors,
            &tag("uco"),
        );
        if q.is_some() {
            let qc = &charts[1];
            entry["regularity"] = or_error(
                clock.time(&tag("regularity"), || analyze_regularity(qc, pc, &c, kmax).map(|r| r.to_json())),
                &mut errors,
                &tag("regularity"),
            );
            let nb = clock.time(&tag("numerator"), || is_locally_bounded(qc, pc, &c));
            if let Ok(r) = &nb {
                inconclusive |= r.verdict == Boundedness::Unknown;
            }
            entry["numerator"] = or_error(nb.map(|r| r.to_json()), &mut errors, &tag("numerator"));
        }
        per_zero.push(entry);
    }

    let integrability = match domain {
        Domain::Disk => or_error(
            clock.time("integrability", || derivative_integrability_indices(&p).map(|x| x.to_json())),
            &mut errors,
            "integrability",
        ),
        Domain::UpperHalfPlane => json!({ "skipped": "torus indices are computed for the disk domain" }),
    };

    let result = json!({
        "stability": stab.to_json(),
        "dichotomy": dich,
        "zeros": per_zero,
        "integrability": integrability,
        "errors": errors,
    });
    let mut input = json!({ "den": p.to_string(), "domain": domain.name(), "center": center });
    if let Some(q) = &q {
        input["num"] = json!(q.to_string());
    }
    let mut out = Outcome::new(result, input, json!({ "order": order, "grid": grid, "kmax": kmax, "stability_tol": Resolution::from_grid(grid).tol }));
    out.inconclusive = inconclusive || !errors.is_empty();
    out.timings = clock.stages;
    Ok(out)
}
