use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stablekit::boundary::{fit_horn_constant, horn_classify, level_region, torus_level_points, trace_level_sets, traced_slopes, Horn, Window};
use stablekit::corpus::{CONTACT_SIX, TWO_BRANCH, LINE_UHP, RIF_LINE, RIF_LINE_NUMERATOR};
use stablekit::{Coefficient, Polynomial};

fn origin() -> Vec<Coefficient> {
    vec![Coefficient::zero(), Coefficient::zero()]
}

#[test]
fn two_branch_tangents_do_not_depend_on_t() {
    let p = TWO_BRANCH.at_origin().unwrap();
    let mut w = Window::new(0.05, 1.0);
    w.geometric = true;
    let curves = trace_level_sets(&p, &origin(), &[-2.0, 0.0, 2.0], w).unwrap();
    let s3 = 3f64.sqrt();
    for c in &curves {
        let slopes = traced_slopes(c);
        assert_eq!(slopes.len(), 2, "t = {}", c.t);
        let want = [-(2.0 + s3), -(2.0 - s3)];
        for (s, w) in slopes.iter().zip(want) {
            assert!((s - w).abs() < 1e-4, "t = {}: {s} vs {w}", c.t);
        }
    }
}

#[test]
fn contact_six_pair_pinches_at_contact_order() {
    let p = CONTACT_SIX.at_origin().unwrap();
    let reg = level_region(&p, &origin(), -1.0, 1.0, Window::new(0.05, 0.5)).unwrap();
    assert_eq!(reg.branch_pairs.len(), 1);
    assert_eq!(reg.pinching[0].order, Some(6));
    assert!(reg.sandwich);
}

#[test]
fn region_membership_matches_ratio_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for fx in [LINE_UHP, CONTACT_SIX] {
        let p = fx.at_origin().unwrap();
        let w = Window::new(0.1, 0.5);
        let reg = level_region(&p, &origin(), -1.0, 1.0, w).unwrap();
        assert!(reg.sandwich && reg.interlacing, "{}", fx.name);
        let mut checked = 0;
        while checked < 200 {
            let x = [rng.random_range(1e-3..w.r), rng.random_range(-0.2..0.05)];
            // skip samples within the tie tolerance of a boundary curve
            let near = reg.intervals(x[0]).iter().any(|&(u, v)| (x[1] - u).abs() < 1e-9 || (x[1] - v).abs() < 1e-9);
            if near {
                continue;
            }
            assert_eq!(reg.contains(x, 0.0), reg.ratio_in_range(x, 0.0), "{} at {x:?}", fx.name);
            checked += 1;
        }
    }
}

#[test]
fn rif_level_sets_are_trapped_in_a_slope_minus_one_horn() {
    let p = RIF_LINE.poly();
    let q = Polynomial::parse2(RIF_LINE_NUMERATOR).unwrap();
    let theta: Vec<f64> = (0..400).map(|k| 0.2 * 0.98f64.powi(k)).flat_map(|t| [t, -t]).collect();
    for lambda in [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5)] {
        let pts = torus_level_points(&q, &p, lambda, &theta);
        assert!(pts.len() >= theta.len() / 2, "{lambda}");
        let b = fit_horn_constant(&pts, -1.0, 1e-2);
        assert!(b <= 5.0, "{lambda}: B = {b}");
        let mut near: Vec<[f64; 2]> = pts.clone();
        near.sort_by(|u, v| v[0].hypot(v[1]).total_cmp(&u[0].hypot(u[1])));
        let c = horn_classify(&near, &[Horn::with_slope(-1.0, 5.0, 1e-2)], None).unwrap();
        assert!(c.trapped(), "{lambda}");
    }
}
