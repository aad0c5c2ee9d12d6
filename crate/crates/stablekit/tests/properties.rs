use proptest::prelude::*;
use stablekit::corpus;
use stablekit::homog::decompose;
use stablekit::integrability::{
    derivative_integrability_indices, intersection_multiplicity, quotient_multiplicity, torus_zeros,
};
use stablekit::poly::{compose_branch, default_vars, reflect, split_real_imag, Branch, TruncatedSeries, VanishingOrder};
use stablekit::puiseux::{contact_orders, puiseux_factorize, switch_variables};
use stablekit::stability::dichotomy_split;
use stablekit::{Coefficient, Domain, GaussRat, Polynomial};

fn gauss(re: (i64, i64), im: (i64, i64)) -> Coefficient {
    let r = |(n, d): (i64, i64)| GaussRat::ratio(n, d).re;
    Coefficient::Exact(GaussRat::new(r(re), r(im)))
}

fn poly_strategy(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let term = (0..=max_exp, 0..=max_exp, -6i64..=6, 1i64..=4, -3i64..=3, 1i64..=3);
    prop::collection::vec(term, 1..=max_terms).prop_map(|ts| {
        let vars = default_vars(2);
        Polynomial::from_terms(&vars, ts.into_iter().map(|(a, b, n, d, m, e)| (vec![a, b], gauss((n, d), (m, e)))))
    })
}

fn swap(p: &Polynomial) -> Polynomial {
    let v = default_vars(2);
    p.substitute(&[Polynomial::var(&v, 1), Polynomial::var(&v, 0)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_polynomials_parse_back(p in poly_strategy(4, 6)) {
        prop_assert_eq!(Polynomial::parse2(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn json_roundtrip(p in poly_strategy(4, 6)) {
        prop_assert_eq!(Polynomial::from_json_str(&p.to_json_string()).unwrap(), p);
    }

    #[test]
    fn reflections_are_involutions(p in poly_strategy(3, 5)) {
        prop_assert_eq!(reflect(&reflect(&p, Domain::UpperHalfPlane, None).unwrap(), Domain::UpperHalfPlane, None).unwrap(), p.clone());
        let n = p.multidegree();
        let once = reflect(&p, Domain::Disk, Some(&n)).unwrap();
        prop_assert_eq!(reflect(&once, Domain::Disk, Some(&n)).unwrap(), p);
    }

    #[test]
    fn real_and_imaginary_parts_recombine(p in poly_strategy(3, 6)) {
        let (a, b) = split_real_imag(&p);
        prop_assert!(a.is_real() && b.is_real());
        let i = Polynomial::constant(p.vars(), Coefficient::Exact(GaussRat::i()));
        prop_assert_eq!(&a + &(&i * &b), p);
    }

    #[test]
    fn homogeneous_parts_sum_to_the_shift(p in poly_strategy(3, 6), c in (-2i64..=2, -2i64..=2)) {
        let center = vec![Coefficient::int(c.0), Coefficient::int(c.1)];
        let p = &p - &Polynomial::constant(p.vars(), p.eval(&center));
        prop_assume!(!p.is_zero());
        let dec = decompose(&p, &center).unwrap();
        let mut sum = Polynomial::zero(p.vars());
        for part in &dec.parts {
            sum = &sum + part;
        }
        prop_assert_eq!(sum, p.shift(&center));
    }

    #[test]
    fn composition_orders_add(p in poly_strategy(3, 4), q in poly_strategy(3, 4), seg in prop::collection::vec(-3i64..=3, 1..4)) {
        // branch z2 = sum seg_k z1^(k+1), exact to every order
        let mut c = vec![Coefficient::zero()];
        c.extend(seg.iter().map(|&k| Coefficient::int(k)));
        let branch = Branch::new(TruncatedSeries::exact(c, 1));
        let (op, oq, opq) = (
            compose_branch(&p, &branch).unwrap().order,
            compose_branch(&q, &branch).unwrap().order,
            compose_branch(&(&p * &q), &branch).unwrap().order,
        );
        if let (VanishingOrder::Exact(a), VanishingOrder::Exact(b)) = (op, oq) {
            prop_assert_eq!(opq, VanishingOrder::Exact(a + b));
        }
    }

    #[test]
    fn dichotomy_split_reconstructs(p in poly_strategy(2, 4), k in 0u32..3) {
        // multiply in a factor equal to its own reflection so the symmetric part is nontrivial
        let line = Polynomial::parse2("z1 + z2").unwrap();
        let p = &p * &line.pow(k);
        prop_assume!(!p.is_zero());
        let s = dichotomy_split(&p, Domain::UpperHalfPlane).unwrap();
        prop_assert_eq!(&s.pure_part * &s.symmetric_part, p);
        prop_assert!(s.symmetric_part.degree().unwrap() >= k);
    }
}

#[test]
fn intersection_multiplicity_is_symmetric_and_matches_the_quotient() {
    for f in [corpus::TWO_BRANCH, corpus::RIF_LINE, corpus::CONTACT_FOUR, corpus::TWO_ZEROS] {
        let p = f.poly();
        for tau in torus_zeros(&p).unwrap() {
            let n = intersection_multiplicity(&p, &tau).unwrap();
            let swapped = intersection_multiplicity(&swap(&p), &[tau[1].clone(), tau[0].clone()]).unwrap();
            assert_eq!(n, swapped, "{}", f.name);
            assert_eq!(n, quotient_multiplicity(&p, &tau).unwrap(), "{}", f.name);
        }
    }
}

#[test]
fn finite_index_count_is_bounded_by_multiplicities() {
    for f in [corpus::RIF_LINE, corpus::CONTACT_FOUR, corpus::TWO_ZEROS] {
        let prof = derivative_integrability_indices(&f.poly()).unwrap();
        assert!(prof.count_bound_holds(), "{}", f.name);
    }
}

#[test]
fn switching_variables_keeps_contact_orders() {
    for f in [corpus::LINE_UHP, corpus::TWO_BRANCH, corpus::CONTACT_SIX, corpus::RIF_LINE, corpus::CONTACT_FOUR] {
        let shifted = f.at_origin().unwrap();
        let origin = vec![Coefficient::zero(), Coefficient::zero()];
        let fact = puiseux_factorize(&shifted, &origin, 12).unwrap();
        let a = contact_orders(&fact).unwrap();
        let b = contact_orders(&switch_variables(&fact).unwrap()).unwrap();
        assert_eq!((a.k, a.k_min), (b.k, b.k_min), "{}", f.name);
        assert_eq!(fact.branches.iter().map(|b| b.multiplicity).sum::<u32>(), fact.order, "{}", f.name);
    }
}
