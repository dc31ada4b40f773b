use proptest::prelude::*;

use bvcalc::bv::catalog::piecewise_affine_1d;
use bvcalc::bv::BvFunction;
use bvcalc::functional::{admissibility_check, evaluate, recession_value, FunctionalSpec};
use bvcalc::integrands::{
    from_id, rank_one_convexity_check, sq_envelope, transform_t, transform_t_inv, BallPoint, Catalog, Integrand,
    CATALOG_IDS,
};
use bvcalc::measures::{rn_decompose, Domain, ScalarMeasure};
use bvcalc::scenarios::{oracle_1d, random_cases};
use bvcalc::young::{barycenter, elementary, pairing};
use bvcalc::Mat;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-50.0f64..50.0, rows * cols).prop_map(move |v| Mat::from_rows(rows, cols, &v))
}

fn integrand_id() -> impl Strategy<Value = &'static str> {
    prop::sample::select(CATALOG_IDS.to_vec())
}

/// Piecewise affine function on `(0, 1)` with breaks on the 1/32 grid.
fn piecewise() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, f64)>)> {
    prop::collection::btree_set(1u32..32, 0..4).prop_flat_map(|set| {
        let breaks: Vec<f64> = set.iter().map(|k| *k as f64 / 32.0).collect();
        let n = breaks.len() + 1;
        (Just(breaks), prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n))
    })
}

fn build(breaks: &[f64], coeffs: &[(f64, f64)]) -> BvFunction {
    piecewise_affine_1d(Domain::unit_interval(16), breaks, coeffs).unwrap()
}

fn lebesgue(d: Domain) -> ScalarMeasure {
    ScalarMeasure::lebesgue(d, 1.0).unwrap().dominating(1e-12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_through_the_ball(id in integrand_id(), a in matrix(2, 2), x0 in 0.0f64..1.0) {
        let f = from_id(id).unwrap();
        let x = [x0, 1.0 - x0];
        let back = transform_t_inv(|y, p| transform_t(&f, y, p), x, &a);
        let v = f.eval(x, &a);
        prop_assert!((back - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn ball_points_stay_inside(a in matrix(1, 2)) {
        let p = BallPoint::from_matrix(&a);
        prop_assert!(p.hat().norm() < 1.0);
        prop_assert!((p.hat().norm() + p.gap() - 1.0).abs() < 1e-12);
        prop_assert!(p.unfold().max_abs_diff(&a) <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn recession_is_positively_homogeneous(id in integrand_id(), a in matrix(1, 2), s in 0.01f64..100.0) {
        let f = from_id(id).unwrap();
        let x = [0.3, 0.7];
        let r = recession_value(&f, x, &a).unwrap();
        let rs = recession_value(&f, x, &(a * s)).unwrap();
        prop_assert!((rs - s * r).abs() <= 1e-10 * (1.0 + rs.abs()));
    }

    #[test]
    fn sq_envelopes_dominate_and_decrease(a in matrix(1, 1)) {
        let f = Catalog::area();
        let mut prev = f64::INFINITY;
        for i in [1.0, 2.0, 4.0] {
            let g = sq_envelope(f.clone().into_ref(), i, (1, 1)).unwrap();
            let v = g.eval([0.0, 0.0], &a);
            prop_assert!(v >= f.eval([0.0, 0.0], &a) && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn convex_catalog_is_rank_one_convex(base in matrix(2, 2), a in prop::collection::vec(-1.0f64..1.0, 2), b in prop::collection::vec(-1.0f64..1.0, 2)) {
        for f in [Catalog::norm(), Catalog::area(), Catalog::shifted_norm(Mat::scalar(0.5), 0.25)] {
            let r = rank_one_convexity_check(&f, [0.0, 0.0], &(base * 0.02), &a, &b);
            prop_assert!(r.max_violation <= 1e-10, "{} {}", f.name(), r.max_violation);
        }
    }

    #[test]
    fn decomposition_reconstructs_the_derivative((breaks, coeffs) in piecewise(), atom in 1u32..32, w in 0.1f64..2.0) {
        let u = build(&breaks, &coeffs);
        let d = *u.domain();
        let mu = ScalarMeasure::lebesgue(d, 1.5).unwrap()
            .with_atom([atom as f64 / 32.0, 0.0], w).unwrap()
            .dominating(1e-12).unwrap();
        let du = u.derivative();
        let dec = rn_decompose(&du, &mu).unwrap();
        prop_assert!(dec.reconstruct().max_node_difference(&du) <= 1e-12);
    }

    #[test]
    fn functional_scales_with_the_integrand((breaks, coeffs) in piecewise(), id in integrand_id(), s in 0.1f64..10.0, boundary: bool) {
        let u = build(&breaks, &coeffs);
        let f = from_id(id).unwrap();
        let mu = lebesgue(*u.domain());
        let a = evaluate(&u, &FunctionalSpec::new(f.clone().into_ref(), mu.clone(), boundary).unwrap()).unwrap();
        let b = evaluate(&u, &FunctionalSpec::new(f.scaled(s).into_ref(), mu, boundary).unwrap()).unwrap();
        prop_assert!((s * a.value - b.value).abs() <= 1e-12 * (1.0 + b.value.abs()));
    }

    #[test]
    fn functional_ignores_constant_shifts((breaks, coeffs) in piecewise(), c in -3.0f64..3.0) {
        let u = build(&breaks, &coeffs);
        let spec = FunctionalSpec::new(Catalog::area().into_ref(), lebesgue(*u.domain()), false).unwrap();
        let a = evaluate(&u, &spec).unwrap().value;
        let b = evaluate(&u.shifted(Mat::scalar(c)), &spec).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn elementary_young_measure_recovers_du_and_the_functional((breaks, coeffs) in piecewise(), id in integrand_id()) {
        let u = build(&breaks, &coeffs);
        let mu = lebesgue(*u.domain());
        let du = u.derivative();
        let e = elementary(&du, &mu).unwrap();
        prop_assert!(barycenter(&e).unwrap().max_node_difference(&du) <= 1e-12);
        let f = from_id(id).unwrap();
        let v = evaluate(&u, &FunctionalSpec::new(f.clone().into_ref(), mu, false).unwrap()).unwrap().value;
        prop_assert!((pairing(&f, &e).unwrap() - v).abs() <= 1e-10 * (1.0 + v.abs()));
    }

    #[test]
    fn admissible_iff_jumps_sit_on_atoms((breaks, coeffs) in piecewise()) {
        let u = build(&breaks, &coeffs);
        let d = *u.domain();
        let jumps = breaks.iter().enumerate().any(|(k, b)| {
            let (l, r) = (coeffs[k], coeffs[k + 1]);
            l.0 + l.1 * b != r.0 + r.1 * b
        });
        prop_assert_eq!(admissibility_check(&u, &lebesgue(d)), !jumps);
        let mut mu = ScalarMeasure::lebesgue(d, 1.0).unwrap();
        for b in &breaks {
            mu = mu.with_atom([*b, 0.0], 1.0).unwrap();
        }
        prop_assert!(admissibility_check(&u, &mu));
    }

    #[test]
    fn evaluate_matches_the_oracle(seed in 0u64..1000) {
        for case in random_cases(2, seed) {
            let (u, mu) = case.build(16).unwrap();
            let spec = FunctionalSpec::new(from_id(&case.integrand).unwrap().into_ref(), mu, case.include_boundary).unwrap();
            let v = evaluate(&u, &spec).unwrap().value;
            let o = oracle_1d(&case).unwrap();
            prop_assert!((v - o).abs() <= 1e-8 * o.abs().max(1e-12), "{case:?}: {v} vs {o}");
        }
    }

    #[test]
    fn total_variation_is_the_norm_functional((breaks, coeffs) in piecewise()) {
        let u = build(&breaks, &coeffs);
        let spec = FunctionalSpec::new(Catalog::norm().into_ref(), lebesgue(*u.domain()), false).unwrap();
        let v = evaluate(&u, &spec).unwrap().value;
        prop_assert!((v - u.total_variation()).abs() <= 1e-12 * (1.0 + v));
        let mut edges = vec![0.0];
        edges.extend(&breaks);
        edges.push(1.0);
        let slopes: f64 = coeffs.iter().zip(edges.windows(2)).map(|(c, e)| c.1.abs() * (e[1] - e[0])).sum();
        let jumps: f64 = breaks
            .iter()
            .enumerate()
            .map(|(k, b)| (coeffs[k + 1].0 + coeffs[k + 1].1 * b - coeffs[k].0 - coeffs[k].1 * b).abs())
            .sum();
        prop_assert!((v - slopes - jumps).abs() <= 1e-12 * (1.0 + v));
    }
}
