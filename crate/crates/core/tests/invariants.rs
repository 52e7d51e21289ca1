use proptest::prelude::*;

use ellcover::characterize::{build_xi_cover, quasi_convexity_certify, roundtrip_equivalence, RoundtripOptions};
use ellcover::cover::{theta0_semi_axes, IsotropicCover, Theta0Cover};
use ellcover::distance::{
    ahlfors_certify, rho_induced, rho_one_sided, theta0_case, triangle_constant, AhlforsOptions, IsotropicMetric,
    NswMetric,
};
use ellcover::ellipsoid::{check_reverse_inclusion_tol, random_ellipsoid, random_nested_pair};
use ellcover::numeric::{max_on_ball, min_on_ball, norm, power_sum_bounds, solve_power_sum, Matrix};
use ellcover::sampling::Region;
use ellcover::{Cover, QuasiDistance, Sampler, SeededRng};

fn point2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn containment_factor_bounds_sampled_gauges(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = SeededRng::new(seed, 0);
        let outer = random_ellipsoid(&mut rng, n, (-1.0, 1.0), 0.5).unwrap();
        let inner = random_ellipsoid(&mut rng, n, (-2.0, 0.5), 0.5).unwrap();
        let f = inner.containment_factor(&outer).unwrap();
        for _ in 0..200 {
            let u = rng.unit_vector(n);
            let g = outer.gauge(&inner.boundary_point(&u)).unwrap();
            prop_assert!(g <= f * (1.0 + 1e-9), "gauge {g} above factor {f}");
        }
        prop_assert_eq!(inner.is_subset_of(&outer).unwrap(), f <= 1.0 + 1e-10);
    }

    #[test]
    fn extremes_bracket_samples(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = SeededRng::new(seed, 1);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect()).collect();
        let a = Matrix::from_rows(&rows).unwrap();
        let d: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let hi = max_on_ball(&a, &d).unwrap();
        let lo = min_on_ball(&a, &d).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        for _ in 0..100 {
            let u = rng.in_unit_ball(n);
            let v: Vec<f64> = a.mul_vec(&u).iter().zip(&d).map(|(p, q)| p + q).collect();
            let l = norm(&v);
            prop_assert!(l <= hi * (1.0 + 1e-9) + 1e-12);
            prop_assert!(l >= lo * (1.0 - 1e-9) - 1e-12);
        }
    }

    #[test]
    fn reverse_inclusion_holds(seed in any::<u64>(), n in 2usize..=5, same in any::<bool>()) {
        let mut rng = SeededRng::new(seed, 2);
        let (eta, xi) = random_nested_pair(&mut rng, n, (-3.0, 3.0), same).unwrap();
        let r = check_reverse_inclusion_tol(&eta, &xi, 1e-9).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn power_sum_root_inside_bounds(
        a in prop::collection::vec(-8.0f64..8.0, 2..=4),
        b in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let a: Vec<f64> = a.iter().map(|v| v.exp2()).collect();
        let beta: Vec<f64> = b[..a.len()].iter().map(|v| v.exp2()).collect();
        let x = solve_power_sum(&a, &beta).unwrap();
        let (lo, hi) = power_sum_bounds(&a, &beta);
        prop_assert!(lo < x && x < hi, "{lo} < {x} < {hi}");
        let s: f64 = a.iter().zip(&beta).map(|(ai, bi)| ai * x.powf(*bi)).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn theta0_area_and_nesting(h in -12.0f64..3.0, t in -8.0f64..30.0, s in 0.0f64..12.0) {
        let h = h.exp2();
        let (s1, s2, _) = theta0_semi_axes(h, t);
        prop_assert!((s1 * s2 / (-t).exp2() - 1.0).abs() <= 1e-12);
        let x = [0.5, h];
        let big = Theta0Cover.eval(&x, t).unwrap();
        let small = Theta0Cover.eval(&x, t + s).unwrap();
        prop_assert!(small.is_subset_of(&big).unwrap());
    }

    #[test]
    fn theta0_closed_form_matches_bisection(x in point2(), dir in 0.0f64..6.283, l in -10.0f64..1.0) {
        let ell = l.exp2();
        let y = [x[0] + ell * dir.cos(), x[1] + ell * dir.sin()];
        let closed = theta0_case(&x, &y).unwrap().value;
        let induced = rho_one_sided(&Theta0Cover, &x, &y).unwrap();
        prop_assert!((closed / induced - 1.0).abs() <= 1e-6, "{closed} vs {induced}");
    }

    #[test]
    fn induced_distance_is_symmetric(x in point2(), y in point2()) {
        let a = rho_induced(&Theta0Cover, &x, &y).unwrap();
        let b = rho_induced(&Theta0Cover, &y, &x).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn nsw_distance_vanishes_only_on_diagonal(x in point2(), y in point2(), k in 0u32..4) {
        let m = NswMetric::new(k);
        prop_assert_eq!(m.eval(&x, &x).unwrap(), 0.0);
        if x != y {
            prop_assert!(m.eval(&x, &y).unwrap() > 0.0);
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let m = NswMetric::new(1);
    let s = Sampler::new(3);
    let region = Region::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let tri = triangle_constant(&m, &s, &region, 500).unwrap();
            let qc = quasi_convexity_certify(&m, &s, &region, 30, None).unwrap();
            (tri, qc.report)
        })
    };
    assert_eq!(run(1), run(6));
}

#[test]
fn isotropic_round_trip_is_idempotent() {
    let metric = IsotropicMetric::new(2).unwrap();
    let s = Sampler::new(4);
    let region = Region::default();
    let qc = quasi_convexity_certify(&metric, &s.substream(1), &region, 40, None).unwrap();
    let opts = AhlforsOptions {
        centers: 3,
        rungs: 6,
        log2_r_range: (-6.0, 4.0),
        mc_points: 20_000,
    };
    let ah = ahlfors_certify(&metric, &s.substream(2), &region, opts).unwrap();
    let xi = build_xi_cover(metric, &qc, &ah).unwrap();
    // Ξ of ωₙ|x−y|ⁿ is the Euclidean ball cover, so ρ_Ξ reproduces ρ.
    let iso = IsotropicCover::new(2).unwrap();
    for (x, t) in [([0.1, -0.4], 2.0), ([3.0, 1.0], -1.5)] {
        let a = xi.eval(&x, t).unwrap();
        let b = iso.eval(&x, t).unwrap();
        assert!((a.volume() / b.volume() - 1.0).abs() < 1e-9);
        assert!(a.containment_factor(&b).unwrap() < 1.0 + 1e-9);
    }
    let opts = RoundtripOptions {
        pairs: 200,
        engulf_samples: 50,
        ..RoundtripOptions::default()
    };
    let r = roundtrip_equivalence(&xi, 1.0, &s.substream(3), &region, opts).unwrap();
    assert!(r.pass, "{r:?}");
    for k in ["ratio_min", "ratio_max"] {
        assert!((r.get(k).unwrap() - 1.0).abs() < 1e-6, "{k}: {:?}", r.get(k));
    }
}
