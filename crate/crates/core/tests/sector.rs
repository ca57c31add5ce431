use std::f64::consts::PI;

use conecrit::sector::{
    comparison_excess, exact_solution_study, halfstrip_transform, harmonic_measure_weights,
    harnack_ratio_check, harnack_study, keller_osserman_constant, solve_semilinear,
    strong_singularity_experiment, trichotomy_experiment, weak_singularity_experiment, Absorption,
    BoundaryData, Classification, InnerShape, PolarField, SectorDomain, StrongOptions, WeakOptions,
};
use proptest::prelude::*;

#[test]
fn separable_solution_has_second_order_residual() {
    let d = SectorDomain::new(0.75 * PI, 0.01, 1.0, 32, 16).unwrap();
    let st = exact_solution_study(&d, 2.0, 2, 4096).unwrap();
    for p in st.residual_orders.iter().chain(&st.field_orders) {
        assert!(*p >= 1.9, "{st:?}");
    }
}

#[test]
fn weak_singularity_half_plane() {
    let d = SectorDomain::graded(PI, 1e-6, 1.0, 64, 32).unwrap();
    let w = weak_singularity_experiment(&d, 2.0, 1.0, WeakOptions::default()).unwrap();
    assert_eq!(w.fit.classification, Classification::Weak);
    assert!((w.fit.fitted_exponent + 1.0).abs() < 0.02, "{:?}", w.fit);
    assert!((w.amplitude_ratio - 2.0).abs() < 0.04);
    assert!(w.trace_consistency < 0.05);
    assert!(w.fit.angular_profile_match < 1e-3);
}

#[test]
fn trace_mass_matches_amplitude_for_non_kernel_data() {
    // constant inner data: the harmonic-measure mass and the fitted k* are independent measurements
    let d = SectorDomain::graded(0.75 * PI, 1e-6, 1.0, 64, 32).unwrap();
    let opts = WeakOptions {
        window: [100.0, 1000.0],
        shape: InnerShape::Constant,
        ..WeakOptions::default()
    };
    let w = weak_singularity_experiment(&d, 2.0, 1.0, opts).unwrap();
    assert!((w.fit.fitted_exponent + 4.0 / 3.0).abs() < 0.03, "{:?}", w.fit);
    assert!(w.trace_consistency < 0.05, "{w:?}");
}

#[test]
fn strong_ladder_is_monotone_and_matches_separable_profile() {
    let d = SectorDomain::graded(PI, 1e-10, 1.0, 64, 32).unwrap();
    let opts = StrongOptions {
        levels: 20,
        window: [1e5, 1e6],
        ..StrongOptions::default()
    };
    let s = strong_singularity_experiment(&d, 2.0, opts).unwrap();
    assert!(s.monotone);
    assert_eq!(s.fit.classification, Classification::Strong);
    assert!((s.fit.fitted_exponent + 2.0).abs() < 0.02);
    assert!(s.profile_match < 0.02, "{s:?}");
}

#[test]
fn strong_amplitude_shrinks_toward_criticality() {
    // q_S = 3 on the half plane
    let mut amps = Vec::new();
    for q in [2.0, 2.5, 2.9] {
        let d = SectorDomain::graded(PI, 1e-10, 1.0, 64, 32).unwrap();
        let opts = StrongOptions {
            levels: 20,
            window: [1e5, 1e6],
            ..StrongOptions::default()
        };
        amps.push(strong_singularity_experiment(&d, q, opts).unwrap().omega_max);
    }
    assert!(amps[0] > amps[1] && amps[1] > amps[2], "{amps:?}");
    assert!(amps[2] < 0.3 * amps[0]);
}

#[test]
fn bounded_data_gives_bounded_classification() {
    for alpha in [0.75 * PI, PI, 1.5 * PI] {
        let d = SectorDomain::graded(alpha, 1e-6, 1.0, 64, 32).unwrap();
        let f = trichotomy_experiment(&d, 2.0, [100.0, 1000.0]).unwrap();
        assert_eq!(f.classification, Classification::Bounded);
        assert!((f.fitted_exponent - PI / alpha).abs() < 0.02 * PI / alpha, "{f:?}");
    }
}

#[test]
fn keller_osserman_constant_is_bounded_and_mesh_stable() {
    let measure = |n_theta: usize, per_decade: usize, m: f64| {
        let d = SectorDomain::graded(PI / 2.0, 0.05, 1.0, per_decade, n_theta).unwrap();
        let u = solve_semilinear(&d, Absorption::Power(2.0), &BoundaryData::inner_constant(&d, m)).unwrap();
        keller_osserman_constant(&u, 2.0, 0.04).constant
    };
    let c: Vec<f64> = [1e4, 1e6, 1e8, 1e10].iter().map(|&m| measure(64, 128, m)).collect();
    for w in c.windows(2) {
        assert!(w[1] >= w[0], "{c:?}");
    }
    // increments shrink: the constant saturates as the data grows
    assert!(c[3] - c[2] < c[2] - c[1], "{c:?}");
    assert!(c[3] < 10.0, "{c:?}");
    let fine = measure(128, 256, 1e8);
    assert!((c[2] - fine).abs() < 0.05 * fine, "{} vs {fine}", c[2]);
}

#[test]
fn harnack_ratio_trivial_cases() {
    let d = SectorDomain::graded(1.5 * PI, 1e-3, 1.0, 64, 48).unwrap();
    let data = BoundaryData::outer_bump(&d, 2.0, 0.3 * d.alpha, 0.7 * d.alpha);
    let u = solve_semilinear(&d, Absorption::Power(2.0), &data).unwrap();
    let same = harnack_ratio_check(&u, &u, [0.5, 0.0], 0.25).unwrap();
    assert_eq!(same.sup_ratio, 1.0);
    let h1 = solve_semilinear(&d, Absorption::None, &data).unwrap();
    let h3 = solve_semilinear(&d, Absorption::None, &data.scaled(3.0)).unwrap();
    let lin = harnack_ratio_check(&h1, &h3, [0.5, 0.0], 0.25).unwrap();
    assert!((lin.sup_ratio - 1.0).abs() < 1e-12);
    assert!((lin.min_quotient - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn harnack_ratio_stable_at_reentrant_corner() {
    let d = SectorDomain::graded(1.5 * PI, 1e-3, 1.0, 64, 48).unwrap();
    let st = harnack_study(&d, 2.0, 0.5, 0.25).unwrap();
    assert!(st.stable, "{st:?}");
    assert!(st.coarse.sup_ratio.is_finite() && st.coarse.sup_ratio > 1.0);
}

#[test]
fn harnack_requires_positive_fields() {
    let d = SectorDomain::new(PI, 0.01, 1.0, 32, 16).unwrap();
    let u = solve_semilinear(&d, Absorption::Power(2.0), &BoundaryData::vertex_kernel(&d, 1.0)).unwrap();
    let z = solve_semilinear(&d, Absorption::Power(2.0), &BoundaryData::zero(&d)).unwrap();
    assert!(harnack_ratio_check(&u, &z, [0.5, 0.0], 0.25).is_err());
}

#[test]
fn decay_toward_a_smooth_boundary_point_is_linear() {
    let d = SectorDomain::new(PI / 2.0, 0.01, 1.0, 96, 64).unwrap();
    let data = BoundaryData::outer_bump(&d, 50.0, 0.2 * d.alpha, 0.8 * d.alpha);
    let u = solve_semilinear(&d, Absorption::Power(2.0), &data).unwrap();
    // r ≈ 0.5, approaching the ray θ = 0
    let i = ((0.5f64 / 0.01).ln() / d.hs()).round() as usize;
    let r = d.r(i);
    let slopes: Vec<f64> = (1..=8).map(|j| u.get(i, j) / (r * d.theta(j).sin())).collect();
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    assert!(lo > 0.0 && hi / lo < 1.1, "{slopes:?}");
}

#[test]
fn halfstrip_converges_for_weak_and_grows_for_separable() {
    let d = SectorDomain::graded(PI, 1e-6, 1.0, 64, 32).unwrap();
    let u = solve_semilinear(&d, Absorption::Power(2.0), &BoundaryData::vertex_kernel(&d, 1.0)).unwrap();
    let v = halfstrip_transform(&u, 1.0);
    // v(t, ·) settles as t grows toward the vertex (away from the truncation layer)
    let n = v.t.len();
    let far = v.sup_change(n / 4, n / 2);
    let near = v.sup_change(n / 2, 3 * n / 4);
    assert!(near < far, "{far} {near}");

    let sep = PolarField::from_fn(&d, |r, t| r.powi(-2) * t.sin());
    let w = halfstrip_transform(&sep, 1.0);
    let mid = d.n_theta / 2;
    let slope = (w.values[n - 10][mid].ln() - w.values[10][mid].ln()) / (w.t[n - 10] - w.t[10]);
    assert!((slope - 1.0).abs() < 1e-10);
}

#[test]
fn solves_are_deterministic() {
    let d = SectorDomain::new(0.75 * PI, 1e-3, 1.0, 48, 24).unwrap();
    let data = BoundaryData::vertex_kernel(&d, 3.0);
    let a = solve_semilinear(&d, Absorption::Power(1.7), &data).unwrap();
    let b = solve_semilinear(&d, Absorption::Power(1.7), &data).unwrap();
    assert_eq!(a.values, b.values);
    let w = harmonic_measure_weights(&d, (0.5, 1.0)).unwrap();
    assert!(w.inner.iter().chain(&w.outer).all(|x| *x >= 0.0));
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..5.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comparison_principle(
        inner in nonneg(9), outer in nonneg(9), lower in nonneg(13), upper in nonneg(13),
        extra in nonneg(9), scale in 0.0f64..50.0, q in 1.2f64..3.0,
    ) {
        let d = SectorDomain::new(0.6 * PI, 0.05, 1.0, 12, 8).unwrap();
        let mut data = BoundaryData { inner, outer, lower_ray: lower, upper_ray: upper };
        let g = Absorption::Power(q);
        let u1 = solve_semilinear(&d, g, &data).unwrap();
        prop_assert!(u1.min_value() >= 0.0);
        for (v, e) in data.inner.iter_mut().zip(&extra) {
            *v += scale * e;
        }
        let u2 = solve_semilinear(&d, g, &data).unwrap();
        prop_assert!(comparison_excess(&u1, &u2).unwrap() <= 1e-9 * u2.values.iter().fold(0.0f64, |m, v| m.max(*v)));
        // the harmonic lift is a supersolution
        let h = solve_semilinear(&d, Absorption::None, &data).unwrap();
        prop_assert!(comparison_excess(&u2, &h).unwrap() <= 1e-9 * h.values.iter().fold(0.0f64, |m, v| m.max(*v)));
        prop_assert!(u2.residual < 1e-9);
    }
}
