mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use conecrit::convergence::observed_order_three;
use conecrit::spectral::{
    cross_section_eigen, solve_sl_eigen, EndCondition, IntervalFactor, Opening, SturmLiouvilleProblem,
};
use common::shooting;

fn pole_problem(p: f64, mu: f64, upper: f64) -> SturmLiouvilleProblem {
    SturmLiouvilleProblem {
        weight_exponent: p,
        centrifugal: mu,
        lower: 0.0,
        upper,
        lower_bc: EndCondition::Regular,
        upper_bc: EndCondition::Dirichlet,
    }
}

#[test]
fn octant_outer_factor_converges_to_twelve() {
    // sin²θ cosθ: (sin θ (sin²θ cosθ)')' / sin θ - 4 sin²θcosθ/sin²θ = -12 sin²θ cosθ
    let x: f64 = 0.7;
    let f = |t: f64| t.sin().powi(2) * t.cos();
    let h = 1e-4;
    let wd = |t: f64| t.sin() * (f(t + h) - f(t - h)) / (2.0 * h);
    let lhs = -(wd(x + h) - wd(x - h)) / (2.0 * h) / x.sin() + 4.0 * f(x) / x.sin().powi(2);
    assert!((lhs - 12.0 * f(x)).abs() < 1e-6);

    let shoot = shooting::first_eigenvalue(1.0, 4.0, FRAC_PI_2, 8.0, 16.0, 1e-5);
    assert!((shoot - 12.0).abs() < 1e-6, "shooting oracle {shoot}");

    let e = solve_sl_eigen(&pole_problem(1.0, 4.0, FRAC_PI_2), 2048).unwrap();
    assert!((e.lambda - 12.0).abs() < 1e-4, "{}", e.lambda);
    assert!((e.lambda - shoot).abs() <= 5.0 * e.error_estimate + 1e-9);
}

#[test]
fn hemisphere_identity_all_dims() {
    for d in 1..=4usize {
        let e = cross_section_eigen(&Opening::cap(d, FRAC_PI_2), 2048).unwrap();
        assert!(
            (e.gamma - d as f64).abs() <= 5.0 * e.error_estimate + 1e-9,
            "dim {d}: {} ± {}",
            e.gamma,
            e.error_estimate
        );
    }
}

#[test]
fn second_order_convergence() {
    for p in [1.0, 2.0, 3.0] {
        let vals: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| solve_sl_eigen(&pole_problem(p, 0.0, FRAC_PI_2), n).unwrap().lambda)
            .collect();
        let ord = observed_order_three(vals[0], vals[1], vals[2], 2.0);
        assert!(ord > 1.9, "p = {p}: order {ord}");
        let ratio = (vals[0] - vals[1]) / (vals[1] - vals[2]);
        assert!(ratio >= 3.5, "p = {p}: ratio {ratio}");
    }
}

#[test]
fn octant_and_lune_chains() {
    let octant = Opening::box_product(vec![IntervalFactor::new(0.0, FRAC_PI_2), IntervalFactor::new(0.0, FRAC_PI_2)]);
    let c = cross_section_eigen(&octant, 4096).unwrap();
    assert!((c.gamma - 12.0).abs() < 1e-4, "{}", c.gamma);
    assert_eq!(c.layers[0].lambda, 4.0);

    for alpha in [0.8, FRAC_PI_2, 2.5, 4.0] {
        let lune = Opening::box_product(vec![IntervalFactor::new(0.0, alpha), IntervalFactor::full(false)]);
        let c = cross_section_eigen(&lune, 2048).unwrap();
        let exact = (PI / alpha).powi(2) + PI / alpha;
        assert!((c.gamma - exact).abs() <= 5.0 * c.error_estimate + 1e-9, "α {alpha}: {} vs {exact}", c.gamma);
    }
}

#[test]
fn monotone_under_inclusion() {
    let mut last = 0.0;
    for theta in [2.5, 2.0, 1.5, 1.0, 0.5] {
        let g = cross_section_eigen(&Opening::cap(2, theta), 512).unwrap().gamma;
        assert!(g > last);
        last = g;
    }
    let mut last = 0.0;
    for upper in [2.5, 2.0, 1.5, 1.0] {
        let op = Opening::box_product(vec![IntervalFactor::new(0.0, 1.0), IntervalFactor::new(0.3, upper)]);
        let g = cross_section_eigen(&op, 512).unwrap().gamma;
        assert!(g > last);
        last = g;
    }
}

#[test]
fn profiles_positive_and_normalized() {
    let e = solve_sl_eigen(&pole_problem(1.0, 4.0, FRAC_PI_2), 256).unwrap();
    let v = &e.profile.values;
    assert_eq!(v[0], 0.0);
    assert_eq!(*v.last().unwrap(), 0.0);
    assert!(v[1..v.len() - 1].iter().all(|x| *x > 0.0));
    assert_eq!(e.profile.max(), 1.0);
    // matches sin²θ cosθ after normalization
    let peak = (2.0f64 / 3.0).sqrt().asin();
    let norm = peak.sin().powi(2) * peak.cos();
    for (t, val) in e.profile.nodes.iter().zip(v) {
        let exact = t.sin().powi(2) * t.cos() / norm;
        assert!((val - exact).abs() < 2e-3);
    }
}

#[test]
fn shooting_agrees_with_fd_on_a_generic_cap() {
    let upper = 1.2;
    let shoot = shooting::first_eigenvalue(2.0, 0.0, upper, 1.0, 12.0, 1e-5);
    let e = solve_sl_eigen(&pole_problem(2.0, 0.0, upper), 2048).unwrap();
    assert!((e.lambda - shoot).abs() <= 5.0 * e.error_estimate + 1e-8, "{} vs {shoot}", e.lambda);
}
