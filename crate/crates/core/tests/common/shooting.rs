//! Independent shooting oracle for `-(w φ')'/w + μ φ/sin²θ = λ φ`, `w = sin^p θ`,
//! regular at θ = 0 and Dirichlet at `upper`. RK4 in (φ, wφ') with a Frobenius
//! start, bisection on λ for the sign change of φ(upper).

fn rhs(p: f64, mu: f64, lambda: f64, x: f64, y: [f64; 2]) -> [f64; 2] {
    let s = x.sin();
    let w = s.powf(p);
    // y[0] = φ, y[1] = w φ'
    [y[1] / w, (mu / (s * s) - lambda) * w * y[0]]
}

pub fn endpoint_value(p: f64, mu: f64, lambda: f64, upper: f64, step: f64) -> f64 {
    // Frobenius exponent of the bounded solution at the pole
    let nu = 0.5 * (-(p - 1.0) + ((p - 1.0).powi(2) + 4.0 * mu).sqrt());
    let x0 = step;
    let (phi0, dphi0) = if mu > 0.0 {
        (x0.powf(nu), nu * x0.powf(nu - 1.0))
    } else {
        (1.0 - lambda * x0 * x0 / (2.0 * (p + 1.0)), -lambda * x0 / (p + 1.0))
    };
    let mut y = [phi0, x0.sin().powf(p) * dphi0];
    let n = ((upper - x0) / step).ceil() as usize;
    let h = (upper - x0) / n as f64;
    let mut x = x0;
    for _ in 0..n {
        let k1 = rhs(p, mu, lambda, x, y);
        let k2 = rhs(p, mu, lambda, x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(p, mu, lambda, x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(p, mu, lambda, x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        x += h;
    }
    y[0]
}

/// First eigenvalue by bisection on `[lo, hi]`, which must bracket exactly one sign change.
pub fn first_eigenvalue(p: f64, mu: f64, upper: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let fa = endpoint_value(p, mu, a, upper, step);
    assert!(fa * endpoint_value(p, mu, b, upper, step) < 0.0, "bracket does not change sign");
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let fm = endpoint_value(p, mu, m, upper, step);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
