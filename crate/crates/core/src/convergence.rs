//! Refinement-study helpers.

/// Observed order from errors at two mesh sizes differing by `ratio`.
pub fn observed_order(err_coarse: f64, err_fine: f64, ratio: f64) -> f64 {
    (err_coarse / err_fine).abs().ln() / ratio.ln()
}

/// Observed order from three successive values of a quantity under uniform
/// refinement by `ratio` (no exact value needed).
pub fn observed_order_three(coarse: f64, mid: f64, fine: f64, ratio: f64) -> f64 {
    observed_order(coarse - mid, mid - fine, ratio)
}

/// Richardson extrapolation assuming error ∝ h^order.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: f64) -> f64 {
    let r = ratio.powf(order);
    fine + (fine - coarse) / (r - 1.0)
}

/// Least-squares line fit `y = intercept + slope x`; returns (slope, intercept, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let f = |h: f64| 1.0 + 3.0 * h * h;
        let p = observed_order_three(f(0.1), f(0.05), f(0.025), 2.0);
        assert!((p - 2.0).abs() < 1e-10);
        assert!((richardson(f(0.1), f(0.05), 2.0, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        let (s, i, r2) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
