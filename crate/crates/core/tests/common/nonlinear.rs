//! Shooting oracle for the symmetric positive solution of
//! `-ω'' − λω + ω^q = 0` on `(0, α)` with `ω(0) = ω(α) = 0`.
//! Integrates from `ω(0) = 0, ω'(0) = c` with RK4 and bisects on `c` so that
//! the first critical point of ω sits at `α/2`.

fn rhs(lambda: f64, q: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -lambda * y[0] + y[0].abs().powf(q - 1.0) * y[0]]
}

/// Position and height of the first maximum for initial slope `c`.
fn first_peak(lambda: f64, q: f64, c: f64, step: f64, limit: f64) -> (f64, f64) {
    let mut y = [0.0, c];
    let mut x = 0.0;
    while x < limit {
        let h = step;
        let k1 = rhs(lambda, q, y);
        let k2 = rhs(lambda, q, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(lambda, q, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(lambda, q, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[1] <= 0.0 {
            let t = y[1] / (y[1] - next[1]);
            let peak = y[0] + t * (next[0] - y[0]);
            return (x + t * h, peak.max(y[0]).max(next[0]));
        }
        y = next;
        x += h;
    }
    (f64::INFINITY, y[0])
}

/// Maximum of the positive profile on an arc of opening `alpha`.
pub fn arc_profile_max(lambda: f64, q: f64, alpha: f64, step: f64) -> f64 {
    let target = 0.5 * alpha;
    // the separatrix slope bounds c: energy c²/2 below the potential barrier
    let top = lambda.powf(1.0 / (q - 1.0));
    let barrier = lambda * top * top / 2.0 - top.powf(q + 1.0) / (q + 1.0);
    let (mut lo, mut hi) = (1e-9, (2.0 * barrier).sqrt() * (1.0 - 1e-14));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (pos, _) = first_peak(lambda, q, mid, step, 2.0 * alpha);
        if pos < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    first_peak(lambda, q, 0.5 * (lo + hi), step, 2.0 * alpha).1
}
