//! Gauss–Legendre panels, global adaptive integration and dyadic integration
//! toward a singular endpoint with convergence/divergence certificates.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// 16-point Gauss–Legendre on a single panel.
pub fn gl16_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + h * xi);
    }
    s * h
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 0.0,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn eval_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let whole = gl16_panel(f, a, b);
    let m = 0.5 * (a + b);
    let halves = gl16_panel(f, a, m) + gl16_panel(f, m, b);
    Panel {
        a,
        b,
        value: halves,
        err: (whole - halves).abs(),
    }
}

/// Global adaptive integration over `[a, b]` with optional interior breakpoints.
/// Panels are bisected in order of decreasing error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|p| *p > lo && *p < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| eval_panel(&mut f, w[0], w[1]))
        .collect();

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if !total.is_finite() {
            return Err(Error::quadrature("integrate", "non-finite integrand value"));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) || err == 0.0 {
            return Ok(sign * total);
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::quadrature(
                "integrate",
                format!(
                    "panel budget {} exhausted on [{lo:e}, {hi:e}] (estimate {total:e}, error {err:e})",
                    tol.max_panels
                ),
            ));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::quadrature("integrate", "panel width underflow"));
        }
        panels.push(eval_panel(&mut f, p.a, m));
        panels.push(eval_panel(&mut f, m, p.b));
    }
}

/// ∫_L^∞ f via the substitution y = L / u.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, l: f64, tol: Tolerance) -> Result<f64> {
    assert!(l > 0.0);
    integrate(
        |u| {
            if u <= 0.0 {
                0.0
            } else {
                let y = l / u;
                f(y) * l / (u * u)
            }
        },
        0.0,
        1.0,
        &[],
        tol,
    )
}

/// ∫_{-∞}^{∞} f with an explicit inner window `[-l, l]` and breakpoints inside it.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(
    mut f: F,
    l: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    let core = integrate(&mut f, -l, l, breaks, tol)?;
    let right = integrate_to_infinity(&mut f, l, tol)?;
    let left = integrate_to_infinity(|y| f(-y), l, tol)?;
    Ok(core + right + left)
}

/// Direction of a dyadic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toward {
    /// Panels `[x0 2^{-j-1}, x0 2^{-j}]`.
    Zero,
    /// Panels `[x0 2^j, x0 2^{j+1}]`.
    Infinity,
}

#[derive(Debug, Clone, Copy)]
pub struct DyadicOptions {
    pub max_levels: usize,
    /// Relative accuracy of each panel integral.
    pub panel_rel: f64,
    /// Maximal spread of the last four log2 panel ratios for the rate to count as stable.
    pub stability: f64,
    /// A stable log2 ratio above `-margin` is treated as divergence.
    pub margin: f64,
}

impl Default for DyadicOptions {
    fn default() -> Self {
        Self {
            max_levels: 80,
            panel_rel: 1e-8,
            stability: 1e-4,
            margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DyadicOutcome {
    Convergent {
        value: f64,
        /// Estimated remainder beyond the last panel (geometric extrapolation).
        tail: f64,
        levels: usize,
        /// Fitted power of the integrand at the swept endpoint, if a stable rate was seen.
        exponent: Option<f64>,
    },
    Divergent {
        /// Fitted power of the integrand at the swept endpoint.
        exponent: f64,
        partial_sums: Vec<f64>,
        levels: usize,
    },
}

/// Sweeps dyadic panels from `x0` toward the chosen endpoint, deciding convergence
/// from the stabilized ratio of consecutive panel contributions.
pub fn dyadic_integral<F: FnMut(f64) -> Result<f64>>(
    mut g: F,
    x0: f64,
    toward: Toward,
    opts: DyadicOptions,
) -> Result<DyadicOutcome> {
    const OP: &str = "dyadic_integral";
    let mut contributions: Vec<f64> = Vec::new();
    let mut partial_sums: Vec<f64> = Vec::new();
    let mut logs: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    for level in 0..opts.max_levels {
        let (a, b) = match toward {
            Toward::Zero => (x0 * 0.5f64.powi(level as i32 + 1), x0 * 0.5f64.powi(level as i32)),
            Toward::Infinity => (x0 * 2f64.powi(level as i32), x0 * 2f64.powi(level as i32 + 1)),
        };
        let mut err = None;
        let c = integrate(
            |x| match g(x) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            &[],
            Tolerance {
                rel: opts.panel_rel,
                abs: 0.0,
                max_panels: 200,
            },
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        if c < 0.0 || !c.is_finite() {
            return Err(Error::quadrature(OP, format!("panel contribution {c:e} at level {level}")));
        }
        sum += c;
        contributions.push(c);
        partial_sums.push(sum);
        let levels = level + 1;
        if level == 0 {
            continue;
        }
        let prev = contributions[level - 1];
        if c == 0.0 {
            if prev > 0.0 || sum == 0.0 {
                return Ok(DyadicOutcome::Convergent {
                    value: sum,
                    tail: 0.0,
                    levels,
                    exponent: None,
                });
            }
            continue;
        }
        if prev == 0.0 {
            continue;
        }
        let l = (c / prev).log2();
        logs.push(l);
        let to_exponent = |l: f64| match toward {
            Toward::Zero => -l - 1.0,
            Toward::Infinity => l - 1.0,
        };
        let n = logs.len();
        if n >= 4 {
            let last = &logs[n - 4..];
            let (mn, mx) = last
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            if mx - mn < opts.stability {
                let mean = last.iter().sum::<f64>() / 4.0;
                if mean < -opts.margin {
                    let rho = 2f64.powf(mean);
                    let tail = c * rho / (1.0 - rho);
                    return Ok(DyadicOutcome::Convergent {
                        value: sum + tail,
                        tail,
                        levels,
                        exponent: Some(to_exponent(mean)),
                    });
                }
                return Ok(DyadicOutcome::Divergent {
                    exponent: to_exponent(mean),
                    partial_sums,
                    levels,
                });
            }
        }
        // accelerating decay (e.g. exponential tails): bound the rest geometrically
        if n >= 3 {
            let last = &logs[n - 3..];
            let accelerating = last.windows(2).all(|w| w[1] <= w[0] + opts.stability);
            let rho = 2f64.powf(l);
            if accelerating && rho < 0.5 {
                let tail = c * rho / (1.0 - rho);
                if tail <= 1e-12 * sum {
                    return Ok(DyadicOutcome::Convergent {
                        value: sum + tail,
                        tail,
                        levels,
                        exponent: None,
                    });
                }
            }
        }
    }
    Err(Error::Inconclusive {
        op: OP,
        msg: format!(
            "no stable rate after {} dyadic levels (partial sum {sum:e}, last log2 ratios {:?})",
            opts.max_levels,
            &logs[logs.len().saturating_sub(4)..]
        ),
    })
}
