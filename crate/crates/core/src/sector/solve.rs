use serde::{Deserialize, Serialize};

use super::{BoundaryData, PolarField, SectorDomain};
use crate::error::{Error, Result};
use crate::linalg::{norm2, BandedSpd};

const OP: &str = "solve_semilinear";

/// Zero-order term of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Absorption {
    /// Laplace equation.
    None,
    /// `|u|^{q-1} u`.
    Power(f64),
}

impl Absorption {
    fn validate(&self) -> Result<()> {
        match self {
            Absorption::Power(q) if !(*q > 1.0 && q.is_finite()) => {
                Err(Error::domain(OP, format!("q = {q} must exceed 1")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    fn g(&self, u: f64) -> f64 {
        match self {
            Absorption::None => 0.0,
            Absorption::Power(q) => u.abs().powf(q - 1.0) * u,
        }
    }

    #[inline]
    fn dg(&self, u: f64) -> f64 {
        match self {
            Absorption::None => 0.0,
            Absorption::Power(q) => q * u.abs().powf(q - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Bound on the row-relative residual.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: 200,
            max_backtracks: 30,
        }
    }
}

struct Stencil {
    nt: usize,
    nr: usize,
    ws: f64,
    wt: f64,
    r2: Vec<f64>,
}

impl Stencil {
    fn new(dom: &SectorDomain) -> Self {
        let (hs, ht) = (dom.hs(), dom.h_theta());
        Self {
            nt: dom.n_theta,
            nr: dom.n_r,
            ws: 1.0 / (hs * hs),
            wt: 1.0 / (ht * ht),
            r2: (0..=dom.n_r).map(|i| dom.r(i).powi(2)).collect(),
        }
    }

    fn interior(&self) -> usize {
        (self.nr - 1) * (self.nt - 1)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.nt + 1) + j
    }

    /// Residual and its row scale at interior node (i, j).
    #[inline]
    fn row(&self, g: &Absorption, u: &[f64], i: usize, j: usize) -> (f64, f64) {
        let c = u[self.at(i, j)];
        let (n, s) = (u[self.at(i + 1, j)], u[self.at(i - 1, j)]);
        let (e, w) = (u[self.at(i, j + 1)], u[self.at(i, j - 1)]);
        let gc = self.r2[i] * g.g(c);
        let f = 2.0 * (self.ws + self.wt) * c - self.ws * (n + s) - self.wt * (e + w) + gc;
        let scale = 2.0 * (self.ws + self.wt) * c.abs()
            + self.ws * (n.abs() + s.abs())
            + self.wt * (e.abs() + w.abs())
            + gc.abs();
        (f, scale)
    }

    /// Interior residual vector, its largest row-relative value, and whether
    /// every row is a supersolution row up to `tol`.
    fn residual(&self, g: &Absorption, u: &[f64], tol: f64) -> (Vec<f64>, f64, bool) {
        let mut out = Vec::with_capacity(self.interior());
        let mut worst: f64 = 0.0;
        let mut supersolution = true;
        for i in 1..self.nr {
            for j in 1..self.nt {
                let (f, s) = self.row(g, u, i, j);
                let rel = if s > 0.0 { f.abs() / s } else { f.abs() };
                worst = worst.max(rel);
                if f < -tol * s {
                    supersolution = false;
                }
                out.push(f);
            }
        }
        (out, worst, supersolution)
    }

    fn jacobian(&self, g: &Absorption, u: &[f64]) -> BandedSpd {
        let m = self.nt - 1;
        let mut a = BandedSpd::zeros(self.interior(), m);
        for i in 1..self.nr {
            for j in 1..self.nt {
                let p = (i - 1) * m + (j - 1);
                let c = u[self.at(i, j)];
                a.add(p, p, 2.0 * (self.ws + self.wt) + self.r2[i] * g.dg(c));
                if j > 1 {
                    a.add(p, p - 1, -self.wt);
                }
                if i > 1 {
                    a.add(p, p - m, -self.ws);
                }
            }
        }
        a
    }
}

fn fill_boundary(dom: &SectorDomain, data: &BoundaryData, u: &mut [f64]) {
    let w = dom.n_theta + 1;
    for j in 0..=dom.n_theta {
        u[j] = data.inner[j];
        u[dom.n_r * w + j] = data.outer[j];
    }
    for i in 0..=dom.n_r {
        u[i * w] = data.lower_ray[i];
        u[i * w + dom.n_theta] = data.upper_ray[i];
    }
}

/// Solves `-Δu + g(u) = 0` with Dirichlet data, Newton from a zero interior.
pub fn solve_semilinear(dom: &SectorDomain, absorption: Absorption, data: &BoundaryData) -> Result<PolarField> {
    let start = vec![0.0; dom.node_count()];
    solve_semilinear_from(dom, absorption, data, &start, SolveOptions::default())
}

/// Damped Newton from the interior values of `start` (boundary entries are
/// overwritten by the data). A full step is accepted when it lowers ‖F‖₂ or
/// lands on a discrete supersolution, from which Newton on this monotone
/// convex system decreases monotonically; otherwise the step is halved.
pub fn solve_semilinear_from(
    dom: &SectorDomain,
    absorption: Absorption,
    data: &BoundaryData,
    start: &[f64],
    opts: SolveOptions,
) -> Result<PolarField> {
    dom.validate()?;
    absorption.validate()?;
    data.check(dom)?;
    if start.len() != dom.node_count() {
        return Err(Error::domain(OP, "initial field does not match the grid"));
    }
    let st = Stencil::new(dom);
    let mut u = start.to_vec();
    fill_boundary(dom, data, &mut u);
    let m = dom.n_theta - 1;
    let mut damping = Vec::new();
    let (mut f, mut rel, _) = st.residual(&absorption, &u, opts.tol);
    let mut fnorm = norm2(&f);
    for it in 0..opts.max_iterations {
        if rel < opts.tol {
            return Ok(PolarField {
                domain: *dom,
                values: u,
                data: data.clone(),
                residual: rel,
                newton_iterations: it,
            });
        }
        let chol = st.jacobian(&absorption, &u).factor()?;
        let delta = chol.solve(&f);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_backtracks {
            let mut trial = u.clone();
            for i in 1..dom.n_r {
                for j in 1..dom.n_theta {
                    trial[st.at(i, j)] -= t * delta[(i - 1) * m + (j - 1)];
                }
            }
            if trial.iter().all(|v| v.is_finite()) {
                let (ft, relt, sup) = st.residual(&absorption, &trial, opts.tol);
                let nt = norm2(&ft);
                if nt <= (1.0 - 1e-4 * t) * fnorm || (t == 1.0 && sup) || relt < opts.tol {
                    u = trial;
                    f = ft;
                    rel = relt;
                    fnorm = nt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        damping.push(if accepted { t } else { 0.0 });
        if !accepted {
            return Err(Error::NoConvergence {
                op: OP,
                iterations: it + 1,
                residual: rel,
                trace: damping,
            });
        }
    }
    if rel < opts.tol {
        return Ok(PolarField {
            domain: *dom,
            values: u,
            data: data.clone(),
            residual: rel,
            newton_iterations: opts.max_iterations,
        });
    }
    Err(Error::NoConvergence {
        op: OP,
        iterations: opts.max_iterations,
        residual: rel,
        trace: damping,
    })
}

/// r²-scaled discrete residual `-(u_ss + u_θθ) + r² g(u)` on the full grid
/// (zero on boundary nodes).
pub fn scaled_residual(field: &PolarField, absorption: Absorption) -> Vec<f64> {
    let dom = &field.domain;
    let st = Stencil::new(dom);
    let mut out = vec![0.0; dom.node_count()];
    for i in 1..dom.n_r {
        for j in 1..dom.n_theta {
            out[st.at(i, j)] = st.row(&absorption, &field.values, i, j).0;
        }
    }
    out
}

/// Residual of a field that is homogeneous of degree `-beta` in r, such as
/// `r^{-β} ω(θ)`: max |F| · r^β normalized by max r^β |u|. Scale-free, so
/// it measures the truncation error of the scheme on the exact solution.
pub fn exact_solution_residual(field: &PolarField, absorption: Absorption, beta: f64) -> f64 {
    let dom = &field.domain;
    let res = scaled_residual(field, absorption);
    let w = dom.n_theta + 1;
    let mut top: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..=dom.n_r {
        let rb = dom.r(i).powf(beta);
        for j in 0..w {
            top = top.max(rb * field.values[i * w + j].abs());
            worst = worst.max(rb * res[i * w + j].abs());
        }
    }
    worst / top
}

/// Discrete harmonic measure seen from the interior node nearest to the polar
/// point `x0 = (r, θ)`: one weight per boundary node such that the discrete
/// harmonic extension of data b has value Σ w·b at that node. Weights are
/// nonnegative and sum to one (corner nodes get zero).
pub fn harmonic_measure_weights(dom: &SectorDomain, x0: (f64, f64)) -> Result<BoundaryData> {
    const OP: &str = "harmonic_measure_weights";
    dom.validate()?;
    let (r0, t0) = x0;
    if !(r0 > dom.r_min && r0 < dom.r_max && t0 > 0.0 && t0 < dom.alpha) {
        return Err(Error::domain(OP, "reference point must lie inside the sector"));
    }
    let st = Stencil::new(dom);
    let m = dom.n_theta - 1;
    let i0 = (((r0 / dom.r_min).ln() / dom.hs()).round() as usize).clamp(1, dom.n_r - 1);
    let j0 = ((t0 / dom.h_theta()).round() as usize).clamp(1, dom.n_theta - 1);
    let mut e = vec![0.0; st.interior()];
    e[(i0 - 1) * m + (j0 - 1)] = 1.0;
    let z = st.jacobian(&Absorption::None, &vec![0.0; dom.node_count()]).factor()?.solve(&e);
    let mut w = BoundaryData::zero(dom);
    for i in 1..dom.n_r {
        for j in 1..dom.n_theta {
            let zp = z[(i - 1) * m + (j - 1)];
            if i == 1 {
                w.inner[j] += st.ws * zp;
            }
            if i == dom.n_r - 1 {
                w.outer[j] += st.ws * zp;
            }
            if j == 1 {
                w.lower_ray[i] += st.wt * zp;
            }
            if j == dom.n_theta - 1 {
                w.upper_ray[i] += st.wt * zp;
            }
        }
    }
    Ok(w)
}

/// Σ w·b over all boundary nodes.
pub fn boundary_pairing(w: &BoundaryData, b: &BoundaryData) -> f64 {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>();
    dot(&w.inner, &b.inner) + dot(&w.outer, &b.outer) + dot(&w.lower_ray, &b.lower_ray) + dot(&w.upper_ray, &b.upper_ray)
}

/// Largest value of `a − b` over all nodes (≤ 0 when a ≤ b everywhere).
pub fn comparison_excess(a: &PolarField, b: &PolarField) -> Result<f64> {
    if a.domain != b.domain {
        return Err(Error::precondition("comparison_excess", "fields live on different grids"));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x - y)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_gives_zero_field() {
        let d = SectorDomain::new(PI, 0.01, 1.0, 16, 8).unwrap();
        let f = solve_semilinear(&d, Absorption::Power(2.0), &BoundaryData::zero(&d)).unwrap();
        assert!(f.values.iter().all(|v| *v == 0.0));
        assert_eq!(f.newton_iterations, 0);
    }

    #[test]
    fn harmonic_polynomial_is_reproduced() {
        // r^{π/α} sin(πθ/α) is harmonic; with the log-polar stencil the error is O(h²)
        let err = |n: usize| {
            let d = SectorDomain::new(PI / 2.0, 0.1, 1.0, 2 * n, n).unwrap();
            let exact = |r: f64, t: f64| r.powi(2) * (2.0 * t).sin();
            let data = BoundaryData::from_fn(&d, exact);
            let f = solve_semilinear(&d, Absorption::None, &data).unwrap();
            let ex = PolarField::from_fn(&d, exact);
            f.values.iter().zip(&ex.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(16), err(32));
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn absorption_lowers_the_harmonic_lift() {
        let d = SectorDomain::new(PI, 0.01, 1.0, 32, 16).unwrap();
        let data = BoundaryData::vertex_kernel(&d, 1.0);
        let h = solve_semilinear(&d, Absorption::None, &data).unwrap();
        let u = solve_semilinear(&d, Absorption::Power(2.0), &data).unwrap();
        assert!(u.residual < 1e-9);
        assert!(comparison_excess(&u, &h).unwrap() <= 0.0);
        assert!(u.min_value() >= 0.0);
    }

    #[test]
    fn harmonic_measure_reproduces_harmonic_extension() {
        let d = SectorDomain::new(0.75 * PI, 0.05, 1.0, 40, 24).unwrap();
        let w = harmonic_measure_weights(&d, (0.4, 1.0)).unwrap();
        let ones = BoundaryData::from_fn(&d, |_, _| 1.0);
        assert!((boundary_pairing(&w, &ones) - 1.0).abs() < 1e-12);
        let data = BoundaryData::from_fn(&d, |r, t| 1.0 + r * t.cos());
        let f = solve_semilinear(&d, Absorption::None, &data).unwrap();
        let i0 = ((0.4f64 / 0.05).ln() / d.hs()).round() as usize;
        let j0 = (1.0 / d.h_theta()).round() as usize;
        assert!((boundary_pairing(&w, &data) - f.get(i0, j0)).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        let d = SectorDomain::new(PI, 0.01, 1.0, 8, 8).unwrap();
        let data = BoundaryData::zero(&d);
        assert!(solve_semilinear(&d, Absorption::Power(1.0), &data).is_err());
        let other = SectorDomain::new(PI, 0.01, 1.0, 4, 8).unwrap();
        assert!(solve_semilinear(&other, Absorption::None, &data).is_err());
    }
}
