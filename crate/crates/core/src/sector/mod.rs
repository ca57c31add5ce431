//! Finite-difference laboratory for `-Δu + |u|^{q-1}u = 0` on truncated planar
//! sectors `{rMin < r < rMax, 0 < θ < α}`.
//!
//! The grid is uniform in `s = ln r` (geometric in r) and in θ, so the
//! r²-scaled operator `-(u_ss + u_θθ) + r² g(u)` has a plain five-point stencil.

mod experiments;
mod solve;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiments::{
    classify_exponent, exact_solution_study, fit_decay, halfstrip_transform, harnack_ratio_check,
    harnack_study, keller_osserman_constant, strong_singularity_experiment, trichotomy_experiment,
    weak_singularity_experiment, AsymptoticFit, Classification, ExactStudy, HalfStrip, HarnackReport,
    HarnackStudy, InnerShape, KellerOsserman, StrongOptions, StrongReport, WeakOptions, WeakReport,
};
pub use solve::{
    boundary_pairing, comparison_excess, exact_solution_residual, harmonic_measure_weights,
    scaled_residual, solve_semilinear, solve_semilinear_from, Absorption, SolveOptions,
};

const OP: &str = "SectorDomain";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorDomain {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Radial cells (uniform in ln r).
    pub n_r: usize,
    /// Angular cells.
    pub n_theta: usize,
}

impl SectorDomain {
    pub fn new(alpha: f64, r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        let d = Self {
            alpha,
            r_min,
            r_max,
            n_r,
            n_theta,
        };
        d.validate()?;
        Ok(d)
    }

    /// Domain with `per_decade` radial cells per factor 10 in r (at least 64).
    pub fn graded(alpha: f64, r_min: f64, r_max: f64, per_decade: usize, n_theta: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::domain(OP, format!("need 0 < rMin < rMax, got {r_min}, {r_max}")));
        }
        let decades = (r_max / r_min).log10();
        let n_r = ((decades * per_decade.max(64) as f64).ceil() as usize).max(2);
        Self::new(alpha, r_min, r_max, n_r, n_theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0 * std::f64::consts::PI) {
            return Err(Error::domain(OP, format!("opening α = {} outside (0, 2π)", self.alpha)));
        }
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::domain(
                OP,
                format!("need 0 < rMin < rMax, got {}, {}", self.r_min, self.r_max),
            ));
        }
        if self.n_r < 2 || self.n_theta < 2 {
            return Err(Error::domain(OP, "need at least two cells in each direction"));
        }
        Ok(())
    }

    /// Step in s = ln r.
    pub fn hs(&self) -> f64 {
        (self.r_max / self.r_min).ln() / self.n_r as f64
    }

    pub fn h_theta(&self) -> f64 {
        self.alpha / self.n_theta as f64
    }

    /// Ratio r_i / r_{i+1} between successive radial nodes, in (0, 1).
    pub fn grading_ratio(&self) -> f64 {
        (-self.hs()).exp()
    }

    pub fn r(&self, i: usize) -> f64 {
        if i == self.n_r {
            self.r_max
        } else {
            self.r_min * (i as f64 * self.hs()).exp()
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.n_r).map(|i| self.r(i)).collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..=self.n_theta).map(|j| self.theta(j)).collect()
    }

    /// Number of nodes including the boundary.
    pub fn node_count(&self) -> usize {
        (self.n_r + 1) * (self.n_theta + 1)
    }

    /// Same sector with both cell counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_r: 2 * self.n_r,
            n_theta: 2 * self.n_theta,
            ..*self
        }
    }

    /// Euclidean distance from the polar point (r, θ) to the boundary of the
    /// truncated sector (two arcs and two ray segments).
    pub fn boundary_distance(&self, r: f64, theta: f64) -> f64 {
        let arcs = (r - self.r_min).abs().min((self.r_max - r).abs());
        let seg = |phi: f64| {
            // projection of the point onto the ray at angle φ
            let along = r * (theta - phi).cos();
            let t = along.clamp(self.r_min, self.r_max);
            let (px, py) = (r * theta.cos(), r * theta.sin());
            let (qx, qy) = (t * phi.cos(), t * phi.sin());
            ((px - qx).powi(2) + (py - qy).powi(2)).sqrt()
        };
        arcs.min(seg(0.0)).min(seg(self.alpha))
    }
}

/// Dirichlet data on the four sides of the truncated sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// Values on the inner arc r = rMin, indexed by θ node.
    pub inner: Vec<f64>,
    /// Values on the outer arc r = rMax, indexed by θ node.
    pub outer: Vec<f64>,
    /// Values on the ray θ = 0, indexed by r node.
    pub lower_ray: Vec<f64>,
    /// Values on the ray θ = α, indexed by r node.
    pub upper_ray: Vec<f64>,
}

impl BoundaryData {
    pub fn zero(dom: &SectorDomain) -> Self {
        Self {
            inner: vec![0.0; dom.n_theta + 1],
            outer: vec![0.0; dom.n_theta + 1],
            lower_ray: vec![0.0; dom.n_r + 1],
            upper_ray: vec![0.0; dom.n_r + 1],
        }
    }

    /// Data given by a function of (r, θ) sampled on the boundary nodes.
    pub fn from_fn(dom: &SectorDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let th = dom.angles();
        let rs = dom.radii();
        Self {
            inner: th.iter().map(|&t| f(dom.r_min, t)).collect(),
            outer: th.iter().map(|&t| f(dom.r_max, t)).collect(),
            lower_ray: rs.iter().map(|&r| f(r, 0.0)).collect(),
            upper_ray: rs.iter().map(|&r| f(r, dom.alpha)).collect(),
        }
    }

    /// `k · rMin^{-π/α} sin(πθ/α)` on the inner arc, zero elsewhere: the
    /// truncated harmonic kernel standing in for a Dirac mass at the vertex.
    pub fn vertex_kernel(dom: &SectorDomain, k: f64) -> Self {
        let a = std::f64::consts::PI / dom.alpha;
        let mut d = Self::zero(dom);
        let amp = k * dom.r_min.powf(-a);
        for (j, v) in d.inner.iter_mut().enumerate() {
            *v = amp * (a * dom.theta(j)).sin();
        }
        d
    }

    /// Constant `value` on the inner arc, zero elsewhere.
    pub fn inner_constant(dom: &SectorDomain, value: f64) -> Self {
        let mut d = Self::zero(dom);
        d.inner.iter_mut().for_each(|v| *v = value);
        d
    }

    /// Smooth bump `amp · sin²` supported on the outer-arc angles (lo, hi).
    pub fn outer_bump(dom: &SectorDomain, amp: f64, lo: f64, hi: f64) -> Self {
        let mut d = Self::zero(dom);
        for (j, v) in d.outer.iter_mut().enumerate() {
            let t = dom.theta(j);
            if t > lo && t < hi {
                *v = amp * (std::f64::consts::PI * (t - lo) / (hi - lo)).sin().powi(2);
            }
        }
        d
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| c * x).collect();
        Self {
            inner: s(&self.inner),
            outer: s(&self.outer),
            lower_ray: s(&self.lower_ray),
            upper_ray: s(&self.upper_ray),
        }
    }

    pub fn check(&self, dom: &SectorDomain) -> Result<()> {
        let (nt, nr) = (dom.n_theta + 1, dom.n_r + 1);
        if self.inner.len() != nt || self.outer.len() != nt || self.lower_ray.len() != nr || self.upper_ray.len() != nr {
            return Err(Error::domain("BoundaryData", "data lengths do not match the grid"));
        }
        let all = self.inner.iter().chain(&self.outer).chain(&self.lower_ray).chain(&self.upper_ray);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::domain("BoundaryData", "boundary data must be finite"));
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.inner
            .iter()
            .chain(&self.outer)
            .chain(&self.lower_ray)
            .chain(&self.upper_ray)
            .all(|v| *v >= 0.0)
    }
}

/// Nodal values on the full (r, θ) grid, r-major: `values[i * (nθ + 1) + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarField {
    pub domain: SectorDomain,
    pub values: Vec<f64>,
    pub data: BoundaryData,
    /// Largest row-relative residual of the discrete equation.
    pub residual: f64,
    pub newton_iterations: usize,
}

impl PolarField {
    /// Samples `f(r, θ)` on every node; boundary data is taken from the samples.
    pub fn from_fn(dom: &SectorDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(dom.node_count());
        for i in 0..=dom.n_r {
            let r = dom.r(i);
            for j in 0..=dom.n_theta {
                values.push(f(r, dom.theta(j)));
            }
        }
        Self {
            domain: *dom,
            values,
            data: BoundaryData::from_fn(dom, f),
            residual: f64::NAN,
            newton_iterations: 0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.domain.n_theta + 1) + j]
    }

    /// Values along the θ-row at radial node `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.domain.n_theta + 1;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn max_over_theta(&self, i: usize) -> f64 {
        self.row(i).iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Radial node indices whose radius lies in `[lo, hi]`.
    pub fn radial_window(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..=self.domain.n_r)
            .filter(|&i| {
                let r = self.domain.r(i);
                r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,theta,u")?;
        for i in 0..=self.domain.n_r {
            let r = self.domain.r(i);
            for j in 0..=self.domain.n_theta {
                writeln!(w, "{r:.17e},{:.17e},{:.17e}", self.domain.theta(j), self.get(i, j))?;
            }
        }
        Ok(())
    }
}
