//! First Dirichlet eigenpairs of the Laplace–Beltrami operator on spherical
//! cross-sections: arcs of S¹, axisymmetric caps, and box-product openings
//! solved layer by layer through the recursive polar form of the operator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Tridiagonal};
use crate::profile::RadialProfile;
use crate::quadrature::gauss_legendre;

pub const DEFAULT_MESH: usize = 2048;
const MIN_MESH: usize = 16;
const MAX_INVERSE_ITERATIONS: usize = 500;
const RAYLEIGH_TOL: f64 = 1e-10;
const ANGLE_EPS: f64 = 1e-12;

/// One angular factor `(lower, upper)` of a box-product opening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalFactor {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub full: bool,
}

impl IntervalFactor {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            full: false,
        }
    }

    /// The unconstrained range: `[0, 2π]` for the innermost factor, `[0, π]` otherwise.
    pub fn full(innermost: bool) -> Self {
        Self {
            lower: 0.0,
            upper: if innermost { 2.0 * PI } else { PI },
            full: true,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn validate(&self, innermost: bool) -> Result<()> {
        let cap = if innermost { 2.0 * PI } else { PI };
        if self.full {
            if self.lower != 0.0 || (self.upper - cap).abs() > ANGLE_EPS {
                return Err(Error::domain(
                    "IntervalFactor",
                    format!("full factor must span [0, {cap}]"),
                ));
            }
            return Ok(());
        }
        if !(self.lower >= 0.0 && self.lower < self.upper && self.upper <= cap + ANGLE_EPS) {
            return Err(Error::domain(
                "IntervalFactor",
                format!(
                    "need 0 <= lower < upper <= {cap}, got ({}, {})",
                    self.lower, self.upper
                ),
            ));
        }
        if innermost && self.width() >= 2.0 * PI - ANGLE_EPS {
            return Err(Error::domain(
                "IntervalFactor",
                "a constrained innermost arc must be shorter than 2π",
            ));
        }
        Ok(())
    }

    fn contains(&self, other: &IntervalFactor) -> bool {
        self.lower <= other.lower + ANGLE_EPS && other.upper <= self.upper + ANGLE_EPS
    }
}

/// Cross-section of a cone or dihedron on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opening {
    /// Arc `(0, alpha)` of S¹.
    Arc { alpha: f64 },
    /// Geodesic cap of half-angle `half_angle` on S^dim.
    Cap { dim: usize, half_angle: f64 },
    /// Product of angular intervals, innermost (S¹) factor first.
    BoxProduct { factors: Vec<IntervalFactor> },
}

impl Opening {
    pub fn arc(alpha: f64) -> Self {
        Opening::Arc { alpha }
    }

    pub fn cap(dim: usize, half_angle: f64) -> Self {
        Opening::Cap { dim, half_angle }
    }

    pub fn box_product(factors: Vec<IntervalFactor>) -> Self {
        Opening::BoxProduct { factors }
    }

    /// Dimension of the sphere carrying the opening (k − 1 for a k-dihedron).
    pub fn sphere_dim(&self) -> usize {
        match self {
            Opening::Arc { .. } => 1,
            Opening::Cap { dim, .. } => *dim,
            Opening::BoxProduct { factors } => factors.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Opening::Arc { alpha } => {
                if !(*alpha > 0.0 && *alpha < 2.0 * PI) || !alpha.is_finite() {
                    return Err(Error::domain("Opening", format!("arc angle {alpha} outside (0, 2π)")));
                }
            }
            Opening::Cap { dim, half_angle } => {
                if *dim < 1 {
                    return Err(Error::domain("Opening", "cap dimension must be >= 1"));
                }
                if !(*half_angle > 0.0 && *half_angle < PI) {
                    return Err(Error::domain(
                        "Opening",
                        format!("cap half-angle {half_angle} outside (0, π)"),
                    ));
                }
            }
            Opening::BoxProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::domain("Opening", "box product needs at least one factor"));
                }
                for (i, f) in factors.iter().enumerate() {
                    f.validate(i == 0)?;
                }
                if factors.iter().all(|f| f.full) {
                    return Err(Error::domain(
                        "Opening",
                        "box product must constrain at least one factor",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Inclusion of openings of the same variant (placed as in their definitions).
    pub fn contains(&self, other: &Opening) -> Option<bool> {
        match (self, other) {
            (Opening::Arc { alpha: a }, Opening::Arc { alpha: b }) => Some(b <= a),
            (
                Opening::Cap {
                    dim: d1,
                    half_angle: a,
                },
                Opening::Cap {
                    dim: d2,
                    half_angle: b,
                },
            ) if d1 == d2 => Some(b <= a),
            (Opening::BoxProduct { factors: f1 }, Opening::BoxProduct { factors: f2 })
                if f1.len() == f2.len() =>
            {
                Some(f1.iter().zip(f2).all(|(a, b)| a.contains(b)))
            }
            _ => None,
        }
    }
}

/// Boundary behaviour at one end of a Sturm–Liouville interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    Dirichlet,
    /// Bounded solution. At a pole with a centrifugal term this forces a zero;
    /// otherwise it is a zero-flux (reflection) condition.
    Regular,
}

/// `-(w φ')'/w + μ φ / sin²θ = λ φ` with `w = (sin θ)^p` on `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem {
    pub weight_exponent: f64,
    pub centrifugal: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_bc: EndCondition,
    pub upper_bc: EndCondition,
}

fn is_pole(x: f64) -> bool {
    x.abs() < ANGLE_EPS || (x - PI).abs() < ANGLE_EPS
}

impl SturmLiouvilleProblem {
    /// Layer problem for an interval factor: ends at 0 or π are poles (regular),
    /// other ends are walls (Dirichlet).
    pub fn for_factor(weight_exponent: f64, centrifugal: f64, factor: &IntervalFactor) -> Self {
        let bc = |x: f64| {
            if factor.full || is_pole(x) {
                EndCondition::Regular
            } else {
                EndCondition::Dirichlet
            }
        };
        Self {
            weight_exponent,
            centrifugal,
            lower: factor.lower,
            upper: factor.upper,
            lower_bc: bc(factor.lower),
            upper_bc: bc(factor.upper),
        }
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "SturmLiouvilleProblem";
        if !(self.weight_exponent >= 0.0 && self.centrifugal >= 0.0) {
            return Err(Error::domain(OP, "weight exponent and centrifugal term must be >= 0"));
        }
        if !(self.lower < self.upper) {
            return Err(Error::domain(OP, "empty interval"));
        }
        if (self.weight_exponent > 0.0 || self.centrifugal > 0.0)
            && (self.lower < -ANGLE_EPS || self.upper > PI + ANGLE_EPS)
        {
            return Err(Error::domain(OP, "interval must lie in [0, π] when the weight is singular"));
        }
        if self.lower_bc == EndCondition::Regular
            && self.upper_bc == EndCondition::Regular
            && self.centrifugal == 0.0
        {
            return Err(Error::domain(
                OP,
                "no Dirichlet condition and no centrifugal term: first eigenvalue is 0",
            ));
        }
        Ok(())
    }

    fn weight(&self, x: f64) -> f64 {
        if self.weight_exponent == 0.0 {
            1.0
        } else {
            x.sin().max(0.0).powf(self.weight_exponent)
        }
    }

    fn end_is_zero(&self, upper: bool) -> bool {
        let (bc, x) = if upper {
            (self.upper_bc, self.upper)
        } else {
            (self.lower_bc, self.lower)
        };
        match bc {
            EndCondition::Dirichlet => true,
            EndCondition::Regular => self.centrifugal > 0.0 && is_pole(x),
        }
    }
}

/// Finite-volume discretization on a uniform grid: `K φ = λ M φ` restricted to
/// the free nodes `first..=last`.
#[derive(Debug, Clone)]
pub(crate) struct SlDiscretization {
    pub nodes: Vec<f64>,
    pub first: usize,
    pub last: usize,
    /// Stiffness (including the centrifugal potential) on the free nodes.
    pub stiffness: Tridiagonal,
    /// Diagonal mass, i.e. ∫ w over each control volume.
    pub mass: Vec<f64>,
    pub h: f64,
}

fn cell_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(8);
    }
    RULE.with(|(x, w)| {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
    })
}

impl SlDiscretization {
    pub fn build(prob: &SturmLiouvilleProblem, cells: usize) -> Self {
        let (a, b) = (prob.lower, prob.upper);
        let h = (b - a) / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|i| a + i as f64 * h).collect();
        let first = if prob.end_is_zero(false) { 1 } else { 0 };
        let last = if prob.end_is_zero(true) { cells - 1 } else { cells };
        let n = last - first + 1;
        let face: Vec<f64> = (0..cells)
            .map(|i| prob.weight(a + (i as f64 + 0.5) * h) / h)
            .collect();
        let mut stiffness = Tridiagonal::zeros(n);
        let mut mass = vec![0.0; n];
        for (row, i) in (first..=last).enumerate() {
            let lo = (nodes[i] - 0.5 * h).max(a);
            let hi = (nodes[i] + 0.5 * h).min(b);
            mass[row] = cell_integral(|x| prob.weight(x), lo, hi);
            let mut d = 0.0;
            if i > 0 {
                d += face[i - 1];
            }
            if i < cells {
                d += face[i];
                if row + 1 < n {
                    stiffness.upper[row] = -face[i];
                    stiffness.lower[row] = -face[i];
                }
            }
            if prob.centrifugal > 0.0 {
                d += prob.centrifugal
                    * cell_integral(|x| prob.weight(x) / x.sin().powi(2), lo, hi);
            }
            stiffness.diag[row] = d;
        }
        Self {
            nodes,
            first,
            last,
            stiffness,
            mass,
            h,
        }
    }

    pub fn free_len(&self) -> usize {
        self.last - self.first + 1
    }

    /// Embeds free-node values into the full node list (zeros at Dirichlet ends).
    pub fn embed(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.nodes.len()];
        full[self.first..=self.last].copy_from_slice(free);
        full
    }
}

/// First eigenpair with a max-normalized nonnegative profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub profile: RadialProfile,
    pub mesh_size: f64,
    pub error_estimate: f64,
}

/// Eigenvalue of a cross-section together with its per-layer eigenpairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEigen {
    pub gamma: f64,
    pub sphere_dim: usize,
    pub layers: Vec<EigenPair>,
    pub error_estimate: f64,
}

/// Closed form on the arc `(0, α)`: `λ = (π/α)²`, `φ = sin(πθ/α)`.
pub fn arc_eigen(alpha: f64) -> Result<EigenPair> {
    arc_eigen_sampled(alpha, DEFAULT_MESH)
}

pub fn arc_eigen_sampled(alpha: f64, samples: usize) -> Result<EigenPair> {
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return Err(Error::domain("arc_eigen", format!("α = {alpha} outside (0, 2π)")));
    }
    let k = PI / alpha;
    let profile = RadialProfile::sample(0.0, alpha, samples.max(1), |t| (k * t).sin().max(0.0));
    Ok(EigenPair {
        lambda: k * k,
        mesh_size: profile.mesh_size,
        profile,
        error_estimate: 0.0,
    })
}

pub(crate) struct RawEigen {
    pub lambda: f64,
    pub free_vector: Vec<f64>,
}

/// Inverse iteration (shift 0) on the symmetrized pencil, all-ones start,
/// Rayleigh-quotient eigenvalue estimate.
pub(crate) fn inverse_iteration(disc: &SlDiscretization) -> Result<RawEigen> {
    const OP: &str = "solve_sl_eigen";
    let n = disc.free_len();
    let s: Vec<f64> = disc.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    // A = S K S with S = M^{-1/2}
    let mut a = disc.stiffness.clone();
    for i in 0..n {
        a.diag[i] *= s[i] * s[i];
        if i + 1 < n {
            a.upper[i] *= s[i] * s[i + 1];
            a.lower[i] *= s[i] * s[i + 1];
        }
    }
    let mut x = vec![1.0; n];
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda = dot(&x, &a.mul_vec(&x));
    let mut trace = Vec::new();
    let mut stagnant = 0;
    let mut best = f64::INFINITY;
    for it in 0..MAX_INVERSE_ITERATIONS {
        let mut y = a.solve(&x)?;
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        let ay = a.mul_vec(&y);
        let new_lambda = dot(&y, &ay);
        let res: f64 = ay
            .iter()
            .zip(&y)
            .map(|(p, q)| (p - new_lambda * q).powi(2))
            .sum::<f64>()
            .sqrt()
            / new_lambda.abs().max(f64::MIN_POSITIVE);
        trace.push(res);
        lambda = new_lambda;
        x = y;
        if res < RAYLEIGH_TOL {
            break;
        }
        // roundoff floor of the residual on very fine grids
        if res < 0.5 * best {
            best = res;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if stagnant >= 10 && res < 1e-7 {
            break;
        }
        if it + 1 == MAX_INVERSE_ITERATIONS {
            return Err(Error::NoConvergence {
                op: OP,
                iterations: MAX_INVERSE_ITERATIONS,
                residual: res,
                trace,
            });
        }
    }
    let mut phi: Vec<f64> = x.iter().zip(&s).map(|(v, si)| v * si).collect();
    if phi.iter().sum::<f64>() < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(RawEigen {
        lambda,
        free_vector: phi,
    })
}

fn solve_raw(prob: &SturmLiouvilleProblem, cells: usize) -> Result<(SlDiscretization, RawEigen)> {
    let disc = SlDiscretization::build(prob, cells);
    let raw = inverse_iteration(&disc)?;
    Ok((disc, raw))
}

/// Smallest eigenvalue of the weighted Sturm–Liouville problem on `mesh` cells,
/// with a two-grid (mesh, mesh/2) Richardson error estimate.
pub fn solve_sl_eigen(prob: &SturmLiouvilleProblem, mesh: usize) -> Result<EigenPair> {
    prob.validate()?;
    if mesh < MIN_MESH {
        return Err(Error::domain(
            "solve_sl_eigen",
            format!("mesh {mesh} below the minimum of {MIN_MESH} cells"),
        ));
    }
    let (disc, raw) = solve_raw(prob, mesh)?;
    let (_, coarse) = solve_raw(prob, mesh / 2)?;
    let mut values = disc.embed(&raw.free_vector);
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(*v));
    values.iter_mut().for_each(|v| *v = (*v / peak).max(0.0));
    Ok(EigenPair {
        lambda: raw.lambda,
        profile: RadialProfile::new(disc.nodes, values),
        mesh_size: disc.h,
        error_estimate: (raw.lambda - coarse.lambda).abs() / 3.0,
    })
}

fn constant_pair(lower: f64, upper: f64) -> EigenPair {
    let profile = RadialProfile::sample(lower, upper, 1, |_| 1.0);
    EigenPair {
        lambda: 0.0,
        mesh_size: profile.mesh_size,
        profile,
        error_estimate: 0.0,
    }
}

fn chain_layers(op: &Opening, mesh: usize) -> Result<Vec<EigenPair>> {
    match op {
        Opening::Arc { alpha } => Ok(vec![arc_eigen_sampled(*alpha, mesh)?]),
        Opening::Cap { dim, half_angle } => {
            let prob = SturmLiouvilleProblem {
                weight_exponent: (*dim - 1) as f64,
                centrifugal: 0.0,
                lower: 0.0,
                upper: *half_angle,
                lower_bc: EndCondition::Regular,
                upper_bc: EndCondition::Dirichlet,
            };
            Ok(vec![solve_sl_eigen(&prob, mesh)?])
        }
        Opening::BoxProduct { factors } => {
            let mut layers = Vec::with_capacity(factors.len());
            let inner = &factors[0];
            let first = if inner.full {
                constant_pair(0.0, 2.0 * PI)
            } else {
                let mut e = arc_eigen_sampled(inner.width(), mesh)?;
                e.profile.nodes.iter_mut().for_each(|t| *t += inner.lower);
                e
            };
            layers.push(first);
            for (l, f) in factors.iter().enumerate().skip(1) {
                let mu = layers[l - 1].lambda;
                let pair = if f.full && mu == 0.0 {
                    constant_pair(0.0, PI)
                } else {
                    let prob = SturmLiouvilleProblem::for_factor(l as f64, mu, f);
                    solve_sl_eigen(&prob, mesh)?
                };
                layers.push(pair);
            }
            Ok(layers)
        }
    }
}

/// First Dirichlet eigenvalue γ of the cross-section, via the layer chain for
/// box products: each layer's eigenvalue is the next layer's centrifugal term.
pub fn cross_section_eigen(op: &Opening, mesh: usize) -> Result<ChainEigen> {
    op.validate()?;
    if mesh < MIN_MESH {
        return Err(Error::domain(
            "cross_section_eigen",
            format!("mesh {mesh} below the minimum of {MIN_MESH} cells"),
        ));
    }
    let layers = chain_layers(op, mesh)?;
    let gamma = layers.last().unwrap().lambda;
    let error_estimate = match op {
        Opening::Arc { .. } => 0.0,
        Opening::Cap { .. } => layers[0].error_estimate,
        Opening::BoxProduct { .. } => {
            let coarse = chain_layers(op, mesh / 2)?;
            (gamma - coarse.last().unwrap().lambda).abs() / 3.0
        }
    };
    Ok(ChainEigen {
        gamma,
        sphere_dim: op.sphere_dim(),
        layers,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn arc_closed_forms() {
        assert_eq!(arc_eigen(PI).unwrap().lambda, 1.0);
        assert_eq!(arc_eigen(FRAC_PI_2).unwrap().lambda, 4.0);
        assert!((arc_eigen(2.0 * PI / 3.0).unwrap().lambda - 2.25).abs() < 1e-15);
        assert!(arc_eigen(2.0 * PI).is_err());
        assert!(arc_eigen(0.0).is_err());
    }

    #[test]
    fn hemisphere_of_s2() {
        let prob = SturmLiouvilleProblem {
            weight_exponent: 1.0,
            centrifugal: 0.0,
            lower: 0.0,
            upper: FRAC_PI_2,
            lower_bc: EndCondition::Regular,
            upper_bc: EndCondition::Dirichlet,
        };
        let e = solve_sl_eigen(&prob, 1024).unwrap();
        assert!((e.lambda - 2.0).abs() < 1e-5, "{}", e.lambda);
        assert!((e.lambda - 2.0).abs() < 5.0 * e.error_estimate + 1e-12);
        assert_eq!(e.profile.max(), 1.0);
        assert_eq!(*e.profile.values.last().unwrap(), 0.0);
        assert!(e.profile.values[..e.profile.len() - 1].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn hemisphere_of_s3() {
        let prob = SturmLiouvilleProblem {
            weight_exponent: 2.0,
            centrifugal: 0.0,
            lower: 0.0,
            upper: FRAC_PI_2,
            lower_bc: EndCondition::Regular,
            upper_bc: EndCondition::Dirichlet,
        };
        let e = solve_sl_eigen(&prob, 1024).unwrap();
        assert!((e.lambda - 3.0).abs() < 1e-5, "{}", e.lambda);
    }

    #[test]
    fn mesh_below_minimum_rejected() {
        let prob = SturmLiouvilleProblem {
            weight_exponent: 0.0,
            centrifugal: 0.0,
            lower: 0.0,
            upper: 1.0,
            lower_bc: EndCondition::Dirichlet,
            upper_bc: EndCondition::Dirichlet,
        };
        assert!(solve_sl_eigen(&prob, 8).is_err());
    }

    #[test]
    fn box_product_validation() {
        let all_full = Opening::box_product(vec![IntervalFactor::full(true), IntervalFactor::full(false)]);
        assert!(all_full.validate().is_err());
        let bad = Opening::box_product(vec![IntervalFactor::new(0.0, 2.0 * PI)]);
        assert!(bad.validate().is_err());
        let outer_too_wide = Opening::box_product(vec![
            IntervalFactor::new(0.0, 1.0),
            IntervalFactor::new(0.0, 4.0),
        ]);
        assert!(outer_too_wide.validate().is_err());
    }

    #[test]
    fn lune_matches_closed_form() {
        let lune = Opening::box_product(vec![IntervalFactor::new(0.0, FRAC_PI_2), IntervalFactor::full(false)]);
        let c = cross_section_eigen(&lune, 2048).unwrap();
        let exact = 4.0 + 2.0;
        assert!((c.gamma - exact).abs() < 1e-5, "{}", c.gamma);
        assert!((c.gamma - exact).abs() <= 5.0 * c.error_estimate + 1e-9);
        assert_eq!(c.layers.len(), 2);
    }

    #[test]
    fn cap_built_from_full_inner_factor_matches_cap_variant() {
        let cap = Opening::cap(2, 1.0);
        let boxed = Opening::box_product(vec![IntervalFactor::full(true), IntervalFactor::new(0.0, 1.0)]);
        let a = cross_section_eigen(&cap, 512).unwrap().gamma;
        let b = cross_section_eigen(&boxed, 512).unwrap().gamma;
        assert!((a - b).abs() < 1e-12);
    }
}
