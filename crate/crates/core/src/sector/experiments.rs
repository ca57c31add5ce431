use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::solve::{
    boundary_pairing, exact_solution_residual, harmonic_measure_weights, solve_semilinear,
    solve_semilinear_from, Absorption, SolveOptions,
};
use super::{BoundaryData, PolarField, SectorDomain};
use crate::convergence::linear_fit;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::spectral::Opening;
use crate::sphere_profile::{solve_omega, NonlinearProfileProblem, ProfileOutcome};

const MIN_R2: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// u ~ r^{+π/α}: no singularity at the vertex.
    Bounded,
    /// u ~ k* r^{-π/α} φ_S.
    Weak,
    /// u ~ r^{-2/(q-1)} ω_S.
    Strong,
}

/// Nearest of the three reference exponents +π/α, −π/α, −2/(q−1).
pub fn classify_exponent(exponent: f64, alpha: f64, q: f64) -> Classification {
    let a = PI / alpha;
    let candidates = [
        (a, Classification::Bounded),
        (-a, Classification::Weak),
        (-2.0 / (q - 1.0), Classification::Strong),
    ];
    candidates
        .iter()
        .min_by(|x, y| (x.0 - exponent).abs().total_cmp(&(y.0 - exponent).abs()))
        .unwrap()
        .1
}

fn reference_exponent(c: Classification, alpha: f64, q: f64) -> f64 {
    match c {
        Classification::Bounded => PI / alpha,
        Classification::Weak => -PI / alpha,
        Classification::Strong => -2.0 / (q - 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Slope of ln max_θ u against ln r over the window.
    pub fitted_exponent: f64,
    /// Mean over the window of r^{-p} max_θ u, p the exponent of the class
    /// (k* for weak singularities, max ω for strong ones).
    pub amplitude: f64,
    pub r2: f64,
    pub classification: Classification,
    /// Relative L² distance of the window-averaged angular profile (max-normalized)
    /// to the reference profile.
    pub angular_profile_match: f64,
    /// Fit window [r_lo, r_hi].
    pub window: [f64; 2],
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Mean over the window rows of the max-normalized angular profile.
fn window_profile(field: &PolarField, rows: &[usize]) -> Vec<f64> {
    let w = field.domain.n_theta + 1;
    let mut acc = vec![0.0; w];
    for &i in rows {
        let m = field.max_over_theta(i);
        for (a, v) in acc.iter_mut().zip(field.row(i)) {
            *a += v / m;
        }
    }
    acc.iter().map(|a| a / rows.len() as f64).collect()
}

/// Log-log regression of max_θ u over r ∈ [lo, hi]. `reference` is the
/// angular profile used for the match (φ_S = sin(πθ/α) when `None`).
pub fn fit_decay(field: &PolarField, lo: f64, hi: f64, q: f64, reference: Option<&[f64]>) -> Result<AsymptoticFit> {
    const OP: &str = "fit_decay";
    let rows = field.radial_window(lo, hi);
    if rows.len() < 3 {
        return Err(Error::domain(OP, "fit window contains fewer than three radial nodes"));
    }
    let dom = &field.domain;
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for &i in &rows {
        let m = field.max_over_theta(i);
        if !(m > 0.0) {
            return Err(Error::precondition(OP, "field is not positive in the fit window"));
        }
        x.push(dom.r(i).ln());
        y.push(m.ln());
    }
    let (slope, _, r2) = linear_fit(&x, &y);
    if !(r2 >= MIN_R2) {
        return Err(Error::Inconclusive {
            op: OP,
            msg: format!("log-log fit rejected: R² = {r2:.6} < {MIN_R2}"),
        });
    }
    let classification = classify_exponent(slope, dom.alpha, q);
    let p = reference_exponent(classification, dom.alpha, q);
    let amplitude = rows
        .iter()
        .map(|&i| dom.r(i).powf(-p) * field.max_over_theta(i))
        .sum::<f64>()
        / rows.len() as f64;
    let a = PI / dom.alpha;
    let default_ref: Vec<f64> = dom.angles().iter().map(|t| (a * t).sin()).collect();
    let reference = reference.unwrap_or(&default_ref);
    let angular_profile_match = relative_l2(&window_profile(field, &rows), reference);
    Ok(AsymptoticFit {
        fitted_exponent: slope,
        amplitude,
        r2,
        classification,
        angular_profile_match,
        window: [lo, hi],
    })
}

fn check_subcritical(op: &'static str, alpha: f64, q: f64) -> Result<()> {
    let q_s = 1.0 + 2.0 * alpha / PI;
    if !(q > 1.0 && q < q_s) {
        return Err(Error::Regime {
            op,
            msg: format!("need 1 < q < q_S = {q_s:.6} for this opening, got q = {q}"),
        });
    }
    Ok(())
}

/// Shape of the inner-arc data standing in for a vertex mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerShape {
    /// `k rMin^{-π/α} sin(πθ/α)`.
    Kernel,
    /// The constant `k rMin^{-π/α}`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakOptions {
    /// Fit window in units of rMin.
    pub window: [f64; 2],
    /// Reference point (r, θ) of the harmonic measure; θ is a fraction of α.
    pub reference_point: [f64; 2],
    pub shape: InnerShape,
}

impl Default for WeakOptions {
    fn default() -> Self {
        Self {
            window: [2.0, 20.0],
            reference_point: [0.5, 0.5],
            shape: InnerShape::Kernel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakReport {
    pub k: f64,
    pub fit: AsymptoticFit,
    /// Fit of the solution with doubled data.
    pub fit_doubled: AsymptoticFit,
    /// Amplitude ratio between doubled and original data (→ 2).
    pub amplitude_ratio: f64,
    /// Harmonic-measure mass of the kernel r^{-π/α} sin(πθ/α) on the inner arc.
    pub gamma: f64,
    /// Harmonic-measure mass of the data.
    pub trace_mass: f64,
    /// |trace_mass − k*·γ| / trace_mass.
    pub trace_consistency: f64,
    pub options: WeakOptions,
}

fn inner_data(dom: &SectorDomain, k: f64, shape: InnerShape) -> BoundaryData {
    match shape {
        InnerShape::Kernel => BoundaryData::vertex_kernel(dom, k),
        InnerShape::Constant => BoundaryData::inner_constant(dom, k * dom.r_min.powf(-PI / dom.alpha)),
    }
}

/// Weak singularity at the vertex: solves with inner-arc data of mass `k`,
/// fits the inner exponent, checks linearity in k, and compares the trace
/// mass with k*·γ measured by discrete harmonic measure.
pub fn weak_singularity_experiment(dom: &SectorDomain, q: f64, k: f64, opts: WeakOptions) -> Result<WeakReport> {
    const OP: &str = "weak_singularity_experiment";
    dom.validate()?;
    check_subcritical(OP, dom.alpha, q)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(OP, format!("mass k = {k} must be positive")));
    }
    let g = Absorption::Power(q);
    let data = inner_data(dom, k, opts.shape);
    let u = solve_semilinear(dom, g, &data)?;
    let doubled = data.scaled(2.0);
    let u2 = solve_semilinear_from(dom, g, &doubled, &u.values, SolveOptions::default())?;
    let (lo, hi) = (opts.window[0] * dom.r_min, opts.window[1] * dom.r_min);
    let fit = fit_decay(&u, lo, hi, q, None)?;
    let fit_doubled = fit_decay(&u2, lo, hi, q, None)?;
    let x0 = (opts.reference_point[0], opts.reference_point[1] * dom.alpha);
    let w = harmonic_measure_weights(dom, x0)?;
    let kernel = BoundaryData::vertex_kernel(dom, 1.0);
    let gamma = boundary_pairing(&w, &kernel);
    let trace_mass = boundary_pairing(&w, &data);
    let trace_consistency = (trace_mass - fit.amplitude * gamma).abs() / trace_mass;
    Ok(WeakReport {
        k,
        amplitude_ratio: fit_doubled.amplitude / fit.amplitude,
        fit,
        fit_doubled,
        gamma,
        trace_mass,
        trace_consistency,
        options: opts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongOptions {
    /// Ladder k = base^j, j = 0..levels.
    pub base: f64,
    pub levels: usize,
    /// Comparison window in units of rMin.
    pub window: [f64; 2],
    /// Mesh for the angular profile ω_S.
    pub omega_mesh: usize,
}

impl Default for StrongOptions {
    fn default() -> Self {
        Self {
            base: 4.0,
            levels: 16,
            window: [100.0, 1000.0],
            omega_mesh: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongReport {
    pub ladder: Vec<f64>,
    /// Largest decrease u_{k'} − u_k (k' > k) found along the ladder; ≤ 0 means monotone.
    pub worst_decrease: f64,
    pub monotone: bool,
    /// Relative sup change in the window between the last two rungs.
    pub last_increment: f64,
    /// Geometric tail factor used to extrapolate the ladder.
    pub tail_ratio: f64,
    /// Fit of the extrapolated limit over the window.
    pub fit: AsymptoticFit,
    /// Relative L² distance of the limit to r^{-2/(q-1)} ω_S(θ) over the window.
    pub profile_match: f64,
    pub omega_max: f64,
}

fn omega_on_grid(dom: &SectorDomain, q: f64, mesh: usize) -> Result<(RadialProfile, Vec<f64>)> {
    let prob = NonlinearProfileProblem::new(2, q, Opening::arc(dom.alpha), mesh);
    match solve_omega(&prob)? {
        ProfileOutcome::Profile(s) => {
            let on_grid = dom.angles().iter().map(|t| s.profile.interpolate(*t)).collect();
            Ok((s.profile, on_grid))
        }
        ProfileOutcome::Nonexistence(_) => Err(Error::Regime {
            op: "strong_singularity_experiment",
            msg: "no positive angular profile exists for this (α, q)".into(),
        }),
    }
}

/// Strong singularity: climbs the ladder k = base^j with warm starts, checks
/// monotonicity in k, extrapolates the limit, and compares it with the
/// separable solution r^{-2/(q-1)} ω_S(θ).
pub fn strong_singularity_experiment(dom: &SectorDomain, q: f64, opts: StrongOptions) -> Result<StrongReport> {
    const OP: &str = "strong_singularity_experiment";
    dom.validate()?;
    check_subcritical(OP, dom.alpha, q)?;
    if opts.levels < 3 || !(opts.base > 1.0) {
        return Err(Error::domain(OP, "ladder needs base > 1 and at least three levels"));
    }
    let (omega, omega_grid) = omega_on_grid(dom, q, opts.omega_mesh)?;
    let g = Absorption::Power(q);
    let (lo, hi) = (opts.window[0] * dom.r_min, opts.window[1] * dom.r_min);
    let mut ladder = Vec::new();
    let mut fields: Vec<PolarField> = Vec::new();
    let mut worst_decrease = f64::NEG_INFINITY;
    let mut start = vec![0.0; dom.node_count()];
    for j in 0..opts.levels {
        let k = opts.base.powi(j as i32);
        let u = solve_semilinear_from(dom, g, &BoundaryData::vertex_kernel(dom, k), &start, SolveOptions::default())?;
        if let Some(prev) = fields.last() {
            for (a, b) in u.values.iter().zip(&prev.values) {
                // allow rounding at the level of the solver tolerance
                let d = b - a;
                if d > 1e-8 * a.abs().max(b.abs()) {
                    worst_decrease = worst_decrease.max(d);
                }
            }
        }
        start = u.values.clone();
        ladder.push(k);
        fields.push(u);
        if fields.len() > 3 {
            fields.remove(0);
        }
    }
    let monotone = worst_decrease == f64::NEG_INFINITY;
    if !monotone {
        return Err(Error::Scheme {
            op: OP,
            msg: format!("ladder is not monotone in k (decrease {worst_decrease:e}): comparison principle violated"),
        });
    }
    let [u0, u1, u2] = [&fields[0], &fields[1], &fields[2]];
    let rows = u2.radial_window(lo, hi);
    let w = dom.n_theta + 1;
    let (mut num, mut den, mut inc, mut top) = (0.0, 0.0, 0.0f64, 0.0f64);
    for &i in &rows {
        for j in 0..w {
            let p = i * w + j;
            let d1 = u2.values[p] - u1.values[p];
            let d0 = u1.values[p] - u0.values[p];
            num += d1 * d0;
            den += d0 * d0;
            inc = inc.max(d1.abs());
            top = top.max(u2.values[p].abs());
        }
    }
    let tail_ratio = if den > 0.0 { (num / den).clamp(0.0, 0.95) } else { 0.0 };
    let mut limit = u2.clone();
    for p in 0..limit.values.len() {
        limit.values[p] += tail_ratio / (1.0 - tail_ratio) * (u2.values[p] - u1.values[p]);
    }
    let beta = 2.0 / (q - 1.0);
    let omax = omega.max();
    let reference: Vec<f64> = omega_grid.iter().map(|v| v / omax).collect();
    let fit = fit_decay(&limit, lo, hi, q, Some(&reference))?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &i in &rows {
        let scale = dom.r(i).powf(-beta);
        for j in 0..w {
            a.push(limit.get(i, j));
            b.push(scale * omega_grid[j]);
        }
    }
    Ok(StrongReport {
        ladder,
        worst_decrease: worst_decrease.max(0.0),
        monotone,
        last_increment: inc / top,
        tail_ratio,
        fit,
        profile_match: relative_l2(&a, &b),
        omega_max: omax,
    })
}

/// Data supported away from the vertex (a bump on the outer arc): the fit over
/// the window (units of rMin) should classify as Bounded with exponent +π/α.
pub fn trichotomy_experiment(dom: &SectorDomain, q: f64, window: [f64; 2]) -> Result<AsymptoticFit> {
    dom.validate()?;
    let data = BoundaryData::outer_bump(dom, 1.0, 0.2 * dom.alpha, 0.8 * dom.alpha);
    let u = solve_semilinear(dom, Absorption::Power(q), &data)?;
    fit_decay(&u, window[0] * dom.r_min, window[1] * dom.r_min, q, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactStudy {
    pub n_theta: Vec<usize>,
    /// Scale-free residual of the separable solution on each grid.
    pub residuals: Vec<f64>,
    /// Max error (relative to r^{-2/(q-1)} max ω) of the field solved with exact data.
    pub field_errors: Vec<f64>,
    pub residual_orders: Vec<f64>,
    pub field_orders: Vec<f64>,
}

/// Residual and solution error of the separable solution U = r^{-2/(q-1)} ω_S(θ)
/// over successive uniform refinements of `dom` (`refinements` + 1 grids).
pub fn exact_solution_study(dom: &SectorDomain, q: f64, refinements: usize, omega_mesh: usize) -> Result<ExactStudy> {
    dom.validate()?;
    check_subcritical("exact_solution_study", dom.alpha, q)?;
    let beta = 2.0 / (q - 1.0);
    let prob = NonlinearProfileProblem::new(2, q, Opening::arc(dom.alpha), omega_mesh);
    let omega = match solve_omega(&prob)? {
        ProfileOutcome::Profile(s) => s.profile,
        ProfileOutcome::Nonexistence(_) => unreachable!("subcritical q always has a profile"),
    };
    let g = Absorption::Power(q);
    let mut d = *dom;
    let mut out = ExactStudy {
        n_theta: Vec::new(),
        residuals: Vec::new(),
        field_errors: Vec::new(),
        residual_orders: Vec::new(),
        field_orders: Vec::new(),
    };
    for level in 0..=refinements {
        if level > 0 {
            d = d.refined();
        }
        let exact = PolarField::from_fn(&d, |r, t| r.powf(-beta) * omega.interpolate(t));
        out.residuals.push(exact_solution_residual(&exact, g, beta));
        let u = solve_semilinear(&d, g, &exact.data)?;
        let mut err: f64 = 0.0;
        for i in 0..=d.n_r {
            let rb = d.r(i).powf(beta);
            for j in 0..=d.n_theta {
                err = err.max(rb * (u.get(i, j) - exact.get(i, j)).abs());
            }
        }
        out.field_errors.push(err / omega.max());
        out.n_theta.push(d.n_theta);
    }
    let orders = |v: &[f64]| v.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    out.residual_orders = orders(&out.residuals);
    out.field_orders = orders(&out.field_errors);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    /// sup over pairs z, z′ of (u₁(z)/u₂(z)) / (u₁(z′)/u₂(z′)).
    pub sup_ratio: f64,
    pub min_quotient: f64,
    pub max_quotient: f64,
    pub nodes: usize,
}

/// Boundary Harnack ratio on the interior nodes of B_radius(center) ∩ Ω,
/// `center` in Cartesian coordinates.
pub fn harnack_ratio_check(u1: &PolarField, u2: &PolarField, center: [f64; 2], radius: f64) -> Result<HarnackReport> {
    const OP: &str = "harnack_ratio_check";
    if u1.domain != u2.domain {
        return Err(Error::precondition(OP, "fields live on different grids"));
    }
    let dom = &u1.domain;
    let (mut lo, mut hi, mut nodes) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for i in 1..dom.n_r {
        let r = dom.r(i);
        for j in 1..dom.n_theta {
            let t = dom.theta(j);
            let (x, y) = (r * t.cos(), r * t.sin());
            if (x - center[0]).hypot(y - center[1]) > radius {
                continue;
            }
            let (a, b) = (u1.get(i, j), u2.get(i, j));
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::precondition(OP, format!("fields not strictly positive at r = {r}, θ = {t}")));
            }
            let c = a / b;
            lo = lo.min(c);
            hi = hi.max(c);
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(Error::domain(OP, "test ball contains no interior nodes"));
    }
    Ok(HarnackReport {
        sup_ratio: hi / lo,
        min_quotient: lo,
        max_quotient: hi,
        nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackStudy {
    pub coarse: HarnackReport,
    pub fine: HarnackReport,
    /// max(c_coarse, c_fine) / min(c_coarse, c_fine).
    pub variation: f64,
    pub stable: bool,
}

/// Two solutions with distinct outer-arc bumps, both vanishing on the ray
/// θ = 0; ratio bound on the ball of radius `radius` around the ray point at
/// distance `center_r`, on `dom` and on its uniform refinement.
pub fn harnack_study(dom: &SectorDomain, q: f64, center_r: f64, radius: f64) -> Result<HarnackStudy> {
    let run = |d: &SectorDomain| -> Result<HarnackReport> {
        let a = d.alpha;
        let d1 = BoundaryData::outer_bump(d, 10.0, 0.3 * a, 0.6 * a);
        let d2 = BoundaryData::outer_bump(d, 5.0, 0.55 * a, 0.95 * a);
        let g = Absorption::Power(q);
        let u1 = solve_semilinear(d, g, &d1)?;
        let u2 = solve_semilinear(d, g, &d2)?;
        harnack_ratio_check(&u1, &u2, [center_r, 0.0], radius)
    };
    let coarse = run(dom)?;
    let fine = run(&dom.refined())?;
    let variation = coarse.sup_ratio.max(fine.sup_ratio) / coarse.sup_ratio.min(fine.sup_ratio);
    Ok(HarnackStudy {
        stable: coarse.sup_ratio.is_finite() && variation < 2.0,
        coarse,
        fine,
        variation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KellerOsserman {
    /// max u · dist^{2/(q−1)} over interior nodes at distance ≥ `min_distance` from ∂Ω.
    pub constant: f64,
    pub at: [f64; 2],
    pub min_distance: f64,
}

/// Measured Keller–Osserman constant. Nodes within `min_distance` of the
/// boundary are skipped: there a grid solution with very large data is still
/// dominated by the data rather than by the universal bound.
pub fn keller_osserman_constant(field: &PolarField, q: f64, min_distance: f64) -> KellerOsserman {
    let dom = &field.domain;
    let e = 2.0 / (q - 1.0);
    let mut best = (0.0, [f64::NAN, f64::NAN]);
    for i in 1..dom.n_r {
        let r = dom.r(i);
        for j in 1..dom.n_theta {
            let t = dom.theta(j);
            let dist = dom.boundary_distance(r, t);
            if dist < min_distance {
                continue;
            }
            let c = field.get(i, j) * dist.powf(e);
            if c > best.0 {
                best = (c, [r, t]);
            }
        }
    }
    KellerOsserman {
        constant: best.0,
        at: best.1,
        min_distance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfStrip {
    /// t = −ln r, increasing (toward the vertex).
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    /// `values[n][j] = r^{α_S} u` at t[n], θ[j].
    pub values: Vec<Vec<f64>>,
}

impl HalfStrip {
    /// sup_θ |v(t_a, ·) − v(t_b, ·)|.
    pub fn sup_change(&self, a: usize, b: usize) -> f64 {
        self.values[a]
            .iter()
            .zip(&self.values[b])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// v(t, θ) = r^{α_S} u(r, θ) with t = −ln r, on the field's own grid (uniform in t).
pub fn halfstrip_transform(field: &PolarField, alpha_s: f64) -> HalfStrip {
    let dom = &field.domain;
    let mut t = Vec::with_capacity(dom.n_r + 1);
    let mut values = Vec::with_capacity(dom.n_r + 1);
    for i in (0..=dom.n_r).rev() {
        let r = dom.r(i);
        t.push(-r.ln());
        let s = r.powf(alpha_s);
        values.push(field.row(i).iter().map(|u| s * u).collect());
    }
    HalfStrip {
        t,
        theta: dom.angles(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_picks_nearest_reference() {
        assert_eq!(classify_exponent(-1.01, PI, 2.0), Classification::Weak);
        assert_eq!(classify_exponent(-1.98, PI, 2.0), Classification::Strong);
        assert_eq!(classify_exponent(0.99, PI, 2.0), Classification::Bounded);
    }

    #[test]
    fn halfstrip_of_exact_kernel_is_flat() {
        let d = SectorDomain::new(0.75 * PI, 1e-3, 1.0, 60, 24).unwrap();
        let a = PI / d.alpha;
        let f = PolarField::from_fn(&d, |r, t| r.powf(-a) * (a * t).sin());
        let v = halfstrip_transform(&f, a);
        for n in 0..v.t.len() {
            for (j, th) in v.theta.iter().enumerate() {
                assert!((v.values[n][j] - (a * th).sin()).abs() < 1e-12);
            }
        }
        assert!(v.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fit_recovers_power_law() {
        let d = SectorDomain::new(PI, 1e-4, 1.0, 256, 16).unwrap();
        let f = PolarField::from_fn(&d, |r, t| 3.0 * r.powf(-1.0) * t.sin());
        let fit = fit_decay(&f, 2e-4, 2e-3, 2.0, None).unwrap();
        assert!((fit.fitted_exponent + 1.0).abs() < 1e-12);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert_eq!(fit.classification, Classification::Weak);
        assert!(fit.angular_profile_match < 1e-12);
    }

    #[test]
    fn fit_rejects_poor_regression() {
        let d = SectorDomain::new(PI, 1e-4, 1.0, 256, 16).unwrap();
        let f = PolarField::from_fn(&d, |r, t| (2.0 + (30.0 * r.ln()).sin()) * t.sin());
        assert!(matches!(
            fit_decay(&f, 2e-4, 2e-2, 2.0, None),
            Err(Error::Inconclusive { .. })
        ));
    }

    #[test]
    fn supercritical_q_is_a_regime_error() {
        let d = SectorDomain::new(PI, 1e-3, 1.0, 64, 16).unwrap();
        assert!(matches!(
            weak_singularity_experiment(&d, 3.5, 1.0, WeakOptions::default()),
            Err(Error::Regime { .. })
        ));
    }
}
