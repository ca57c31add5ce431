use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use super::{EdgeMeasure, KernelParams, Piece};
use crate::error::{Error, Result};
use crate::quadrature::{dyadic_integral, integrate, DyadicOptions, DyadicOutcome, Tolerance, Toward};

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-10;

/// Adaptive integration of a fallible integrand; the first error wins.
fn try_integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, breaks: &[f64], rel: f64) -> Result<f64> {
    let mut err = None;
    let v = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        breaks,
        Tolerance {
            rel,
            abs: 0.0,
            max_panels: 8000,
        },
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Points c, c ± scale·4^i inside (lo, hi), resolving a layer of width `scale` at c.
fn layer_breaks(out: &mut Vec<f64>, c: f64, scale: f64, lo: f64, hi: f64) {
    if c > lo && c < hi {
        out.push(c);
    }
    if !(scale > 0.0) {
        return;
    }
    let span = hi - lo;
    let mut d = scale;
    while d < span {
        for p in [c - d, c + d] {
            if p > lo && p < hi {
                out.push(p);
            }
        }
        d *= 4.0;
    }
}

/// ∫ (1 + t²)^{-ν/2} dt over [l, h], accurate in both tails.
struct LineKernel {
    a: f64,
    half: f64,
}

impl LineKernel {
    fn new(nu: f64) -> Self {
        let a = 0.5 * (nu - 1.0);
        Self {
            a,
            half: 0.5 * ln_beta(a, 0.5).exp(),
        }
    }

    /// ∫_0^u for u ≥ 0.
    fn head(&self, u: f64) -> f64 {
        let x = u * u / (1.0 + u * u);
        self.half * beta_reg(0.5, self.a, x)
    }

    /// ∫_u^∞ for u ≥ 0.
    fn tail(&self, u: f64) -> f64 {
        let x = 1.0 / (1.0 + u * u);
        self.half * beta_reg(self.a, 0.5, x)
    }

    fn between(&self, l: f64, h: f64) -> f64 {
        if l >= 0.0 {
            if h <= 1.0 {
                self.head(h) - self.head(l)
            } else {
                self.tail(l) - self.tail(h)
            }
        } else if h <= 0.0 {
            self.between(-h, -l)
        } else {
            self.head(-l) + self.head(h)
        }
    }
}

/// Evaluates ∫ (t2 + |y − z|²)^{-ν/2} dμ(z) for a fixed measure.
struct Potential<'a> {
    mu: &'a EdgeMeasure,
    nu: f64,
    line: LineKernel,
}

impl<'a> Potential<'a> {
    fn new(mu: &'a EdgeMeasure, nu: f64) -> Self {
        Self {
            mu,
            nu,
            line: LineKernel::new(nu),
        }
    }

    fn eval(&self, t2: f64, y: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for a in &self.mu.atoms {
            let d2: f64 = a.at.iter().zip(y).map(|(z, y)| (y - z).powi(2)).sum();
            v += a.mass * (t2 + d2).powf(-0.5 * self.nu);
        }
        for p in &self.mu.pieces {
            v += p.mass / p.volume() * self.piece(p, t2, y)?;
        }
        Ok(v)
    }

    fn piece(&self, p: &Piece, t2: f64, y: &[f64]) -> Result<f64> {
        let mut t2 = t2;
        let mut active = Vec::new();
        for (i, (lo, hi)) in p.lo.iter().zip(&p.hi).enumerate() {
            if lo < hi {
                active.push((y[i], *lo, *hi));
            } else {
                t2 += (y[i] - lo).powi(2);
            }
        }
        self.box_integral(t2, &active)
    }

    fn box_integral(&self, t2: f64, axes: &[(f64, f64, f64)]) -> Result<f64> {
        let (y, lo, hi) = axes[0];
        if axes.len() == 1 {
            let t = t2.sqrt();
            return Ok(t.powf(1.0 - self.nu) * self.line.between((lo - y) / t, (hi - y) / t));
        }
        let mut breaks = Vec::new();
        layer_breaks(&mut breaks, y.clamp(lo, hi), t2.sqrt(), lo, hi);
        try_integrate(
            |z| self.box_integral(t2 + (y - z).powi(2), &axes[1..]),
            lo,
            hi,
            &breaks,
            INNER_TOL,
        )
    }

    /// Coordinates along axis `i` where the potential has structure.
    fn features(&self, i: usize) -> Vec<f64> {
        let mut f: Vec<f64> = self.mu.atoms.iter().map(|a| a.at[i]).collect();
        for p in &self.mu.pieces {
            f.push(p.lo[i]);
            f.push(p.hi[i]);
        }
        f
    }
}

/// Poisson potential |x′|^{κ_+} ∫ (|x′|² + |x″ − z|²)^{-ν/2} dμ(z) at a point
/// with transverse distance `radial` = |x′| and edge coordinate `along` = x″.
pub fn poisson_potential(params: &KernelParams, mu: &EdgeMeasure, radial: f64, along: &[f64]) -> Result<f64> {
    params.check_measure(mu)?;
    if !(radial > 0.0 && radial.is_finite()) || along.len() != params.m {
        return Err(Error::domain(
            "poisson_potential",
            "evaluation point must lie off the edge with coordinates in R^m",
        ));
    }
    let p = Potential::new(mu, params.nu);
    Ok(radial.powf(params.kappa) * p.eval(radial * radial, along)?)
}

/// ∫ |potential|^q over the ball of radius `radius`, integrating one axis at
/// a time with breakpoints resolving the layers of width `scale`.
fn ball_integral(pot: &Potential, q: f64, t2: f64, radius: f64, scale: f64, far: f64) -> Result<f64> {
    let m = pot.mu.m;
    let feats: Vec<Vec<f64>> = (0..m).map(|i| pot.features(i)).collect();
    let mut y = vec![0.0; m];
    ball_axis(pot, q, t2, &feats, scale, far, &mut y, 0, radius * radius)
}

#[allow(clippy::too_many_arguments)]
fn ball_axis(
    pot: &Potential,
    q: f64,
    t2: f64,
    feats: &[Vec<f64>],
    scale: f64,
    far: f64,
    y: &mut Vec<f64>,
    axis: usize,
    r2: f64,
) -> Result<f64> {
    let r = r2.max(0.0).sqrt();
    if r == 0.0 {
        return Ok(0.0);
    }
    let mut breaks = Vec::new();
    for &c in &feats[axis] {
        layer_breaks(&mut breaks, c, scale, -r, r);
    }
    // the far field decays algebraically: resolve it on a geometric ladder
    layer_breaks(&mut breaks, 0.0, far, -r, r);
    let mut buf = y.clone();
    if axis + 1 == y.len() {
        return try_integrate(
            |x| {
                buf[axis] = x;
                Ok(pot.eval(t2, &buf)?.abs().powf(q))
            },
            -r,
            r,
            &breaks,
            OUTER_TOL,
        );
    }
    // x = r sin φ removes the square-root edge of the slice radius
    let angles: Vec<f64> = breaks.iter().map(|b| (b / r).clamp(-1.0, 1.0).asin()).collect();
    try_integrate(
        |phi| {
            let (s, c) = phi.sin_cos();
            buf[axis] = r * s;
            Ok(r * c * ball_axis(pot, q, t2, feats, scale, far, &mut buf, axis + 1, (r * c).powi(2))?)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        &angles,
        OUTER_TOL,
    )
}

/// Windowed profile ∫_{B_R} |∫ (τ² + |y − z|²)^{-ν/2} dμ(z)|^q dy.
pub fn f_profile(params: &KernelParams, mu: &EdgeMeasure, tau: f64, radius: f64) -> Result<f64> {
    params.check_measure(mu)?;
    if !(tau > 0.0 && tau.is_finite() && radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain("f_profile", format!("need τ > 0 and R > 0, got τ = {tau}, R = {radius}")));
    }
    windowed(params, &Potential::new(mu, params.nu), tau, radius)
}

fn windowed(params: &KernelParams, pot: &Potential, tau: f64, radius: f64) -> Result<f64> {
    let far = pot.mu.support_radius().max(tau);
    ball_integral(pot, params.q, tau * tau, radius, tau, far)
}

/// Same profile over all of R^m; the window is chosen so the neglected far
/// field is below 1e-13 relative.
pub fn f_profile_full(params: &KernelParams, mu: &EdgeMeasure, tau: f64) -> Result<f64> {
    params.check_measure(mu)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain("f_profile_full", format!("need τ > 0, got {tau}")));
    }
    full(params, &Potential::new(mu, params.nu), tau)
}

fn full(params: &KernelParams, pot: &Potential, tau: f64) -> Result<f64> {
    let base = pot.mu.support_radius() + tau;
    let decay = params.nu * params.q - params.m as f64;
    let radius = base * 10f64.powf(13.0 / decay).max(4.0);
    ball_integral(pot, params.q, tau * tau, radius, tau, base)
}

/// Result of an integral toward a possibly singular endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IntegralOutcome {
    Convergent {
        value: f64,
        /// Geometric estimate of the remainder beyond the last dyadic panel.
        tail: f64,
        levels: usize,
        /// Fitted small-τ power of the integrand, when a stable rate was seen.
        exponent: Option<f64>,
    },
    Divergent {
        /// Fitted small-τ power of the integrand (≤ −1).
        exponent: f64,
        levels: usize,
        partial_sums: Vec<f64>,
    },
}

impl IntegralOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            IntegralOutcome::Convergent { value, .. } => Some(*value),
            IntegralOutcome::Divergent { .. } => None,
        }
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self, IntegralOutcome::Convergent { .. })
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            IntegralOutcome::Convergent { exponent, .. } => *exponent,
            IntegralOutcome::Divergent { exponent, .. } => Some(*exponent),
        }
    }
}

impl From<DyadicOutcome> for IntegralOutcome {
    fn from(d: DyadicOutcome) -> Self {
        match d {
            DyadicOutcome::Convergent {
                value,
                tail,
                levels,
                exponent,
            } => IntegralOutcome::Convergent {
                value,
                tail,
                levels,
                exponent,
            },
            DyadicOutcome::Divergent {
                exponent,
                partial_sums,
                levels,
            } => IntegralOutcome::Divergent {
                exponent,
                levels,
                partial_sums,
            },
        }
    }
}

fn dyadic_options() -> DyadicOptions {
    DyadicOptions {
        max_levels: 90,
        ..DyadicOptions::default()
    }
}

/// ∫_0^R F(τ) τ^{(s+ν−m)q−1} dτ, swept dyadically toward τ = 0.
pub fn admissibility_integral(params: &KernelParams, mu: &EdgeMeasure, radius: f64) -> Result<IntegralOutcome> {
    const OP: &str = "admissibility_integral";
    params.check_measure(mu)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(OP, format!("window radius {radius} must be positive")));
    }
    if mu.support_radius() > 0.5 * radius {
        return Err(Error::precondition(
            OP,
            format!("support radius {} exceeds R/2 = {}", mu.support_radius(), 0.5 * radius),
        ));
    }
    let pot = Potential::new(mu, params.nu);
    let w = params.weight_exponent();
    let out = dyadic_integral(|t| Ok(windowed(params, &pot, t, radius)? * t.powf(w)), radius, Toward::Zero, dyadic_options())?;
    Ok(out.into())
}

/// Weight of the lifted functional: e^{-τ} τ^{(σ+1)q−1} for j = 1 and
/// τ^{(σ+1)q+j−2} (1 + τ)^{-(σ+1)q} for j ≥ 2.
pub fn lift_weight(sigma: f64, j: usize, q: f64, tau: f64) -> f64 {
    let p = (sigma + 1.0) * q;
    if j == 1 {
        (-tau).exp() * tau.powf(p - 1.0)
    } else {
        tau.powf(p + j as f64 - 2.0) / (1.0 + tau).powf(p)
    }
}

/// ∫_0^∞ F(τ) h_{σ,j}(τ) dτ with F taken over all of R^m.
pub fn lifted_integral(params: &KernelParams, mu: &EdgeMeasure, sigma: f64, j: usize) -> Result<IntegralOutcome> {
    const OP: &str = "lifted_integral";
    params.check_measure(mu)?;
    if !(sigma > 0.0) || j == 0 {
        return Err(Error::domain(OP, format!("need σ > 0 and j ≥ 1, got σ = {sigma}, j = {j}")));
    }
    let pot = Potential::new(mu, params.nu);
    let mut g = |t: f64| Ok(full(params, &pot, t)? * lift_weight(sigma, j, params.q, t));
    let near: IntegralOutcome = dyadic_integral(&mut g, 1.0, Toward::Zero, dyadic_options())?.into();
    let far: IntegralOutcome = dyadic_integral(&mut g, 1.0, Toward::Infinity, dyadic_options())?.into();
    Ok(match (near, far) {
        (
            IntegralOutcome::Convergent {
                value: a,
                tail: ta,
                levels: la,
                exponent,
            },
            IntegralOutcome::Convergent {
                value: b,
                tail: tb,
                levels: lb,
                ..
            },
        ) => IntegralOutcome::Convergent {
            value: a + b,
            tail: ta + tb,
            levels: la + lb,
            exponent,
        },
        (d @ IntegralOutcome::Divergent { .. }, _) => d,
        (_, IntegralOutcome::Divergent { levels, .. }) => {
            return Err(Error::Scheme {
                op: OP,
                msg: format!("integrand failed to decay at infinity after {levels} levels"),
            })
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub label: String,
    /// Admissibility functional at window R.
    pub admissibility: f64,
    /// Admissibility functional at window 2R.
    pub admissibility_doubled: f64,
    /// Lifted functional with σ = s + (j − 1)/q′.
    pub lifted: f64,
    pub ratio: f64,
    pub ratio_doubled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub q: f64,
    pub s: f64,
    pub sigma: f64,
    pub j: usize,
    pub radius: f64,
    pub rows: Vec<EquivalenceRow>,
    /// max ratio / min ratio over the family at window R.
    pub band_width: f64,
    /// (s + ν − m) q + 1.
    pub envelope_exponent: f64,
    /// Largest ratio growth under R → 2R.
    pub max_doubling_growth: f64,
    /// 2^{envelope_exponent}.
    pub envelope_factor: f64,
    pub within_band: bool,
    pub within_envelope: bool,
}

pub const EQUIVALENCE_BAND: f64 = 50.0;

/// Compares the admissibility functional with the lifted functional over a
/// family of atom-free measures in the capacity band 0 < s < m/q′.
pub fn equivalence_experiment(params: &KernelParams, family: &[(String, EdgeMeasure)], radius: f64) -> Result<EquivalenceReport> {
    const OP: &str = "equivalence_experiment";
    let band_top = params.m as f64 / params.q_prime();
    if !(params.s > 0.0 && params.s < band_top) {
        return Err(Error::Regime {
            op: OP,
            msg: format!("need 0 < s < m/q′ = {band_top:.6}, got s = {:.6} at q = {}", params.s, params.q),
        });
    }
    if params.nu - (params.m as f64) < 1.0 {
        return Err(Error::Regime {
            op: OP,
            msg: format!("need ν − m ≥ 1, got {}", params.nu - params.m as f64),
        });
    }
    if family.is_empty() {
        return Err(Error::domain(OP, "empty measure family"));
    }
    let j = params.lift_order();
    let sigma = params.lift_smoothness();
    let mut rows = Vec::with_capacity(family.len());
    for (label, mu) in family {
        if !mu.atoms.is_empty() {
            return Err(Error::precondition(
                OP,
                format!("{label}: atoms lie outside the space in this band; mollify them first"),
            ));
        }
        let m_at = |r: f64| -> Result<f64> {
            admissibility_integral(params, mu, r)?.value().ok_or_else(|| Error::Scheme {
                op: OP,
                msg: format!("{label}: admissibility functional diverges for an atom-free measure at R = {r}"),
            })
        };
        let a = m_at(radius)?;
        let a2 = m_at(2.0 * radius)?;
        let lifted = lifted_integral(params, mu, sigma, j)?.value().ok_or_else(|| Error::Scheme {
            op: OP,
            msg: format!("{label}: lifted functional diverges"),
        })?;
        rows.push(EquivalenceRow {
            label: label.clone(),
            admissibility: a,
            admissibility_doubled: a2,
            lifted,
            ratio: a / lifted,
            ratio_doubled: a2 / lifted,
        });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r.ratio), h.max(r.ratio)));
    let band_width = hi / lo;
    let envelope_exponent = (params.s + params.nu - params.m as f64) * params.q + 1.0;
    let envelope_factor = 2f64.powf(envelope_exponent);
    let hi2 = rows.iter().map(|r| r.ratio_doubled).fold(0.0f64, f64::max);
    let max_doubling_growth = hi2 / hi;
    Ok(EquivalenceReport {
        q: params.q,
        s: params.s,
        sigma,
        j,
        radius,
        rows,
        band_width,
        envelope_exponent,
        max_doubling_growth,
        envelope_factor,
        within_band: band_width <= EQUIVALENCE_BAND,
        within_envelope: max_doubling_growth <= 1.1 * envelope_factor,
    })
}

/// δ₀, a δ-pair at distance 0.1 (each mollified to every width in `widths`),
/// and the uniform measure on [0, 0.5], all of unit mass on the line.
pub fn mollified_family(widths: &[f64]) -> Vec<(String, EdgeMeasure)> {
    let dirac = EdgeMeasure::dirac(1);
    let pair = EdgeMeasure {
        m: 1,
        atoms: vec![
            super::Atom { at: vec![-0.05], mass: 0.5 },
            super::Atom { at: vec![0.05], mass: 0.5 },
        ],
        pieces: Vec::new(),
    };
    let mut out = Vec::new();
    for &w in widths {
        out.push((format!("dirac(w={w})"), dirac.mollified(w)));
        out.push((format!("pair(w={w})"), pair.mollified(w)));
    }
    out.push(("uniform[0,0.5]".to_string(), EdgeMeasure::uniform(vec![0.0], vec![0.5], 1.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_edge(q: f64) -> KernelParams {
        KernelParams::new(3, 2, 2.0, q).unwrap()
    }

    #[test]
    fn line_kernel_closed_form_nu5() {
        // ∫_0^u (1+t²)^{-5/2} = u(2u² + 3) / (3(1+u²)^{3/2})
        let k = LineKernel::new(5.0);
        for u in [1e-3f64, 0.3, 1.0, 2.5, 7.0] {
            let exact = u * (2.0 * u * u + 3.0) / (3.0 * (1.0 + u * u).powf(1.5));
            assert!((k.between(0.0, u) - exact).abs() < 1e-14, "{u}");
            assert!((k.between(-u, 0.0) - exact).abs() < 1e-14);
        }
        assert!((k.between(-1.0, 1.0) - 2.0 * k.between(0.0, 1.0)).abs() < 1e-15);
        // far tail keeps relative accuracy
        let t = k.between(1e4, 2e4);
        let approx = (1e4f64.powi(-4) - 2e4f64.powi(-4)) / 4.0;
        assert!((t / approx - 1.0).abs() < 1e-6);
    }

    #[test]
    fn segment_potential_matches_quadrature() {
        let mu = EdgeMeasure::uniform(vec![-0.2], vec![0.3], 2.0);
        let pot = Potential::new(&mu, 5.0);
        for (t, y) in [(0.1, 0.0), (0.05, 0.3), (1.0, 2.0)] {
            let direct = integrate(
                |z| 4.0 * (t * t + (y - z) * (y - z)).powf(-2.5),
                -0.2,
                0.3,
                &[y],
                Tolerance::rel(1e-13),
            )
            .unwrap();
            let v = pot.eval(t * t, &[y]).unwrap();
            assert!((v / direct - 1.0).abs() < 1e-11, "{v} {direct}");
        }
    }

    #[test]
    fn square_potential_matches_product_quadrature() {
        let mu = EdgeMeasure::uniform(vec![0.0, 0.0], vec![0.2, 0.1], 1.0);
        let pot = Potential::new(&mu, 3.5);
        let (t, y) = (0.07, [0.05, 0.3]);
        let direct = integrate(
            |z1| {
                integrate(
                    |z2| (t * t + (y[0] - z1).powi(2) + (y[1] - z2).powi(2)).powf(-1.75),
                    0.0,
                    0.1,
                    &[],
                    Tolerance::rel(1e-13),
                )
                .unwrap()
            },
            0.0,
            0.2,
            &[y[0]],
            Tolerance::rel(1e-13),
        )
        .unwrap()
            / 0.02;
        let v = pot.eval(t * t, &y).unwrap();
        assert!((v / direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dirac_potential_examples() {
        let p = cube_edge(1.8);
        let d = EdgeMeasure::dirac(1);
        assert!((poisson_potential(&p, &d, 1.0, &[0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(poisson_potential(&p, &d, 0.0, &[0.0]).is_err());
        assert!(poisson_potential(&p, &d, 1.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn dirac_profile_has_closed_form_on_the_line() {
        // F = τ^{1−νq} ∫_{-R/τ}^{R/τ} (1+η²)^{-νq/2} dη
        let p = cube_edge(1.6);
        let (tau, r) = (0.01, 1.0);
        let f = f_profile(&p, &EdgeMeasure::dirac(1), tau, r).unwrap();
        let nq = p.nu * p.q;
        let exact = tau.powf(1.0 - nq) * 2.0 * LineKernel::new(nq).between(0.0, r / tau);
        assert!((f / exact - 1.0).abs() < 1e-9, "{f} {exact}");
    }

    #[test]
    fn lift_weight_at_one() {
        assert!((lift_weight(0.7, 1, 1.8, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let v = lift_weight(0.7, 3, 1.8, 1.0);
        assert!((v - 2f64.powf(-1.7 * 1.8)).abs() < 1e-15);
    }

    #[test]
    fn support_must_fit_the_window() {
        let p = cube_edge(1.5);
        let mu = EdgeMeasure::atom(vec![0.6], 1.0);
        assert!(matches!(
            admissibility_integral(&p, &mu, 1.0),
            Err(Error::Precondition { .. })
        ));
    }
}
