//! Positive solutions of the nonlinear spherical problem
//! `-Δ'ω − λ_{N,q} ω + ω^q = 0` on an arc or cap with zero boundary values,
//! the angular profile of the strongly singular solution `r^{-2/(q-1)} ω(σ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::lambda_nq;
use crate::linalg::{norm2, norm_inf, Tridiagonal};
use crate::profile::RadialProfile;
use crate::spectral::{inverse_iteration, EndCondition, Opening, SlDiscretization, SturmLiouvilleProblem};

const OP: &str = "solve_omega";
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 100;
const MAX_BACKTRACKS: usize = 30;
const MAX_RESTARTS: usize = 20;
/// |λ_S − λ_{N,q}| below this is the degenerate boundary case (arcs).
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearProfileProblem {
    #[serde(rename = "N")]
    pub n: usize,
    pub q: f64,
    pub opening: Opening,
    pub mesh: usize,
}

impl NonlinearProfileProblem {
    pub fn new(n: usize, q: f64, opening: Opening, mesh: usize) -> Self {
        Self { n, q, opening, mesh }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(Error::domain(OP, format!("q = {} must exceed 1", self.q)));
        }
        if self.mesh < 16 {
            return Err(Error::domain(OP, "mesh must have at least 16 cells"));
        }
        self.opening.validate()?;
        match &self.opening {
            Opening::Arc { .. } if self.n != 2 => {
                Err(Error::domain(OP, "arc openings live on S¹, so N must be 2"))
            }
            Opening::Cap { dim, .. } if *dim != self.n - 1 => Err(Error::domain(
                OP,
                format!("cap on S^{dim} does not match N = {}", self.n),
            )),
            Opening::BoxProduct { .. } => Err(Error::domain(
                OP,
                "only arc and cap openings reduce to one-dimensional profile problems",
            )),
            _ => Ok(()),
        }
    }

    fn sl_problem(&self) -> SturmLiouvilleProblem {
        match &self.opening {
            Opening::Arc { alpha } => SturmLiouvilleProblem {
                weight_exponent: 0.0,
                centrifugal: 0.0,
                lower: 0.0,
                upper: *alpha,
                lower_bc: EndCondition::Dirichlet,
                upper_bc: EndCondition::Dirichlet,
            },
            Opening::Cap { dim, half_angle } => SturmLiouvilleProblem {
                weight_exponent: (*dim - 1) as f64,
                centrifugal: 0.0,
                lower: 0.0,
                upper: *half_angle,
                lower_bc: EndCondition::Regular,
                upper_bc: EndCondition::Dirichlet,
            },
            Opening::BoxProduct { .. } => unreachable!("rejected by validate"),
        }
    }

    /// Upper bound λ_{N,q}^{1/(q−1)} from the maximum principle.
    pub fn amplitude_bound(&self) -> Result<f64> {
        let l = lambda_nq(self.n, self.q)?;
        Ok(l.max(0.0).powf(1.0 / (self.q - 1.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSolution {
    pub problem: NonlinearProfileProblem,
    pub profile: RadialProfile,
    pub lambda_s: f64,
    pub lambda_nq: f64,
    /// Sup-norm of the finite-volume residual (per control volume).
    pub residual: f64,
    pub iterations: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceCertificate {
    pub lambda_s: f64,
    pub lambda_nq: f64,
    /// λ_S and λ_{N,q} agree to within 1e-12.
    pub boundary_case: bool,
    /// Damped Newton from a positive start decayed toward zero.
    pub decay_verified: bool,
    pub initial_amplitude: f64,
    pub final_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileOutcome {
    Profile(OmegaSolution),
    Nonexistence(NonexistenceCertificate),
}

impl ProfileOutcome {
    pub fn solution(&self) -> Option<&OmegaSolution> {
        match self {
            ProfileOutcome::Profile(s) => Some(s),
            ProfileOutcome::Nonexistence(_) => None,
        }
    }

    pub fn into_solution(self) -> Option<OmegaSolution> {
        match self {
            ProfileOutcome::Profile(s) => Some(s),
            ProfileOutcome::Nonexistence(_) => None,
        }
    }

    pub fn is_nonexistence(&self) -> bool {
        matches!(self, ProfileOutcome::Nonexistence(_))
    }
}

fn pow_signed(x: f64, q: f64) -> f64 {
    x.abs().powf(q - 1.0) * x
}

struct System<'a> {
    disc: &'a SlDiscretization,
    lambda: f64,
    q: f64,
}

impl System<'_> {
    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let kw = self.disc.stiffness.mul_vec(w);
        kw.iter()
            .zip(w)
            .zip(&self.disc.mass)
            .map(|((k, x), m)| k - self.lambda * m * x + m * pow_signed(*x, self.q))
            .collect()
    }

    fn jacobian(&self, w: &[f64]) -> Tridiagonal {
        let mut j = self.disc.stiffness.clone();
        for (i, x) in w.iter().enumerate() {
            let m = self.disc.mass[i];
            j.diag[i] += m * (-self.lambda + self.q * x.abs().powf(self.q - 1.0));
        }
        j
    }
}

struct NewtonRun {
    w: Vec<f64>,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
}

enum NewtonFailure {
    SignChange,
    Stalled(NewtonRun),
    Error(Error),
}

/// Damped Newton with Armijo backtracking on ‖F‖₂.
fn newton(sys: &System, start: Vec<f64>, require_positive: bool) -> std::result::Result<NewtonRun, NewtonFailure> {
    let mut w = start;
    let mut f = sys.residual(&w);
    let mut fnorm = norm2(&f);
    let mut history = vec![norm_inf(&f)];
    let mut stagnant = 0;
    for it in 0..MAX_NEWTON {
        let sup = norm_inf(&f);
        if sup < RESIDUAL_TOL {
            return Ok(NewtonRun {
                w,
                residual: sup,
                iterations: it,
                history,
            });
        }
        let j = sys.jacobian(&w);
        let step = j.solve(&f).map_err(NewtonFailure::Error)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(x, d)| x - t * d).collect();
            let ft = sys.residual(&trial);
            let n = norm2(&ft);
            if n <= (1.0 - 1e-4 * t) * fnorm || n == 0.0 {
                accepted = Some((trial, ft, n));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, ft, n)) = accepted else {
            // no descent left: roundoff floor or genuine stall
            let sup = norm_inf(&f);
            let run = NewtonRun {
                w,
                residual: sup,
                iterations: it,
                history,
            };
            return Err(NewtonFailure::Stalled(run));
        };
        if require_positive && trial.iter().any(|x| *x < 0.0) {
            return Err(NewtonFailure::SignChange);
        }
        stagnant = if n > 0.5 * fnorm { stagnant + 1 } else { 0 };
        w = trial;
        f = ft;
        fnorm = n;
        history.push(norm_inf(&f));
        if stagnant > 10 && norm_inf(&f) < 1e-8 * (1.0 + norm_inf(&w)) {
            let sup = norm_inf(&f);
            return Err(NewtonFailure::Stalled(NewtonRun {
                w,
                residual: sup,
                iterations: it + 1,
                history,
            }));
        }
    }
    let sup = norm_inf(&f);
    Err(NewtonFailure::Stalled(NewtonRun {
        w,
        residual: sup,
        iterations: MAX_NEWTON,
        history,
    }))
}

/// Continuous first eigenvalue of the opening and the tolerance within which
/// it counts as equal to λ_{N,q}: closed form on arcs; on caps the two-grid
/// Richardson value, with its two-grid error estimate as tolerance.
fn lambda_s_of(prob: &NonlinearProfileProblem, disc_lambda: f64) -> Result<(f64, f64)> {
    match &prob.opening {
        Opening::Arc { alpha } => Ok(((PI / alpha).powi(2), BOUNDARY_TOL)),
        _ => {
            let coarse = SlDiscretization::build(&prob.sl_problem(), prob.mesh / 2);
            let lc = inverse_iteration(&coarse)?.lambda;
            let est = (disc_lambda - lc).abs() / 3.0;
            Ok((disc_lambda + (disc_lambda - lc) / 3.0, est.max(BOUNDARY_TOL)))
        }
    }
}

/// Amplitude of the small-solution branch bifurcating from εφ.
fn bifurcation_scale(disc: &SlDiscretization, phi: &[f64], lambda_gap: f64, q: f64) -> f64 {
    let num: f64 = phi.iter().zip(&disc.mass).map(|(p, m)| m * p * p).sum();
    let den: f64 = phi.iter().zip(&disc.mass).map(|(p, m)| m * p.abs().powf(q + 1.0)).sum();
    (lambda_gap.max(0.0) * num / den).powf(1.0 / (q - 1.0))
}

struct Prepared {
    disc: SlDiscretization,
    phi: Vec<f64>,
    lambda_h: f64,
    lambda_s: f64,
    boundary_tol: f64,
    lambda_nq: f64,
}

fn prepare(prob: &NonlinearProfileProblem) -> Result<Prepared> {
    prob.validate()?;
    let lambda_nq = lambda_nq(prob.n, prob.q)?;
    let disc = SlDiscretization::build(&prob.sl_problem(), prob.mesh);
    let raw = inverse_iteration(&disc)?;
    let peak = norm_inf(&raw.free_vector);
    let phi: Vec<f64> = raw.free_vector.iter().map(|v| v / peak).collect();
    let (lambda_s, boundary_tol) = lambda_s_of(prob, raw.lambda)?;
    Ok(Prepared {
        lambda_s,
        boundary_tol,
        lambda_h: raw.lambda,
        disc,
        phi,
        lambda_nq,
    })
}

fn finish(prob: &NonlinearProfileProblem, p: &Prepared, run: NewtonRun, restarts: usize) -> OmegaSolution {
    let values = p.disc.embed(&run.w);
    OmegaSolution {
        problem: prob.clone(),
        profile: RadialProfile::new(p.disc.nodes.clone(), values),
        lambda_s: p.lambda_s,
        lambda_nq: p.lambda_nq,
        residual: run.residual,
        iterations: run.iterations,
        restarts,
    }
}

fn accept_stalled(run: &NewtonRun) -> bool {
    // roundoff floor: the residual is at the level of the operator's rounding error
    run.residual < 1e-8 * (1.0 + norm_inf(&run.w))
}

fn run_from(sys: &System, start: Vec<f64>, require_positive: bool) -> Result<std::result::Result<NewtonRun, bool>> {
    match newton(sys, start, require_positive) {
        Ok(run) => Ok(Ok(run)),
        Err(NewtonFailure::SignChange) => Ok(Err(true)),
        Err(NewtonFailure::Stalled(run)) if accept_stalled(&run) => Ok(Ok(run)),
        Err(NewtonFailure::Stalled(run)) => Err(Error::NoConvergence {
            op: OP,
            iterations: run.iterations,
            residual: run.residual,
            trace: run.history,
        }),
        Err(NewtonFailure::Error(e)) => Err(e),
    }
}

fn nonexistence(p: &Prepared, q: f64) -> Result<NonexistenceCertificate> {
    let sys = System {
        disc: &p.disc,
        lambda: p.lambda_nq,
        q,
    };
    let initial = 1.0;
    let start: Vec<f64> = p.phi.iter().map(|v| initial * v).collect();
    let final_amplitude = match newton(&sys, start, false) {
        Ok(run) => norm_inf(&run.w),
        Err(NewtonFailure::Stalled(run)) => norm_inf(&run.w),
        Err(NewtonFailure::SignChange) => unreachable!(),
        Err(NewtonFailure::Error(e)) => return Err(e),
    };
    Ok(NonexistenceCertificate {
        lambda_s: p.lambda_s,
        lambda_nq: p.lambda_nq,
        boundary_case: (p.lambda_s - p.lambda_nq).abs() <= p.boundary_tol,
        decay_verified: final_amplitude < 0.05 * initial,
        initial_amplitude: initial,
        final_amplitude,
    })
}

/// Solves for ω_S, or certifies that no positive solution exists (λ_S ≥ λ_{N,q}).
pub fn solve_omega(prob: &NonlinearProfileProblem) -> Result<ProfileOutcome> {
    let p = prepare(prob)?;
    if p.lambda_s >= p.lambda_nq - p.boundary_tol {
        return Ok(ProfileOutcome::Nonexistence(nonexistence(&p, prob.q)?));
    }
    if p.lambda_h >= p.lambda_nq {
        return Err(Error::Scheme {
            op: OP,
            msg: format!(
                "discrete eigenvalue {} is not below λ_Nq = {}; refine the mesh",
                p.lambda_h, p.lambda_nq
            ),
        });
    }
    let sys = System {
        disc: &p.disc,
        lambda: p.lambda_nq,
        q: prob.q,
    };
    let mut eps = bifurcation_scale(&p.disc, &p.phi, p.lambda_nq - p.lambda_h, prob.q);
    for restart in 0..=MAX_RESTARTS {
        let start: Vec<f64> = p.phi.iter().map(|v| eps * v).collect();
        match run_from(&sys, start, true)? {
            Ok(run) => return Ok(ProfileOutcome::Profile(finish(prob, &p, run, restart))),
            Err(_) => eps *= 0.5,
        }
    }
    Err(Error::NoConvergence {
        op: OP,
        iterations: MAX_RESTARTS,
        residual: f64::NAN,
        trace: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Largest pointwise difference between any two of the three solutions.
    pub max_difference: f64,
    pub solutions: Vec<OmegaSolution>,
}

/// Newton from three different positive starts: the bifurcation start εφ_S,
/// the constant supersolution λ_{N,q}^{1/(q−1)}, and a perturbed profile.
pub fn uniqueness_probe(prob: &NonlinearProfileProblem) -> Result<UniquenessReport> {
    let first = match solve_omega(prob)? {
        ProfileOutcome::Profile(s) => s,
        ProfileOutcome::Nonexistence(_) => {
            return Err(Error::precondition("uniqueness_probe", "no positive solution exists"))
        }
    };
    let p = prepare(prob)?;
    let sys = System {
        disc: &p.disc,
        lambda: p.lambda_nq,
        q: prob.q,
    };
    let top = prob.amplitude_bound()?;
    let free = &first.profile.values[p.disc.first..=p.disc.last];
    let nodes = &p.disc.nodes[p.disc.first..=p.disc.last];
    let (a, b) = (p.disc.nodes[0], *p.disc.nodes.last().unwrap());
    let starts: Vec<Vec<f64>> = vec![
        vec![top; free.len()],
        free.iter()
            .zip(nodes)
            .map(|(w, t)| w * (1.0 + 0.3 * (3.0 * PI * (t - a) / (b - a)).sin()))
            .collect(),
    ];
    let mut solutions = vec![first];
    for start in starts {
        let mut s = start;
        let mut found = None;
        for restart in 0..=MAX_RESTARTS {
            match run_from(&sys, s.clone(), true)? {
                Ok(run) => {
                    found = Some(finish(prob, &p, run, restart));
                    break;
                }
                Err(_) => s.iter_mut().for_each(|v| *v *= 0.5),
            }
        }
        solutions.push(found.ok_or_else(|| Error::NoConvergence {
            op: "uniqueness_probe",
            iterations: MAX_RESTARTS,
            residual: f64::NAN,
            trace: Vec::new(),
        })?);
    }
    let mut max_difference: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            for (x, y) in solutions[i].profile.values.iter().zip(&solutions[j].profile.values) {
                max_difference = max_difference.max((x - y).abs());
            }
        }
    }
    Ok(UniquenessReport {
        max_difference,
        solutions,
    })
}

/// Strong-form residual of the profile interpolated (cubic) onto the twice
/// finer grid, sup over that grid's free nodes.
pub fn refined_residual(sol: &OmegaSolution) -> Result<f64> {
    let prob = &sol.problem;
    let disc = SlDiscretization::build(&prob.sl_problem(), 2 * prob.mesh);
    let w: Vec<f64> = disc.nodes[disc.first..=disc.last]
        .iter()
        .map(|t| sol.profile.interpolate(*t))
        .collect();
    let sys = System {
        disc: &disc,
        lambda: sol.lambda_nq,
        q: prob.q,
    };
    let r = sys.residual(&w);
    Ok(r.iter().zip(&disc.mass).map(|(ri, m)| (ri / m).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    /// Largest value of ω_{S1} − ω_{S2} on the common nodes (≤ 0 when ordered).
    pub max_excess: f64,
    pub max_abs_difference: f64,
    pub tolerance: f64,
}

/// Checks ω_{S1} ≤ ω_{S2} for nested openings S1 ⊂ S2, comparing on the nodes
/// of the first solution with the second interpolated onto them.
pub fn profile_monotonicity_check(p1: &OmegaSolution, p2: &OmegaSolution) -> Result<MonotonicityReport> {
    const OP: &str = "profile_monotonicity_check";
    let (a, b) = (&p1.problem, &p2.problem);
    if a.n != b.n || a.q != b.q {
        return Err(Error::precondition(OP, "profiles must share N and q"));
    }
    match b.opening.contains(&a.opening) {
        Some(true) => {}
        Some(false) => {
            return Err(Error::precondition(OP, "first opening is not contained in the second"))
        }
        None => return Err(Error::precondition(OP, "openings are of different kinds")),
    }
    let (h1, h2) = (p1.profile.mesh_size, p2.profile.mesh_size);
    let ratio = h1.max(h2) / h1.min(h2);
    if ratio > 4.0 + 1e-12 {
        return Err(Error::MeshIncompatible {
            op: OP,
            msg: format!("mesh sizes {h1:e} and {h2:e} differ by more than two halvings"),
        });
    }
    let scale = p2.profile.max().max(p1.profile.max());
    let same = a.opening == b.opening && a.mesh == b.mesh;
    let tolerance = if same {
        1e-10
    } else {
        10.0 * (h1 * h1 + h2 * h2) * scale
    };
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_abs_difference: f64 = 0.0;
    for (t, v) in p1.profile.nodes.iter().zip(&p1.profile.values) {
        let other = if same {
            // identical grids: compare node values directly
            p2.profile.values[p1.profile.nodes.iter().position(|x| x == t).unwrap()]
        } else {
            p2.profile.interpolate(*t)
        };
        max_excess = max_excess.max(v - other);
        max_abs_difference = max_abs_difference.max((v - other).abs());
    }
    Ok(MonotonicityReport {
        holds: max_excess <= tolerance,
        max_excess,
        max_abs_difference,
        tolerance,
    })
}
