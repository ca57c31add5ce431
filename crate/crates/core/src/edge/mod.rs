//! Measures on the edge of a dihedron: Poisson potentials, the windowed
//! admissibility functional, the lifted (Besov-proxy) functional, and the
//! good-measure and removability classifiers for polyhedral strata.

mod classify;
mod functionals;

pub use classify::*;
pub use functionals::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{conjugate, ExponentTable};

/// Point mass on the edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: Vec<f64>,
    pub mass: f64,
}

/// Uniform measure of total mass `mass` on the axis-aligned box `[lo, hi]`.
/// Axes with `lo == hi` are degenerate, so the piece has dimension equal to
/// the number of axes with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub mass: f64,
}

impl Piece {
    pub fn dim(&self) -> usize {
        self.lo.iter().zip(&self.hi).filter(|(a, b)| a < b).count()
    }

    /// d-dimensional volume of the box.
    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .filter(|(a, b)| a < b)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Uniform piece of width `w` centred on an atom along every axis.
    pub fn mollified(atom: &Atom, w: f64) -> Self {
        Self {
            lo: atom.at.iter().map(|x| x - 0.5 * w).collect(),
            hi: atom.at.iter().map(|x| x + 0.5 * w).collect(),
            mass: atom.mass,
        }
    }
}

/// Finite positive measure on R^m made of atoms and uniform boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMeasure {
    pub m: usize,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

impl EdgeMeasure {
    pub fn dirac(m: usize) -> Self {
        Self::atom(vec![0.0; m], 1.0)
    }

    pub fn atom(at: Vec<f64>, mass: f64) -> Self {
        Self {
            m: at.len(),
            atoms: vec![Atom { at, mass }],
            pieces: Vec::new(),
        }
    }

    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, mass: f64) -> Self {
        Self {
            m: lo.len(),
            atoms: Vec::new(),
            pieces: vec![Piece { lo, hi, mass }],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>() + self.pieces.iter().map(|p| p.mass).sum::<f64>()
    }

    /// Radius of the smallest origin-centred ball containing the support.
    pub fn support_radius(&self) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let atoms = self.atoms.iter().map(|a| norm(&a.at));
        let pieces = self.pieces.iter().map(|p| {
            let far: Vec<f64> = p.lo.iter().zip(&p.hi).map(|(a, b)| a.abs().max(b.abs())).collect();
            norm(&far)
        });
        atoms.chain(pieces).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.atoms.iter_mut().for_each(|a| a.mass *= c);
        out.pieces.iter_mut().for_each(|p| p.mass *= c);
        out
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        let add = |v: &mut Vec<f64>| v.iter_mut().zip(shift).for_each(|(x, s)| *x += s);
        out.atoms.iter_mut().for_each(|a| add(&mut a.at));
        out.pieces.iter_mut().for_each(|p| {
            add(&mut p.lo);
            add(&mut p.hi);
        });
        out
    }

    /// Pushforward under z ↦ t z.
    pub fn dilated(&self, t: f64) -> Self {
        let mut out = self.clone();
        let mul = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x *= t);
        out.atoms.iter_mut().for_each(|a| mul(&mut a.at));
        out.pieces.iter_mut().for_each(|p| {
            mul(&mut p.lo);
            mul(&mut p.hi);
        });
        out
    }

    /// Replaces every atom by a uniform box of width `w` with the same mass.
    pub fn mollified(&self, w: f64) -> Self {
        let mut out = Self {
            m: self.m,
            atoms: Vec::new(),
            pieces: self.pieces.clone(),
        };
        out.pieces.extend(self.atoms.iter().map(|a| Piece::mollified(a, w)));
        out
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "EdgeMeasure";
        if self.m == 0 {
            return Err(Error::domain(OP, "edge dimension must be at least 1"));
        }
        if self.atoms.is_empty() && self.pieces.is_empty() {
            return Err(Error::domain(OP, "measure has no atoms or pieces"));
        }
        for a in &self.atoms {
            if a.at.len() != self.m {
                return Err(Error::domain(OP, format!("atom location {:?} is not in R^{}", a.at, self.m)));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) || a.at.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain(OP, format!("atom {a:?} needs finite location and positive mass")));
            }
        }
        for p in &self.pieces {
            if p.lo.len() != self.m || p.hi.len() != self.m {
                return Err(Error::domain(OP, format!("piece corners are not in R^{}", self.m)));
            }
            if p.lo.iter().zip(&p.hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
                return Err(Error::domain(OP, format!("piece needs finite corners with lo <= hi: {p:?}")));
            }
            if p.dim() == 0 {
                return Err(Error::domain(OP, "zero-dimensional piece; use an atom"));
            }
            if !(p.mass > 0.0 && p.mass.is_finite()) {
                return Err(Error::domain(OP, format!("piece mass {} must be positive", p.mass)));
            }
        }
        Ok(())
    }
}

/// Exponents entering the edge functionals of a k-dihedron in R^N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    /// Decay exponent N − 2 + 2κ_+ of the edge kernel.
    pub nu: f64,
    /// Edge dimension N − k.
    pub m: usize,
    pub s: f64,
    pub q: f64,
}

impl KernelParams {
    pub fn new(n: usize, k: usize, kappa: f64, q: f64) -> Result<Self> {
        let p = Self {
            n,
            k,
            kappa,
            nu: n as f64 - 2.0 + 2.0 * kappa,
            m: n.saturating_sub(k),
            s: 2.0 - (k as f64 + kappa) / conjugate(q),
            q,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_table(table: &ExponentTable, q: f64) -> Result<Self> {
        Self::new(table.n, table.k, table.kappa_plus, q)
    }

    /// Same stratum, different exponent.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.kappa, q)
    }

    pub fn q_prime(&self) -> f64 {
        conjugate(self.q)
    }

    /// Power of τ in the admissibility weight, (s + ν − m) q − 1.
    pub fn weight_exponent(&self) -> f64 {
        (self.s + self.nu - self.m as f64) * self.q - 1.0
    }

    /// Integer j = ⌈ν⌉ − m of the lifted functional.
    pub fn lift_order(&self) -> usize {
        (self.nu.ceil() as usize).saturating_sub(self.m).max(1)
    }

    /// σ = s + (j − 1)/q′.
    pub fn lift_smoothness(&self) -> f64 {
        self.s + (self.lift_order() as f64 - 1.0) / self.q_prime()
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "KernelParams";
        if self.k < 1 || self.k >= self.n {
            return Err(Error::domain(OP, format!("need 1 <= k < N for an edge, got N = {}, k = {}", self.n, self.k)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::domain(OP, format!("κ_+ = {} must be positive", self.kappa)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::domain(OP, format!("q = {} must exceed 1", self.q)));
        }
        if !(self.nu > self.m as f64) {
            return Err(Error::domain(OP, format!("ν = {} must exceed the edge dimension {}", self.nu, self.m)));
        }
        Ok(())
    }

    fn check_measure(&self, mu: &EdgeMeasure) -> Result<()> {
        mu.validate()?;
        if mu.m != self.m {
            return Err(Error::domain(
                "edge functional",
                format!("measure lives on R^{} but the edge is R^{}", mu.m, self.m),
            ));
        }
        Ok(())
    }
}
