//! Critical-exponent ladder of a boundary stratum (face, edge, vertex, or a
//! general k-dihedron) derived from the first eigenvalue of its cross-section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{cross_section_eigen, Opening, DEFAULT_MESH};

/// How the cross-section eigenvalue of a stratum is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumSource {
    /// Codimension one: the stratum is flat, γ = 0.
    Flat,
    Opening(Opening),
    DirectGamma(f64),
    DirectLambdaA(f64),
}

/// A k-dihedron in R^N: an (N−k)-dimensional edge with cross-section on S^{k−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub source: StratumSource,
}

impl StratumSpec {
    pub fn new(n: usize, k: usize, source: StratumSource) -> Self {
        Self { n, k, source }
    }

    pub fn half_space(n: usize) -> Self {
        Self::new(n, 1, StratumSource::Flat)
    }

    pub fn edge_dim(&self) -> usize {
        self.n - self.k
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "StratumSpec";
        if self.n < 2 {
            return Err(Error::domain(OP, format!("ambient dimension {} < 2", self.n)));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::domain(OP, format!("codimension {} outside [1, {}]", self.k, self.n)));
        }
        match &self.source {
            StratumSource::Flat if self.k != 1 => {
                Err(Error::domain(OP, "a flat source is only valid for k = 1"))
            }
            StratumSource::DirectGamma(g) if self.k == 1 && *g != 0.0 => {
                Err(Error::domain(OP, "k = 1 forces γ = 0"))
            }
            StratumSource::Opening(_) | StratumSource::DirectLambdaA(_) if self.k == 1 => {
                Err(Error::domain(OP, "k = 1 strata carry no cross-section"))
            }
            StratumSource::Opening(op) if op.sphere_dim() != self.k - 1 => Err(Error::domain(
                OP,
                format!(
                    "opening lives on S^{} but k = {} needs S^{}",
                    op.sphere_dim(),
                    self.k,
                    self.k - 1
                ),
            )),
            _ => Ok(()),
        }
    }
}

/// Positive root of κ² + (k − 2)κ − γ = 0.
pub fn kappa_from_gamma(k: usize, gamma: f64) -> Result<f64> {
    const OP: &str = "kappa_from_gamma";
    if k < 1 {
        return Err(Error::domain(OP, "k must be >= 1"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain(OP, format!("γ = {gamma} must be finite and >= 0")));
    }
    if k == 2 && gamma == 0.0 {
        return Err(Error::domain(OP, "(k, γ) = (2, 0) has no positive root"));
    }
    let b = k as f64 - 2.0;
    Ok(0.5 * (-b + (b * b + 4.0 * gamma).sqrt()))
}

/// λ_{N,q} = (2/(q−1)) (2q/(q−1) − N).
pub fn lambda_nq(n: usize, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::domain("lambda_Nq", format!("q = {q} must exceed 1")));
    }
    if n < 2 {
        return Err(Error::domain("lambda_Nq", "N must be >= 2"));
    }
    Ok(2.0 / (q - 1.0) * (2.0 * q / (q - 1.0) - n as f64))
}

/// Conjugate exponent q/(q − 1).
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QRegime {
    /// q < q_c: point masses are admissible.
    Subcritical,
    /// q_c ≤ q < q_c*: admissibility governed by a capacity on the edge.
    Capacity,
    /// q ≥ q_c*: the whole stratum is removable.
    EdgeRemovable,
}

mod inf_or_number {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub gamma: f64,
    #[serde(rename = "lambda_A")]
    pub lambda_a: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    #[serde(rename = "alpha_S")]
    pub alpha_s: f64,
    #[serde(rename = "alpha_tilde_S")]
    pub alpha_tilde_s: f64,
    #[serde(rename = "q_S")]
    pub q_s: f64,
    pub q_c: f64,
    #[serde(with = "inf_or_number")]
    pub q_c_star: f64,
}

impl ExponentTable {
    /// Builds the table from the cross-section eigenvalue γ on S^{k−1}.
    pub fn from_gamma(n: usize, k: usize, gamma: f64) -> Result<Self> {
        let kappa = kappa_from_gamma(k, gamma)?;
        Self::from_kappa(n, k, kappa)
    }

    fn from_kappa(n: usize, k: usize, kappa: f64) -> Result<Self> {
        let nf = n as f64;
        let lambda_a = kappa * (kappa + nf - 2.0);
        if !(lambda_a > 0.0) {
            return Err(Error::domain("build_exponent_table", format!("λ_A = {lambda_a} <= 0")));
        }
        let disc = ((nf - 2.0).powi(2) + 4.0 * lambda_a).sqrt();
        let kappa_minus = 0.5 * (2.0 - nf - disc);
        let q_c = (kappa + nf) / (kappa + nf - 2.0);
        // γ = λ_A − (N − k) κ_+ as in the edge-reduced eigenproblem
        let reduced = lambda_a - (n - k) as f64 * kappa;
        let q_c_star = if k == 1 {
            f64::INFINITY
        } else {
            let kk = k as f64;
            1.0 + (2.0 - kk + ((kk - 2.0).powi(2) + 4.0 * reduced).sqrt()) / reduced
        };
        let alpha_s = -kappa_minus;
        let gamma = if k == 1 { 0.0 } else { reduced };
        Ok(Self {
            n,
            k,
            gamma,
            lambda_a,
            kappa_plus: kappa,
            kappa_minus,
            alpha_s,
            alpha_tilde_s: kappa,
            q_s: 1.0 + 2.0 / alpha_s,
            q_c,
            q_c_star,
        })
    }

    pub fn edge_dim(&self) -> usize {
        self.n - self.k
    }

    /// Smoothness index s(q) = 2 − (k + κ_+)/q′.
    pub fn s(&self, q: f64) -> f64 {
        2.0 - (self.k as f64 + self.kappa_plus) / conjugate(q)
    }

    pub fn lambda_nq(&self, q: f64) -> Result<f64> {
        lambda_nq(self.n, q)
    }

    pub fn is_cone(&self) -> bool {
        self.k == self.n
    }

    pub fn regime(&self, q: f64) -> QRegime {
        classify_q_regime(self, q)
    }
}

/// Derives the exponent table of a stratum, solving the cross-section
/// eigenproblem at `mesh` when the source is an opening.
pub fn build_exponent_table(spec: &StratumSpec, mesh: usize) -> Result<ExponentTable> {
    spec.validate()?;
    match &spec.source {
        StratumSource::Flat => ExponentTable::from_gamma(spec.n, 1, 0.0),
        StratumSource::DirectGamma(g) => ExponentTable::from_gamma(spec.n, spec.k, *g),
        StratumSource::Opening(op) => {
            let chain = cross_section_eigen(op, mesh)?;
            ExponentTable::from_gamma(spec.n, spec.k, chain.gamma)
        }
        StratumSource::DirectLambdaA(la) => {
            if !(*la > 0.0) {
                return Err(Error::domain("build_exponent_table", format!("λ_A = {la} <= 0")));
            }
            let nf = spec.n as f64;
            let kappa = 0.5 * (2.0 - nf + ((nf - 2.0).powi(2) + 4.0 * la).sqrt());
            let t = ExponentTable::from_kappa(spec.n, spec.k, kappa)?;
            if spec.k > 1 && !(t.gamma > 0.0) {
                return Err(Error::domain(
                    "build_exponent_table",
                    format!("λ_A = {la} gives a non-positive cross-section eigenvalue"),
                ));
            }
            Ok(t)
        }
    }
}

pub fn build_exponent_table_default(spec: &StratumSpec) -> Result<ExponentTable> {
    build_exponent_table(spec, DEFAULT_MESH)
}

/// Band of q relative to the stratum's critical values. The point q = q_c
/// belongs to the capacity band on edges and to the removable band on cones.
pub fn classify_q_regime(table: &ExponentTable, q: f64) -> QRegime {
    if q < table.q_c {
        QRegime::Subcritical
    } else if table.is_cone() || q >= table.q_c_star {
        QRegime::EdgeRemovable
    } else {
        QRegime::Capacity
    }
}
