use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{Atom, Piece};
use crate::error::{Error, Result};
use crate::exponents::{build_exponent_table, conjugate, ExponentTable, QRegime, StratumSource, StratumSpec};
use crate::spectral::Opening;

const DIM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityVerdict {
    NullCapacity,
    PositiveCapacity,
    /// Dimension equal to the threshold: not decidable from the dimension alone.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityThreshold {
    pub m: usize,
    pub s: f64,
    pub q_prime: f64,
    /// m − s q′: sets of larger dimension carry positive capacity.
    pub d_crit: f64,
}

impl CapacityThreshold {
    /// Verdict for a set of dimension `d`. Points are null exactly when
    /// d_crit ≥ 0.
    pub fn verdict(&self, d: f64) -> CapacityVerdict {
        let tol = DIM_TOL * self.d_crit.abs().max(1.0);
        if d == 0.0 {
            return if self.d_crit >= -tol {
                CapacityVerdict::NullCapacity
            } else {
                CapacityVerdict::PositiveCapacity
            };
        }
        if (d - self.d_crit).abs() <= tol {
            CapacityVerdict::Boundary
        } else if d > self.d_crit {
            CapacityVerdict::PositiveCapacity
        } else {
            CapacityVerdict::NullCapacity
        }
    }
}

/// Dimension threshold of the capacity governing measures on an edge stratum.
pub fn capacity_threshold(table: &ExponentTable, q: f64) -> Result<CapacityThreshold> {
    if table.is_cone() {
        return Err(Error::domain("capacity_threshold", "a vertex stratum has no edge"));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::domain("capacity_threshold", format!("q = {q} must exceed 1")));
    }
    let m = table.edge_dim();
    let s = table.s(q);
    let q_prime = conjugate(q);
    Ok(CapacityThreshold {
        m,
        s,
        q_prime,
        d_crit: m as f64 - s * q_prime,
    })
}

/// A stratum with its exponent table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub id: String,
    pub spec: StratumSpec,
    pub table: ExponentTable,
}

impl Stratum {
    pub fn new(id: impl Into<String>, spec: StratumSpec, mesh: usize) -> Result<Self> {
        let table = build_exponent_table(&spec, mesh)?;
        Ok(Self {
            id: id.into(),
            spec,
            table,
        })
    }
}

/// What a stratum allows a boundary measure to do at a given q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumRule {
    Unrestricted,
    /// The measure must not charge sets of zero capacity.
    RequiresCapacityNull,
    MustVanish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Good,
    Bad,
    Indeterminate,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Bad, _) | (_, Bad) => Bad,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Good,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumVerdict {
    pub id: String,
    pub regime: QRegime,
    pub verdict: StratumRule,
    pub d_crit: Option<f64>,
}

/// Part of a boundary measure living on one stratum. On a vertex the atoms
/// have empty locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComponent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub stratum: String,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

impl MeasureComponent {
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.stratum.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub label: String,
    pub stratum: String,
    pub verdict: Verdict,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub q: f64,
    pub strata: Vec<StratumVerdict>,
    pub components: Vec<ComponentVerdict>,
    pub overall: Verdict,
    pub reasons: Vec<String>,
}

fn stratum_rule(table: &ExponentTable, q: f64) -> StratumRule {
    if table.is_cone() {
        return if q < table.q_c {
            StratumRule::Unrestricted
        } else {
            StratumRule::MustVanish
        };
    }
    match table.regime(q) {
        QRegime::Subcritical => StratumRule::Unrestricted,
        QRegime::Capacity => StratumRule::RequiresCapacityNull,
        QRegime::EdgeRemovable => StratumRule::MustVanish,
    }
}

fn find<'a>(strata: &'a [Stratum], id: &str, op: &'static str) -> Result<&'a Stratum> {
    strata
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::domain(op, format!("unknown stratum {id:?}")))
}

fn check_unique(strata: &[Stratum], op: &'static str) -> Result<()> {
    for (i, s) in strata.iter().enumerate() {
        if strata[..i].iter().any(|t| t.id == s.id) {
            return Err(Error::domain(op, format!("duplicate stratum id {:?}", s.id)));
        }
    }
    Ok(())
}

fn check_component(c: &MeasureComponent, m: usize) -> Result<()> {
    const OP: &str = "classify_measure_on_polyhedron";
    let name = c.name();
    if c.atoms.is_empty() && c.pieces.is_empty() {
        return Err(Error::domain(OP, format!("{name}: component carries no mass")));
    }
    for a in &c.atoms {
        if a.at.len() != m || !(a.mass > 0.0 && a.mass.is_finite()) {
            return Err(Error::domain(
                OP,
                format!("{name}: atom needs a location in R^{m} and positive mass, got {a:?}"),
            ));
        }
    }
    for p in &c.pieces {
        if m == 0 {
            return Err(Error::domain(OP, format!("{name}: a vertex carries atoms only")));
        }
        let ok = p.lo.len() == m
            && p.hi.len() == m
            && p.lo.iter().zip(&p.hi).all(|(a, b)| a <= b)
            && p.dim() > 0
            && p.mass > 0.0
            && p.mass.is_finite();
        if !ok {
            return Err(Error::domain(OP, format!("{name}: malformed piece {p:?}")));
        }
    }
    Ok(())
}

fn judge_component(c: &MeasureComponent, st: &Stratum, rule: StratumRule, q: f64) -> Result<ComponentVerdict> {
    let (verdict, reason) = match rule {
        StratumRule::Unrestricted => (Verdict::Good, format!("q = {q} < q_c = {:.6}: no restriction", st.table.q_c)),
        StratumRule::MustVanish => {
            let bound = if st.table.is_cone() { st.table.q_c } else { st.table.q_c_star };
            (Verdict::Bad, format!("q = {q} ≥ {bound:.6}: the stratum must carry no mass"))
        }
        StratumRule::RequiresCapacityNull => {
            let cap = capacity_threshold(&st.table, q)?;
            let mut v = Verdict::Good;
            let mut notes = Vec::new();
            let dims = c.atoms.iter().map(|_| 0usize).chain(c.pieces.iter().map(|p| p.dim()));
            for d in dims {
                let (dv, what) = match cap.verdict(d as f64) {
                    CapacityVerdict::NullCapacity => (Verdict::Bad, "charges a null-capacity set"),
                    CapacityVerdict::Boundary => (Verdict::Indeterminate, "dimension equals the threshold"),
                    CapacityVerdict::PositiveCapacity => (Verdict::Good, "spread over a positive-capacity set"),
                };
                v = v.combine(dv);
                notes.push(format!("d = {d}: {what}"));
            }
            notes.dedup();
            (v, format!("d_crit = {:.6}; {}", cap.d_crit, notes.join("; ")))
        }
    };
    Ok(ComponentVerdict {
        label: c.name(),
        stratum: st.id.clone(),
        verdict,
        reason,
    })
}

/// Good-measure test on a polyhedral boundary: each component is judged by
/// the rule of its stratum, and the measure is good iff every component is.
pub fn classify_measure_on_polyhedron(strata: &[Stratum], q: f64, measure: &[MeasureComponent]) -> Result<ClassificationReport> {
    const OP: &str = "classify_measure_on_polyhedron";
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::domain(OP, format!("q = {q} must exceed 1")));
    }
    check_unique(strata, OP)?;
    let verdicts: Vec<StratumVerdict> = strata
        .iter()
        .map(|st| StratumVerdict {
            id: st.id.clone(),
            regime: st.table.regime(q),
            verdict: stratum_rule(&st.table, q),
            d_crit: (!st.table.is_cone()).then(|| st.table.edge_dim() as f64 - st.table.s(q) * conjugate(q)),
        })
        .collect();
    let mut components = Vec::with_capacity(measure.len());
    let mut overall = Verdict::Good;
    let mut reasons = Vec::new();
    for c in measure {
        let st = find(strata, &c.stratum, OP)?;
        check_component(c, st.table.edge_dim())?;
        let cv = judge_component(c, st, stratum_rule(&st.table, q), q)?;
        overall = overall.combine(cv.verdict);
        if cv.verdict != Verdict::Good {
            reasons.push(format!("{}: {}", cv.label, cv.reason));
        }
        components.push(cv);
    }
    Ok(ClassificationReport {
        q,
        strata: verdicts,
        components,
        overall,
        reasons,
    })
}

/// Piece of a compact boundary set: its stratum and dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPiece {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub stratum: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removability {
    Removable,
    NotRemovable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceRemovability {
    pub label: String,
    pub stratum: String,
    pub dim: usize,
    pub verdict: Removability,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovabilityReport {
    pub q: f64,
    pub pieces: Vec<PieceRemovability>,
    pub overall: Removability,
}

/// A compact set is removable iff each piece has zero capacity on its
/// stratum; a vertex is removable iff q ≥ q_c.
pub fn classify_removability(strata: &[Stratum], q: f64, set: &[SetPiece]) -> Result<RemovabilityReport> {
    const OP: &str = "classify_removability";
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::domain(OP, format!("q = {q} must exceed 1")));
    }
    if set.is_empty() {
        return Err(Error::domain(OP, "empty set"));
    }
    check_unique(strata, OP)?;
    let mut pieces = Vec::with_capacity(set.len());
    for p in set {
        let st = find(strata, &p.stratum, OP)?;
        let t = &st.table;
        let m = t.edge_dim();
        if p.dim > m {
            return Err(Error::domain(OP, format!("dimension {} exceeds the stratum dimension {m}", p.dim)));
        }
        let (verdict, reason) = if t.is_cone() {
            if q >= t.q_c {
                (Removability::Removable, format!("q ≥ q_c = {:.6}", t.q_c))
            } else {
                (Removability::NotRemovable, format!("q < q_c = {:.6}", t.q_c))
            }
        } else if t.regime(q) == QRegime::EdgeRemovable {
            (Removability::Removable, format!("q ≥ q_c* = {:.6}", t.q_c_star))
        } else {
            let cap = capacity_threshold(t, q)?;
            let v = match cap.verdict(p.dim as f64) {
                CapacityVerdict::NullCapacity => Removability::Removable,
                CapacityVerdict::PositiveCapacity => Removability::NotRemovable,
                CapacityVerdict::Boundary => Removability::Indeterminate,
            };
            (v, format!("d = {} against d_crit = {:.6}", p.dim, cap.d_crit))
        };
        pieces.push(PieceRemovability {
            label: p.label.clone().unwrap_or_else(|| p.stratum.clone()),
            stratum: st.id.clone(),
            dim: p.dim,
            verdict,
            reason,
        });
    }
    let overall = if pieces.iter().any(|p| p.verdict == Removability::NotRemovable) {
        Removability::NotRemovable
    } else if pieces.iter().any(|p| p.verdict == Removability::Indeterminate) {
        Removability::Indeterminate
    } else {
        Removability::Removable
    };
    Ok(RemovabilityReport { q, pieces, overall })
}

/// Stratum entry of a polyhedron document. At most one of `opening`,
/// `gamma`, `lambda_A` is given; none means a flat face (k = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumEntry {
    pub id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opening: Option<Opening>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, rename = "lambda_A", skip_serializing_if = "Option::is_none")]
    pub lambda_a: Option<f64>,
}

impl StratumEntry {
    pub fn spec(&self) -> Result<StratumSpec> {
        let source = match (&self.opening, self.gamma, self.lambda_a) {
            (None, None, None) => StratumSource::Flat,
            (Some(o), None, None) => StratumSource::Opening(o.clone()),
            (None, Some(g), None) => StratumSource::DirectGamma(g),
            (None, None, Some(l)) => StratumSource::DirectLambdaA(l),
            _ => {
                return Err(Error::domain(
                    "StratumEntry",
                    format!("{}: give at most one of opening, gamma, lambda_A", self.id),
                ))
            }
        };
        Ok(StratumSpec::new(self.n, self.k, source))
    }
}

/// Strata, exponent, boundary measure and (optionally) a compact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronDocument {
    pub strata: Vec<StratumEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default)]
    pub measure: Vec<MeasureComponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub set: Vec<SetPiece>,
}

impl PolyhedronDocument {
    pub fn build_strata(&self, mesh: usize) -> Result<Vec<Stratum>> {
        self.strata
            .iter()
            .map(|e| Stratum::new(e.id.clone(), e.spec()?, mesh))
            .collect()
    }

    /// Unit cube in R³: face, edge and vertex strata; a Lebesgue piece on a
    /// face, an atom and a Lebesgue piece on an edge, and a vertex atom. The
    /// compact set lists an edge point, a full edge and a vertex.
    pub fn unit_cube() -> Self {
        let entry = |id: &str, k, opening, gamma| StratumEntry {
            id: id.into(),
            n: 3,
            k,
            opening,
            gamma,
            lambda_a: None,
        };
        let comp = |label: &str, stratum: &str, atoms, pieces| MeasureComponent {
            label: Some(label.into()),
            stratum: stratum.into(),
            atoms,
            pieces,
        };
        let set = |label: &str, stratum: &str, dim| SetPiece {
            label: Some(label.into()),
            stratum: stratum.into(),
            dim,
        };
        Self {
            strata: vec![
                entry("face", 1, None, None),
                entry("edge", 2, Some(Opening::arc(FRAC_PI_2)), None),
                entry("vertex", 3, None, Some(12.0)),
            ],
            q: None,
            measure: vec![
                comp("face", "face", vec![], vec![Piece { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0], mass: 1.0 }]),
                comp("edge-atom", "edge", vec![Atom { at: vec![0.5], mass: 1.0 }], vec![]),
                comp("edge-uniform", "edge", vec![], vec![Piece { lo: vec![0.0], hi: vec![1.0], mass: 1.0 }]),
                comp("vertex", "vertex", vec![Atom { at: vec![], mass: 1.0 }], vec![]),
            ],
            set: vec![set("edge-point", "edge", 0), set("full-edge", "edge", 1), set("vertex", "vertex", 0)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<Stratum> {
        PolyhedronDocument::unit_cube().build_strata(1024).unwrap()
    }

    #[test]
    fn edge_threshold_at_1_8() {
        let st = cube();
        let c = capacity_threshold(&st[1].table, 1.8).unwrap();
        assert!((c.s - 2.0 / 9.0).abs() < 1e-12);
        assert!((c.q_prime - 2.25).abs() < 1e-12);
        assert!((c.d_crit - 0.5).abs() < 1e-12);
        assert_eq!(c.verdict(0.0), CapacityVerdict::NullCapacity);
        assert_eq!(c.verdict(1.0), CapacityVerdict::PositiveCapacity);
        assert_eq!(c.verdict(0.5), CapacityVerdict::Boundary);
        assert!(capacity_threshold(&st[2].table, 1.8).is_err());
    }

    #[test]
    fn points_are_null_at_the_dirac_threshold() {
        let st = cube();
        let c = capacity_threshold(&st[1].table, 5.0 / 3.0).unwrap();
        assert!(c.d_crit.abs() < 1e-12);
        assert_eq!(c.verdict(0.0), CapacityVerdict::NullCapacity);
        let below = capacity_threshold(&st[1].table, 1.5).unwrap();
        assert_eq!(below.verdict(0.0), CapacityVerdict::PositiveCapacity);
    }

    #[test]
    fn unknown_and_duplicate_strata_rejected() {
        let mut st = cube();
        let doc = PolyhedronDocument::unit_cube();
        let mut bad = doc.measure.clone();
        bad[0].stratum = "nope".into();
        assert!(classify_measure_on_polyhedron(&st, 1.9, &bad).is_err());
        st.push(st[0].clone());
        assert!(classify_measure_on_polyhedron(&st, 1.9, &doc.measure).is_err());
    }

    #[test]
    fn vertex_components_take_atoms_only() {
        let st = cube();
        let c = MeasureComponent {
            label: None,
            stratum: "vertex".into(),
            atoms: vec![Atom { at: vec![0.0], mass: 1.0 }],
            pieces: vec![],
        };
        assert!(classify_measure_on_polyhedron(&st, 1.9, &[c]).is_err());
    }
}
