use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use conecrit::edge::{
    admissibility_integral, capacity_threshold, classify_measure_on_polyhedron, classify_removability,
    lifted_integral, ClassificationReport, EdgeMeasure, IntegralOutcome, KernelParams, PolyhedronDocument,
    RemovabilityReport, Stratum,
};
use conecrit::exponents::{build_exponent_table, ExponentTable, QRegime, StratumSource, StratumSpec};
use conecrit::spectral::{cross_section_eigen, IntervalFactor, Opening};
use conecrit::sphere_profile::{solve_omega, NonlinearProfileProblem, ProfileOutcome};
use conecrit::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angle::parse_angle;

/// Cross-section chosen on the command line.
#[derive(Debug, Clone, Default)]
pub struct OpeningArgs {
    pub arc: Option<f64>,
    pub cap: Option<f64>,
    pub boxed: Option<String>,
}

impl OpeningArgs {
    /// Builds the opening on S^{sphere_dim}; `None` if nothing was given.
    pub fn opening(&self, sphere_dim: usize) -> Result<Option<Opening>> {
        let given = [self.arc.is_some(), self.cap.is_some(), self.boxed.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(usage("give at most one of --arc, --cap, --box"));
        }
        Ok(if let Some(a) = self.arc {
            Some(Opening::arc(a))
        } else if let Some(h) = self.cap {
            Some(Opening::cap(sphere_dim, h))
        } else if let Some(b) = &self.boxed {
            Some(Opening::box_product(parse_box(b)?))
        } else {
            None
        })
    }
}

pub fn usage(msg: impl Into<String>) -> Error {
    Error::Domain { op: "conecrit", msg: msg.into() }
}

/// `lo:hi,lo:hi,...`, innermost factor first; `full` stands for an unconstrained factor.
fn parse_box(text: &str) -> Result<Vec<IntervalFactor>> {
    text.split(',')
        .enumerate()
        .map(|(i, part)| {
            let part = part.trim();
            if part == "full" {
                return Ok(IntervalFactor::full(i == 0));
            }
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| usage(format!("box factor {part:?} is not lo:hi")))?;
            Ok(IntervalFactor::new(
                parse_angle(lo).map_err(usage)?,
                parse_angle(hi).map_err(usage)?,
            ))
        })
        .collect()
}

pub fn write_output(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

pub fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.12}")
    }
}

// ---------------------------------------------------------------- exponents

#[derive(Debug, Clone, Serialize)]
pub struct AtQ {
    pub q: f64,
    pub s: f64,
    pub regime: QRegime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_crit: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentsOutput {
    #[serde(flatten)]
    pub table: ExponentTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_q: Option<AtQ>,
}

pub fn stratum_spec(n: usize, k: usize, opening: &OpeningArgs, gamma: Option<f64>, lambda_a: Option<f64>) -> Result<StratumSpec> {
    let op = opening.opening(k.saturating_sub(1))?;
    let source = match (op, gamma, lambda_a) {
        (None, None, None) if k == 1 => StratumSource::Flat,
        (None, None, None) => return Err(usage(format!("k = {k} needs one of --arc, --cap, --box, --gamma, --lambda-a"))),
        (Some(o), None, None) => StratumSource::Opening(o),
        (None, Some(g), None) => StratumSource::DirectGamma(g),
        (None, None, Some(l)) => StratumSource::DirectLambdaA(l),
        _ => return Err(usage("give exactly one cross-section source")),
    };
    Ok(StratumSpec::new(n, k, source))
}

pub fn exponents(spec: &StratumSpec, q: Option<f64>, mesh: usize) -> Result<ExponentsOutput> {
    let table = build_exponent_table(spec, mesh)?;
    let at_q = match q {
        Some(q) => {
            if !(q > 1.0 && q.is_finite()) {
                return Err(usage(format!("q = {q} must exceed 1")));
            }
            let d_crit = if table.is_cone() { None } else { Some(capacity_threshold(&table, q)?.d_crit) };
            Some(AtQ { q, s: table.s(q), regime: table.regime(q), d_crit })
        }
        None => None,
    };
    Ok(ExponentsOutput { table, at_q })
}

pub fn exponents_table(out: &ExponentsOutput) -> String {
    let t = &out.table;
    let mut s = String::new();
    let rows: [(&str, f64); 10] = [
        ("gamma", t.gamma),
        ("lambda_A", t.lambda_a),
        ("kappa_plus", t.kappa_plus),
        ("kappa_minus", t.kappa_minus),
        ("alpha_S", t.alpha_s),
        ("alpha_tilde_S", t.alpha_tilde_s),
        ("q_S", t.q_s),
        ("q_c", t.q_c),
        ("q_c_star", t.q_c_star),
        ("edge_dim", t.edge_dim() as f64),
    ];
    let _ = writeln!(s, "{:<14} {}", "N", t.n);
    let _ = writeln!(s, "{:<14} {}", "k", t.k);
    for (name, v) in rows {
        let _ = writeln!(s, "{name:<14} {}", fmt_num(v));
    }
    if let Some(a) = &out.at_q {
        let _ = writeln!(s, "{:<14} {}", "q", fmt_num(a.q));
        let _ = writeln!(s, "{:<14} {}", "s", fmt_num(a.s));
        let _ = writeln!(s, "{:<14} {:?}", "regime", a.regime);
        if let Some(d) = a.d_crit {
            let _ = writeln!(s, "{:<14} {}", "d_crit", fmt_num(d));
        }
    }
    s.trim_end().to_string()
}

// ---------------------------------------------------------------- profile

pub fn profile(n: usize, q: f64, opening: Opening, mesh: usize, eigen: bool, csv: Option<&Path>) -> Result<Value> {
    if eigen {
        let chain = cross_section_eigen(&opening, mesh)?;
        let layer = chain
            .layers
            .first()
            .ok_or_else(|| usage("cross-section has no layers"))?;
        if let Some(p) = csv {
            layer.profile.write_csv(BufWriter::new(File::create(p)?), ("theta", "phi"))?;
        }
        return Ok(json!({
            "status": "eigenfunction",
            "opening": opening,
            "gamma": chain.gamma,
            "lambda": layer.lambda,
            "error_estimate": chain.error_estimate,
            "nodes": layer.profile.len(),
        }));
    }
    let prob = NonlinearProfileProblem::new(n, q, opening, mesh);
    match solve_omega(&prob)? {
        ProfileOutcome::Profile(sol) => {
            if let Some(p) = csv {
                sol.profile.write_csv(BufWriter::new(File::create(p)?), ("theta", "omega"))?;
            }
            Ok(json!({
                "status": "profile",
                "N": n,
                "q": q,
                "opening": sol.problem.opening,
                "lambda_s": sol.lambda_s,
                "lambda_nq": sol.lambda_nq,
                "max": sol.profile.max(),
                "residual": sol.residual,
                "iterations": sol.iterations,
                "restarts": sol.restarts,
                "nodes": sol.profile.len(),
            }))
        }
        ProfileOutcome::Nonexistence(cert) => Ok(json!({
            "status": "nonexistence",
            "N": n,
            "q": q,
            "certificate": cert,
        })),
    }
}

// ---------------------------------------------------------------- admissibility

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityInput {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub opening: Option<Opening>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default, rename = "lambda_A")]
    pub lambda_a: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    pub measure: EdgeMeasure,
    #[serde(default)]
    pub lifted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityOutput {
    pub params: KernelParams,
    pub regime: QRegime,
    pub radius: f64,
    pub admissibility: IntegralOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifted: Option<IntegralOutcome>,
    pub admissible: bool,
}

pub fn admissibility(input: &AdmissibilityInput, mesh: usize) -> Result<AdmissibilityOutput> {
    let q = input.q.ok_or_else(|| usage("q missing: set it in the file or pass --q"))?;
    let source = match (&input.opening, input.gamma, input.lambda_a) {
        (Some(o), None, None) => StratumSource::Opening(o.clone()),
        (None, Some(g), None) => StratumSource::DirectGamma(g),
        (None, None, Some(l)) => StratumSource::DirectLambdaA(l),
        (None, None, None) if input.k == 1 => StratumSource::Flat,
        _ => return Err(usage("give exactly one of opening, gamma, lambda_A")),
    };
    let table = build_exponent_table(&StratumSpec::new(input.n, input.k, source), mesh)?;
    let params = KernelParams::from_table(&table, q)?;
    let radius = input.radius.unwrap_or(1.0);
    let admissibility = admissibility_integral(&params, &input.measure, radius)?;
    let lifted = if input.lifted {
        Some(lifted_integral(&params, &input.measure, params.lift_smoothness(), params.lift_order())?)
    } else {
        None
    };
    Ok(AdmissibilityOutput {
        regime: table.regime(q),
        admissible: admissibility.is_convergent(),
        params,
        radius,
        admissibility,
        lifted,
    })
}

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOutput {
    pub classification: ClassificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removability: Option<RemovabilityReport>,
}

pub fn classify(doc: &PolyhedronDocument, strata: &[Stratum], q: f64) -> Result<ClassifyOutput> {
    let classification = classify_measure_on_polyhedron(strata, q, &doc.measure)?;
    let removability = if doc.set.is_empty() {
        None
    } else {
        Some(classify_removability(strata, q, &doc.set)?)
    };
    Ok(ClassifyOutput { classification, removability })
}

pub fn classify_table(out: &ClassifyOutput) -> String {
    let c = &out.classification;
    let mut s = String::new();
    let _ = writeln!(s, "q = {}", c.q);
    let _ = writeln!(s, "{:<12} {:<14} {:<22} {}", "stratum", "regime", "rule", "d_crit");
    for st in &c.strata {
        let d = st.d_crit.map(fmt_num).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:<12} {:<14} {:<22} {}", st.id, format!("{:?}", st.regime), format!("{:?}", st.verdict), d);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<16} {:<12} {:<14} {}", "component", "stratum", "verdict", "reason");
    for comp in &c.components {
        let _ = writeln!(s, "{:<16} {:<12} {:<14} {}", comp.label, comp.stratum, format!("{:?}", comp.verdict), comp.reason);
    }
    let _ = writeln!(s, "overall: {:?}", c.overall);
    if let Some(r) = &out.removability {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<16} {:<12} {:<4} {:<14} {}", "set piece", "stratum", "dim", "verdict", "reason");
        for p in &r.pieces {
            let _ = writeln!(s, "{:<16} {:<12} {:<4} {:<14} {}", p.label, p.stratum, p.dim, format!("{:?}", p.verdict), p.reason);
        }
        let _ = writeln!(s, "removable: {:?}", r.overall);
    }
    s.trim_end().to_string()
}

// ---------------------------------------------------------------- report

pub const REPORT_QS: [f64; 3] = [1.4, 1.9, 2.5];

#[derive(Debug, Clone, Serialize)]
pub struct ReportOutput {
    pub strata: Vec<Stratum>,
    /// Vertex eigenvalue recomputed from the octant opening.
    pub octant_gamma: Option<f64>,
    pub runs: Vec<ClassifyOutput>,
}

/// Exponent tables plus classification and removability at each q.
pub fn report(doc: &PolyhedronDocument, qs: &[f64], mesh: usize, octant: bool) -> Result<ReportOutput> {
    let strata = doc.build_strata(mesh)?;
    let octant_gamma = if octant {
        let op = Opening::box_product(vec![
            IntervalFactor::new(0.0, std::f64::consts::FRAC_PI_2),
            IntervalFactor::new(0.0, std::f64::consts::FRAC_PI_2),
        ]);
        Some(cross_section_eigen(&op, mesh)?.gamma)
    } else {
        None
    };
    let runs = qs.iter().map(|&q| classify(doc, &strata, q)).collect::<Result<Vec<_>>>()?;
    Ok(ReportOutput { strata, octant_gamma, runs })
}

pub fn report_table(out: &ReportOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>2} {:>2} {:>16} {:>16} {:>16} {:>16}",
        "stratum", "N", "k", "gamma", "kappa_plus", "q_c", "q_c_star"
    );
    for st in &out.strata {
        let t = &st.table;
        let _ = writeln!(
            s,
            "{:<10} {:>2} {:>2} {:>16} {:>16} {:>16} {:>16}",
            st.id,
            t.n,
            t.k,
            fmt_num(t.gamma),
            fmt_num(t.kappa_plus),
            fmt_num(t.q_c),
            fmt_num(t.q_c_star)
        );
    }
    if let Some(g) = out.octant_gamma {
        let _ = writeln!(s, "octant gamma (computed): {}", fmt_num(g));
    }
    for run in &out.runs {
        let _ = writeln!(s);
        let _ = writeln!(s, "{}", classify_table(run));
    }
    s.trim_end().to_string()
}
