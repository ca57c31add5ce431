use std::path::Path;

use conecrit::sector::{
    exact_solution_study, fit_decay, harnack_study, keller_osserman_constant, solve_semilinear,
    strong_singularity_experiment, trichotomy_experiment, weak_singularity_experiment, Absorption,
    BoundaryData, InnerShape, SectorDomain, StrongOptions, WeakOptions,
};
use conecrit::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub r_min: f64,
    #[serde(default = "one")]
    pub r_max: f64,
    pub n_theta: usize,
    /// Radial nodes per decade (graded grid) ...
    #[serde(default)]
    pub per_decade: Option<usize>,
    /// ... or a fixed radial node count.
    #[serde(default)]
    pub n_r: Option<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSpec {
    VertexKernel { k: f64 },
    InnerConstant { value: f64 },
    /// Bump on the outer arc; `lo`, `hi` are fractions of the opening.
    OuterBump { amp: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    Solve {
        data: DataSpec,
        #[serde(default)]
        fit_window: Option<[f64; 2]>,
    },
    Weak {
        k: f64,
        #[serde(default)]
        window: Option<[f64; 2]>,
        #[serde(default)]
        shape: Option<InnerShape>,
    },
    Strong {
        #[serde(default)]
        levels: Option<usize>,
        #[serde(default)]
        base: Option<f64>,
        #[serde(default)]
        window: Option<[f64; 2]>,
    },
    Trichotomy {
        window: [f64; 2],
    },
    Exact {
        refinements: usize,
    },
    Harnack {
        center_r: f64,
        radius: f64,
    },
    KellerOsserman {
        value: f64,
        min_distance: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub alpha: f64,
    pub q: f64,
    pub domain: DomainSpec,
    pub experiment: ExperimentSpec,
}

impl Simulation {
    fn domain(&self) -> Result<SectorDomain> {
        let d = &self.domain;
        match (d.per_decade, d.n_r) {
            (Some(p), None) => SectorDomain::graded(self.alpha, d.r_min, d.r_max, p, d.n_theta),
            (None, Some(n)) => SectorDomain::new(self.alpha, d.r_min, d.r_max, n, d.n_theta),
            _ => Err(Error::Domain {
                op: "simulate",
                msg: "domain needs exactly one of per_decade and n_r".into(),
            }),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Runs the experiment; `field` receives the (r, θ, u) CSV of a plain solve.
pub fn run(sim: &Simulation, omega_mesh: usize, field: Option<&Path>) -> Result<Value> {
    let dom = sim.domain()?;
    let q = sim.q;
    let body = match &sim.experiment {
        ExperimentSpec::Solve { data, fit_window } => {
            let bd = match *data {
                DataSpec::VertexKernel { k } => BoundaryData::vertex_kernel(&dom, k),
                DataSpec::InnerConstant { value } => BoundaryData::inner_constant(&dom, value),
                DataSpec::OuterBump { amp, lo, hi } => BoundaryData::outer_bump(&dom, amp, lo * dom.alpha, hi * dom.alpha),
            };
            let u = solve_semilinear(&dom, Absorption::Power(q), &bd)?;
            if let Some(path) = field {
                u.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            }
            let fit = match fit_window {
                Some([lo, hi]) => Some(fit_decay(&u, lo * dom.r_min, hi * dom.r_min, q, None)?),
                None => None,
            };
            json!({
                "newton_iterations": u.newton_iterations,
                "residual": u.residual,
                "min_value": u.min_value(),
                "fit": fit,
            })
        }
        ExperimentSpec::Weak { k, window, shape } => {
            let mut opts = WeakOptions::default();
            if let Some(w) = window {
                opts.window = *w;
            }
            if let Some(s) = shape {
                opts.shape = *s;
            }
            to_value(&weak_singularity_experiment(&dom, q, *k, opts)?)?
        }
        ExperimentSpec::Strong { levels, base, window } => {
            let mut opts = StrongOptions {
                omega_mesh,
                ..StrongOptions::default()
            };
            if let Some(l) = levels {
                opts.levels = *l;
            }
            if let Some(b) = base {
                opts.base = *b;
            }
            if let Some(w) = window {
                opts.window = *w;
            }
            to_value(&strong_singularity_experiment(&dom, q, opts)?)?
        }
        ExperimentSpec::Trichotomy { window } => to_value(&trichotomy_experiment(&dom, q, *window)?)?,
        ExperimentSpec::Exact { refinements } => to_value(&exact_solution_study(&dom, q, *refinements, omega_mesh)?)?,
        ExperimentSpec::Harnack { center_r, radius } => to_value(&harnack_study(&dom, q, *center_r, *radius)?)?,
        ExperimentSpec::KellerOsserman { value, min_distance } => {
            let u = solve_semilinear(&dom, Absorption::Power(q), &BoundaryData::inner_constant(&dom, *value))?;
            to_value(&keller_osserman_constant(&u, q, *min_distance))?
        }
    };
    Ok(json!({ "alpha": sim.alpha, "q": q, "domain": dom, "report": body }))
}
