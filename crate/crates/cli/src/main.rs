mod angle;
mod commands;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conecrit::edge::PolyhedronDocument;
use conecrit::spectral::DEFAULT_MESH;
use conecrit::{ErrorKind, Result};

use commands::{usage, OpeningArgs};

#[derive(Parser, Debug)]
#[command(name = "conecrit", version, about = "Critical exponents and boundary singularities of -Δu + u^q = 0 on cones and dihedra")]
struct Cli {
    /// Cells of the cross-section eigen solver.
    #[arg(long, global = true, env = "CONECRIT_MESH", default_value_t = DEFAULT_MESH)]
    mesh: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
struct OpeningFlags {
    /// Arc (0, A) of S¹; radians or e.g. `pi/2`.
    #[arg(long, value_parser = angle::parse_angle, allow_hyphen_values = true)]
    arc: Option<f64>,
    /// Geodesic cap of the given half-angle.
    #[arg(long, value_parser = angle::parse_angle)]
    cap: Option<f64>,
    /// Box product `lo:hi,lo:hi,...`, innermost factor first (`full` for an unconstrained factor).
    #[arg(long = "box")]
    boxed: Option<String>,
}

impl From<&OpeningFlags> for OpeningArgs {
    fn from(f: &OpeningFlags) -> Self {
        OpeningArgs {
            arc: f.arc,
            cap: f.cap,
            boxed: f.boxed.clone(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exponent table of a k-dihedron in R^N.
    Exponents {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opening: OpeningFlags,
        /// Cross-section eigenvalue on S^{k-1}.
        #[arg(long)]
        gamma: Option<f64>,
        /// Eigenvalue of the full spherical opening.
        #[arg(long = "lambda-a")]
        lambda_a: Option<f64>,
        /// Also report s(q), the q-regime and the capacity threshold.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solves the singular angular profile on a cone opening (or its eigenfunction with --eigen).
    Profile {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        opening: OpeningFlags,
        /// Write the first cross-section eigenfunction instead.
        #[arg(long)]
        eigen: bool,
        /// CSV destination for the profile.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs a planar-sector experiment described by a JSON file.
    Simulate {
        experiment: PathBuf,
        /// CSV destination for the solution field (kind = solve).
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Admissibility (and optionally lifted) integral of an edge measure.
    Admissibility {
        measure: PathBuf,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        /// Also compute the lifted integral.
        #[arg(long)]
        lifted: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classifies a boundary measure and compact set on a polyhedron.
    Classify {
        document: PathBuf,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exponent tables and verdicts for a polyhedron (the unit cube by default).
    Report {
        document: Option<PathBuf>,
        /// Values of q (default 1.4, 1.9, 2.5).
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Recompute the cube vertex eigenvalue from the octant opening.
        #[arg(long)]
        octant: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mesh = cli.mesh;
    match cli.command {
        Command::Exponents { n, k, opening, gamma, lambda_a, q, format, output } => {
            let spec = commands::stratum_spec(n, k, &OpeningArgs::from(&opening), gamma, lambda_a)?;
            let out = commands::exponents(&spec, q, mesh)?;
            let text = match format {
                Format::Json => commands::pretty(&out)?,
                Format::Table => commands::exponents_table(&out),
            };
            commands::write_output(&text, output.as_deref())
        }
        Command::Profile { n, q, opening, eigen, output } => {
            let op = OpeningArgs::from(&opening)
                .opening(n.saturating_sub(1))?
                .ok_or_else(|| usage("profile needs one of --arc, --cap, --box"))?;
            let summary = commands::profile(n, q, op, mesh, eigen, output.as_deref())?;
            commands::write_output(&commands::pretty(&summary)?, None)
        }
        Command::Simulate { experiment, field, output } => {
            let sim: simulate::Simulation = commands::read_json(&experiment)?;
            let out = simulate::run(&sim, mesh, field.as_deref())?;
            commands::write_output(&commands::pretty(&out)?, output.as_deref())
        }
        Command::Admissibility { measure, q, radius, lifted, output } => {
            let mut input: commands::AdmissibilityInput = commands::read_json(&measure)?;
            input.q = q.or(input.q);
            input.radius = radius.or(input.radius);
            input.lifted |= lifted;
            let out = commands::admissibility(&input, mesh)?;
            commands::write_output(&commands::pretty(&out)?, output.as_deref())
        }
        Command::Classify { document, q, format, output } => {
            let doc: PolyhedronDocument = commands::read_json(&document)?;
            let q = q.or(doc.q).ok_or_else(|| usage("q missing: set it in the document or pass --q"))?;
            let strata = doc.build_strata(mesh)?;
            let out = commands::classify(&doc, &strata, q)?;
            let text = match format {
                Format::Json => commands::pretty(&out)?,
                Format::Table => commands::classify_table(&out),
            };
            commands::write_output(&text, output.as_deref())
        }
        Command::Report { document, q, octant, format, output } => {
            let doc = match document {
                Some(p) => commands::read_json(&p)?,
                None => PolyhedronDocument::unit_cube(),
            };
            let qs = if q.is_empty() { commands::REPORT_QS.to_vec() } else { q };
            let out = commands::report(&doc, &qs, mesh, octant)?;
            let text = match format {
                Format::Json => commands::pretty(&out)?,
                Format::Table => commands::report_table(&out),
            };
            commands::write_output(&text, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Domain => 1,
                ErrorKind::Numerical => 2,
                ErrorKind::Io => 3,
            })
        }
    }
}
