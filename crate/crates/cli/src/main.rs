//! `sbspline` command-line driver. Exit codes: 0 success, 1 failed check or
//! solve, 2 usage or input error.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sbspline::blend::BlendedBasis;
use sbspline::check::{run_all, CheckConfig};
use sbspline::error::Error;
use sbspline::extraction::{build_extraction, GeometryMap};
use sbspline::fem::{solve, BoundaryMode, Execution, ProblemKind, Solution};
use sbspline::mesh::{build_topology, generate_mesh, read_mesh, write_mesh, MeshTopology, ShapeSpec};
use sbspline::refine::MidpointRule;
use sbspline::study::{default_exact, run_study, to_csv, StudyConfig};
use sbspline::vtk::{write_vtk, Field};

#[derive(Parser)]
#[command(name = "sbspline", version, about = "Smooth blended B-splines on unstructured quad/hex meshes")]
struct Cli {
    /// Run element loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Run the basis invariant suites on a mesh.
    Check {
        #[command(flatten)]
        source: MeshSource,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Random points for the sampling checks.
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Solve one problem and report the errors.
    Solve {
        #[command(flatten)]
        source: MeshSource,
        #[command(flatten)]
        problem: ProblemArgs,
        /// JSON file receiving the coefficients and errors.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study under uniform refinement.
    Converge {
        /// Study configuration (JSON); overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "poisson")]
        problem: Problem,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        ngp: Option<usize>,
        /// Midpoint rule of the extraordinary-vertex refinement.
        #[arg(long, value_enum, default_value = "arc-length")]
        midpoint: Midpoint,
        /// Refinements of the generated mesh before the first level.
        #[arg(long, default_value_t = 0)]
        pre_refine: usize,
        /// CSV output; stdout if absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample a field on every element and write legacy VTK.
    Export {
        #[command(flatten)]
        source: MeshSource,
        #[command(flatten)]
        problem: ProblemArgs,
        /// `solution`, `basis:I`, `weight:wB` or `sum`.
        #[arg(long, default_value = "solution")]
        field: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MeshAction {
    /// Generate a test mesh and write it as JSON.
    Gen {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Square,
    Vgon,
    Prism,
    Ball,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, value_enum, default_value = "vgon")]
    shape: Shape,
    #[arg(long, default_value_t = 5)]
    valence: usize,
    #[arg(long, default_value_t = 6)]
    subdiv: usize,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[arg(long, default_value_t = 2.55)]
    radius: f64,
    #[arg(long, default_value_t = 9)]
    cells: usize,
}

impl ShapeArgs {
    fn spec(&self) -> ShapeSpec {
        match self.shape {
            Shape::Square => ShapeSpec::Square { subdiv: self.subdiv },
            Shape::Vgon => ShapeSpec::VGon { valence: self.valence },
            Shape::Prism => ShapeSpec::TriPrism { layers: self.layers },
            Shape::Ball => ShapeSpec::Ball {
                radius: self.radius,
                cells: self.cells,
                layers: self.layers,
            },
        }
    }
}

/// A mesh file, or a generated mesh when no file is given.
#[derive(Args)]
struct MeshSource {
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Solve in plain mixed B-splines instead of SB-splines.
    #[arg(long)]
    mixed: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Poisson,
    Biharmonic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Midpoint {
    ArcLength,
    Parametric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Nitsche,
    Penalty,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "poisson")]
    problem: Problem,
    #[arg(long)]
    ngp: Option<usize>,
    /// γ0 in γ = γ0 / h².
    #[arg(long = "gamma-scale")]
    gamma_scale: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    bc: Option<Bc>,
}

enum Failure {
    Check,
    Run(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverBreakdown { .. } | Error::SingularSystem(_) | Error::SingularJacobian { .. } => Failure::Run(e),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn problem_kind(p: Problem) -> ProblemKind {
    match p {
        Problem::Poisson => ProblemKind::Poisson,
        Problem::Biharmonic => ProblemKind::Biharmonic,
    }
}

struct Loaded {
    topo: MeshTopology,
    basis: BlendedBasis,
    /// Generator spec, when the mesh was generated.
    shape: Option<ShapeSpec>,
}

fn load(source: &MeshSource) -> CliResult<Loaded> {
    let (mesh, shape) = match &source.mesh {
        Some(p) => (read_mesh(p)?, None),
        None => {
            let s = source.shape.spec();
            (generate_mesh(&s)?, Some(s))
        }
    };
    let topo = build_topology(&mesh)?;
    let ext = build_extraction(&topo)?;
    let geo = GeometryMap::from_extraction(&ext);
    let basis = if source.mixed {
        BlendedBasis::unblended(ext, geo)
    } else {
        sbspline::blend::build_sb_basis(&topo, ext, geo)?
    };
    Ok(Loaded { topo, basis, shape })
}

fn study_config(problem: &ProblemArgs, shape: Option<ShapeSpec>, dim: usize) -> StudyConfig {
    // Meshes read from files get the v-gon (2D) or ball (3D) solution.
    let shape = shape.unwrap_or(if dim == 2 {
        ShapeSpec::VGon { valence: 5 }
    } else {
        ShapeSpec::Ball {
            radius: 2.55,
            cells: 9,
            layers: 5,
        }
    });
    let kind = problem_kind(problem.problem);
    let mut cfg = StudyConfig::new(kind, shape, 1);
    cfg.exact = Some(default_exact(kind, Some(&shape)));
    cfg.ngp = problem.ngp;
    cfg.gamma0 = problem.gamma_scale;
    cfg.tau = problem.tau;
    cfg.bc = problem.bc.map(|b| match b {
        Bc::Nitsche => BoundaryMode::Nitsche,
        Bc::Penalty => BoundaryMode::Penalty,
    });
    cfg
}

fn run_solve(loaded: &Loaded, problem: &ProblemArgs, exec: Execution) -> CliResult<Solution> {
    let cfg = study_config(problem, loaded.shape, loaded.topo.dim());
    Ok(solve(&loaded.basis, &loaded.topo, &cfg.problem_spec(), exec)?)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Mesh {
            action: MeshAction::Gen { shape, out },
        } => {
            let mesh = generate_mesh(&shape.spec())?;
            write_mesh(&mesh, &out)?;
            println!("wrote {} elements, {} vertices to {}", mesh.num_elements(), mesh.num_vertices(), out.display());
        }
        Command::Check { source, seed, samples } => {
            let loaded = load(&source)?;
            let cfg = CheckConfig {
                seed,
                samples,
                ..CheckConfig::default()
            };
            let outcomes = run_all(&loaded.basis, &loaded.topo, &cfg)?;
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Err(Failure::Check);
            }
        }
        Command::Solve { source, problem, out } => {
            let loaded = load(&source)?;
            let s = run_solve(&loaded, &problem, exec)?;
            let e = &s.errors;
            println!(
                "dof {} h {:.6e} l2 {:.6e} h1 {:.6e} h2 {:.6e} residual {:.3e}",
                e.dof, e.h, e.l2, e.h1, e.h2, s.residual
            );
            if let Some(path) = out {
                let doc = json!({
                    "dof": e.dof, "h": e.h, "l2": e.l2, "h1": e.h1, "h2": e.h2,
                    "residual": s.residual, "coefficients": s.coeffs,
                });
                write_file(&path, &serde_json::to_string_pretty(&doc).expect("serialisable"))?;
            }
        }
        Command::Converge {
            config,
            problem,
            shape,
            levels,
            ngp,
            midpoint,
            pre_refine,
            report,
        } => {
            let cfg = match config {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                    StudyConfig::from_json(&text)?
                }
                None => StudyConfig {
                    ngp,
                    pre_refine,
                    midpoint: match midpoint {
                        Midpoint::ArcLength => MidpointRule::ArcLength,
                        Midpoint::Parametric => MidpointRule::Parametric,
                    },
                    ..StudyConfig::new(problem_kind(problem), shape.spec(), levels)
                },
            };
            let csv = to_csv(&run_study(&cfg, exec)?);
            match report {
                Some(p) => write_file(&p, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Export {
            source,
            problem,
            field,
            samples,
            out,
        } => {
            let loaded = load(&source)?;
            let field = match field.as_str() {
                "solution" => Field::Solution(run_solve(&loaded, &problem, exec)?.coeffs),
                "weight:wB" | "weight:wb" => Field::RetainedWeight,
                "sum" => Field::BasisSum,
                f => match f.strip_prefix("basis:").and_then(|i| i.parse().ok()) {
                    Some(i) => Field::Basis(i),
                    None => return Err(Failure::Input(format!("unknown field `{f}`"))),
                },
            };
            let file = fs::File::create(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            write_vtk(&loaded.basis, &field, samples, &mut BufWriter::new(file))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
