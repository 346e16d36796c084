//! Convergence studies: each level refines the previous one, solves and
//! records the errors and observed rates.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blend::{build_sb_basis, BlendedBasis};
use crate::error::{Error, Result};
use crate::extraction::{build_extraction, ExtractionOperator, GeometryMap};
use crate::fem::oned::solve_poisson_1d;
use crate::fem::{rate, solve, BoundaryMode, Execution, Manufactured, ProblemKind, ProblemSpec};
use crate::mesh::{build_topology, generate_mesh, MeshTopology, ShapeSpec};
use crate::refine::{refine, MidpointRule, RefineOptions};

/// Which function space to solve in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// SB-splines.
    #[default]
    Blended,
    /// Mixed B-splines without blending (C0 near extraordinary features).
    Mixed,
}

/// One-dimensional problem on (0, 1) with a C0 kink at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub degree: usize,
    /// Elements on the coarsest level.
    pub elements: usize,
}

/// A complete convergence study; every field but `problem`, `levels` and
/// one of `shape`/`line` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub shape: Option<ShapeSpec>,
    #[serde(default)]
    pub line: Option<LineSpec>,
    pub levels: usize,
    #[serde(default)]
    pub space: SpaceKind,
    #[serde(default)]
    pub exact: Option<Manufactured>,
    #[serde(default)]
    pub gamma0: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub ngp: Option<usize>,
    #[serde(default)]
    pub nbgp: Option<usize>,
    #[serde(default)]
    pub bc: Option<BoundaryMode>,
    #[serde(default)]
    pub constraint_eta: Option<f64>,
    #[serde(default)]
    pub midpoint: MidpointRule,
    /// Refinements applied to the generated mesh before the first level.
    #[serde(default)]
    pub pre_refine: usize,
}

impl StudyConfig {
    pub fn new(problem: ProblemKind, shape: ShapeSpec, levels: usize) -> Self {
        StudyConfig {
            problem,
            shape: Some(shape),
            line: None,
            levels,
            space: SpaceKind::Blended,
            exact: None,
            gamma0: None,
            tau: None,
            ngp: None,
            nbgp: None,
            bc: None,
            constraint_eta: None,
            midpoint: MidpointRule::ArcLength,
            pre_refine: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Problem description with the defaults for this shape filled in.
    pub fn problem_spec(&self) -> ProblemSpec {
        let exact = self.exact.unwrap_or_else(|| default_exact(self.problem, self.shape.as_ref()));
        let mut spec = match self.problem {
            ProblemKind::Poisson => ProblemSpec::poisson(exact),
            ProblemKind::Biharmonic => ProblemSpec::biharmonic(exact),
        };
        if self.problem == ProblemKind::Biharmonic && !matches!(self.shape, Some(ShapeSpec::Square { .. })) {
            spec.gamma0 = 1000.0;
        }
        if let Some(g) = self.gamma0 {
            spec.gamma0 = g;
        }
        spec.tau = self.tau.or(spec.tau);
        spec.ngp = self.ngp.unwrap_or(spec.ngp);
        spec.nbgp = self.nbgp.unwrap_or(spec.nbgp);
        spec.bc = self.bc.unwrap_or(spec.bc);
        spec
    }

    fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("a study needs at least one level".into()));
        }
        match (&self.shape, &self.line) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::InvalidArgument("give exactly one of `shape` and `line`".into())),
        }
        if self.line.is_some() && self.pre_refine > 0 {
            return Err(Error::InvalidArgument("`pre_refine` applies to 2D meshes only".into()));
        }
        if self.line.is_some() && self.problem != ProblemKind::Poisson {
            return Err(Error::InvalidArgument("the 1D study solves the Poisson problem only".into()));
        }
        if matches!(self.shape, Some(ShapeSpec::TriPrism { .. } | ShapeSpec::Ball { .. }))
            && (self.levels > 1 || self.pre_refine > 0)
        {
            return Err(Error::InvalidArgument("hexahedral meshes are not refined; use one level".into()));
        }
        self.problem_spec().validate()
    }
}

/// Manufactured solution used when the configuration names none.
pub fn default_exact(problem: ProblemKind, shape: Option<&ShapeSpec>) -> Manufactured {
    match (problem, shape) {
        (_, None) => Manufactured::sine_1d(),
        (ProblemKind::Poisson, Some(ShapeSpec::Square { .. })) => Manufactured::trig(1.0, [6.0, 8.0, 0.0], [0.0; 3]),
        (ProblemKind::Biharmonic, Some(ShapeSpec::Square { .. })) => {
            Manufactured::trig(1.0 / (4.0 * PI * PI), [PI, PI, 0.0], [0.0; 3])
        }
        (_, Some(ShapeSpec::VGon { .. })) => Manufactured::trig(1.0, [3.0, 3.0, 0.0], [0.0, 0.5 * PI, 0.0]),
        (ProblemKind::Poisson, Some(_)) => Manufactured::trig(1.0, [0.5, 0.5, 0.25], [0.0; 3]),
        (ProblemKind::Biharmonic, Some(_)) => Manufactured::trig(1.0 / (8.0 * PI), [PI / 8.0; 3], [0.0; 3]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    pub dof: usize,
    pub l2: f64,
    pub h1: f64,
    pub h2: Option<f64>,
    /// Rates against the previous level.
    pub rates: Option<[Option<f64>; 3]>,
    /// Largest midpoint interpolation residual of the refinement that
    /// produced this level.
    pub refine_residual: f64,
}

/// A mesh level ready for solving.
pub struct Level {
    pub topo: MeshTopology,
    pub ext: ExtractionOperator,
    pub geo: GeometryMap,
    pub refine_residual: f64,
}

impl Level {
    pub fn generate(shape: &ShapeSpec) -> Result<Self> {
        let topo = build_topology(&generate_mesh(shape)?)?;
        let ext = build_extraction(&topo)?;
        let geo = GeometryMap::from_extraction(&ext);
        Ok(Level {
            topo,
            ext,
            geo,
            refine_residual: 0.0,
        })
    }

    pub fn refined(&self, opts: &RefineOptions) -> Result<Self> {
        let r = refine(&self.topo, &self.ext, &self.geo, opts)?;
        let geo = r.geometry();
        let refine_residual = r.evs.iter().map(|d| d.residual).fold(0.0, f64::max);
        Ok(Level {
            topo: r.topo,
            ext: r.ext,
            geo,
            refine_residual,
        })
    }

    pub fn basis(&self, space: SpaceKind) -> Result<BlendedBasis> {
        match space {
            SpaceKind::Blended => build_sb_basis(&self.topo, self.ext.clone(), self.geo.clone()),
            SpaceKind::Mixed => Ok(BlendedBasis::unblended(self.ext.clone(), self.geo.clone())),
        }
    }
}

fn with_rates(mut rows: Vec<StudyRow>) -> Vec<StudyRow> {
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1], rows[i]);
        let r = |x: f64, y: f64| rate(x, y, a.h, b.h);
        let h2 = match (a.h2, b.h2) {
            (Some(x), Some(y)) => Some(r(x, y)),
            _ => None,
        };
        rows[i].rates = Some([Some(r(a.l2, b.l2)), Some(r(a.h1, b.h1)), h2]);
    }
    rows
}

/// Runs all levels in sequence.
pub fn run_study(cfg: &StudyConfig, exec: Execution) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let spec = cfg.problem_spec();
    let mut rows = Vec::with_capacity(cfg.levels);
    if let Some(line) = cfg.line {
        for level in 0..cfg.levels {
            let n = line.elements << level;
            let r = solve_poisson_1d(line.degree, n, cfg.space == SpaceKind::Blended, &spec.exact)?;
            rows.push(StudyRow {
                level,
                h: r.h,
                dof: r.dof,
                l2: r.l2,
                h1: r.h1,
                h2: None,
                rates: None,
                refine_residual: 0.0,
            });
        }
        return Ok(with_rates(rows));
    }
    let opts = RefineOptions {
        constraint_eta: cfg.constraint_eta.unwrap_or(RefineOptions::default().constraint_eta),
        midpoint: cfg.midpoint,
    };
    let mut mesh = Level::generate(cfg.shape.as_ref().expect("validated"))?;
    for _ in 0..cfg.pre_refine {
        mesh = mesh.refined(&opts)?;
    }
    for level in 0..cfg.levels {
        if level > 0 {
            mesh = mesh.refined(&opts)?;
        }
        let basis = mesh.basis(cfg.space)?;
        let s = solve(&basis, &mesh.topo, &spec, exec)?;
        rows.push(StudyRow {
            level,
            h: s.h,
            dof: basis.len(),
            l2: s.errors.l2,
            h1: s.errors.h1,
            h2: (spec.kind == ProblemKind::Biharmonic).then_some(s.errors.h2),
            rates: None,
            refine_residual: mesh.refine_residual,
        });
    }
    Ok(with_rates(rows))
}

pub const CSV_HEADER: &str = "level,h,dof,l2,h1,h2,rate_l2,rate_h1,rate_h2";

/// Rate table; values are printed with 10 significant digits.
pub fn to_csv(rows: &[StudyRow]) -> String {
    let num = |x: Option<f64>| x.map(|v| format!("{v:.9e}")).unwrap_or_default();
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let [a, b, c] = r.rates.unwrap_or([None; 3]);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.level,
            num(Some(r.h)),
            r.dof,
            num(Some(r.l2)),
            num(Some(r.h1)),
            num(r.h2),
            num(a),
            num(b),
            num(c)
        )
        .expect("writing to a String");
    }
    out
}
