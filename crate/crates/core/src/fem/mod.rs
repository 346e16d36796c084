//! Galerkin discretisation of the Poisson and biharmonic problems.

mod assembly;
pub mod exact;
mod exec;
mod norms;
pub mod oned;
pub mod quadrature;
pub mod solver;
pub mod sparse;

use serde::{Deserialize, Serialize};

pub use assembly::{
    assemble, assemble_mass, assemble_neumann_stiffness, boundary_facets, facet_points, is_c1, pattern, LinearSystem,
};
pub use exact::{ExactJet, Manufactured};
pub use exec::{map_elements, Execution};
pub use norms::{compute_errors, eval_solution, rate, ErrorReport};
pub use solver::{solve_spd, SkylineCholesky};
pub use sparse::CsrMatrix;

use crate::blend::BlendedBasis;
use crate::error::{Error, Result};
use crate::mesh::MeshTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Poisson,
    Biharmonic,
}

/// How Dirichlet data enter the weak form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Nitsche,
    /// Penalty terms only, no consistency terms.
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub exact: Manufactured,
    /// γ = γ₀ / h² with h the average element edge length.
    pub gamma0: f64,
    /// Second (normal-derivative) penalty of the biharmonic form; γ if unset.
    pub tau: Option<f64>,
    pub ngp: usize,
    pub nbgp: usize,
    pub bc: BoundaryMode,
}

impl ProblemSpec {
    pub fn poisson(exact: Manufactured) -> Self {
        ProblemSpec {
            kind: ProblemKind::Poisson,
            exact,
            gamma0: 10.0,
            tau: None,
            ngp: 3,
            nbgp: 3,
            bc: BoundaryMode::Nitsche,
        }
    }

    pub fn biharmonic(exact: Manufactured) -> Self {
        ProblemSpec {
            kind: ProblemKind::Biharmonic,
            exact,
            gamma0: 1.0,
            tau: None,
            ngp: 3,
            nbgp: 3,
            bc: BoundaryMode::Penalty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma0 must be positive, got {}", self.gamma0)));
        }
        if self.ngp < 2 || self.nbgp < 1 {
            return Err(Error::InvalidArgument("need at least 2 quadrature points per direction".into()));
        }
        Ok(())
    }
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub h: f64,
    pub errors: ErrorReport,
}

/// Gauss points per direction for the error norms, independent of the
/// quadrature used to assemble.
pub const ERROR_GP: usize = 5;

/// Assembles, solves and measures the error against the exact solution.
pub fn solve(basis: &BlendedBasis, topo: &MeshTopology, spec: &ProblemSpec, exec: Execution) -> Result<Solution> {
    let sys = assemble(basis, topo, spec, exec)?;
    let (coeffs, residual) = solve_spd(&sys.a, &sys.b)?;
    let errors = compute_errors(basis, &coeffs, &spec.exact, spec.ngp.max(ERROR_GP), sys.h, exec)?;
    Ok(Solution {
        coeffs,
        residual,
        h: sys.h,
        errors,
    })
}
