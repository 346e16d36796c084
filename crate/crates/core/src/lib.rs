//! Smooth blended B-splines (SB-splines) on unstructured quadrilateral and
//! hexahedral meshes, with a finite-element harness for Poisson and
//! biharmonic model problems.
//!
//! The pipeline is: [`mesh`] → [`extraction`] (mixed B-splines) → [`blend`]
//! (partition-of-unity weights and Bernstein companions) → [`fem`].

pub mod bernstein;
pub mod blend;
pub mod check;
pub mod error;
pub mod extraction;
pub mod fem;
pub mod jet;
pub mod linalg;
pub mod mesh;
pub mod refine;
pub mod study;
pub mod univariate;
pub mod vtk;

pub use error::{Error, Result};
