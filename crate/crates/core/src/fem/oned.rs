//! One-dimensional Poisson problem `−u'' = f` on (0, 1) with strongly imposed
//! Dirichlet data, using B-splines with a C0 midspan kink, with or without
//! blending.

use nalgebra::{DMatrix, DVector};

use super::exact::Manufactured;
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::univariate::{build_1d_sbsplines, eval_basis_ders, Basis1D, KnotVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneDResult {
    pub n_elements: usize,
    pub dof: usize,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
}

enum Space {
    Plain(KnotVector),
    Blended(Basis1D),
}

impl Space {
    fn len(&self) -> usize {
        match self {
            Space::Plain(kv) => kv.num_basis(),
            Space::Blended(b) => b.len(),
        }
    }

    fn eval(&self, x: f64) -> Result<Vec<(usize, [f64; 4])>> {
        match self {
            Space::Plain(kv) => {
                let (first, d) = eval_basis_ders(kv, x)?;
                Ok(d.into_iter().enumerate().map(|(j, r)| (first + j, r)).collect())
            }
            Space::Blended(b) => b.eval(x),
        }
    }
}

/// Solves on `n_elements` uniform elements of degree `p` with multiplicity
/// `p` at x = 1/2.
pub fn solve_poisson_1d(p: usize, n_elements: usize, blended: bool, exact: &Manufactured) -> Result<OneDResult> {
    let kv = KnotVector::with_midpoint_kink(p, n_elements, 0.0, 1.0)?;
    let last = kv.num_basis() - 1;
    let space = if blended {
        Space::Blended(build_1d_sbsplines(&kv, p)?)
    } else {
        Space::Plain(kv.clone())
    };
    let n = space.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let (gx, gw) = gauss_legendre(p + 2);
    let elements = kv.elements();
    for &(lo, hi) in &elements {
        for (t, w) in gx.iter().zip(&gw) {
            let x = lo + t * (hi - lo);
            let dx = w * (hi - lo);
            let f = -exact.eval([x, 0.0, 0.0], 1).lap;
            let funcs = space.eval(x)?;
            for &(i, di) in &funcs {
                b[i] += f * di[0] * dx;
                for &(j, dj) in &funcs {
                    a[(i, j)] += di[1] * dj[1] * dx;
                }
            }
        }
    }
    // Strong Dirichlet data on the two clamped end splines.
    for (k, x) in [(0, 0.0), (last, 1.0)] {
        let g = exact.eval([x, 0.0, 0.0], 1).v;
        for i in 0..n {
            b[i] -= a[(i, k)] * g;
            a[(i, k)] = 0.0;
            a[(k, i)] = 0.0;
        }
        a[(k, k)] = 1.0;
        b[k] = g;
    }
    let chol = a.cholesky().ok_or_else(|| Error::SingularSystem("1D stiffness matrix is not positive definite".into()))?;
    let alpha = chol.solve(&b);
    let (ex, ew) = gauss_legendre(p + 3);
    let mut s = [0.0f64; 4];
    for &(lo, hi) in &elements {
        for (t, w) in ex.iter().zip(&ew) {
            let x = lo + t * (hi - lo);
            let dx = w * (hi - lo);
            let u = exact.eval([x, 0.0, 0.0], 1);
            let (mut v, mut d) = (0.0, 0.0);
            for (i, di) in space.eval(x)? {
                v += alpha[i] * di[0];
                d += alpha[i] * di[1];
            }
            s[0] += (u.v - v).powi(2) * dx;
            s[1] += (u.g[0] - d).powi(2) * dx;
            s[2] += u.v * u.v * dx;
            s[3] += u.g[0] * u.g[0] * dx;
        }
    }
    Ok(OneDResult {
        n_elements,
        dof: n,
        h: 1.0 / n_elements as f64,
        l2: (s[0] / s[2]).sqrt(),
        h1: (s[1] / s[3]).sqrt(),
    })
}

/// Convergence sweep: `levels` uniform refinements starting at `n0` elements.
pub fn study_1d(p: usize, n0: usize, levels: usize, blended: bool, exact: &Manufactured) -> Result<Vec<OneDResult>> {
    (0..levels).map(|l| solve_poisson_1d(p, n0 << l, blended, exact)).collect()
}
