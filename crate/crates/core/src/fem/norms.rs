use super::exact::Manufactured;
use super::exec::{map_elements, Execution};
use super::quadrature::tensor_rule;
use crate::blend::BlendedBasis;
use crate::error::Result;

/// Relative error norms of a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub dof: usize,
    pub h: f64,
}

/// `u_h = Σ α_i N_i` at a point, as a physical jet.
pub fn eval_solution(basis: &BlendedBasis, coeffs: &[f64], e: usize, eta: [f64; 3], order: usize) -> Result<crate::jet::Jet> {
    let (_, funcs) = basis.eval(e, eta, order)?;
    let mut u = crate::jet::Jet::default();
    for (i, j) in funcs {
        u.axpy(coeffs[i], &j, basis.dim, order);
    }
    Ok(u)
}

/// Relative L2 norm and H1/H2 seminorms of `u − u_h` by Gauss quadrature
/// with `ngp` points per direction.
pub fn compute_errors(
    basis: &BlendedBasis,
    coeffs: &[f64],
    exact: &Manufactured,
    ngp: usize,
    h: f64,
    exec: Execution,
) -> Result<ErrorReport> {
    let dim = basis.dim;
    let rule = tensor_rule(dim, ngp);
    // [err l2, err h1, err h2, u l2, u h1, u h2]
    let mut acc = [0.0f64; 6];
    let mut err = None;
    map_elements(
        basis.num_elements(),
        exec,
        |e| -> Result<[f64; 6]> {
            let mut s = [0.0; 6];
            for (eta, w) in &rule {
                let (inv, funcs) = basis.eval(e, *eta, 2)?;
                let mut uh = crate::jet::Jet::default();
                for (i, j) in &funcs {
                    uh.axpy(coeffs[*i], j, dim, 2);
                }
                let x = basis.geo.point(e, *eta);
                let u = exact.eval(x, dim);
                let dv = w * inv.det;
                s[0] += (u.v - uh.v).powi(2) * dv;
                s[3] += u.v * u.v * dv;
                for a in 0..dim {
                    s[1] += (u.g[a] - uh.g[a]).powi(2) * dv;
                    s[4] += u.g[a] * u.g[a] * dv;
                    for b in 0..dim {
                        s[2] += (u.h[a][b] - uh.h[a][b]).powi(2) * dv;
                        s[5] += u.h[a][b] * u.h[a][b] * dv;
                    }
                }
            }
            Ok(s)
        },
        |_, r| match r {
            Ok(s) => {
                for (a, b) in acc.iter_mut().zip(s) {
                    *a += b;
                }
            }
            Err(x) => {
                err.get_or_insert(x);
            }
        },
    );
    if let Some(x) = err {
        return Err(x);
    }
    let rel = |a: f64, b: f64| if b > 0.0 { (a / b).sqrt() } else { a.sqrt() };
    Ok(ErrorReport {
        l2: rel(acc[0], acc[3]),
        h1: rel(acc[1], acc[4]),
        h2: rel(acc[2], acc[5]),
        dof: basis.len(),
        h,
    })
}

/// Observed convergence rate between two levels.
pub fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}
