use super::exec::{map_elements, Execution};
use super::quadrature::tensor_rule;
use super::sparse::CsrMatrix;
use super::{BoundaryMode, ProblemKind, ProblemSpec};
use crate::blend::BlendedBasis;
use crate::error::{Error, Result};
use crate::extraction::CvKind;
use crate::jet::Jet;
use crate::blend::ElementWeight;
use crate::linalg::{cross, dot, norm, scale};
use crate::mesh::MeshTopology;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub h: f64,
    pub gamma: f64,
    pub tau: f64,
}

/// Sparsity pattern: functions sharing an element.
pub fn pattern(basis: &BlendedBasis) -> CsrMatrix {
    let n = basis.len();
    let funcs: Vec<Vec<usize>> = (0..basis.num_elements()).map(|e| basis.element_functions(e)).collect();
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, f) in funcs.iter().enumerate() {
        for &i in f {
            support[i].push(e);
        }
    }
    let rows = support
        .iter()
        .map(|els| {
            let mut r: Vec<usize> = els.iter().flat_map(|&e| funcs[e].iter().copied()).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

/// Whether every merely-C0 mixed spline is switched off by w^B where it
/// fails to be C1.
pub fn is_c1(basis: &BlendedBasis) -> bool {
    basis.ext.cv_kinds.iter().enumerate().all(|(cv, k)| match *k {
        CvKind::Element(e) if basis.ext.c0[cv] => basis.w_b.elements[e] == ElementWeight::Zero,
        _ => true,
    })
}

/// Boundary facets as `(element, local facet)`.
pub fn boundary_facets(topo: &MeshTopology) -> Vec<(usize, usize)> {
    let nf = 2 * topo.dim();
    (0..topo.num_elements())
        .flat_map(|e| (0..nf).filter(move |&lf| topo.neighbour(e, lf).is_none()).map(move |lf| (e, lf)))
        .collect()
}

/// Quadrature points `(η, weight·measure, outward normal)` on a facet.
pub fn facet_points(basis: &BlendedBasis, e: usize, lf: usize, n: usize) -> Result<Vec<([f64; 3], f64, [f64; 3])>> {
    let dim = basis.dim;
    let (axis, side) = (lf / 2, lf % 2);
    let free: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
    let mut out = Vec::new();
    for (p, w) in tensor_rule(dim - 1, n) {
        let mut eta = [0.0; 3];
        eta[axis] = side as f64;
        for (k, &d) in free.iter().enumerate() {
            eta[d] = p[k];
        }
        let x = basis.geo.eval(e, eta, 1);
        let col = |a: usize| [x[0].g[a], x[1].g[a], x[2].g[a]];
        let mut nrm = if dim == 2 {
            let t = col(free[0]);
            [t[1], -t[0], 0.0]
        } else {
            cross(col(free[0]), col(free[1]))
        };
        let measure = norm(nrm);
        if measure <= 0.0 {
            return Err(Error::SingularJacobian { element: e, det: 0.0 });
        }
        let outward = scale(col(axis), if side == 1 { 1.0 } else { -1.0 });
        if dot(nrm, outward) < 0.0 {
            nrm = scale(nrm, -1.0);
        }
        out.push((eta, w * measure, scale(nrm, 1.0 / measure)));
    }
    Ok(out)
}

fn dn(j: &Jet, n: [f64; 3]) -> f64 {
    dot(j.g, n)
}

struct Local {
    idx: Vec<usize>,
    k: Vec<f64>,
    f: Vec<f64>,
}

fn element_system(
    basis: &BlendedBasis,
    spec: &ProblemSpec,
    facets: &[usize],
    e: usize,
    gamma: f64,
    tau: f64,
) -> Result<Local> {
    let dim = basis.dim;
    let idx = basis.element_functions(e);
    let m = idx.len();
    let mut k = vec![0.0; m * m];
    let mut f = vec![0.0; m];
    let bih = spec.kind == ProblemKind::Biharmonic;
    let order = if bih { 2 } else { 1 };
    for (eta, w) in tensor_rule(dim, spec.ngp) {
        let (inv, funcs) = basis.eval(e, eta, order)?;
        debug_assert!(funcs.iter().map(|x| x.0).eq(idx.iter().copied()));
        let dv = w * inv.det;
        let x = basis.geo.point(e, eta);
        let u = spec.exact.eval(x, dim);
        if bih {
            let lap: Vec<f64> = funcs.iter().map(|(_, j)| j.laplacian(dim)).collect();
            for a in 0..m {
                f[a] += u.bilap * funcs[a].1.v * dv;
                for b in 0..m {
                    k[a * m + b] += lap[a] * lap[b] * dv;
                }
            }
        } else {
            for a in 0..m {
                f[a] -= u.lap * funcs[a].1.v * dv;
                for b in 0..m {
                    k[a * m + b] += dot(funcs[a].1.g, funcs[b].1.g) * dv;
                }
            }
        }
    }
    let nitsche = spec.bc == BoundaryMode::Nitsche;
    let border = if bih && nitsche { 3 } else { order };
    for &lf in facets {
        for (eta, ds, n) in facet_points(basis, e, lf, spec.nbgp)? {
            let (_, funcs) = basis.eval(e, eta, border)?;
            let x = basis.geo.point(e, eta);
            let u = spec.exact.eval(x, dim);
            let (ub, tb) = (u.v, dot(u.g, n));
            let v: Vec<f64> = funcs.iter().map(|(_, j)| j.v).collect();
            let d: Vec<f64> = funcs.iter().map(|(_, j)| dn(j, n)).collect();
            for a in 0..m {
                f[a] += gamma * v[a] * ub * ds;
                for b in 0..m {
                    k[a * m + b] += gamma * v[a] * v[b] * ds;
                }
            }
            if bih {
                for a in 0..m {
                    f[a] += tau * d[a] * tb * ds;
                    for b in 0..m {
                        k[a * m + b] += tau * d[a] * d[b] * ds;
                    }
                }
                if nitsche {
                    let lap: Vec<f64> = funcs.iter().map(|(_, j)| j.laplacian(dim)).collect();
                    let gl: Vec<f64> = funcs.iter().map(|(_, j)| dot(j.grad_laplacian(dim), n)).collect();
                    for a in 0..m {
                        f[a] += (gl[a] * ub - lap[a] * tb) * ds;
                        for b in 0..m {
                            k[a * m + b] += (v[a] * gl[b] + v[b] * gl[a] - lap[a] * d[b] - lap[b] * d[a]) * ds;
                        }
                    }
                }
            } else if nitsche {
                for a in 0..m {
                    f[a] -= d[a] * ub * ds;
                    for b in 0..m {
                        k[a * m + b] -= (v[a] * d[b] + v[b] * d[a]) * ds;
                    }
                }
            }
        }
    }
    Ok(Local { idx, k, f })
}

/// Galerkin system of the Poisson or biharmonic problem with Dirichlet data
/// from the manufactured solution on the whole boundary.
pub fn assemble(basis: &BlendedBasis, topo: &MeshTopology, spec: &ProblemSpec, exec: Execution) -> Result<LinearSystem> {
    spec.validate()?;
    if spec.kind == ProblemKind::Biharmonic && !is_c1(basis) {
        return Err(Error::BasisNotC1);
    }
    let bfacets = boundary_facets(topo);
    if bfacets.is_empty() {
        return Err(Error::EmptyDirichletBoundary);
    }
    let mut by_element = vec![Vec::new(); basis.num_elements()];
    for &(e, lf) in &bfacets {
        by_element[e].push(lf);
    }
    let h = basis.geo.average_edge_length(topo);
    let gamma = spec.gamma0 / (h * h);
    let tau = spec.tau.unwrap_or(gamma);
    let mut a = pattern(basis);
    let mut b = vec![0.0; basis.len()];
    let mut err = None;
    map_elements(
        basis.num_elements(),
        exec,
        |e| element_system(basis, spec, &by_element[e], e, gamma, tau),
        |_, r| match r {
            Ok(l) => {
                a.add_block(&l.idx, &l.k);
                for (&i, fi) in l.idx.iter().zip(&l.f) {
                    b[i] += fi;
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
    Ok(LinearSystem { a, b, h, gamma, tau })
}

/// Mass (Gram) matrix `∫ N_i N_j`.
pub fn assemble_mass(basis: &BlendedBasis, ngp: usize, exec: Execution) -> Result<CsrMatrix> {
    let mut a = pattern(basis);
    let mut err = None;
    map_elements(
        basis.num_elements(),
        exec,
        |e| -> Result<(Vec<usize>, Vec<f64>)> {
            let idx = basis.element_functions(e);
            let m = idx.len();
            let mut k = vec![0.0; m * m];
            for (eta, w) in tensor_rule(basis.dim, ngp) {
                let (inv, funcs) = basis.eval(e, eta, 0)?;
                for a in 0..m {
                    for b in 0..m {
                        k[a * m + b] += funcs[a].1.v * funcs[b].1.v * w * inv.det;
                    }
                }
            }
            Ok((idx, k))
        },
        |_, r| match r {
            Ok((idx, k)) => a.add_block(&idx, &k),
            Err(x) => {
                err.get_or_insert(x);
            }
        },
    );
    match err {
        Some(x) => Err(x),
        None => Ok(a),
    }
}

/// Stiffness matrix `∫ ∇N_i·∇N_j` without boundary terms.
pub fn assemble_neumann_stiffness(basis: &BlendedBasis, ngp: usize) -> Result<CsrMatrix> {
    let mut a = pattern(basis);
    for e in 0..basis.num_elements() {
        let idx = basis.element_functions(e);
        let m = idx.len();
        let mut k = vec![0.0; m * m];
        for (eta, w) in tensor_rule(basis.dim, ngp) {
            let (inv, funcs) = basis.eval(e, eta, 1)?;
            for a in 0..m {
                for b in 0..m {
                    k[a * m + b] += dot(funcs[a].1.g, funcs[b].1.g) * w * inv.det;
                }
            }
        }
        a.add_block(&idx, &k);
    }
    Ok(a)
}
