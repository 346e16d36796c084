//! Derivative jets (value, gradient, Hessian, third derivatives) and their
//! push-forward through an invertible geometry map.

use crate::error::{Error, Result};
use crate::linalg::{det, inverse, Mat3};

type T3 = [[[f64; 3]; 3]; 3];

/// Derivatives up to order 3 of a scalar field in up to three variables.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: Mat3,
    pub t: T3,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet {
            v,
            ..Default::default()
        }
    }

    pub fn scaled(&self, s: f64) -> Jet {
        let mut r = *self;
        r.v *= s;
        for i in 0..3 {
            r.g[i] *= s;
            for j in 0..3 {
                r.h[i][j] *= s;
                for k in 0..3 {
                    r.t[i][j][k] *= s;
                }
            }
        }
        r
    }

    /// `self += s * other` up to the given derivative order.
    pub fn axpy(&mut self, s: f64, other: &Jet, dim: usize, order: usize) {
        self.v += s * other.v;
        if order == 0 {
            return;
        }
        for i in 0..dim {
            self.g[i] += s * other.g[i];
            if order < 2 {
                continue;
            }
            for j in 0..dim {
                self.h[i][j] += s * other.h[i][j];
                if order < 3 {
                    continue;
                }
                for k in 0..dim {
                    self.t[i][j][k] += s * other.t[i][j][k];
                }
            }
        }
    }

    /// Jet of the product `self * other`.
    pub fn product(&self, o: &Jet, dim: usize, order: usize) -> Jet {
        let (f, g) = (self, o);
        let mut r = Jet::constant(f.v * g.v);
        if order == 0 {
            return r;
        }
        for i in 0..dim {
            r.g[i] = f.g[i] * g.v + f.v * g.g[i];
        }
        if order >= 2 {
            for i in 0..dim {
                for j in 0..dim {
                    r.h[i][j] = f.h[i][j] * g.v + f.g[i] * g.g[j] + f.g[j] * g.g[i] + f.v * g.h[i][j];
                }
            }
        }
        if order >= 3 {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        r.t[i][j][k] = f.t[i][j][k] * g.v
                            + f.h[i][j] * g.g[k]
                            + f.h[i][k] * g.g[j]
                            + f.h[j][k] * g.g[i]
                            + f.g[i] * g.h[j][k]
                            + f.g[j] * g.h[i][k]
                            + f.g[k] * g.h[i][j]
                            + f.v * g.t[i][j][k];
                    }
                }
            }
        }
        r
    }

    pub fn laplacian(&self, dim: usize) -> f64 {
        (0..dim).map(|i| self.h[i][i]).sum()
    }

    /// Gradient of the Laplacian (needs order 3).
    pub fn grad_laplacian(&self, dim: usize) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (k, rk) in r.iter_mut().enumerate().take(dim) {
            *rk = (0..dim).map(|i| self.t[i][i][k]).sum();
        }
        r
    }
}

/// Jet of a tensor product `Π_d f_d(x_d)` from per-axis derivative tables
/// (`axes[d][n]` is the n-th derivative of the d-th factor).
pub fn tensor_jet(dim: usize, axes: &[[f64; 4]; 3], order: usize) -> Jet {
    let factor = |counts: [usize; 3]| -> f64 { (0..dim).map(|d| axes[d][counts[d]]).product() };
    let mut r = Jet::constant(factor([0; 3]));
    if order == 0 {
        return r;
    }
    for i in 0..dim {
        let mut c = [0; 3];
        c[i] += 1;
        r.g[i] = factor(c);
        if order < 2 {
            continue;
        }
        for j in 0..dim {
            let mut c2 = c;
            c2[j] += 1;
            r.h[i][j] = factor(c2);
            if order < 3 {
                continue;
            }
            for k in 0..dim {
                let mut c3 = c2;
                c3[k] += 1;
                r.t[i][j][k] = factor(c3);
            }
        }
    }
    r
}

/// Derivatives of the inverse map `η(x)` at a point, used to push jets from
/// reference to physical coordinates.
#[derive(Debug, Clone)]
pub struct InverseMap {
    pub dim: usize,
    pub order: usize,
    /// `∂x/∂η` as `jac[i][a]`.
    pub jac: Mat3,
    pub det: f64,
    /// `∂η_a/∂x_i` as `e1[a][i]`.
    pub e1: Mat3,
    pub e2: T3,
    pub e3: [T3; 3],
}

impl InverseMap {
    /// `x[i]` holds the jet of the i-th physical coordinate in η.
    pub fn new(x: &[Jet; 3], dim: usize, order: usize) -> Result<Self> {
        let mut jac = [[0.0; 3]; 3];
        for i in 0..dim {
            for a in 0..dim {
                jac[i][a] = x[i].g[a];
            }
        }
        let d = det(&jac, dim);
        let inv = match inverse(&jac, dim) {
            Some(m) if d > 0.0 => m,
            _ => return Err(Error::SingularJacobian { element: usize::MAX, det: d }),
        };
        let e1 = inv;
        let mut e2 = [[[0.0; 3]; 3]; 3];
        if order >= 2 {
            // η^a_jk = -e1[a][i] x_i,bc η^b_j η^c_k
            let mut q = [[[0.0; 3]; 3]; 3]; // q[i][j][k] = x_i,bc η^b_j η^c_k
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        let mut s = 0.0;
                        for b in 0..dim {
                            for c in 0..dim {
                                s += x[i].h[b][c] * e1[b][j] * e1[c][k];
                            }
                        }
                        q[i][j][k] = s;
                    }
                }
            }
            for a in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        e2[a][j][k] = -(0..dim).map(|i| e1[a][i] * q[i][j][k]).sum::<f64>();
                    }
                }
            }
        }
        let mut e3 = [[[[0.0; 3]; 3]; 3]; 3];
        if order >= 3 {
            for a in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        for l in 0..dim {
                            let mut s = 0.0;
                            for i in 0..dim {
                                let mut r = 0.0;
                                for b in 0..dim {
                                    for c in 0..dim {
                                        let xh = x[i].h[b][c];
                                        r += xh
                                            * (e2[b][j][l] * e1[c][k]
                                                + e1[b][j] * e2[c][k][l]
                                                + e2[b][j][k] * e1[c][l]);
                                        for dd in 0..dim {
                                            r += x[i].t[b][c][dd] * e1[b][j] * e1[c][k] * e1[dd][l];
                                        }
                                    }
                                }
                                s += e1[a][i] * r;
                            }
                            e3[a][j][k][l] = -s;
                        }
                    }
                }
            }
        }
        Ok(InverseMap {
            dim,
            order,
            jac,
            det: d,
            e1,
            e2,
            e3,
        })
    }

    /// Push a reference-coordinate jet to physical coordinates.
    pub fn push(&self, f: &Jet) -> Jet {
        let dim = self.dim;
        let (e1, e2, e3) = (&self.e1, &self.e2, &self.e3);
        let mut r = Jet::constant(f.v);
        for i in 0..dim {
            r.g[i] = (0..dim).map(|a| f.g[a] * e1[a][i]).sum();
        }
        if self.order < 2 {
            return r;
        }
        // p[a][i] = f_ab η^b_i
        let mut p = [[0.0; 3]; 3];
        for a in 0..dim {
            for i in 0..dim {
                p[a][i] = (0..dim).map(|b| f.h[a][b] * e1[b][i]).sum();
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let mut s = 0.0;
                for a in 0..dim {
                    s += p[a][j] * e1[a][i] + f.g[a] * e2[a][i][j];
                }
                r.h[i][j] = s;
                r.h[j][i] = s;
            }
        }
        if self.order < 3 {
            return r;
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let mut s = 0.0;
                    for a in 0..dim {
                        s += f.g[a] * e3[a][i][j][k];
                        for b in 0..dim {
                            s += f.h[a][b]
                                * (e2[a][i][k] * e1[b][j] + e1[a][i] * e2[b][j][k] + e2[a][i][j] * e1[b][k]);
                            for c in 0..dim {
                                s += f.t[a][b][c] * e1[a][i] * e1[b][j] * e1[c][k];
                            }
                        }
                    }
                    r.t[i][j][k] = s;
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Jet of a polynomial-ish test function f(η) = exp(η0) * sin(η1) + η0 η1².
    fn test_jet(e: [f64; 2]) -> Jet {
        let (a, b) = (e[0], e[1]);
        let (ex, s, c) = (a.exp(), b.sin(), b.cos());
        let mut j = Jet::constant(ex * s + a * b * b);
        j.g = [ex * s + b * b, ex * c + 2.0 * a * b, 0.0];
        j.h[0][0] = ex * s;
        j.h[0][1] = ex * c + 2.0 * b;
        j.h[1][0] = j.h[0][1];
        j.h[1][1] = -ex * s + 2.0 * a;
        j.t[0][0][0] = ex * s;
        let t001 = ex * c;
        let t011 = -ex * s + 2.0;
        for (i, jj, k) in [(0, 0, 1), (0, 1, 0), (1, 0, 0)] {
            j.t[i][jj][k] = t001;
        }
        for (i, jj, k) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            j.t[i][jj][k] = t011;
        }
        j.t[1][1][1] = -ex * c;
        j
    }

    /// A curved map x(η) and its jets.
    fn map(e: [f64; 2]) -> [Jet; 3] {
        let (a, b) = (e[0], e[1]);
        let mut x = Jet::constant(a + 0.3 * a * b + 0.1 * b * b * b);
        x.g = [1.0 + 0.3 * b, 0.3 * a + 0.3 * b * b, 0.0];
        x.h[0][1] = 0.3;
        x.h[1][0] = 0.3;
        x.h[1][1] = 0.6 * b;
        x.t[1][1][1] = 0.6;
        let mut y = Jet::constant(b + 0.2 * a * a);
        y.g = [0.4 * a, 1.0, 0.0];
        y.h[0][0] = 0.4;
        [x, y, Jet::default()]
    }

    /// Newton solve for η(x).
    fn eta_of(x: [f64; 2]) -> [f64; 2] {
        let mut e = x;
        for _ in 0..50 {
            let m = map(e);
            let r = [m[0].v - x[0], m[1].v - x[1]];
            let j = [[m[0].g[0], m[0].g[1], 0.0], [m[1].g[0], m[1].g[1], 0.0], [0.0; 3]];
            let inv = inverse(&j, 2).unwrap();
            e[0] -= inv[0][0] * r[0] + inv[0][1] * r[1];
            e[1] -= inv[1][0] * r[0] + inv[1][1] * r[1];
        }
        e
    }

    #[test]
    fn push_forward_matches_finite_differences() {
        let e0 = [0.4, 0.3];
        let m = map(e0);
        let x0 = [m[0].v, m[1].v];
        let inv = InverseMap::new(&m, 2, 3).unwrap();
        let pj = inv.push(&test_jet(e0));
        let f = |x: [f64; 2]| test_jet(eta_of(x)).v;
        let h = 1e-3;
        let dx = |i: usize, s: f64| {
            let mut x = x0;
            x[i] += s;
            x
        };
        for i in 0..2 {
            let fd = (f(dx(i, h)) - f(dx(i, -h))) / (2.0 * h);
            assert!((fd - pj.g[i]).abs() < 1e-6, "grad {i}");
        }
        // Second derivatives from differences of pushed gradients.
        let grad_at = |x: [f64; 2]| {
            let e = eta_of(x);
            InverseMap::new(&map(e), 2, 1).unwrap().push(&test_jet(e)).g
        };
        let hess_at = |x: [f64; 2]| {
            let e = eta_of(x);
            InverseMap::new(&map(e), 2, 2).unwrap().push(&test_jet(e)).h
        };
        for i in 0..2 {
            let gp = grad_at(dx(i, h));
            let gm = grad_at(dx(i, -h));
            let hp = hess_at(dx(i, h));
            let hm = hess_at(dx(i, -h));
            for j in 0..2 {
                let fd = (gp[j] - gm[j]) / (2.0 * h);
                assert!((fd - pj.h[j][i]).abs() < 1e-5, "hess {i}{j}: {fd} vs {}", pj.h[j][i]);
                for k in 0..2 {
                    let fd3 = (hp[j][k] - hm[j][k]) / (2.0 * h);
                    assert!((fd3 - pj.t[j][k][i]).abs() < 1e-4, "third {i}{j}{k}");
                }
            }
        }
    }

    #[test]
    fn product_rule() {
        let a = test_jet([0.2, 0.7]);
        let b = test_jet([0.5, -0.1]);
        let p = a.product(&b, 2, 3);
        assert!((p.v - a.v * b.v).abs() < 1e-15);
        let expect = a.t[0][1][1] * b.v
            + a.h[0][1] * b.g[1] * 2.0
            + a.h[1][1] * b.g[0]
            + a.g[0] * b.h[1][1]
            + a.g[1] * b.h[0][1] * 2.0
            + a.v * b.t[0][1][1];
        assert!((p.t[0][1][1] - expect).abs() < 1e-12);
    }

    #[test]
    fn singular_map_is_rejected() {
        let mut x = [Jet::default(); 3];
        x[0].g = [1.0, 2.0, 0.0];
        x[1].g = [2.0, 4.0, 0.0];
        assert!(matches!(InverseMap::new(&x, 2, 1), Err(Error::SingularJacobian { .. })));
    }
}
