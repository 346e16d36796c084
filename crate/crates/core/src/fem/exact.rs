//! Manufactured solutions with derivatives up to fourth order.

use serde::{Deserialize, Serialize};

/// Exact solution `u(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manufactured {
    /// `amp · Π_d sin(k_d x_d + phase_d)` over the first `dim` axes.
    Trig { amp: f64, k: [f64; 3], phase: [f64; 3] },
    /// `c + g·x + ½ xᵀHx`.
    Quadratic { c: f64, g: [f64; 3], h: [[f64; 3]; 3] },
}

/// Value, gradient, Hessian, ∇Δu, Δu and Δ²u at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactJet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
    pub grad_lap: [f64; 3],
    pub lap: f64,
    pub bilap: f64,
}

impl Manufactured {
    pub fn linear(c: f64, g: [f64; 3]) -> Self {
        Manufactured::Quadratic { c, g, h: [[0.0; 3]; 3] }
    }

    /// `sin(3πx)` in 1D.
    pub fn sine_1d() -> Self {
        Self::trig(1.0, [3.0 * std::f64::consts::PI, 0.0, 0.0], [0.0; 3])
    }

    pub fn trig(amp: f64, k: [f64; 3], phase: [f64; 3]) -> Self {
        Manufactured::Trig { amp, k, phase }
    }

    pub fn eval(&self, x: [f64; 3], dim: usize) -> ExactJet {
        match *self {
            Manufactured::Quadratic { c, g, h } => {
                let mut out = ExactJet { v: c, ..Default::default() };
                for i in 0..dim {
                    out.v += g[i] * x[i];
                    out.g[i] = g[i];
                    for j in 0..dim {
                        out.v += 0.5 * h[i][j] * x[i] * x[j];
                        out.g[i] += h[i][j] * x[j];
                        out.h[i][j] = h[i][j];
                    }
                    out.lap += h[i][i];
                }
                out
            }
            Manufactured::Trig { amp, k, phase } => {
                // d[i][n] = n-th derivative of the i-th factor.
                let mut d = [[1.0, 0.0, 0.0, 0.0, 0.0]; 3];
                for i in 0..dim {
                    let a = k[i] * x[i] + phase[i];
                    let (s, c) = a.sin_cos();
                    let base = [s, c, -s, -c];
                    for (n, v) in d[i].iter_mut().enumerate() {
                        *v = k[i].powi(n as i32) * base[n % 4];
                    }
                }
                // Partial derivative with orders `m` per axis.
                let part = |m: [usize; 3]| amp * (0..dim).map(|i| d[i][m[i]]).product::<f64>();
                let unit = |i: usize, n: usize| {
                    let mut m = [0; 3];
                    m[i] = n;
                    m
                };
                let mut out = ExactJet { v: part([0; 3]), ..Default::default() };
                for i in 0..dim {
                    out.g[i] = part(unit(i, 1));
                    for j in 0..dim {
                        let mut m = unit(i, 1);
                        m[j] += 1;
                        out.h[i][j] = part(m);
                    }
                    out.lap += part(unit(i, 2));
                    for j in 0..dim {
                        let mut m = unit(j, 2);
                        m[i] += 1;
                        out.grad_lap[i] += part(m);
                        let mut m = unit(i, 2);
                        m[j] += 2;
                        out.bilap += part(m);
                    }
                }
                out
            }
        }
    }
}
