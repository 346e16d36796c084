//! Bernstein polynomials and their derivatives.

use crate::jet::{tensor_jet, Jet};

/// Values and derivatives up to order 3 of the degree-`p` Bernstein basis on
/// `[0, 1]` at `t`; entry `[j][k]` is the k-th derivative of the j-th function.
pub fn bernstein(p: usize, t: f64) -> Vec<[f64; 4]> {
    let mut out = vec![[0.0; 4]; p + 1];
    for k in 0..=3.min(p) {
        // k-th derivative = p!/(p-k)! Σ_i (-1)^(k-i) C(k,i) B^{p-k}_{j-i}
        let lower = bernstein_values(p - k, t);
        let mut fall = 1.0;
        for m in 0..k {
            fall *= (p - m) as f64;
        }
        for (j, row) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..=k {
                if j >= i && j - i <= p - k {
                    let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * binom(k, i) * lower[j - i];
                }
            }
            row[k] = fall * s;
        }
    }
    out
}

fn bernstein_values(p: usize, t: f64) -> Vec<f64> {
    (0..=p)
        .map(|j| binom(p, j) * t.powi(j as i32) * (1.0 - t).powi((p - j) as i32))
        .collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Quadratic Bernstein values and derivatives, `[order][j]`.
#[inline]
pub fn quad(t: f64) -> [[f64; 3]; 4] {
    let s = 1.0 - t;
    [
        [s * s, 2.0 * s * t, t * t],
        [-2.0 * s, 2.0 - 4.0 * t, 2.0 * t],
        [2.0, -4.0, 2.0],
        [0.0; 3],
    ]
}

/// Bernstein coefficients of a quadratic from its values at 0, 1/2, 1.
#[inline]
pub fn quad_coefficients(f0: f64, fh: f64, f1: f64) -> [f64; 3] {
    [f0, 2.0 * fh - 0.5 * (f0 + f1), f1]
}

/// Jets (in η) of the tensor-product quadratic Bernstein basis on the unit
/// square/cube, ordered with the first axis fastest.
pub fn tensor_quad_jets(dim: usize, eta: [f64; 3], order: usize) -> Vec<Jet> {
    let tabs: Vec<[[f64; 3]; 4]> = (0..dim).map(|d| quad(eta[d])).collect();
    let n = 3usize.pow(dim as u32);
    (0..n)
        .map(|j| {
            let mut axes = [[1.0, 0.0, 0.0, 0.0]; 3];
            let mut r = j;
            for (d, tab) in tabs.iter().enumerate() {
                let a = r % 3;
                r /= 3;
                axes[d] = [tab[0][a], tab[1][a], tab[2][a], tab[3][a]];
            }
            tensor_jet(dim, &axes, order)
        })
        .collect()
}
