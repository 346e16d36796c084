//! Direct solver: reverse Cuthill–McKee ordering and skyline Cholesky.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn rcm(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if seen[seed] {
            continue;
        }
        seen[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// `A = L Lᵀ` in variable-band (skyline) row storage after an RCM permutation.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let perm = rcm(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut l = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (c, v) = a.row(old);
            for (&j, &x) in c.iter().zip(v) {
                let jn = inv[j];
                if jn <= new {
                    l[start[new] + jn - first[new]] += x;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let dot: f64 = if k0 < j {
                    let a = &l[si + k0 - fi..si + j - fi];
                    let b = &l[sj + k0 - fj..sj + j - fj];
                    a.iter().zip(b).map(|(x, y)| x * y).sum()
                } else {
                    0.0
                };
                let ljj = l[sj + j - fj];
                l[si + j - fi] = (l[si + j - fi] - dot) / ljj;
            }
            let row = &l[si..si + i - fi];
            let diag = l[si + i - fi];
            let d = diag - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * diag.abs()) {
                return Err(Error::SolverBreakdown { row: perm[i], pivot: d });
            }
            l[si + i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky { perm, first, start, l })
    }

    /// Stored entries of the factor.
    pub fn profile(&self) -> usize {
        self.l.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let row = &self.l[si..si + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.l[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.l[si + i - fi];
            let yi = y[i];
            for (k, x) in self.l[si..si + i - fi].iter().enumerate() {
                y[fi + k] -= x * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `A x = b` and polishes with iterative refinement; returns the
/// solution and the final relative residual.
pub fn solve_spd(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let f = SkylineCholesky::factor(a)?;
    let mut x = f.solve(b);
    let nb = norm(b).max(f64::MIN_POSITIVE);
    let mut res = f64::INFINITY;
    for _ in 0..3 {
        let r: Vec<f64> = a.mul(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        res = norm(&r) / nb;
        if res < 1e-13 {
            break;
        }
        let dx = f.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    Ok((x, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect())
            .collect();
        let mut m = CsrMatrix::from_rows(rows);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
                m.add(i - 1, i, -1.0);
            }
        }
        m
    }

    #[test]
    fn identity_system() {
        let (x, r) = solve_spd(&CsrMatrix::identity(4), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(r < 1e-15);
    }

    #[test]
    fn tridiagonal_system() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let (x, r) = solve_spd(&a, &b).unwrap();
        assert!(r < 1e-12);
        let ax = a.mul(&x);
        for (p, q) in ax.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10);
        }
        let f = SkylineCholesky::factor(&a).unwrap();
        assert!(f.profile() <= 2 * 50);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let mut a = laplace_1d(3);
        a.add(1, 1, -5.0);
        assert!(matches!(SkylineCholesky::factor(&a), Err(Error::SolverBreakdown { .. })));
    }
}
