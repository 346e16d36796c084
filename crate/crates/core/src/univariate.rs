//! Univariate B-splines, the cardinal ramps used by the blending weights, and
//! one-dimensional SB-splines around a C0 breakpoint.

use crate::bernstein::bernstein;
use crate::error::{Error, Result};

const KNOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        if knots.len() < degree + 2 {
            return Err(Error::InvalidArgument(format!(
                "{} knots cannot carry a degree-{degree} basis",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) || knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidArgument("knots must be finite and non-decreasing".into()));
        }
        let kv = Self { knots, degree };
        let (a, b) = (kv.start(), kv.end());
        for (x, m) in kv.breakpoints() {
            let limit = if x == a || x == b { degree + 1 } else { degree };
            if m > limit {
                return Err(Error::IllegalMultiplicity(format!(
                    "knot {x} has multiplicity {m} > {limit}"
                )));
            }
        }
        if kv.knots[kv.knots.len() - 1] <= kv.knots[0] {
            return Err(Error::InvalidArgument("knot vector spans an empty interval".into()));
        }
        Ok(kv)
    }

    /// Open uniform knot vector with `n_elements` spans on `[a, b]`.
    pub fn open_uniform(degree: usize, n_elements: usize, a: f64, b: f64) -> Result<Self> {
        let mut knots = vec![a; degree];
        knots.extend((0..=n_elements).map(|i| a + (b - a) * i as f64 / n_elements as f64));
        knots.extend(std::iter::repeat(b).take(degree));
        Self::new(knots, degree)
    }

    /// Open uniform knot vector whose midpoint knot is repeated `degree`
    /// times (a C0 kink); `n_elements` must be even.
    pub fn with_midpoint_kink(degree: usize, n_elements: usize, a: f64, b: f64) -> Result<Self> {
        if n_elements % 2 != 0 {
            return Err(Error::InvalidArgument("kink needs an even element count".into()));
        }
        let mut kv = Self::open_uniform(degree, n_elements, a, b)?;
        let mid = 0.5 * (a + b);
        let pos = kv.knots.iter().position(|&k| (k - mid).abs() < KNOT_TOL).unwrap();
        kv.knots[pos] = mid;
        for _ in 1..degree {
            kv.knots.insert(pos, mid);
        }
        Ok(kv)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn start(&self) -> f64 {
        self.knots[self.degree]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - self.degree - 1]
    }

    /// Distinct knot values with multiplicities.
    pub fn breakpoints(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((x, m)) if (*x - k).abs() < KNOT_TOL => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Non-empty spans `[x_i, x_{i+1}]` of the parametric domain.
    pub fn elements(&self) -> Vec<(f64, f64)> {
        let bp: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .map(|b| b.0)
            .filter(|&x| x >= self.start() - KNOT_TOL && x <= self.end() + KNOT_TOL)
            .collect();
        bp.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn multiplicity(&self, x: f64) -> usize {
        self.knots.iter().filter(|&&k| (k - x).abs() < KNOT_TOL).count()
    }

    /// Index `k` with `t_k <= t < t_{k+1}`, clamped to the last span at the end.
    pub fn span(&self, t: f64) -> Result<usize> {
        let (a, b) = (self.start(), self.end());
        if !(t >= a - KNOT_TOL && t <= b + KNOT_TOL) {
            return Err(Error::OutOfRange { value: t, lo: a, hi: b });
        }
        let n = self.num_basis();
        if t >= b {
            let mut k = n - 1;
            while self.knots[k] >= b && k > self.degree {
                k -= 1;
            }
            return Ok(k);
        }
        let mut k = self.degree;
        while k + 1 < n && self.knots[k + 1] <= t {
            k += 1;
        }
        Ok(k)
    }
}

/// Non-zero basis functions at `t`: first index and, per function, the value
/// and derivatives up to order 3.
pub fn eval_basis_ders(kv: &KnotVector, t: f64) -> Result<(usize, Vec<[f64; 4]>)> {
    let (lo, hi) = (kv.knots[0], kv.knots[kv.knots.len() - 1]);
    if (t < kv.start() - KNOT_TOL || t > kv.end() + KNOT_TOL) && t >= lo && t <= hi {
        // Outside the partition-of-unity domain: evaluate on a clamped extension
        // and keep only the genuine functions.
        let p = kv.degree;
        let mut knots = vec![lo; p];
        knots.extend_from_slice(&kv.knots);
        knots.extend(std::iter::repeat(hi).take(p));
        let ext = KnotVector { knots, degree: p };
        let (first, ders) = eval_basis_ders(&ext, t)?;
        let n = kv.num_basis();
        let keep: Vec<usize> = (0..ders.len()).filter(|&j| first + j >= p && first + j < p + n).collect();
        let start = first + keep[0] - p;
        return Ok((start, keep.iter().map(|&j| ders[j]).collect()));
    }
    let p = kv.degree;
    let u = &kv.knots;
    let k = kv.span(t)?;
    let t = t.clamp(kv.start(), kv.end());
    // Triangular table of basis values for degrees 0..=p (de Boor / Piegl-Tiller A2.3).
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - u[k + 1 - j];
        right[j] = u[k + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let nd = 3.min(p);
    let mut ders = vec![[0.0; 4]; p + 1];
    for (j, row) in ders.iter_mut().enumerate() {
        row[0] = ndu[j][p];
    }
    let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0].iter_mut().for_each(|x| *x = 0.0);
        a[0][0] = 1.0;
        for kk in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - kk as isize;
            let pk = p - kk;
            if r >= kk {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { kk - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                d += a[s2][kk] * ndu[r][pk];
            }
            ders[r][kk] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for kk in 1..=nd {
        for row in ders.iter_mut() {
            row[kk] *= fac;
        }
        fac *= (p - kk) as f64;
    }
    Ok((k - p, ders))
}

/// `(index, value)` pairs of the `order`-th derivative of the non-zero basis
/// functions at `t`.
pub fn eval_bsplines(kv: &KnotVector, t: f64, order: usize) -> Result<Vec<(usize, f64)>> {
    if order > 3 {
        return Err(Error::InvalidArgument("derivative order above 3".into()));
    }
    let (first, ders) = eval_basis_ders(kv, t)?;
    Ok(ders.iter().enumerate().map(|(j, d)| (first + j, d[order])).collect())
}

/// Cardinal quadratic B-spline on knots (0,1,2,3) and its derivatives.
pub fn cardinal_quadratic(x: f64) -> [f64; 4] {
    if x <= 0.0 || x >= 3.0 {
        [0.0; 4]
    } else if x < 1.0 {
        [0.5 * x * x, x, 1.0, 0.0]
    } else if x < 2.0 {
        let y = x - 1.5;
        [0.75 - y * y, -2.0 * y, -2.0, 0.0]
    } else {
        let y = 3.0 - x;
        [0.5 * y * y, -y, 1.0, 0.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampKind {
    /// Equal to one near 0, decaying to zero at 1.
    WI,
    /// `1 - wI`.
    WIII,
}

/// Ramp `wI(t) = 1 - N(3t-1) - N(3t-2)` (zero for `t >= 1`) or its complement;
/// returns the value and derivatives up to order 3.
pub fn ramp(t: f64, kind: RampKind) -> [f64; 4] {
    let a = cardinal_quadratic(3.0 * t - 1.0);
    let b = cardinal_quadratic(3.0 * t - 2.0);
    let mut w = [1.0 - a[0] - b[0], 0.0, 0.0, 0.0];
    let mut s = 3.0;
    for k in 1..4 {
        w[k] = -s * (a[k] + b[k]);
        s *= 3.0;
    }
    if t >= 1.0 {
        w = [0.0; 4];
    }
    match kind {
        RampKind::WI => w,
        RampKind::WIII => [1.0 - w[0], -w[1], -w[2], -w[3]],
    }
}

/// Convenience wrapper around [`ramp`].
pub fn eval_ramp(t: f64, kind: RampKind, order: usize) -> f64 {
    ramp(t, kind)[order.min(3)]
}

/// One-dimensional SB-splines: `{w^B B_i} ∪ {w^Q Q_j}`.
#[derive(Debug, Clone)]
pub struct Basis1D {
    pub kv: KnotVector,
    pub x_ep: f64,
    /// B-splines entering `w^Q` (those at most C0 at the extraordinary point).
    pub excluded: Vec<bool>,
    /// Bernstein domain = support of `w^Q`.
    pub domain: (f64, f64),
    pub bernstein_degree: usize,
}

pub fn build_1d_sbsplines(kv: &KnotVector, bernstein_degree: usize) -> Result<Basis1D> {
    let p = kv.degree;
    if !(2..=3).contains(&p) || bernstein_degree != p {
        return Err(Error::InvalidArgument(format!(
            "degrees must satisfy p_Q = p_B in {{2, 3}} (got p_B = {p}, p_Q = {bernstein_degree})"
        )));
    }
    let (a, b) = (kv.start(), kv.end());
    let kinks: Vec<f64> = kv
        .breakpoints()
        .into_iter()
        .filter(|&(x, m)| x > a && x < b && m >= p)
        .map(|(x, _)| x)
        .collect();
    let x_ep = match kinks.len() {
        0 => return Err(Error::NoExtraordinaryPoint),
        1 => kinks[0],
        n => return Err(Error::MultipleExtraordinaryPoints(n)),
    };
    let u = kv.knots();
    let excluded: Vec<bool> = (0..kv.num_basis())
        .map(|i| u[i..=i + p + 1].iter().filter(|&&k| (k - x_ep).abs() < KNOT_TOL).count() >= p)
        .collect();
    let lo = (0..excluded.len()).filter(|&i| excluded[i]).map(|i| u[i]).fold(f64::INFINITY, f64::min);
    let hi = (0..excluded.len())
        .filter(|&i| excluded[i])
        .map(|i| u[i + p + 1])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Basis1D {
        kv: kv.clone(),
        x_ep,
        excluded,
        domain: (lo, hi),
        bernstein_degree,
    })
}

impl Basis1D {
    pub fn num_bsplines(&self) -> usize {
        self.kv.num_basis()
    }

    pub fn len(&self) -> usize {
        self.num_bsplines() + self.bernstein_degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `w^B` with derivatives up to order 3.
    pub fn weight_b(&self, x: f64) -> Result<[f64; 4]> {
        let (first, ders) = eval_basis_ders(&self.kv, x)?;
        let mut w = [0.0; 4];
        for (j, d) in ders.iter().enumerate() {
            if !self.excluded[first + j] {
                for k in 0..4 {
                    w[k] += d[k];
                }
            }
        }
        Ok(w)
    }

    /// Non-zero functions at `x` with derivatives up to order 3. B-spline
    /// entries come first with their spline index; Bernstein entries follow
    /// at `num_bsplines() + j`.
    pub fn eval(&self, x: f64) -> Result<Vec<(usize, [f64; 4])>> {
        let (first, ders) = eval_basis_ders(&self.kv, x)?;
        let wb = self.weight_b(x)?;
        let wq = [1.0 - wb[0], -wb[1], -wb[2], -wb[3]];
        let mut out = Vec::new();
        for (j, d) in ders.iter().enumerate() {
            out.push((first + j, leibniz(&wb, d)));
        }
        let (lo, hi) = self.domain;
        if x > lo && x < hi {
            let len = hi - lo;
            let q = bernstein(self.bernstein_degree, (x - lo) / len);
            for (j, row) in q.iter().enumerate() {
                let mut scaled = *row;
                let mut s = 1.0;
                for v in scaled.iter_mut().skip(1) {
                    s /= len;
                    *v *= s;
                }
                out.push((self.num_bsplines() + j, leibniz(&wq, &scaled)));
            }
        }
        Ok(out)
    }
}

/// Derivatives up to order 3 of a product.
pub fn leibniz(f: &[f64; 4], g: &[f64; 4]) -> [f64; 4] {
    [
        f[0] * g[0],
        f[1] * g[0] + f[0] * g[1],
        f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
        f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
    ]
}

/// Inserts `values` one by one (Boehm). Returns the refined knot vector and
/// the dense fine×coarse matrix mapping coarse control values to fine ones.
pub fn knot_insert(kv: &KnotVector, values: &[f64]) -> Result<(KnotVector, Vec<Vec<f64>>)> {
    let n0 = kv.num_basis();
    let mut transfer: Vec<Vec<f64>> = (0..n0)
        .map(|i| (0..n0).map(|j| f64::from(i == j)).collect())
        .collect();
    let mut cur = kv.clone();
    let p = kv.degree;
    for &x in values {
        if !(x > cur.start() && x < cur.end()) {
            return Err(Error::OutOfRange {
                value: x,
                lo: cur.start(),
                hi: cur.end(),
            });
        }
        if cur.multiplicity(x) + 1 > p {
            return Err(Error::IllegalMultiplicity(format!(
                "inserting {x} would raise its multiplicity above {p}"
            )));
        }
        let u = cur.knots.clone();
        let k = (0..u.len() - 1).rfind(|&i| u[i] <= x).unwrap();
        let n = cur.num_basis();
        let mut next = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let row: Vec<f64> = if i + p <= k {
                transfer[i].clone()
            } else if i > k {
                transfer[i - 1].clone()
            } else {
                let alpha = (x - u[i]) / (u[i + p] - u[i]);
                transfer[i]
                    .iter()
                    .zip(&transfer[i - 1])
                    .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                    .collect()
            };
            next.push(row);
        }
        transfer = next;
        let mut knots = u;
        knots.insert(k + 1, x);
        cur = KnotVector::new(knots, p)?;
    }
    Ok((cur, transfer))
}
