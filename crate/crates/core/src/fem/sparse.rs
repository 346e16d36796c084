//! Compressed sparse rows with a fixed pattern.

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sorted, deduplicated column lists.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows {
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_rows((0..n).map(|i| vec![i]).collect());
        m.vals.fill(1.0);
        m
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (c, _) = self.row(i);
        c.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.vals[k])
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside the sparsity pattern"));
        self.vals[k] += v;
    }

    /// Adds a dense block `m` (row-major) at the index set `idx`.
    pub fn add_block(&mut self, idx: &[usize], m: &[f64]) {
        let n = idx.len();
        for (a, &i) in idx.iter().enumerate() {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for (b, &j) in idx.iter().enumerate() {
                let v = m[a * n + b];
                if v != 0.0 {
                    let k = start + self.cols[start..end].binary_search(&j).expect("entry outside pattern");
                    self.vals[k] += v;
                }
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A − Aᵀ| / max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Row sums (the operator applied to the constant vector).
    pub fn row_sums(&self) -> Vec<f64> {
        self.mul(&vec![1.0; self.n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_assembly_and_product() {
        let mut m = CsrMatrix::from_rows(vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        m.add_block(&[0, 1], &[2.0, -1.0, -1.0, 2.0]);
        m.add_block(&[1, 2], &[2.0, -1.0, -1.0, 2.0]);
        assert_eq!(m.mul(&[1.0, 1.0, 1.0]), vec![1.0, 2.0, 1.0]);
        assert_eq!(m.get(1, 1), 4.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.asymmetry(), 0.0);
    }
}
