//! Compressed sparse row storage for symmetric matrices (both triangles
//! stored, column indices sorted within each row).

use std::io::{self, Write};

use faer::sparse::{SparseColMat, SymbolicSparseColMat};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCsr {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricCsr {
    /// Builds from raw CSR arrays. Columns must be sorted within each row.
    pub(crate) fn from_raw(
        dim: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), dim + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        debug_assert!((0..dim).all(|r| col_idx[row_ptr[r]..row_ptr[r + 1]]
            .windows(2)
            .all(|w| w[0] < w[1])));
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sums duplicate `(row, col, value)` entries. The caller supplies both
    /// `(i, j)` and `(j, i)` for off-diagonal terms.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(
                r < dim && c < dim,
                "triplet ({r}, {c}) out of bounds for {dim}"
            );
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::from_raw(dim, row_ptr, col_idx, values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![0; dim + 1], Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *out = acc;
        }
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                let mut acc = 0.0;
                for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[p] * x[self.col_idx[p]];
                }
                acc * x[r]
            })
            .sum()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `self + scale · other`, sparsity patterns merged.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for r in 0..self.dim {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                        col_idx.push(ca);
                        values.push(va + scale * vb);
                        a.next();
                        b.next();
                    }
                    (Some((ca, va)), Some((cb, _))) if ca < cb => {
                        col_idx.push(ca);
                        values.push(va);
                        a.next();
                    }
                    (Some(_), Some((cb, vb))) | (None, Some((cb, vb))) => {
                        col_idx.push(cb);
                        values.push(scale * vb);
                        b.next();
                    }
                    (Some((ca, va)), None) => {
                        col_idx.push(ca);
                        values.push(va);
                        a.next();
                    }
                    (None, None) => break,
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::from_raw(self.dim, row_ptr, col_idx, values)
    }

    /// `self + shift · I`; every diagonal entry must already be stored.
    pub fn with_diagonal_shift(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            let range = out.row_ptr[r]..out.row_ptr[r + 1];
            let pos = out.col_idx[range.clone()]
                .binary_search(&r)
                .expect("diagonal entry missing from pattern");
            out.values[range.start + pos] += shift;
        }
        out
    }

    /// Entries with `row >= col`, in row-major order.
    pub fn lower_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            self.row(r)
                .take_while(move |&(c, _)| c <= r)
                .map(move |(c, v)| (r, c, v))
        })
    }

    /// Lower triangle of `self + shift · I` in faer's column-compressed form.
    ///
    /// By symmetry, row `c` restricted to columns `>= c` is column `c` of the
    /// lower triangle.
    pub fn to_faer_lower(&self, shift: f64) -> SparseColMat<usize, f64> {
        let mut col_ptr = Vec::with_capacity(self.dim + 1);
        let mut row_idx = Vec::with_capacity(self.nnz() / 2 + self.dim);
        let mut values = Vec::with_capacity(self.nnz() / 2 + self.dim);
        col_ptr.push(0);
        for c in 0..self.dim {
            for (r, v) in self.row(c).filter(|&(r, _)| r >= c) {
                row_idx.push(r);
                values.push(if r == c { v + shift } else { v });
            }
            col_ptr.push(row_idx.len());
        }
        let symbolic =
            SymbolicSparseColMat::new_checked(self.dim, self.dim, col_ptr, None, row_idx);
        SparseColMat::new(symbolic, values)
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// Coordinate text dump: a header line followed by one `row col value`
    /// line per lower-triangle entry, 0-based, 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, mut out: W, header: &str) -> io::Result<()> {
        writeln!(out, "{header}")?;
        for (r, c, v) in self.lower_triplets() {
            writeln!(out, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }

    pub fn lower_nnz(&self) -> usize {
        self.lower_triplets().count()
    }
}
