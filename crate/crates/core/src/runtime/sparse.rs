use std::fmt::Write as _;

use super::RuntimeError;

/// Triplet accumulator. Duplicate entries are summed on [`finalize`].
///
/// [`finalize`]: SparseBuilder::finalize
#[derive(Clone, Debug, Default)]
pub struct SparseBuilder {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, triplets: Vec::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.triplets.push((row, col, value));
    }

    /// Add a dense row-major block at the given global rows and columns.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], block: &[f64]) {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.add(r, c, block[i * cols.len() + j]);
            }
        }
    }

    pub fn finalize(mut self) -> CsrMatrix {
        self.triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; self.rows + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last = None;
        for (r, c, v) in self.triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix { rows: n, cols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Stored `(col, value)` pairs of one row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.rows) {
            let range = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.col_idx[range.clone()].iter().zip(&self.values[range]).map(|(&c, v)| v * x[c]).sum();
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            out[r][c] = v;
        }
        out
    }

    /// MatrixMarket coordinate format, 1-based, `general` symmetry.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.nnz());
        for (r, c, v) in self.entries() {
            let _ = writeln!(s, "{} {} {:e}", r + 1, c + 1, v);
        }
        s
    }

    pub fn from_matrix_market(text: &str) -> Result<CsrMatrix, RuntimeError> {
        let bad = |line: usize, message: &str| RuntimeError::MatrixFormat { line, message: message.into() };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h.starts_with("%%MatrixMarket matrix coordinate real") => {}
            _ => return Err(bad(1, "expected a MatrixMarket coordinate real header")),
        }
        let mut lines = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
        let (sline, size) = lines.next().ok_or_else(|| bad(2, "missing size line"))?;
        let dims: Vec<usize> = size.split_whitespace().map(|s| s.parse().map_err(|_| bad(sline, "bad size"))).collect::<Result<_, _>>()?;
        let [rows, cols, nnz] = dims[..] else { return Err(bad(sline, "expected 'rows cols nnz'")) };
        let mut builder = SparseBuilder::new(rows, cols);
        for _ in 0..nnz {
            let (line, l) = lines.next().ok_or_else(|| bad(sline, "missing entries"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(line, "expected 'row col value'"));
            }
            let r: usize = f[0].parse().map_err(|_| bad(line, "bad row"))?;
            let c: usize = f[1].parse().map_err(|_| bad(line, "bad column"))?;
            let v: f64 = f[2].parse().map_err(|_| bad(line, "bad value"))?;
            if r == 0 || c == 0 || r > rows || c > cols {
                return Err(bad(line, "index out of range"));
            }
            builder.add(r - 1, c - 1, v);
        }
        Ok(builder.finalize())
    }
}
