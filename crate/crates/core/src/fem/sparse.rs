/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the pattern produced by the given element DOF lists.
    pub fn from_element_pattern<'a, I>(n: usize, elements: I) -> Self
    where
        I: IntoIterator<Item = &'a [Option<usize>]>,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for r in dofs.iter().flatten() {
                rows[*r].extend(dofs.iter().flatten());
            }
        }
        Self::from_rows(n, rows)
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col.extend_from_slice(r);
            row_ptr.push(col.len());
        }
        let nnz = col.len();
        CsrMatrix { n, row_ptr, col, val: vec![0.0; nnz] }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n, row_ptr: (0..=n).collect(), col: (0..n).collect(), val: vec![1.0; n] }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.val.copy_from_slice(d);
        m
    }

    /// Builds from a dense row-major square matrix, keeping exact nonzeros.
    pub fn from_dense(n: usize, a: &[f64]) -> Self {
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = a[i * n + j];
                if v != 0.0 {
                    col.push(j);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    #[inline]
    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let s = self.row_ptr[i];
        let e = self.row_ptr[i + 1];
        self.col[s..e].binary_search(&j).ok().map(|p| s + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.val[p])
    }

    /// Adds `scale * mat` (row-major, `dofs.len()` square) into the pattern.
    pub fn add_element(&mut self, dofs: &[Option<usize>], mat: &[f64], scale: f64) {
        let k = dofs.len();
        for (a, ra) in dofs.iter().enumerate() {
            let Some(r) = *ra else { continue };
            for (b, cb) in dofs.iter().enumerate() {
                let Some(c) = *cb else { continue };
                let p = self.position(r, c).expect("entry outside assembled pattern");
                self.val[p] += scale * mat[a * k + b];
            }
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[p] * x[self.col[p]];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.val.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `a·self + b·other` on the union pattern.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for i in 0..self.n {
            let (mut p, pe) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut q, qe) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.col[p] } else { usize::MAX };
                let cq = if q < qe { other.col[q] } else { usize::MAX };
                if cp == cq {
                    col.push(cp);
                    val.push(a * self.val[p] + b * other.val[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    col.push(cp);
                    val.push(a * self.val[p]);
                    p += 1;
                } else {
                    col.push(cq);
                    val.push(b * other.val[q]);
                    q += 1;
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n: self.n, row_ptr, col, val }
    }

    /// Principal submatrix on `keep` (given in increasing order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for &old in keep {
            for p in self.row_ptr[old]..self.row_ptr[old + 1] {
                let c = map[self.col[p]];
                if c != usize::MAX {
                    col.push(c);
                    val.push(self.val[p]);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n: keep.len(), row_ptr, col, val }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[i * self.n + self.col[p]] = self.val[p];
            }
        }
        a
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut big = 0.0f64;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[p];
                big = big.max(self.val[p].abs());
                worst = worst.max((self.val[p] - self.get(j, i)).abs());
            }
        }
        if big == 0.0 {
            0.0
        } else {
            worst / big
        }
    }

    /// Half bandwidth `max |i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                bw = bw.max(i.abs_diff(self.col[p]));
            }
        }
        bw
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
