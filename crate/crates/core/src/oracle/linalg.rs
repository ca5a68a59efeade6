//! Dense complex matrices for the discretized transfer-matrix operators.
//!
//! Row-major storage. The product kernel parallelizes over output rows with
//! rayon while keeping each element's reduction order fixed, so results are
//! bit-identical regardless of thread count. Operator norms are largest
//! singular values, obtained from power iteration on `A* A` with a
//! deterministic start vector.

use num_complex::Complex64;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("singular linear system (pivot magnitude {pivot:.3e} below threshold)")]
    Singular { pivot: f64 },
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `C = self * b`. Rayon over output rows; the k-reduction per element is
    /// sequential, so the result does not depend on the thread count. Exact
    /// zeros in `self` are skipped, which also preserves the exact-zero
    /// structure of products of half-line-supported kernels.
    pub fn matmul(&self, b: &CMat) -> CMat {
        assert_eq!(self.cols, b.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, b.cols);
        let bc = b.cols;
        out.data
            .par_chunks_mut(bc)
            .enumerate()
            .for_each(|(i, orow)| {
                for kk in 0..self.cols {
                    let a = self.data[i * self.cols + kk];
                    if a == ZERO {
                        continue;
                    }
                    let brow = &b.data[kk * bc..(kk + 1) * bc];
                    for (o, &bv) in orow.iter_mut().zip(brow) {
                        *o += a * bv;
                    }
                }
            });
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                row.iter().zip(v).map(|(a, x)| a * x).sum()
            })
            .collect()
    }

    /// `v* -> A* v` (conjugate-transpose application).
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![ZERO; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == ZERO {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    /// `self += s * other`.
    pub fn add_assign_scaled(&mut self, other: &CMat, s: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// New matrix with row `i` multiplied by `d[i]`.
    pub fn rows_scaled(&self, d: &[Complex64]) -> CMat {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for i in 0..self.rows {
            let s = d[i];
            for v in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *v *= s;
            }
        }
        out
    }

    /// New matrix with column `j` multiplied by `d[j]`.
    pub fn cols_scaled(&self, d: &[Complex64]) -> CMat {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, s) in out.data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(d) {
                *v *= s;
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value by power iteration on `A* A`. Deterministic:
    /// fixed start vector, with canonical-basis restarts if it happens to
    /// lie in the null space.
    pub fn spectral_norm(&self) -> f64 {
        if self.frobenius() == 0.0 {
            return 0.0;
        }
        let n = self.cols;
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64;
                Complex64::new(1.0 + 0.5 * (0.7390851 * t).sin(), 0.25 * (0.3819660 * t).cos())
            })
            .collect();
        normalize(&mut v);
        let mut sigma = 0.0f64;
        let mut restart = 0usize;
        for _ in 0..300 {
            let av = self.matvec(&v);
            let s = vec_norm(&av);
            if s == 0.0 {
                // v happens to be annihilated; restart from a basis vector.
                // Trying each in turn probes every column, so a nonzero
                // matrix always escapes.
                if restart >= n {
                    return sigma;
                }
                v = vec![ZERO; n];
                v[restart] = Complex64::new(1.0, 0.0);
                restart += 1;
                continue;
            }
            let mut w = self.adjoint_matvec(&av);
            let wn = vec_norm(&w);
            if wn == 0.0 {
                return s.max(sigma);
            }
            for x in &mut w {
                *x /= wn;
            }
            let converged = (s - sigma).abs() <= 1e-13 * s.max(1e-300);
            sigma = s;
            v = w;
            if converged {
                break;
            }
        }
        sigma
    }

    /// Solve `self * x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = rhs.to_vec();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let mut best = col;
            let mut best_mag = a[col * n + col].norm();
            for r in col + 1..n {
                let m = a[r * n + col].norm();
                if m > best_mag {
                    best = r;
                    best_mag = m;
                }
            }
            if best_mag <= 1e-14 * scale {
                return Err(LinalgError::Singular { pivot: best_mag });
            }
            if best != col {
                for c in 0..n {
                    a.swap(col * n + c, best * n + c);
                }
                x.swap(col, best);
            }
            let piv = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / piv;
                if factor == ZERO {
                    continue;
                }
                for c in col + 1..n {
                    let v = a[col * n + c];
                    a[r * n + c] -= factor * v;
                }
                let xc = x[col];
                x[r] -= factor * xc;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= a[i * n + j] * x[j];
            }
            x[i] = acc / a[i * n + i];
        }
        Ok(x)
    }

    /// Assemble a 2x2 block matrix.
    pub fn from_blocks(blocks: [[&CMat; 2]; 2]) -> CMat {
        let n = blocks[0][0].rows;
        for row in &blocks {
            for b in row {
                assert_eq!((b.rows, b.cols), (n, n), "blocks must be square and equal-sized");
            }
        }
        let mut out = CMat::zeros(2 * n, 2 * n);
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, b) in row.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        out.set(bi * n + i, bj * n + j, b.at(i, j));
                    }
                }
            }
        }
        out
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}
