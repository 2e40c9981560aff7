//! Small dense matrices for affine slopes `M ∈ R^{n×N}` and determinant windows.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major entries; `None` if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    /// Outer product `a ⊗ b` (rank one).
    pub fn outer(a: &[T], b: &[T]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                m.data[i * b.len() + j] = ai * bj;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Writes `scale · M k` for an integer vector `k` into `out`.
    #[inline]
    pub fn apply_int(&self, k: &[i64], scale: T, out: &mut [T]) {
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let mut acc = T::zero();
            for c in 0..self.cols {
                acc += self.data[r * self.cols + c] * T::from_i64(k[c]).unwrap();
            }
            *o = acc * scale;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|r| (0..self.cols).fold(T::zero(), |acc, c| acc + self.get(r, c) * x[c])).collect()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }

    pub fn frobenius(&self) -> T {
        self.frobenius_sq().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&x, &y)| a * x + b * y).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Numerical rank-one test: every 2×2 minor vanishes relative to `‖A‖²`.
    pub fn is_rank_one(&self, rel_tol: T) -> bool {
        let scale = self.frobenius_sq();
        if scale == T::zero() {
            return false;
        }
        for r1 in 0..self.rows {
            for r2 in r1 + 1..self.rows {
                for c1 in 0..self.cols {
                    for c2 in c1 + 1..self.cols {
                        let minor = self.get(r1, c1) * self.get(r2, c2) - self.get(r1, c2) * self.get(r2, c1);
                        if minor.abs() > rel_tol * scale {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

/// Determinant of a square matrix given as columns, by Gaussian elimination with
/// partial pivoting. Small fixed sizes use closed forms.
pub fn det_columns<T: Scalar>(cols: &[&[T]]) -> T {
    let n = cols.len();
    match n {
        0 => T::one(),
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        3 => {
            let (a, b, c) = (cols[0], cols[1], cols[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
        }
        _ => {
            // a[r][c] = cols[c][r]
            let mut a: Vec<Vec<T>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
            let mut det = T::one();
            for k in 0..n {
                let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
                if a[piv][k] == T::zero() {
                    return T::zero();
                }
                if piv != k {
                    a.swap(piv, k);
                    det = -det;
                }
                det *= a[k][k];
                for i in k + 1..n {
                    let f = a[i][k] / a[k][k];
                    for j in k..n {
                        let v = a[k][j];
                        a[i][j] -= f * v;
                    }
                }
            }
            det
        }
    }
}

/// Cofactor matrix of the column matrix: `out[c][r] = ∂det/∂A[r][c]` with `A[r][c] = cols[c][r]`.
pub fn det_gradient_columns<T: Scalar>(cols: &[&[T]]) -> Vec<Vec<T>> {
    let n = cols.len();
    let mut out = vec![vec![T::zero(); n]; n];
    if n == 1 {
        out[0][0] = T::one();
        return out;
    }
    let mut minor_cols: Vec<Vec<T>> = vec![vec![T::zero(); n - 1]; n - 1];
    for c in 0..n {
        for r in 0..n {
            let mut mc = 0;
            for cc in 0..n {
                if cc == c {
                    continue;
                }
                let mut mr = 0;
                for rr in 0..n {
                    if rr == r {
                        continue;
                    }
                    minor_cols[mc][mr] = cols[cc][rr];
                    mr += 1;
                }
                mc += 1;
            }
            let refs: Vec<&[T]> = minor_cols.iter().map(|v| v.as_slice()).collect();
            let sign = if (r + c) % 2 == 0 { T::one() } else { -T::one() };
            out[c][r] = sign * det_columns(&refs);
        }
    }
    out
}

/// Determinant of a square `Mat`.
pub fn det<T: Scalar>(m: &Mat<T>) -> T {
    assert_eq!(m.rows(), m.cols(), "determinant of non-square matrix");
    let cols: Vec<Vec<T>> = (0..m.cols()).map(|c| m.column(c)).collect();
    let refs: Vec<&[T]> = cols.iter().map(|v| v.as_slice()).collect();
    det_columns(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinants_agree_between_closed_forms_and_elimination() {
        let a = [2.0_f64, 1.0, 0.5, -1.0];
        let b = [0.3_f64, 4.0, 1.0, 2.0];
        let c = [1.0_f64, -2.0, 3.0, 0.0];
        let d = [0.0_f64, 1.0, 1.0, 5.0];
        // 3×3 closed form vs 4×4 elimination with a unit last row/column
        let a3 = [a[0], a[1], a[2], 0.0];
        let b3 = [b[0], b[1], b[2], 0.0];
        let c3 = [c[0], c[1], c[2], 0.0];
        let e4 = [0.0, 0.0, 0.0, 1.0];
        let d3 = det_columns(&[&a[..3], &b[..3], &c[..3]]);
        let d4 = det_columns(&[&a3[..], &b3[..], &c3[..], &e4[..]]);
        assert!((d3 - d4).abs() < 1e-12);
        let full = det_columns(&[&a[..], &b[..], &c[..], &d[..]]);
        assert!(full.is_finite());
    }

    #[test]
    fn cofactor_matches_finite_differences() {
        let cols = vec![vec![1.0_f64, 0.3, -0.2], vec![0.5, 2.0, 0.1], vec![-0.4, 0.7, 1.5]];
        let refs: Vec<&[f64]> = cols.iter().map(|v| v.as_slice()).collect();
        let g = det_gradient_columns(&refs);
        let h = 1e-6;
        for c in 0..3 {
            for r in 0..3 {
                let mut p = cols.clone();
                let mut m = cols.clone();
                p[c][r] += h;
                m[c][r] -= h;
                let pr: Vec<&[f64]> = p.iter().map(|v| v.as_slice()).collect();
                let mr: Vec<&[f64]> = m.iter().map(|v| v.as_slice()).collect();
                let fd = (det_columns(&pr) - det_columns(&mr)) / (2.0 * h);
                assert!((fd - g[c][r]).abs() < 1e-8, "{c} {r}: {fd} vs {}", g[c][r]);
            }
        }
    }

    #[test]
    fn rank_one_detection() {
        let r1 = Mat::outer(&[1.0_f64, 2.0], &[3.0, -1.0]);
        assert!(r1.is_rank_one(1e-12));
        assert!(!Mat::<f64>::identity(2).is_rank_one(1e-12));
        assert!(!Mat::<f64>::zeros(2, 2).is_rank_one(1e-12));
    }
}
