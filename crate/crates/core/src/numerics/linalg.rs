//! Small dense matrices: products, cyclic Jacobi eigendecomposition,
//! PSD square roots and partially pivoted Gaussian elimination.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            check_dim(m, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n,
            cols: m,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ · v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, k: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == 0.0))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Square matrix whose stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<Vec<f64>>")]
pub struct SymMatrix(Matrix);

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.0.to_rows()
    }
}

impl SymMatrix {
    /// Wraps `m`, rejecting it unless `m[i][j] == m[j][i]` bit for bit.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Domain(format!(
                        "matrix is not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Replaces `m` by `(m + mᵀ)/2`, absorbing rounding asymmetry from products.
    pub fn symmetrize(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        let mut s = m;
        for i in 0..s.rows {
            for j in 0..i {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Self(s))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        Ok(dot(v, &self.0.mul_vec(v)?))
    }

    /// `M · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(v)
    }

    pub fn scale(&self, k: f64) -> SymMatrix {
        SymMatrix(self.0.scale(k))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigen {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }

    /// Coordinates of `v` in the eigenbasis, `Vᵀv`.
    pub fn to_basis(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.vectors.t_mul_vec(v)
    }

    /// Maps eigenbasis coordinates back, `V·w`.
    pub fn from_basis(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.vectors.mul_vec(w)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn jacobi_eigen(m: &SymMatrix) -> Eigen {
    let n = m.dim();
    let mut a = m.0.clone();
    let mut v = Matrix::identity(n);
    let scale = a.max_abs();
    if n > 1 && scale > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off.sqrt() <= 1e-16 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Eigen { values, vectors }
}

/// Eigenvalues below this are treated as genuine negative curvature.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Symmetric PSD square root `S` with `S·S = M`.
///
/// Eigenvalues in `[-1e-8, 0)` are rounding noise and clamp to zero.
pub fn psd_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = jacobi_eigen(m);
    let n = m.dim();
    let mut roots = Vec::with_capacity(n);
    for &lam in &eig.values {
        if lam < -PSD_TOLERANCE {
            return Err(Error::NotPsd { eigenvalue: lam });
        }
        roots.push(lam.max(0.0).sqrt());
    }
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n)
                .map(|k| eig.vectors[(i, k)] * roots[k] * eig.vectors[(j, k)])
                .sum();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(SymMatrix(s))
}

/// Relative pivot size below which a system is declared singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
pub fn linear_solve(m: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.cols(),
        });
    }
    check_dim(n, b.len())?;
    let mut a = m.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs();
    if n > 0 && scale == 0.0 {
        return Err(Error::Singular {
            column: 0,
            pivot: 0.0,
        });
    }
    for col in 0..n {
        let (piv, pivot_abs) =
            (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_abs <= PIVOT_TOLERANCE * scale {
            return Err(Error::Singular {
                column: col,
                pivot: pivot_abs,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            x.swap(col, piv);
        }
        let d = a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[(r, j)] -= f * a[(col, j)];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = (col + 1..n).map(|j| a[(col, j)] * x[j]).sum();
        x[col] = (x[col] - tail) / a[(col, col)];
    }
    Ok(x)
}

/// Numerical rank via Gaussian elimination with complete pivoting.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    let mut col_used = vec![false; cols];
    let mut row_used = vec![false; rows];
    while r < rows.min(cols) {
        let mut best = (0, 0, 0.0);
        for i in (0..rows).filter(|&i| !row_used[i]) {
            for j in (0..cols).filter(|&j| !col_used[j]) {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        let (pi, pj, _) = best;
        row_used[pi] = true;
        col_used[pj] = true;
        for i in (0..rows).filter(|&i| !row_used[i]) {
            let f = a[(i, pj)] / a[(pi, pj)];
            for j in 0..cols {
                a[(i, j)] -= f * a[(pi, j)];
            }
        }
        r += 1;
    }
    r
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Matrix::from_rows(&rows).unwrap()
    }

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        let diff = a.sub(b).unwrap().max_abs();
        assert!(diff <= tol, "max deviation {diff} > {tol}");
    }

    #[test]
    fn sqrt_of_identity_is_identity() {
        let s = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        assert_close(s.as_matrix(), &Matrix::identity(3), 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = psd_sqrt(&SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_close(s.as_matrix(), &Matrix::from_diag(&[2.0, 3.0]), 1e-14);
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=8 {
            let b = random_matrix(&mut rng, d, d);
            let m = SymMatrix::symmetrize(b.matmul(&b.transpose()).unwrap()).unwrap();
            let s = psd_sqrt(&m).unwrap();
            let sq = s.as_matrix().matmul(s.as_matrix()).unwrap();
            let tol = 1e-10 * (1.0 + m.as_matrix().max_abs());
            assert_close(&sq, m.as_matrix(), tol);
        }
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_clamps_tiny_negative_eigenvalue() {
        let m = SymMatrix::from_diag(&[1.0, -1e-9]);
        let s = psd_sqrt(&m).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_matrix(&mut rng, 6, 6);
        let m = SymMatrix::symmetrize(b.add(&b.transpose()).unwrap()).unwrap();
        let eig = jacobi_eigen(&m);
        let vl = eig.vectors.matmul(&Matrix::from_diag(&eig.values)).unwrap();
        let back = vl.matmul(&eig.vectors.transpose()).unwrap();
        assert_close(&back, m.as_matrix(), 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let b = [1.5, -2.0, 3.25];
        assert_eq!(linear_solve(&Matrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn solve_diagonal() {
        let x = linear_solve(&Matrix::from_diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn solve_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=10 {
            let m = random_matrix(&mut rng, d, d)
                .add(&Matrix::identity(d).scale(d as f64))
                .unwrap();
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x = linear_solve(&m, &b).unwrap();
            let r: Vec<f64> = m
                .mul_vec(&x)
                .unwrap()
                .iter()
                .zip(&b)
                .map(|(a, b)| a - b)
                .collect();
            assert!(norm_inf(&r) <= 1e-9 * (1.0 + norm_inf(&b)));
        }
    }

    #[test]
    fn solve_detects_singular() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            linear_solve(&m, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn rank_of_outer_product_is_one() {
        let u = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let m = u.matmul(&u.transpose()).unwrap();
        assert_eq!(rank(&m, 1e-10), 1);
        assert_eq!(rank(&Matrix::identity(4), 1e-10), 4);
    }

    #[test]
    fn symmetric_wrapper_rejects_asymmetry() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0000001, 1.0]]).unwrap();
        assert!(SymMatrix::new(m).is_err());
    }
}
