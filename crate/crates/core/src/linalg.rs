//! Dense column-major matrices, least-squares solves and the rank policy
//! shared by every solver in the crate.
//!
//! Rank deficiency is resolved in one place: [`least_squares`] uses a
//! column-pivoted Householder QR and treats any diagonal of `R` below
//! `RANK_TOL * |R[0,0]|` as zero, returning the minimum-norm solution of the
//! truncated system.

use crate::error::{Error, Result};
use std::ops::Deref;

/// Relative tolerance on the pivoted-QR diagonal below which a column is
/// treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Relative tolerance used by [`solve_spd`] for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Dense real matrix, column-major, with finite entries and at least one
/// row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty(format!("matrix shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(rows * cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::dims(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, cols, data)
    }

    /// Builds a matrix from row slices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = vec![0.0; n_rows * n_cols];
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::dims(format!(
                    "row {i} has length {}, expected {n_cols}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                data[j * n_rows + i] = v;
            }
        }
        Self::from_col_major(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows)
    }

    /// Copies the listed columns, in the given order, into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("column selection".into()));
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            if j >= self.cols {
                return Err(Error::dims(format!(
                    "column {j} out of range for {} columns",
                    self.cols
                )));
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(Self {
            rows: self.rows,
            cols: indices.len(),
            data,
        })
    }

    /// Principal submatrix on `indices` (rows and columns).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("principal submatrix".into()));
        }
        let k = indices.len();
        let mut data = Vec::with_capacity(k * k);
        for &j in indices {
            for &i in indices {
                if i >= self.rows || j >= self.cols {
                    return Err(Error::dims(format!(
                        "index ({i}, {j}) out of range for {}x{}",
                        self.rows, self.cols
                    )));
                }
                data.push(self.get(i, j));
            }
        }
        Ok(Self {
            rows: k,
            cols: k,
            data,
        })
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dims(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (c, &s) in self.columns().zip(v) {
            axpy(s, c, &mut out);
        }
        Ok(out)
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::dims(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        Ok(self.columns().map(|c| dot(c, v)).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest absolute entry, with
    /// the position where it occurs. `None` for non-square matrices.
    pub fn asymmetry(&self) -> Option<(usize, usize, f64)> {
        if self.rows != self.cols {
            return None;
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = (0, 0, 0.0);
        for j in 0..self.cols {
            for i in (j + 1)..self.rows {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                let rel = if scale > 0.0 { d / scale } else { 0.0 };
                if rel > worst.2 {
                    worst = (i, j, rel);
                }
            }
        }
        Some(worst)
    }
}

/// Real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data)?;
        Ok(Self(data))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl TryFrom<&[f64]> for Vector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm with scaling against overflow and underflow.
pub fn norm2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    if (1e-150..1e150).contains(&scale) {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let ssq: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * ssq.sqrt()
}

/// Minimum-norm least-squares solution of `columns * coefficients ≈ target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub coefficients: Vector,
    pub residual: Vector,
    pub residual_norm: f64,
}

/// Householder QR with column pivoting, stored compactly.
struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Column-major; upper triangle holds R, below the diagonal the
    /// Householder vectors (with implicit unit leading entry).
    qr: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(a: &Matrix, pivot: bool) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut qr = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];

        for k in 0..steps {
            if pivot {
                // Remaining column norms are recomputed, not downdated.
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..n {
                    let nrm = norm2(&qr[j * m + k..(j + 1) * m]);
                    if nrm > best_norm {
                        best_norm = nrm;
                        best = j;
                    }
                }
                if best != k {
                    for i in 0..m {
                        qr.swap(k * m + i, best * m + i);
                    }
                    perm.swap(k, best);
                }
            }

            let col = &mut qr[k * m + k..(k + 1) * m];
            let alpha = col[0];
            let xnorm = norm2(&col[1..]);
            if xnorm == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let norm = alpha.hypot(xnorm);
            let beta = if alpha >= 0.0 { -norm } else { norm };
            tau[k] = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            for v in col[1..].iter_mut() {
                *v *= scale;
            }
            col[0] = beta;

            for j in (k + 1)..n {
                let (head, tail) = qr.split_at_mut(j * m);
                let v = &head[k * m + k..(k + 1) * m];
                let c = &mut tail[k..m];
                let mut s = c[0];
                s += dot(&v[1..], &c[1..]);
                s *= tau[k];
                c[0] -= s;
                axpy(-s, &v[1..], &mut c[1..]);
            }
        }

        Self {
            rows: m,
            cols: n,
            qr,
            tau,
            perm,
        }
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        self.qr[j * self.rows + i]
    }

    /// Overwrites `b` with `Qᵀ b`.
    fn apply_qt(&self, b: &mut [f64]) {
        let m = self.rows;
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let v = &self.qr[k * m + k..(k + 1) * m];
            let mut s = b[k] + dot(&v[1..], &b[k + 1..]);
            s *= t;
            b[k] -= s;
            axpy(-s, &v[1..], &mut b[k + 1..]);
        }
    }

    /// Overwrites `b` (length `rows`) with `Q b`.
    fn apply_q(&self, b: &mut [f64]) {
        let m = self.rows;
        for (k, &t) in self.tau.iter().enumerate().rev() {
            if t == 0.0 {
                continue;
            }
            let v = &self.qr[k * m + k..(k + 1) * m];
            let mut s = b[k] + dot(&v[1..], &b[k + 1..]);
            s *= t;
            b[k] -= s;
            axpy(-s, &v[1..], &mut b[k + 1..]);
        }
    }

    fn rank(&self) -> usize {
        let steps = self.rows.min(self.cols);
        if steps == 0 {
            return 0;
        }
        let lead = self.r(0, 0).abs();
        if lead == 0.0 {
            return 0;
        }
        (0..steps)
            .take_while(|&k| self.r(k, k).abs() > RANK_TOL * lead)
            .count()
    }
}

/// Solves the upper-triangular system `R[..n, ..n] x = b` in place.
fn back_substitute(qr: &PivotedQr, n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= qr.r(i, j) * b[j];
        }
        b[i] = s / qr.r(i, i);
    }
}

/// Minimum-norm least-squares solve.
///
/// Columns whose pivoted-QR diagonal falls below `RANK_TOL` times the
/// leading diagonal are treated as dependent; the returned coefficients are
/// then the minimum-norm solution of the truncated system, which matches the
/// pseudo-inverse.
pub fn least_squares(columns: &Matrix, target: &[f64]) -> Result<LsSolution> {
    let (m, n) = (columns.rows, columns.cols);
    if target.len() != m {
        return Err(Error::dims(format!(
            "target of length {} against {m} rows",
            target.len()
        )));
    }
    check_finite(target)?;

    let qr = PivotedQr::new(columns, true);
    let rank = qr.rank();
    let mut qtb = target.to_vec();
    qr.apply_qt(&mut qtb);

    let mut z = vec![0.0; n];
    if rank == n {
        back_substitute(&qr, n, &mut qtb);
        z.copy_from_slice(&qtb[..n]);
    } else if rank > 0 {
        // Minimum-norm solution of W z = c with W = [R11 R12] (rank x n):
        // factor Wᵀ = Z T, then Tᵀ y = c and z = Z y.
        let mut wt = vec![0.0; n * rank];
        for i in 0..rank {
            for j in i..n {
                wt[i * n + j] = qr.r(i, j);
            }
        }
        let wt = Matrix {
            rows: n,
            cols: rank,
            data: wt,
        };
        let lq = PivotedQr::new(&wt, false);
        let mut y = vec![0.0; n];
        for i in 0..rank {
            let mut s = qtb[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                s -= lq.r(k, i) * yk;
            }
            y[i] = s / lq.r(i, i);
        }
        lq.apply_q(&mut y);
        z = y;
    }

    let mut coefficients = vec![0.0; n];
    for (i, &p) in qr.perm.iter().enumerate() {
        coefficients[p] = z[i];
    }

    let fitted = columns.mul_vec(&coefficients)?;
    let residual: Vec<f64> = target.iter().zip(&fitted).map(|(t, f)| t - f).collect();
    let residual_norm = norm2(&residual);
    Ok(LsSolution {
        coefficients: Vector(coefficients),
        residual: Vector(residual),
        residual_norm,
    })
}

/// Lower Cholesky factor `L` with `L Lᵀ = a + ridge·I`, row-major packed
/// as a dense square for simplicity.
pub(crate) fn cholesky(a: &Matrix, ridge: f64) -> Result<Vec<f64>> {
    let n = a.rows;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            if i == j {
                s += ridge;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `(gram + ridge·I) v = rhs` by Cholesky.
pub fn solve_spd(gram: &Matrix, rhs: &[f64], ridge: f64) -> Result<Vector> {
    let n = gram.rows;
    if gram.cols != n {
        return Err(Error::dims(format!(
            "gram matrix is {}x{}, expected square",
            gram.rows, gram.cols
        )));
    }
    if rhs.len() != n {
        return Err(Error::dims(format!(
            "rhs of length {} against {n} rows",
            rhs.len()
        )));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::config(format!("ridge must be a finite nonnegative value, got {ridge}")));
    }
    check_finite(rhs)?;
    if let Some((row, col, diff)) = gram.asymmetry() {
        if diff > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { row, col, diff });
        }
    }

    let l = cholesky(gram, ridge)?;
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Ok(Vector(y))
}

/// Orthonormal basis of a growing set of columns together with the residual
/// of a fixed target against their span.
///
/// Columns are orthogonalised with two passes of classical Gram-Schmidt, so
/// the residual norm equals the least-squares residual on the accepted
/// columns to working precision.
#[derive(Debug, Clone)]
pub(crate) struct Projector {
    basis: Vec<Vec<f64>>,
    residual: Vec<f64>,
    residual_norm: f64,
}

/// A column whose component orthogonal to the current span has norm at or
/// below this (relative to its own norm) is considered dependent.
pub(crate) const DEPENDENCE_TOL: f64 = 1e-10;

impl Projector {
    pub fn new(target: &[f64]) -> Self {
        Self {
            basis: Vec::new(),
            residual: target.to_vec(),
            residual_norm: norm2(target),
        }
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    /// Component of `column` orthogonal to the current span.
    pub fn orthogonal_part(&self, column: &[f64]) -> Vec<f64> {
        let mut w = column.to_vec();
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        w
    }

    /// Adds `column` to the span. Returns `false` (and leaves the state
    /// unchanged) if the column is numerically dependent.
    pub fn push(&mut self, column: &[f64]) -> bool {
        let scale = norm2(column);
        let mut w = self.orthogonal_part(column);
        let wn = norm2(&w);
        if scale == 0.0 || wn <= DEPENDENCE_TOL * scale {
            return false;
        }
        for v in w.iter_mut() {
            *v /= wn;
        }
        let c = dot(&w, &self.residual);
        axpy(-c, &w, &mut self.residual);
        self.residual_norm = norm2(&self.residual);
        self.basis.push(w);
        true
    }

    /// Unit direction added by the most recent successful [`push`](Self::push).
    pub fn last_direction(&self) -> &[f64] {
        self.basis.last().map_or(&[], Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Vec<f64> {
        data.to_vec()
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            Matrix::from_col_major(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(Matrix::from_col_major(0, 1, vec![]).is_err());
        assert!(Matrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn row_and_column_constructors_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let b = Matrix::from_columns(&[[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(2, 1), 6.0);
        assert_eq!(a.col(1), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn ls_identity() {
        let sol = least_squares(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.coefficients.as_slice(), &[1.0, 2.0, 3.0]);
        assert!(sol.residual_norm == 0.0);
    }

    #[test]
    fn ls_orthogonal_target() {
        let a = Matrix::from_columns(&[[1.0, 0.0, 0.0]]).unwrap();
        let sol = least_squares(&a, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sol.coefficients.as_slice(), &[0.0]);
        assert!((sol.residual_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ls_duplicated_columns_min_norm() {
        // A = [[1,1],[0,0]] has rank one: A = u s vᵀ with s = √2, so
        // A⁺ = Aᵀ / ‖A‖_F² = [[1,0],[1,0]] / 2 and A⁺ (2,0) = (1,1).
        let a = Matrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = [2.0, 0.0];
        let frob2: f64 = a.data().iter().map(|x| x * x).sum();
        let oracle: Vec<f64> = (0..2)
            .map(|j| (0..2).map(|i| a.get(i, j) * b[i]).sum::<f64>() / frob2)
            .collect();
        assert_eq!(oracle, v(&[1.0, 1.0]));

        let sol = least_squares(&a, &b).unwrap();
        for (c, o) in sol.coefficients.iter().zip(&oracle) {
            assert!((c - o).abs() < 1e-12, "{c} vs {o}");
        }
        assert!(sol.residual_norm < 1e-14);
    }

    #[test]
    fn ls_dimension_mismatch() {
        assert!(matches!(
            least_squares(&Matrix::identity(3), &[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn ls_rank_deficient_wide_matrix() {
        // Third column = first + second; min-norm solution spreads weight.
        let a = Matrix::from_columns(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let sol = least_squares(&a, &[1.0, 1.0]).unwrap();
        // Pseudo-inverse solution is (1/3, 1/3, 2/3).
        let expected = [1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (c, e) in sol.coefficients.iter().zip(expected) {
            assert!((c - e).abs() < 1e-12);
        }
        assert!(sol.residual_norm < 1e-14);
    }

    #[test]
    fn spd_identity_and_diagonal() {
        let x = solve_spd(&Matrix::identity(2), &[3.0, 4.0], 0.0).unwrap();
        assert_eq!(x.as_slice(), &[3.0, 4.0]);
        let d = Matrix::from_rows(&[[2.0, 0.0], [0.0, 4.0]]).unwrap();
        let x = solve_spd(&d, &[2.0, 8.0], 0.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spd_near_singular_with_ridge() {
        let ridge = 1e-10;
        let g = Matrix::from_rows(&[[1.0, 0.999], [0.999, 1.0]]).unwrap();
        // Closed-form inverse of [[a,b],[b,a]] with a = 1 + ridge.
        let a = 1.0 + ridge;
        let b = 0.999;
        let det = a * a - b * b;
        let oracle = [(a - b) / det, (a - b) / det];
        let x = solve_spd(&g, &[1.0, 1.0], ridge).unwrap();
        for (xi, oi) in x.iter().zip(oracle) {
            assert!((xi - oi).abs() < 1e-6);
        }
    }

    #[test]
    fn spd_rejects_asymmetric_and_indefinite() {
        let g = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&g, &[1.0, 1.0], 0.0),
            Err(Error::NotSymmetric { .. })
        ));
        let g = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&g, &[1.0, 1.0], 0.0),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn norm2_cases() {
        assert_eq!(norm2(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        let big = norm2(&[3e200, 4e200]);
        assert!((big / 5e200 - 1.0).abs() < 1e-15);
        let xs = [
            0.3, -1.2, 2.5, 0.01, -0.7, 1.9, -3.3, 0.45, 0.0, 1.1,
        ];
        let mut ssq = 0.0;
        for x in xs {
            ssq += x * x;
        }
        assert!((norm2(&xs) - ssq.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn projector_matches_least_squares() {
        let a = Matrix::from_columns(&[[1.0, 2.0, 0.0, 1.0], [0.0, 1.0, 1.0, -1.0]]).unwrap();
        let b = [1.0, 0.5, -2.0, 3.0];
        let mut p = Projector::new(&b);
        assert!(p.push(a.col(0)));
        assert!(p.push(a.col(1)));
        assert!(!p.push(&[1.0, 3.0, 1.0, 0.0]));
        let ls = least_squares(&a, &b).unwrap();
        assert!((p.residual_norm() - ls.residual_norm).abs() < 1e-13);
    }
}
