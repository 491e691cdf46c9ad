#![allow(dead_code)]

use cdols::linalg::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `cols` unit-norm Gaussian atoms in `R^rows`.
pub fn unit_dictionary(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let columns: Vec<Vec<f64>> = (0..cols).map(|_| unit(&gaussian(rng, rows))).collect();
    Matrix::from_columns(&columns).unwrap()
}

/// Random orthonormal basis of `R^n` by modified Gram-Schmidt, columns.
pub fn orthonormal(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < n {
        let mut v = gaussian(rng, n);
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    Matrix::from_columns(&basis).unwrap()
}

pub fn vector(v: Vec<f64>) -> Vector {
    Vector::new(v).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the square system `a · x = b` by Gaussian elimination with
/// partial pivoting. `a` is row-major.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Least-squares coefficients and residual norm through the normal
/// equations, for full-column-rank `columns`.
pub fn normal_equations(columns: &[&[f64]], target: &[f64]) -> (Vec<f64>, f64) {
    let gram: Vec<Vec<f64>> = columns
        .iter()
        .map(|a| columns.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rhs: Vec<f64> = columns.iter().map(|a| dot(a, target)).collect();
    let coef = gauss_solve(gram, rhs);
    let mut r = target.to_vec();
    for (a, c) in columns.iter().zip(&coef) {
        r.iter_mut().zip(a.iter()).for_each(|(x, y)| *x -= c * y);
    }
    let norm = dot(&r, &r).sqrt();
    (coef, norm)
}

/// Residual norm of `target` on the dictionary columns `support`.
pub fn oracle_residual(dict: &Matrix, target: &[f64], support: &[usize]) -> f64 {
    let cols: Vec<&[f64]> = support.iter().map(|&j| dict.col(j)).collect();
    normal_equations(&cols, target).1
}

/// Planted `s`-sparse combination of dictionary columns `support`.
pub fn planted(dict: &Matrix, support: &[usize], coef: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; dict.rows()];
    for (&j, &c) in support.iter().zip(coef) {
        x.iter_mut().zip(dict.col(j)).for_each(|(v, a)| *v += c * a);
    }
    x
}

/// `k` distinct indices below `n`, in random order.
pub fn distinct(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    all.truncate(k);
    all
}
