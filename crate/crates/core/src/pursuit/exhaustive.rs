use super::{finalize, validate, Path, PursuitResult};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, Matrix, Projector, Vector};
use rayon::prelude::*;

/// Default bound on the number of subsets the exhaustive oracle will visit.
pub const DEFAULT_SUBSET_CAP: u64 = 2_000_000;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn subset_count(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Global best `sparsity`-subset with the default cap.
pub fn exhaustive_best_subset(
    dict: &Matrix,
    signal: &Vector,
    sparsity: usize,
) -> Result<PursuitResult> {
    exhaustive_best_subset_with_cap(dict, signal, sparsity, DEFAULT_SUBSET_CAP)
}

/// Evaluates the least-squares residual of every `sparsity`-subset of atoms
/// and returns the smallest. Ties go to the lexicographically smallest
/// subset; the returned support is sorted ascending and its history holds
/// the residuals of its prefixes.
pub fn exhaustive_best_subset_with_cap(
    dict: &Matrix,
    signal: &Vector,
    sparsity: usize,
    cap: u64,
) -> Result<PursuitResult> {
    validate(dict, signal, sparsity)?;
    let n = dict.cols();
    if subset_count(n, sparsity) > cap {
        return Err(Error::SubsetCapExceeded {
            atoms: n,
            sparsity,
            cap,
        });
    }

    let root = Projector::new(signal);
    // Branches are keyed by first atom; each returns its lexicographically
    // first minimiser, so reducing in branch order keeps the global tie rule.
    let branches: Vec<(f64, Vec<usize>)> = (0..=n - sparsity)
        .into_par_iter()
        .map(|first| {
            let mut search = Search {
                dict,
                sparsity,
                current: vec![first],
                best: (f64::INFINITY, Vec::new()),
            };
            if sparsity == 1 {
                let r = leaf_residual(&root, dict.col(first));
                search.best = (r, vec![first]);
            } else {
                let mut child = root.clone();
                child.push(dict.col(first));
                search.descend(&child, first + 1);
            }
            search.best
        })
        .collect();

    let mut best = &branches[0];
    for b in &branches[1..] {
        if b.0 < best.0 {
            best = b;
        }
    }

    let support = best.1.clone();
    let mut proj = Projector::new(signal);
    let mut history = vec![proj.residual_norm()];
    for &j in &support {
        proj.push(dict.col(j));
        history.push(proj.residual_norm());
    }
    finalize(dict, signal, Path { support, history })
}

struct Search<'a> {
    dict: &'a Matrix,
    sparsity: usize,
    current: Vec<usize>,
    best: (f64, Vec<usize>),
}

impl Search<'_> {
    fn descend(&mut self, proj: &Projector, start: usize) {
        let n = self.dict.cols();
        let depth = self.current.len();
        let last_start = n - (self.sparsity - depth);
        for j in start..=last_start {
            self.current.push(j);
            if depth + 1 == self.sparsity {
                let r = leaf_residual(proj, self.dict.col(j));
                if r < self.best.0 {
                    self.best = (r, self.current.clone());
                }
            } else {
                let mut child = proj.clone();
                child.push(self.dict.col(j));
                self.descend(&child, j + 1);
            }
            self.current.pop();
        }
    }
}

/// Residual norm after adding `column`, computed exactly as
/// [`Projector::push`] would but without cloning the projector.
fn leaf_residual(proj: &Projector, column: &[f64]) -> f64 {
    let scale = norm2(column);
    let mut w = proj.orthogonal_part(column);
    let wn = norm2(&w);
    if scale == 0.0 || wn <= crate::linalg::DEPENDENCE_TOL * scale {
        return proj.residual_norm();
    }
    for v in w.iter_mut() {
        *v /= wn;
    }
    let mut r = proj.residual().to_vec();
    let c = dot(&w, &r);
    axpy(-c, &w, &mut r);
    norm2(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pursuit::{cols, ols, omp};

    #[test]
    fn binomials() {
        assert_eq!(subset_count(50, 4), 230_300);
        assert_eq!(subset_count(50, 5), 2_118_760);
        assert_eq!(subset_count(10, 0), 1);
        assert_eq!(subset_count(3, 4), 0);
        assert_eq!(subset_count(1000, 500), u64::MAX);
    }

    #[test]
    fn identity_two_sparse() {
        let x = Vector::new(vec![1.0, 1.0, 0.0]).unwrap();
        let r = exhaustive_best_subset(&Matrix::identity(3), &x, 2).unwrap();
        assert_eq!(r.support.indices(), &[0, 1]);
        assert!(r.final_residual_norm < 1e-15);
    }

    #[test]
    fn cap_exceeded() {
        let d = Matrix::identity(10);
        let x = Vector::new(vec![1.0; 10]).unwrap();
        let err = exhaustive_best_subset_with_cap(&d, &x, 5, 100).unwrap_err();
        assert!(matches!(err, Error::SubsetCapExceeded { cap: 100, .. }));
        assert!(err.to_string().contains("reduce"));
    }

    #[test]
    fn dominates_greedy_on_fixture() {
        let (d, x) = crate::pursuit::fig1_fixture();
        let e = exhaustive_best_subset(&d, &x, 2).unwrap();
        for r in [omp(&d, &x, 2), ols(&d, &x, 2), cols(&d, &x, 2)] {
            assert!(e.final_residual_norm <= r.unwrap().final_residual_norm + 1e-12);
        }
    }
}
