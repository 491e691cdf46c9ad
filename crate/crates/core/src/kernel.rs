//! Kernels, Gram matrices and feature-space pursuit.
//!
//! The kernel solvers never see input-space atoms: they work from the class
//! Gram matrix `K`, the cross-kernel vector `k` (entry `i` is `κ(x, a_i)`)
//! and `κ(x, x)`. The feature-space residual of a support `Λ` is
//!
//! ```text
//! ν² = κ(x,x) − 2 βᵀ k_Λ + βᵀ K_ΛΛ β,   β = (K_ΛΛ + εI)⁻¹ k_Λ
//! ```
//!
//! with the ridge `ε = GRAM_RIDGE · trace(K) / n`.
//!
//! Candidate scoring uses a Cholesky factor of `K_ΛΛ + εI` that grows by one
//! row per selected atom, so each step costs `O(n·|Λ|)` rather than one
//! dense solve per candidate. Reported residuals always come from
//! [`kernel_residual_norm`].

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_spd, Matrix, Vector};
use crate::pursuit::{SupportSet, EARLY_STOP_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative ridge added to every Gram subsystem before solving.
pub const GRAM_RIDGE: f64 = 1e-10;

/// Negative squared residuals down to `-NEGATIVE_SQ_TOL · max(1, κ(x,x))`
/// are clamped to zero; anything lower is an error.
pub const NEGATIVE_SQ_TOL: f64 = 1e-10;

/// A candidate whose squared feature-space distance to the current span is
/// at most this fraction of `κ(a, a)` is treated as dependent.
pub const KERNEL_DEPENDENCE_TOL: f64 = 1e-12;

/// Selection stops once `ν² ≤ KERNEL_STOP_REL · κ(x,x)`; below that the
/// quadratic form is dominated by rounding.
pub const KERNEL_STOP_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Result<Self> {
        let spec = KernelSpec::Polynomial { degree, coef0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            KernelSpec::Rbf { gamma } => Err(Error::InvalidKernel(format!(
                "rbf gamma must be positive and finite, got {gamma}"
            ))),
            KernelSpec::Polynomial { degree, coef0 } if degree >= 1 && coef0.is_finite() => Ok(()),
            KernelSpec::Polynomial { degree, coef0 } => Err(Error::InvalidKernel(format!(
                "polynomial kernel needs degree >= 1 and finite coef0, got degree {degree}, coef0 {coef0}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }

    /// Kernel value without length checks.
    #[inline]
    pub(crate) fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(u, v),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { degree, coef0 } => (dot(u, v) + coef0).powi(degree as i32),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    spec.validate()?;
    if u.len() != v.len() {
        return Err(Error::dims(format!(
            "kernel arguments of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(spec.apply(u, v))
}

/// Gram matrix of the columns of `atoms`.
pub fn kernel_matrix(spec: &KernelSpec, atoms: &Matrix) -> Result<Matrix> {
    spec.validate()?;
    let n = atoms.cols();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..=j {
            let v = spec.apply(atoms.col(i), atoms.col(j));
            data[j * n + i] = v;
            data[i * n + j] = v;
        }
    }
    Matrix::from_col_major(n, n, data)
}

/// `κ(x, a_i)` for every column `a_i` of `atoms`.
pub fn kernel_vector(spec: &KernelSpec, x: &[f64], atoms: &Matrix) -> Result<Vector> {
    spec.validate()?;
    if x.len() != atoms.rows() {
        return Err(Error::dims(format!(
            "sample of length {} against atoms of length {}",
            x.len(),
            atoms.rows()
        )));
    }
    Vector::new(atoms.columns().map(|a| spec.apply(x, a)).collect())
}

/// Ridge added to Gram subsystems of `gram`.
pub fn gram_ridge(gram: &Matrix) -> f64 {
    GRAM_RIDGE * (gram.trace() / gram.rows() as f64).abs()
}

/// Feature-space residual norm of the sample on `support`.
pub fn kernel_residual_norm(gram: &Matrix, k: &[f64], kxx: f64, support: &SupportSet) -> Result<f64> {
    check_gram_inputs(gram, k, kxx)?;
    for i in support.iter() {
        if i >= gram.rows() {
            return Err(Error::dims(format!(
                "support index {i} out of range for a {}x{} Gram matrix",
                gram.rows(),
                gram.cols()
            )));
        }
    }
    residual_and_coefficients(gram, k, kxx, support.indices()).map(|(nu, _)| nu)
}

fn residual_and_coefficients(
    gram: &Matrix,
    k: &[f64],
    kxx: f64,
    support: &[usize],
) -> Result<(f64, Vec<f64>)> {
    if support.is_empty() {
        return Ok((kxx.max(0.0).sqrt(), Vec::new()));
    }
    let sub = gram.principal_submatrix(support)?;
    let k_sub: Vec<f64> = support.iter().map(|&i| k[i]).collect();
    let beta = solve_spd(&sub, &k_sub, gram_ridge(gram))?;
    let k_beta = dot(&beta, &k_sub);
    let quad = dot(&beta, &sub.mul_vec(&beta)?);
    let sq = kxx - 2.0 * k_beta + quad;
    if sq < -NEGATIVE_SQ_TOL * kxx.max(1.0) {
        return Err(Error::InconsistentGram { value: sq });
    }
    Ok((sq.max(0.0).sqrt(), beta.into_inner()))
}

fn check_gram_inputs(gram: &Matrix, k: &[f64], kxx: f64) -> Result<()> {
    if gram.rows() != gram.cols() {
        return Err(Error::dims(format!(
            "Gram matrix is {}x{}, expected square",
            gram.rows(),
            gram.cols()
        )));
    }
    if k.len() != gram.rows() {
        return Err(Error::dims(format!(
            "kernel vector of length {} against a {}x{} Gram matrix",
            k.len(),
            gram.rows(),
            gram.cols()
        )));
    }
    if !kxx.is_finite() || kxx < 0.0 {
        return Err(Error::config(format!(
            "kappa(x, x) must be finite and nonnegative, got {kxx}"
        )));
    }
    if let Some(i) = k.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelPursuitResult {
    /// Positions into the Gram matrix passed to the solver.
    pub support: SupportSet,
    pub coefficients: Vec<f64>,
    /// Entry `m` is the feature-space residual after `m` atoms.
    pub residual_norm_history: Vec<f64>,
}

impl KernelPursuitResult {
    pub fn final_residual_norm(&self) -> f64 {
        *self
            .residual_norm_history
            .last()
            .expect("history is never empty")
    }

    pub fn residual_at(&self, level: usize) -> f64 {
        let h = &self.residual_norm_history;
        h[level.min(h.len() - 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Correlation,
    LeastSquares,
}

/// Growing Cholesky factor of `K_ΛΛ + εI` plus the projections every
/// candidate needs for scoring.
struct GramState<'a> {
    gram: &'a Matrix,
    k: &'a [f64],
    ridge: f64,
    support: Vec<usize>,
    /// Row `m` of the lower factor, length `m + 1`.
    factor: Vec<Vec<f64>>,
    /// `L⁻¹ k_Λ`.
    z: Vec<f64>,
    /// `L⁻¹ K_Λj` for every atom `j`.
    u: Vec<Vec<f64>>,
    blocked: Vec<bool>,
}

impl<'a> GramState<'a> {
    fn new(gram: &'a Matrix, k: &'a [f64]) -> Self {
        let n = gram.rows();
        let blocked = (0..n).map(|j| !(gram.get(j, j) > 0.0)).collect();
        Self {
            gram,
            k,
            ridge: gram_ridge(gram),
            support: Vec::new(),
            factor: Vec::new(),
            z: Vec::new(),
            u: vec![Vec::new(); n],
            blocked,
        }
    }

    /// Squared feature distance of atom `j` from the current span, ridged.
    fn schur(&self, j: usize) -> f64 {
        self.gram.get(j, j) + self.ridge - dot(&self.u[j], &self.u[j])
    }

    fn is_dependent(&self, j: usize, schur: f64) -> bool {
        schur - self.ridge <= KERNEL_DEPENDENCE_TOL * self.gram.get(j, j)
    }

    /// Largest `|k_j| / sqrt(K_jj)`: the best single atom.
    fn best_first(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.k.len() {
            if self.blocked[j] {
                continue;
            }
            let s = self.k[j].abs() / self.gram.get(j, j).sqrt();
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Candidate with the largest drop in ridged squared residual.
    fn best_least_squares(&mut self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.k.len() {
            if self.blocked[j] {
                continue;
            }
            let p = self.schur(j);
            if self.is_dependent(j, p) {
                self.blocked[j] = true;
                continue;
            }
            let c = self.k[j] - dot(&self.u[j], &self.z);
            let gain = c * c / p;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((j, gain));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Candidate with the largest normalised feature-space correlation
    /// `|k_j − K_jΛ β| / sqrt(K_jj)`.
    fn best_correlation(&mut self) -> Option<usize> {
        let beta = self.coefficients();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.k.len() {
            if self.blocked[j] {
                continue;
            }
            let p = self.schur(j);
            if self.is_dependent(j, p) {
                self.blocked[j] = true;
                continue;
            }
            let fitted: f64 = self
                .support
                .iter()
                .zip(&beta)
                .map(|(&i, b)| self.gram.get(j, i) * b)
                .sum();
            let s = (self.k[j] - fitted).abs() / self.gram.get(j, j).sqrt();
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Ridged coefficients on the current support, `L⁻ᵀ z`.
    fn coefficients(&self) -> Vec<f64> {
        let m = self.support.len();
        let mut beta = self.z.clone();
        for i in (0..m).rev() {
            let mut s = beta[i];
            for r in (i + 1)..m {
                s -= self.factor[r][i] * beta[r];
            }
            beta[i] = s / self.factor[i][i];
        }
        beta
    }

    fn push(&mut self, j: usize) -> bool {
        self.blocked[j] = true;
        let p = self.schur(j);
        if self.is_dependent(j, p) {
            return false;
        }
        let d = p.sqrt();
        let uj = std::mem::take(&mut self.u[j]);
        self.z.push((self.k[j] - dot(&uj, &self.z)) / d);
        for i in 0..self.k.len() {
            if self.blocked[i] {
                continue;
            }
            let v = (self.gram.get(i, j) - dot(&uj, &self.u[i])) / d;
            self.u[i].push(v);
        }
        let mut row = uj;
        row.push(d);
        self.factor.push(row);
        self.support.push(j);
        true
    }
}

struct KernelPath {
    support: Vec<usize>,
    history: Vec<f64>,
}

fn kernel_path(
    gram: &Matrix,
    k: &[f64],
    kxx: f64,
    sparsity: usize,
    rule: Rule,
    first: Option<usize>,
) -> Result<KernelPath> {
    let mut history = vec![kxx.max(0.0).sqrt()];
    if kxx == 0.0 {
        return Ok(KernelPath {
            support: Vec::new(),
            history,
        });
    }
    let stop = EARLY_STOP_TOL.max((KERNEL_STOP_REL * kxx).sqrt());
    let mut state = GramState::new(gram, k);

    while state.support.len() < sparsity {
        if *history.last().expect("non-empty") <= stop {
            break;
        }
        let pick = if state.support.is_empty() {
            first.or_else(|| state.best_first())
        } else {
            match rule {
                Rule::LeastSquares => state.best_least_squares(),
                Rule::Correlation => state.best_correlation(),
            }
        };
        let Some(j) = pick else { break };
        if !state.push(j) {
            if state.support.is_empty() && first.is_some() {
                break;
            }
            continue;
        }
        let (nu, _) = residual_and_coefficients(gram, k, kxx, &state.support)?;
        history.push(nu);
    }

    let last = *history.last().expect("non-empty");
    history.resize(sparsity + 1, last);
    Ok(KernelPath {
        support: state.support,
        history,
    })
}

fn finalize(gram: &Matrix, k: &[f64], kxx: f64, path: KernelPath) -> Result<KernelPursuitResult> {
    let (_, coefficients) = residual_and_coefficients(gram, k, kxx, &path.support)?;
    Ok(KernelPursuitResult {
        support: SupportSet::from_unchecked(path.support),
        coefficients,
        residual_norm_history: path.history,
    })
}

fn validate(gram: &Matrix, k: &[f64], kxx: f64, sparsity: usize) -> Result<()> {
    check_gram_inputs(gram, k, kxx)?;
    let max = gram.rows();
    if sparsity == 0 || sparsity > max {
        return Err(Error::SparsityOutOfRange { sparsity, max });
    }
    if let Some((row, col, diff)) = gram.asymmetry() {
        if diff > crate::linalg::SYMMETRY_TOL {
            return Err(Error::NotSymmetric { row, col, diff });
        }
    }
    Ok(())
}

/// Kernel OLS: first atom is the best single atom, later atoms minimise the
/// feature-space residual of the enlarged support.
pub fn kols(gram: &Matrix, k: &[f64], kxx: f64, sparsity: usize) -> Result<KernelPursuitResult> {
    validate(gram, k, kxx, sparsity)?;
    let path = kernel_path(gram, k, kxx, sparsity, Rule::LeastSquares, None)?;
    finalize(gram, k, kxx, path)
}

/// Kernel OMP: later atoms maximise `|k_j − K_jΛ β| / sqrt(K_jj)`.
pub fn komp(gram: &Matrix, k: &[f64], kxx: f64, sparsity: usize) -> Result<KernelPursuitResult> {
    validate(gram, k, kxx, sparsity)?;
    let path = kernel_path(gram, k, kxx, sparsity, Rule::Correlation, None)?;
    finalize(gram, k, kxx, path)
}

fn restart_paths(gram: &Matrix, k: &[f64], kxx: f64, sparsity: usize) -> Result<Vec<KernelPath>> {
    (0..gram.rows())
        .into_par_iter()
        .map(|j| kernel_path(gram, k, kxx, sparsity, Rule::LeastSquares, Some(j)))
        .collect()
}

fn best_restart(paths: &[KernelPath], level: usize) -> usize {
    let at = |p: &KernelPath| p.history[level.min(p.history.len() - 1)];
    let mut best = 0;
    for (j, p) in paths.iter().enumerate().skip(1) {
        if at(p) < at(&paths[best]) {
            best = j;
        }
    }
    best
}

/// Kernel restart-COLS: kernel OLS once per forced first atom, keeping the
/// smallest final residual (ties: lowest first atom).
pub fn kcols(gram: &Matrix, k: &[f64], kxx: f64, sparsity: usize) -> Result<KernelPursuitResult> {
    validate(gram, k, kxx, sparsity)?;
    if kxx == 0.0 {
        return finalize(gram, k, kxx, kernel_path(gram, k, kxx, sparsity, Rule::LeastSquares, None)?);
    }
    let mut paths = restart_paths(gram, k, kxx, sparsity)?;
    let best = best_restart(&paths, sparsity);
    finalize(gram, k, kxx, paths.swap_remove(best))
}

/// Kernel COLS for every level `1..=max_sparsity`; entry `s - 1` equals
/// `kcols(.., s)`.
pub fn kcols_all_levels(
    gram: &Matrix,
    k: &[f64],
    kxx: f64,
    max_sparsity: usize,
) -> Result<Vec<KernelPursuitResult>> {
    validate(gram, k, kxx, max_sparsity)?;
    if kxx == 0.0 {
        return (1..=max_sparsity)
            .map(|s| kcols(gram, k, kxx, s))
            .collect();
    }
    let paths = restart_paths(gram, k, kxx, max_sparsity)?;
    (1..=max_sparsity)
        .map(|level| {
            let p = &paths[best_restart(&paths, level)];
            let support: Vec<usize> = p.support.iter().take(level).copied().collect();
            let history = p.history[..=level].to_vec();
            finalize(gram, k, kxx, KernelPath { support, history })
        })
        .collect()
}
