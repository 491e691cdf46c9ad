//! Greedy sparse solvers over an explicit dictionary: OMP, OLS, restart-COLS
//! and an exhaustive best-subset oracle.
//!
//! All solvers expect unit-norm atoms. Residual norms reported here come from
//! an incrementally maintained orthogonal projection, so they are the
//! least-squares residuals on the selected support; the coefficients are
//! recomputed with [`least_squares`] on the final support.
//!
//! Conventions shared by every solver:
//! - ties in any argmax/argmin go to the lowest atom index;
//! - `residual_history[m]` is the residual norm after `m` atoms, so
//!   `residual_history[0]` is the signal norm and a full run has
//!   `sparsity + 1` entries;
//! - a run stops early once the residual drops below [`EARLY_STOP_TOL`] or
//!   no independent atom is left, and the history is padded with its last
//!   value;
//! - a zero signal yields an empty support and the history `[0]`.

mod exhaustive;
mod fixture;

pub use exhaustive::{
    exhaustive_best_subset, exhaustive_best_subset_with_cap, subset_count, DEFAULT_SUBSET_CAP,
};
pub use fixture::fig1_fixture;

use crate::error::{Error, Result};
use crate::linalg::{dot, least_squares, norm2, Matrix, Projector, Vector, DEPENDENCE_TOL};
use rayon::prelude::*;
use serde::Serialize;

/// Residual norm below which further atom selection stops.
pub const EARLY_STOP_TOL: f64 = 1e-12;

/// Allowed deviation of an atom's ℓ2 norm from one.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Ordered atom indices in selection order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Checks for duplicates and that every index is below `n_atoms`.
    pub fn new(indices: Vec<usize>, n_atoms: usize) -> Result<Self> {
        let mut seen = vec![false; n_atoms];
        for &i in &indices {
            if i >= n_atoms {
                return Err(Error::dims(format!(
                    "support index {i} out of range for {n_atoms} atoms"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::config(format!("duplicate support index {i}")));
            }
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_unchecked(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    /// Indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PursuitResult {
    pub support: SupportSet,
    /// Aligned with `support`.
    pub coefficients: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub final_residual_norm: f64,
}

impl PursuitResult {
    fn zero_signal() -> Self {
        Self {
            support: SupportSet::default(),
            coefficients: Vec::new(),
            residual_history: vec![0.0],
            final_residual_norm: 0.0,
        }
    }

    /// Residual norm after `level` atoms, reading padded entries past an
    /// early stop.
    pub fn residual_at(&self, level: usize) -> f64 {
        let h = &self.residual_history;
        h[level.min(h.len() - 1)]
    }
}

/// Checks shapes, the sparsity range and unit-norm atoms.
pub(crate) fn validate(dict: &Matrix, signal: &[f64], sparsity: usize) -> Result<()> {
    if signal.len() != dict.rows() {
        return Err(Error::dims(format!(
            "signal of length {} against atoms of length {}",
            signal.len(),
            dict.rows()
        )));
    }
    let max = dict.rows().min(dict.cols());
    if sparsity == 0 || sparsity > max {
        return Err(Error::SparsityOutOfRange { sparsity, max });
    }
    for (column, atom) in dict.columns().enumerate() {
        let norm = norm2(atom);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotNormalized { column, norm });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    /// Largest absolute correlation with the residual.
    Correlation,
    /// Smallest residual after projecting onto the enlarged support.
    LeastSquares,
}

/// Support and residual history of one greedy run, before coefficients are
/// computed.
#[derive(Debug, Clone)]
pub(crate) struct Path {
    pub support: Vec<usize>,
    pub history: Vec<f64>,
}

impl Path {
    pub fn residual_at(&self, level: usize) -> f64 {
        self.history[level.min(self.history.len() - 1)]
    }
}

/// Index of the atom with the largest `|⟨a_j, r⟩|` among those not blocked.
fn most_correlated(dict: &Matrix, residual: &[f64], blocked: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, atom) in dict.columns().enumerate() {
        if blocked[j] {
            continue;
        }
        let c = dot(atom, residual).abs();
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((j, c));
        }
    }
    best.map(|(j, _)| j)
}

/// Per-atom components orthogonal to the current support, kept up to date
/// as atoms are added. Used by the OLS rule.
struct OrthoCandidates {
    rows: usize,
    ortho: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl OrthoCandidates {
    fn new(dict: &Matrix) -> Self {
        Self {
            rows: dict.rows(),
            ortho: dict.data().to_vec(),
            sq_norms: dict.columns().map(|c| dot(c, c)).collect(),
        }
    }

    fn deflate(&mut self, q: &[f64], blocked: &[bool]) {
        for (j, w) in self.ortho.chunks_exact_mut(self.rows).enumerate() {
            if blocked[j] {
                continue;
            }
            let c = dot(q, w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
            self.sq_norms[j] = dot(w, w);
        }
    }

    /// Candidate maximising `⟨w_j, r⟩² / ‖w_j‖²`, i.e. the largest drop in
    /// squared residual. Numerically dependent candidates are blocked.
    fn best(&self, residual: &[f64], blocked: &mut [bool]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in self.ortho.chunks_exact(self.rows).enumerate() {
            if blocked[j] {
                continue;
            }
            let sq = self.sq_norms[j];
            if sq <= DEPENDENCE_TOL * DEPENDENCE_TOL {
                blocked[j] = true;
                continue;
            }
            let c = dot(w, residual);
            let score = c * c / sq;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }
}

/// One greedy run. `first` forces the first atom (used by COLS restarts).
fn greedy_path(
    dict: &Matrix,
    signal: &[f64],
    sparsity: usize,
    rule: Rule,
    first: Option<usize>,
) -> Path {
    let mut proj = Projector::new(signal);
    let mut history = vec![proj.residual_norm()];
    let mut support = Vec::with_capacity(sparsity);
    if proj.residual_norm() == 0.0 {
        return Path { support, history };
    }

    // Selected atoms and numerically dependent ones are both blocked.
    let mut blocked = vec![false; dict.cols()];
    let mut candidates = (rule == Rule::LeastSquares).then(|| OrthoCandidates::new(dict));

    while support.len() < sparsity && proj.residual_norm() >= EARLY_STOP_TOL {
        let pick = if support.is_empty() {
            first.or_else(|| most_correlated(dict, proj.residual(), &blocked))
        } else {
            match candidates.as_ref() {
                Some(c) => c.best(proj.residual(), &mut blocked),
                None => most_correlated(dict, proj.residual(), &blocked),
            }
        };
        let Some(j) = pick else { break };
        blocked[j] = true;
        if !proj.push(dict.col(j)) {
            continue;
        }
        support.push(j);
        history.push(proj.residual_norm());
        if let Some(c) = candidates.as_mut() {
            c.deflate(proj.last_direction(), &blocked);
        }
    }

    let last = *history.last().expect("history starts non-empty");
    history.resize(sparsity + 1, last);
    Path { support, history }
}

/// Turns a path into a result by solving for the coefficients.
pub(crate) fn finalize(dict: &Matrix, signal: &[f64], path: Path) -> Result<PursuitResult> {
    let final_residual_norm = *path.history.last().expect("non-empty history");
    let coefficients = if path.support.is_empty() {
        Vec::new()
    } else {
        let sub = dict.select_columns(&path.support)?;
        least_squares(&sub, signal)?.coefficients.into_inner()
    };
    Ok(PursuitResult {
        support: SupportSet(path.support),
        coefficients,
        residual_history: path.history,
        final_residual_norm,
    })
}

fn run_greedy(dict: &Matrix, signal: &Vector, sparsity: usize, rule: Rule) -> Result<PursuitResult> {
    validate(dict, signal, sparsity)?;
    if signal.norm() == 0.0 {
        return Ok(PursuitResult::zero_signal());
    }
    finalize(dict, signal, greedy_path(dict, signal, sparsity, rule, None))
}

/// Orthogonal matching pursuit: pick the atom most correlated with the
/// residual, then refit on the whole support.
pub fn omp(dict: &Matrix, signal: &Vector, sparsity: usize) -> Result<PursuitResult> {
    run_greedy(dict, signal, sparsity, Rule::Correlation)
}

/// Orthogonal least squares: pick the atom whose inclusion gives the
/// smallest residual after projection.
pub fn ols(dict: &Matrix, signal: &Vector, sparsity: usize) -> Result<PursuitResult> {
    run_greedy(dict, signal, sparsity, Rule::LeastSquares)
}

/// OLS with the first atom forced to `first`.
pub fn ols_with_first(
    dict: &Matrix,
    signal: &Vector,
    sparsity: usize,
    first: usize,
) -> Result<PursuitResult> {
    validate(dict, signal, sparsity)?;
    if first >= dict.cols() {
        return Err(Error::dims(format!(
            "first atom {first} out of range for {} atoms",
            dict.cols()
        )));
    }
    if signal.norm() == 0.0 {
        return Ok(PursuitResult::zero_signal());
    }
    finalize(
        dict,
        signal,
        greedy_path(dict, signal, sparsity, Rule::LeastSquares, Some(first)),
    )
}

/// All OLS restarts, one per forced first atom, in atom order.
fn restart_paths(dict: &Matrix, signal: &[f64], sparsity: usize) -> Vec<Path> {
    (0..dict.cols())
        .into_par_iter()
        .map(|j| greedy_path(dict, signal, sparsity, Rule::LeastSquares, Some(j)))
        .collect()
}

/// Index of the restart with the smallest residual at `level`; ties go to
/// the lower first atom.
fn best_restart(paths: &[Path], level: usize) -> usize {
    let mut best = 0;
    for (j, p) in paths.iter().enumerate().skip(1) {
        if p.residual_at(level) < paths[best].residual_at(level) {
            best = j;
        }
    }
    best
}

/// Restart-COLS: run OLS once per dictionary atom with that atom forced
/// first, and keep the run with the smallest final residual.
pub fn cols(dict: &Matrix, signal: &Vector, sparsity: usize) -> Result<PursuitResult> {
    validate(dict, signal, sparsity)?;
    if signal.norm() == 0.0 {
        return Ok(PursuitResult::zero_signal());
    }
    let mut paths = restart_paths(dict, signal, sparsity);
    let best = best_restart(&paths, sparsity);
    finalize(dict, signal, paths.swap_remove(best))
}

/// COLS results for every sparsity level `1..=max_sparsity` from a single
/// set of restarts. Entry `s - 1` equals `cols(dict, signal, s)`.
///
/// OLS is nested (the first `s` selections of a longer run are the run of
/// length `s`), so each restart only needs to be computed once.
pub fn cols_all_levels(
    dict: &Matrix,
    signal: &Vector,
    max_sparsity: usize,
) -> Result<Vec<PursuitResult>> {
    validate(dict, signal, max_sparsity)?;
    if signal.norm() == 0.0 {
        return Ok(vec![PursuitResult::zero_signal(); max_sparsity]);
    }
    let paths = restart_paths(dict, signal, max_sparsity);
    (1..=max_sparsity)
        .map(|level| {
            let p = &paths[best_restart(&paths, level)];
            let support: Vec<usize> = p.support.iter().take(level).copied().collect();
            let history = p.history[..=level].to_vec();
            finalize(dict, signal, Path { support, history })
        })
        .collect()
}
