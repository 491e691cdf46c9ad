use super::rng::{self, shuffle};
use super::{accuracy, LabeledDataset};
use crate::classify::{classify_batch_levels, ClassifierKind, LabeledDictionary};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use rayon::prelude::*;
use serde::Serialize;

/// Fold count used when none is given.
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvGrid {
    pub sparsity_levels: Vec<usize>,
    /// RBF widths; ignored unless the classifier uses an RBF kernel.
    pub gammas: Vec<f64>,
    pub folds: usize,
}

impl CvGrid {
    /// Sorts and deduplicates both lists.
    pub fn new(mut sparsity_levels: Vec<usize>, mut gammas: Vec<f64>, folds: usize) -> Result<Self> {
        if sparsity_levels.is_empty() || gammas.is_empty() {
            return Err(Error::config("cross-validation grid lists must be non-empty"));
        }
        if sparsity_levels.contains(&0) {
            return Err(Error::config("sparsity levels must be at least 1"));
        }
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::config(format!("gamma must be positive and finite, got {g}")));
        }
        if folds < 2 {
            return Err(Error::config(format!("need at least 2 folds, got {folds}")));
        }
        sparsity_levels.sort_unstable();
        sparsity_levels.dedup();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        Ok(Self {
            sparsity_levels,
            gammas,
            folds,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvCell {
    pub sparsity: usize,
    pub gamma: Option<f64>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvOutcome {
    pub best_sparsity: usize,
    pub best_gamma: Option<f64>,
    pub best_accuracy: f64,
    /// Ordered by gamma, then sparsity.
    pub cells: Vec<CvCell>,
}

/// Stratified k-fold selection of `(S, gamma)` for `template`, whose own
/// sparsity is ignored. The best cell has the highest mean fold accuracy;
/// ties go to the smaller `S`, then the smaller gamma.
pub fn cross_validate(
    train: &LabeledDataset,
    template: &ClassifierKind,
    grid: &CvGrid,
    seed: u64,
) -> Result<CvOutcome> {
    cross_validate_repeat(train, template, grid, seed, 0)
}

/// [`cross_validate`] with folds drawn from the stream of `repeat`, so each
/// benchmark repeat gets its own folds.
pub fn cross_validate_repeat(
    train: &LabeledDataset,
    template: &ClassifierKind,
    grid: &CvGrid,
    seed: u64,
    repeat: usize,
) -> Result<CvOutcome> {
    let grid = CvGrid::new(grid.sparsity_levels.clone(), grid.gammas.clone(), grid.folds)?;
    let folds = fold_assignment(train, grid.folds, seed, repeat)?;
    let max_s = *grid.sparsity_levels.last().expect("non-empty grid");
    let kernels: Vec<(Option<f64>, Option<KernelSpec>)> = match template.kernel {
        Some(KernelSpec::Rbf { .. }) => grid
            .gammas
            .iter()
            .map(|&g| Ok((Some(g), Some(KernelSpec::rbf(g)?))))
            .collect::<Result<_>>()?,
        other => vec![(None, other)],
    };
    let kind = ClassifierKind {
        sparsity: max_s,
        ..*template
    };
    kind.validate()?;

    let jobs: Vec<(usize, usize)> = (0..kernels.len())
        .flat_map(|g| (0..grid.folds).map(move |f| (g, f)))
        .collect();
    // acc[job][level index in grid.sparsity_levels]
    let acc: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (fit_idx, eval_idx): (Vec<usize>, Vec<usize>) =
                (0..train.n_samples()).partition(|&i| folds[i] != f);
            let fit_ds = train.subset(&fit_idx)?;
            let mut model = LabeledDictionary::fit(fit_ds.features(), fit_ds.labels())?;
            let kind = ClassifierKind {
                kernel: kernels[g].1,
                ..kind
            };
            if let Some(spec) = kind.kernel {
                model = model.with_kernel(spec)?;
            }
            let samples: Vec<&[f64]> = eval_idx.iter().map(|&i| train.sample(i)).collect();
            let truth: Vec<usize> = eval_idx.iter().map(|&i| train.labels()[i]).collect();
            let levels = classify_batch_levels(&model, &samples, &kind)?;
            grid.sparsity_levels
                .iter()
                .map(|&s| {
                    let pred: Vec<usize> = levels.iter().map(|l| l[s - 1].label).collect();
                    accuracy(&pred, &truth).map(|a| a.overall)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (g, (gamma, _)) in kernels.iter().enumerate() {
        for (si, &s) in grid.sparsity_levels.iter().enumerate() {
            let fold_accuracies: Vec<f64> = (0..grid.folds)
                .map(|f| acc[g * grid.folds + f][si])
                .collect();
            let mean_accuracy = fold_accuracies.iter().sum::<f64>() / grid.folds as f64;
            cells.push(CvCell {
                sparsity: s,
                gamma: *gamma,
                fold_accuracies,
                mean_accuracy,
            });
        }
    }

    let mut best = &cells[0];
    for c in &cells[1..] {
        let better = c.mean_accuracy > best.mean_accuracy
            || (c.mean_accuracy == best.mean_accuracy
                && (c.sparsity, c.gamma.unwrap_or(0.0)) < (best.sparsity, best.gamma.unwrap_or(0.0)));
        if better {
            best = c;
        }
    }
    Ok(CvOutcome {
        best_sparsity: best.sparsity,
        best_gamma: best.gamma,
        best_accuracy: best.mean_accuracy,
        cells: cells.clone(),
    })
}

/// Fold id per sample: each class is shuffled and dealt round-robin.
fn fold_assignment(ds: &LabeledDataset, folds: usize, seed: u64, repeat: usize) -> Result<Vec<usize>> {
    let members = ds.class_members();
    for (class, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < folds {
            return Err(Error::ClassTooSmall {
                class: ds.class_names()[class].clone(),
                available: m.len(),
                required: folds - 1,
            });
        }
    }
    let mut rng = rng::stream(seed, rng::CV | repeat as u64);
    let mut fold = vec![0; ds.n_samples()];
    for mut m in members {
        shuffle(&mut rng, &mut m);
        for (pos, i) in m.into_iter().enumerate() {
            fold[i] = pos % folds;
        }
    }
    Ok(fold)
}
