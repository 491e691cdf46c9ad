//! Datasets, splits, synthetic data, cross-validation and accuracy.
//!
//! Samples are stored as columns (`d × N`), the same layout the classifiers
//! use for atoms. All randomness comes from [`rng::stream`].

mod csv_io;
mod cv;
mod metrics;
pub mod rng;
mod split;
mod synth;

pub use csv_io::{load_atoms_csv, load_csv, load_signal_csv, write_csv};
pub use cv::{cross_validate, cross_validate_repeat, CvCell, CvGrid, CvOutcome, DEFAULT_FOLDS};
pub use metrics::{accuracy, summarize, AccuracyReport, Summary};
pub use split::{stratified_split, stratified_split_indices, SplitSpec};
pub use synth::synth_subspace;

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    /// `class_names[i]` names class `i`; without names the classes are
    /// called `"0"`, `"1"`, and so on. Every label must have a name.
    pub fn new(features: Matrix, labels: Vec<usize>, class_names: Option<Vec<String>>) -> Result<Self> {
        if labels.len() != features.cols() {
            return Err(Error::dims(format!(
                "{} labels for {} samples",
                labels.len(),
                features.cols()
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let class_names = match class_names {
            Some(names) if names.len() < n_classes => {
                return Err(Error::config(format!(
                    "{} class names for label ids up to {}",
                    names.len(),
                    n_classes - 1
                )))
            }
            Some(names) => names,
            None => (0..n_classes).map(|c| c.to_string()).collect(),
        };
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.col(i)
    }

    pub fn samples(&self) -> Vec<&[f64]> {
        self.features.columns().collect()
    }

    /// Sample positions of each class, ascending.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }

    /// The samples at `indices`, in that order, keeping every class name.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subset of no samples".into()));
        }
        Ok(Self {
            features: self.features.select_columns(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        })
    }

    /// Copy with every sample scaled to unit ℓ2 norm.
    pub fn normalized(&self) -> Result<Self> {
        let mut columns = Vec::with_capacity(self.n_samples());
        for (column, x) in self.features.columns().enumerate() {
            let n = norm2(x);
            if n == 0.0 {
                return Err(Error::ZeroNormAtom { column });
            }
            columns.push(x.iter().map(|v| v / n).collect::<Vec<_>>());
        }
        Ok(Self {
            features: Matrix::from_columns(&columns)?,
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        })
    }
}
