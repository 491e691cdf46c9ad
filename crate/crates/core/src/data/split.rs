use super::rng::{self, shuffle};
use super::LabeledDataset;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(per_class_train: usize, repeats: usize, seed: u64) -> Result<Self> {
        if per_class_train == 0 || repeats == 0 {
            return Err(Error::config(
                "per-class training count and repeat count must be at least 1",
            ));
        }
        Ok(Self {
            per_class_train,
            repeats,
            seed,
        })
    }
}

/// Train and test sample positions, each ascending.
///
/// Each class's members are shuffled with the stream for `(seed, repeat)`,
/// classes in id order, and the first `per_class_train` go to training.
pub fn stratified_split_indices(
    ds: &LabeledDataset,
    spec: &SplitSpec,
    repeat: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.per_class_train == 0 {
        return Err(Error::config("per-class training count must be at least 1"));
    }
    let members = ds.class_members();
    for (class, m) in members.iter().enumerate() {
        if m.len() <= spec.per_class_train {
            return Err(Error::ClassTooSmall {
                class: ds.class_names()[class].clone(),
                available: m.len(),
                required: spec.per_class_train,
            });
        }
    }
    let mut rng = rng::stream(spec.seed, rng::SPLIT | repeat as u64);
    let mut train = Vec::with_capacity(members.len() * spec.per_class_train);
    let mut test = Vec::new();
    for mut m in members {
        shuffle(&mut rng, &mut m);
        train.extend_from_slice(&m[..spec.per_class_train]);
        test.extend_from_slice(&m[spec.per_class_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    ds: &LabeledDataset,
    spec: &SplitSpec,
    repeat: usize,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_split_indices(ds, spec, repeat)?;
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}
