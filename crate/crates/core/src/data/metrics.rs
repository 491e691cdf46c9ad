use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    /// Percent correct.
    pub overall: f64,
    /// Percent correct per true class; `None` for classes absent from
    /// `truth`.
    pub per_class: Vec<Option<f64>>,
}

pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<AccuracyReport> {
    if predictions.len() != truth.len() {
        return Err(Error::dims(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let classes = predictions.iter().chain(truth).max().map_or(0, |m| m + 1);
    let mut hits = vec![0usize; classes];
    let mut totals = vec![0usize; classes];
    for (&p, &t) in predictions.iter().zip(truth) {
        totals[t] += 1;
        if p == t {
            hits[t] += 1;
        }
    }
    let correct: usize = hits.iter().sum();
    Ok(AccuracyReport {
        overall: 100.0 * correct as f64 / truth.len() as f64,
        per_class: hits
            .iter()
            .zip(&totals)
            .map(|(&h, &n)| (n > 0).then(|| 100.0 * h as f64 / n as f64))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (divisor `n − 1`); `None` for one value.
    pub std: Option<f64>,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Empty("no values to summarize".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Ok(Summary { mean, std })
}
