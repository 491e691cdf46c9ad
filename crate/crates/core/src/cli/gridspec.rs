//! Parsers for list and grid flags.
//!
//! A list is comma-separated items, each a number or an inclusive integer
//! range `a..b`: `1..4,8` is `[1, 2, 3, 4, 8]`.
//!
//! A grid spec is `;`-separated `key=list` pairs with keys `S`, `gamma` and
//! `folds`, for example `S=1..8;gamma=0.1,1,10;folds=5`. Missing keys take
//! the defaults in [`DEFAULT_GRID`]. The spec `none` disables
//! cross-validation.

use crate::data::CvGrid;
use crate::error::{Error, Result};

pub const DEFAULT_GRID: &str = "S=1..8;gamma=0.1,1,10;folds=5";

pub fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if let Some((a, b)) = item.split_once("..") {
            let a = parse_count(a)?;
            let b = parse_count(b)?;
            if a > b {
                return Err(Error::config(format!("empty range '{item}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_count(item)?);
        }
    }
    Ok(out)
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("'{s}' is not a non-negative integer")))
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::config(format!("'{s}' is not a finite number")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGrid {
    pub grid: CvGrid,
    /// Keys that took their default value.
    pub defaulted: Vec<&'static str>,
}

/// `Ok(None)` for `none`.
pub fn parse_grid(text: &str) -> Result<Option<ParsedGrid>> {
    if text.trim().eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let mut sparsity = None;
    let mut gammas = None;
    let mut folds = None;
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::config(format!("grid entry '{part}' is not key=value")))?;
        match key.trim() {
            "S" | "s" | "sparsity" => sparsity = Some(parse_counts(value)?),
            "gamma" => gammas = Some(parse_reals(value)?),
            "folds" => folds = Some(parse_count(value)?),
            other => return Err(Error::config(format!("unknown grid key '{other}'"))),
        }
    }
    let mut defaulted = Vec::new();
    let sparsity = sparsity.unwrap_or_else(|| {
        defaulted.push("S");
        (1..=8).collect()
    });
    let gammas = gammas.unwrap_or_else(|| {
        defaulted.push("gamma");
        vec![0.1, 1.0, 10.0]
    });
    let folds = folds.unwrap_or_else(|| {
        defaulted.push("folds");
        crate::data::DEFAULT_FOLDS
    });
    Ok(Some(ParsedGrid {
        grid: CvGrid::new(sparsity, gammas, folds)?,
        defaulted,
    }))
}
