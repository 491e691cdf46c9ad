//! Sparse-representation classifiers.
//!
//! Every classifier reduces to "compute a residual norm per class, predict
//! the class with the smallest one". The class-dependent methods run one
//! pursuit per class on that class's atoms only. SRC and KSRC run a single
//! pursuit on the whole dictionary and split its coefficients by class.
//!
//! Ties between classes go to the lowest class id.

use crate::error::{Error, Result};
use crate::kernel::{self, KernelSpec, NEGATIVE_SQ_TOL};
use crate::linalg::{dot, norm2, Matrix, Vector};
use crate::pursuit::{self, SupportSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Src,
    Ksrc,
    CdOmp,
    CdOls,
    CdCols,
    KcdOmp,
    KcdOls,
    KcdCols,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Src,
        Method::Ksrc,
        Method::CdOmp,
        Method::CdOls,
        Method::CdCols,
        Method::KcdOmp,
        Method::KcdOls,
        Method::KcdCols,
    ];

    pub fn is_kernel(self) -> bool {
        matches!(
            self,
            Method::Ksrc | Method::KcdOmp | Method::KcdOls | Method::KcdCols
        )
    }

    pub fn is_class_dependent(self) -> bool {
        !matches!(self, Method::Src | Method::Ksrc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Src => "src",
            Method::Ksrc => "ksrc",
            Method::CdOmp => "cd_omp",
            Method::CdOls => "cd_ols",
            Method::CdCols => "cd_cols",
            Method::KcdOmp => "kcd_omp",
            Method::KcdOls => "kcd_ols",
            Method::KcdCols => "kcd_cols",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown method '{s}', expected one of {}",
                    Method::ALL.map(Method::as_str).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierKind {
    pub method: Method,
    pub sparsity: usize,
    pub kernel: Option<KernelSpec>,
}

impl ClassifierKind {
    /// Checks that `sparsity ≥ 1` and that a kernel is given exactly when
    /// the method needs one.
    pub fn new(method: Method, sparsity: usize, kernel: Option<KernelSpec>) -> Result<Self> {
        let kind = Self {
            method,
            sparsity,
            kernel,
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::config("sparsity must be at least 1"));
        }
        match (self.method.is_kernel(), &self.kernel) {
            (true, None) => Err(Error::config(format!(
                "method {} needs a kernel",
                self.method
            ))),
            (false, Some(_)) => Err(Error::config(format!(
                "method {} does not take a kernel",
                self.method
            ))),
            (true, Some(spec)) => spec.validate(),
            (false, None) => Ok(()),
        }
    }

    pub fn with_sparsity(self, sparsity: usize) -> Self {
        Self { sparsity, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub residuals: Vec<f64>,
    pub label: usize,
    /// Selected atoms per class, as column positions in the full dictionary.
    pub per_class_support: Option<Vec<SupportSet>>,
}

impl ClassificationResult {
    fn from_residuals(residuals: Vec<f64>, supports: Vec<SupportSet>) -> Self {
        let label = argmin(&residuals);
        Self {
            residuals,
            label,
            per_class_support: Some(supports),
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
struct KernelCache {
    spec: KernelSpec,
    full: Matrix,
    per_class: Vec<Matrix>,
}

impl KernelCache {
    fn new(spec: KernelSpec, atoms: &Matrix, class_index: &[Vec<usize>]) -> Result<Self> {
        let full = kernel::kernel_matrix(&spec, atoms)?;
        let per_class = class_index
            .iter()
            .map(|idx| full.principal_submatrix(idx))
            .collect::<Result<_>>()?;
        Ok(Self {
            spec,
            full,
            per_class,
        })
    }
}

/// Unit-norm training atoms grouped by class.
#[derive(Debug, Clone)]
pub struct LabeledDictionary {
    atoms: Matrix,
    labels: Vec<usize>,
    class_index: Vec<Vec<usize>>,
    class_atoms: Vec<Matrix>,
    kernel: Option<KernelCache>,
}

impl LabeledDictionary {
    /// Normalizes every atom and groups columns by label. Class ids must be
    /// contiguous from 0.
    pub fn fit(atoms: &Matrix, labels: &[usize]) -> Result<Self> {
        if labels.len() != atoms.cols() {
            return Err(Error::dims(format!(
                "{} labels for {} atoms",
                labels.len(),
                atoms.cols()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Empty("dictionary has no atoms".into()));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut class_index = vec![Vec::new(); classes];
        for (j, &l) in labels.iter().enumerate() {
            class_index[l].push(j);
        }
        if let Some(class) = class_index.iter().position(Vec::is_empty) {
            return Err(Error::EmptyClass { class });
        }

        let mut columns = Vec::with_capacity(atoms.cols());
        for (column, a) in atoms.columns().enumerate() {
            columns.push(normalize(a).ok_or(Error::ZeroNormAtom { column })?);
        }
        let atoms = Matrix::from_columns(&columns)?;
        let class_atoms = class_index
            .iter()
            .map(|idx| atoms.select_columns(idx))
            .collect::<Result<_>>()?;
        Ok(Self {
            atoms,
            labels: labels.to_vec(),
            class_index,
            class_atoms,
            kernel: None,
        })
    }

    /// Precomputes the Gram matrices for `spec`.
    pub fn with_kernel(mut self, spec: KernelSpec) -> Result<Self> {
        self.kernel = Some(KernelCache::new(spec, &self.atoms, &self.class_index)?);
        Ok(self)
    }

    pub fn atoms(&self) -> &Matrix {
        &self.atoms
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    pub fn n_classes(&self) -> usize {
        self.class_index.len()
    }

    pub fn dim(&self) -> usize {
        self.atoms.rows()
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.class_index[class].len()
    }

    /// Sparsity actually used for `class`: `S` clamped to what the class
    /// can support.
    pub fn effective_sparsity(&self, class: usize, kind: &ClassifierKind) -> usize {
        let mut cap = self.class_size(class);
        if !kind.method.is_kernel() {
            cap = cap.min(self.dim());
        }
        kind.sparsity.min(cap)
    }

    fn global_sparsity(&self, kind: &ClassifierKind) -> usize {
        let mut cap = self.atoms.cols();
        if !kind.method.is_kernel() {
            cap = cap.min(self.dim());
        }
        kind.sparsity.min(cap)
    }

    fn kernel_cache(&self, spec: &KernelSpec) -> Result<Cow<'_, KernelCache>> {
        match &self.kernel {
            Some(c) if c.spec == *spec => Ok(Cow::Borrowed(c)),
            _ => {
                log::debug!("building Gram matrices for {spec:?} on demand");
                Ok(Cow::Owned(KernelCache::new(
                    *spec,
                    &self.atoms,
                    &self.class_index,
                )?))
            }
        }
    }

    fn warn_clamping(&self, kind: &ClassifierKind) {
        if kind.method.is_class_dependent() {
            for class in 0..self.n_classes() {
                let s = self.effective_sparsity(class, kind);
                if s < kind.sparsity {
                    log::warn!(
                        "class {class}: sparsity {} clamped to {s}",
                        kind.sparsity
                    );
                }
            }
        } else {
            let s = self.global_sparsity(kind);
            if s < kind.sparsity {
                log::warn!("sparsity {} clamped to {s}", kind.sparsity);
            }
        }
    }

    fn to_global(&self, class: usize, local: &SupportSet) -> SupportSet {
        SupportSet::from_unchecked(local.iter().map(|i| self.class_index[class][i]).collect())
    }
}

/// Free-function form of [`LabeledDictionary::fit`].
pub fn fit(atoms: &Matrix, labels: &[usize]) -> Result<LabeledDictionary> {
    LabeledDictionary::fit(atoms, labels)
}

fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Per-sample kernel quantities shared by every class.
struct KernelSample<'a> {
    cache: Cow<'a, KernelCache>,
    k: Vec<f64>,
    kxx: f64,
}

impl<'a> KernelSample<'a> {
    fn new(model: &'a LabeledDictionary, x: &[f64], spec: &KernelSpec) -> Result<Self> {
        let cache = model.kernel_cache(spec)?;
        let k = kernel::kernel_vector(spec, x, &model.atoms)?.into_inner();
        let kxx = spec.apply(x, x);
        Ok(Self { cache, k, kxx })
    }

    fn class_k(&self, model: &LabeledDictionary, class: usize) -> Vec<f64> {
        model.class_index[class].iter().map(|&j| self.k[j]).collect()
    }
}

fn check_sample(model: &LabeledDictionary, x: &[f64]) -> Result<Vector> {
    if x.len() != model.dim() {
        return Err(Error::dims(format!(
            "sample of length {} against atoms of length {}",
            x.len(),
            model.dim()
        )));
    }
    Vector::try_from(x)
}

fn check_class(model: &LabeledDictionary, class: usize) -> Result<()> {
    if class >= model.n_classes() {
        return Err(Error::config(format!(
            "class {class} out of range for {} classes",
            model.n_classes()
        )));
    }
    Ok(())
}

/// Residual norm and support of one class.
pub fn class_residual(
    model: &LabeledDictionary,
    x: &[f64],
    class: usize,
    kind: &ClassifierKind,
) -> Result<(f64, SupportSet)> {
    kind.validate()?;
    check_class(model, class)?;
    let x = check_sample(model, x)?;
    model.warn_clamping(kind);
    if kind.method.is_class_dependent() {
        let ks = kernel_sample(model, &x, kind)?;
        cd_residual(model, &x, ks.as_ref(), class, kind)
    } else {
        let r = classify_checked(model, &x, kind)?;
        let support = r.per_class_support.expect("global methods report supports");
        Ok((r.residuals[class], support[class].clone()))
    }
}

fn kernel_sample<'a>(
    model: &'a LabeledDictionary,
    x: &[f64],
    kind: &ClassifierKind,
) -> Result<Option<KernelSample<'a>>> {
    kind.kernel
        .as_ref()
        .map(|spec| KernelSample::new(model, x, spec))
        .transpose()
}

fn cd_residual(
    model: &LabeledDictionary,
    x: &Vector,
    ks: Option<&KernelSample<'_>>,
    class: usize,
    kind: &ClassifierKind,
) -> Result<(f64, SupportSet)> {
    let s = model.effective_sparsity(class, kind);
    let dict = &model.class_atoms[class];
    let (nu, local) = match kind.method {
        Method::CdOmp => {
            let r = pursuit::omp(dict, x, s)?;
            (r.final_residual_norm, r.support)
        }
        Method::CdOls => {
            let r = pursuit::ols(dict, x, s)?;
            (r.final_residual_norm, r.support)
        }
        Method::CdCols => {
            let r = pursuit::cols(dict, x, s)?;
            (r.final_residual_norm, r.support)
        }
        Method::KcdOmp | Method::KcdOls | Method::KcdCols => {
            let ks = ks.expect("kernel methods carry a kernel sample");
            let gram = &ks.cache.per_class[class];
            let k = ks.class_k(model, class);
            let r = match kind.method {
                Method::KcdOmp => kernel::komp(gram, &k, ks.kxx, s)?,
                Method::KcdOls => kernel::kols(gram, &k, ks.kxx, s)?,
                _ => kernel::kcols(gram, &k, ks.kxx, s)?,
            };
            (r.final_residual_norm(), r.support)
        }
        Method::Src | Method::Ksrc => unreachable!("global methods are not per class"),
    };
    Ok((nu, model.to_global(class, &local)))
}

/// Classifies one sample.
pub fn classify(
    model: &LabeledDictionary,
    x: &[f64],
    kind: &ClassifierKind,
) -> Result<ClassificationResult> {
    kind.validate()?;
    let x = check_sample(model, x)?;
    model.warn_clamping(kind);
    classify_checked(model, &x, kind)
}

fn classify_checked(
    model: &LabeledDictionary,
    x: &Vector,
    kind: &ClassifierKind,
) -> Result<ClassificationResult> {
    let ks = kernel_sample(model, x, kind)?;
    match kind.method {
        Method::Src => src(model, x, kind),
        Method::Ksrc => ksrc(model, ks.as_ref().expect("kernel present"), kind),
        _ => {
            let per_class: Vec<(f64, SupportSet)> = (0..model.n_classes())
                .into_par_iter()
                .map(|class| cd_residual(model, x, ks.as_ref(), class, kind))
                .collect::<Result<_>>()?;
            let (residuals, supports) = per_class.into_iter().unzip();
            Ok(ClassificationResult::from_residuals(residuals, supports))
        }
    }
}

/// Splits a global support and its coefficients by class.
fn split_by_class(
    model: &LabeledDictionary,
    support: &SupportSet,
    coefficients: &[f64],
) -> Vec<(Vec<usize>, Vec<f64>)> {
    let mut parts = vec![(Vec::new(), Vec::new()); model.n_classes()];
    for (j, &b) in support.iter().zip(coefficients) {
        let part = &mut parts[model.labels[j]];
        part.0.push(j);
        part.1.push(b);
    }
    parts
}

fn src(model: &LabeledDictionary, x: &Vector, kind: &ClassifierKind) -> Result<ClassificationResult> {
    let s = model.global_sparsity(kind);
    let r = pursuit::omp(&model.atoms, x, s)?;
    let mut residuals = Vec::with_capacity(model.n_classes());
    let mut supports = Vec::with_capacity(model.n_classes());
    for (cols, beta) in split_by_class(model, &r.support, &r.coefficients) {
        let mut res = x.as_slice().to_vec();
        for (&j, &b) in cols.iter().zip(&beta) {
            crate::linalg::axpy(-b, model.atoms.col(j), &mut res);
        }
        residuals.push(norm2(&res));
        supports.push(SupportSet::from_unchecked(cols));
    }
    Ok(ClassificationResult::from_residuals(residuals, supports))
}

fn ksrc(
    model: &LabeledDictionary,
    ks: &KernelSample<'_>,
    kind: &ClassifierKind,
) -> Result<ClassificationResult> {
    let s = model.global_sparsity(kind);
    let r = kernel::komp(&ks.cache.full, &ks.k, ks.kxx, s)?;
    let mut residuals = Vec::with_capacity(model.n_classes());
    let mut supports = Vec::with_capacity(model.n_classes());
    for (cols, beta) in split_by_class(model, &r.support, &r.coefficients) {
        let sq = if cols.is_empty() {
            ks.kxx
        } else {
            let sub = ks.cache.full.principal_submatrix(&cols)?;
            let k_sub: Vec<f64> = cols.iter().map(|&j| ks.k[j]).collect();
            ks.kxx - 2.0 * dot(&beta, &k_sub) + dot(&beta, &sub.mul_vec(&beta)?)
        };
        if sq < -NEGATIVE_SQ_TOL * ks.kxx.max(1.0) {
            return Err(Error::InconsistentGram { value: sq });
        }
        residuals.push(sq.max(0.0).sqrt());
        supports.push(SupportSet::from_unchecked(cols));
    }
    Ok(ClassificationResult::from_residuals(residuals, supports))
}

/// Classifies every sample, in order. The first failure is reported with
/// its position.
pub fn classify_batch<S: AsRef<[f64]> + Sync>(
    model: &LabeledDictionary,
    samples: &[S],
    kind: &ClassifierKind,
) -> Result<Vec<ClassificationResult>> {
    kind.validate()?;
    model.warn_clamping(kind);
    samples
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            check_sample(model, x.as_ref())
                .and_then(|x| classify_checked(model, &x, kind))
                .map_err(|e| Error::Sample {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Results for every sparsity level `1..=kind.sparsity`; entry `s - 1`
/// equals `classify(model, x, &kind.with_sparsity(s))`.
///
/// Greedy paths are nested, so the class-dependent methods run one pursuit
/// per class at the largest level and read the smaller levels off it.
pub fn classify_levels(
    model: &LabeledDictionary,
    x: &[f64],
    kind: &ClassifierKind,
) -> Result<Vec<ClassificationResult>> {
    kind.validate()?;
    let x = check_sample(model, x)?;
    levels_checked(model, &x, kind)
}

/// [`classify_levels`] for every sample; the outer index is the sample.
pub fn classify_batch_levels<S: AsRef<[f64]> + Sync>(
    model: &LabeledDictionary,
    samples: &[S],
    kind: &ClassifierKind,
) -> Result<Vec<Vec<ClassificationResult>>> {
    kind.validate()?;
    model.warn_clamping(kind);
    samples
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            check_sample(model, x.as_ref())
                .and_then(|x| levels_checked(model, &x, kind))
                .map_err(|e| Error::Sample {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

fn levels_checked(
    model: &LabeledDictionary,
    x: &Vector,
    kind: &ClassifierKind,
) -> Result<Vec<ClassificationResult>> {
    let max = kind.sparsity;
    if !kind.method.is_class_dependent() {
        return (1..=max)
            .map(|s| classify_checked(model, x, &kind.with_sparsity(s)))
            .collect();
    }
    let ks = kernel_sample(model, x, kind)?;
    // traces[class][level - 1] = (residual, global support)
    let traces: Vec<Vec<(f64, SupportSet)>> = (0..model.n_classes())
        .into_par_iter()
        .map(|class| class_levels(model, x, ks.as_ref(), class, kind))
        .collect::<Result<_>>()?;
    Ok((0..max)
        .map(|level| {
            let (residuals, supports) = traces.iter().map(|t| t[level].clone()).unzip();
            ClassificationResult::from_residuals(residuals, supports)
        })
        .collect())
}

fn class_levels(
    model: &LabeledDictionary,
    x: &Vector,
    ks: Option<&KernelSample<'_>>,
    class: usize,
    kind: &ClassifierKind,
) -> Result<Vec<(f64, SupportSet)>> {
    let cap = model.effective_sparsity(class, kind);
    let dict = &model.class_atoms[class];
    let prefixes = |history: &[f64], support: &SupportSet| -> Vec<(f64, SupportSet)> {
        (1..=kind.sparsity)
            .map(|s| {
                let level = s.min(cap);
                let nu = history[level.min(history.len() - 1)];
                let local: Vec<usize> = support.iter().take(level).collect();
                (nu, model.to_global(class, &SupportSet::from_unchecked(local)))
            })
            .collect()
    };
    let pad = |per_level: Vec<(f64, SupportSet)>| -> Vec<(f64, SupportSet)> {
        (1..=kind.sparsity)
            .map(|s| per_level[s.min(cap) - 1].clone())
            .collect()
    };

    Ok(match kind.method {
        Method::CdOmp => {
            let r = pursuit::omp(dict, x, cap)?;
            prefixes(&r.residual_history, &r.support)
        }
        Method::CdOls => {
            let r = pursuit::ols(dict, x, cap)?;
            prefixes(&r.residual_history, &r.support)
        }
        Method::CdCols => pad(
            pursuit::cols_all_levels(dict, x, cap)?
                .into_iter()
                .map(|r| (r.final_residual_norm, model.to_global(class, &r.support)))
                .collect(),
        ),
        Method::KcdOmp | Method::KcdOls => {
            let ks = ks.expect("kernel methods carry a kernel sample");
            let gram = &ks.cache.per_class[class];
            let k = ks.class_k(model, class);
            let r = if kind.method == Method::KcdOmp {
                kernel::komp(gram, &k, ks.kxx, cap)?
            } else {
                kernel::kols(gram, &k, ks.kxx, cap)?
            };
            prefixes(&r.residual_norm_history, &r.support)
        }
        Method::KcdCols => {
            let ks = ks.expect("kernel methods carry a kernel sample");
            let gram = &ks.cache.per_class[class];
            let k = ks.class_k(model, class);
            pad(kernel::kcols_all_levels(gram, &k, ks.kxx, cap)?
                .into_iter()
                .map(|r| (r.final_residual_norm(), model.to_global(class, &r.support)))
                .collect())
        }
        Method::Src | Method::Ksrc => unreachable!("global methods are not per class"),
    })
}

/// Class-dependent OLS at sparsity `sparsity`.
pub fn classify_cdols(
    model: &LabeledDictionary,
    x: &[f64],
    sparsity: usize,
) -> Result<ClassificationResult> {
    classify(model, x, &ClassifierKind::new(Method::CdOls, sparsity, None)?)
}

/// Class-dependent kernel OLS at sparsity `sparsity`.
pub fn classify_kcdols(
    model: &LabeledDictionary,
    x: &[f64],
    sparsity: usize,
    spec: KernelSpec,
) -> Result<ClassificationResult> {
    classify(model, x, &ClassifierKind::new(Method::KcdOls, sparsity, Some(spec))?)
}
