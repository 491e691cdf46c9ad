use super::gridspec::{parse_counts, parse_grid};
use super::manifest::{sidecar_path, RunManifest};
use super::{
    BenchArgs, ClassifyArgs, CvArgs, KernelArgs, PursueArgs, ResidualCurveArgs, SolverName,
    SweepArgs, SynthArgs,
};
use crate::classify::{classify_batch, classify_batch_levels, ClassifierKind, LabeledDictionary, Method};
use crate::data::{
    self, accuracy, cross_validate, cross_validate_repeat, load_atoms_csv, load_csv,
    load_signal_csv, rng, stratified_split, summarize, synth_subspace, write_csv, LabeledDataset,
    SplitSpec,
};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{norm2, Matrix, Vector};
use crate::pursuit::{self, PursuitResult};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Per-invocation information that is not part of the parsed arguments.
pub struct Context {
    /// Flags that took their default value.
    pub defaults: Vec<String>,
}

fn manifest<A: Serialize>(command: &str, args: &A, seed: Option<u64>, ctx: &Context) -> Result<RunManifest> {
    let mut m = RunManifest::new(command, serde_json::to_value(args)?, seed);
    for d in &ctx.defaults {
        m.default_used(d.clone());
    }
    Ok(m)
}

/// Writes `bytes` to `out`, or stdout, and the manifest next to the file.
fn emit(out: Option<&Path>, bytes: &[u8], manifest: RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            manifest.write_for(path)?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Csv {
        line: 0,
        message: e.to_string(),
    };
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    load_csv(path)?.normalized()
}

fn normalize_columns(m: &Matrix) -> Result<Matrix> {
    let mut cols = Vec::with_capacity(m.cols());
    for (column, c) in m.columns().enumerate() {
        let n = norm2(c);
        if n == 0.0 {
            return Err(Error::ZeroNormAtom { column });
        }
        cols.push(c.iter().map(|v| v / n).collect::<Vec<_>>());
    }
    Matrix::from_columns(&cols)
}

fn kernel_for(method: Method, args: &KernelArgs) -> Result<Option<KernelSpec>> {
    if method.is_kernel() {
        args.spec().map(Some)
    } else {
        Ok(None)
    }
}

fn fit_model(train: &LabeledDataset, kind: &ClassifierKind) -> Result<LabeledDictionary> {
    let model = LabeledDictionary::fit(train.features(), train.labels())?;
    match kind.kernel {
        Some(spec) => model.with_kernel(spec),
        None => Ok(model),
    }
}

fn format_cell(summary: &data::Summary) -> String {
    match summary.std {
        Some(std) => format!("{:.1} ({:.1})", summary.mean, std),
        None => format!("{:.1}", summary.mean),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|g| g.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct SolverEntry {
    #[serde(flatten)]
    result: PursuitResult,
    atoms: Vec<String>,
}

#[derive(Serialize)]
struct ThreeAtomReport {
    atoms: Vec<Vec<f64>>,
    signal: Vec<f64>,
    sparsity: usize,
    omp: SolverEntry,
    ols: SolverEntry,
    cols: SolverEntry,
    exhaustive: SolverEntry,
}

fn run_solver(method: SolverName, dict: &Matrix, x: &Vector, s: usize) -> Result<PursuitResult> {
    match method {
        SolverName::Omp => pursuit::omp(dict, x, s),
        SolverName::Ols => pursuit::ols(dict, x, s),
        SolverName::Cols => pursuit::cols(dict, x, s),
        SolverName::Exhaustive => pursuit::exhaustive_best_subset(dict, x, s),
    }
}

pub fn pursue(args: &PursueArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("pursue", args, None, ctx)?;
    let json = if args.fig1 {
        let (dict, x) = pursuit::fig1_fixture();
        let entry = |method| -> Result<SolverEntry> {
            let result = run_solver(method, &dict, &x, 2)?;
            let atoms = result.support.iter().map(|i| format!("a{}", i + 1)).collect();
            Ok(SolverEntry { result, atoms })
        };
        let report = ThreeAtomReport {
            atoms: dict.columns().map(<[f64]>::to_vec).collect(),
            signal: x.as_slice().to_vec(),
            sparsity: 2,
            omp: entry(SolverName::Omp)?,
            ols: entry(SolverName::Ols)?,
            cols: entry(SolverName::Cols)?,
            exhaustive: entry(SolverName::Exhaustive)?,
        };
        serde_json::to_string_pretty(&report)?
    } else {
        let (Some(dict_path), Some(signal_path), Some(method), Some(s)) =
            (&args.dict, &args.signal, args.method, args.sparsity)
        else {
            return Err(Error::config("--dict, --signal, --method and --sparsity are required"));
        };
        m.add_input(dict_path)?;
        m.add_input(signal_path)?;
        let dict = normalize_columns(&load_atoms_csv(dict_path)?)?;
        let x = Vector::new(load_signal_csv(signal_path)?)?;
        serde_json::to_string_pretty(&run_solver(method, &dict, &x, s)?)?
    };
    emit(args.out.as_deref(), (json + "\n").as_bytes(), m)
}

/// Test samples as unit-norm columns, plus label names when the file has a
/// `label` column.
fn load_test(path: &Path) -> Result<(Matrix, Option<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
            line: 1,
            message: e.to_string(),
        })?;
    let labeled = rdr
        .headers()
        .map(|h| h.iter().next_back() == Some("label"))
        .unwrap_or(false);
    if labeled {
        let ds = load_csv(path)?;
        let names = ds
            .labels()
            .iter()
            .map(|&l| ds.class_names()[l].clone())
            .collect();
        Ok((normalize_columns(ds.features())?, Some(names)))
    } else {
        Ok((normalize_columns(&load_atoms_csv(path)?)?, None))
    }
}

pub fn classify(args: &ClassifyArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("classify", args, None, ctx)?;
    m.add_input(&args.train)?;
    m.add_input(&args.test)?;
    let train = load_dataset(&args.train)?;
    let (test, test_labels) = load_test(&args.test)?;
    if test.rows() != train.dim() {
        return Err(Error::dims(format!(
            "training samples have {} features, test samples have {}",
            train.dim(),
            test.rows()
        )));
    }
    let kind = ClassifierKind::new(args.method, args.sparsity, kernel_for(args.method, &args.kernel)?)?;
    let model = fit_model(&train, &kind)?;
    let samples: Vec<&[f64]> = test.columns().collect();
    let results = classify_batch(&model, &samples, &kind)?;

    let names = train.class_names();
    let mut header = vec!["sample".to_string(), "predicted".to_string()];
    if test_labels.is_some() {
        header.push("truth".into());
    }
    header.extend(names.iter().map(|n| format!("residual_{n}")));
    let mut rows = Vec::with_capacity(results.len());
    let mut correct = 0usize;
    for (i, r) in results.iter().enumerate() {
        let mut row = vec![i.to_string(), names[r.label].clone()];
        if let Some(truth) = &test_labels {
            if truth[i] == names[r.label] {
                correct += 1;
            }
            row.push(truth[i].clone());
        }
        row.extend(r.residuals.iter().map(f64::to_string));
        rows.push(row);
    }
    if let Some(truth) = &test_labels {
        let unknown = truth.iter().filter(|t| !names.contains(t)).count();
        if unknown > 0 {
            log::warn!("{unknown} test samples have labels absent from the training set");
        }
        let acc = 100.0 * correct as f64 / truth.len() as f64;
        if args.out.is_some() {
            println!("accuracy: {acc:.2}%");
        } else {
            eprintln!("accuracy: {acc:.2}%");
        }
    }
    emit(args.out.as_deref(), &csv_bytes(&header, &rows)?, m)
}

pub fn cv(args: &CvArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("cv", args, Some(args.seed), ctx)?;
    m.add_input(&args.data)?;
    let parsed = parse_grid(&args.grid)?
        .ok_or_else(|| Error::config("cv needs a grid, not 'none'"))?;
    for key in &parsed.defaulted {
        m.default_used(format!("grid.{key}"));
    }
    let data = load_dataset(&args.data)?;
    let template = ClassifierKind::new(args.method, 1, kernel_for(args.method, &args.kernel)?)?;
    let outcome = cross_validate(&data, &template, &parsed.grid, args.seed)?;

    let mut header = vec!["sparsity".to_string(), "gamma".to_string()];
    header.extend((1..=parsed.grid.folds).map(|f| format!("fold_{f}")));
    header.push("mean".into());
    let rows: Vec<Vec<String>> = outcome
        .cells
        .iter()
        .map(|c| {
            let mut row = vec![c.sparsity.to_string(), opt(c.gamma)];
            row.extend(c.fold_accuracies.iter().map(f64::to_string));
            row.push(c.mean_accuracy.to_string());
            row
        })
        .collect();
    let best = format!(
        "best: S={} gamma={} accuracy={:.2}%",
        outcome.best_sparsity,
        outcome.best_gamma.map_or("-".into(), |g| g.to_string()),
        outcome.best_accuracy
    );
    if args.out.is_some() {
        println!("{best}");
    } else {
        eprintln!("{best}");
    }
    emit(args.out.as_deref(), &csv_bytes(&header, &rows)?, m)
}

struct BenchRecord {
    sparsity: usize,
    gamma: Option<f64>,
    cv_accuracy: Option<f64>,
    test_accuracy: f64,
}

pub fn bench(args: &BenchArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("bench", args, Some(args.seed), ctx)?;
    m.add_input(&args.data)?;
    let sizes = parse_counts(&args.train_sizes)?;
    if args.repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    let grid = parse_grid(&args.cv)?;
    if let Some(g) = &grid {
        for key in &g.defaulted {
            m.default_used(format!("cv.{key}"));
        }
    }
    let data = load_dataset(&args.data)?;
    for &size in &sizes {
        // Surface infeasible sizes before any work starts.
        data::stratified_split_indices(&data, &SplitSpec::new(size, args.repeats, args.seed)?, 0)?;
    }

    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..args.repeats).map(move |r| (n, r)))
        .collect();
    // records[job][method]
    let records: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|&(size, repeat)| {
            let spec = SplitSpec::new(size, args.repeats, args.seed)?;
            let (train, test) = stratified_split(&data, &spec, repeat)?;
            args.methods
                .iter()
                .map(|&method| bench_one(args, grid.as_ref().map(|g| &g.grid), &train, &test, method, repeat))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut header = vec!["method".to_string()];
    header.extend(sizes.iter().map(|n| format!("train_{n}")));
    let mut rows = Vec::new();
    for (mi, method) in args.methods.iter().enumerate() {
        let mut row = vec![method.to_string()];
        for (si, _) in sizes.iter().enumerate() {
            let accs: Vec<f64> = (0..args.repeats)
                .map(|r| records[si * args.repeats + r][mi].test_accuracy)
                .collect();
            row.push(format_cell(&summarize(&accs)?));
        }
        rows.push(row);
    }

    let params_header: Vec<String> = [
        "method",
        "train_size",
        "repeat",
        "sparsity",
        "gamma",
        "cv_accuracy",
        "test_accuracy",
    ]
    .map(String::from)
    .to_vec();
    let mut params_rows = Vec::new();
    for (ji, &(size, repeat)) in jobs.iter().enumerate() {
        for (mi, method) in args.methods.iter().enumerate() {
            let rec = &records[ji][mi];
            log::info!(
                "{method} train={size} repeat={repeat}: S={} gamma={} accuracy={:.2}",
                rec.sparsity,
                opt(rec.gamma),
                rec.test_accuracy
            );
            params_rows.push(vec![
                method.to_string(),
                size.to_string(),
                repeat.to_string(),
                rec.sparsity.to_string(),
                opt(rec.gamma),
                opt(rec.cv_accuracy),
                rec.test_accuracy.to_string(),
            ]);
        }
    }
    if let Some(out) = &args.out {
        std::fs::write(
            sidecar_path(out, "params.csv"),
            csv_bytes(&params_header, &params_rows)?,
        )?;
    }
    emit(args.out.as_deref(), &csv_bytes(&header, &rows)?, m)
}

fn bench_one(
    args: &BenchArgs,
    grid: Option<&data::CvGrid>,
    train: &LabeledDataset,
    test: &LabeledDataset,
    method: Method,
    repeat: usize,
) -> Result<BenchRecord> {
    let base_kernel = kernel_for(method, &args.kernel)?;
    let (kind, cv_accuracy) = match grid {
        Some(grid) => {
            let template = ClassifierKind::new(method, 1, base_kernel)?;
            let out = cross_validate_repeat(train, &template, grid, args.seed, repeat)?;
            let kernel = match (base_kernel, out.best_gamma) {
                (Some(KernelSpec::Rbf { .. }), Some(g)) => Some(KernelSpec::rbf(g)?),
                (k, _) => k,
            };
            (
                ClassifierKind::new(method, out.best_sparsity, kernel)?,
                Some(out.best_accuracy),
            )
        }
        None => (ClassifierKind::new(method, args.sparsity, base_kernel)?, None),
    };
    let model = fit_model(train, &kind)?;
    let results = classify_batch(&model, &test.samples(), &kind)?;
    let pred: Vec<usize> = results.iter().map(|r| r.label).collect();
    let gamma = match kind.kernel {
        Some(KernelSpec::Rbf { gamma }) => Some(gamma),
        _ => None,
    };
    Ok(BenchRecord {
        sparsity: kind.sparsity,
        gamma,
        cv_accuracy,
        test_accuracy: accuracy(&pred, test.labels())?.overall,
    })
}

fn resolve_class(ds: &LabeledDataset, id: &str) -> Result<usize> {
    if let Some(c) = ds.class_names().iter().position(|n| n == id) {
        return Ok(c);
    }
    match id.parse::<usize>() {
        Ok(c) if c < ds.n_classes() => Ok(c),
        _ => Err(Error::config(format!("no class named or numbered '{id}'"))),
    }
}

pub fn residual_curve(args: &ResidualCurveArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("residual-curve", args, Some(args.seed), ctx)?;
    m.add_input(&args.train)?;
    let data = load_dataset(&args.train)?;
    let class = resolve_class(&data, &args.class)?;
    let members = &data.class_members()[class];
    let s_max = args.sparsity_max;
    if s_max == 0 || args.repeats == 0 {
        return Err(Error::config("sparsity-max and repeats must be at least 1"));
    }
    // One sample is held out; the rest of the class is the dictionary.
    let needed = s_max.max(1) + 1;
    if members.len() < needed {
        return Err(Error::ClassTooSmall {
            class: data.class_names()[class].clone(),
            available: members.len(),
            required: needed - 1,
        });
    }
    if s_max > data.dim() {
        return Err(Error::SparsityOutOfRange {
            sparsity: s_max,
            max: data.dim(),
        });
    }

    let mut rng = rng::stream(args.seed, rng::CURVE);
    let draws: Vec<usize> = (0..args.repeats)
        .map(|_| rng::uniform_index(&mut rng, members.len()))
        .collect();
    // curves[repeat] = [(omp, ols, cols) per iteration]
    let curves: Vec<Vec<(f64, f64, f64)>> = draws
        .par_iter()
        .map(|&pick| {
            let x = Vector::new(data.sample(members[pick]).to_vec())?;
            let rest: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != pick)
                .map(|(_, &i)| i)
                .collect();
            let dict = data.features().select_columns(&rest)?;
            let omp = pursuit::omp(&dict, &x, s_max)?;
            let ols = pursuit::ols(&dict, &x, s_max)?;
            let cols = pursuit::cols_all_levels(&dict, &x, s_max)?;
            Ok((1..=s_max)
                .map(|it| {
                    (
                        omp.residual_at(it),
                        ols.residual_at(it),
                        cols[it - 1].final_residual_norm,
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let header: Vec<String> = ["iteration", "omp", "ols", "cols"].map(String::from).to_vec();
    let n = args.repeats as f64;
    let rows: Vec<Vec<String>> = (0..s_max)
        .map(|it| {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for curve in &curves {
                a += curve[it].0;
                b += curve[it].1;
                c += curve[it].2;
            }
            vec![
                (it + 1).to_string(),
                (a / n).to_string(),
                (b / n).to_string(),
                (c / n).to_string(),
            ]
        })
        .collect();
    emit(args.out.as_deref(), &csv_bytes(&header, &rows)?, m)
}

pub fn sweep(args: &SweepArgs, ctx: &Context) -> Result<()> {
    let mut m = manifest("sweep", args, Some(args.seed), ctx)?;
    m.add_input(&args.data)?;
    let levels = parse_counts(&args.sparsity)?;
    if levels.contains(&0) {
        return Err(Error::config("sparsity levels must be at least 1"));
    }
    if args.repeats == 0 {
        return Err(Error::config("repeats must be at least 1"));
    }
    let max_s = *levels.iter().max().ok_or_else(|| Error::config("empty sparsity list"))?;
    let data = load_dataset(&args.data)?;
    let spec = SplitSpec::new(args.train_size, args.repeats, args.seed)?;

    // acc[repeat][method][level position]
    let acc: Vec<Vec<Vec<f64>>> = (0..args.repeats)
        .into_par_iter()
        .map(|repeat| {
            let (train, test) = stratified_split(&data, &spec, repeat)?;
            let samples = test.samples();
            args.methods
                .iter()
                .map(|&method| {
                    let kind = ClassifierKind::new(method, max_s, kernel_for(method, &args.kernel)?)?;
                    let model = fit_model(&train, &kind)?;
                    let per_sample = classify_batch_levels(&model, &samples, &kind)?;
                    levels
                        .iter()
                        .map(|&s| {
                            let pred: Vec<usize> = per_sample.iter().map(|l| l[s - 1].label).collect();
                            accuracy(&pred, test.labels()).map(|a| a.overall)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let header: Vec<String> = ["method", "sparsity", "accuracy", "std"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (mi, method) in args.methods.iter().enumerate() {
        for (li, s) in levels.iter().enumerate() {
            let values: Vec<f64> = acc.iter().map(|r| r[mi][li]).collect();
            let summary = summarize(&values)?;
            rows.push(vec![
                method.to_string(),
                s.to_string(),
                summary.mean.to_string(),
                opt(summary.std),
            ]);
        }
    }
    emit(args.out.as_deref(), &csv_bytes(&header, &rows)?, m)
}

pub fn synth(args: &SynthArgs, ctx: &Context) -> Result<()> {
    let m = manifest("synth", args, Some(args.seed), ctx)?;
    let ds = synth_subspace(
        args.classes,
        args.subspace_dim,
        args.ambient_dim,
        args.per_class,
        args.noise,
        args.seed,
    )?;
    write_csv(&ds, &args.out)?;
    m.write_for(&args.out)
}
