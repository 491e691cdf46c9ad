use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cdols(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdols"))
        .args(args)
        .env("CDOLS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cdols(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn bundled(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Rows of a CSV file, header first.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["synth", "--out", s(&path)];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

fn supports(v: &serde_json::Value) -> Vec<usize> {
    v["support"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as usize)
        .collect()
}

#[test]
fn pursue_identity_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("dict.csv");
    let signal = dir.path().join("x.csv");
    std::fs::write(&dict, "f0,f1,f2\n1,0,0\n0,1,0\n0,0,1\n").unwrap();
    std::fs::write(&signal, "f0,f1,f2\n0,0,5\n").unwrap();
    let out = dir.path().join("r.json");
    ok(&["pursue", "--dict", s(&dict), "--signal", s(&signal), "--method", "omp", "--sparsity", "1", "--out", s(&out)]);
    let v = json(&out);
    assert_eq!(supports(&v), vec![2]);
    assert!((v["coefficients"][0].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert_eq!(v["residual_history"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("r.json.manifest.json").exists());
}

#[test]
fn pursue_fig1_reports_three_supports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.json");
    ok(&["pursue", "--fig1", "--out", s(&out)]);
    let v = json(&out);
    let names = |m: &str| {
        let mut a: Vec<String> = v[m]["atoms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_str().unwrap().to_string())
            .collect();
        a.sort();
        a
    };
    assert_eq!(names("omp"), ["a1", "a2"]);
    assert_eq!(names("ols"), ["a1", "a3"]);
    assert_eq!(names("cols"), ["a2", "a3"]);
    let r = |m: &str| v[m]["final_residual_norm"].as_f64().unwrap();
    assert!(r("cols") < r("ols") && r("ols") < r("omp"));
}

#[test]
fn exhaustive_no_worse_than_cols_on_bundled_example() {
    let dir = tempfile::tempdir().unwrap();
    let (dict, signal) = (bundled("example_dict.csv"), bundled("example_signal.csv"));
    let mut res = Vec::new();
    for method in ["omp", "ols", "cols", "exhaustive"] {
        let out = dir.path().join(format!("{method}.json"));
        ok(&["pursue", "--dict", &dict, "--signal", &signal, "--method", method, "--sparsity", "3", "--out", s(&out)]);
        res.push(json(&out)["final_residual_norm"].as_f64().unwrap());
    }
    println!("bundled example S=3 residuals (omp, ols, cols, exhaustive): {res:?}");
    assert!(res[3] <= res[2] + 1e-12);
    assert!(res[2] <= res[1] + 1e-12);
}

#[test]
fn classify_memorizes_and_linear_kernel_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--per-class", "20", "--ambient-dim", "30"]);
    let a = dir.path().join("a.csv");
    let out = ok(&["classify", "--train", s(&data), "--test", s(&data), "--method", "cd_ols", "--sparsity", "3", "--out", s(&a)]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "accuracy: 100.00%");

    let test = synth(dir.path(), "t.csv", &["--per-class", "20", "--ambient-dim", "30", "--seed", "5"]);
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    ok(&["classify", "--train", s(&data), "--test", s(&test), "--method", "cd_ols", "--sparsity", "3", "--out", s(&b)]);
    ok(&["classify", "--train", s(&data), "--test", s(&test), "--method", "kcd_ols", "--kernel", "linear", "--sparsity", "3", "--out", s(&c)]);
    let (rb, rc) = (rows(&b), rows(&c));
    assert_eq!(rb[0], ["sample", "predicted", "truth", "residual_class0", "residual_class1", "residual_class2"]);
    assert_eq!(rb.len(), 61);
    for (x, y) in rb.iter().zip(&rc).skip(1) {
        assert_eq!(x[1], y[1]);
    }
}

#[test]
fn errors_are_one_line_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let train = synth(dir.path(), "a.csv", &["--ambient-dim", "10", "--per-class", "5"]);
    let test = synth(dir.path(), "b.csv", &["--ambient-dim", "12", "--per-class", "5"]);
    let out = cdols(&["classify", "--train", s(&train), "--test", s(&test), "--method", "cd_ols", "--sparsity", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");

    let out = cdols(&["classify", "--method", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let out = cdols(&["pursue", "--dict", "/nonexistent.csv", "--signal", "/x.csv", "--method", "omp", "--sparsity", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_single_cell_omits_std() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--per-class", "20"]);
    let out = dir.path().join("bench.csv");
    ok(&["bench", "--data", s(&data), "--methods", "cd_ols", "--train-sizes", "10", "--repeats", "1", "--cv", "none", "--sparsity", "4", "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r, [vec!["method", "train_10"], vec!["cd_ols", &r[1][1]]]);
    assert!(!r[1][1].contains('('));
    assert!(dir.path().join("bench.csv.params.csv").exists());
    let manifest = json(&dir.path().join("bench.csv.manifest.json"));
    assert!(manifest["defaults_used"].as_array().unwrap().iter().any(|v| v == "seed"));
}

#[test]
fn bench_cd_ols_not_behind_cd_omp() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &[]);
    let out = dir.path().join("bench.csv");
    ok(&["bench", "--data", s(&data), "--methods", "cd_ols,cd_omp", "--train-sizes", "10,30", "--repeats", "3", "--cv", "S=1..6;folds=3", "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r[0], ["method", "train_10", "train_30"]);
    let mean = |cell: &str| cell.split(' ').next().unwrap().parse::<f64>().unwrap();
    for col in 1..3 {
        assert!(mean(&r[1][col]) >= mean(&r[2][col]) - 2.0, "{r:?}");
        assert!(r[1][col].contains('('));
    }
    let params = rows(&dir.path().join("bench.csv.params.csv"));
    assert_eq!(params.len(), 1 + 2 * 2 * 3);
}

#[test]
fn residual_curve_shape() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--per-class", "30"]);
    let out = dir.path().join("curve.csv");
    ok(&["residual-curve", "--train", s(&data), "--class", "class1", "--repeats", "40", "--sparsity-max", "8", "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r[0], ["iteration", "omp", "ols", "cols"]);
    assert_eq!(r.len(), 9);
    let v: Vec<[f64; 3]> = r[1..]
        .iter()
        .map(|row| [row[1].parse().unwrap(), row[2].parse().unwrap(), row[3].parse().unwrap()])
        .collect();
    assert!((v[0][0] - v[0][1]).abs() <= 1e-12);
    assert!(v[1][1] <= v[1][0] + 1e-12);
    for (i, row) in v.iter().enumerate() {
        assert!(row[2] <= row[1] + 1e-12);
        if i > 0 {
            for m in 0..3 {
                assert!(row[m] <= v[i - 1][m] + 1e-12);
            }
        }
    }
    let too_small = cdols(&["residual-curve", "--train", s(&data), "--class", "0", "--sparsity-max", "30"]);
    assert!(!too_small.status.success());
}

#[test]
fn sweep_rows_and_peak() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--classes", "8", "--ambient-dim", "12", "--per-class", "40", "--noise", "0.05"]);
    let out = dir.path().join("sweep.csv");
    ok(&["sweep", "--data", s(&data), "--methods", "cd_omp,cd_ols,cd_cols", "--sparsity", "1..10", "--train-size", "20", "--repeats", "3", "--out", s(&out)]);
    let r = rows(&out);
    assert_eq!(r.len(), 1 + 3 * 10);
    assert_eq!(r[0], ["method", "sparsity", "accuracy", "std"]);
    // S = 1 picks the same first atom for every class-dependent method.
    let at1: Vec<&str> = r[1..].iter().filter(|row| row[1] == "1").map(|row| row[2].as_str()).collect();
    assert!(at1.iter().all(|a| *a == at1[0]), "{at1:?}");
    let ols: Vec<(usize, f64)> = r[1..]
        .iter()
        .filter(|row| row[0] == "cd_ols")
        .map(|row| (row[1].parse().unwrap(), row[2].parse().unwrap()))
        .collect();
    let best = ols.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let argmax: Vec<usize> = ols.iter().filter(|p| p.1 == best).map(|p| p.0).collect();
    println!("cd_ols sweep argmax S: {argmax:?} at {best:.2}%");
    assert!(argmax.iter().any(|s| s.abs_diff(4) <= 2), "{ols:?}");
}

#[test]
fn cv_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--per-class", "20"]);
    let out = dir.path().join("cv.csv");
    let stdout = ok(&["cv", "--data", s(&data), "--method", "kcd_ols", "--grid", "S=1..3;gamma=0.5,2;folds=4", "--out", s(&out)]).stdout;
    assert!(String::from_utf8_lossy(&stdout).starts_with("best: S="));
    let r = rows(&out);
    assert_eq!(r[0], ["sparsity", "gamma", "fold_1", "fold_2", "fold_3", "fold_4", "mean"]);
    assert_eq!(r.len(), 1 + 6);
}

#[test]
fn synth_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--classes", "2", "--ambient-dim", "5", "--per-class", "3"]);
    let r = rows(&data);
    assert_eq!(r[0], ["f0", "f1", "f2", "f3", "f4", "label"]);
    assert_eq!(r.len(), 7);
    let manifest = json(&dir.path().join("d.csv.manifest.json"));
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["seed"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.csv", &["--per-class", "25", "--seed", "3"]);
    let again = synth(dir.path(), "d2.csv", &["--per-class", "25", "--seed", "3"]);
    assert_eq!(std::fs::read(&data).unwrap(), std::fs::read(&again).unwrap());
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&["bench", "--data", s(&data), "--methods", "cd_ols,kcd_omp", "--train-sizes", "10", "--repeats", "2", "--cv", "S=1..4;gamma=0.5,1;folds=3", "--seed", "9", "--out", s(&out)]);
        (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join(format!("{name}.params.csv"))).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}
