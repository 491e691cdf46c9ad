mod common;

use cdols::classify::{
    class_residual, classify, classify_batch, classify_batch_levels, classify_cdols,
    classify_kcdols, ClassifierKind, LabeledDictionary, Method,
};
use cdols::data::{stratified_split, synth_subspace, SplitSpec};
use cdols::kernel::KernelSpec;
use cdols::linalg::Matrix;
use cdols::pursuit::{cols, ols, omp};
use common::*;
use proptest::prelude::*;

fn kind(method: Method, s: usize) -> ClassifierKind {
    let kernel = method.is_kernel().then(|| KernelSpec::rbf(0.5).unwrap());
    ClassifierKind::new(method, s, kernel).unwrap()
}

/// Random labeled dictionary with `classes` classes of `per_class` atoms.
fn random_model(seed: u64, d: usize, classes: usize, per_class: usize) -> LabeledDictionary {
    let mut r = rng(seed);
    let atoms = unit_dictionary(&mut r, d, classes * per_class);
    let labels: Vec<usize> = (0..classes * per_class).map(|i| i / per_class).collect();
    LabeledDictionary::fit(&atoms, &labels).unwrap()
}

fn class_dependent() -> impl Iterator<Item = Method> {
    Method::ALL.into_iter().filter(|m| m.is_class_dependent())
}

#[test]
fn memorization_on_random_dictionaries() {
    for seed in 0..4 {
        let model = random_model(seed, 12, 3, 6)
            .with_kernel(KernelSpec::rbf(0.5).unwrap())
            .unwrap();
        let samples: Vec<&[f64]> = model.atoms().columns().collect();
        for method in class_dependent() {
            for s in [1, 2, 4, 6, 9] {
                let got = classify_batch(&model, &samples, &kind(method, s)).unwrap();
                for (i, r) in got.iter().enumerate() {
                    assert_eq!(r.label, model.labels()[i], "{method} S={s} sample {i}");
                    assert!(r.residuals[r.label] <= 1e-6);
                }
            }
        }
    }
}

#[test]
fn orthogonal_class_spans() {
    let atoms = Matrix::identity(4);
    let model = LabeledDictionary::fit(&atoms, &[0, 0, 1, 1]).unwrap();
    let x = [0.6, 0.8, 0.0, 0.0];
    let r = classify_cdols(&model, &x, 1).unwrap();
    assert_eq!(r.label, 0);
    assert!((r.residuals[1] - 1.0).abs() < 1e-12);
    let r = classify_cdols(&model, &x, 2).unwrap();
    assert!(r.residuals[0] <= 1e-10 && r.residuals[1] > 0.5);
}

#[test]
fn linear_kernel_labels_match_input_space() {
    let ds = synth_subspace(3, 4, 20, 30, 0.1, 9).unwrap();
    let (train, test) = stratified_split(&ds, &SplitSpec::new(15, 1, 9).unwrap(), 0).unwrap();
    let model = LabeledDictionary::fit(train.features(), train.labels()).unwrap();
    let kmodel = model.clone().with_kernel(KernelSpec::Linear).unwrap();
    for s in [1, 3, 5] {
        for x in test.samples() {
            let a = classify_cdols(&model, x, s).unwrap();
            let b = classify_kcdols(&kmodel, x, s, KernelSpec::Linear).unwrap();
            assert_eq!(a.label, b.label);
            for (u, v) in a.residuals.iter().zip(&b.residuals) {
                assert!((u - v).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn batch_matches_sequential_calls() {
    let ds = synth_subspace(3, 4, 30, 50, 0.05, 2).unwrap();
    let (train, test) = stratified_split(&ds, &SplitSpec::new(16, 1, 2).unwrap(), 0).unwrap();
    let samples: Vec<&[f64]> = test.samples().into_iter().take(100).collect();
    assert_eq!(samples.len(), 100);
    let model = LabeledDictionary::fit(train.features(), train.labels()).unwrap();
    for method in [Method::Src, Method::CdOls, Method::CdCols] {
        let k = kind(method, 4);
        let batch = classify_batch(&model, &samples, &k).unwrap();
        for (x, b) in samples.iter().zip(&batch) {
            assert_eq!(&classify(&model, x, &k).unwrap(), b);
        }
    }
    let empty: Vec<&[f64]> = Vec::new();
    assert!(classify_batch(&model, &empty, &kind(Method::CdOls, 2)).unwrap().is_empty());
}

#[test]
fn levels_match_single_sparsity_runs() {
    let model = random_model(11, 10, 3, 8).with_kernel(KernelSpec::rbf(0.7).unwrap()).unwrap();
    let mut r = rng(12);
    let xs: Vec<Vec<f64>> = (0..5).map(|_| unit(&gaussian(&mut r, 10))).collect();
    for method in Method::ALL {
        let k = kind(method, 6);
        let k = ClassifierKind { kernel: method.is_kernel().then(|| KernelSpec::rbf(0.7).unwrap()), ..k };
        let levels = classify_batch_levels(&model, &xs, &k).unwrap();
        for (x, lv) in xs.iter().zip(&levels) {
            for s in 1..=6 {
                let single = classify(&model, x, &k.with_sparsity(s)).unwrap();
                assert_eq!(single.label, lv[s - 1].label, "{method} S={s}");
                for (a, b) in single.residuals.iter().zip(&lv[s - 1].residuals) {
                    assert!((a - b).abs() <= 1e-12, "{method} S={s}");
                }
            }
        }
    }
}

#[test]
fn cd_ols_at_least_cd_omp_on_synthetic_benchmark() {
    let mut diffs = Vec::new();
    for seed in 0..10 {
        let ds = synth_subspace(3, 4, 50, 60, 0.05, seed).unwrap();
        let (train, test) = stratified_split(&ds, &SplitSpec::new(30, 1, seed).unwrap(), 0).unwrap();
        let model = LabeledDictionary::fit(train.features(), train.labels()).unwrap();
        let acc = |m| {
            let out = classify_batch(&model, &test.samples(), &kind(m, 5)).unwrap();
            let hits = out.iter().zip(test.labels()).filter(|(r, &t)| r.label == t).count();
            100.0 * hits as f64 / test.n_samples() as f64
        };
        diffs.push((acc(Method::CdOls), acc(Method::CdOmp)));
    }
    let ols = diffs.iter().map(|d| d.0).sum::<f64>() / 10.0;
    let omp = diffs.iter().map(|d| d.1).sum::<f64>() / 10.0;
    println!("synthetic S=5 mean accuracy: cd_ols {ols:.2}, cd_omp {omp:.2}");
    assert!(ols >= omp - 2.0);
}

#[test]
fn synthetic_accuracy_high() {
    let mut total = 0.0;
    for seed in 0..10 {
        let ds = synth_subspace(3, 4, 50, 60, 0.02, seed).unwrap();
        let (train, test) = stratified_split(&ds, &SplitSpec::new(30, 1, seed).unwrap(), 0).unwrap();
        let model = LabeledDictionary::fit(train.features(), train.labels()).unwrap();
        let out = classify_batch(&model, &test.samples(), &kind(Method::CdOls, 4)).unwrap();
        let hits = out.iter().zip(test.labels()).filter(|(r, &t)| r.label == t).count();
        total += 100.0 * hits as f64 / test.n_samples() as f64;
    }
    println!("synthetic sigma=0.02 S=4 cd_ols mean accuracy: {:.2}", total / 10.0);
    assert!(total / 10.0 >= 95.0);
}

#[test]
fn src_absent_classes_get_signal_norm() {
    // One-atom SRC picks a class-0 atom; class 1 keeps the whole signal.
    let atoms = Matrix::identity(3);
    let model = LabeledDictionary::fit(&atoms, &[0, 1, 1]).unwrap();
    let x = [2.0, 0.5, 0.0];
    let r = classify(&model, &x, &kind(Method::Src, 1)).unwrap();
    assert_eq!(r.label, 0);
    let norm = (4.25f64).sqrt();
    assert!((r.residuals[1] - norm).abs() < 1e-12);
    assert!((r.residuals[0] - 0.5).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_is_error() {
    let model = random_model(1, 5, 2, 3);
    assert!(classify_cdols(&model, &[1.0; 4], 1).is_err());
    let bad: Vec<Vec<f64>> = vec![vec![1.0; 5], vec![1.0; 3]];
    assert!(classify_batch(&model, &bad, &kind(Method::CdOls, 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn class_residuals_match_solvers(seed in any::<u64>(), s in 1usize..5) {
        let model = random_model(seed, 8, 3, 5);
        let mut r = rng(seed ^ 1);
        let x = gaussian(&mut r, 8);
        let xv = vector(x.clone());
        for class in 0..3 {
            let dict = model.atoms().select_columns(&model.class_index()[class]).unwrap();
            let cases = [
                (Method::CdOmp, omp(&dict, &xv, s).unwrap()),
                (Method::CdOls, ols(&dict, &xv, s).unwrap()),
                (Method::CdCols, cols(&dict, &xv, s).unwrap()),
            ];
            for (m, direct) in cases {
                let (nu, support) = class_residual(&model, &x, class, &kind(m, s)).unwrap();
                prop_assert!((nu - direct.final_residual_norm).abs() <= 1e-12);
                let local: Vec<usize> = direct.support.iter().map(|j| model.class_index()[class][j]).collect();
                prop_assert_eq!(support.indices(), &local[..]);
            }
        }
    }

    #[test]
    fn ordering_transfers_per_class(seed in any::<u64>(), s in 1usize..6) {
        let model = random_model(seed, 10, 3, 7);
        let mut r = rng(seed ^ 2);
        let x = gaussian(&mut r, 10);
        let nu = |m| classify(&model, &x, &kind(m, s)).unwrap().residuals;
        let (o, l, c) = (nu(Method::CdOmp), nu(Method::CdOls), nu(Method::CdCols));
        for i in 0..3 {
            prop_assert!(c[i] <= l[i] + 1e-12);
            if s <= 2 {
                prop_assert!(l[i] <= o[i] + 1e-12);
            }
        }
    }

    #[test]
    fn positive_scaling_invariance(seed in any::<u64>(), s in 1usize..5, alpha in 0.01f64..100.0) {
        let model = random_model(seed, 9, 3, 6);
        let mut r = rng(seed ^ 3);
        let x = gaussian(&mut r, 9);
        let y: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        for m in [Method::CdOmp, Method::CdOls, Method::CdCols] {
            let a = classify(&model, &x, &kind(m, s)).unwrap();
            let b = classify(&model, &y, &kind(m, s)).unwrap();
            prop_assert_eq!(a.label, b.label);
            for (u, v) in a.residuals.iter().zip(&b.residuals) {
                prop_assert!((alpha * u - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn linear_kernel_reduction_labels(seed in any::<u64>(), s in 1usize..5) {
        let model = random_model(seed, 9, 3, 6);
        let kmodel = model.clone().with_kernel(KernelSpec::Linear).unwrap();
        let mut r = rng(seed ^ 4);
        let x = gaussian(&mut r, 9);
        let a = classify_cdols(&model, &x, s).unwrap();
        let b = classify_kcdols(&kmodel, &x, s, KernelSpec::Linear).unwrap();
        prop_assert_eq!(a.label, b.label);
    }
}
