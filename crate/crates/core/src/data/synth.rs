use super::rng;
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// Union-of-subspaces data: each class lives near its own random
/// `subspace_dim`-dimensional subspace of `R^ambient_dim`.
///
/// Per class, a basis is drawn from a Gaussian matrix and orthonormalized.
/// Each sample is the basis times standard Gaussian coefficients, plus
/// isotropic Gaussian noise of scale `noise_sigma`, scaled to unit norm.
/// Samples are stored class by class; class `i` is named `class{i}`.
pub fn synth_subspace(
    classes: usize,
    subspace_dim: usize,
    ambient_dim: usize,
    per_class: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if classes == 0 || per_class == 0 || subspace_dim == 0 {
        return Err(Error::config(
            "classes, per-class count and subspace dimension must be at least 1",
        ));
    }
    if subspace_dim > ambient_dim {
        return Err(Error::config(format!(
            "subspace dimension {subspace_dim} exceeds ambient dimension {ambient_dim}"
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::config(format!(
            "noise sigma must be finite and nonnegative, got {noise_sigma}"
        )));
    }

    let mut rng = rng::stream(seed, rng::SYNTH);
    let mut columns = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    for class in 0..classes {
        let basis = orthonormal_basis(&mut rng, ambient_dim, subspace_dim);
        let mut made = 0;
        while made < per_class {
            let mut x = vec![0.0; ambient_dim];
            for b in &basis {
                let c: f64 = rng.sample(StandardNormal);
                axpy(c, b, &mut x);
            }
            for v in x.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *v += noise_sigma * e;
            }
            let n = norm2(&x);
            if n == 0.0 {
                continue;
            }
            columns.push(x.iter().map(|v| v / n).collect::<Vec<_>>());
            labels.push(class);
            made += 1;
        }
    }
    let names = (0..classes).map(|c| format!("class{c}")).collect();
    LabeledDataset::new(Matrix::from_columns(&columns)?, labels, Some(names))
}

fn orthonormal_basis(rng: &mut impl Rng, ambient: usize, k: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..ambient).map(|_| rng.sample(StandardNormal)).collect();
        let scale = norm2(&v);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let n = norm2(&v);
        if n <= 1e-8 * scale {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    basis
}
