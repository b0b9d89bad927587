//! Random instance generators shared by problem families, oracle sweeps and tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{SymmetricMatrix, Vector};

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_vector(rng: &mut impl Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| normal(rng))
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vector {
    loop {
        let v = random_vector(rng, d);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Symmetric matrix with standard normal entries.
pub fn random_symmetric(rng: &mut impl Rng, d: usize) -> SymmetricMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| normal(rng));
    SymmetricMatrix::from_symmetric_unchecked((&a + a.transpose()) * 0.5)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| normal(rng));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(λ) Qᵀ` with a Haar-random `Q`.
pub fn with_spectrum(rng: &mut impl Rng, eigenvalues: &[f64]) -> SymmetricMatrix {
    let d = eigenvalues.len();
    let q = random_orthogonal(rng, d);
    let m = &q * DMatrix::from_diagonal(&Vector::from_column_slice(eigenvalues)) * q.transpose();
    SymmetricMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
}

/// Positive semidefinite `B Bᵀ`, with random rank between 1 and `d`.
pub fn random_psd(rng: &mut impl Rng, d: usize) -> SymmetricMatrix {
    let rank = rng.random_range(1..=d);
    let b = DMatrix::from_fn(d, rank, |_, _| normal(rng));
    let m = &b * b.transpose();
    SymmetricMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
}

/// Positive definite matrix with eigenvalues drawn log-uniformly from `[lo, hi]`.
pub fn random_pd(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> SymmetricMatrix {
    let (a, b) = (lo.ln(), hi.ln());
    let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(a..=b).exp()).collect();
    with_spectrum(rng, &eigs)
}
