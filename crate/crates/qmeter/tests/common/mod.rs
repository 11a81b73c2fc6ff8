//! Seeded random generators shared by the integration suites.
//!
//! Each test binary compiles its own copy, so not every helper is used by
//! every binary.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmeter::hilbert::{C64, Ket, Observable};
use qmeter::measurement::{validate_povm, Povm, ProjectiveBasis};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unif(rng: &mut ChaCha8Rng) -> f64 {
    rng.next_u64() as f64 / 2f64.powi(64)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1 = unif(rng).max(1e-12);
    let u2 = unif(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

pub fn random_ket(rng: &mut ChaCha8Rng, dim: usize, real: bool) -> Ket {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| if real { C64::new(gauss(rng), 0.0) } else { cgauss(rng) })
            .collect();
        if let Ok(k) = Ket::normalized(amps) {
            return k;
        }
    }
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, real: bool) -> Observable {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        if real {
            C64::new(gauss(rng), 0.0)
        } else {
            cgauss(rng)
        }
    });
    Observable::new((&g + g.adjoint()) * C64::from(0.5)).unwrap()
}

/// Haar-ish unitary via Gram-Schmidt on Gaussian columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize, real: bool) -> DMatrix<C64> {
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = DVector::from_fn(dim, |_, _| {
            if real {
                C64::new(gauss(rng), 0.0)
            } else {
                cgauss(rng)
            }
        });
        for c in &cols {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / C64::from(norm));
        }
    }
    DMatrix::from_columns(&cols)
}

pub fn random_basis(rng: &mut ChaCha8Rng, dim: usize, real: bool) -> ProjectiveBasis {
    let u = random_unitary(rng, dim, real);
    let vectors = (0..dim)
        .map(|c| Ket::normalized(u.column(c).iter().copied().collect()).unwrap())
        .collect();
    ProjectiveBasis::with_default_labels(vectors).unwrap()
}

/// Random non-projective POVM with `k` elements: E_i = S^{-1/2} G_i S^{-1/2}
/// with PSD G_i = X_i X_i^H and S = Sum_i G_i.
pub fn random_povm(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Povm {
    let gs: Vec<DMatrix<C64>> = (0..k)
        .map(|_| {
            let x = DMatrix::from_fn(dim, dim, |_, _| cgauss(rng));
            &x * x.adjoint()
        })
        .collect();
    let mut s = DMatrix::zeros(dim, dim);
    for g in &gs {
        s += g;
    }
    let eig = qmeter::hilbert::eigensystem(&Observable::new(s).unwrap());
    let mut s_inv_sqrt: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for (l, v) in eig.eigenvalues().iter().zip(eig.eigenvectors()) {
        assert!(*l > 1e-9, "S must be positive definite");
        s_inv_sqrt += v.amps() * v.amps().adjoint() * C64::from(1.0 / l.sqrt());
    }
    let raw = gs
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("m{i}"), &s_inv_sqrt * g * &s_inv_sqrt))
        .collect();
    validate_povm(raw).unwrap()
}

/// Observable with all-real matrix elements in the given basis:
/// A = V R V^T with R real symmetric and V the (real) basis matrix.
pub fn real_in_basis_observable(
    rng: &mut ChaCha8Rng,
    basis: &ProjectiveBasis,
) -> Observable {
    let dim = basis.dim();
    let r = {
        let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(gauss(rng), 0.0));
        (&g + g.transpose()) * C64::from(0.5)
    };
    let mut a: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for (i, vi) in basis.vectors().iter().enumerate() {
        for (j, vj) in basis.vectors().iter().enumerate() {
            a += vi.amps() * vj.amps().adjoint() * r[(i, j)];
        }
    }
    Observable::new(a).unwrap()
}

/// Real superposition of the basis vectors.
pub fn real_in_basis_ket(rng: &mut ChaCha8Rng, basis: &ProjectiveBasis) -> Ket {
    let dim = basis.dim();
    loop {
        let mut v = DVector::zeros(dim);
        for b in basis.vectors() {
            v += b.amps() * C64::from(gauss(rng));
        }
        if let Ok(k) = Ket::normalized(v.iter().copied().collect()) {
            return k;
        }
    }
}
