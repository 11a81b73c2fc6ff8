//! Finite-dimensional complex linear algebra domain types.
//!
//! Everything downstream (probabilities, errors, weak values, quasiprobability
//! tables) is built from the three types here: normalized state vectors,
//! Hermitian observables, and their eigensystems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on |norm - 1| before a state vector is rejected.
pub const NORM_TOL: f64 = 1e-6;
/// Hermiticity tolerance, relative to the largest entry magnitude.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalue gaps below this are merged into one degeneracy cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

pub(crate) fn all_finite<'a, I: IntoIterator<Item = &'a C64>>(it: I) -> bool {
    it.into_iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A normalized pure state |psi> on a finite-dimensional Hilbert space.
///
/// Construction rejects non-finite amplitudes and vectors whose norm deviates
/// from 1 by more than [`NORM_TOL`]; accepted vectors are rescaled so the
/// stored norm is 1 to machine precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: DVector<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyVector);
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite);
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps: v / C64::from(norm) })
    }

    /// Explicit normalizing constructor; rejects only the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyVector);
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite);
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amps: v / C64::from(norm) })
    }

    pub fn from_reals(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector |k> in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self { amps: DVector::from_vec(amps) }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    /// <self|other>
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(())
}

/// A Hermitian operator on the system Hilbert space.
///
/// Hermiticity is checked entrywise against [`HERMITICITY_TOL`] scaled by the
/// largest entry magnitude; the stored matrix is the Hermitian part
/// (M + M^H)/2 so later spectral computations see an exactly self-adjoint
/// input.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: DMatrix<C64>,
}

impl Observable {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        check_square(matrix.nrows(), matrix.ncols())?;
        if matrix.nrows() == 0 {
            return Err(Error::EmptyVector);
        }
        if !all_finite(matrix.iter()) {
            return Err(Error::NonFinite);
        }
        let max_mag = matrix.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let adj = matrix.adjoint();
        let max_asymmetry = (&matrix - &adj).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if max_asymmetry > HERMITICITY_TOL * max_mag {
            return Err(Error::NotHermitian { max_asymmetry });
        }
        Ok(Self { matrix: (matrix + adj) * C64::from(0.5) })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        let flat: Vec<C64> = rows.iter().flatten().cloned().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, psi: &Ket) -> Result<DVector<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi.dim() });
        }
        Ok(&self.matrix * psi.amps())
    }
}

/// Validate a raw square complex matrix as an observable.
pub fn validate_hermitian(raw: DMatrix<C64>) -> Result<Observable> {
    Observable::new(raw)
}

/// <psi|A|psi>, guaranteed real for a Hermitian A; the imaginary residue is
/// checked against 1e-10 before being discarded.
pub fn expectation(obs: &Observable, psi: &Ket) -> Result<f64> {
    let v = obs.apply(psi)?;
    let z = psi.amps().dotc(&v);
    debug_assert!(z.im.abs() < 1e-10, "imaginary residue {} on a Hermitian sandwich", z.im);
    Ok(z.re)
}

/// One degeneracy cluster: eigenvalue (mean over the cluster, gaps < 1e-9)
/// and the indices of its eigenvectors in the ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    pub indices: Vec<usize>,
}

/// Full spectral decomposition of an [`Observable`], with a deterministic
/// ordering (eigenvalues ascending) and phase convention (each eigenvector's
/// largest-magnitude component made real positive).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Ket>,
    clusters: Vec<EigenCluster>,
}

impl Eigensystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Ket] {
        &self.eigenvectors
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Spectral projector onto the eigenspace of one cluster.
    pub fn projector(&self, cluster: &EigenCluster) -> DMatrix<C64> {
        let dim = self.eigenvectors[0].dim();
        let mut p = DMatrix::zeros(dim, dim);
        for &k in &cluster.indices {
            let v = self.eigenvectors[k].amps();
            p += v * v.adjoint();
        }
        p
    }

    /// Sum_k lambda_k |v_k><v_k|
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let dim = self.eigenvectors[0].dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (l, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m += v.amps() * v.amps().adjoint() * C64::from(*l);
        }
        m
    }
}

fn phase_fix(mut v: DVector<C64>) -> DVector<C64> {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag + 1e-12 {
            best = i;
            best_mag = m;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / C64::from(best_mag);
        v *= phase;
    }
    v
}

/// Spectral decomposition with ascending eigenvalues, fixed eigenvector
/// phases, and degeneracy clusters at gap threshold [`DEGENERACY_GAP`].
pub fn eigensystem(obs: &Observable) -> Eigensystem {
    let eig = obs.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut eigenvectors = Vec::with_capacity(order.len());
    for &k in &order {
        eigenvalues.push(eig.eigenvalues[k]);
        let v = phase_fix(eig.eigenvectors.column(k).into_owned());
        eigenvectors.push(Ket { amps: v });
    }

    let mut clusters: Vec<EigenCluster> = Vec::new();
    for (i, &l) in eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (l - eigenvalues[*c.indices.last().unwrap()]).abs() < DEGENERACY_GAP => {
                c.indices.push(i);
            }
            _ => clusters.push(EigenCluster { value: l, indices: vec![i] }),
        }
    }
    for c in &mut clusters {
        c.value = c.indices.iter().map(|&i| eigenvalues[i]).sum::<f64>() / c.indices.len() as f64;
    }

    Eigensystem { eigenvalues, eigenvectors, clusters }
}

pub fn identity(dim: usize) -> DMatrix<C64> {
    DMatrix::identity(dim, dim)
}

pub fn sigma_x() -> Observable {
    Observable::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .unwrap()
}

pub fn sigma_y() -> Observable {
    Observable::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
    .unwrap()
}

pub fn sigma_z() -> Observable {
    Observable::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
    .unwrap()
}
