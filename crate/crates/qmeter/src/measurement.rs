//! POVMs, projective measurements, and outcome probabilities.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{self, eigensystem, C64, Ket, Observable};

/// Positivity slack on the smallest eigenvalue of a POVM element.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Entrywise tolerance on Sum_m E_m = I.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Pairwise orthonormality tolerance for projective bases.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// One labeled POVM element E_m: Hermitian and positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    label: String,
    matrix: DMatrix<C64>,
}

impl PovmElement {
    pub fn new(label: impl Into<String>, matrix: DMatrix<C64>) -> Result<Self> {
        let obs = Observable::new(matrix)?;
        Ok(Self { label: label.into(), matrix: obs.matrix().clone() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    fn min_eigenvalue(&self) -> f64 {
        let obs = Observable::new(self.matrix.clone()).unwrap();
        eigensystem(&obs).min_eigenvalue()
    }
}

/// An ordered, labeled POVM: positive elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    /// Validates positivity (per element) and completeness; on rejection the
    /// error names the violated invariant with its worst offender.
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        let dim = match elements.first() {
            Some(e) => e.matrix.nrows(),
            None => return Err(Error::EmptyVector),
        };
        for e in &elements {
            if e.matrix.nrows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.matrix.nrows() });
            }
        }
        for (i, e) in elements.iter().enumerate() {
            for other in &elements[..i] {
                if other.label == e.label {
                    return Err(Error::DuplicateLabel { label: e.label.clone() });
                }
            }
        }
        for (i, e) in elements.iter().enumerate() {
            let min = e.min_eigenvalue();
            if min < -POSITIVITY_TOL {
                return Err(Error::NotPositive { element: i + 1, eigenvalue: min });
            }
        }
        let mut sum: DMatrix<C64> = DMatrix::zeros(dim, dim);
        for e in &elements {
            sum += &e.matrix;
        }
        let deviation = (sum - hilbert::identity(dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(|e| e.label.clone()).collect()
    }
}

/// Validate raw labeled matrices as a POVM.
pub fn validate_povm(raw: Vec<(String, DMatrix<C64>)>) -> Result<Povm> {
    let elements = raw
        .into_iter()
        .map(|(label, m)| PovmElement::new(label, m))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// A complete orthonormal measurement basis {|m>} with outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    dim: usize,
    labels: Vec<String>,
    vectors: Vec<Ket>,
}

impl ProjectiveBasis {
    pub fn new(labels: Vec<String>, vectors: Vec<Ket>) -> Result<Self> {
        let dim = match vectors.first() {
            Some(v) => v.dim(),
            None => return Err(Error::EmptyVector),
        };
        if vectors.len() != dim {
            return Err(Error::IncompleteBasis { expected: dim, got: vectors.len() });
        }
        if labels.len() != vectors.len() {
            return Err(Error::IncompleteBasis { expected: vectors.len(), got: labels.len() });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel { label: l.clone() });
            }
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
            }
        }
        for i in 0..vectors.len() {
            for j in 0..=i {
                let d = if i == j { 1.0 } else { 0.0 };
                let deviation = (vectors[i].inner(&vectors[j]) - C64::from(d)).norm();
                if deviation > ORTHONORMALITY_TOL {
                    return Err(Error::NotOrthonormal { i, j, deviation });
                }
            }
        }
        Ok(Self { dim, labels, vectors })
    }

    /// Default labels "m0", "m1", ...
    pub fn with_default_labels(vectors: Vec<Ket>) -> Result<Self> {
        let labels = (0..vectors.len()).map(|i| format!("m{i}")).collect();
        Self::new(labels, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[Ket] {
        &self.vectors
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Ket)> {
        self.labels.iter().map(String::as_str).zip(self.vectors.iter())
    }
}

/// Computational (Z) basis with labels "m0".."m{d-1}".
pub fn z_basis(dim: usize) -> ProjectiveBasis {
    let vectors = (0..dim).map(|k| Ket::basis_state(dim, k)).collect();
    ProjectiveBasis::with_default_labels(vectors).unwrap()
}

/// Qubit X basis {|+>, |->} labeled "plus", "minus".
pub fn x_basis() -> ProjectiveBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ProjectiveBasis::new(
        vec!["plus".into(), "minus".into()],
        vec![
            Ket::from_reals(&[s, s]).unwrap(),
            Ket::from_reals(&[s, -s]).unwrap(),
        ],
    )
    .unwrap()
}

/// Rank-1 projector POVM {|m><m|} from an orthonormal basis.
pub fn basis_to_povm(basis: &ProjectiveBasis) -> Povm {
    let elements = basis
        .iter()
        .map(|(label, v)| PovmElement {
            label: label.to_string(),
            matrix: v.amps() * v.amps().adjoint(),
        })
        .collect();
    // orthonormality of the basis already guarantees completeness
    Povm::new(elements).expect("projector POVM from an orthonormal basis")
}

/// Born-rule outcome probabilities P(m) = <psi|E_m|psi> (Hermitian sandwich,
/// real). Values inside the +-1e-9 slack are clamped to [0, 1]; anything
/// further out is a hard error.
pub fn outcome_probabilities(povm: &Povm, psi: &Ket) -> Result<Vec<(String, f64)>> {
    if psi.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: psi.dim() });
    }
    let mut out = Vec::with_capacity(povm.elements.len());
    for e in &povm.elements {
        let p = psi.amps().dotc(&(&e.matrix * psi.amps())).re;
        if !(-POSITIVITY_TOL..=1.0 + POSITIVITY_TOL).contains(&p) {
            return Err(Error::ProbabilityOutOfRange { label: e.label.clone(), value: p });
        }
        out.push((e.label.clone(), p.clamp(0.0, 1.0)));
    }
    Ok(out)
}
