//! Zero-error certification for projective measurements and the operator
//! decomposition A = B + M.
//!
//! For a projective measurement the squared error vanishes exactly when every
//! residual <m|(A~_m - A)|psi> is zero; the same condition is equivalent to
//! |psi> being an eigenstate of A - M with eigenvalue B_psi. Both routes are
//! implemented and their identity is a tested invariant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::error_analysis::{ValueAssignment, ZERO_PROB_TOL};
use crate::hilbert::{C64, Ket, Observable};
use crate::measurement::ProjectiveBasis;

/// |r_m| below this yields the "deterministic" verdict.
pub const DETERMINISTIC_TOL: f64 = 1e-8;
/// Imaginary parts below this count as real for the matrix-element family check.
pub const REAL_TOL: f64 = 1e-10;

/// The conditioned value <m|A|psi> / <m|psi> with its post-selection weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValue {
    pub value: C64,
    pub postselect_probability: f64,
}

/// Weak value of `obs` for initial state `psi` post-selected on `m_vec`.
pub fn weak_value(psi: &Ket, m_vec: &Ket, obs: &Observable) -> Result<WeakValue> {
    let overlap = m_vec.inner(psi);
    let p = overlap.norm_sqr();
    if p < ZERO_PROB_TOL {
        return Err(Error::VanishingPostSelection { probability: p });
    }
    let numer = m_vec.amps().dotc(&obs.apply(psi)?);
    Ok(WeakValue { value: numer / overlap, postselect_probability: p })
}

/// Residuals r_m = <m|(A~_m - A)|psi> and the determinism verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroErrorReport {
    pub residuals: Vec<(String, C64)>,
    pub max_residual: f64,
    pub deterministic: bool,
    /// Sum_m |r_m|^2 — equals the total squared error for projective measurements.
    pub total_error_sq: f64,
}

/// Zero-error certificate for a projective measurement: all residuals, the
/// verdict at [`DETERMINISTIC_TOL`], and their total square.
///
/// Outcomes with undefined assigned values are allowed only where
/// |<m|psi>|^2 < 1e-12; they contribute a zero residual.
pub fn zero_error_residuals(
    psi: &Ket,
    basis: &ProjectiveBasis,
    obs: &Observable,
    assign: &ValueAssignment,
) -> Result<ZeroErrorReport> {
    if psi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: psi.dim() });
    }
    let a_psi = obs.apply(psi)?;
    let mut residuals = Vec::with_capacity(basis.dim());
    let mut max_residual = 0.0f64;
    let mut total = 0.0;
    for (label, m) in basis.iter() {
        let overlap = m.inner(psi);
        let r = match assign.get(label)? {
            Some(v) => C64::from(v) * overlap - m.amps().dotc(&a_psi),
            None => {
                if overlap.norm_sqr() >= ZERO_PROB_TOL {
                    return Err(Error::UndefinedAssignment {
                        label: label.to_string(),
                        probability: overlap.norm_sqr(),
                    });
                }
                C64::new(0.0, 0.0)
            }
        };
        max_residual = max_residual.max(r.norm());
        total += r.norm_sqr();
        residuals.push((label.to_string(), r));
    }
    Ok(ZeroErrorReport {
        residuals,
        max_residual,
        deterministic: max_residual < DETERMINISTIC_TOL,
        total_error_sq: total,
    })
}

/// The sufficient condition for a real weak value: true iff every matrix
/// element <m|A|m'> and every coefficient <m|psi> is real (|Im| < 1e-10).
/// When true, the optimal assignment certifies deterministic.
pub fn real_matrix_family_check(
    basis: &ProjectiveBasis,
    obs: &Observable,
    psi: &Ket,
) -> Result<bool> {
    if psi.dim() != basis.dim() || obs.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: psi.dim() });
    }
    for (_, m) in basis.iter() {
        if m.inner(psi).im.abs() >= REAL_TOL {
            return Ok(false);
        }
        let a_m = obs.apply(m)?;
        for (_, m2) in basis.iter() {
            if m2.amps().dotc(&a_m).im.abs() >= REAL_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The split A = B + M with M diagonal in the measurement basis.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub m_op: Observable,
    pub b_op: Observable,
    pub b_psi: f64,
    /// ||(A - M)|psi> - B_psi |psi>||
    pub eigen_residual: f64,
}

/// Build M = Sum_m (A~_m - B_psi)|m><m| and B = A - M, and evaluate how far
/// `psi` is from being a B_psi-eigenstate of A - M.
pub fn decompose(
    obs: &Observable,
    basis: &ProjectiveBasis,
    assign: &ValueAssignment,
    b_psi: f64,
    psi: &Ket,
) -> Result<Decomposition> {
    if obs.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: obs.dim() });
    }
    if psi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: psi.dim() });
    }
    let dim = basis.dim();
    let mut m_matrix: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for (label, m) in basis.iter() {
        let v = assign.defined(label)?;
        m_matrix += m.amps() * m.amps().adjoint() * C64::from(v - b_psi);
    }
    let m_op = Observable::new(m_matrix)?;
    let b_op = Observable::new(obs.matrix() - m_op.matrix())?;
    let eigen_residual = (b_op.apply(psi)? - psi.amps() * C64::from(b_psi)).norm();
    Ok(Decomposition { m_op, b_op, b_psi, eigen_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_analysis::ValueAssignment;
    use crate::hilbert::{eigensystem, sigma_y, sigma_z};
    use crate::measurement::{x_basis, z_basis, ProjectiveBasis};

    fn theta_state() -> Ket {
        let t = std::f64::consts::PI / 8.0;
        Ket::from_reals(&[t.cos(), t.sin()]).unwrap()
    }

    fn complex_state() -> Ket {
        Ket::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap()
    }

    fn plus() -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_reals(&[s, s]).unwrap()
    }

    fn minus() -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_reals(&[s, -s]).unwrap()
    }

    #[test]
    fn weak_value_of_eigenstate_is_eigenvalue() {
        let wv = weak_value(&Ket::basis_state(2, 0), &plus(), &sigma_z()).unwrap();
        assert!((wv.value - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_values_theta_pi8() {
        let psi = theta_state();
        let wp = weak_value(&psi, &plus(), &sigma_z()).unwrap();
        let wm = weak_value(&psi, &minus(), &sigma_z()).unwrap();
        assert!((wp.value.re - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-12);
        assert!(wp.value.im.abs() < 1e-12);
        // anomalous: outside the eigenvalue range [-1, 1]
        assert!((wm.value.re - (std::f64::consts::SQRT_2 + 1.0)).abs() < 1e-12);
        assert!(wm.value.im.abs() < 1e-12);
    }

    #[test]
    fn weak_value_purely_imaginary() {
        // (1 - i) / (1 + i) = -i
        let wv = weak_value(&complex_state(), &plus(), &sigma_z()).unwrap();
        assert!((wv.value - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_value_rejects_orthogonal_postselection() {
        assert!(matches!(
            weak_value(&Ket::basis_state(2, 0), &Ket::basis_state(2, 1), &sigma_z()),
            Err(Error::VanishingPostSelection { .. })
        ));
    }

    #[test]
    fn eigenbasis_residuals_vanish() {
        let obs = sigma_z();
        let eig = eigensystem(&obs);
        let basis = ProjectiveBasis::with_default_labels(eig.eigenvectors().to_vec()).unwrap();
        let assign = ValueAssignment::from_values(
            basis.labels().iter().cloned().zip(eig.eigenvalues().iter().copied()),
        );
        let report = zero_error_residuals(&theta_state(), &basis, &obs, &assign).unwrap();
        assert!(report.deterministic);
        assert!(report.max_residual < 1e-12);
    }

    #[test]
    fn theta_pi8_optimal_assignment_is_deterministic() {
        let assign = ValueAssignment::from_values([
            ("plus", std::f64::consts::SQRT_2 - 1.0),
            ("minus", std::f64::consts::SQRT_2 + 1.0),
        ]);
        let report =
            zero_error_residuals(&theta_state(), &x_basis(), &sigma_z(), &assign).unwrap();
        assert!(report.deterministic);
        assert!(report.max_residual < 1e-12);
    }

    #[test]
    fn complex_state_zero_assignment_residuals() {
        let assign = ValueAssignment::from_values([("plus", 0.0), ("minus", 0.0)]);
        let report =
            zero_error_residuals(&complex_state(), &x_basis(), &sigma_z(), &assign).unwrap();
        assert!(!report.deterministic);
        for (_, r) in &report.residuals {
            assert!((r.norm_sqr() - 0.5).abs() < 1e-12);
        }
        assert!((report.total_error_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_family_check_cases() {
        assert!(real_matrix_family_check(&x_basis(), &sigma_z(), &theta_state()).unwrap());
        assert!(!real_matrix_family_check(&z_basis(2), &sigma_y(), &theta_state()).unwrap());
        assert!(!real_matrix_family_check(&x_basis(), &sigma_z(), &complex_state()).unwrap());
    }

    #[test]
    fn decompose_eigenbasis_gives_m_equals_a() {
        let obs = sigma_z();
        let eig = eigensystem(&obs);
        let basis = ProjectiveBasis::with_default_labels(eig.eigenvectors().to_vec()).unwrap();
        let assign = ValueAssignment::from_values(
            basis.labels().iter().cloned().zip(eig.eigenvalues().iter().copied()),
        );
        let d = decompose(&obs, &basis, &assign, 0.0, &theta_state()).unwrap();
        assert!((d.m_op.matrix() - obs.matrix()).iter().all(|z| z.norm() < 1e-12));
        assert!(d.b_op.matrix().iter().all(|z| z.norm() < 1e-12));
        assert!(d.eigen_residual < 1e-12);
    }

    #[test]
    fn decompose_theta_pi8_residual_vanishes() {
        let assign = ValueAssignment::from_values([
            ("plus", std::f64::consts::SQRT_2 - 1.0),
            ("minus", std::f64::consts::SQRT_2 + 1.0),
        ]);
        let d = decompose(&sigma_z(), &x_basis(), &assign, 0.0, &theta_state()).unwrap();
        assert!(d.eigen_residual < 1e-12);
        // B + M reconstructs A exactly up to rounding
        let sum = d.b_op.matrix() + d.m_op.matrix();
        assert!((sum - sigma_z().matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn decompose_complex_state_residual_is_one() {
        let assign = ValueAssignment::from_values([("plus", 0.0), ("minus", 0.0)]);
        let d = decompose(&sigma_z(), &x_basis(), &assign, 0.0, &complex_state()).unwrap();
        assert!((d.eigen_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_identity_and_offset_invariance() {
        // eigen_residual^2 == Sum |r_m|^2, independent of b_psi
        let psi = theta_state();
        let assign = ValueAssignment::from_values([("plus", 0.3), ("minus", -1.2)]);
        let report = zero_error_residuals(&psi, &x_basis(), &sigma_z(), &assign).unwrap();
        for b_psi in [-2.0, 0.0, 3.7] {
            let d = decompose(&sigma_z(), &x_basis(), &assign, b_psi, &psi).unwrap();
            assert!((d.eigen_residual.powi(2) - report.total_error_sq).abs() < 1e-10);
        }
    }

    #[test]
    fn decompose_requires_defined_assignment() {
        let assign = ValueAssignment::from_pairs([("plus", Some(1.0)), ("minus", None)]);
        assert!(decompose(&sigma_z(), &x_basis(), &assign, 0.0, &theta_state()).is_err());
    }
}
