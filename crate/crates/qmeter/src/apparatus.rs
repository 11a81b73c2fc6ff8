//! Explicit system-meter measurement implementations, their induced POVMs,
//! and the weak-coupling meter shift.
//!
//! Tensor index convention, fixed throughout: joint index
//! `j = system_index * meter_dim + meter_index` (system-major).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{self, eigensystem, C64, Ket, Observable};
use crate::measurement::{Povm, PovmElement, ProjectiveBasis};

/// Entrywise tolerance on U^H U = I.
pub const UNITARITY_TOL: f64 = 1e-9;
/// Post-selection probabilities below this make conditioning undefined.
pub const POSTSELECT_TOL: f64 = 1e-12;

/// A system-meter measurement: meter preparation, joint unitary, meter readout.
#[derive(Debug, Clone)]
pub struct Apparatus {
    system_dim: usize,
    meter_dim: usize,
    meter_init: Ket,
    joint_unitary: DMatrix<C64>,
    readout_basis: ProjectiveBasis,
}

impl Apparatus {
    pub fn new(
        system_dim: usize,
        meter_dim: usize,
        meter_init: Ket,
        joint_unitary: DMatrix<C64>,
        readout_basis: ProjectiveBasis,
    ) -> Result<Self> {
        let joint = system_dim * meter_dim;
        if meter_init.dim() != meter_dim {
            return Err(Error::DimensionMismatch { expected: meter_dim, got: meter_init.dim() });
        }
        if readout_basis.dim() != meter_dim {
            return Err(Error::DimensionMismatch { expected: meter_dim, got: readout_basis.dim() });
        }
        if joint_unitary.nrows() != joint || joint_unitary.ncols() != joint {
            return Err(Error::DimensionMismatch { expected: joint, got: joint_unitary.nrows() });
        }
        if !hilbert::all_finite(joint_unitary.iter()) {
            return Err(Error::NonFinite);
        }
        let deviation = (joint_unitary.adjoint() * &joint_unitary - hilbert::identity(joint))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { system_dim, meter_dim, meter_init, joint_unitary, readout_basis })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn meter_dim(&self) -> usize {
        self.meter_dim
    }

    pub fn meter_init(&self) -> &Ket {
        &self.meter_init
    }

    pub fn joint_unitary(&self) -> &DMatrix<C64> {
        &self.joint_unitary
    }

    pub fn readout_basis(&self) -> &ProjectiveBasis {
        &self.readout_basis
    }

    /// Kraus operator K_m = (I (x) <m|) U (I (x) |init>) for one readout vector.
    pub fn kraus(&self, readout: &Ket) -> DMatrix<C64> {
        let ds = self.system_dim;
        let dm = self.meter_dim;
        let mut k = DMatrix::zeros(ds, ds);
        for s_out in 0..ds {
            for s_in in 0..ds {
                let mut acc = C64::new(0.0, 0.0);
                for mu_out in 0..dm {
                    for mu_in in 0..dm {
                        acc += readout.amps()[mu_out].conj()
                            * self.joint_unitary[(s_out * dm + mu_out, s_in * dm + mu_in)]
                            * self.meter_init.amps()[mu_in];
                    }
                }
                k[(s_out, s_in)] = acc;
            }
        }
        k
    }
}

/// Compress an apparatus into its induced POVM {E_m = K_m^H K_m}, one element
/// per meter readout outcome.
pub fn induced_povm(app: &Apparatus) -> Result<Povm> {
    let mut elements = Vec::with_capacity(app.meter_dim);
    for (label, readout) in app.readout_basis.iter() {
        let k = app.kraus(readout);
        elements.push(PovmElement::new(label, k.adjoint() * k)?);
    }
    Povm::new(elements)
}

/// One-parameter qubit-meter coupling generated by the system observable:
/// U(phi) = Sum_a P_a (x) R_y(phi * a), meter prepared in |0>.
///
/// This is a discrete stand-in for a weak pointer coupling; the readout
/// observable sigma_x gives a conditional shift whose phi -> 0 limit is the
/// real part of the weak value.
#[derive(Debug, Clone)]
pub struct CouplingFamily {
    observable: Observable,
    strength: f64,
}

fn ry(theta: f64) -> DMatrix<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[
        C64::new(c, 0.0), C64::new(-s, 0.0),
        C64::new(s, 0.0), C64::new(c, 0.0),
    ])
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

impl CouplingFamily {
    pub fn new(observable: Observable, strength: f64) -> Self {
        Self { observable, strength }
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Joint unitary Sum_a P_a (x) R_y(phi * a) in the system-major convention.
    pub fn joint_unitary(&self) -> DMatrix<C64> {
        let eig = eigensystem(&self.observable);
        let joint = self.observable.dim() * 2;
        let mut u = DMatrix::zeros(joint, joint);
        for cluster in eig.clusters() {
            u += kron(&eig.projector(cluster), &ry(self.strength * cluster.value));
        }
        u
    }

    /// Apparatus with meter |0> and the given meter readout basis.
    pub fn apparatus(&self, readout_basis: ProjectiveBasis) -> Result<Apparatus> {
        Apparatus::new(
            self.observable.dim(),
            2,
            Ket::basis_state(2, 0),
            self.joint_unitary(),
            readout_basis,
        )
    }
}

/// Exact conditional meter expectation value after the coupling: evolve
/// |psi> (x) |0> by U(phi), condition on the system post-selection, and
/// evaluate `meter_obs` on the collapsed meter state. No sampling.
///
/// Contract: shift / phi -> Re[<post|A|psi> / <post|psi>] as phi -> 0, with
/// deviation O(phi^2).
pub fn conditional_meter_shift(
    fam: &CouplingFamily,
    psi: &Ket,
    postselect: &Ket,
    meter_obs: &Observable,
) -> Result<f64> {
    let ds = fam.observable.dim();
    if psi.dim() != ds {
        return Err(Error::DimensionMismatch { expected: ds, got: psi.dim() });
    }
    if postselect.dim() != ds {
        return Err(Error::DimensionMismatch { expected: ds, got: postselect.dim() });
    }
    if meter_obs.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: meter_obs.dim() });
    }
    let u = fam.joint_unitary();

    // |psi> (x) |0>, system-major
    let mut joint = DVector::zeros(ds * 2);
    for s in 0..ds {
        joint[s * 2] = psi.amps()[s];
    }
    let evolved = u * joint;

    // partial inner product with <postselect| on the system factor
    let mut meter = DVector::zeros(2);
    for s in 0..ds {
        for mu in 0..2 {
            meter[mu] += postselect.amps()[s].conj() * evolved[s * 2 + mu];
        }
    }
    let p = meter.norm_squared();
    if p < POSTSELECT_TOL {
        return Err(Error::VanishingPostSelection { probability: p });
    }
    let val = meter.dotc(&(meter_obs.matrix() * &meter)).re / p;
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, sigma_x, sigma_z};
    use crate::measurement::{basis_to_povm, outcome_probabilities, z_basis};

    fn cnot() -> DMatrix<C64> {
        // system controls meter, system-major ordering
        let mut u = DMatrix::zeros(4, 4);
        let one = C64::new(1.0, 0.0);
        u[(0, 0)] = one;
        u[(1, 1)] = one;
        u[(2, 3)] = one;
        u[(3, 2)] = one;
        u
    }

    #[test]
    fn cnot_apparatus_is_projective_z_measurement() {
        let app = Apparatus::new(2, 2, Ket::basis_state(2, 0), cnot(), z_basis(2)).unwrap();
        let povm = induced_povm(&app).unwrap();
        let z = basis_to_povm(&z_basis(2));
        for (e, p) in povm.elements().iter().zip(z.elements()) {
            assert!((e.matrix() - p.matrix()).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn identity_apparatus_gives_no_information() {
        let app = Apparatus::new(
            2,
            2,
            Ket::basis_state(2, 0),
            hilbert::identity(4),
            z_basis(2),
        )
        .unwrap();
        let povm = induced_povm(&app).unwrap();
        assert!((povm.elements()[0].matrix() - hilbert::identity(2))
            .iter()
            .all(|z| z.norm() < 1e-12));
        assert!(povm.elements()[1].matrix().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn coupling_family_half_pi_povm() {
        let fam = CouplingFamily::new(sigma_z(), std::f64::consts::FRAC_PI_2);
        let app = fam.apparatus(z_basis(2)).unwrap();
        let povm = induced_povm(&app).unwrap();
        let c2 = std::f64::consts::FRAC_PI_4.cos().powi(2);
        for i in 0..2 {
            let e0 = povm.elements()[0].matrix()[(i, i)].re;
            let e1 = povm.elements()[1].matrix()[(i, i)].re;
            assert!((e0 - c2).abs() < 1e-12);
            assert!((e1 - (1.0 - c2)).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_coupling_distinguishes_eigenstates() {
        // at phi = pi/2 with an X readout the Kraus operators are exactly the
        // spectral projectors, so eigenstates map to definite outcomes
        let fam = CouplingFamily::new(sigma_z(), std::f64::consts::FRAC_PI_2);
        let app = fam.apparatus(crate::measurement::x_basis()).unwrap();
        let povm = induced_povm(&app).unwrap();
        for (k, correct) in [(0usize, 0usize), (1, 1)] {
            let probs = outcome_probabilities(&povm, &Ket::basis_state(2, k)).unwrap();
            assert!((probs[correct].1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenstate_shift_recovers_eigenvalue() {
        let fam = CouplingFamily::new(sigma_z(), 0.05);
        let post = Ket::from_reals(&[0.6, 0.8]).unwrap();
        let shift =
            conditional_meter_shift(&fam, &Ket::basis_state(2, 0), &post, &sigma_x()).unwrap();
        assert!((shift / 0.05 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn weak_shift_converges_to_real_weak_value() {
        // psi = cos(pi/8)|0> + sin(pi/8)|1>, postselect |+>: A_w = sqrt(2) - 1
        let t = std::f64::consts::PI / 8.0;
        let psi = Ket::from_reals(&[t.cos(), t.sin()]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Ket::from_reals(&[s, s]).unwrap();
        let target = std::f64::consts::SQRT_2 - 1.0;
        let mut errs = Vec::new();
        for phi in [0.1, 0.05, 0.025] {
            let fam = CouplingFamily::new(sigma_z(), phi);
            let shift = conditional_meter_shift(&fam, &psi, &plus, &sigma_x()).unwrap();
            errs.push((shift / phi - target).abs());
        }
        assert!((errs[2] - 0.0).abs() < 1e-3);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        }
    }

    #[test]
    fn imaginary_weak_value_gives_zero_shift() {
        let psi = Ket::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Ket::from_reals(&[s, s]).unwrap();
        for phi in [0.1, 0.05] {
            let fam = CouplingFamily::new(sigma_z(), phi);
            let shift = conditional_meter_shift(&fam, &psi, &plus, &sigma_x()).unwrap();
            assert!((shift / phi).abs() < 1e-2, "shift/phi = {}", shift / phi);
        }
    }

    #[test]
    fn vanishing_post_selection_is_an_error() {
        let fam = CouplingFamily::new(sigma_z(), 1e-6);
        let psi = Ket::basis_state(2, 0);
        let post = Ket::basis_state(2, 1);
        assert!(matches!(
            conditional_meter_shift(&fam, &psi, &post, &sigma_x()),
            Err(Error::VanishingPostSelection { .. })
        ));
    }

    #[test]
    fn non_unitary_joint_matrix_rejected() {
        let mut u = hilbert::identity(4);
        u[(0, 0)] = C64::new(2.0, 0.0);
        assert!(matches!(
            Apparatus::new(2, 2, Ket::basis_state(2, 0), u, z_basis(2)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn expectation_sanity_on_meter_readout() {
        // the sigma_x readout used by the shift matches its projective form
        let plus = Ket::from_reals(&[std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap();
        assert!((expectation(&sigma_x(), &plus).unwrap() - 1.0).abs() < 1e-12);
    }
}
