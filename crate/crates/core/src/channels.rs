//! Quantum channels in Kraus form, including the phase-noise and unital
//! classes that weak measurements of imaginary weak values tolerate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, TOL};
use crate::state::{DensityOperator, Observable};

/// A completely positive trace-preserving map `ρ ↦ Σ_n E_n ρ E_n†`.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let dim = first.dim();
        if let Some(bad) = kraus.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let channel = Self { kraus };
        let dev = channel.completeness_deviation();
        if dev > TOL {
            return Err(Error::NotComplete(dev));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `{√(1−p) I, √p Z}`.
    pub fn phase_flip(p: f64) -> Result<Self> {
        check_probability("phase-flip probability", p)?;
        Self::new(vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            ComplexMatrix::pauli_z().scale_real(p.sqrt()),
        ])
    }

    /// `{√(1−p) I, √p X}`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        check_probability("bit-flip probability", p)?;
        Self::new(vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            ComplexMatrix::pauli_x().scale_real(p.sqrt()),
        ])
    }

    /// `ρ ↦ (1−p) ρ + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability("depolarizing probability", p)?;
        let side = (p / 4.0).sqrt();
        Self::new(vec![
            ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt()),
            ComplexMatrix::pauli_x().scale_real(side),
            ComplexMatrix::pauli_y().scale_real(side),
            ComplexMatrix::pauli_z().scale_real(side),
        ])
    }

    /// Rotation `exp(−iφZ/2)` about the Z axis.
    pub fn z_rotation(phi: f64) -> Self {
        let half = Complex64::new(0.0, -phi / 2.0);
        Self {
            kraus: vec![ComplexMatrix::from_diag(&[half.exp(), (-half).exp()])],
        }
    }

    /// Amplitude damping towards `|0⟩` with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability("damping probability", gamma)?;
        Self::new(vec![
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?,
            ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?,
        ])
    }

    /// Phase noise with Kraus operators `E_n = Σ_k c_n(k) |k⟩⟨k|` in the
    /// eigenbasis of `k`. `coeffs[n][k]` holds `c_n(k)`; every column must
    /// satisfy `Σ_n |c_n(k)|² = 1`.
    pub fn phase_noise(k: &Observable, coeffs: &[Vec<Complex64>]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyKraus);
        }
        let dim = k.dim();
        if let Some(row) = coeffs.iter().find(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        for index in 0..dim {
            let norm: f64 = coeffs.iter().map(|row| row[index].norm_sqr()).sum();
            if (norm - 1.0).abs() > TOL {
                return Err(Error::InvalidCoefficients { index, norm });
            }
        }
        let kraus = coeffs
            .iter()
            .map(|row| {
                let mut e = ComplexMatrix::zeros(dim);
                for (i, &c) in row.iter().enumerate() {
                    e = &e + &k.eigenprojector(i).scale(c);
                }
                e
            })
            .collect();
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    /// `max |Σ E_n† E_n − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim()), |acc, e| {
                &acc + &(&e.dagger() * e)
            });
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// Applies the Kraus sum to an arbitrary operator (the map is linear).
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim()), |acc, e| {
                &acc + &(&(e * x) * &e.dagger())
            }))
    }

    pub fn apply(&self, sigma: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply_operator(sigma.matrix())?;
        Ok(DensityOperator::from_matrix_unchecked(out))
    }

    /// The channel `self ∘ other` (apply `other` first), Kraus list `{A_m B_n}`.
    pub fn compose(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a * b))
            .collect();
        Self::new(kraus)
    }

    /// `I_A ⊗ E`: the channel acting on the probe factor of a joint system.
    pub fn lift_to_probe(&self, dim_measured: usize) -> QuantumChannel {
        let id = ComplexMatrix::identity(dim_measured);
        Self {
            kraus: self.kraus.iter().map(|e| id.kron(e)).collect(),
        }
    }

    /// Whether every eigenprojector of `k` is a fixed point.
    ///
    /// Degenerate eigenspaces are treated strictly: coherences `|k⟩⟨l|`
    /// between eigenvectors sharing an eigenvalue must be preserved too.
    pub fn is_phase_noise(&self, k: &Observable) -> bool {
        if k.dim() != self.dim() {
            return false;
        }
        let vectors = k.eigenvectors();
        k.degenerate_groups().iter().all(|group| {
            group.iter().all(|&i| {
                group.iter().all(|&j| {
                    let x = ComplexMatrix::outer(&vectors[i], &vectors[j]);
                    self.apply_operator(&x)
                        .map(|y| y.approx_eq(&x, TOL))
                        .unwrap_or(false)
                })
            })
        })
    }

    /// Whether `Σ E_n E_n† = I`.
    pub fn is_unital(&self) -> bool {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim()), |acc, e| {
                &acc + &(e * &e.dagger())
            });
        sum.approx_eq(&ComplexMatrix::identity(self.dim()), TOL)
    }

    /// Compares the action of two channels on a basis of Hermitian matrices.
    pub fn same_action(&self, other: &QuantumChannel, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        hermitian_basis(self.dim()).iter().all(|h| {
            let a = self.apply_operator(h).unwrap();
            let b = other.apply_operator(h).unwrap();
            a.approx_eq(&b, tol)
        })
    }
}

/// The `d²` generalized Gell-Mann-style basis of Hermitian `d × d` matrices.
pub fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut m = ComplexMatrix::zeros(dim);
            match i.cmp(&j) {
                std::cmp::Ordering::Equal => m[(i, i)] = Complex64::new(1.0, 0.0),
                std::cmp::Ordering::Less => {
                    m[(i, j)] = Complex64::new(1.0, 0.0);
                    m[(j, i)] = Complex64::new(1.0, 0.0);
                }
                std::cmp::Ordering::Greater => {
                    m[(i, j)] = Complex64::new(0.0, 1.0);
                    m[(j, i)] = Complex64::new(0.0, -1.0);
                }
            }
            basis.push(m);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::state::{bloch_vector, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus_density() -> DensityOperator {
        PureState::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)])
            .unwrap()
            .to_density()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn identity_channel_is_identity() {
        let rho = plus_density();
        let out = QuantumChannel::identity(2).apply(&rho).unwrap();
        assert!(out.approx_eq(&rho, TOL));
    }

    #[test]
    fn phase_flip_contracts_x() {
        let out = QuantumChannel::phase_flip(0.3)
            .unwrap()
            .apply(&plus_density())
            .unwrap();
        let b = bloch_vector(&out).unwrap();
        assert!((b[0] - 0.4).abs() < TOL, "{b:?}");
        assert!((out.trace() - 1.0).abs() < TOL);
    }

    #[test]
    fn unital_fixes_maximally_mixed() {
        let half = DensityOperator::maximally_mixed(2);
        for chan in [
            QuantumChannel::phase_flip(0.2).unwrap(),
            QuantumChannel::depolarizing(0.6).unwrap(),
            QuantumChannel::z_rotation(1.1),
        ] {
            assert!(chan.apply(&half).unwrap().approx_eq(&half, TOL));
        }
    }

    #[test]
    fn apply_dimension_mismatch() {
        let err = QuantumChannel::identity(2).apply(&DensityOperator::maximally_mixed(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn phase_noise_constructor_examples() {
        let z = Observable::pauli_z();
        let id = QuantumChannel::phase_noise(&z, &[vec![c(1.0), c(1.0)]]).unwrap();
        assert!(id.same_action(&QuantumChannel::identity(2), TOL));

        let (a, b) = (0.7f64.sqrt(), 0.3f64.sqrt());
        let pf = QuantumChannel::phase_noise(&z, &[vec![c(a), c(a)], vec![c(b), c(-b)]]).unwrap();
        assert!(pf.same_action(&QuantumChannel::phase_flip(0.3).unwrap(), TOL));
        assert!(pf.is_phase_noise(&z));

        // c(k) = e^{iφk} with k the eigenvalue index in ascending order (-1, +1).
        let phi = 0.8;
        let rot = QuantumChannel::phase_noise(
            &z,
            &[vec![
                Complex64::from_polar(1.0, 0.0),
                Complex64::from_polar(1.0, phi),
            ]],
        )
        .unwrap();
        assert!(rot.same_action(&QuantumChannel::z_rotation(-phi), TOL));
    }

    #[test]
    fn phase_noise_rejects_bad_columns() {
        let z = Observable::pauli_z();
        let err = QuantumChannel::phase_noise(&z, &[vec![c(1.0), c(0.9)]]);
        assert!(matches!(
            err,
            Err(Error::InvalidCoefficients { index: 1, .. })
        ));
    }

    #[test]
    fn phase_noise_predicate() {
        let z = Observable::pauli_z();
        assert!(QuantumChannel::phase_flip(0.4).unwrap().is_phase_noise(&z));
        assert!(!QuantumChannel::bit_flip(0.1).unwrap().is_phase_noise(&z));
        assert!(QuantumChannel::identity(2).is_phase_noise(&Observable::pauli_x()));
        assert!(QuantumChannel::z_rotation(0.3).is_phase_noise(&z));
        assert!(!QuantumChannel::z_rotation(0.3).is_phase_noise(&Observable::pauli_x()));
    }

    #[test]
    fn degenerate_k_requires_subspace_coherence() {
        // K = diag(1, 1, -1): a flip inside the degenerate block keeps the
        // block projector but not the individual eigenprojectors.
        let k = Observable::from_real_diag(&[1.0, 1.0, -1.0]);
        let dephase_block = QuantumChannel::new(vec![
            ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]).scale_real(0.5f64.sqrt()),
            ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0]).scale_real(0.5f64.sqrt()),
            ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.0]).scale_real(0.5f64.sqrt()),
            ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0]),
        ])
        .unwrap();
        // Keeps each |k⟩⟨k| but halves the coherence inside the degenerate block.
        assert!(!dephase_block.is_phase_noise(&k));
        let rot = QuantumChannel::unitary(ComplexMatrix::from_diag(&[
            c(1.0),
            c(1.0),
            Complex64::from_polar(1.0, 0.4),
        ]))
        .unwrap();
        assert!(rot.is_phase_noise(&k));
    }

    #[test]
    fn unital_predicate() {
        assert!(QuantumChannel::phase_flip(0.3).unwrap().is_unital());
        assert!(QuantumChannel::depolarizing(0.5).unwrap().is_unital());
        let ad = QuantumChannel::amplitude_damping(0.5).unwrap();
        assert!(!ad.is_unital());
        let sum = ad
            .kraus()
            .iter()
            .fold(ComplexMatrix::zeros(2), |acc, e| &acc + &(e * &e.dagger()));
        assert!(sum.approx_eq(&ComplexMatrix::from_real_diag(&[1.5, 0.5]), TOL));
    }

    #[test]
    fn compose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ad = QuantumChannel::amplitude_damping(0.3).unwrap();
        let composed = QuantumChannel::identity(2).compose(&ad).unwrap();
        for _ in 0..100 {
            let rho = random::density(&mut rng, 2);
            let a = composed.apply(&rho).unwrap();
            let b = ad.apply(&rho).unwrap();
            assert!(a.approx_eq(&b, TOL));
        }

        let (p, q) = (0.2, 0.35);
        let two = QuantumChannel::phase_flip(p)
            .unwrap()
            .compose(&QuantumChannel::phase_flip(q).unwrap())
            .unwrap();
        let expected = QuantumChannel::phase_flip(p + q - 2.0 * p * q).unwrap();
        assert!(two.same_action(&expected, TOL));

        let z = Observable::pauli_z();
        let n1 = random::phase_noise(&mut rng, &z, 3);
        let n2 = random::phase_noise(&mut rng, &z, 2);
        let both = n1.compose(&n2).unwrap();
        assert!(both.is_phase_noise(&z));
        assert!(both.completeness_deviation() < TOL);
    }

    #[test]
    fn compose_dimension_mismatch() {
        assert!(QuantumChannel::identity(2)
            .compose(&QuantumChannel::identity(3))
            .is_err());
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(QuantumChannel::new(vec![]).unwrap_err(), Error::EmptyKraus);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            QuantumChannel::new(vec![half]),
            Err(Error::NotComplete(_))
        ));
        assert!(QuantumChannel::phase_flip(1.5).is_err());
    }
}
